//! Exact-rational Frobenius engine for the degree-1 Kelvin-chart system.
//!
//! With f(t) = Σ a_n tⁿ and g(t) = Σ b_n tⁿ, multiplying the coupled pair
//! through by t²(1+t²)² turns both equations into polynomial identities whose
//! coefficients must vanish order by order:
//!
//! ```text
//! A: (1+t²)² Σ (n²−1) a_n tⁿ − 4t(1+t²) Σ n b_n tⁿ + (8−4λ) t² Σ a_n tⁿ = 0
//! B: (1+t²)² Σ n² b_n tⁿ + 4t(1+t²) Σ n a_n tⁿ + 4t(1−t²) Σ a_n tⁿ − 4λ t² Σ b_n tⁿ = 0
//! ```
//!
//! Collecting the coefficient of tⁿ⁺² gives linear recursions with leading
//! factors (n+2)²−1 and (n+2)², never zero for n ≥ 0, so the four seeds
//! a₀, a₁, b₀, b₁ determine everything. The zero seed (forced when f, g are
//! square-integrable, which makes the expansions start at t²) propagates to
//! exactly zero coefficients at every order and for every rational λ; the
//! seed a₁ = −2 instead regenerates the Kelvin image of the dilation zero
//! mode — the non-square-integrable resonance branch.
//!
//! Everything in this module is exact rational arithmetic; no floating
//! point anywhere.

use std::io::{self, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Which coefficient sequence a term draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesVar {
    A,
    B,
}

/// One term of a polynomial identity: poly(t) · Σ (c₀ + c₁ n + c₂ n²) x_n tⁿ.
struct IdentityTerm {
    poly: Vec<Rational>,
    nweight: (Rational, Rational, Rational),
    var: SeriesVar,
}

impl IdentityTerm {
    fn weight(&self, k: usize) -> Rational {
        let kf = rat(k as i64);
        &self.nweight.0 + &self.nweight.1 * &kf + &self.nweight.2 * &kf * &kf
    }
}

fn poly(coeffs: &[Rational]) -> Vec<Rational> {
    coeffs.to_vec()
}

/// The two identities for given λ; term order puts the leading
/// (1+t²)²-weighted term first.
fn identities(lambda: &Rational) -> (Vec<IdentityTerm>, Vec<IdentityTerm>) {
    let one_plus_t2_sq = poly(&[rat(1), rat(0), rat(2), rat(0), rat(1)]);
    let a_id = vec![
        IdentityTerm {
            poly: one_plus_t2_sq.clone(),
            nweight: (rat(-1), rat(0), rat(1)), // n² − 1
            var: SeriesVar::A,
        },
        IdentityTerm {
            // −4t(1+t²): coefficients at t¹ and t³
            poly: poly(&[rat(0), rat(-4), rat(0), rat(-4)]),
            nweight: (rat(0), rat(1), rat(0)), // n
            var: SeriesVar::B,
        },
        IdentityTerm {
            // (8 − 4λ) t²
            poly: poly(&[rat(0), rat(0), rat(8) - rat(4) * lambda]),
            nweight: (rat(1), rat(0), rat(0)),
            var: SeriesVar::A,
        },
    ];
    let b_id = vec![
        IdentityTerm {
            poly: one_plus_t2_sq,
            nweight: (rat(0), rat(0), rat(1)), // n²
            var: SeriesVar::B,
        },
        IdentityTerm {
            // +4t(1+t²)
            poly: poly(&[rat(0), rat(4), rat(0), rat(4)]),
            nweight: (rat(0), rat(1), rat(0)),
            var: SeriesVar::A,
        },
        IdentityTerm {
            // +4t(1−t²)
            poly: poly(&[rat(0), rat(4), rat(0), rat(-4)]),
            nweight: (rat(1), rat(0), rat(0)),
            var: SeriesVar::A,
        },
        IdentityTerm {
            // −4λ t²
            poly: poly(&[rat(0), rat(0), rat(-4) * lambda]),
            nweight: (rat(1), rat(0), rat(0)),
            var: SeriesVar::B,
        },
    ];
    (a_id, b_id)
}

/// One linear contribution c · x_index to a recursion right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    pub var: SeriesVar,
    pub index: usize,
    pub coeff: Rational,
}

/// Recursion row for one target index: lead · x_target = Σ contributions.
#[derive(Clone, Debug)]
pub struct RecursionRow {
    pub target: usize,
    /// (target² − 1) for the a-update, target² for the b-update
    pub lead: Rational,
    pub terms: Vec<Contribution>,
}

/// Recursion tables for both updates, derived by expanding the polynomial
/// identities and collecting coefficients. λ enters the table entries
/// linearly.
#[derive(Clone, Debug)]
pub struct RecursionTable {
    pub lambda: Rational,
    pub a_rows: Vec<RecursionRow>,
    pub b_rows: Vec<RecursionRow>,
}

fn derive_row(terms: &[IdentityTerm], var: SeriesVar, target: usize) -> RecursionRow {
    let mut lead = Rational::zero();
    let mut rhs: Vec<Contribution> = Vec::new();
    for term in terms {
        for (j, pj) in term.poly.iter().enumerate() {
            if pj.is_zero() || j > target {
                continue;
            }
            let k = target - j;
            let c = pj * term.weight(k);
            if c.is_zero() {
                continue;
            }
            if term.var == var && k == target {
                lead += c;
            } else {
                // move to the right-hand side
                rhs.push(Contribution {
                    var: term.var,
                    index: k,
                    coeff: -c,
                });
            }
        }
    }
    debug_assert!(rhs.iter().all(|c| c.index < target));
    RecursionRow {
        target,
        lead,
        terms: rhs,
    }
}

/// Derive the recursion tables for targets 2..=order.
pub fn derive_recursions(lambda: &Rational, order: usize) -> RecursionTable {
    let (a_id, b_id) = identities(lambda);
    let mut a_rows = Vec::new();
    let mut b_rows = Vec::new();
    for target in 2..=order {
        a_rows.push(derive_row(&a_id, SeriesVar::A, target));
        b_rows.push(derive_row(&b_id, SeriesVar::B, target));
    }
    RecursionTable {
        lambda: lambda.clone(),
        a_rows,
        b_rows,
    }
}

/// Seed coefficients a₀, a₁, b₀, b₁.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSeed {
    pub a0: Rational,
    pub a1: Rational,
    pub b0: Rational,
    pub b1: Rational,
}

impl SeriesSeed {
    pub fn zero() -> Self {
        Self {
            a0: Rational::zero(),
            a1: Rational::zero(),
            b0: Rational::zero(),
            b1: Rational::zero(),
        }
    }

    /// a₁ = −2, the seed of the resonance branch.
    pub fn resonance() -> Self {
        Self {
            a1: rat(-2),
            ..Self::zero()
        }
    }
}

/// Exact coefficient sequences through a given order.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesState {
    pub lambda: Rational,
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl SeriesState {
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }
}

/// Run the recursions from a seed through the given order (≥ 4), exactly.
pub fn series_run(seed: &SeriesSeed, lambda: &Rational, order: usize) -> SeriesState {
    assert!(order >= 4, "series order must be at least 4");
    let table = derive_recursions(lambda, order);
    let mut a = vec![Rational::zero(); order + 1];
    let mut b = vec![Rational::zero(); order + 1];
    a[0] = seed.a0.clone();
    a[1] = seed.a1.clone();
    b[0] = seed.b0.clone();
    b[1] = seed.b1.clone();
    let fetch = |a: &[Rational], b: &[Rational], c: &Contribution| -> Rational {
        let x = match c.var {
            SeriesVar::A => &a[c.index],
            SeriesVar::B => &b[c.index],
        };
        &c.coeff * x
    };
    for n in 2..=order {
        let row = &table.b_rows[n - 2];
        let mut acc = Rational::zero();
        for c in &row.terms {
            acc += fetch(&a, &b, c);
        }
        b[n] = acc / &row.lead;
        let row = &table.a_rows[n - 2];
        let mut acc = Rational::zero();
        for c in &row.terms {
            acc += fetch(&a, &b, c);
        }
        a[n] = acc / &row.lead;
    }
    SeriesState {
        lambda: lambda.clone(),
        a,
        b,
    }
}

/// Coefficients of both polynomial identities evaluated on a state, rows
/// t⁰..tᵒʳᵈᵉʳ. A state built by `series_run` zeroes every row from t² up;
/// rows t⁰ and t¹ vanish exactly when the seed satisfies a₀ = 0 and b₁ = 0
/// (the constraints a genuine solution must meet).
pub fn ode_residual_coefficients(state: &SeriesState) -> (Vec<Rational>, Vec<Rational>) {
    let (a_id, b_id) = identities(&state.lambda);
    let eval = |terms: &[IdentityTerm]| -> Vec<Rational> {
        let order = state.order();
        let mut rows = vec![Rational::zero(); order + 1];
        for term in terms {
            for (j, pj) in term.poly.iter().enumerate() {
                if pj.is_zero() {
                    continue;
                }
                for k in 0..=order.saturating_sub(j) {
                    let x = match term.var {
                        SeriesVar::A => &state.a[k],
                        SeriesVar::B => &state.b[k],
                    };
                    if x.is_zero() {
                        continue;
                    }
                    rows[j + k] += pj * term.weight(k) * x;
                }
            }
        }
        rows
    };
    (eval(&a_id), eval(&b_id))
}

/// Closed-form profiles with exact rational Taylor coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedProfile {
    /// 2t(t²−1)/(1+t²)², the Kelvin image of the zero mode's first profile
    KelvinZeroModeF,
    /// 4t²/(1+t²)²
    KelvinZeroModeG,
    /// 2t/(1+t²)
    BubbleF,
    /// (1−t²)/(1+t²)
    BubbleG,
}

impl FromStr for NamedProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kelvin_zero_mode_f" => Ok(Self::KelvinZeroModeF),
            "kelvin_zero_mode_g" => Ok(Self::KelvinZeroModeG),
            "bubble_F" => Ok(Self::BubbleF),
            "bubble_G" => Ok(Self::BubbleG),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// Taylor coefficients of p(t)/q(t) through `order` by exact long division.
pub fn rational_function_taylor(num: &[i64], den: &[i64], order: usize) -> Vec<Rational> {
    assert!(den[0] != 0, "denominator must be a unit at t = 0");
    let q0 = rat(den[0]);
    let mut out = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut acc = if n < num.len() {
            rat(num[n])
        } else {
            Rational::zero()
        };
        for j in 1..=n.min(den.len() - 1) {
            acc -= rat(den[j]) * &out[n - j];
        }
        out.push(acc / &q0);
    }
    out
}

/// Exact Taylor coefficients of a named profile.
pub fn taylor_of(profile: NamedProfile, order: usize) -> Vec<Rational> {
    match profile {
        NamedProfile::KelvinZeroModeF => {
            rational_function_taylor(&[0, -2, 0, 2], &[1, 0, 2, 0, 1], order)
        }
        NamedProfile::KelvinZeroModeG => {
            rational_function_taylor(&[0, 0, 4], &[1, 0, 2, 0, 1], order)
        }
        NamedProfile::BubbleF => rational_function_taylor(&[0, 2], &[1, 0, 1], order),
        NamedProfile::BubbleG => rational_function_taylor(&[1, 0, -1], &[1, 0, 1], order),
    }
}

/// Exact equality of a state's coefficients with a named profile's Taylor
/// series through the state's order. The f-profiles compare against the `a`
/// sequence, the g-profiles against `b`.
pub fn series_compare_taylor(profile: NamedProfile, state: &SeriesState) -> bool {
    let coeffs = taylor_of(profile, state.order());
    let side = match profile {
        NamedProfile::KelvinZeroModeF | NamedProfile::BubbleF => &state.a,
        NamedProfile::KelvinZeroModeG | NamedProfile::BubbleG => &state.b,
    };
    coeffs == *side
}

/// Emit `n,a_n,b_n` rows with coefficients as exact `p/q` strings.
pub fn write_series_csv<W: Write>(state: &SeriesState, out: &mut W) -> io::Result<()> {
    writeln!(out, "n,a_n,b_n")?;
    for n in 0..=state.order() {
        writeln!(out, "{},{},{}", n, state.a[n], state.b[n])?;
    }
    Ok(())
}

/// Parse an exact rational from `p/q` or integer text.
pub fn parse_rational(text: &str) -> Result<Rational> {
    BigRational::from_str(text.trim())
        .map_err(|_| Error::UnknownProfile(format!("not a rational: {text}")))
}
