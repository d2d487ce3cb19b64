//! Shooting cross-check for the radial eigenproblem.
//!
//! Both coordinate poles are regular singular points, so the integration is
//! seeded a little away from each by the local expansions in `frobenius` and
//! carried to the junction radius r = 1 with an adaptive Dormand-Prince
//! 5(4) integrator. From the origin the solution given (g0, λ) is
//! X = O1 + g0·O2 in the regular 2D subspace; from infinity the
//! square-integrable subspace is spanned by the single vanishing branch V
//! (empty for degree 1). The mismatch is the component of X̂ = X/|X| left
//! over after projecting onto that subspace, split into its f- and
//! g-channel magnitudes; (g0, λ) roots of the mismatch are exactly the
//! co-rotational eigenvalues.

use crate::bubbles::Chart;
use crate::corotational::{reduce_to_radial, RadialSystem};
use crate::error::{Error, Result};

use super::frobenius::{
    infinity_l2_expansion, infinity_vanishing_expansion, origin_expansion, OriginBranch,
};

/// Where the integrations are seeded and matched.
#[derive(Clone, Copy, Debug)]
pub struct ShootConfig {
    pub seed_radius: f64,
    pub junction_radius: f64,
    pub expansion_order: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            seed_radius: 0.08,
            junction_radius: 1.0,
            expansion_order: 18,
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

/// Which infinity-side subspace the outgoing solution must hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchBranch {
    /// branches square-integrable on the flat plane (empty for m = 1)
    SquareIntegrable,
    /// the pointwise-vanishing branch f̃ ~ t^m (exists for every m; for
    /// m = 1 it is the non-L² resonance direction)
    Vanishing,
}

// Dormand-Prince 5(4) tableau
const DP_C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];
const DP_A: [[f64; 5]; 5] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
];
const DP_B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 4];

fn axpy(y: &State, h: f64, k: &State) -> State {
    [
        y[0] + h * k[0],
        y[1] + h * k[1],
        y[2] + h * k[2],
        y[3] + h * k[3],
    ]
}

/// Adaptive Dormand-Prince integration of y' = rhs(x, y) from x0 to x1.
pub fn integrate<F: Fn(f64, &State) -> State>(
    rhs: F,
    x0: f64,
    x1: f64,
    y0: State,
    rtol: f64,
    atol: f64,
) -> Result<State> {
    assert!(x1 > x0);
    let mut x = x0;
    let mut y = y0;
    let mut h = ((x1 - x0) / 64.0).min(0.05);
    let h_min = (x1 - x0) * 1e-14;
    let mut k1 = rhs(x, &y);
    let mut steps = 0usize;
    while x < x1 {
        if h < h_min {
            return Err(Error::StepFailure {
                location: x,
                step: h,
            });
        }
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::StepFailure {
                location: x,
                step: h,
            });
        }
        if x + h > x1 {
            h = x1 - x;
        }
        let mut k = [[0.0f64; 4]; 7];
        k[0] = k1;
        for stage in 1..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let aij = DP_A[stage - 1][j];
                if aij != 0.0 {
                    yi = axpy(&yi, h * aij, kj);
                }
            }
            k[stage] = rhs(x + DP_C[stage] * h, &yi);
        }
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            if DP_B5[j] != 0.0 {
                y5 = axpy(&y5, h * DP_B5[j], kj);
            }
        }
        k[6] = rhs(x + h, &y5);
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate().take(7) {
            if DP_B4[j] != 0.0 {
                y4 = axpy(&y4, h * DP_B4[j], kj);
            }
        }
        let mut err = 0.0f64;
        for c in 0..4 {
            let sc = atol + rtol * y[c].abs().max(y5[c].abs());
            err = err.max(((y5[c] - y4[c]) / sc).abs());
        }
        if err <= 1.0 {
            x += h;
            y = y5;
            k1 = k[6]; // first-same-as-last
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(y)
}

fn system_rhs(sys: &RadialSystem) -> impl Fn(f64, &State) -> State + '_ {
    move |x, y| {
        let (d2f, d2g) = sys.second_derivatives(x, y[0], y[1], y[2], y[3]);
        [y[1], d2f, y[3], d2g]
    }
}

/// Junction states of the two origin branches.
fn origin_states(m: u32, lambda: f64, cfg: &ShootConfig) -> Result<(State, State)> {
    let sys = reduce_to_radial(m, lambda, Chart::R)?;
    let rhs = system_rhs(&sys);
    let mut out = [[0.0; 4]; 2];
    for (slot, branch) in [
        (0usize, OriginBranch::FNormalized),
        (1usize, OriginBranch::GBranch),
    ] {
        let exp = origin_expansion(m, lambda, branch, cfg.expansion_order)?;
        let y0 = exp.state(cfg.seed_radius);
        out[slot] = integrate(
            &rhs,
            cfg.seed_radius,
            cfg.junction_radius,
            y0,
            cfg.rtol,
            cfg.atol,
        )?;
    }
    Ok((out[0], out[1]))
}

/// Junction state (r-chart variables) of an infinity-side branch, obtained
/// by integrating the Kelvin chart from t = seed to t = 1/junction and
/// transforming: f(r) = f̃(t), f'(r) = −t² f̃'(t).
fn infinity_state(
    m: u32,
    lambda: f64,
    cfg: &ShootConfig,
    branch: MatchBranch,
) -> Result<Option<State>> {
    let exp = match branch {
        MatchBranch::SquareIntegrable => {
            match infinity_l2_expansion(m, lambda, cfg.expansion_order)? {
                None => return Ok(None),
                Some(e) => e,
            }
        }
        MatchBranch::Vanishing => infinity_vanishing_expansion(m, lambda, cfg.expansion_order)?,
    };
    let sys = reduce_to_radial(m, lambda, Chart::KelvinT)?;
    let rhs = system_rhs(&sys);
    let y0 = exp.state(cfg.seed_radius);
    let t_j = 1.0 / cfg.junction_radius;
    let yt = integrate(&rhs, cfg.seed_radius, t_j, y0, cfg.rtol, cfg.atol)?;
    Ok(Some([yt[0], -t_j * t_j * yt[1], yt[2], -t_j * t_j * yt[3]]))
}

fn norm4(v: &State) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn channel_split(v: &State) -> [f64; 2] {
    [v[0].hypot(v[1]), v[2].hypot(v[3])]
}

/// Matching defect of the outgoing solution with given g(0) = g0 against
/// the square-integrable subspace at infinity: (f-channel, g-channel)
/// magnitudes of the unmatched component of the unit-normalized junction
/// state. Zeros over (g0, λ) are eigenvalues.
pub fn shoot_mismatch(m: u32, lambda: f64, g0: f64) -> Result<[f64; 2]> {
    shoot_mismatch_with(
        m,
        lambda,
        g0,
        MatchBranch::SquareIntegrable,
        &ShootConfig::default(),
    )
}

pub fn shoot_mismatch_with(
    m: u32,
    lambda: f64,
    g0: f64,
    branch: MatchBranch,
    cfg: &ShootConfig,
) -> Result<[f64; 2]> {
    let (o1, o2) = origin_states(m, lambda, cfg)?;
    let mut x = [0.0f64; 4];
    for c in 0..4 {
        x[c] = o1[c] + g0 * o2[c];
    }
    let nx = norm4(&x);
    if nx == 0.0 {
        return Err(Error::NonFinite("outgoing junction state"));
    }
    for v in x.iter_mut() {
        *v /= nx;
    }
    match infinity_state(m, lambda, cfg, branch)? {
        None => Ok(channel_split(&x)),
        Some(v) => {
            let nv = norm4(&v);
            let vh: State = [v[0] / nv, v[1] / nv, v[2] / nv, v[3] / nv];
            let dot: f64 = x.iter().zip(&vh).map(|(a, b)| a * b).sum();
            let xi: State = [
                x[0] - dot * vh[0],
                x[1] - dot * vh[1],
                x[2] - dot * vh[2],
                x[3] - dot * vh[3],
            ];
            Ok(channel_split(&xi))
        }
    }
}

/// Result of a shooting refinement around a pencil eigenvalue estimate.
#[derive(Clone, Copy, Debug)]
pub struct ShootRefinement {
    pub lambda: f64,
    pub g0: f64,
    pub mismatch: [f64; 2],
}

/// Smallest normalized defect over the outgoing family at fixed λ:
/// minimizes |(I−P)(O1 + g0 O2)|²/|O1 + g0 O2|² in closed form (a 2×2
/// generalized eigenproblem), together with the minimizing g0.
fn best_defect_at(m: u32, lambda: f64, cfg: &ShootConfig) -> Result<(f64, f64)> {
    let (o1, o2) = origin_states(m, lambda, cfg)?;
    let v = infinity_state(m, lambda, cfg, MatchBranch::SquareIntegrable)?;
    let proj = |w: &State| -> State {
        match &v {
            None => *w,
            Some(v) => {
                let nv = norm4(v);
                let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nv * nv);
                [
                    w[0] - dot * v[0],
                    w[1] - dot * v[1],
                    w[2] - dot * v[2],
                    w[3] - dot * v[3],
                ]
            }
        }
    };
    let q1 = proj(&o1);
    let q2 = proj(&o2);
    let dot = |a: &State, b: &State| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    // minimize (c₁ q₁ + c₂ q₂)·(…) / (c₁ o₁ + c₂ o₂)·(…): 2×2 pencil
    let a11 = dot(&q1, &q1);
    let a12 = dot(&q1, &q2);
    let a22 = dot(&q2, &q2);
    let b11 = dot(&o1, &o1);
    let b12 = dot(&o1, &o2);
    let b22 = dot(&o2, &o2);
    // generalized symmetric 2×2: det(A − τB) = 0
    let pa = b11 * b22 - b12 * b12;
    let pb = -(a11 * b22 + a22 * b11 - 2.0 * a12 * b12);
    let pc = a11 * a22 - a12 * a12;
    let disc = (pb * pb - 4.0 * pa * pc).max(0.0).sqrt();
    let tau = if pa.abs() < 1e-300 {
        0.0
    } else {
        ((-pb - disc) / (2.0 * pa)).max(0.0)
    };
    // eigenvector of (A − τB)
    let m11 = a11 - tau * b11;
    let m12 = a12 - tau * b12;
    let m22 = a22 - tau * b22;
    let (c1, c2) = if m11.abs() >= m22.abs() {
        (-m12, m11)
    } else {
        (m22, -m12)
    };
    let g0 = if c1.abs() < 1e-14 * c2.abs() {
        // outgoing state dominated by the pure-g branch
        f64::INFINITY
    } else {
        c2 / c1
    };
    Ok((tau.max(0.0).sqrt(), g0))
}

/// Refine an eigenvalue estimate by minimizing the shooting defect over λ
/// (golden-section) with g0 eliminated in closed form at each λ.
pub fn refine_eigenvalue(m: u32, lambda_guess: f64, half_width: f64) -> Result<ShootRefinement> {
    let cfg = ShootConfig::default();
    let mut a = lambda_guess - half_width;
    let mut b = lambda_guess + half_width;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = best_defect_at(m, x1, &cfg)?.0;
    let mut f2 = best_defect_at(m, x2, &cfg)?.0;
    for _ in 0..60 {
        if (b - a).abs() < 1e-10 * (1.0 + lambda_guess.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = best_defect_at(m, x1, &cfg)?.0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = best_defect_at(m, x2, &cfg)?.0;
        }
    }
    let lambda = 0.5 * (a + b);
    let (_, g0) = best_defect_at(m, lambda, &cfg)?;
    let g0 = if g0.is_finite() { g0 } else { 0.0 };
    let mismatch = shoot_mismatch(m, lambda, g0)?;
    Ok(ShootRefinement {
        lambda,
        g0,
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_matches_exponential() {
        // y' = y on the first slot, others frozen
        let rhs = |_: f64, y: &State| [y[0], 0.0, 0.0, 0.0];
        let y = integrate(rhs, 0.0, 1.0, [1.0, 0.0, 0.0, 0.0], 1e-12, 1e-14).unwrap();
        assert!((y[0] - 1f64.exp()).abs() < 1e-11, "{}", y[0]);
    }

    #[test]
    fn integrator_matches_oscillator() {
        let rhs = |_: f64, y: &State| [y[1], -y[0], 0.0, 0.0];
        let y = integrate(
            rhs,
            0.0,
            2.0 * std::f64::consts::PI,
            [1.0, 0.0, 0.0, 0.0],
            1e-12,
            1e-14,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9, "{}", y[0]);
        assert!(y[1].abs() < 1e-9);
    }

    /// The zero mode connects the origin family to the decaying branch at
    /// λ = 0 for m = 2: its g(0) parameter is 0.
    #[test]
    fn zero_mode_connection_m2() {
        let mm = shoot_mismatch(2, 0.0, 0.0).unwrap();
        let norm = mm[0].hypot(mm[1]);
        assert!(norm <= 1e-6, "mismatch {norm:e}");
    }

    #[test]
    fn zero_mode_connection_m3() {
        let mm = shoot_mismatch(3, 0.0, 0.0).unwrap();
        let norm = mm[0].hypot(mm[1]);
        assert!(norm <= 1e-6, "mismatch {norm:e}");
    }

    /// m = 1, λ = 0: the outgoing solution is the resonance profile — it
    /// matches the vanishing branch — but the square-integrable matching
    /// condition fails outright (the L² subspace at infinity is empty).
    #[test]
    fn degree_one_resonance_is_not_an_l2_match() {
        let res = shoot_mismatch_with(1, 0.0, 0.0, MatchBranch::Vanishing, &ShootConfig::default())
            .unwrap();
        assert!(res[0].hypot(res[1]) < 1e-6, "resonance connection broken");
        let l2 = shoot_mismatch(1, 0.0, 0.0).unwrap();
        assert!(
            (l2[0].hypot(l2[1]) - 1.0).abs() < 1e-12,
            "L² defect should be the full unit state"
        );
    }

    #[test]
    fn generic_parameters_do_not_match() {
        let mm = shoot_mismatch(2, 0.37, 0.3).unwrap();
        assert!(mm[0].hypot(mm[1]) >= 1e-2, "{mm:?}");
    }

    #[test]
    fn refinement_recovers_lambda_zero_for_m2() {
        let r = refine_eigenvalue(2, 3e-3, 0.05).unwrap();
        assert!(r.lambda.abs() < 1e-6, "lambda {}", r.lambda);
        assert!(r.mismatch[0].hypot(r.mismatch[1]) < 1e-6);
    }
}
