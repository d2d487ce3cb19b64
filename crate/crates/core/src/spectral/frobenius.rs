//! Floating-point local expansions of the radial pair at the singular
//! endpoints, for arbitrary degree. They seed the shooting integrations away
//! from the coordinate poles (the exact-rational engine in `series` plays
//! the same role, exactly, for the degree-1 Kelvin chart).
//!
//! At the origin the indicial roots are ±m for f and {0, 0} for g, so the
//! regular subspace is spanned by the f-normalized branch (f ~ r^m, g(0)=0)
//! and the g-branch (g(0) = 1, with f induced through the coupling). At
//! infinity (t = 0 in the Kelvin chart) the only branch vanishing faster
//! than t is f̃ ~ t^m with its induced g̃ ~ −2 t^{2m}; for m = 1 that branch
//! decays like 1/r but is not square-integrable, and no nonzero local
//! solution is: the square-integrable seed forces every Taylor coefficient
//! to vanish.

use crate::bubbles::Chart;
use crate::error::Result;

/// Truncated power-series pair (f, g) at a singular endpoint.
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl LocalExpansion {
    /// State [f, f', g, g'] at x, by Horner evaluation.
    pub fn state(&self, x: f64) -> [f64; 4] {
        let eval = |c: &[f64]| {
            let mut v = 0.0;
            for n in (0..c.len()).rev() {
                v = v * x + c[n];
            }
            let mut dv = 0.0;
            for n in (1..c.len()).rev() {
                dv = dv * x + n as f64 * c[n];
            }
            (v, dv)
        };
        let (f, df) = eval(&self.a);
        let (g, dg) = eval(&self.b);
        [f, df, g, dg]
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(self.b.iter()).all(|c| *c == 0.0)
    }
}

/// Which solution of the 2D regular subspace at the origin to expand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OriginBranch {
    /// f = x^m + …, g(0) = 0
    FNormalized,
    /// g(0) = 1, g'(0) = 0, f induced by the coupling
    GBranch,
}

/// Series coefficients of F = 2 Σ (−1)^j x^{m(2j+1)}.
fn series_f(m: usize, len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    let mut j = 0;
    while m + 2 * m * j < len {
        c[m + 2 * m * j] = 2.0 * if j % 2 == 0 { 1.0 } else { -1.0 };
        j += 1;
    }
    c
}

/// Series of G' = σ 4m Σ (−1)^j (j+1) x^{2m-1+2mj}; σ = −1 in the Kelvin chart.
fn series_dg(m: usize, len: usize, chart: Chart) -> Vec<f64> {
    let sigma = match chart {
        Chart::R => 1.0,
        Chart::KelvinT => -1.0,
    };
    let mut c = vec![0.0; len];
    let mut j = 0;
    while 2 * m - 1 + 2 * m * j < len {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        c[2 * m - 1 + 2 * m * j] = sigma * 4.0 * m as f64 * sign * (j + 1) as f64;
        j += 1;
    }
    c
}

/// Series of ρ = 4 Σ (−1)^j (j+1) x^{2j}.
fn series_rho(len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    let mut j = 0;
    while 2 * j < len {
        c[2 * j] = 4.0 * if j % 2 == 0 { 1.0 } else { -1.0 } * (j + 1) as f64;
        j += 1;
    }
    c
}

/// Expand order by order. The chart fixes the coupling sign: the f-equation
/// coupling is −(2m/x)(F g' + G' f) in the r-chart and +(…) in the Kelvin
/// chart, and conversely for the g-equation.
fn expand(
    m: u32,
    lambda: f64,
    chart: Chart,
    f_seed: f64,
    g_seed: f64,
    order: usize,
) -> LocalExpansion {
    let mu = m as usize;
    let mf = m as f64;
    let len = order + 1;
    let wlen = 3 * len + 2;
    let c_f = series_f(mu, wlen);
    let c_dg = series_dg(mu, wlen, chart);
    let c_rho = series_rho(wlen);
    // coupling sign in front of (2m/x)(F g' + G' f) on the f-equation RHS
    let sgn = match chart {
        Chart::R => -1.0,
        Chart::KelvinT => 1.0,
    };
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    b[0] = g_seed;
    for n in 1..len {
        // g-equation: n² b_n = −sgn · 2m · n · (F f)_n + λ (ρ g)_{n-2}
        let mut conv = 0.0;
        for k in 0..n {
            let j = n - k;
            if j < wlen {
                conv += c_f[j] * a[k];
            }
        }
        let mut rhs = -sgn * 2.0 * mf * n as f64 * conv;
        if n >= 2 {
            let mut lr = 0.0;
            for k in 0..=n - 2 {
                let j = n - 2 - k;
                if j < wlen {
                    lr += c_rho[j] * b[k];
                }
            }
            rhs += lambda * lr;
        }
        b[n] = rhs / (n * n) as f64;
        // f-equation: (n²−m²) a_n = sgn·2m[(F g')_{n-1} + (G' f)_{n-1}] + λ (ρ f)_{n-2}
        if n == mu {
            a[n] = f_seed;
            continue;
        }
        let mut conv1 = 0.0;
        for k in 1..=n {
            let j = n - k;
            if j < wlen {
                conv1 += c_f[j] * k as f64 * b[k];
            }
        }
        let mut conv2 = 0.0;
        for k in 0..n {
            let j = n - 1 - k;
            if j < wlen {
                conv2 += c_dg[j] * a[k];
            }
        }
        let mut rhs = sgn * 2.0 * mf * (conv1 + conv2);
        if n >= 2 {
            let mut lr = 0.0;
            for k in 0..=n - 2 {
                let j = n - 2 - k;
                if j < wlen {
                    lr += c_rho[j] * a[k];
                }
            }
            rhs += lambda * lr;
        }
        a[n] = rhs / ((n * n) as f64 - mf * mf);
    }
    LocalExpansion { a, b }
}

/// Local expansion at r = 0 in the r-chart.
pub fn origin_expansion(
    m: u32,
    lambda: f64,
    branch: OriginBranch,
    order: usize,
) -> Result<LocalExpansion> {
    crate::bubbles::check_degree(m)?;
    let (fs, gs) = match branch {
        OriginBranch::FNormalized => (1.0, 0.0),
        OriginBranch::GBranch => (0.0, 1.0),
    };
    Ok(expand(m, lambda, Chart::R, fs, gs, order))
}

/// The branch vanishing at t = 0 in the Kelvin chart: f̃ = t^m + …, g̃
/// induced. Decays like r^{-m} on the plane.
pub fn infinity_vanishing_expansion(m: u32, lambda: f64, order: usize) -> Result<LocalExpansion> {
    crate::bubbles::check_degree(m)?;
    Ok(expand(m, lambda, Chart::KelvinT, 1.0, 0.0, order))
}

/// The square-integrable branch at infinity, when one exists. For m = 1 the
/// local expansion analysis forces every coefficient of an L² solution to
/// zero, so there is no branch to integrate and `None` is returned.
pub fn infinity_l2_expansion(m: u32, lambda: f64, order: usize) -> Result<Option<LocalExpansion>> {
    crate::bubbles::check_degree(m)?;
    if m == 1 {
        return Ok(None);
    }
    Ok(Some(infinity_vanishing_expansion(m, lambda, order)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corotational::reduce_to_radial;
    use crate::corotational::RadialProfiles;
    use crate::linearized::ZeroMode;

    #[test]
    fn origin_f_branch_matches_zero_mode_for_lambda_zero() {
        // the zero mode normalized to a_m = 1 is f0/(2m), g0/(2m)
        for m in 1..=3u32 {
            let exp = origin_expansion(m, 0.0, OriginBranch::FNormalized, 16).unwrap();
            let zm = ZeroMode::new(m).unwrap();
            for &r in &[0.02, 0.05, 0.08] {
                let st = exp.state(r);
                let c = 2.0 * m as f64;
                assert!(
                    (st[0] - zm.f(r) / c).abs() < 1e-10,
                    "m={m} r={r}: {} vs {}",
                    st[0],
                    zm.f(r) / c
                );
                assert!((st[2] - zm.g(r) / c).abs() < 1e-10, "m={m} r={r}");
            }
        }
    }

    #[test]
    fn infinity_branch_matches_kelvin_zero_mode_for_lambda_zero() {
        // Kelvin zero mode = −2m · (vanishing branch): f̃ ~ −2m t^m, g̃ ~ 4m t^{2m}
        for m in 1..=3u32 {
            let exp = infinity_vanishing_expansion(m, 0.0, 16).unwrap();
            assert!((exp.a[m as usize] - 1.0).abs() < 1e-14);
            assert!((exp.b[2 * m as usize] + 2.0).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn expansions_satisfy_the_ode_locally() {
        for (m, lambda, chart) in [
            (1u32, 0.4, Chart::R),
            (2, -1.3, Chart::R),
            (2, 0.9, Chart::KelvinT),
        ] {
            let exp = match chart {
                Chart::R => origin_expansion(m, lambda, OriginBranch::GBranch, 18).unwrap(),
                Chart::KelvinT => infinity_vanishing_expansion(m, lambda, 18).unwrap(),
            };
            let sys = reduce_to_radial(m, lambda, chart).unwrap();
            let h = 1e-5;
            for &x in &[0.04, 0.06, 0.09] {
                let sm = exp.state(x - h);
                let s0 = exp.state(x);
                let sp = exp.state(x + h);
                let d2f = (sm[0] - 2.0 * s0[0] + sp[0]) / (h * h);
                let d2g = (sm[2] - 2.0 * s0[2] + sp[2]) / (h * h);
                let (rf, rg) = sys.residual_at(x, s0[0], s0[1], d2f, s0[2], s0[3], d2g);
                assert!(rf.abs() < 1e-5, "m={m} chart={chart:?} x={x} rf={rf:e}");
                assert!(rg.abs() < 1e-5, "m={m} x={x} rg={rg:e}");
            }
        }
    }

    #[test]
    fn l2_branch_exists_only_for_higher_degree() {
        assert!(infinity_l2_expansion(1, 0.0, 12).unwrap().is_none());
        assert!(infinity_l2_expansion(2, 0.0, 12).unwrap().is_some());
        assert!(infinity_l2_expansion(3, 2.5, 12).unwrap().is_some());
    }
}
