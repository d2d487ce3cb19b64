//! Degree-m bubbles of the planar H-system Δu = 2 u_x ∧ u_y.
//!
//! The bubble of degree m maps the plane into the unit sphere,
//!
//! ```text
//! u_m(z) = ( 2 Re z^m / (1+|z|^{2m}),  2 Im z^m / (1+|z|^{2m}),  (|z|^{2m}-1)/(|z|^{2m}+1) ),
//! ```
//!
//! with radial profiles F(r) = 2 r^m/(1+r^{2m}) and G(r) = (r^{2m}-1)/(r^{2m}+1)
//! in polar coordinates, so that u = (F cos mθ, F sin mθ, G). Its Dirichlet
//! energy is quantized: ∫|∇u_m|² = 8πm.
//!
//! All derivatives here are closed-form; finite differences appear only in
//! test oracles. The chart endpoints r = 0 and r = ∞ are evaluated by their
//! limits rather than by formula.

use crate::error::{Error, Result};
use crate::quad;
use crate::util::{cross, norm, sub, Vec3};

/// Radial coordinate chart: `R` covers the plane by r = |z|, `KelvinT` is the
/// inverted chart t = 1/r (with θ → −θ) that regularizes the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    R,
    KelvinT,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::R => "r-chart",
            Chart::KelvinT => "kelvin-t-chart",
        }
    }
}

/// A point z = (x, y) in the plane. Construction rejects non-finite input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite("planar point coordinate"));
        }
        Ok(Self { x, y })
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn theta(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// Validated bubble degree (m ≥ 1).
pub(crate) fn check_degree(m: u32) -> Result<u32> {
    if m == 0 {
        Err(Error::InvalidDegree(0))
    } else {
        Ok(m)
    }
}

/// Radial profiles F, G of the degree-m bubble and their first two
/// derivatives, in either chart.
///
/// In the Kelvin chart the first profile keeps the same formula while the
/// third-component profile flips sign: G_t(t) = (1-t^{2m})/(1+t^{2m}).
#[derive(Clone, Copy, Debug)]
pub struct BubbleProfile {
    m: u32,
    chart: Chart,
}

impl BubbleProfile {
    pub fn new(m: u32, chart: Chart) -> Result<Self> {
        Ok(Self {
            m: check_degree(m)?,
            chart,
        })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    fn gsign(&self) -> f64 {
        match self.chart {
            Chart::R => 1.0,
            Chart::KelvinT => -1.0,
        }
    }

    /// F(x) = 2 x^m / (1 + x^{2m}).
    pub fn f(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 0.0;
        }
        let a = x.powi(2 * self.m as i32);
        2.0 * x.powi(self.m as i32) / (1.0 + a)
    }

    /// G(x), with the chart sign convention.
    pub fn g(&self, x: f64) -> f64 {
        if x == 0.0 {
            return -self.gsign();
        }
        if x.is_infinite() {
            return self.gsign();
        }
        let a = x.powi(2 * self.m as i32);
        self.gsign() * (a - 1.0) / (a + 1.0)
    }

    /// F'(x) = 2m x^{m-1} (1 - x^{2m}) / (1 + x^{2m})².
    pub fn df(&self, x: f64) -> f64 {
        let m = self.m as i32;
        if x == 0.0 {
            return if m == 1 { 2.0 } else { 0.0 };
        }
        if x.is_infinite() {
            return 0.0;
        }
        let a = x.powi(2 * m);
        let psi = 1.0 + a;
        2.0 * self.m as f64 * x.powi(m - 1) * (1.0 - a) / (psi * psi)
    }

    /// G'(x) = ± 4m x^{2m-1} / (1 + x^{2m})².
    pub fn dg(&self, x: f64) -> f64 {
        let m = self.m as i32;
        if x == 0.0 || x.is_infinite() {
            return 0.0;
        }
        let a = x.powi(2 * m);
        let psi = 1.0 + a;
        self.gsign() * 4.0 * self.m as f64 * x.powi(2 * m - 1) / (psi * psi)
    }

    /// F''(x) = 2m x^{m-2} [(m-1) - 6m x^{2m} + (m+1) x^{4m}] / (1 + x^{2m})³.
    pub fn d2f(&self, x: f64) -> f64 {
        let m = self.m as i32;
        let mf = self.m as f64;
        if x == 0.0 {
            return if m == 2 { 4.0 } else { 0.0 };
        }
        if x.is_infinite() {
            return 0.0;
        }
        let a = x.powi(2 * m);
        let psi = 1.0 + a;
        2.0 * mf * x.powi(m - 2) * ((mf - 1.0) - 6.0 * mf * a + (mf + 1.0) * a * a)
            / (psi * psi * psi)
    }

    /// G''(x) = ± 4m x^{2m-2} [(2m-1) - (2m+1) x^{2m}] / (1 + x^{2m})³.
    pub fn d2g(&self, x: f64) -> f64 {
        let m = self.m as i32;
        let mf = self.m as f64;
        if x == 0.0 {
            return if m == 1 { self.gsign() * 4.0 } else { 0.0 };
        }
        if x.is_infinite() {
            return 0.0;
        }
        let a = x.powi(2 * m);
        let psi = 1.0 + a;
        self.gsign() * 4.0 * mf * x.powi(2 * m - 2) * ((2.0 * mf - 1.0) - (2.0 * mf + 1.0) * a)
            / (psi * psi * psi)
    }
}

/// A three-component field on the plane with analytic first derivatives and
/// Laplacian. The H-system and linearized residuals are generic over this.
pub trait C2Field {
    fn value(&self, p: PlanarPoint) -> Vec3;
    /// (∂_x u, ∂_y u)
    fn gradient(&self, p: PlanarPoint) -> (Vec3, Vec3);
    fn laplacian(&self, p: PlanarPoint) -> Vec3;
}

/// The degree-m bubble as an analytic field.
#[derive(Clone, Copy, Debug)]
pub struct Bubble {
    m: u32,
}

impl Bubble {
    pub fn new(m: u32) -> Result<Self> {
        Ok(Self {
            m: check_degree(m)?,
        })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn profile(&self, chart: Chart) -> BubbleProfile {
        BubbleProfile { m: self.m, chart }
    }
}

/// (Re z^k, Im z^k) by repeated multiplication; z^0 = (1, 0).
fn zpow(x: f64, y: f64, k: u32) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..k {
        let nre = re * x - im * y;
        let nim = re * y + im * x;
        re = nre;
        im = nim;
    }
    (re, im)
}

impl C2Field for Bubble {
    fn value(&self, p: PlanarPoint) -> Vec3 {
        let m = self.m;
        let (pm, qm) = zpow(p.x, p.y, m);
        let s = p.x * p.x + p.y * p.y;
        let a = s.powi(m as i32);
        let psi = 1.0 + a;
        [2.0 * pm / psi, 2.0 * qm / psi, (a - 1.0) / (a + 1.0)]
    }

    fn gradient(&self, p: PlanarPoint) -> (Vec3, Vec3) {
        let m = self.m;
        let mf = m as f64;
        let s = p.x * p.x + p.y * p.y;
        let (pm, qm) = zpow(p.x, p.y, m);
        let (pm1, qm1) = zpow(p.x, p.y, m - 1);
        let sm1 = if m == 1 { 1.0 } else { s.powi(m as i32 - 1) };
        let a = sm1 * s; // s^m
        let psi = 1.0 + a;
        let phi = 2.0 / psi;
        // ∂ of ψ = 1 + s^m
        let psix = 2.0 * mf * p.x * sm1;
        let psiy = 2.0 * mf * p.y * sm1;
        let phix = -2.0 * psix / (psi * psi);
        let phiy = -2.0 * psiy / (psi * psi);
        // Cauchy-Riemann: ∂_x z^m = m z^{m-1}, ∂_y z^m = i m z^{m-1}
        let px = mf * pm1;
        let qx = mf * qm1;
        let py = -mf * qm1;
        let qy = mf * pm1;
        let ux = [phix * pm + phi * px, phix * qm + phi * qx, -phix];
        let uy = [phiy * pm + phi * py, phiy * qm + phi * qy, -phiy];
        (ux, uy)
    }

    fn laplacian(&self, p: PlanarPoint) -> Vec3 {
        let m = self.m;
        let mf = m as f64;
        let s = p.x * p.x + p.y * p.y;
        let (pm, qm) = zpow(p.x, p.y, m);
        let sm1 = if m == 1 { 1.0 } else { s.powi(m as i32 - 1) };
        let a = sm1 * s;
        let psi = 1.0 + a;
        let c = 16.0 * mf * mf * sm1 / (psi * psi * psi);
        [-c * pm, -c * qm, 0.5 * c * (1.0 - a)]
    }
}

/// Value of the degree-m bubble at a point; the result is a unit vector.
pub fn bubble_eval(m: u32, p: PlanarPoint) -> Result<Vec3> {
    Ok(Bubble::new(m)?.value(p))
}

/// Closed-form partial derivatives (u_x, u_y) of the degree-m bubble.
pub fn bubble_derivatives(m: u32, p: PlanarPoint) -> Result<(Vec3, Vec3)> {
    Ok(Bubble::new(m)?.gradient(p))
}

/// How the H-system residual obtains second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMode {
    ClosedForm,
    /// 4th-order central differences of field values; test/fallback path.
    FiniteDifference,
}

/// Max-norm H-system residual |Δu − 2 u_x ∧ u_y| of a field over sample points.
pub fn hsystem_residual_of(field: &impl C2Field, points: &[PlanarPoint]) -> f64 {
    let mut worst = 0.0f64;
    for &p in points {
        let (ux, uy) = field.gradient(p);
        let lap = field.laplacian(p);
        let rhs = cross(ux, uy);
        let res = sub(lap, [2.0 * rhs[0], 2.0 * rhs[1], 2.0 * rhs[2]]);
        worst = worst.max(norm(res));
    }
    worst
}

/// H-system residual of the degree-m bubble itself.
pub fn hsystem_residual(m: u32, points: &[PlanarPoint]) -> Result<f64> {
    hsystem_residual_mode(m, points, DerivativeMode::ClosedForm)
}

pub fn hsystem_residual_mode(m: u32, points: &[PlanarPoint], mode: DerivativeMode) -> Result<f64> {
    let bubble = Bubble::new(m)?;
    match mode {
        DerivativeMode::ClosedForm => Ok(hsystem_residual_of(&bubble, points)),
        DerivativeMode::FiniteDifference => Ok(hsystem_residual_fd(|p| bubble.value(p), points)),
    }
}

/// Fallback residual from 4th-order finite differences of values only.
pub fn hsystem_residual_fd(value: impl Fn(PlanarPoint) -> Vec3, points: &[PlanarPoint]) -> f64 {
    let h = 1e-3;
    let at = |x: f64, y: f64| value(PlanarPoint { x, y });
    let mut worst = 0.0f64;
    for &p in points {
        let mut ux = [0.0; 3];
        let mut uy = [0.0; 3];
        let mut lap = [0.0; 3];
        let c1 = [1.0, -8.0, 8.0, -1.0];
        let o1 = [-2.0, -1.0, 1.0, 2.0];
        let c2 = [-1.0, 16.0, -30.0, 16.0, -1.0];
        let o2 = [-2.0, -1.0, 0.0, 1.0, 2.0];
        for k in 0..4 {
            let vx = at(p.x + o1[k] * h, p.y);
            let vy = at(p.x, p.y + o1[k] * h);
            for c in 0..3 {
                ux[c] += c1[k] * vx[c] / (12.0 * h);
                uy[c] += c1[k] * vy[c] / (12.0 * h);
            }
        }
        for k in 0..5 {
            let vx = at(p.x + o2[k] * h, p.y);
            let vy = at(p.x, p.y + o2[k] * h);
            for c in 0..3 {
                lap[c] += c2[k] * (vx[c] + vy[c]) / (12.0 * h * h);
            }
        }
        let rhs = cross(ux, uy);
        let res = sub(lap, [2.0 * rhs[0], 2.0 * rhs[1], 2.0 * rhs[2]]);
        worst = worst.max(norm(res));
    }
    worst
}

/// Result of the energy quadrature.
#[derive(Clone, Copy, Debug)]
pub struct EnergyEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

const ENERGY_TOL: f64 = 1e-9;

fn energy_integrand(prof: &BubbleProfile, m: u32, s: f64) -> f64 {
    // r = s/(1-s); integrand |∇u|² 2πr dr/ds with |∇u|² = F'² + G'² + m² F²/r²
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let r = s / (1.0 - s);
    let drds = 1.0 / ((1.0 - s) * (1.0 - s));
    let df = prof.df(r);
    let dg = prof.dg(r);
    // F/r = 2 r^{m-1}/(1+r^{2m}), finite at r = 0 for m ≥ 1
    let f_over_r = 2.0 * r.powi(m as i32 - 1) / (1.0 + r.powi(2 * m as i32));
    let grad2 = df * df + dg * dg + (m as f64 * f_over_r).powi(2);
    grad2 * 2.0 * std::f64::consts::PI * r * drds
}

/// Dirichlet energy ∫|∇u_m|² of the degree-m bubble, by adaptive quadrature
/// on the compactified variable s = r/(1+r). Equals 8πm up to the estimate.
pub fn bubble_energy(m: u32) -> Result<EnergyEstimate> {
    let prof = BubbleProfile::new(m, Chart::R)?;
    let (value, error_estimate) =
        quad::integrate_adaptive(|s| energy_integrand(&prof, m, s), 0.0, 1.0, ENERGY_TOL)?;
    Ok(EnergyEstimate {
        value,
        error_estimate,
    })
}

/// Energy restricted to the disk |z| ≤ R; nondecreasing in R.
pub fn truncated_energy(m: u32, radius: f64) -> Result<EnergyEstimate> {
    if !(radius > 0.0) {
        return Err(Error::NonFinite("truncation radius"));
    }
    let prof = BubbleProfile::new(m, Chart::R)?;
    let s_max = radius / (1.0 + radius);
    let (value, error_estimate) =
        quad::integrate_adaptive(|s| energy_integrand(&prof, m, s), 0.0, s_max, ENERGY_TOL)?;
    Ok(EnergyEstimate {
        value,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::XorShift64;
    use std::f64::consts::PI;

    fn pt(x: f64, y: f64) -> PlanarPoint {
        PlanarPoint::new(x, y).unwrap()
    }

    fn random_points(n: usize, radius: f64, seed: u64) -> Vec<PlanarPoint> {
        let mut rng = XorShift64::new(seed);
        (0..n)
            .map(|_| pt(rng.uniform(-radius, radius), rng.uniform(-radius, radius)))
            .collect()
    }

    #[test]
    fn eval_at_special_points() {
        assert_eq!(bubble_eval(1, pt(0.0, 0.0)).unwrap(), [0.0, 0.0, -1.0]);
        assert_eq!(bubble_eval(1, pt(1.0, 0.0)).unwrap(), [1.0, 0.0, 0.0]);
        // z = i, m = 2: z² = −1, |z| = 1
        let v = bubble_eval(2, pt(0.0, 1.0)).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
        assert!(v[2].abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_degree_zero_and_nonfinite() {
        assert!(bubble_eval(0, pt(0.0, 0.0)).is_err());
        assert!(PlanarPoint::new(f64::NAN, 0.0).is_err());
        assert!(PlanarPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn eval_is_unit_vector_everywhere() {
        for m in 1..=6 {
            for p in random_points(200, 50.0, 7 + m as u64) {
                let v = bubble_eval(m, p).unwrap();
                assert!((norm(v) - 1.0).abs() < 1e-12, "m={m} p={p:?}");
            }
        }
    }

    #[test]
    fn profiles_square_to_one_in_both_charts() {
        for chart in [Chart::R, Chart::KelvinT] {
            for m in 1..=4 {
                let prof = BubbleProfile::new(m, chart).unwrap();
                for i in 0..400 {
                    let x = 1e-3 * 1.03f64.powi(i);
                    let (f, g) = (prof.f(x), prof.g(x));
                    assert!((f * f + g * g - 1.0).abs() < 1e-12);
                    assert!((0.0..=1.0).contains(&f));
                }
                assert!((prof.f(1.0) - 1.0).abs() < 1e-15);
                assert_eq!(prof.g(1.0), 0.0);
            }
        }
    }

    #[test]
    fn kelvin_chart_is_reciprocal_of_r_chart() {
        for m in 1..=3 {
            let pr = BubbleProfile::new(m, Chart::R).unwrap();
            let pk = BubbleProfile::new(m, Chart::KelvinT).unwrap();
            for i in -40..=40 {
                let t = 1.25f64.powi(i);
                assert!((pr.f(1.0 / t) - pk.f(t)).abs() < 1e-14);
                assert!((pr.g(1.0 / t) - pk.g(t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let hs = 1e-5;
        for chart in [Chart::R, Chart::KelvinT] {
            for m in 1..=4 {
                let prof = BubbleProfile::new(m, chart).unwrap();
                for i in 0..60 {
                    let x = 0.05 + 0.1 * i as f64;
                    let dfn = (prof.f(x + hs) - prof.f(x - hs)) / (2.0 * hs);
                    let dgn = (prof.g(x + hs) - prof.g(x - hs)) / (2.0 * hs);
                    assert!((prof.df(x) - dfn).abs() < 1e-8, "df m={m} x={x}");
                    assert!((prof.dg(x) - dgn).abs() < 1e-8, "dg m={m} x={x}");
                    let d2fn = (prof.df(x + hs) - prof.df(x - hs)) / (2.0 * hs);
                    let d2gn = (prof.dg(x + hs) - prof.dg(x - hs)) / (2.0 * hs);
                    assert!((prof.d2f(x) - d2fn).abs() < 1e-7, "d2f m={m} x={x}");
                    assert!((prof.d2g(x) - d2gn).abs() < 1e-7, "d2g m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn derivatives_at_origin_and_on_axis() {
        let (ux, uy) = bubble_derivatives(1, pt(0.0, 0.0)).unwrap();
        assert_eq!(ux, [2.0, 0.0, 0.0]);
        assert_eq!(uy, [0.0, 2.0, 0.0]);
        // third components at z = (1, 0): radial slope of G is 1 there
        let (ux, uy) = bubble_derivatives(1, pt(1.0, 0.0)).unwrap();
        assert!((ux[2] - 1.0).abs() < 1e-14);
        assert!(uy[2].abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_difference_oracle() {
        // central differences of bubble_eval, consistency O(h²)
        let check = |h: f64| -> f64 {
            let mut worst = 0.0f64;
            for m in 1..=3 {
                let b = Bubble::new(m).unwrap();
                for p in random_points(100, 5.0, 1234 + m as u64) {
                    let (ux, uy) = b.gradient(p);
                    let vxp = b.value(pt(p.x + h, p.y));
                    let vxm = b.value(pt(p.x - h, p.y));
                    let vyp = b.value(pt(p.x, p.y + h));
                    let vym = b.value(pt(p.x, p.y - h));
                    for c in 0..3 {
                        worst = worst.max((ux[c] - (vxp[c] - vxm[c]) / (2.0 * h)).abs());
                        worst = worst.max((uy[c] - (vyp[c] - vym[c]) / (2.0 * h)).abs());
                    }
                }
            }
            worst
        };
        let e2 = check(1e-2);
        let e3 = check(1e-3);
        assert!(e2 < 1e-2);
        // Richardson: error should drop ~100x between h = 1e-2 and 1e-3
        let ratio = e2 / e3;
        assert!(ratio > 30.0 && ratio < 300.0, "ratio {ratio}");
    }

    #[test]
    fn hsystem_residual_is_rounding_level_for_true_bubbles() {
        for m in [1, 2, 3, 4] {
            let pts = random_points(200, 10.0, 99 + m as u64);
            let res = hsystem_residual(m, &pts).unwrap();
            assert!(res < 1e-10, "m={m} res={res:e}");
        }
    }

    #[test]
    fn hsystem_residual_fd_mode_agrees() {
        let pts = random_points(50, 5.0, 321);
        let res = hsystem_residual_mode(2, &pts, DerivativeMode::FiniteDifference).unwrap();
        assert!(res < 1e-6, "res={res:e}");
    }

    /// Scaling the third component breaks the equation; oracle value at
    /// z = (1,0), m = 1 is |(−2,0,0) − (−2.2,0,0)| = 0.2.
    #[test]
    fn perturbed_bubble_has_large_residual() {
        struct Scaled(Bubble);
        impl C2Field for Scaled {
            fn value(&self, p: PlanarPoint) -> Vec3 {
                let v = self.0.value(p);
                [v[0], v[1], 1.1 * v[2]]
            }
            fn gradient(&self, p: PlanarPoint) -> (Vec3, Vec3) {
                let (ux, uy) = self.0.gradient(p);
                ([ux[0], ux[1], 1.1 * ux[2]], [uy[0], uy[1], 1.1 * uy[2]])
            }
            fn laplacian(&self, p: PlanarPoint) -> Vec3 {
                let l = self.0.laplacian(p);
                [l[0], l[1], 1.1 * l[2]]
            }
        }
        let field = Scaled(Bubble::new(1).unwrap());
        let res = hsystem_residual_of(&field, &[pt(1.0, 0.0)]);
        assert!((res - 0.2).abs() < 1e-12, "res={res}");
        assert!(res >= 0.1);
    }

    #[test]
    fn energy_is_quantized() {
        for m in 1..=4u32 {
            let e = bubble_energy(m).unwrap();
            let exact = 8.0 * PI * m as f64;
            assert!(
                (e.value - exact).abs() / exact < 1e-6,
                "m={m} value={} exact={exact}",
                e.value
            );
            assert!(e.error_estimate < 1e-6);
        }
    }

    #[test]
    fn truncated_energy_is_monotone() {
        let mut last = 0.0;
        for &r in &[0.5, 1.0, 2.0, 5.0, 20.0, 100.0] {
            let e = truncated_energy(2, r).unwrap().value;
            assert!(e >= last - 1e-12, "r={r}");
            last = e;
        }
        assert!(last < 16.0 * PI);
    }
}
