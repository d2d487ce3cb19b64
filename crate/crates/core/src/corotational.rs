//! Co-rotational reduction of the linearized H-system.
//!
//! For perturbations w = (f(r) cos mθ, f(r) sin mθ, g(r)) of the degree-m
//! bubble, the eigenvalue equation reduces to a coupled pair of second-order
//! radial ODEs:
//!
//! ```text
//! f'' + f'/r − m² f/r² = −(2m/r)(F g' + G' f) + λ ρ f
//! g'' + g'/r            = +(2m/r)(F f)'        + λ ρ g
//! ```
//!
//! with ρ(r) = 4/(1+r²)². The Kelvin substitution r = 1/t, θ → −θ maps the
//! pair onto the same pair with the sign of both coupling terms flipped and
//! the chart-local bubble profiles (the λ-weight keeps the identical form,
//! since the inversion is an isometry of the round sphere). The sign
//! convention here is fixed executably: the dilation zero mode must
//! annihilate the system at λ = 0 in both charts.

use std::io::{self, Write};
use std::sync::Arc;

use crate::bubbles::{Bubble, BubbleProfile, C2Field, Chart, PlanarPoint};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::derivatives_5pt;
use crate::util::{cross, norm, scale, sub, Vec3};

/// Lower cutoff for residual sampling; 1/r² terms amplify rounding below it.
pub const RESIDUAL_RADIUS_FLOOR: f64 = 1e-3;

/// The conformal weight ρ = 4/(1+x²)², the round-sphere area density. The
/// same formula applies in both charts.
pub fn conformal_weight(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let d = 1.0 + x * x;
    4.0 / (d * d)
}

/// A co-rotational profile pair (f, g) with two radial derivatives.
pub trait RadialProfiles {
    fn f(&self, x: f64) -> f64;
    fn df(&self, x: f64) -> f64;
    fn d2f(&self, x: f64) -> f64;
    fn g(&self, x: f64) -> f64;
    fn dg(&self, x: f64) -> f64;
    fn d2g(&self, x: f64) -> f64;
}

impl RadialProfiles for BubbleProfile {
    fn f(&self, x: f64) -> f64 {
        BubbleProfile::f(self, x)
    }
    fn df(&self, x: f64) -> f64 {
        BubbleProfile::df(self, x)
    }
    fn d2f(&self, x: f64) -> f64 {
        BubbleProfile::d2f(self, x)
    }
    fn g(&self, x: f64) -> f64 {
        BubbleProfile::g(self, x)
    }
    fn dg(&self, x: f64) -> f64 {
        BubbleProfile::dg(self, x)
    }
    fn d2g(&self, x: f64) -> f64 {
        BubbleProfile::d2g(self, x)
    }
}

/// Chain-rule image of a profile pair under x → 1/x.
pub struct KelvinProfiles<P>(pub P);

impl<P: RadialProfiles> RadialProfiles for KelvinProfiles<P> {
    fn f(&self, x: f64) -> f64 {
        self.0.f(1.0 / x)
    }
    fn df(&self, x: f64) -> f64 {
        let r = 1.0 / x;
        -self.0.df(r) * r * r
    }
    fn d2f(&self, x: f64) -> f64 {
        let r = 1.0 / x;
        self.0.d2f(r) * r.powi(4) + 2.0 * self.0.df(r) * r.powi(3)
    }
    fn g(&self, x: f64) -> f64 {
        self.0.g(1.0 / x)
    }
    fn dg(&self, x: f64) -> f64 {
        let r = 1.0 / x;
        -self.0.dg(r) * r * r
    }
    fn d2g(&self, x: f64) -> f64 {
        let r = 1.0 / x;
        self.0.d2g(r) * r.powi(4) + 2.0 * self.0.dg(r) * r.powi(3)
    }
}

/// Analytic 2D field built from a co-rotational profile pair.
pub struct CorotationalField<P> {
    m: u32,
    profiles: P,
}

impl<P: RadialProfiles> CorotationalField<P> {
    pub fn new(m: u32, profiles: P) -> Result<Self> {
        crate::bubbles::check_degree(m)?;
        Ok(Self { m, profiles })
    }

    pub fn profiles(&self) -> &P {
        &self.profiles
    }
}

impl<P: RadialProfiles> C2Field for CorotationalField<P> {
    fn value(&self, p: PlanarPoint) -> Vec3 {
        let r = p.r();
        if r == 0.0 {
            return [0.0, 0.0, self.profiles.g(0.0)];
        }
        let a = self.m as f64 * p.theta();
        let f = self.profiles.f(r);
        [f * a.cos(), f * a.sin(), self.profiles.g(r)]
    }

    fn gradient(&self, p: PlanarPoint) -> (Vec3, Vec3) {
        let r = p.r();
        if r < 1e-14 {
            // limits at the origin: f ~ c r^m leaves a gradient only for m = 1
            let df0 = self.profiles.df(0.0);
            return if self.m == 1 {
                ([df0, 0.0, 0.0], [0.0, df0, 0.0])
            } else {
                ([0.0; 3], [0.0; 3])
            };
        }
        let th = p.theta();
        let (sin_t, cos_t) = th.sin_cos();
        let (sin_m, cos_m) = (self.m as f64 * th).sin_cos();
        let mf = self.m as f64;
        let f = self.profiles.f(r);
        let df = self.profiles.df(r);
        let dg = self.profiles.dg(r);
        let w_r = [df * cos_m, df * sin_m, dg];
        let w_th_over_r = [-mf * f * sin_m / r, mf * f * cos_m / r, 0.0];
        let wx = sub(scale(w_r, cos_t), scale(w_th_over_r, sin_t));
        let wy = [
            w_r[0] * sin_t + w_th_over_r[0] * cos_t,
            w_r[1] * sin_t + w_th_over_r[1] * cos_t,
            w_r[2] * sin_t + w_th_over_r[2] * cos_t,
        ];
        (wx, wy)
    }

    fn laplacian(&self, p: PlanarPoint) -> Vec3 {
        let r = p.r();
        if r < 1e-14 {
            // f-part limit vanishes for every m; the g-part survives only
            // when g ~ c r², where Δg → 2 g''(0)
            return [0.0, 0.0, 2.0 * self.profiles.d2g(0.0)];
        }
        let (sin_m, cos_m) = (self.m as f64 * p.theta()).sin_cos();
        let mf = self.m as f64;
        let f = self.profiles.f(r);
        let lf = self.profiles.d2f(r) + self.profiles.df(r) / r - mf * mf * f / (r * r);
        let lg = self.profiles.d2g(r) + self.profiles.dg(r) / r;
        [lf * cos_m, lf * sin_m, lg]
    }
}

/// Co-rotational mode sampled on a radial grid.
///
/// In the Kelvin chart the i-th value sits at t_i = 1/r_{N-1-i}; the grid
/// itself is always stored in r-ordering, which makes the double Kelvin
/// transform the exact identity.
#[derive(Clone, Debug)]
pub struct RadialMode {
    grid: Arc<RadialGrid>,
    m: u32,
    chart: Chart,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl RadialMode {
    pub fn new(
        grid: Arc<RadialGrid>,
        m: u32,
        chart: Chart,
        f: Vec<f64>,
        g: Vec<f64>,
    ) -> Result<Self> {
        crate::bubbles::check_degree(m)?;
        if f.len() != grid.len() || g.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "mode length {}/{} does not match grid length {}",
                f.len(),
                g.len(),
                grid.len()
            )));
        }
        if !f.iter().chain(g.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("mode sample"));
        }
        if chart == Chart::R && grid.nodes()[0] == 0.0 && f[0] != 0.0 {
            return Err(Error::InvalidGrid(
                "co-rotational f must vanish at r = 0".into(),
            ));
        }
        Ok(Self {
            grid,
            m,
            chart,
            f,
            g,
        })
    }

    /// Sample closed-form profiles on a grid. The profiles must provide the
    /// endpoint limits (x = 0 and x = ∞) themselves.
    pub fn sample<P: RadialProfiles>(
        profiles: &P,
        grid: Arc<RadialGrid>,
        m: u32,
        chart: Chart,
    ) -> Result<Self> {
        let coords = coordinates_for(&grid, chart);
        let f: Vec<f64> = coords.iter().map(|&x| profiles.f(x)).collect();
        let g: Vec<f64> = coords.iter().map(|&x| profiles.g(x)).collect();
        Self::new(grid, m, chart, f, g)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Chart coordinates of the samples, ascending.
    pub fn coordinates(&self) -> Vec<f64> {
        coordinates_for(&self.grid, self.chart)
    }

    /// Kelvin transform: f̃(t) = f(1/t), g̃(t) = g(1/t). Applying it twice
    /// returns the identical mode.
    pub fn kelvin(&self) -> RadialMode {
        let mut f = self.f.clone();
        let mut g = self.g.clone();
        f.reverse();
        g.reverse();
        RadialMode {
            grid: Arc::clone(&self.grid),
            m: self.m,
            chart: flip(self.chart),
            f,
            g,
        }
    }

    /// |(f, g)| at each sample.
    pub fn magnitude(&self) -> Vec<f64> {
        self.f
            .iter()
            .zip(&self.g)
            .map(|(a, b)| a.hypot(*b))
            .collect()
    }
}

fn flip(chart: Chart) -> Chart {
    match chart {
        Chart::R => Chart::KelvinT,
        Chart::KelvinT => Chart::R,
    }
}

fn coordinates_for(grid: &RadialGrid, chart: Chart) -> Vec<f64> {
    match chart {
        Chart::R => grid.nodes().to_vec(),
        Chart::KelvinT => grid
            .nodes()
            .iter()
            .rev()
            .map(|&r| if r == 0.0 { f64::INFINITY } else { 1.0 / r })
            .collect(),
    }
}

/// Linear coefficients of the radial pair at one radius, for inspection and
/// for integrating the system as a first-order ODE.
#[derive(Clone, Copy, Debug)]
pub struct SystemCoefficients {
    /// coefficient of f in the f-equation right side (f'' = ... )
    pub f_on_f: f64,
    /// coefficient of g' in the f-equation right side
    pub dg_on_f: f64,
    /// coefficient of f in the g-equation right side
    pub f_on_g: f64,
    /// coefficient of f' in the g-equation right side
    pub df_on_g: f64,
    /// coefficient of g in the g-equation right side
    pub g_on_g: f64,
    /// the conformal weight ρ at this radius
    pub rho: f64,
    /// the raw coupling factor (2m/x) F(x)
    pub coupling: f64,
}

/// The co-rotational radial system at fixed degree, λ and chart.
#[derive(Clone, Debug)]
pub struct RadialSystem {
    m: u32,
    lambda: f64,
    chart: Chart,
    prof: BubbleProfile,
}

/// Coefficient functions of the coupled radial pair in the requested chart.
pub fn reduce_to_radial(m: u32, lambda: f64, chart: Chart) -> Result<RadialSystem> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    Ok(RadialSystem {
        m: crate::bubbles::check_degree(m)?,
        lambda,
        chart,
        prof: BubbleProfile::new(m, chart)?,
    })
}

impl RadialSystem {
    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// The same system in the other chart.
    pub fn kelvin(&self) -> RadialSystem {
        reduce_to_radial(self.m, self.lambda, flip(self.chart)).expect("validated inputs")
    }

    fn coupling_sign(&self) -> f64 {
        match self.chart {
            Chart::R => 1.0,
            Chart::KelvinT => -1.0,
        }
    }

    /// (2m/x) F(x), with its x → 0 limit.
    pub fn coupling(&self, x: f64) -> f64 {
        if x == 0.0 {
            return if self.m == 1 { 4.0 } else { 0.0 };
        }
        if x.is_infinite() {
            return 0.0;
        }
        2.0 * self.m as f64 / x * self.prof.f(x)
    }

    pub fn coefficients(&self, x: f64) -> SystemCoefficients {
        let mf = self.m as f64;
        let sigma = self.coupling_sign();
        let cpl = self.coupling(x);
        let rho = conformal_weight(x);
        SystemCoefficients {
            f_on_f: mf * mf / (x * x) - sigma * 2.0 * mf / x * self.prof.dg(x) + self.lambda * rho,
            dg_on_f: -sigma * cpl,
            f_on_g: sigma * 2.0 * mf / x * self.prof.df(x),
            df_on_g: sigma * cpl,
            g_on_g: self.lambda * rho,
            rho,
            coupling: cpl,
        }
    }

    /// Residuals of both equations given values and two derivatives.
    pub fn residual_at(
        &self,
        x: f64,
        f: f64,
        df: f64,
        d2f: f64,
        g: f64,
        dg: f64,
        d2g: f64,
    ) -> (f64, f64) {
        let (rf2, rg2) = self.second_derivatives(x, f, df, g, dg);
        (d2f - rf2, d2g - rg2)
    }

    /// (f'', g'') dictated by the system; the right-hand side for shooting.
    pub fn second_derivatives(&self, x: f64, f: f64, df: f64, g: f64, dg: f64) -> (f64, f64) {
        let mf = self.m as f64;
        let sigma = self.coupling_sign();
        let rho = conformal_weight(x);
        let fc = self.prof.f(x);
        let two_m_over_x = 2.0 * mf / x;
        let d2f = -df / x + mf * mf * f / (x * x)
            - sigma * two_m_over_x * (fc * dg + self.prof.dg(x) * f)
            + self.lambda * rho * f;
        let d2g = -dg / x
            + sigma * two_m_over_x * (fc * df + self.prof.df(x) * f)
            + self.lambda * rho * g;
        (d2f, d2g)
    }
}

/// Sup-norm residual of a sampled mode in a system, using 5-point stencils
/// on the chart coordinates. Radii below `RESIDUAL_RADIUS_FLOOR` and the
/// coordinate poles are excluded from evaluation.
pub fn radial_residual(mode: &RadialMode, sys: &RadialSystem) -> Result<f64> {
    if mode.chart() != sys.chart() {
        return Err(Error::ChartMismatch {
            mode: mode.chart().name(),
            system: sys.chart().name(),
        });
    }
    if mode.degree() != sys.degree() {
        return Err(Error::InvalidGrid(format!(
            "mode degree {} vs system degree {}",
            mode.degree(),
            sys.degree()
        )));
    }
    let coords = mode.coordinates();
    let mut xs = Vec::new();
    let mut fv = Vec::new();
    let mut gv = Vec::new();
    for (i, &x) in coords.iter().enumerate() {
        if x.is_finite() && x >= RESIDUAL_RADIUS_FLOOR {
            xs.push(x);
            fv.push(mode.f()[i]);
            gv.push(mode.g()[i]);
        }
    }
    if xs.len() < 5 {
        return Err(Error::GridTooCoarse {
            need: 5,
            got: xs.len(),
        });
    }
    let (df, d2f) = derivatives_5pt(&xs, &fv);
    let (dg, d2g) = derivatives_5pt(&xs, &gv);
    let mut worst = 0.0f64;
    for i in 0..xs.len() {
        let (rf, rg) = sys.residual_at(xs[i], fv[i], df[i], d2f[i], gv[i], dg[i], d2g[i]);
        worst = worst.max(rf.abs()).max(rg.abs());
    }
    Ok(worst)
}

/// Residual with analytic profile derivatives, evaluated at given radii.
pub fn radial_residual_analytic<P: RadialProfiles>(
    profiles: &P,
    sys: &RadialSystem,
    xs: &[f64],
) -> f64 {
    let mut worst = 0.0f64;
    for &x in xs {
        if !x.is_finite() || x < RESIDUAL_RADIUS_FLOOR {
            continue;
        }
        let (rf, rg) = sys.residual_at(
            x,
            profiles.f(x),
            profiles.df(x),
            profiles.d2f(x),
            profiles.g(x),
            profiles.dg(x),
            profiles.d2g(x),
        );
        worst = worst.max(rf.abs()).max(rg.abs());
    }
    worst
}

/// Pointwise gap between the Cartesian and polar expressions for the
/// linearized cross terms,
/// 2(w_x ∧ u_y + u_x ∧ w_y) vs (2/r)(w_r ∧ u_θ + u_r ∧ w_θ).
pub fn polar_identity_gap<P: RadialProfiles>(m: u32, w: &P, p: PlanarPoint) -> Result<f64> {
    let bubble = Bubble::new(m)?;
    let field = CorotationalField::new(m, KelvinRef(w))?;
    let r = p.r();
    if r == 0.0 {
        return Err(Error::NonFinite("polar identity at the origin"));
    }
    // Cartesian route
    let (wx, wy) = field.gradient(p);
    let (ux, uy) = bubble.gradient(p);
    let cart = scale(crate::util::add(cross(wx, uy), cross(ux, wy)), 2.0);
    // polar route
    let th = p.theta();
    let mf = m as f64;
    let (sin_m, cos_m) = (mf * th).sin_cos();
    let prof = bubble.profile(Chart::R);
    let w_r = [w.df(r) * cos_m, w.df(r) * sin_m, w.dg(r)];
    let w_th = [-mf * w.f(r) * sin_m, mf * w.f(r) * cos_m, 0.0];
    let u_r = [prof.df(r) * cos_m, prof.df(r) * sin_m, prof.dg(r)];
    let u_th = [-mf * prof.f(r) * sin_m, mf * prof.f(r) * cos_m, 0.0];
    let polar = scale(
        crate::util::add(cross(w_r, u_th), cross(u_r, w_th)),
        2.0 / r,
    );
    Ok(norm(sub(cart, polar)))
}

// thin reference adapter so polar_identity_gap can borrow profiles
struct KelvinRef<'a, P>(&'a P);
impl<P: RadialProfiles> RadialProfiles for KelvinRef<'_, P> {
    fn f(&self, x: f64) -> f64 {
        self.0.f(x)
    }
    fn df(&self, x: f64) -> f64 {
        self.0.df(x)
    }
    fn d2f(&self, x: f64) -> f64 {
        self.0.d2f(x)
    }
    fn g(&self, x: f64) -> f64 {
        self.0.g(x)
    }
    fn dg(&self, x: f64) -> f64 {
        self.0.dg(x)
    }
    fn d2g(&self, x: f64) -> f64 {
        self.0.d2g(x)
    }
}

/// Emit `r,f,g` rows, one per grid node, using round-trip float formatting.
pub fn write_mode_csv<W: Write>(mode: &RadialMode, out: &mut W) -> io::Result<()> {
    writeln!(out, "r,f,g")?;
    let coords = mode.coordinates();
    for i in 0..coords.len() {
        writeln!(out, "{},{},{}", coords[i], mode.f()[i], mode.g()[i])?;
    }
    Ok(())
}
