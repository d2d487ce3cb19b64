//! Discretization and solution of the co-rotational eigenproblem.
//!
//! The weak form of the eigenvalue equation, restricted to co-rotational
//! pairs v = (p cos mθ, p sin mθ, q), w = (f cos mθ, f sin mθ, g), reads
//! −E(v, w) = λ (v, w)_ρ with
//!
//! ```text
//! E = 2π ∫ [p'f' + m² p f /r² + q'g'] r dr
//!     + 4πm ∫ [ −(F g' + G' f) p + (F f)' q ] dr ,
//! ```
//!
//! assembled here in the arrangement obtained by integrating the (Ff)'q
//! coupling by parts, −F(p g' + q' f) − G' p f, which is symmetric term by
//! term. Piecewise-linear elements on the compactified variable with a
//! row-sum lumped ρ-mass give a symmetric band matrix A and a positive
//! diagonal B with the discrete problem A x = −λ B x.
//!
//! Boundary conditions: f is constrained to zero at both coordinate poles
//! (r = 0 regularity for m ≥ 1, and the infinity node); g is value-free at
//! both, so the constant-g direction — an exact zero mode of the continuum
//! operator for every degree — stays representable. Because of it the
//! solver fixes the basis inside near-degenerate λ-clusters by rotating to
//! extremal far-field flat mass; otherwise the raw eigenvectors at λ ≈ 0
//! would be arbitrary mixtures of the constant direction and the decaying
//! dilation mode.

pub mod band;
pub mod frobenius;
pub mod scan;
pub mod shoot;

use std::sync::Arc;

use crate::bubbles::{BubbleProfile, Chart};
use crate::corotational::{conformal_weight, RadialMode};
use crate::error::{Error, Result};
use crate::grid::{GridMap, RadialGrid};
use crate::util::linear_fit;

use band::{band_to_tridiagonal, bisect_eigenvalues, inverse_iteration, jacobi_eigh, SymBand};

/// Assembled symmetric pencil (A, B) for one degree and grid.
#[derive(Clone, Debug)]
pub struct SpectralProblem {
    m: u32,
    grid: Arc<RadialGrid>,
    cross_term_enabled: bool,
    a: SymBand,
    b: Vec<f64>,
    n_nodes: usize,
}

const GAUSS3_X: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
const GAUSS3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// dof layout: node 0 holds only g, interior nodes hold (f, g), the last
/// node holds only g; interleaving keeps the half-bandwidth at 3.
fn dof_f(node: usize, n_nodes: usize) -> Option<usize> {
    if node == 0 || node == n_nodes - 1 {
        None
    } else {
        Some(2 * node - 1)
    }
}

fn dof_g(node: usize, n_nodes: usize) -> usize {
    if node == n_nodes - 1 {
        2 * node - 1
    } else {
        2 * node
    }
}

fn n_dofs(n_nodes: usize) -> usize {
    2 * n_nodes - 2
}

/// Assemble the pencil on a compactified grid.
pub fn assemble_pencil(
    m: u32,
    grid: &Arc<RadialGrid>,
    cross_term_enabled: bool,
) -> Result<SpectralProblem> {
    crate::bubbles::check_degree(m)?;
    let map = grid.map();
    if map == GridMap::Explicit {
        return Err(Error::UnsupportedGridMap("explicit"));
    }
    let prof = BubbleProfile::new(m, Chart::R)?;
    let n = grid.len();
    let s = grid.s_nodes();
    let ndof = n_dofs(n);
    let mut a = SymBand::zeros(ndof, 3);
    let mut b = vec![0.0; ndof];
    let mf = m as f64;
    let two_pi = 2.0 * std::f64::consts::PI;

    for e in 0..n - 1 {
        let (s0, s1) = (s[e], s[e + 1]);
        let mid = 0.5 * (s0 + s1);
        let half = 0.5 * (s1 - s0);
        let dphi = [-1.0 / (s1 - s0), 1.0 / (s1 - s0)];
        // local accumulators: fblock, gblock, fg coupling (f-test i, g-trial j)
        let mut af = [[0.0f64; 2]; 2];
        let mut ag = [[0.0f64; 2]; 2];
        let mut cfg = [[0.0f64; 2]; 2];
        let mut bl = [0.0f64; 2];
        for q in 0..3 {
            let sq = mid + half * GAUSS3_X[q];
            let wq = half * GAUSS3_W[q];
            let r = map.r_of_s(sq);
            let rp = map.dr_ds(sq);
            let d_s = r / rp; // r/r': weight of the derivative term
            let rr = rp / r; // r'/r: weight of the m²/r² term
            let rho_j = conformal_weight(r) * two_pi * r * rp;
            let phi = [(s1 - sq) / (s1 - s0), (sq - s0) / (s1 - s0)];
            let fv = prof.f(r);
            let dgv = prof.dg(r);
            for i in 0..2 {
                for j in 0..2 {
                    af[i][j] +=
                        wq * two_pi * (dphi[i] * dphi[j] * d_s + mf * mf * phi[i] * phi[j] * rr);
                    ag[i][j] += wq * two_pi * dphi[i] * dphi[j] * d_s;
                    if cross_term_enabled {
                        // symmetric arrangement: −4πm [ F (p g' + q' f) + G' p f ]
                        af[i][j] +=
                            wq * (-4.0 * std::f64::consts::PI * mf) * dgv * phi[i] * phi[j] * rp;
                        cfg[i][j] +=
                            wq * (-4.0 * std::f64::consts::PI * mf) * fv * phi[i] * dphi[j];
                    }
                }
                bl[i] += wq * phi[i] * rho_j;
            }
        }
        for (il, node_i) in [(0usize, e), (1usize, e + 1)] {
            b[dof_g(node_i, n)] += bl[il];
            if let Some(dfi) = dof_f(node_i, n) {
                b[dfi] += bl[il];
            }
            for (jl, node_j) in [(0usize, e), (1usize, e + 1)] {
                // g-g block
                let (gi, gj) = (dof_g(node_i, n), dof_g(node_j, n));
                if gi <= gj {
                    a.add(gi, gj, ag[il][jl]);
                }
                // f-f block
                if let (Some(fi), Some(fj)) = (dof_f(node_i, n), dof_f(node_j, n)) {
                    if fi <= fj {
                        a.add(fi, fj, af[il][jl]);
                    }
                }
                // f-g coupling, placed once per (unordered) dof pair
                if let Some(fi) = dof_f(node_i, n) {
                    a.add(fi, gj, cfg[il][jl]);
                }
            }
        }
    }
    if !b.iter().all(|x| *x > 0.0) {
        return Err(Error::InvalidGrid(
            "lumped mass has a nonpositive entry".into(),
        ));
    }
    Ok(SpectralProblem {
        m,
        grid: Arc::clone(grid),
        cross_term_enabled,
        a,
        b,
        n_nodes: n,
    })
}

impl SpectralProblem {
    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn cross_term_enabled(&self) -> bool {
        self.cross_term_enabled
    }

    pub fn n_unknowns(&self) -> usize {
        n_dofs(self.n_nodes)
    }

    pub fn a(&self) -> &SymBand {
        &self.a
    }

    /// Diagonal of the lumped ρ-mass, strictly positive.
    pub fn b_diagonal(&self) -> &[f64] {
        &self.b
    }

    /// Unpack a dof vector into nodal (f, g) profiles.
    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_nodes;
        let mut f = vec![0.0; n];
        let mut g = vec![0.0; n];
        for node in 0..n {
            g[node] = x[dof_g(node, n)];
            if let Some(df) = dof_f(node, n) {
                f[node] = x[df];
            }
        }
        (f, g)
    }

    /// xᵀ B y
    pub fn b_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.b)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }
}

/// One solved eigenpair.
#[derive(Clone, Debug)]
pub struct EigenMode {
    pub lambda: f64,
    pub mode: RadialMode,
    /// dof-vector, B-orthonormal across the returned set
    pub vector: Vec<f64>,
}

/// λ-gap below which modes are treated as one near-degenerate cluster and
/// rotated to extremal far-field flat mass (smallest tail first).
fn rotation_cluster_gap(lambda: f64) -> f64 {
    5e-3_f64.max(1e-3 * lambda.abs())
}

/// Solve A x = −λ B x for all λ inside the window (ascending λ). All
/// eigenvalues are real by construction: the pencil reduces symmetrically
/// through B^{-1/2} and the λ's come out of Sturm bisection.
///
/// Eigenvectors are B-orthonormal; the sign makes the largest-magnitude
/// entry positive; within near-degenerate clusters the basis is fixed by
/// the far-field rotation described in the module docs.
pub fn solve_pencil(prob: &SpectralProblem, window: (f64, f64)) -> Result<Vec<EigenMode>> {
    let (w_lo, w_hi) = window;
    if !(w_lo < w_hi) {
        return Err(Error::InvalidGrid("empty eigenvalue window".into()));
    }
    let scale: Vec<f64> = prob.b.iter().map(|x| 1.0 / x.sqrt()).collect();
    let c = prob.a.diag_congruence(&scale);
    let (diag, off) = band_to_tridiagonal(&c);
    // λ = −μ
    let mus = bisect_eigenvalues(&diag, &off, -w_hi, -w_lo);
    let cnorm = c.norm_inf().max(1.0);
    let ortho_gap = 0.05f64.max(1e4 * f64::EPSILON * cnorm);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(mus.len());
    let mut cluster_start = 0usize;
    for (k, &mu) in mus.iter().enumerate() {
        if k > 0 && (mu - mus[k - 1]).abs() > ortho_gap {
            cluster_start = k;
        }
        let against: Vec<Vec<f64>> = ys[cluster_start..k].to_vec();
        let y = inverse_iteration(&c, mu, k, &against)?;
        ys.push(y);
    }
    // back to B-orthonormal pencil vectors x = B^{-1/2} y
    let mut modes: Vec<(f64, Vec<f64>)> = mus
        .iter()
        .zip(ys)
        .map(|(&mu, y)| {
            let x: Vec<f64> = y.iter().zip(&scale).map(|(v, s)| v * s).collect();
            (-mu, x)
        })
        .collect();
    modes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rotate_clusters(prob, &mut modes);
    let mut out = Vec::with_capacity(modes.len());
    for (lambda, mut x) in modes {
        fix_sign(&mut x);
        let (f, g) = prob.unpack(&x);
        let mode = RadialMode::new(Arc::clone(&prob.grid), prob.m, Chart::R, f, g)?;
        out.push(EigenMode {
            lambda,
            mode,
            vector: x,
        });
    }
    out.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    Ok(out)
}

fn fix_sign(x: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    if x[best] < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

/// Truncated flat-L² pairing over r ∈ [10, r_max_finite] of two dof vectors.
fn flat_tail_inner(prob: &SpectralProblem, x: &[f64], y: &[f64]) -> f64 {
    let nodes = prob.grid.nodes();
    let (fx, gx) = prob.unpack(x);
    let (fy, gy) = prob.unpack(y);
    let mut acc = 0.0;
    let dens = |i: usize| (fx[i] * fy[i] + gx[i] * gy[i]) * nodes[i];
    for i in 0..nodes.len() - 1 {
        if !nodes[i + 1].is_finite() {
            break;
        }
        if nodes[i] < 10.0 {
            continue;
        }
        acc += 0.5 * (nodes[i + 1] - nodes[i]) * (dens(i) + dens(i + 1));
    }
    2.0 * std::f64::consts::PI * acc
}

fn rotate_clusters(prob: &SpectralProblem, modes: &mut [(f64, Vec<f64>)]) {
    let n = modes.len();
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (modes[end].0 - modes[end - 1].0).abs() <= rotation_cluster_gap(modes[end].0)
        {
            end += 1;
        }
        let k = end - start;
        if k >= 2 {
            // tail Gram matrix on the cluster span
            let mut t = vec![vec![0.0; k]; k];
            for i in 0..k {
                for j in 0..=i {
                    let v = flat_tail_inner(prob, &modes[start + i].1, &modes[start + j].1);
                    t[i][j] = v;
                    t[j][i] = v;
                }
            }
            let (_, rot) = jacobi_eigh(&t);
            let ndof = modes[start].1.len();
            let mut rotated: Vec<Vec<f64>> = Vec::with_capacity(k);
            for col in rot.iter().take(k) {
                let mut v = vec![0.0; ndof];
                for (ci, coeff) in col.iter().enumerate() {
                    for d in 0..ndof {
                        v[d] += coeff * modes[start + ci].1[d];
                    }
                }
                rotated.push(v);
            }
            for (i, v) in rotated.into_iter().enumerate() {
                // Rayleigh quotient of the rotated vector
                let av = prob.a.mul_vec(&v);
                let num: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
                let den = prob.b_inner(&v, &v);
                modes[start + i] = (-num / den, v);
            }
        }
        start = end;
    }
}

/// Decay-exponent fit of a mode tail: log |w| against −α log r over the
/// window [10, 0.1 · r_max].
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    pub alpha: f64,
    pub fit_residual: f64,
    pub window: (f64, f64),
    pub nodes_used: usize,
}

pub fn decay_exponent(mode: &RadialMode) -> Result<DecayFit> {
    let coords = mode.coordinates();
    let r_max = coords
        .iter()
        .rev()
        .find(|x| x.is_finite())
        .copied()
        .unwrap_or(0.0);
    let (lo, hi) = (10.0, 0.1 * r_max);
    let mags = mode.magnitude();
    let peak = mags.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &r) in coords.iter().enumerate() {
        if r >= lo && r <= hi && mags[i] > 1e-13 * peak {
            xs.push(r.ln());
            ys.push(mags[i].ln());
        }
    }
    if xs.len() < 20 {
        return Err(Error::WindowUndersampled {
            lo,
            hi,
            got: xs.len(),
            need: 20,
        });
    }
    let (slope, _, fit_residual) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        alpha: -slope,
        fit_residual,
        window: (lo, hi),
        nodes_used: xs.len(),
    })
}

/// Mode classification per the flat-L² criterion in two dimensions:
/// ∫ r^{1-2α} dr converges iff α > 1, with a wide numerical margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Eigenvalue,
    Resonance,
    Spurious,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Eigenvalue => "eigenvalue",
            Classification::Resonance => "resonance",
            Classification::Spurious => "spurious",
        }
    }
}

/// Eigenvalue classification needs α at or above this margin (r^{-1} vs
/// r^{-2} separation with headroom).
pub const EIGENVALUE_ALPHA_MIN: f64 = 1.2;
/// Fits of exactly-flat tails jitter around zero; small negative α still
/// counts as a bounded (resonance-type) tail.
pub const RESONANCE_ALPHA_MIN: f64 = -0.05;

/// Refinement-drift threshold: max(1e-2, 1e-2 |λ|).
pub fn spurious_drift_threshold(lambda: f64) -> f64 {
    1e-2_f64.max(1e-2 * lambda.abs())
}

pub fn classify_mode(lambda: f64, fit: &DecayFit, drift: f64) -> Classification {
    if !(drift <= spurious_drift_threshold(lambda)) {
        return Classification::Spurious;
    }
    if fit.alpha >= EIGENVALUE_ALPHA_MIN {
        Classification::Eigenvalue
    } else if fit.alpha >= RESONANCE_ALPHA_MIN {
        Classification::Resonance
    } else {
        Classification::Spurious
    }
}

/// ρ-weighted cosine overlap of two modes, evaluated on the first mode's
/// grid with the second linearly interpolated in r.
pub fn mode_overlap(a: &RadialMode, b: &RadialMode) -> f64 {
    let nodes = a.grid().nodes();
    let bi = interp_onto(b, nodes);
    let af: Vec<(f64, f64)> = a.f().iter().zip(a.g()).map(|(x, y)| (*x, *y)).collect();
    let mut aa = 0.0;
    let mut bb = 0.0;
    let mut ab = 0.0;
    for i in 0..nodes.len() - 1 {
        if !nodes[i + 1].is_finite() {
            break;
        }
        let w = 0.5 * (nodes[i + 1] - nodes[i]);
        for &k in &[i, i + 1] {
            let rho_r = conformal_weight(nodes[k]) * nodes[k];
            aa += w * rho_r * (af[k].0 * af[k].0 + af[k].1 * af[k].1);
            bb += w * rho_r * (bi[k].0 * bi[k].0 + bi[k].1 * bi[k].1);
            ab += w * rho_r * (af[k].0 * bi[k].0 + af[k].1 * bi[k].1);
        }
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    (ab / (aa.sqrt() * bb.sqrt())).abs()
}

fn interp_onto(mode: &RadialMode, nodes: &[f64]) -> Vec<(f64, f64)> {
    let src = mode.coordinates();
    let out: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&r| {
            if !r.is_finite() {
                let k = src.len() - 1;
                return (mode.f()[k], mode.g()[k]);
            }
            match src.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
                Ok(k) => (mode.f()[k], mode.g()[k]),
                Err(k) => {
                    if k == 0 {
                        (mode.f()[0], mode.g()[0])
                    } else if k >= src.len() || !src[k].is_finite() {
                        let last = src.iter().rposition(|x| x.is_finite()).unwrap();
                        (mode.f()[last], mode.g()[last])
                    } else {
                        let t = (r - src[k - 1]) / (src[k] - src[k - 1]);
                        (
                            mode.f()[k - 1] * (1.0 - t) + mode.f()[k] * t,
                            mode.g()[k - 1] * (1.0 - t) + mode.g()[k] * t,
                        )
                    }
                }
            }
        })
        .collect();
    out
}
