//! Spectrum scans: pencil solves across grid refinements and maps, mode
//! matching, drift-based spurious filtering, classification, and shooting
//! cross-checks, collected into a deterministic report.
//!
//! For degree 1 the theory says the report must contain no
//! eigenvalue-classified mode for any λ; for degree ≥ 2 it must recover
//! λ = 0. Whether other eigenvalues exist at higher degree is open: any
//! extra eigenvalue-classified entry is reported with its drift and the
//! two-method agreement, never asserted as ground truth.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::bubbles::Chart;
use crate::corotational::RadialMode;
use crate::error::{Error, Result};
use crate::grid::{build_grid, GridMap};
use crate::linearized::ZeroMode;

use super::shoot::refine_eigenvalue;
use super::{
    assemble_pencil, classify_mode, decay_exponent, mode_overlap, solve_pencil, Classification,
    EigenMode,
};

/// Modes from different solves pair up when their ρ-weighted overlap
/// exceeds this.
const MATCH_OVERLAP_MIN: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub m: u32,
    pub window: (f64, f64),
    pub n_list: Vec<usize>,
    pub maps: Vec<GridMap>,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        crate::bubbles::check_degree(self.m)?;
        if !(self.window.0 < self.window.1) {
            return Err(Error::InvalidGrid("empty scan window".into()));
        }
        if self.n_list.is_empty() || self.maps.is_empty() {
            return Err(Error::InvalidGrid(
                "scan needs at least one grid and map".into(),
            ));
        }
        if self.maps.iter().any(|m| *m == GridMap::Explicit) {
            return Err(Error::UnsupportedGridMap("explicit"));
        }
        Ok(())
    }
}

/// Shooting cross-check attached to an eigenvalue-classified mode.
#[derive(Clone, Copy, Debug)]
pub struct ShootCheck {
    pub lambda: f64,
    pub mismatch_norm: f64,
    /// gap between the Richardson-extrapolated pencil value and λ_shoot
    pub agreement: f64,
}

#[derive(Clone, Debug)]
pub struct ModeRecord {
    pub lambda: f64,
    pub alpha: f64,
    pub fit_residual: f64,
    pub drift: f64,
    pub classification: Classification,
    pub shoot: Option<ShootCheck>,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub config: ScanConfig,
    pub records: Vec<ModeRecord>,
    /// reference-grid mode profiles aligned with `records`
    pub modes: Vec<RadialMode>,
    /// best ρ-weighted overlap of a λ ≈ 0 mode with the dilation zero mode
    pub zero_mode_overlap: Option<f64>,
}

/// Run the full scan. Work items execute sequentially in a fixed order so
/// identical configurations produce identical reports.
pub fn scan_spectrum(config: &ScanConfig) -> Result<SpectrumReport> {
    config.validate()?;
    let mut n_list = config.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    // solve everything
    let mut solved: Vec<Vec<Vec<EigenMode>>> = Vec::new();
    for &map in &config.maps {
        let mut per_map = Vec::new();
        for &n in &n_list {
            let grid = Arc::new(build_grid(n, map)?);
            let prob = assemble_pencil(config.m, &grid, true)?;
            per_map.push(solve_pencil(&prob, config.window)?);
        }
        solved.push(per_map);
    }
    let reference = &solved[0][n_list.len() - 1];
    let mut records = Vec::with_capacity(reference.len());
    let mut modes = Vec::with_capacity(reference.len());
    for em in reference {
        let mut drift = 0.0f64;
        // refinement drift: previous N on the first map; the matched value
        // also feeds the Richardson extrapolation of λ for the shooting check
        let mut lambda_converged = em.lambda;
        if n_list.len() >= 2 {
            if let Some(prev) = matched_lambda(em, &solved[0][n_list.len() - 2]) {
                drift = drift.max((em.lambda - prev).abs());
                // second-order discretization: λ_h ≈ λ + C h²
                lambda_converged = em.lambda + (em.lambda - prev) / 3.0;
            } else {
                drift = f64::INFINITY;
            }
        }
        // cross-map drift at the finest grid
        for per_map in solved.iter().skip(1) {
            match matched_lambda(em, &per_map[n_list.len() - 1]) {
                Some(other) => drift = drift.max((em.lambda - other).abs()),
                None => drift = f64::INFINITY,
            }
        }
        let (alpha, fit_residual) = match decay_exponent(&em.mode) {
            Ok(fit) => (fit.alpha, fit.fit_residual),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let fit = super::DecayFit {
            alpha,
            fit_residual,
            window: (0.0, 0.0),
            nodes_used: 0,
        };
        let classification = if alpha.is_nan() {
            Classification::Spurious
        } else {
            classify_mode(em.lambda, &fit, drift)
        };
        let shoot = if classification == Classification::Eigenvalue {
            let half = 0.02f64.max(0.1 * em.lambda.abs());
            match refine_eigenvalue(config.m, lambda_converged, half) {
                Ok(r) => Some(ShootCheck {
                    lambda: r.lambda,
                    mismatch_norm: r.mismatch[0].hypot(r.mismatch[1]),
                    agreement: (r.lambda - lambda_converged).abs(),
                }),
                Err(_) => None,
            }
        } else {
            None
        };
        records.push(ModeRecord {
            lambda: em.lambda,
            alpha,
            fit_residual,
            drift,
            classification,
            shoot,
        });
        modes.push(em.mode.clone());
    }
    // zero-mode overlap diagnostic
    let zero_mode_overlap = {
        let grid = reference.first().map(|em| Arc::clone(em.mode.grid()));
        match grid {
            None => None,
            Some(grid) => {
                let zm = RadialMode::sample(&ZeroMode::new(config.m)?, grid, config.m, Chart::R)?;
                reference
                    .iter()
                    .filter(|em| em.lambda.abs() <= 0.1)
                    .map(|em| mode_overlap(&em.mode, &zm))
                    .fold(None, |acc: Option<f64>, v| {
                        Some(acc.map_or(v, |a| a.max(v)))
                    })
            }
        }
    };
    // sort by λ ascending (records and modes in lockstep)
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&i, &j| records[i].lambda.partial_cmp(&records[j].lambda).unwrap());
    let records: Vec<ModeRecord> = order.iter().map(|&i| records[i].clone()).collect();
    let modes: Vec<RadialMode> = order.iter().map(|&i| modes[i].clone()).collect();
    Ok(SpectrumReport {
        config: ScanConfig {
            m: config.m,
            window: config.window,
            n_list,
            maps: config.maps.clone(),
        },
        records,
        modes,
        zero_mode_overlap,
    })
}

/// λ of the best ρ-overlap partner, if any candidate pairs up.
fn matched_lambda(em: &EigenMode, candidates: &[EigenMode]) -> Option<f64> {
    let mut best_overlap = 0.0;
    let mut best_lambda = None;
    for c in candidates {
        let ov = mode_overlap(&em.mode, &c.mode);
        if ov > best_overlap {
            best_overlap = ov;
            best_lambda = Some(c.lambda);
        }
    }
    if best_overlap < MATCH_OVERLAP_MIN {
        None
    } else {
        best_lambda
    }
}

fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{:+.9e}", x)
    }
}

impl SpectrumReport {
    /// Deterministic text rendering; identical configs give identical bytes.
    pub fn render(&self, version: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# co-rotational spectrum scan");
        let _ = writeln!(out, "version: {version}");
        let _ = writeln!(out, "degree: {}", self.config.m);
        let _ = writeln!(
            out,
            "window: [{}, {}]",
            fmt_f(self.config.window.0),
            fmt_f(self.config.window.1)
        );
        let _ = writeln!(
            out,
            "grids: {}",
            self.config
                .n_list
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(
            out,
            "maps: {}",
            self.config
                .maps
                .iter()
                .map(|m| m.name().to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(out, "modes: {}", self.records.len());
        let _ = writeln!(
            out,
            "{:<18} {:<18} {:<18} {:<18} {:<11} {:<18} {:<18}",
            "lambda", "alpha", "fit_residual", "drift", "class", "shoot_lambda", "shoot_mismatch"
        );
        for r in &self.records {
            let (sl, sm) = match &r.shoot {
                Some(s) => (fmt_f(s.lambda), fmt_f(s.mismatch_norm)),
                None => ("-".to_string(), "-".to_string()),
            };
            let _ = writeln!(
                out,
                "{:<18} {:<18} {:<18} {:<18} {:<11} {:<18} {:<18}",
                fmt_f(r.lambda),
                fmt_f(r.alpha),
                fmt_f(r.fit_residual),
                fmt_f(r.drift),
                r.classification.name(),
                sl,
                sm
            );
        }
        match self.zero_mode_overlap {
            Some(ov) => {
                let _ = writeln!(out, "zero-mode overlap at lambda~0: {}", fmt_f(ov));
            }
            None => {
                let _ = writeln!(out, "zero-mode overlap at lambda~0: -");
            }
        }
        let eigen_count = self
            .records
            .iter()
            .filter(|r| r.classification == Classification::Eigenvalue)
            .count();
        let _ = writeln!(out, "eigenvalue-classified modes: {eigen_count}");
        let _ = writeln!(
            out,
            "note: classifications are numerical findings at the stated grids, not proofs"
        );
        out
    }
}
