//! Compactified radial grids for the plane.
//!
//! A grid carries N nodes r_0 = 0 < r_1 < … < r_{N-1} = ∞ obtained by pushing
//! a uniform grid on s ∈ [0, 1] through a compactifying map, plus quadrature
//! weights including the plane measure 2πr dr. Because the plane has infinite
//! area the weights make sense only for integrands decaying strictly faster
//! than r^{-3}; for that class the rule is second-order accurate.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridMap {
    /// r = s/(1-s)
    Rational,
    /// r = tan(πs/2), uniform in the sphere's polar angle
    Stereographic,
    /// nodes supplied directly; no assembly support
    Explicit,
}

impl GridMap {
    pub fn name(self) -> &'static str {
        match self {
            GridMap::Rational => "rational",
            GridMap::Stereographic => "stereographic",
            GridMap::Explicit => "explicit",
        }
    }

    pub(crate) fn r_of_s(self, s: f64) -> f64 {
        match self {
            GridMap::Rational => {
                if s >= 1.0 {
                    f64::INFINITY
                } else {
                    s / (1.0 - s)
                }
            }
            GridMap::Stereographic => {
                if s >= 1.0 {
                    f64::INFINITY
                } else {
                    (std::f64::consts::FRAC_PI_2 * s).tan()
                }
            }
            GridMap::Explicit => f64::NAN,
        }
    }

    pub(crate) fn dr_ds(self, s: f64) -> f64 {
        match self {
            GridMap::Rational => 1.0 / ((1.0 - s) * (1.0 - s)),
            GridMap::Stereographic => {
                let t = (std::f64::consts::FRAC_PI_2 * s).tan();
                std::f64::consts::FRAC_PI_2 * (1.0 + t * t)
            }
            GridMap::Explicit => f64::NAN,
        }
    }
}

/// Radial quadrature/discretization grid. Immutable after construction.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    map: GridMap,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn map(&self) -> GridMap {
        self.map
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest finite node.
    pub fn r_max_finite(&self) -> f64 {
        self.nodes
            .iter()
            .rev()
            .find(|r| r.is_finite())
            .copied()
            .unwrap_or(0.0)
    }

    /// Uniform parameter nodes s_i = i/(N-1) backing a mapped grid.
    pub(crate) fn s_nodes(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    /// Σ w_i h(r_i); `values` must be the integrand sampled on the nodes,
    /// with value 0 at the infinity node.
    pub fn quadrature(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Grid with explicit nodes (no compactifying map, no endpoint poles).
    /// Weights are plain trapezoid weights on 2πr dr over the given range.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidGrid(
                    "nodes must be strictly increasing".into(),
                ));
            }
        }
        if !nodes.iter().all(|r| r.is_finite() && *r >= 0.0) {
            return Err(Error::InvalidGrid(
                "explicit nodes must be finite and nonnegative".into(),
            ));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let dr = nodes[i + 1] - nodes[i];
            weights[i] += std::f64::consts::PI * dr * nodes[i];
            weights[i + 1] += std::f64::consts::PI * dr * nodes[i + 1];
        }
        // keep endpoint weights positive even at r = 0
        if weights[0] == 0.0 {
            weights[0] = std::f64::consts::PI * (nodes[1] - nodes[0]).powi(2) / 3.0;
        }
        Ok(Self {
            map: GridMap::Explicit,
            nodes,
            weights,
        })
    }
}

/// Build an N-node compactified grid for the given map.
///
/// The infinity node carries the half-cell weight sampled at the last finite
/// node; together with the trapezoid interior weights this keeps every weight
/// strictly positive while the quadrature stays O(N^{-2}) on admissible
/// integrands.
pub fn build_grid(n: usize, map: GridMap) -> Result<RadialGrid> {
    if map == GridMap::Explicit {
        return Err(Error::UnsupportedGridMap("explicit"));
    }
    if n < 16 {
        return Err(Error::GridTooCoarse { need: 16, got: n });
    }
    let h = 1.0 / (n - 1) as f64;
    let jacobian = |s: f64| 2.0 * std::f64::consts::PI * map.r_of_s(s) * map.dr_ds(s);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let s = i as f64 * h;
        nodes.push(map.r_of_s(s));
        let w = if i == 0 {
            // exact ∫ φ_0 J ds over the first element (J vanishes linearly at 0)
            element_hat_weight(map, 0.0, h, true)
        } else if i == n - 1 {
            0.5 * h * jacobian(1.0 - h)
        } else {
            h * jacobian(s)
        };
        weights.push(w);
    }
    debug_assert!(weights.iter().all(|w| *w > 0.0));
    Ok(RadialGrid {
        map,
        nodes,
        weights,
    })
}

/// ∫ φ J ds over one element by 3-point Gauss, φ the hat that is 1 at the
/// element end indicated by `left_node`.
fn element_hat_weight(map: GridMap, s0: f64, s1: f64, left_node: bool) -> f64 {
    const GX: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
    const GW: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mid = 0.5 * (s0 + s1);
    let half = 0.5 * (s1 - s0);
    let mut acc = 0.0;
    for (x, w) in GX.iter().zip(GW) {
        let s = mid + half * x;
        let phi = if left_node {
            (s1 - s) / (s1 - s0)
        } else {
            (s - s0) / (s1 - s0)
        };
        acc += w * half * phi * 2.0 * std::f64::consts::PI * map.r_of_s(s) * map.dr_ds(s);
    }
    acc
}
