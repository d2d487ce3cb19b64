//! Adaptive Gauss quadrature.
//!
//! Each interval is integrated with paired 7-point and 15-point
//! Gauss-Legendre rules; their difference drives bisection, Kronrod-style.
//! Nodes and weights are generated once by Newton iteration on the Legendre
//! recurrence, so there are no tabulated constants to mistype.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Rule {
    lo_nodes: Vec<f64>,
    lo_weights: Vec<f64>,
    hi_nodes: Vec<f64>,
    hi_weights: Vec<f64>,
}

impl Rule {
    fn new() -> Self {
        let (lo_nodes, lo_weights) = gauss_legendre(7);
        let (hi_nodes, hi_weights) = gauss_legendre(15);
        Self {
            lo_nodes,
            lo_weights,
            hi_nodes,
            hi_weights,
        }
    }

    /// Returns (15-point value, |15-point - 7-point|) on [a, b].
    fn apply(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut lo = 0.0;
        for (&x, &w) in self.lo_nodes.iter().zip(&self.lo_weights) {
            lo += w * f(c + h * x);
        }
        let mut hi = 0.0;
        for (&x, &w) in self.hi_nodes.iter().zip(&self.hi_weights) {
            hi += w * f(c + h * x);
        }
        (h * hi, h * (hi - lo).abs())
    }
}

/// Integral of `f` over [a, b] with an absolute tolerance.
///
/// Returns the value and the accumulated error estimate. Fails with the
/// achieved estimate when the interval stack is exhausted.
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<(f64, f64)> {
    let rule = Rule::new();
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    const MAX_DEPTH: u32 = 48;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = rule.apply(&mut f, lo, hi);
        let local_tol = abs_tol * (hi - lo) / (b - a);
        if err <= local_tol.max(1e-300) || depth >= MAX_DEPTH {
            total += val;
            err_total += err;
            if depth >= MAX_DEPTH && err > local_tol {
                return Err(Error::QuadratureDidNotConverge {
                    requested: abs_tol,
                    achieved: err_total,
                });
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok((total, err_total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        // degree 13 is integrated exactly by 7 points
        let exact = 2.0 / 13.0; // integral of x^12 over [-1,1]
        let got: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(12)).sum();
        assert!((got - exact).abs() < 1e-14, "got {got}");
        let sum_w: f64 = w.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integrates_peaked_function() {
        // integral of 1/(1e-4 + x^2) over [-1,1] = 2*atan(100)/1e-2
        let exact = 2.0 * 100.0f64.atan() / 1e-2;
        let (val, err) = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        assert!((val - exact).abs() < 1e-7, "val {val} exact {exact}");
        assert!(err < 1e-7);
    }
}
