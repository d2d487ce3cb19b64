//! Finite-difference weights on arbitrary nodes (Fornberg's recursion).

/// Weights for the `der`-th derivative at `x0` from samples at `nodes`.
///
/// Works on non-uniform grids; a 5-node window gives 4th-order first and
/// 3rd-order second derivatives in the interior (4th order when centered
/// on a smooth grid).
pub fn fd_weights(x0: f64, nodes: &[f64], der: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(der < n, "need more nodes than the derivative order");
    // c[k][j]: weight of node j for the k-th derivative
    let mut c = vec![vec![0.0; n]; der + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=der.min(i)).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=der.min(i)).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[der].clone()
}

/// First and second derivatives of sampled values using 5-point windows,
/// one-sided at the ends.
pub fn derivatives_5pt(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    assert!(n >= 5, "derivatives_5pt needs at least 5 nodes");
    assert_eq!(xs.len(), ys.len());
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let start = i.saturating_sub(2).min(n - 5);
        let window = &xs[start..start + 5];
        let vals = &ys[start..start + 5];
        let w1 = fd_weights(xs[i], window, 1);
        let w2 = fd_weights(xs[i], window, 2);
        d1[i] = w1.iter().zip(vals).map(|(w, v)| w * v).sum();
        d2[i] = w2.iter().zip(vals).map(|(w, v)| w * v).sum();
    }
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_weights_match_classic_stencil() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(0.0, &nodes, 1);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fd_weights(0.0, &nodes, 2);
        let expect = [
            -1.0 / 12.0,
            16.0 / 12.0,
            -30.0 / 12.0,
            16.0 / 12.0,
            -1.0 / 12.0,
        ];
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_on_nonuniform_grid() {
        // jittered grid, smooth function; errors scale like h⁴ and h³
        let xs: Vec<f64> = (0..200)
            .map(|i| 0.5 + 0.01 * i as f64 + 0.002 * (i as f64).sin())
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * 0.7).sin()).collect();
        let (d1, d2) = derivatives_5pt(&xs, &ys);
        for i in 5..195 {
            let x = xs[i];
            assert!((d1[i] - 0.7 * (0.7 * x).cos()).abs() < 1e-6, "i={i}");
            assert!((d2[i] + 0.49 * (0.7 * x).sin()).abs() < 1e-4, "i={i}");
        }
    }
}
