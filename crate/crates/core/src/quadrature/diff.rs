use num_complex::Complex64;

use super::grid::Grid;

const STENCIL: usize = 6;

/// First-derivative weights at `z` for the given nodes (Fornberg's algorithm).
pub fn fornberg_first_derivative(nodes: &[f64], z: f64) -> Vec<f64> {
    let n = nodes.len();
    // c[j][k]: weight of node j for derivative order k (k = 0, 1).
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Six-point finite-difference derivative on a uniform grid, evaluated segment
/// by segment so that no stencil reaches across a breakpoint.
pub(crate) fn finite_difference(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let h = grid.spacing().expect("uniform grid");
    let offsets: Vec<f64> = (0..STENCIL).map(|k| k as f64).collect();
    let table: Vec<Vec<f64>> = (0..STENCIL)
        .map(|t| {
            fornberg_first_derivative(&offsets, t as f64)
                .into_iter()
                .map(|w| w / h)
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for seg in grid.segments() {
        for i in seg.start..=seg.end {
            let start = i.saturating_sub(2).clamp(seg.start, seg.end + 1 - STENCIL);
            let w = &table[i - start];
            out[i] = values[start..start + STENCIL]
                .iter()
                .zip(w)
                .map(|(v, wk)| v * wk)
                .sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_centered_three_point() {
        let w = fornberg_first_derivative(&[-1.0, 0.0, 1.0], 0.0);
        assert!((w[0] + 0.5).abs() < 1e-15);
        assert!(w[1].abs() < 1e-15);
        assert!((w[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn six_point_weights_differentiate_quintics() {
        let nodes: Vec<f64> = (0..6).map(|k| k as f64).collect();
        for t in 0..6 {
            let w = fornberg_first_derivative(&nodes, t as f64);
            for deg in 1..=5 {
                let d: f64 = w.iter().zip(&nodes).map(|(wk, x)| wk * x.powi(deg)).sum();
                let exact = deg as f64 * (t as f64).powi(deg - 1);
                assert!((d - exact).abs() < 1e-9 * exact.abs().max(1.0));
            }
        }
    }
}
