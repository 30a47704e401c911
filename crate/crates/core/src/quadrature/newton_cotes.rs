use num_complex::Complex64;

use super::grid::{Grid, GridKind, BLOCK};
use crate::error::{Error, Result};

/// Cumulative weights of the six-point closed Newton-Cotes rule, scaled by 1440.
///
/// Row `i - 1` integrates the degree-5 interpolant through nodes `0..=5` from
/// node 0 to node `i`, in units of the spacing.
const CUMULATIVE_1440: [[f64; 6]; BLOCK] = [
    [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0],
    [448.0, 2064.0, 224.0, 224.0, -96.0, 16.0],
    [459.0, 1971.0, 1026.0, 1026.0, -189.0, 27.0],
    [448.0, 2048.0, 768.0, 2048.0, 448.0, 0.0],
    [475.0, 1875.0, 1250.0, 1250.0, 1875.0, 475.0],
];

/// Cumulative antiderivative on a uniform grid, written into `out`.
///
/// Blocks of five intervals are tiled outward from the anchor inside each
/// segment; the value carries over unchanged across a duplicated breakpoint.
pub(crate) fn cumulative(grid: &Grid, values: &[Complex64], out: &mut [Complex64]) -> Result<()> {
    if grid.kind() != GridKind::Uniform {
        return Err(Error::Quadrature("Newton-Cotes integration needs a uniform grid".into()));
    }
    if !grid.intervals().is_multiple_of(BLOCK) {
        return Err(Error::Quadrature(format!(
            "interval count {} is not a multiple of {BLOCK}",
            grid.intervals()
        )));
    }
    debug_assert_eq!(values.len(), grid.len());
    debug_assert_eq!(out.len(), grid.len());

    let h = grid.spacing().expect("uniform grid");
    let segments = grid.segments();
    let x0 = grid.x0_index();
    let home = grid.x0_segment();

    let seg = segments[home];
    if !(x0 - seg.start).is_multiple_of(BLOCK) || !(seg.end - x0).is_multiple_of(BLOCK) {
        return Err(Error::Quadrature("x0 is not on a block boundary".into()));
    }
    out[x0] = Complex64::new(0.0, 0.0);
    sweep_right(values, out, x0, seg.end, h);
    sweep_left(values, out, x0, seg.start, h);

    for &s in &segments[home + 1..] {
        check_tiling(s.start, s.end)?;
        out[s.start] = out[s.start - 1];
        sweep_right(values, out, s.start, s.end, h);
    }
    for &s in segments[..home].iter().rev() {
        check_tiling(s.start, s.end)?;
        out[s.end] = out[s.end + 1];
        sweep_left(values, out, s.end, s.start, h);
    }
    Ok(())
}

fn check_tiling(start: usize, end: usize) -> Result<()> {
    if !(end - start).is_multiple_of(BLOCK) {
        return Err(Error::Quadrature(format!(
            "segment [{start}, {end}] does not tile into blocks of {BLOCK}"
        )));
    }
    Ok(())
}

fn sweep_right(values: &[Complex64], out: &mut [Complex64], from: usize, to: usize, h: f64) {
    let w = scaled_weights(h);
    let mut j = from;
    while j < to {
        let base = out[j];
        let f = &values[j..=j + BLOCK];
        for (i, row) in w.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (wk, fk) in row.iter().zip(f) {
                acc += fk * wk;
            }
            out[j + i + 1] = base + acc;
        }
        j += BLOCK;
    }
}

/// Mirror image of `sweep_right`: the block's samples are read in reflected
/// order so that leftward integration is exactly the negated rightward rule.
fn sweep_left(values: &[Complex64], out: &mut [Complex64], from: usize, to: usize, h: f64) {
    let w = scaled_weights(h);
    let mut j = from;
    while j > to {
        let base = out[j];
        for (i, row) in w.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, wk) in row.iter().enumerate() {
                acc += values[j - k] * wk;
            }
            out[j - i - 1] = base - acc;
        }
        j -= BLOCK;
    }
}

fn scaled_weights(h: f64) -> [[f64; 6]; BLOCK] {
    let mut w = CUMULATIVE_1440;
    for row in &mut w {
        for v in row.iter_mut() {
            *v *= h / 1440.0;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_rows_integrate_monomials_exactly() {
        for (i, row) in CUMULATIVE_1440.iter().enumerate() {
            let upper = (i + 1) as f64;
            for deg in 0..=5 {
                let quad: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * (k as f64).powi(deg))
                    .sum::<f64>()
                    / 1440.0;
                let exact = upper.powi(deg + 1) / (deg + 1) as f64;
                assert!((quad - exact).abs() < 1e-10 * exact.max(1.0), "row {i} degree {deg}");
            }
        }
    }
}
