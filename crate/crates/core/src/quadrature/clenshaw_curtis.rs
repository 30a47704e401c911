use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid, GridKind};
use crate::error::{Error, Result};

/// Transform between samples on Chebyshev-Lobatto nodes and Chebyshev
/// coefficients, implemented as a DCT-I through an FFT of the even extension.
pub struct ChebyshevTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ChebyshevTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChebyshevTransform").field("m", &self.m).finish()
    }
}

impl ChebyshevTransform {
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * m);
        Self { m, fft }
    }

    /// Returns `Σ_{j=0}^{M} w_j cos(π j n / M)` for n = 0..=M, with both end
    /// terms weighted by 1/2.
    fn dct1_half_ends(&self, w: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut buf = Vec::with_capacity(2 * m);
        buf.extend_from_slice(w);
        buf.extend(w[1..m].iter().rev());
        self.fft.process(&mut buf);
        buf.truncate(m + 1);
        for v in &mut buf {
            *v *= 0.5;
        }
        buf
    }

    /// Coefficients `a_n` with `f(t) = Σ a_n T_n(t)` from samples ordered by
    /// increasing abscissa (node j at t = -cos(π j / M)).
    pub fn coefficients(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.m;
        let reversed: Vec<Complex64> = samples.iter().rev().copied().collect();
        let mut a = self.dct1_half_ends(&reversed);
        let scale = 2.0 / m as f64;
        for v in &mut a {
            *v *= scale;
        }
        a[0] *= 0.5;
        a[m] *= 0.5;
        if let Some(bad) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::Quadrature(format!("Chebyshev coefficient {bad} overflowed")));
        }
        Ok(a)
    }

    /// Values of `Σ a_n T_n` at the nodes, ordered by increasing abscissa.
    pub fn values(&self, a: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut w = a.to_vec();
        w[0] *= 2.0;
        w[m] *= 2.0;
        let mut v = self.dct1_half_ends(&w);
        v.reverse();
        v
    }
}

/// Chebyshev coefficients of an antiderivative of `Σ a_n T_n` (constant term zero).
///
/// The result has one more entry than the input.
pub fn antiderivative_coefficients(a: &[Complex64]) -> Vec<Complex64> {
    let m = a.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    let get = |n: usize| -> Complex64 {
        match n {
            0 => 2.0 * a[0],
            n if n <= m => a[n],
            _ => zero,
        }
    };
    let mut b = vec![zero; m + 2];
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        *bk = (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
    }
    b
}

/// Chebyshev coefficients of the derivative of `Σ a_n T_n`.
pub fn derivative_coefficients(a: &[Complex64]) -> Vec<Complex64> {
    let m = a.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut d = vec![zero; m + 2];
    for k in (1..=m).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * a[k];
    }
    d[0] *= 0.5;
    d.truncate(m + 1);
    d
}

pub(crate) fn cumulative(
    grid: &Grid,
    transform: &ChebyshevTransform,
    values: &[Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    if grid.kind() != GridKind::Chebyshev {
        return Err(Error::Quadrature("Clenshaw-Curtis integration needs a Chebyshev grid".into()));
    }
    let m = grid.intervals();
    let a = transform.coefficients(values)?;
    let mut b = antiderivative_coefficients(&a);
    // T_{M+1} coincides with T_{M-1} on the Lobatto nodes.
    let top = b.pop().expect("nonempty");
    b[m - 1] += top;
    let raw = transform.values(&b);
    let half = 0.5 * (grid.b() - grid.a());
    let anchor = raw[grid.x0_index()];
    for (o, r) in out.iter_mut().zip(raw) {
        *o = (r - anchor) * half;
    }
    out[grid.x0_index()] = Complex64::new(0.0, 0.0);
    Ok(())
}

pub(crate) fn differentiate(
    grid: &Grid,
    transform: &ChebyshevTransform,
    values: &[Complex64],
) -> Result<Vec<Complex64>> {
    let a = transform.coefficients(values)?;
    let d = derivative_coefficients(&a);
    let scale = 2.0 / (grid.b() - grid.a());
    Ok(transform.values(&d).into_iter().map(|v| v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn antiderivative_of_t2() {
        let a = vec![c(0.0), c(0.0), c(1.0)];
        let b = antiderivative_coefficients(&a);
        assert!((b[1] - c(-0.5)).norm() < 1e-15);
        assert!((b[2]).norm() < 1e-15);
        assert!((b[3] - c(1.0 / 6.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_of_t3() {
        // T3' = 3 T0 + 6 T2
        let a = vec![c(0.0), c(0.0), c(0.0), c(1.0)];
        let d = derivative_coefficients(&a);
        assert!((d[0] - c(3.0)).norm() < 1e-15);
        assert!((d[1]).norm() < 1e-15);
        assert!((d[2] - c(6.0)).norm() < 1e-15);
    }

    #[test]
    fn transform_round_trip() {
        let m = 16;
        let t = ChebyshevTransform::new(m);
        let xs: Vec<f64> = (0..=m)
            .map(|j| -(std::f64::consts::PI * j as f64 / m as f64).cos())
            .collect();
        let f: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x.exp(), x * x)).collect();
        let a = t.coefficients(&f).unwrap();
        let back = t.values(&a);
        for (u, v) in f.iter().zip(&back) {
            assert!((u - v).norm() < 1e-14);
        }
    }
}
