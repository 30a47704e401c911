//! Cumulative quadrature anchored at a grid node, plus the matching
//! differentiation rules.

mod clenshaw_curtis;
mod diff;
mod grid;
mod newton_cotes;

use std::sync::Arc;

use num_complex::Complex64;

pub use clenshaw_curtis::{antiderivative_coefficients, derivative_coefficients, ChebyshevTransform};
pub use diff::fornberg_first_derivative;
pub use grid::{Grid, GridKind, SampledFunction, Segment, BLOCK};

pub(crate) use grid::same_grid;

use crate::error::{Error, Result};

/// Reusable integration/differentiation context for one grid.
///
/// Holds the FFT plan for Chebyshev grids so that repeated integrals during
/// a power recursion do not re-plan.
#[derive(Debug, Clone)]
pub struct Integrator {
    grid: Arc<Grid>,
    transform: Option<Arc<ChebyshevTransform>>,
}

impl Integrator {
    pub fn new(grid: Arc<Grid>) -> Self {
        let transform = match grid.kind() {
            GridKind::Chebyshev => Some(Arc::new(ChebyshevTransform::new(grid.intervals()))),
            GridKind::Uniform => None,
        };
        Self { grid, transform }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Cumulative integral of raw samples, `I(x0) = 0`.
    pub fn integrate_values(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
        self.integrate_into(values, &mut out)?;
        Ok(out)
    }

    pub fn integrate_into(&self, values: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if values.len() != self.grid.len() || out.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        match &self.transform {
            None => newton_cotes::cumulative(&self.grid, values, out),
            Some(t) => clenshaw_curtis::cumulative(&self.grid, t, values, out),
        }
    }

    /// Cumulative integral of the pointwise product `f·w`.
    pub fn weighted_values(&self, f: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
        let prod: Vec<Complex64> = f.iter().zip(w).map(|(a, b)| a * b).collect();
        self.integrate_values(&prod)
    }

    pub fn integrate(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.check(f)?;
        SampledFunction::new(self.grid.clone(), self.integrate_values(f.values())?)
    }

    pub fn weighted(&self, f: &SampledFunction, w: &SampledFunction) -> Result<SampledFunction> {
        self.check(f)?;
        self.check(w)?;
        SampledFunction::new(self.grid.clone(), self.weighted_values(f.values(), w.values())?)
    }

    /// Derivative by the grid's native rule: six-point finite differences on
    /// uniform grids, spectral differentiation on Chebyshev grids.
    pub fn differentiate_values(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        match &self.transform {
            None => Ok(diff::finite_difference(&self.grid, values)),
            Some(t) => clenshaw_curtis::differentiate(&self.grid, t, values),
        }
    }

    pub fn differentiate(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.check(f)?;
        SampledFunction::new(self.grid.clone(), self.differentiate_values(f.values())?)
    }

    fn check(&self, f: &SampledFunction) -> Result<()> {
        if same_grid(&self.grid, f.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Cumulative six-point Newton-Cotes antiderivative anchored at `x0`.
pub fn integrate_newton_cotes(f: &SampledFunction) -> Result<SampledFunction> {
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    newton_cotes::cumulative(f.grid(), f.values(), &mut out)?;
    SampledFunction::new(f.grid().clone(), out)
}

/// Cumulative Clenshaw-Curtis antiderivative anchored at `x0`.
pub fn integrate_clenshaw_curtis(f: &SampledFunction) -> Result<SampledFunction> {
    if f.grid().kind() != GridKind::Chebyshev {
        return Err(Error::Quadrature("Clenshaw-Curtis integration needs a Chebyshev grid".into()));
    }
    Integrator::new(f.grid().clone()).integrate(f)
}

/// Cumulative antiderivative by the grid's native rule.
pub fn integrate(f: &SampledFunction) -> Result<SampledFunction> {
    Integrator::new(f.grid().clone()).integrate(f)
}

/// Cumulative antiderivative of the pointwise product `f·w`.
pub fn weighted_integral(f: &SampledFunction, w: &SampledFunction) -> Result<SampledFunction> {
    f.check_grid(w)?;
    Integrator::new(f.grid().clone()).weighted(f, w)
}

/// Derivative by the grid's native rule.
pub fn differentiate(f: &SampledFunction) -> Result<SampledFunction> {
    Integrator::new(f.grid().clone()).differentiate(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn uniform(a: f64, b: f64, m: usize, x0: f64) -> Arc<Grid> {
        Grid::uniform(a, b, m, x0, &[]).unwrap().into_shared()
    }

    #[test]
    fn constant_integrand_gives_identity() {
        let g = uniform(0.0, 10.0, 100, 0.0);
        let f = SampledFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        let i = integrate_newton_cotes(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(i.values()) {
            assert!((v.re - x).abs() < 1e-13 && v.im == 0.0);
        }
    }

    #[test]
    fn x6_on_unit_interval() {
        // The six-point rule leaves -275/12096 h^7 f^(6) per block; on x^6 this
        // is the whole error, so M = 100 reproduces it and M = 1000 is exact to
        // rounding.
        let g = uniform(0.0, 1.0, 100, 0.0);
        let f = SampledFunction::from_real_fn(g, |x| x.powi(6));
        let i = integrate_newton_cotes(&f).unwrap();
        let predicted = 20.0 * 275.0 / 12096.0 * 720.0 * 0.01f64.powi(7);
        let err = i.last().re - 1.0 / 7.0;
        assert!((err - predicted).abs() < 1e-3 * predicted, "{err} vs {predicted}");

        let g = uniform(0.0, 1.0, 1000, 0.0);
        let f = SampledFunction::from_real_fn(g, |x| x.powi(6));
        let i = integrate_newton_cotes(&f).unwrap();
        assert!((i.last().re - 1.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn cosine_gives_sine() {
        let g = uniform(0.0, PI, 1000, 0.0);
        let f = SampledFunction::from_real_fn(g.clone(), f64::cos);
        let i = integrate_newton_cotes(&f).unwrap();
        let err = g
            .nodes()
            .iter()
            .zip(i.values())
            .map(|(x, v)| (v.re - x.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn quintic_exact_at_every_node_with_interior_anchor() {
        let g = uniform(-1.0, 2.0, 30, 0.5);
        let poly = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.25 * x.powi(5);
        let anti = |x: f64| x - x * x + 0.125 * x.powi(4) - x.powi(6) / 24.0;
        let f = SampledFunction::from_real_fn(g.clone(), poly);
        let i = integrate_newton_cotes(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(i.values()) {
            assert!((v.re - (anti(*x) - anti(0.5))).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_constant_and_exponential() {
        let g = Grid::chebyshev(-1.0, 1.0, 32, -1.0).unwrap().into_shared();
        let one = SampledFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        let i = integrate_clenshaw_curtis(&one).unwrap();
        for (x, v) in g.nodes().iter().zip(i.values()) {
            assert!((v.re - (x + 1.0)).abs() < 1e-14);
        }
        let g = Grid::chebyshev(0.0, 1.0, 64, 0.0).unwrap().into_shared();
        let f = SampledFunction::from_real_fn(g.clone(), f64::exp);
        let i = integrate_clenshaw_curtis(&f).unwrap();
        let err = g
            .nodes()
            .iter()
            .zip(i.values())
            .map(|(x, v)| (v - Complex64::new(x.exp() - 1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn weighted_integral_of_x_times_x() {
        let g = uniform(0.0, 1.0, 50, 0.0);
        let x = SampledFunction::from_real_fn(g.clone(), |x| x);
        let i = weighted_integral(&x, &x).unwrap();
        for (t, v) in g.nodes().iter().zip(i.values()) {
            assert!((v.re - t.powi(3) / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn breakpoint_additivity() {
        let g = Grid::uniform(0.0, 1.0, 100, 0.0, &[0.5]).unwrap().into_shared();
        let f = SampledFunction::from_segment_fn(g.clone(), |seg, x| {
            Complex64::new(if seg == 0 { x.exp() } else { 3.0 - x }, 0.0)
        });
        let i = integrate(&f).unwrap();
        let left = 0.5f64.exp() - 1.0;
        let right = 3.0 * 0.5 - (1.0 - 0.25) / 2.0;
        let c = g.breakpoint_indices()[0];
        assert!((i.at(c).re - left).abs() < 1e-14);
        assert_eq!(i.at(c), i.at(c + 1));
        assert!((i.last().re - (left + right)).abs() < 1e-14);
    }

    #[test]
    fn pryce10_weight_is_monotone() {
        let g = uniform(-1.0, 1.0, 200, 0.0);
        let mut w = SampledFunction::from_real_fn(g.clone(), |x| 1.0 / (1.0 - x * x).sqrt());
        w.apply_cap(1e8);
        let one = SampledFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        let i = weighted_integral(&one, &w).unwrap();
        assert!(i.values().iter().all(|v| v.is_finite()));
        // Only the two blocks touching a capped sample feel the cap.
        let inner = &i.values()[BLOCK..i.len() - BLOCK];
        assert!(inner.windows(2).all(|p| p[1].re > p[0].re));
        for (x, v) in g.nodes().iter().zip(i.values()) {
            if x.abs() < 0.9 {
                assert!((v.re - x.asin()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn finite_difference_and_spectral_derivatives() {
        let g = uniform(0.0, 1.0, 200, 0.0);
        let f = SampledFunction::from_real_fn(g.clone(), |x| (2.0 * x).sin());
        let d = differentiate(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(d.values()) {
            assert!((v.re - 2.0 * (2.0 * x).cos()).abs() < 1e-9);
        }
        let g = Grid::chebyshev(0.0, 1.0, 40, 0.0).unwrap().into_shared();
        let f = SampledFunction::from_real_fn(g.clone(), |x| (2.0 * x).sin());
        let d = differentiate(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(d.values()) {
            assert!((v.re - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn linearity(coeffs in proptest::collection::vec(-1.0f64..1.0, 8), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let g = uniform(-1.0, 1.0, 60, 0.0);
            let f = SampledFunction::from_real_fn(g.clone(), |x| coeffs[0] + coeffs[1] * (coeffs[2] * x).sin() + coeffs[3] * x * x);
            let h = SampledFunction::from_real_fn(g.clone(), |x| coeffs[4] + coeffs[5] * (coeffs[6] * x).exp() + coeffs[7] * x);
            let combo = f.scale(alpha.into()).add(&h.scale(beta.into())).unwrap();
            let lhs = integrate(&combo).unwrap();
            let rhs = integrate(&f).unwrap().scale(alpha.into()).add(&integrate(&h).unwrap().scale(beta.into())).unwrap();
            let scale = lhs.max_abs().max(1.0);
            for (l, r) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((l - r).norm() <= 1e-12 * scale);
            }
            prop_assert_eq!(lhs.at_x0(), Complex64::new(0.0, 0.0));
        }

        #[test]
        fn direction_antisymmetry(coeffs in proptest::collection::vec(-1.0f64..1.0, 4)) {
            // Leftward integral on [-1, 0] equals minus the rightward integral
            // of the reflected samples on [0, 1].
            let func = |x: f64| coeffs[0] + coeffs[1] * x + coeffs[2] * (3.0 * x).cos() + coeffs[3] * x.powi(7);
            let gl = uniform(-1.0, 0.0, 40, 0.0);
            let gr = uniform(0.0, 1.0, 40, 0.0);
            let samples = SampledFunction::from_real_fn(gl.clone(), func);
            let reflected: Vec<Complex64> = samples.values().iter().rev().copied().collect();
            let left = integrate(&samples).unwrap();
            let right = integrate(&SampledFunction::new(gr, reflected).unwrap()).unwrap();
            let n = gl.len();
            for j in 0..n {
                prop_assert_eq!(left.at(n - 1 - j), -right.at(j));
            }
        }
    }
}
