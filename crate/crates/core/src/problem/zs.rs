//! Zakharov-Shabat systems `v₁' = λ v₁ + P v₂`, `v₂' = -λ v₂ - Q v₁` and their
//! reduction to a quadratic pencil for `v₂`.

use std::sync::Arc;

use num_complex::Complex64;

use super::{
    BoundaryCondition, Endpoint, PencilTerm, ProblemFlags, ProblemMeta, SpectralProblem, Window, ZsInfo,
};
use crate::error::{Error, Result};
use crate::quadrature::{Grid, Integrator, SampledFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct ZakharovShabatProblem {
    pub name: String,
    pub grid: Arc<Grid>,
    pub q: SampledFunction,
    pub p: SampledFunction,
    pub epsilon: Option<f64>,
    /// Factor converting the system's λ into the reported spectral parameter.
    pub scale: Complex64,
}

impl ZakharovShabatProblem {
    pub fn new(
        name: impl Into<String>,
        q: SampledFunction,
        p: SampledFunction,
        epsilon: Option<f64>,
        scale: Complex64,
    ) -> Result<Self> {
        q.check_grid(&p)?;
        if let Some(node) = q.values().iter().position(|v| *v == Complex64::new(0.0, 0.0) || !v.is_finite()) {
            return Err(Error::Problem(format!("Q vanishes or is not finite at node {node}")));
        }
        if let Some(node) = p.first_non_finite() {
            return Err(Error::NonFinite { what: "P", node });
        }
        Ok(Self { name: name.into(), grid: q.grid().clone(), q, p, epsilon, scale })
    }

    /// Truncation support `[-a, a]` as `(−a, a)`.
    pub fn support(&self) -> (f64, f64) {
        (self.grid.a(), self.grid.b())
    }
}

/// Rewrites the system as `(v₂'/Q)' + P v₂ = λ (Q'/Q²) v₂ + λ² (1/Q) v₂`.
///
/// The Jost conditions `v₁(−a) = 1, v₂(−a) = 0, v₁(a) = 0` become
/// `v₂(−a) = 0` and `Q(a)·(p v₂')(a) + λ v₂(a) = 0`, i.e. `v₂'(a) + λ v₂(a) = 0`.
pub fn zs_to_pencil(zs: &ZakharovShabatProblem) -> Result<SpectralProblem> {
    let grid = zs.grid.clone();
    let integ = Integrator::new(grid.clone());
    let qp = integ.differentiate(&zs.q)?;
    let inv_q = zs.q.recip();
    let r1 = qp.mul(&inv_q)?.mul(&inv_q)?;
    let zero = SampledFunction::zeros(grid.clone());
    let terms = vec![
        PencilTerm { k: 1, r: r1, s: zero.clone() },
        PencilTerm { k: 2, r: inv_q.clone(), s: zero },
    ];
    let q_end = zs.q.last();
    let one = Complex64::new(1.0, 0.0);
    let zero_c = Complex64::new(0.0, 0.0);
    let bc_right = BoundaryCondition::new(vec![zero_c, one], vec![q_end], Endpoint::Right)?;
    let mut problem = SpectralProblem::new(
        zs.name.clone(),
        inv_q,
        zs.p.clone(),
        terms,
        BoundaryCondition::dirichlet(Endpoint::Left),
        bc_right,
        ProblemFlags::default(),
    )?;
    problem.zs = Some(ZsInfo { scale: zs.scale, epsilon: zs.epsilon });
    problem.meta = ProblemMeta {
        first_index: 1,
        window: Some(Window { re_min: 1e-6, ..Window::ALL }),
    };
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_q_gives_plain_pencil() {
        let g = Grid::uniform(-1.0, 1.0, 50, -1.0, &[]).unwrap().into_shared();
        let one = SampledFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        let zs = ZakharovShabatProblem::new("c", one.clone(), SampledFunction::zeros(g), None, 1.0.into()).unwrap();
        let p = zs_to_pencil(&zs).unwrap();
        assert_eq!(p.p, one);
        assert!(p.q.is_identically_zero());
        assert!(p.terms[0].r.max_abs() < 1e-12);
        assert_eq!(p.terms[1].r, one);
    }

    #[test]
    fn exponential_q() {
        let g = Grid::uniform(0.0, 1.0, 200, 0.0, &[]).unwrap().into_shared();
        let q = SampledFunction::from_real_fn(g.clone(), f64::exp);
        let zs = ZakharovShabatProblem::new("e", q, SampledFunction::zeros(g.clone()), None, 1.0.into()).unwrap();
        let p = zs_to_pencil(&zs).unwrap();
        for (x, v) in g.nodes().iter().zip(p.terms[0].r.values()) {
            assert!((v.re - (-x).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn vanishing_q_rejected() {
        let g = Grid::uniform(-1.0, 1.0, 50, -1.0, &[]).unwrap().into_shared();
        let q = SampledFunction::from_real_fn(g.clone(), |x| x);
        assert!(ZakharovShabatProblem::new("z", q, SampledFunction::zeros(g), None, 1.0.into()).is_err());
    }
}
