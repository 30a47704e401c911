//! Spectral problems in the canonical pencil form
//! `(p u')' + q u = Σ_k λ^k (r_k u + s_k u')` with λ-polynomial boundary conditions.

mod builtin;
pub mod expr;
mod file;
mod zs;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::quadrature::{Grid, GridKind, Integrator, SampledFunction};

pub use builtin::{builtin, builtin_names, BuiltinOptions, DEFAULT_ENDPOINT_CAP};
pub use file::{load_problem, load_problem_file, load_problem_file_with, save_problem};
pub use zs::{zs_to_pencil, ZakharovShabatProblem};

/// One term `λ^k R_k[u]` with `R_k[u] = r_k u + s_k u'`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilTerm {
    pub k: usize,
    pub r: SampledFunction,
    pub s: SampledFunction,
}

impl PencilTerm {
    pub fn has_derivative_part(&self) -> bool {
        !self.s.is_identically_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    Right,
}

/// Boundary form `α(λ) u + β(λ) p u'` at one endpoint, polynomials in λ
/// stored as ascending coefficient lists.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub endpoint: Endpoint,
}

impl BoundaryCondition {
    pub fn new(alpha: Vec<Complex64>, beta: Vec<Complex64>, endpoint: Endpoint) -> Result<Self> {
        let alpha = if alpha.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { alpha };
        let beta = if beta.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { beta };
        if poly::is_zero(&alpha) && poly::is_zero(&beta) {
            return Err(Error::Problem(format!(
                "{endpoint:?} boundary condition has α ≡ β ≡ 0"
            )));
        }
        Ok(Self { alpha, beta, endpoint })
    }

    pub fn dirichlet(endpoint: Endpoint) -> Self {
        Self::real(&[1.0], &[0.0], endpoint)
    }

    pub fn neumann(endpoint: Endpoint) -> Self {
        Self::real(&[0.0], &[1.0], endpoint)
    }

    fn real(alpha: &[f64], beta: &[f64], endpoint: Endpoint) -> Self {
        let c = |v: &[f64]| v.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        Self { alpha: c(alpha), beta: c(beta), endpoint }
    }

    /// Polynomial degree in λ.
    pub fn degree(&self) -> usize {
        let d = |v: &[Complex64]| poly::trim(v.to_vec()).len() - 1;
        d(&self.alpha).max(d(&self.beta))
    }

    pub fn is_lambda_dependent(&self) -> bool {
        self.degree() > 0
    }

    /// `(α, β)` re-expanded in powers of `λ - λ0`.
    pub fn recentered(&self, lam0: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        (poly::recenter(&self.alpha, lam0), poly::recenter(&self.beta, lam0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemFlags {
    pub self_adjoint: bool,
    pub endpoint_cap: f64,
    pub p_vanishes_at_endpoints: bool,
    /// Coefficients violate the continuity/nonvanishing hypotheses of the
    /// convergence theorems; results are still computed.
    pub outside_theorem_hypotheses: bool,
}

impl Default for ProblemFlags {
    fn default() -> Self {
        Self {
            self_adjoint: false,
            endpoint_cap: DEFAULT_ENDPOINT_CAP,
            p_vanishes_at_endpoints: false,
            outside_theorem_hypotheses: false,
        }
    }
}

/// Two particular solutions at λ = 0 with their quasi-derivatives, used to
/// start the formal-power recursion without a bootstrap.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub f: SampledFunction,
    pub g: SampledFunction,
    pub pfp: SampledFunction,
    pub pgp: SampledFunction,
}

/// Data kept from a Zakharov-Shabat reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZsInfo {
    /// Reported eigenvalue = `scale · λ` (e.g. `iε` for semiclassical scaling).
    pub scale: Complex64,
    pub epsilon: Option<f64>,
}

/// Reporting conventions that differ between benchmark problems.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemMeta {
    /// Index assigned to the smallest eigenvalue found (by real part).
    pub first_index: i64,
    /// Default spectral window `[re_min, re_max] × [im_min, im_max]` for solves.
    pub window: Option<Window>,
}

/// Closed rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub const ALL: Self = Self {
        re_min: f64::NEG_INFINITY,
        re_max: f64::INFINITY,
        im_min: f64::NEG_INFINITY,
        im_max: f64::INFINITY,
    };

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    /// Parses `re_min,re_max[,im_min,im_max]`; empty bounds are unbounded.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 2 && parts.len() != 4 {
            return Err(Error::Parse(format!(
                "window `{text}` must be `re_min,re_max` or `re_min,re_max,im_min,im_max`"
            )));
        }
        let num = |s: &str, default: f64| -> Result<f64> {
            if s.is_empty() {
                Ok(default)
            } else {
                s.parse().map_err(|_| Error::Parse(format!("bad window bound `{s}`")))
            }
        };
        let mut w = Self::ALL;
        w.re_min = num(parts[0], f64::NEG_INFINITY)?;
        w.re_max = num(parts[1], f64::INFINITY)?;
        if parts.len() == 4 {
            w.im_min = num(parts[2], f64::NEG_INFINITY)?;
            w.im_max = num(parts[3], f64::INFINITY)?;
        }
        Ok(w)
    }
}

impl Default for Window {
    fn default() -> Self {
        Self::ALL
    }
}

/// A fully sampled spectral problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProblem {
    pub name: String,
    pub grid: Arc<Grid>,
    pub p: SampledFunction,
    pub q: SampledFunction,
    /// Terms for k = 1..=N, in order.
    pub terms: Vec<PencilTerm>,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub flags: ProblemFlags,
    pub seed: Option<Seed>,
    pub zs: Option<ZsInfo>,
    pub meta: ProblemMeta,
}

impl SpectralProblem {
    /// Assembles and validates a problem. Missing term powers are filled with zeros.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        p: SampledFunction,
        q: SampledFunction,
        terms: Vec<PencilTerm>,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
        flags: ProblemFlags,
    ) -> Result<Self> {
        let grid = p.grid().clone();
        let mut problem = Self {
            name: name.into(),
            grid,
            p,
            q,
            terms: Vec::new(),
            bc_left,
            bc_right,
            flags,
            seed: None,
            zs: None,
            meta: ProblemMeta::default(),
        };
        problem.terms = normalize_terms(&problem.grid, terms)?;
        problem.apply_caps();
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_seed(mut self, seed: Seed) -> Result<Self> {
        for s in [&seed.f, &seed.g, &seed.pfp, &seed.pgp] {
            self.p.check_grid(s)?;
        }
        self.seed = Some(seed);
        Ok(self)
    }

    pub fn with_meta(mut self, meta: ProblemMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Number of pencil terms N.
    pub fn degree(&self) -> usize {
        self.terms.len()
    }

    /// Plain Sturm-Liouville problem: one term without derivative part.
    pub fn is_sturm_liouville(&self) -> bool {
        self.terms.len() == 1 && !self.terms[0].has_derivative_part()
    }

    pub fn has_derivative_terms(&self) -> bool {
        self.terms.iter().any(PencilTerm::has_derivative_part)
    }

    pub fn integrator(&self) -> Integrator {
        Integrator::new(self.grid.clone())
    }

    fn apply_caps(&mut self) {
        let cap = self.flags.endpoint_cap;
        self.p.apply_cap(cap);
        self.q.apply_cap(cap);
        for t in &mut self.terms {
            t.r.apply_cap(cap);
            t.s.apply_cap(cap);
        }
        let n = self.p.len();
        if self.p.at(0) == Complex64::new(0.0, 0.0) || self.p.at(n - 1) == Complex64::new(0.0, 0.0) {
            self.flags.p_vanishes_at_endpoints = true;
        }
    }

    pub fn validate(&self) -> Result<()> {
        {
            let f = &self.q;
            self.p.check_grid(f)?;
        }
        for t in &self.terms {
            self.p.check_grid(&t.r)?;
            self.p.check_grid(&t.s)?;
        }
        let p0 = self.p.at_x0();
        if p0 == Complex64::new(0.0, 0.0) || !p0.is_finite() {
            return Err(Error::Problem(format!("p(x0) = {p0} must be finite and nonzero")));
        }
        let named = [("p", &self.p), ("q", &self.q)];
        for (what, f) in named {
            if let Some(node) = f.first_non_finite() {
                return Err(Error::NonFinite { what, node });
            }
        }
        for t in &self.terms {
            if let Some(node) = t.r.first_non_finite() {
                return Err(Error::NonFinite { what: "r_k", node });
            }
            if let Some(node) = t.s.first_non_finite() {
                return Err(Error::NonFinite { what: "s_k", node });
            }
        }
        if self.terms.is_empty() {
            return Err(Error::Problem("a problem needs at least one pencil term".into()));
        }
        Ok(())
    }

    pub fn grid_kind(&self) -> GridKind {
        self.grid.kind()
    }
}

fn normalize_terms(grid: &Arc<Grid>, terms: Vec<PencilTerm>) -> Result<Vec<PencilTerm>> {
    let n = terms.iter().map(|t| t.k).max().unwrap_or(0);
    let mut slots: Vec<Option<PencilTerm>> = vec![None; n];
    for t in terms {
        if t.k == 0 {
            return Err(Error::Problem("pencil term powers start at k = 1".into()));
        }
        let slot = &mut slots[t.k - 1];
        if slot.is_some() {
            return Err(Error::Problem(format!("duplicate pencil term k = {}", t.k)));
        }
        *slot = Some(t);
    }
    Ok(slots
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            t.unwrap_or_else(|| PencilTerm {
                k: i + 1,
                r: SampledFunction::zeros(grid.clone()),
                s: SampledFunction::zeros(grid.clone()),
            })
        })
        .collect())
}
