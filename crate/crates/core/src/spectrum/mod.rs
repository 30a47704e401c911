//! Characteristic polynomials, root selection and the spectral-shift driver.

mod roots;

pub use roots::{aberth, RootSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::powers::{capped_div, PencilRecursion, SolutionBasis};
use crate::problem::{BoundaryCondition, ProblemFlags, SpectralProblem, Window};
use crate::quadrature::SampledFunction;
use crate::series::{assemble_streaming, darboux, shift_pencil, Keep, SeriesSolution, ShiftedPencil, SolutionValues};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative size of the last coefficients below which a polynomial is trusted.
pub const CHAR_TRUST_TOL: f64 = 1e-10;
/// Same for the series used to build particular solutions.
pub const BASIS_TRUST_TOL: f64 = 1e-14;
/// Number of highest-order coefficients treated as the truncation tail.
const TAIL_TERMS: usize = 5;
/// Intermediate centers allowed in one shift.
const MAX_HOPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Regular,
    Determinant,
    ZakharovShabat,
}

/// `Φ(λ) = Σ c_k (λ − λ₀)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicPolynomial {
    pub center: Complex64,
    pub coeffs: Vec<Complex64>,
    pub trust_radius: f64,
    pub provenance: Provenance,
    /// Rounding-error scale of each coefficient, when the construction
    /// involves known cancellation; empty otherwise.
    pub noise: Vec<f64>,
}

impl CharacteristicPolynomial {
    fn new(center: Complex64, coeffs: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Solver(format!("characteristic coefficient {k} is not finite")));
        }
        let norms: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
        let trust_radius = trust_radius(&norms, CHAR_TRUST_TOL);
        Ok(Self { center, coeffs, trust_radius, provenance, noise: Vec::new() })
    }

    /// Displacement of a root at `lam` caused by the coefficient noise,
    /// `Σ noise_k |λ−λ₀|^k / |Φ'(λ)|`; `None` without a noise model.
    pub fn root_error(&self, lam: Complex64) -> Option<f64> {
        if self.noise.is_empty() {
            return None;
        }
        let z = lam - self.center;
        let spread = self.noise.iter().rev().fold(0.0, |acc, e| acc * z.norm() + e);
        let (_, d) = poly::horner_with_derivative(&self.coeffs, z);
        Some(spread / d.norm())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, lam: Complex64) -> Complex64 {
        poly::horner(&self.coeffs, lam - self.center)
    }

    /// Newton correction `|Φ(λ)/Φ'(λ)|`: the distance to the nearest root estimated at λ.
    pub fn residual(&self, lam: Complex64) -> f64 {
        let (v, d) = poly::horner_with_derivative(&self.coeffs, lam - self.center);
        if v == ZERO {
            0.0
        } else {
            (v / d).norm()
        }
    }
}

/// Magnitude below which a coefficient is considered to have underflowed.
const UNDERFLOW_FLOOR: f64 = 1e-290;

/// Largest `r` with `max_{k in tail} a_k r^k ≤ tol · max_k a_k r^k`, where the
/// tail is the last few coefficients; infinite when the tail vanishes.
/// Trailing zeros that follow coefficients near the underflow threshold are
/// underflow, not an exact finite degree, and are dropped first.
pub fn trust_radius(norms: &[f64], tol: f64) -> f64 {
    let norms = match norms.iter().rposition(|&a| a > 0.0) {
        Some(j) if norms[j] < UNDERFLOW_FLOOR => &norms[..=j],
        _ => norms,
    };
    let n = norms.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let tail = TAIL_TERMS.min(n / 2).max(1);
    let logs: Vec<f64> = norms.iter().map(|a| a.ln()).collect();
    if logs[n - tail..].iter().all(|&l| l == f64::NEG_INFINITY) {
        return f64::INFINITY;
    }
    if logs[..n - tail].iter().all(|&l| l == f64::NEG_INFINITY) {
        return 0.0;
    }
    let excess = |t: f64| {
        let m = |range: std::ops::Range<usize>| {
            range.map(|k| logs[k] + k as f64 * t).fold(f64::NEG_INFINITY, f64::max)
        };
        m(n - tail..n) - m(0..n)
    };
    let lt = tol.ln();
    let (mut lo, mut hi) = (-60.0, 60.0);
    if excess(hi) <= lt {
        return f64::INFINITY;
    }
    if excess(lo) > lt {
        return 0.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= lt {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

/// Loss-of-accuracy factor when evaluating a series at `lam`: the largest
/// ratio `Σ|c_k||Λ|^k / max(1, |Σ c_k Λ^k|)` over the stored nodes and the
/// four solution families.
pub fn evaluation_condition(sol: &SeriesSolution, lam: Complex64) -> f64 {
    let z = lam - sol.center;
    let az = z.norm();
    let mut worst: f64 = 1.0;
    for fam in [&sol.u1, &sol.u2, &sol.pu1p, &sol.pu2p] {
        for row in fam {
            let total = row.iter().rev().fold(0.0, |acc, c| acc * az + c.norm());
            let value = poly::horner(row, z).norm();
            worst = worst.max(total / value.max(1.0));
        }
    }
    worst
}

/// Largest accuracy loss accepted when moving a basis to a new center.
pub const MAX_EVALUATION_CONDITION: f64 = 1e3;

/// The point on the segment from the series center toward `target` that is
/// farthest along while inside the trust radius and well conditioned.
pub fn step_toward(sol: &SeriesSolution, target: Complex64) -> Result<Complex64> {
    let gap = target - sol.center;
    let dist = gap.norm();
    if dist == 0.0 {
        return Ok(target);
    }
    let radius = series_trust_radius(sol, BASIS_TRUST_TOL);
    let mut r = if dist <= radius { dist } else { 0.9 * radius };
    for _ in 0..60 {
        let cand = if r == dist { target } else { sol.center + gap / dist * r };
        if evaluation_condition(sol, cand) <= MAX_EVALUATION_CONDITION {
            return Ok(cand);
        }
        r *= 0.5;
        if r <= 1e-12 * dist.max(1.0) {
            break;
        }
    }
    Err(Error::OutsideTrustRadius { distance: dist, radius })
}

/// Trust radius of a series from its stored coefficients away from the anchor.
pub fn series_trust_radius(sol: &SeriesSolution, tol: f64) -> f64 {
    let i0 = sol.grid().x0_index();
    let mut radius = f64::INFINITY;
    for fam in [&sol.u1, &sol.u2] {
        let mut norms = vec![0.0; sol.order + 1];
        for (s, &node) in sol.nodes().iter().enumerate() {
            if node == i0 {
                continue;
            }
            for (k, c) in fam[s].iter().enumerate() {
                norms[k] = f64::max(norms[k], c.norm());
            }
        }
        radius = radius.min(trust_radius(&norms, tol));
    }
    radius
}

fn boundary_form(
    sol: &SeriesSolution,
    node: usize,
    alpha: &[Complex64],
    beta: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let s = sol.slot(node).ok_or_else(|| Error::Solver(format!("series not kept at node {node}")))?;
    let form = |u: &[Complex64], pu: &[Complex64]| {
        let mut out = poly::convolve(alpha, u);
        if !poly::is_zero(beta) {
            out = poly::add(&out, &poly::convolve(beta, pu));
        }
        out
    };
    Ok((form(&sol.u1[s], &sol.pu1p[s]), form(&sol.u2[s], &sol.pu2p[s])))
}

/// Φ for an anchor at an endpoint: `u = β u₁ − (α + β p f'(x₀)) u₂` satisfies the
/// anchor-side condition, and Φ is the other condition applied to `u`.
pub fn characteristic_regular(sol: &SeriesSolution, problem: &SpectralProblem) -> Result<CharacteristicPolynomial> {
    let grid = sol.grid();
    let (i0, last) = (grid.x0_index(), grid.len() - 1);
    let (near, far, bc_near, bc_far) = if i0 == 0 {
        (0, last, &problem.bc_left, &problem.bc_right)
    } else if i0 == last {
        (last, 0, &problem.bc_right, &problem.bc_left)
    } else {
        return Err(Error::Solver("the regular characteristic function needs x0 at an endpoint".into()));
    };
    let pn = problem.p.at(near);
    if pn == ZERO || !pn.is_finite() {
        return Err(Error::Solver("p vanishes at the anchor endpoint".into()));
    }
    let (an, bn) = bc_near.recentered(sol.center);
    let (af, bf) = bc_far.recentered(sol.center);
    let s0 = sol.slot(near).ok_or_else(|| Error::Solver("series not kept at the anchor".into()))?;
    let pfp0 = sol.pu1p[s0][0];
    let c1 = bn.clone();
    let c2 = poly::scale(&poly::add(&an, &poly::scale(&bn, pfp0)), -ONE);
    let (b1, b2) = boundary_form(sol, far, &af, &bf)?;
    let mut coeffs = poly::convolve(&c2, &b2);
    if !poly::is_zero(&c1) {
        coeffs = poly::add(&coeffs, &poly::convolve(&c1, &b1));
    }
    CharacteristicPolynomial::new(sol.center, coeffs, Provenance::Regular)
}

/// Φ as the determinant of both boundary forms applied to `u₁`, `u₂`.
pub fn characteristic_determinant(sol: &SeriesSolution, problem: &SpectralProblem) -> Result<CharacteristicPolynomial> {
    let last = sol.grid().len() - 1;
    let (aa, ba) = problem.bc_left.recentered(sol.center);
    let (ab, bb) = problem.bc_right.recentered(sol.center);
    let (la1, la2) = boundary_form(sol, 0, &aa, &ba)?;
    let (lb1, lb2) = boundary_form(sol, last, &ab, &bb)?;
    let coeffs = poly::sub(&poly::convolve(&la1, &lb2), &poly::convolve(&la2, &lb1));
    CharacteristicPolynomial::new(sol.center, coeffs, Provenance::Determinant)
}

/// Zakharov-Shabat characteristic function from the Jost solution started at
/// `−a`: `c_n = (p u₂')_n(a)/p(a) + λ₀ u₂_n(a) + u₂_{n−1}(a)`.
pub fn characteristic_zs(sol: &SeriesSolution, problem: &SpectralProblem) -> Result<CharacteristicPolynomial> {
    let grid = sol.grid();
    if grid.x0_index() != 0 {
        return Err(Error::Solver("the Zakharov-Shabat characteristic function needs x0 = -a".into()));
    }
    let last = grid.len() - 1;
    let s = sol.slot(last).ok_or_else(|| Error::Solver("series not kept at the right end".into()))?;
    let pb = problem.p.at(last);
    let (u2, pu2) = (&sol.u2[s], &sol.pu2p[s]);
    let prev = |n: usize| if n > 0 { u2[n - 1] } else { ZERO };
    let mut coeffs: Vec<Complex64> = (0..u2.len()).map(|n| pu2[n] / pb + sol.center * u2[n] + prev(n)).collect();
    coeffs.push(u2[u2.len() - 1]);
    // The sum cancels down to the size of the potential at the right end, so
    // its rounding error follows the magnitude of the individual terms.
    let mut noise: Vec<f64> = (0..u2.len())
        .map(|n| f64::EPSILON * ((pu2[n] / pb).norm() + (sol.center * u2[n]).norm() + prev(n).norm()))
        .collect();
    noise.push(f64::EPSILON * u2[u2.len() - 1].norm());
    let mut poly = CharacteristicPolynomial::new(sol.center, coeffs, Provenance::ZakharovShabat)?;
    poly.noise = noise;
    Ok(poly)
}

/// Roots of Φ in λ, nearest to the center first, restricted to the trust
/// radius and the window. The flag reports whether the root finder converged.
pub fn roots_near_center(poly: &CharacteristicPolynomial, window: &Window) -> (Vec<Complex64>, bool) {
    let set = aberth(&poly.coeffs);
    let mut out: Vec<Complex64> = set
        .roots
        .iter()
        .filter(|z| z.is_finite() && z.norm() <= poly.trust_radius)
        .map(|z| poly.center + z)
        .filter(|&l| window.contains(l))
        .collect();
    out.sort_by(|a, b| (a - poly.center).norm().total_cmp(&(b - poly.center).norm()));
    (out, set.converged)
}

/// Imaginary-part tolerance for roots of self-adjoint problems: a fixed
/// relative part plus a part growing with the distance from the expansion
/// center, where the truncated polynomial is less accurate.
pub fn imag_tolerance(lam: Complex64, center: Complex64) -> f64 {
    1e-6 * (1.0 + lam.re.abs()) + 0.1 * (lam - center).norm()
}

/// Largest noise-induced root displacement, relative to `max(1, |λ|)`, for
/// a root to be considered genuine.
pub const ROOT_NOISE_TOL: f64 = 1e-8;

/// Wronskian defect a shifted basis may reach before it is rebuilt.
pub const WRONSKIAN_TOL: f64 = 1e-6;

/// Drops roots outside the trust radius, roots that coefficient noise could
/// move by more than [`ROOT_NOISE_TOL`], and, for self-adjoint problems, roots
/// whose imaginary part exceeds the tolerance (the boundary is kept).
pub fn filter_spurious(roots: &[Complex64], poly: &CharacteristicPolynomial, flags: &ProblemFlags) -> Vec<Complex64> {
    roots
        .iter()
        .copied()
        .filter(|l| (l - poly.center).norm() <= poly.trust_radius)
        .filter(|&l| poly.root_error(l).is_none_or(|e| e <= ROOT_NOISE_TOL * l.norm().max(1.0)))
        .filter(|&l| !flags.self_adjoint || l.im.abs() <= imag_tolerance(l, poly.center))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Zakharov-Shabat if applicable, else regular with an endpoint anchor, else determinant.
    #[default]
    Auto,
    Regular,
    Determinant,
    Darboux,
    Zs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Truncation order N.
    pub order: usize,
    pub count: usize,
    pub window: Option<Window>,
    pub strategy: Strategy,
    pub max_shifts: Option<usize>,
    /// Relative distance under which two eigenvalues are the same.
    pub dedup_tol: f64,
    /// Re-centering steps allowed per eigenvalue.
    pub refine: usize,
    /// Initial center.
    pub start: Complex64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            order: 100,
            count: 5,
            window: None,
            strategy: Strategy::Auto,
            max_shifts: None,
            dedup_tol: 1e-6,
            refine: 3,
            start: ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueEstimate {
    pub lam: Complex64,
    /// The eigenvalue in the problem's reporting convention.
    pub lam_reported: Complex64,
    pub center_used: Complex64,
    /// Newton correction `|Φ/Φ'|` at `lam` from the polynomial centered at `center_used`.
    pub residual: f64,
    pub index_hint: Option<i64>,
    pub outside_theorem_hypotheses: bool,
    /// A-priori estimate of the dropped series terms at the far endpoint.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub eigenvalues: Vec<EigenvalueEstimate>,
    /// Whether `count` eigenvalues were found.
    pub complete: bool,
    pub diagnostics: Vec<String>,
    pub shifts: usize,
}

/// One center of the spectral-shift iteration.
pub struct Stage {
    pub center: Complex64,
    pub basis: SolutionBasis,
    pub shifted: ShiftedPencil,
    pub series: SeriesSolution,
    pub poly: CharacteristicPolynomial,
}

/// Builds series, characteristic polynomials and particular solutions for a problem.
pub struct Engine<'p> {
    pub problem: &'p SpectralProblem,
    pub order: usize,
    pub strategy: Strategy,
}

impl<'p> Engine<'p> {
    pub fn new(problem: &'p SpectralProblem, order: usize, strategy: Strategy) -> Result<Self> {
        if order == 0 {
            return Err(Error::Solver("the truncation order must be at least 1".into()));
        }
        let grid = &problem.grid;
        let at_end = grid.x0_index() == 0 || grid.x0_index() == grid.len() - 1;
        let strategy = match strategy {
            Strategy::Auto if problem.zs.is_some() && grid.x0_index() == 0 => Strategy::Zs,
            Strategy::Auto => {
                let p0 = problem.p.at_x0();
                if at_end && p0 != ZERO && p0.is_finite() && !problem.flags.p_vanishes_at_endpoints {
                    Strategy::Regular
                } else {
                    Strategy::Determinant
                }
            }
            Strategy::Darboux if !problem.is_sturm_liouville() => {
                return Err(Error::Solver("the Darboux strategy needs a Sturm-Liouville problem".into()));
            }
            Strategy::Zs if problem.zs.is_none() => {
                return Err(Error::Solver("the problem is not a Zakharov-Shabat reduction".into()));
            }
            s => s,
        };
        Ok(Self { problem, order, strategy })
    }

    fn cap(&self) -> f64 {
        self.problem.flags.endpoint_cap
    }

    fn keep(&self) -> Keep {
        Keep::boundary(&self.problem.grid)
    }

    /// Basis of the shifted problem from solution values at its center:
    /// `f = u₁`, `g = u₁ + u₂` (complex combinations for the Darboux path,
    /// which needs nonvanishing solutions). For a Zakharov-Shabat reduction
    /// `f` is instead the solution whose first ZS component vanishes at the
    /// anchor: `u₁` alone carries a first component of size `λ₀ p(x0)`, which is
    /// huge where the potential has decayed and ruins the powers' scaling.
    pub fn basis_from_values(&self, vals: &SolutionValues, shifted: &ShiftedPencil) -> Result<SolutionBasis> {
        let (a, b) = if self.strategy == Strategy::Darboux {
            (Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0))
        } else if self.problem.zs.is_some() {
            let a = -vals.lam * self.problem.p.at(self.problem.grid.x0_index());
            (a, a + ONE)
        } else {
            (ZERO, ONE)
        };
        let comb = |u1: &SampledFunction, u2: &SampledFunction, c: Complex64| u1.zip_with(u2, |x, y| x + c * y);
        let pf = shifted.p_factor.clone();
        let quasi = |s: SampledFunction| s.mul(&pf);
        SolutionBasis::from_parts(
            comb(&vals.u1, &vals.u2, a)?,
            comb(&vals.u1, &vals.u2, b)?,
            quasi(comb(&vals.pu1p, &vals.pu2p, a)?)?,
            quasi(comb(&vals.pu1p, &vals.pu2p, b)?)?,
            &shifted.p_t,
            self.cap(),
        )
    }

    fn recursion<'b>(&self, basis: &'b SolutionBasis, shifted: &ShiftedPencil) -> Result<PencilRecursion<'b>> {
        PencilRecursion::from_terms(basis, &shifted.r_t, &shifted.s_t)
    }

    fn series(
        &self,
        center: Complex64,
        basis: &SolutionBasis,
        shifted: &ShiftedPencil,
        keep: &Keep,
        eval_at: &[Complex64],
    ) -> Result<(SeriesSolution, Vec<SolutionValues>)> {
        if self.strategy == Strategy::Darboux {
            let d = darboux(self.problem, basis, center)?;
            let out = d.series(self.order, keep, eval_at)?;
            return Ok((out.solution, out.values));
        }
        let rec = self.recursion(basis, shifted)?;
        let pf = (!shifted.trivial_factor()).then_some(&shifted.p_factor);
        let out = assemble_streaming(&rec, self.order, center, keep, eval_at, pf)?;
        Ok((out.solution, out.values))
    }

    pub fn characteristic(&self, sol: &SeriesSolution) -> Result<CharacteristicPolynomial> {
        match self.strategy {
            Strategy::Zs => characteristic_zs(sol, self.problem),
            Strategy::Regular => characteristic_regular(sol, self.problem),
            _ => characteristic_determinant(sol, self.problem),
        }
    }

    /// Series and characteristic polynomial at `center` with a basis of the
    /// problem shifted there.
    pub fn stage(&self, center: Complex64, basis: SolutionBasis) -> Result<Stage> {
        let shifted = shift_pencil(self.problem, center)?;
        let (series, _) = self.series(center, &basis, &shifted, &self.keep(), &[])?;
        let poly = self.characteristic(&series)?;
        Ok(Stage { center, basis, shifted, series, poly })
    }

    /// Solutions of the stage's series evaluated on the whole grid.
    pub fn values_at(&self, stage: &Stage, lam: Complex64) -> Result<SolutionValues> {
        let (_, mut vals) = self.series(stage.center, &stage.basis, &stage.shifted, &Keep::Nodes(Vec::new()), &[lam])?;
        Ok(vals.remove(0))
    }

    /// Stage at `target` built from the solutions of `stage`, hopping through
    /// intermediate centers when the target lies outside the series' trust radius.
    pub fn shift(&self, stage: &Stage, target: Complex64) -> Result<Stage> {
        let mut current: Option<Stage> = None;
        for _ in 0..MAX_HOPS {
            let from = current.as_ref().unwrap_or(stage);
            let next = step_toward(&from.series, target)?;
            let vals = self.values_at(from, next)?;
            let shifted = shift_pencil(self.problem, next)?;
            let basis = self.basis_from_values(&vals, &shifted)?;
            let st = self.stage(next, basis)?;
            if next == target {
                return Ok(st);
            }
            current = Some(st);
        }
        Err(Error::Solver(format!("too many intermediate centers on the way to {target}")))
    }

    /// Particular solutions at `lam0`: the problem's seed when `lam0 = 0`,
    /// otherwise an SPPS bootstrap from the trivial-coefficient equation.
    pub fn particular_solutions_at(&self, lam0: Complex64) -> Result<SolutionBasis> {
        let p = self.problem;
        if lam0 == ZERO {
            if let Some(seed) = &p.seed {
                return SolutionBasis::from_parts(
                    seed.f.clone(),
                    seed.g.clone(),
                    seed.pfp.clone(),
                    seed.pgp.clone(),
                    &p.p,
                    self.cap(),
                );
            }
        }
        bootstrap(p, lam0, self.order)
    }
}

/// Solutions of `(p̃u')' + q̃u = 0` at `lam0` via the series in μ of
/// `(p̃u')' = μ(−q̃)u` around the trivial basis `1`, `1 + ∫1/p̃`, continued
/// to μ = 1 in steps inside the series' trust radius.
pub fn bootstrap(problem: &SpectralProblem, lam0: Complex64, order: usize) -> Result<SolutionBasis> {
    let cap = problem.flags.endpoint_cap;
    let shifted = shift_pencil(problem, lam0)?;
    let grid = problem.grid.clone();
    let integ = problem.integrator();
    let inv_p = shifted.p_t.map(|v| capped_div(ONE, v, cap));
    let g0 = integ.integrate(&inv_p)?.map(|v| v + ONE);
    let mut basis = SolutionBasis::from_parts(
        SampledFunction::constant(grid.clone(), ONE),
        g0,
        SampledFunction::zeros(grid.clone()),
        SampledFunction::constant(grid.clone(), ONE),
        &shifted.p_t,
        cap,
    )?;
    let r = shifted.q_t.map(|v| -v);
    if r.is_identically_zero() {
        return Ok(basis);
    }
    let s = SampledFunction::zeros(grid.clone());
    let keep = Keep::boundary(&grid);
    let mut mu = 0.0;
    for _ in 0..1000 {
        let rec = PencilRecursion::from_terms(&basis, std::slice::from_ref(&r), std::slice::from_ref(&s))?;
        let out = assemble_streaming(&rec, order, mu.into(), &keep, &[], None)?;
        let next = step_toward(&out.solution, ONE)?.re;
        let vals = assemble_streaming(&rec, order, mu.into(), &Keep::Nodes(Vec::new()), &[next.into()], None)?
            .values
            .remove(0);
        basis = SolutionBasis::from_parts(
            vals.u1.clone(),
            vals.u1.add(&vals.u2)?,
            vals.pu1p.clone(),
            vals.pu1p.add(&vals.pu2p)?,
            &shifted.p_t,
            cap,
        )?;
        mu = next;
        if mu >= 1.0 {
            return Ok(basis);
        }
    }
    Err(Error::Solver("particular-solution bootstrap needed too many steps".into()))
}

fn same(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// Spectral-shift iteration: find the root nearest the current center,
/// re-center on it until it settles, accept it, and move on to the nearest
/// remembered candidate.
pub fn solve(problem: &SpectralProblem, config: &SolveConfig) -> Result<SolveReport> {
    if config.count == 0 {
        return Err(Error::Solver("count must be at least 1".into()));
    }
    let engine = Engine::new(problem, config.order, config.strategy)?;
    let window = config.window.or(problem.meta.window).unwrap_or(Window::ALL);
    let max_shifts = config.max_shifts.unwrap_or(8 * config.count + 20);
    // Zakharov-Shabat solutions grow like exp(±λx) away from Re λ = 0, and the
    // shifted basis loses about 1/|q(±a)| in relative accuracy, which the
    // cancelling characteristic function cannot afford: those roots are taken
    // from the expansion at the start center, screened by the noise test.
    let refine = if problem.zs.is_some() { 0 } else { config.refine + 1 };
    let mut diagnostics = Vec::new();
    let mut accepted: Vec<EigenvalueEstimate> = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut abandoned: Vec<Complex64> = Vec::new();
    let last = problem.grid.len() - 1;
    let far = if problem.grid.x0_index() == last { 0 } else { last };
    let estimate = |stage: &Stage, lam: Complex64| EigenvalueEstimate {
        lam,
        // Self-adjoint eigenvalues are real; the imaginary part left is rounding.
        lam_reported: match problem.zs {
            Some(z) => z.scale * lam,
            None if problem.flags.self_adjoint => Complex64::new(lam.re, 0.0),
            None => lam,
        },
        center_used: stage.center,
        residual: stage.poly.residual(lam),
        index_hint: None,
        outside_theorem_hypotheses: problem.flags.outside_theorem_hypotheses,
        tail_bound: stage.series.tail_bound(lam, far),
    };

    let basis = engine.particular_solutions_at(config.start)?;
    let mut stage = engine.stage(config.start, basis)?;
    let mut shifts = 1;
    // Singular endpoints leave a defect of their own; only growth beyond it counts.
    let defect_tol = WRONSKIAN_TOL.max(100.0 * stage.basis.wronskian_defect());
    let mut polishing = refine > 0;

    let collect = |stage: &Stage, candidates: &mut Vec<Candidate>, diagnostics: &mut Vec<String>| {
        let (roots, converged) = roots_near_center(&stage.poly, &window);
        if !converged {
            diagnostics.push(format!("root finder did not fully converge at center {}", stage.center));
        }
        let validated = !stage.poly.noise.is_empty();
        for r in filter_spurious(&roots, &stage.poly, &problem.flags) {
            let fresh = Candidate { estimate: estimate(stage, r), validated };
            match candidates.iter_mut().find(|c| same(c.lam(), r, 1e-3)) {
                Some(slot) => {
                    if (r - stage.center).norm() <= slot.distance() {
                        *slot = fresh;
                    }
                }
                None => candidates.push(fresh),
            }
        }
        roots
    };

    collect(&stage, &mut candidates, &mut diagnostics);
    let is_known = |r: Complex64, accepted: &[EigenvalueEstimate], abandoned: &[Complex64]| {
        accepted.iter().any(|e| same(e.lam, r, config.dedup_tol)) || abandoned.iter().any(|&a| same(a, r, 1e-3))
    };

    while accepted.len() < config.count && shifts < max_shifts {
        candidates.retain(|c| !is_known(c.lam(), &accepted, &abandoned));
        let center = stage.center;
        let Some(chosen) =
            candidates.iter().min_by(|a, b| (a.lam() - center).norm().total_cmp(&(b.lam() - center).norm())).cloned()
        else {
            diagnostics.push(format!("no further roots inside the trust radius (radius {:e} at center {center})", stage.poly.trust_radius));
            break;
        };
        let target = chosen.lam();
        // Re-center on the target until the nearest root settles.
        let mut goal = target;
        let mut settled = None;
        for _ in 0..refine {
            if shifts >= max_shifts {
                break;
            }
            // Eigenvalues of self-adjoint problems are real; so are their centers.
            let next = if problem.flags.self_adjoint { Complex64::new(goal.re, 0.0) } else { goal };
            // Chained shifts accumulate error; a degenerate basis is rebuilt afresh.
            let shifted = engine.shift(&stage, next).and_then(|s| {
                if s.basis.wronskian_defect() <= defect_tol {
                    return Ok(s);
                }
                let fresh = engine.stage(next, engine.particular_solutions_at(next)?)?;
                if fresh.basis.wronskian_defect() <= defect_tol {
                    Ok(fresh)
                } else {
                    Err(Error::LinearlyDependent)
                }
            });
            match shifted {
                Ok(s) => stage = s,
                Err(e) => {
                    diagnostics.push(format!("shift to {goal} failed: {e}"));
                    break;
                }
            }
            shifts += 1;
            let roots = collect(&stage, &mut candidates, &mut diagnostics);
            let Some(&nearest) =
                roots.iter().min_by(|a, b| (*a - goal).norm().total_cmp(&(*b - goal).norm()))
            else {
                break;
            };
            let moved = (nearest - goal).norm();
            if !same(nearest, target, 1e-2) && moved > 1e-2 * (target - center).norm().max(1e-8) {
                // The target was an artifact of the previous truncation.
                break;
            }
            if moved <= 1e-13 * nearest.norm().max(1.0) {
                settled = Some(nearest);
                break;
            }
            goal = nearest;
            settled = Some(nearest);
        }
        // Chained shifts leave a path-dependent error in the basis; a settled
        // root is re-found from particular solutions built afresh at its center.
        if let (Some(lam), true) = (settled, polishing) {
            match polish(&engine, &stage, lam, defect_tol, &window) {
                Polish::Replaced(fresh, root) => {
                    stage = *fresh;
                    settled = Some(root);
                }
                Polish::Kept => {}
                Polish::Unusable => polishing = false,
            }
        }
        match settled {
            Some(lam) if !is_known(lam, &accepted, &abandoned) => accepted.push(estimate(&stage, lam)),
            Some(_) => abandoned.push(target),
            // A root that already passed the noise test is kept as first seen.
            None if chosen.validated => {
                if refine > 0 {
                    diagnostics.push(format!("{target} kept from center {} without re-centering", chosen.estimate.center_used));
                }
                accepted.push(chosen.estimate);
            }
            None => abandoned.push(target),
        }
    }

    let complete = accepted.len() >= config.count;
    if !complete && shifts >= max_shifts {
        diagnostics.push(format!("stopped after {shifts} spectral shifts"));
    }
    let key = |e: &EigenvalueEstimate| e.lam_reported;
    accepted.sort_by(|a, b| key(a).re.total_cmp(&key(b).re).then(key(a).im.total_cmp(&key(b).im)));
    for (rank, e) in accepted.iter_mut().enumerate() {
        e.index_hint = Some(problem.meta.first_index + rank as i64);
    }
    Ok(SolveReport { eigenvalues: accepted, complete, diagnostics, shifts })
}

/// Outcome of re-finding a settled root from a freshly built basis.
enum Polish {
    Replaced(Box<Stage>, Complex64),
    Kept,
    /// A fresh basis is unsound for this problem; rebuilding is pointless.
    Unusable,
}

/// Rebuilds the basis at `stage.center` from scratch and returns the new stage
/// with its root nearest to `lam`. Only done when the chained basis has a
/// Wronskian defect well above the rebuilt one's, and the new root agrees
/// with `lam` to within what chained shifts can have lost.
fn polish(engine: &Engine<'_>, stage: &Stage, lam: Complex64, defect_tol: f64, window: &Window) -> Polish {
    let chained = stage.basis.wronskian_defect();
    if chained <= POLISH_FLOOR {
        return Polish::Kept;
    }
    let Ok(basis) = engine.particular_solutions_at(stage.center) else {
        return Polish::Unusable;
    };
    let defect = basis.wronskian_defect();
    if defect > defect_tol {
        return Polish::Unusable;
    }
    if chained <= POLISH_GAIN * defect {
        return Polish::Kept;
    }
    let Ok(fresh) = engine.stage(stage.center, basis) else {
        return Polish::Kept;
    };
    let (roots, _) = roots_near_center(&fresh.poly, window);
    match roots.into_iter().min_by(|a, b| (a - lam).norm().total_cmp(&(b - lam).norm())) {
        Some(root) if same(root, lam, POLISH_TOL) => Polish::Replaced(Box::new(fresh), root),
        _ => Polish::Kept,
    }
}

/// Largest relative change a fresh basis may make to a settled eigenvalue.
const POLISH_TOL: f64 = 1e-6;
/// Factor by which the chained basis' Wronskian defect must exceed a fresh
/// basis' before the fresh one replaces it.
const POLISH_GAIN: f64 = 10.0;
/// Wronskian defect below which a chained basis is kept without comparison.
const POLISH_FLOOR: f64 = 1e-12;

/// A root awaiting refinement, with its estimate from the stage that saw it
/// nearest to the center.
#[derive(Debug, Clone)]
struct Candidate {
    estimate: EigenvalueEstimate,
    /// Whether the root passed a coefficient-noise test.
    validated: bool,
}

impl Candidate {
    fn lam(&self) -> Complex64 {
        self.estimate.lam
    }

    fn distance(&self) -> f64 {
        (self.estimate.lam - self.estimate.center_used).norm()
    }
}

/// Boundary condition helper used by callers that build Φ by hand.
pub fn boundary_polynomials(bc: &BoundaryCondition, center: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    bc.recentered(center)
}
