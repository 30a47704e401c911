//! Truncated SPPS solution series, spectral shifts of pencils and the
//! Darboux-associated construction.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;
use crate::powers::{capped_div, tail_bound, BoundConstants, Family, PencilRecursion, PowerTable, SolutionBasis};
use crate::problem::SpectralProblem;
use crate::quadrature::{Grid, Integrator, SampledFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Per-node coefficient arrays in powers of `λ - λ₀`.
pub type NodeCoefficients = Vec<Vec<Complex64>>;

/// Which nodes keep their full coefficient arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Keep {
    All,
    Nodes(Vec<usize>),
}

impl Keep {
    /// Both endpoints and the anchor.
    pub fn boundary(grid: &Grid) -> Self {
        let mut v = vec![0, grid.x0_index(), grid.len() - 1];
        v.sort_unstable();
        v.dedup();
        Keep::Nodes(v)
    }

    fn resolve(&self, len: usize) -> Result<Vec<usize>> {
        match self {
            Keep::All => Ok((0..len).collect()),
            Keep::Nodes(v) => {
                if let Some(&bad) = v.iter().find(|&&i| i >= len) {
                    return Err(Error::Grid(format!("node {bad} out of range")));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Coefficients of `(λ - λ₀)^k` for `u₁`, `u₂`, `p u₁'`, `p u₂'` at selected nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub center: Complex64,
    /// Truncation order N: coefficients k = 0..=N.
    pub order: usize,
    grid: Arc<Grid>,
    nodes: Vec<usize>,
    /// `u1[slot][k]`; slot indexes `nodes`.
    pub u1: Vec<Vec<Complex64>>,
    pub u2: Vec<Vec<Complex64>>,
    pub pu1p: Vec<Vec<Complex64>>,
    pub pu2p: Vec<Vec<Complex64>>,
    pub bounds: Option<BoundConstants>,
}

/// Values of both solutions and their quasi-derivatives at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionPoint {
    pub u1: Complex64,
    pub u2: Complex64,
    pub pu1p: Complex64,
    pub pu2p: Complex64,
}

/// Both solutions at a fixed λ on the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionValues {
    pub lam: Complex64,
    pub u1: SampledFunction,
    pub u2: SampledFunction,
    pub pu1p: SampledFunction,
    pub pu2p: SampledFunction,
}

/// Result of a streaming assembly: stored coefficients plus full-grid
/// evaluations at the requested λ values.
#[derive(Debug, Clone)]
pub struct SeriesOutput {
    pub solution: SeriesSolution,
    pub values: Vec<SolutionValues>,
}

impl SeriesSolution {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn slot(&self, node: usize) -> Option<usize> {
        self.nodes.binary_search(&node).ok().or_else(|| self.nodes.iter().position(|&n| n == node))
    }

    fn require(&self, node: usize) -> Result<usize> {
        self.slot(node).ok_or_else(|| Error::Grid(format!("series coefficients were not kept at node {node}")))
    }

    /// Horner evaluation at one node.
    pub fn evaluate(&self, lam: Complex64, node: usize) -> Result<SolutionPoint> {
        let s = self.require(node)?;
        let z = lam - self.center;
        Ok(SolutionPoint {
            u1: poly::horner(&self.u1[s], z),
            u2: poly::horner(&self.u2[s], z),
            pu1p: poly::horner(&self.pu1p[s], z),
            pu2p: poly::horner(&self.pu2p[s], z),
        })
    }

    /// Horner evaluation at every node (requires full storage).
    pub fn evaluate_all(&self, lam: Complex64) -> Result<SolutionValues> {
        if self.nodes.len() != self.grid.len() {
            return Err(Error::Grid("evaluation on the whole grid needs full coefficient storage".into()));
        }
        let z = lam - self.center;
        let fam = |c: &Vec<Vec<Complex64>>| {
            SampledFunction::new(self.grid.clone(), c.iter().map(|v| poly::horner(v, z)).collect())
        };
        Ok(SolutionValues { lam, u1: fam(&self.u1)?, u2: fam(&self.u2)?, pu1p: fam(&self.pu1p)?, pu2p: fam(&self.pu2p)? })
    }

    /// Estimate of the dropped terms at `node` for λ; infinite if unknown.
    pub fn tail_bound(&self, lam: Complex64, node: usize) -> f64 {
        let Some(c) = self.bounds else { return f64::INFINITY };
        let dist = (self.grid.nodes()[node] - self.grid.x0()).abs();
        let z = (lam - self.center).norm();
        tail_bound(Family::EvenFtil, self.order, &c, dist, z).max(tail_bound(Family::OddF, self.order, &c, dist, z))
    }

    /// Coefficients of `u₁'`, `u₂'` at the kept nodes; needs `p` bounded away from zero there.
    pub fn plain_derivatives(&self, p: &SampledFunction) -> Result<(NodeCoefficients, NodeCoefficients)> {
        let div = |c: &Vec<Vec<Complex64>>| -> Result<Vec<Vec<Complex64>>> {
            self.nodes
                .iter()
                .zip(c)
                .map(|(&i, row)| {
                    let pv = p.at(i);
                    if pv.norm() < 1e-300 || !pv.is_finite() {
                        return Err(Error::NonFinite { what: "1/p", node: i });
                    }
                    Ok(row.iter().map(|v| v / pv).collect())
                })
                .collect()
        };
        Ok((div(&self.pu1p)?, div(&self.pu2p)?))
    }
}

/// Collects series coefficients level by level.
struct Assembler<'a> {
    basis: &'a SolutionBasis,
    order: usize,
    nodes: Vec<usize>,
    /// `1/P` at every node when the quasi-derivatives need converting back.
    pinv: Option<Vec<Complex64>>,
    u1: Vec<Vec<Complex64>>,
    u2: Vec<Vec<Complex64>>,
    pu1p: Vec<Vec<Complex64>>,
    pu2p: Vec<Vec<Complex64>>,
    evals: Vec<(Complex64, Complex64, [Vec<Complex64>; 4])>,
}

impl<'a> Assembler<'a> {
    fn new(
        basis: &'a SolutionBasis,
        order: usize,
        center: Complex64,
        keep: &Keep,
        eval_at: &[Complex64],
        p_factor: Option<&SampledFunction>,
    ) -> Result<Self> {
        let m = basis.f.len();
        let nodes = keep.resolve(m)?;
        let pinv = p_factor.map(|p| p.values().iter().map(|v| v.inv()).collect());
        let count = nodes.len();
        let rows = || vec![Vec::with_capacity(order + 1); count];
        let evals = eval_at
            .iter()
            .map(|&lam| (lam - center, ONE, std::array::from_fn(|_| vec![ZERO; m])))
            .collect();
        Ok(Self { basis, order, nodes, pinv, u1: rows(), u2: rows(), pu1p: rows(), pu2p: rows(), evals })
    }

    /// Level `n` with F, G, F̃ and the previous level's F̃, G̃.
    fn consume(
        &mut self,
        n: usize,
        f: &[Complex64],
        g: &[Complex64],
        ft: &[Complex64],
        prev: Option<(&[Complex64], &[Complex64])>,
    ) {
        let b = self.basis;
        let rho = b.rho;
        let (pfp, pgp) = (b.pfp.values(), b.pgp.values());
        let scale = |i: usize| self.pinv.as_ref().map_or(ONE, |v| v[i]);
        if n.is_multiple_of(2) {
            let pu2 = |i: usize| rho * (pgp[i] * f[i] - pfp[i] * g[i]) * scale(i);
            let pu1 = |i: usize| {
                let mix = prev.map_or(ZERO, |(pft, pgt)| rho * (pfp[i] * pgt[i] - pgp[i] * pft[i]));
                (pfp[i] * g[i] - mix) * scale(i)
            };
            for (s, &i) in self.nodes.iter().enumerate() {
                self.u1[s].push(ft[i]);
                self.pu1p[s].push(pu1(i));
                self.pu2p[s].push(pu2(i));
            }
            for (_, pw, acc) in &mut self.evals {
                for i in 0..f.len() {
                    acc[0][i] += *pw * ft[i];
                    acc[2][i] += *pw * pu1(i);
                    acc[3][i] += *pw * pu2(i);
                }
            }
        } else {
            for (s, &i) in self.nodes.iter().enumerate() {
                self.u2[s].push(f[i]);
            }
            for (z, pw, acc) in &mut self.evals {
                for i in 0..f.len() {
                    acc[1][i] += *pw * f[i];
                }
                *pw *= *z;
            }
        }
    }

    fn finish(self, center: Complex64, bounds: Option<BoundConstants>) -> Result<SeriesOutput> {
        let grid = self.basis.grid().clone();
        let values = self
            .evals
            .into_iter()
            .map(|(z, _, [u1, u2, pu1p, pu2p])| {
                Ok(SolutionValues {
                    lam: center + z,
                    u1: SampledFunction::new(grid.clone(), u1)?,
                    u2: SampledFunction::new(grid.clone(), u2)?,
                    pu1p: SampledFunction::new(grid.clone(), pu1p)?,
                    pu2p: SampledFunction::new(grid.clone(), pu2p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesOutput {
            solution: SeriesSolution {
                center,
                order: self.order,
                grid,
                nodes: self.nodes,
                u1: self.u1,
                u2: self.u2,
                pu1p: self.pu1p,
                pu2p: self.pu2p,
                bounds,
            },
            values,
        })
    }
}

/// Series with full per-node storage from a finished modified or pencil table.
pub fn assemble(table: &PowerTable, basis: &SolutionBasis, center: Complex64) -> Result<SeriesSolution> {
    let levels = table.max_index() + 1;
    if [&table.f, &table.g, &table.ftil, &table.gtil].iter().any(|fam| fam.len() < levels) {
        return Err(Error::Problem("power table lacks some families or levels".into()));
    }
    let mut asm = Assembler::new(basis, table.order, center, &Keep::All, &[], None)?;
    for n in 0..levels {
        let prev = (n > 0).then(|| (table.ftil[n - 1].values(), table.gtil[n - 1].values()));
        asm.consume(n, table.f[n].values(), table.g[n].values(), table.ftil[n].values(), prev);
    }
    Ok(asm.finish(center, None)?.solution)
}

/// Runs a pencil recursion and assembles its series without keeping the
/// whole table. `p_factor` converts shifted quasi-derivatives back to `p u'`.
pub fn assemble_streaming(
    recursion: &PencilRecursion<'_>,
    order: usize,
    center: Complex64,
    keep: &Keep,
    eval_at: &[Complex64],
    p_factor: Option<&SampledFunction>,
) -> Result<SeriesOutput> {
    let mut asm = Assembler::new(recursion.basis(), order, center, keep, eval_at, p_factor)?;
    recursion.run(2 * order + 1, |lvl, win| {
        let prev = win.get(lvl.n as isize - 1).map(|p| (p.ft.as_slice(), p.gt.as_slice()));
        asm.consume(lvl.n, &lvl.f, &lvl.g, &lvl.ft, prev);
        Ok(())
    })?;
    asm.finish(center, Some(recursion.bound_constants()))
}

/// Pencil coefficients after the substitution `λ = λ₀ + Λ`, multiplied by `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPencil {
    pub center: Complex64,
    pub p_factor: SampledFunction,
    pub p_t: SampledFunction,
    pub q_t: SampledFunction,
    /// `r̃_k`, `s̃_k` for k = 1..=N.
    pub r_t: Vec<SampledFunction>,
    pub s_t: Vec<SampledFunction>,
}

impl ShiftedPencil {
    /// Whether `P ≡ 1` (no derivative terms contribute at this center).
    pub fn trivial_factor(&self) -> bool {
        self.p_factor.values().iter().all(|&v| v == ONE)
    }
}

/// Re-centers a pencil at `lam0`.
pub fn shift_pencil(problem: &SpectralProblem, lam0: Complex64) -> Result<ShiftedPencil> {
    let grid = problem.grid.clone();
    let nt = problem.degree();
    let r: Vec<&SampledFunction> = problem.terms.iter().map(|t| &t.r).collect();
    let s: Vec<&SampledFunction> = problem.terms.iter().map(|t| &t.s).collect();
    // σ = Σ_k λ₀^k s_k, and Σ_k λ₀^k r_k
    let weighted = |fam: &[&SampledFunction]| -> Vec<Complex64> {
        let mut acc = vec![ZERO; grid.len()];
        let mut pw = ONE;
        for f in fam {
            pw *= lam0;
            if pw != ZERO {
                for (a, v) in acc.iter_mut().zip(f.values()) {
                    *a += pw * v;
                }
            }
        }
        acc
    };
    let sigma = weighted(&s);
    let p_factor = if sigma.iter().all(|&v| v == ZERO) {
        SampledFunction::constant(grid.clone(), ONE)
    } else {
        let cap = problem.flags.endpoint_cap;
        let integrand: Vec<Complex64> =
            sigma.iter().zip(problem.p.values()).map(|(&sv, &pv)| -capped_div(sv, pv, cap)).collect();
        let e = Integrator::new(grid.clone()).integrate_values(&integrand)?;
        let vals: Vec<Complex64> = e.iter().map(|v| v.exp()).collect();
        if let Some(node) = vals.iter().position(|v| !v.is_finite() || *v == ZERO) {
            return Err(Error::NonFinite { what: "shift factor P", node });
        }
        SampledFunction::new(grid.clone(), vals)?
    };
    let pf = p_factor.values();
    let rsum = weighted(&r);
    let q_t = SampledFunction::new(
        grid.clone(),
        (0..grid.len()).map(|i| pf[i] * (problem.q.at(i) - rsum[i])).collect(),
    )?;
    let p_t = problem.p.mul(&p_factor)?;
    let transform = |fam: &[&SampledFunction]| -> Result<Vec<SampledFunction>> {
        (1..=nt)
            .map(|k| {
                let mut acc = vec![ZERO; grid.len()];
                let mut pw = ONE;
                for l in 0..=nt - k {
                    let w = pw * poly::binomial((k + l) as u64, l as u64);
                    if w != ZERO {
                        for (a, v) in acc.iter_mut().zip(fam[k + l - 1].values()) {
                            *a += w * v;
                        }
                    }
                    pw *= lam0;
                }
                SampledFunction::new(grid.clone(), acc.iter().zip(pf).map(|(a, p)| a * p).collect())
            })
            .collect()
    };
    Ok(ShiftedPencil { center: lam0, r_t: transform(&r)?, s_t: transform(&s)?, p_factor, p_t, q_t })
}

/// One Darboux-associated problem `((1/r) v')' + q_v v = λ (1/p) v` with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociatedProblem {
    pub p: SampledFunction,
    pub q: SampledFunction,
    pub r: SampledFunction,
    pub basis: SolutionBasis,
}

/// Both associated problems of a Sturm-Liouville equation at a center, and the
/// original basis needed to map their solutions back.
#[derive(Debug, Clone)]
pub struct Darboux {
    pub center: Complex64,
    pub v: AssociatedProblem,
    pub w: AssociatedProblem,
    original: SolutionBasis,
    /// `p r` of the original problem, capped.
    pr: Vec<Complex64>,
}

fn associated(
    integ: &Integrator,
    u: &SampledFunction,
    pup: &SampledFunction,
    p: &SampledFunction,
    q: &SampledFunction,
    r: &SampledFunction,
    cap: f64,
) -> Result<AssociatedProblem> {
    let grid = u.grid().clone();
    let m = grid.len();
    if let Some(node) = u.values().iter().position(|v| *v == ZERO || !v.is_finite()) {
        return Err(Error::VanishingSolution(format!("Darboux construction needs a nonvanishing solution (node {node})")));
    }
    let inv = |a: &SampledFunction| a.map(|v| capped_div(ONE, v, cap));
    // B = 1/(p r u²); the associated solutions are φ = 1/u and ψ = φ (1 + ∫ u² r).
    let b = SampledFunction::new(
        grid.clone(),
        (0..m).map(|i| capped_div(ONE, p.at(i) * r.at(i) * u.at(i) * u.at(i), cap)).collect(),
    )?;
    let bp = integ.differentiate(&b)?;
    let qv = SampledFunction::new(
        grid.clone(),
        (0..m).map(|i| u.at(i) * (-q.at(i) * u.at(i) * b.at(i) + pup.at(i) * bp.at(i))).collect(),
    )?;
    let phi = inv(u);
    let pphi = pup.mul(&b)?.scale(-ONE);
    let int = integ.integrate_values(&(0..m).map(|i| u.at(i) * u.at(i) * r.at(i)).collect::<Vec<_>>())?;
    let psi = SampledFunction::new(grid.clone(), (0..m).map(|i| phi.at(i) * (ONE + int[i])).collect())?;
    let ppsi = SampledFunction::new(grid.clone(), (0..m).map(|i| pphi.at(i) * (ONE + int[i]) + u.at(i)).collect())?;
    let pv = inv(r);
    let basis = SolutionBasis::from_parts(phi, psi, pphi, ppsi, &pv, cap)?;
    Ok(AssociatedProblem { p: pv, q: qv, r: inv(p), basis })
}

/// Builds the Darboux-associated problems of a Sturm-Liouville problem
/// shifted to `center` (potential `q - center·r`), given a basis with
/// nonvanishing `f`, `g` at that center.
pub fn darboux(problem: &SpectralProblem, basis: &SolutionBasis, center: Complex64) -> Result<Darboux> {
    if !problem.is_sturm_liouville() {
        return Err(Error::Problem("the Darboux construction needs a Sturm-Liouville problem".into()));
    }
    let cap = problem.flags.endpoint_cap;
    let r = &problem.terms[0].r;
    let q = problem.q.zip_with(r, |q, r| q - center * r)?;
    let integ = problem.integrator();
    let v = associated(&integ, &basis.f, &basis.pfp, &problem.p, &q, r, cap)?;
    let w = associated(&integ, &basis.g, &basis.pgp, &problem.p, &q, r, cap)?;
    let pr = problem
        .p
        .values()
        .iter()
        .zip(r.values())
        .map(|(p, r)| {
            let v = p * r;
            if v.is_finite() { v } else { capped_div(ONE, ONE / v, cap) }
        })
        .collect();
    Ok(Darboux { center, v, w, original: basis.clone(), pr })
}

impl Darboux {
    /// Series solutions of the original problem reconstructed from the
    /// associated ones: `u₁ = fg(w₁ − Λρ(w₂ − v₂))`, `u₂ = ρfg(v₁ − w₁)`.
    pub fn series(&self, order: usize, keep: &Keep, eval_at: &[Complex64]) -> Result<SeriesOutput> {
        let run = |a: &AssociatedProblem| -> Result<SeriesOutput> {
            let rec = PencilRecursion::from_terms(
                &a.basis,
                std::slice::from_ref(&a.r),
                &[SampledFunction::zeros(a.r.grid().clone())],
            )?;
            assemble_streaming(&rec, order, self.center, keep, eval_at, None)
        };
        let vs = run(&self.v)?;
        let ws = run(&self.w)?;
        let b = &self.original;
        let rho = b.rho;
        let grid = b.grid().clone();
        let nodes = vs.solution.nodes.clone();
        let fg = |i: usize| b.f.at(i) * b.g.at(i);
        let dfg = |i: usize| b.pfp.at(i) * b.g.at(i) + b.f.at(i) * b.pgp.at(i);

        let (v, w) = (&vs.solution, &ws.solution);
        let mut sol = SeriesSolution {
            center: self.center,
            order,
            grid: grid.clone(),
            nodes: nodes.clone(),
            u1: Vec::with_capacity(nodes.len()),
            u2: Vec::with_capacity(nodes.len()),
            pu1p: Vec::with_capacity(nodes.len()),
            pu2p: Vec::with_capacity(nodes.len()),
            bounds: None,
        };
        for (s, &i) in nodes.iter().enumerate() {
            let (mut u1, mut u2, mut pu1, mut pu2) = (vec![], vec![], vec![], vec![]);
            for k in 0..=order {
                let lag = |c: &Vec<Vec<Complex64>>| if k == 0 { ZERO } else { c[s][k - 1] };
                let d = v.u1[s][k] - w.u1[s][k];
                let dp = v.pu1p[s][k] - w.pu1p[s][k];
                let e = w.u1[s][k] - rho * (lag(&w.u2) - lag(&v.u2));
                let ep = w.pu1p[s][k] - rho * (lag(&w.pu2p) - lag(&v.pu2p));
                u2.push(rho * fg(i) * d);
                pu2.push(rho * (dfg(i) * d + fg(i) * self.pr[i] * dp));
                u1.push(fg(i) * e);
                pu1.push(dfg(i) * e + fg(i) * self.pr[i] * ep);
            }
            sol.u1.push(u1);
            sol.u2.push(u2);
            sol.pu1p.push(pu1);
            sol.pu2p.push(pu2);
        }
        let values = vs
            .values
            .iter()
            .zip(&ws.values)
            .map(|(vv, wv)| {
                let z = vv.lam - self.center;
                let m = grid.len();
                let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| Vec::with_capacity(m));
                for i in 0..m {
                    let d = vv.u1.at(i) - wv.u1.at(i);
                    let dp = vv.pu1p.at(i) - wv.pu1p.at(i);
                    let e = wv.u1.at(i) - z * rho * (wv.u2.at(i) - vv.u2.at(i));
                    let ep = wv.pu1p.at(i) - z * rho * (wv.pu2p.at(i) - vv.pu2p.at(i));
                    out[0].push(fg(i) * e);
                    out[1].push(rho * fg(i) * d);
                    out[2].push(dfg(i) * e + fg(i) * self.pr[i] * ep);
                    out[3].push(rho * (dfg(i) * d + fg(i) * self.pr[i] * dp));
                }
                let [u1, u2, pu1p, pu2p] = out;
                Ok(SolutionValues {
                    lam: vv.lam,
                    u1: SampledFunction::new(grid.clone(), u1)?,
                    u2: SampledFunction::new(grid.clone(), u2)?,
                    pu1p: SampledFunction::new(grid.clone(), pu1p)?,
                    pu2p: SampledFunction::new(grid.clone(), pu2p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesOutput { solution: sol, values })
    }
}
