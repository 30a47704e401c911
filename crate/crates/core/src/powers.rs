//! Formal powers: the one-solution recursion, the two-solution (modified)
//! recursion and its pencil generalization, plus their a-priori bounds.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{Grid, Integrator, SampledFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `a / b` with non-finite results replaced by `±cap` (and `0/0` by 0).
pub(crate) fn capped_div(a: Complex64, b: Complex64, cap: f64) -> Complex64 {
    if b == ZERO {
        if a == ZERO {
            ZERO
        } else {
            a / a.norm() * cap
        }
    } else {
        let v = a / b;
        if v.is_finite() {
            v
        } else {
            let dir = if a == ZERO { ONE } else { a / a.norm() };
            dir * cap
        }
    }
}

/// Two particular solutions `f`, `g` of the λ-free equation, normalized to
/// `f(x0) = g(x0) = 1`, with derivatives and quasi-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBasis {
    pub f: SampledFunction,
    pub g: SampledFunction,
    pub fp: SampledFunction,
    pub gp: SampledFunction,
    pub pfp: SampledFunction,
    pub pgp: SampledFunction,
    /// `1 / (p(x0) (g'(x0) - f'(x0)))`.
    pub rho: Complex64,
    /// `f'(x0)`.
    pub h: Complex64,
}

impl SolutionBasis {
    /// Builds a basis from samples of `f` and `g`, differentiating them with
    /// the grid's native rule.
    pub fn from_samples(f: &SampledFunction, g: &SampledFunction, p: &SampledFunction) -> Result<Self> {
        f.check_grid(g)?;
        f.check_grid(p)?;
        let integ = Integrator::new(f.grid().clone());
        let fp = integ.differentiate(f)?;
        let gp = integ.differentiate(g)?;
        let pfp = p.mul(&fp)?;
        let pgp = p.mul(&gp)?;
        Self::assemble(f.clone(), g.clone(), fp, gp, pfp, pgp, p)
    }

    /// Builds a basis from values and quasi-derivatives `p f'`, `p g'`.
    /// Plain derivatives are recovered by division, capped where `p` vanishes.
    pub fn from_parts(
        f: SampledFunction,
        g: SampledFunction,
        pfp: SampledFunction,
        pgp: SampledFunction,
        p: &SampledFunction,
        cap: f64,
    ) -> Result<Self> {
        for s in [&g, &pfp, &pgp, p] {
            f.check_grid(s)?;
        }
        let fp = pfp.zip_with(p, |a, b| capped_div(a, b, cap))?;
        let gp = pgp.zip_with(p, |a, b| capped_div(a, b, cap))?;
        Self::assemble(f, g, fp, gp, pfp, pgp, p)
    }

    fn assemble(
        f: SampledFunction,
        g: SampledFunction,
        fp: SampledFunction,
        gp: SampledFunction,
        pfp: SampledFunction,
        pgp: SampledFunction,
        p: &SampledFunction,
    ) -> Result<Self> {
        let i0 = f.grid().x0_index();
        let (f0, g0) = (f.at(i0), g.at(i0));
        if f0 == ZERO || !f0.is_finite() {
            return Err(Error::VanishingSolution(format!("f(x0) = {f0}")));
        }
        if g0 == ZERO || !g0.is_finite() {
            return Err(Error::VanishingSolution(format!("g(x0) = {g0}")));
        }
        let norm = |s: &SampledFunction, c: Complex64| s.map(|v| v / c);
        let mut f = norm(&f, f0);
        let mut g = norm(&g, g0);
        f.values_mut()[i0] = ONE;
        g.values_mut()[i0] = ONE;
        let (fp, pfp) = (norm(&fp, f0), norm(&pfp, f0));
        let (gp, pgp) = (norm(&gp, g0), norm(&pgp, g0));
        let p0 = p.at(i0);
        let diff = pgp.at(i0) - pfp.at(i0);
        let scale = pgp.at(i0).norm() + pfp.at(i0).norm() + p0.norm() * (gp.at(i0).norm() + fp.at(i0).norm());
        if diff.norm() <= 1e-13 * scale || diff == ZERO {
            return Err(Error::LinearlyDependent);
        }
        let rho = diff.inv();
        if !rho.is_finite() {
            return Err(Error::LinearlyDependent);
        }
        let h = fp.at(i0);
        Ok(Self { f, g, fp, gp, pfp, pgp, rho, h })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.f.grid()
    }

    /// `max |ρ·p(f g' - f' g) - 1|` over nodes where `p` is finite and nonzero.
    pub fn wronskian_defect(&self) -> f64 {
        (0..self.f.len())
            .map(|i| {
                let w = self.f.at(i) * self.pgp.at(i) - self.pfp.at(i) * self.g.at(i);
                (self.rho * w - ONE).norm()
            })
            .fold(0.0, f64::max)
    }

    /// The basis with `f` and `g` exchanged (ρ changes sign).
    pub fn swapped(&self) -> Self {
        Self {
            f: self.g.clone(),
            g: self.f.clone(),
            fp: self.gp.clone(),
            gp: self.fp.clone(),
            pfp: self.pgp.clone(),
            pgp: self.pfp.clone(),
            rho: -self.rho,
            h: self.gp.at(self.grid().x0_index()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerKind {
    /// `X⁽ⁿ⁾` in `f`, `X̃⁽ⁿ⁾` in `ftil`; optionally `Y⁽ⁿ⁾`, `Ỹ⁽ⁿ⁾` in `g`, `gtil`.
    Original,
    Modified,
    Pencil,
}

/// Formal powers for n = 0..=2N+1 at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    pub kind: PowerKind,
    /// Truncation order N: indices run to 2N+1.
    pub order: usize,
    pub rho: Complex64,
    pub f: Vec<SampledFunction>,
    pub g: Vec<SampledFunction>,
    pub ftil: Vec<SampledFunction>,
    pub gtil: Vec<SampledFunction>,
}

impl PowerTable {
    pub fn max_index(&self) -> usize {
        2 * self.order + 1
    }

    /// Writes `node x n family re im` rows for every entry.
    pub fn dump(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "node,x,n,family,re,im")?;
        let families: [(&str, &Vec<SampledFunction>); 4] =
            [("F", &self.f), ("G", &self.g), ("Ftil", &self.ftil), ("Gtil", &self.gtil)];
        for (name, fam) in families {
            for (n, s) in fam.iter().enumerate() {
                for (i, (x, v)) in s.grid().nodes().iter().zip(s.values()).enumerate() {
                    writeln!(out, "{i},{x:.17e},{n},{name},{:.17e},{:.17e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

fn product(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// One-solution recursion with weights `f² r` and `1/(f² p)`.
///
/// Non-finite weights at an endpoint are capped; elsewhere they are an error.
pub fn original_powers(
    f: &SampledFunction,
    p: &SampledFunction,
    r: &SampledFunction,
    order: usize,
    cap: f64,
) -> Result<PowerTable> {
    f.check_grid(p)?;
    f.check_grid(r)?;
    let (x, xt) = original_chain(f, p, r, order, cap)?;
    Ok(PowerTable {
        kind: PowerKind::Original,
        order,
        rho: ZERO,
        f: x,
        g: Vec::new(),
        ftil: xt,
        gtil: Vec::new(),
    })
}

/// Original powers for both solutions of a basis: `X` from `f`, `Y` from `g`.
pub fn original_powers_pair(
    basis: &SolutionBasis,
    p: &SampledFunction,
    r: &SampledFunction,
    order: usize,
    cap: f64,
) -> Result<PowerTable> {
    let (x, xt) = original_chain(&basis.f, p, r, order, cap)?;
    let (y, yt) = original_chain(&basis.g, p, r, order, cap)?;
    Ok(PowerTable { kind: PowerKind::Original, order, rho: basis.rho, f: x, g: y, ftil: xt, gtil: yt })
}

type Chain = (Vec<SampledFunction>, Vec<SampledFunction>);

fn original_chain(
    f: &SampledFunction,
    p: &SampledFunction,
    r: &SampledFunction,
    order: usize,
    cap: f64,
) -> Result<Chain> {
    let grid = f.grid().clone();
    let integ = Integrator::new(grid.clone());
    let last = grid.len() - 1;
    let f2r: Vec<Complex64> = f.values().iter().zip(r.values()).map(|(f, r)| f * f * r).collect();
    let mut inv = Vec::with_capacity(grid.len());
    for (i, (fv, pv)) in f.values().iter().zip(p.values()).enumerate() {
        let w = (fv * fv * pv).inv();
        if w.is_finite() {
            inv.push(w);
        } else if i == 0 || i == last {
            inv.push(capped_div(ONE, fv * fv * pv, cap));
        } else {
            return Err(Error::NonFinite { what: "1/(f²p)", node: i });
        }
    }
    let one = SampledFunction::constant(grid.clone(), ONE);
    let mut x = vec![one.clone()];
    let mut xt = vec![one];
    for n in 1..=2 * order + 1 {
        let (wx, wxt) = if n % 2 == 1 { (&inv, &f2r) } else { (&f2r, &inv) };
        let nx = integ.integrate_values(&product(x[n - 1].values(), wx))?;
        let nxt = integ.integrate_values(&product(xt[n - 1].values(), wxt))?;
        x.push(SampledFunction::new(grid.clone(), nx)?);
        xt.push(SampledFunction::new(grid.clone(), nxt)?);
    }
    Ok((x, xt))
}

/// Two-solution recursion for `(p u')' + q u = λ r u`.
pub fn modified_powers(basis: &SolutionBasis, r: &SampledFunction, order: usize) -> Result<PowerTable> {
    basis.f.check_grid(r)?;
    let grid = basis.grid().clone();
    let integ = Integrator::new(grid.clone());
    let rho = basis.rho;
    let fv = basis.f.values();
    let gv = basis.g.values();
    let fr = product(fv, r.values());
    let gr = product(gv, r.values());
    let wrap = |v: Vec<Complex64>| SampledFunction::new(grid.clone(), v);

    let mut ff = vec![SampledFunction::constant(grid.clone(), ONE)];
    let mut gg = vec![SampledFunction::constant(grid.clone(), ONE)];
    let mut ft = vec![basis.f.clone()];
    let mut gt = vec![basis.g.clone()];
    for n in 1..=2 * order + 1 {
        let (pf, pg, pft, pgt) = (ff[n - 1].values(), gg[n - 1].values(), ft[n - 1].values(), gt[n - 1].values());
        if n % 2 == 1 {
            let odd: Vec<Complex64> = (0..fv.len()).map(|i| rho * (gv[i] * pf[i] - fv[i] * pg[i])).collect();
            let nft = integ.integrate_values(&product(pft, &fr))?;
            let ngt = integ.integrate_values(&product(pgt, &gr))?;
            ff.push(wrap(odd.clone())?);
            gg.push(wrap(odd)?);
            ft.push(wrap(nft)?);
            gt.push(wrap(ngt)?);
        } else {
            let nf = integ.integrate_values(&product(pf, &fr))?;
            let ng = integ.integrate_values(&product(pg, &gr))?;
            let mix: Vec<Complex64> = (0..fv.len()).map(|i| rho * (fv[i] * pgt[i] - gv[i] * pft[i])).collect();
            let nft: Vec<Complex64> = (0..fv.len()).map(|i| fv[i] * ng[i] - mix[i]).collect();
            let ngt: Vec<Complex64> = (0..fv.len()).map(|i| gv[i] * nf[i] - mix[i]).collect();
            ff.push(wrap(nf)?);
            gg.push(wrap(ng)?);
            ft.push(wrap(nft)?);
            gt.push(wrap(ngt)?);
        }
    }
    Ok(PowerTable { kind: PowerKind::Modified, order, rho, f: ff, g: gg, ftil: ft, gtil: gt })
}

/// One level of the pencil recursion.
#[derive(Debug, Clone)]
pub struct Level {
    pub n: usize,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub ft: Vec<Complex64>,
    pub gt: Vec<Complex64>,
}

/// The most recent levels of a running recursion; older levels are dropped.
pub struct LevelWindow {
    slots: Vec<Option<Level>>,
}

impl LevelWindow {
    fn new(size: usize) -> Self {
        Self { slots: (0..size).map(|_| None).collect() }
    }

    fn push(&mut self, level: Level) {
        let k = level.n % self.slots.len();
        self.slots[k] = Some(level);
    }

    /// Level `n`; `None` for negative indices (which stand for zero).
    pub fn get(&self, n: isize) -> Option<&Level> {
        if n < 0 {
            return None;
        }
        let lvl = self.slots[n as usize % self.slots.len()].as_ref()?;
        debug_assert_eq!(lvl.n, n as usize, "level {n} fell out of the window");
        Some(lvl)
    }
}

/// Inputs of the differentiation-free pencil recursion.
pub struct PencilRecursion<'a> {
    integ: Integrator,
    basis: &'a SolutionBasis,
    /// `R_k[f]`, `R_k[g]` for k = 1..=N.
    rf: Vec<Vec<Complex64>>,
    rg: Vec<Vec<Complex64>>,
}

impl<'a> PencilRecursion<'a> {
    /// `rf[k-1] = R_k[f]`, `rg[k-1] = R_k[g]` sampled on the basis grid.
    pub fn new(basis: &'a SolutionBasis, rf: Vec<SampledFunction>, rg: Vec<SampledFunction>) -> Result<Self> {
        if rf.len() != rg.len() || rf.is_empty() {
            return Err(Error::Problem("pencil recursion needs R_k[f] and R_k[g] for every k".into()));
        }
        for s in rf.iter().chain(&rg) {
            basis.f.check_grid(s)?;
        }
        Ok(Self {
            integ: Integrator::new(basis.grid().clone()),
            basis,
            rf: rf.into_iter().map(SampledFunction::into_values).collect(),
            rg: rg.into_iter().map(SampledFunction::into_values).collect(),
        })
    }

    /// Samples `R_k[u] = r_k u + s_k u'` for u = f and u = g.
    pub fn from_terms(
        basis: &'a SolutionBasis,
        r: &[SampledFunction],
        s: &[SampledFunction],
    ) -> Result<Self> {
        let apply = |u: &SampledFunction, up: &SampledFunction, k: usize| -> Result<SampledFunction> {
            let ru = r[k].mul(u)?;
            if s[k].is_identically_zero() {
                Ok(ru)
            } else {
                ru.add(&s[k].mul(up)?)
            }
        };
        let n = r.len();
        let rf = (0..n).map(|k| apply(&basis.f, &basis.fp, k)).collect::<Result<Vec<_>>>()?;
        let rg = (0..n).map(|k| apply(&basis.g, &basis.gp, k)).collect::<Result<Vec<_>>>()?;
        Self::new(basis, rf, rg)
    }

    pub fn terms(&self) -> usize {
        self.rf.len()
    }

    pub fn basis(&self) -> &SolutionBasis {
        self.basis
    }

    /// Constants `c1 = |ρ|`, `c2 = max |R_k[f]|, |R_k[g]|`, `c3 = max |f|, |g|`.
    pub fn bound_constants(&self) -> BoundConstants {
        let maxabs = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let c2 = self.rf.iter().chain(&self.rg).map(|v| maxabs(v)).fold(0.0, f64::max);
        BoundConstants {
            c1: self.basis.rho.norm(),
            c2,
            c3: self.basis.f.max_abs().max(self.basis.g.max_abs()),
            terms: self.terms(),
        }
    }

    /// Runs the recursion for n = 0..=max_index, handing every level to `sink`
    /// together with the window of preceding levels.
    pub fn run(&self, max_index: usize, mut sink: impl FnMut(&Level, &LevelWindow) -> Result<()>) -> Result<()> {
        let nn = self.terms();
        let m = self.basis.f.len();
        let rho = self.basis.rho;
        let fv = self.basis.f.values();
        let gv = self.basis.g.values();
        let mut window = LevelWindow::new(2 * nn + 2);
        let mut acc = vec![ZERO; m];
        let mut acc2 = vec![ZERO; m];

        for n in 0..=max_index {
            let level = if n == 0 {
                Level { n, f: vec![ONE; m], g: vec![ONE; m], ft: fv.to_vec(), gt: gv.to_vec() }
            } else if n % 2 == 1 {
                let prev = window.get(n as isize - 1).expect("previous level");
                let odd: Vec<Complex64> = (0..m).map(|i| rho * (gv[i] * prev.f[i] - fv[i] * prev.g[i])).collect();
                // Σ_k R_k[f] G_{n-2k+1} + ρ(R_k[g] F̃_{n-2k} - R_k[f] G̃_{n-2k}), and the g-twin.
                acc.iter_mut().for_each(|v| *v = ZERO);
                acc2.iter_mut().for_each(|v| *v = ZERO);
                for k in 1..=nn {
                    let (rf, rg) = (&self.rf[k - 1], &self.rg[k - 1]);
                    let even = n as isize - 2 * k as isize + 1;
                    if let Some(e) = window.get(even) {
                        for i in 0..m {
                            acc[i] += rf[i] * e.g[i];
                            acc2[i] += rg[i] * e.f[i];
                        }
                    }
                    if let Some(o) = window.get(even - 1) {
                        for i in 0..m {
                            let mix = rho * (rg[i] * o.ft[i] - rf[i] * o.gt[i]);
                            acc[i] += mix;
                            acc2[i] += mix;
                        }
                    }
                }
                let wf: Vec<Complex64> = (0..m).map(|i| fv[i] * acc[i]).collect();
                let wg: Vec<Complex64> = (0..m).map(|i| gv[i] * acc2[i]).collect();
                Level {
                    n,
                    f: odd.clone(),
                    g: odd,
                    ft: self.integ.integrate_values(&wf)?,
                    gt: self.integ.integrate_values(&wg)?,
                }
            } else {
                // Σ_k R_k[g] F_{n-2k} - R_k[f] G_{n-2k}
                acc.iter_mut().for_each(|v| *v = ZERO);
                for k in 1..=nn {
                    if let Some(e) = window.get(n as isize - 2 * k as isize) {
                        let (rf, rg) = (&self.rf[k - 1], &self.rg[k - 1]);
                        for i in 0..m {
                            acc[i] += rg[i] * e.f[i] - rf[i] * e.g[i];
                        }
                    }
                }
                let wf: Vec<Complex64> = (0..m).map(|i| rho * fv[i] * acc[i]).collect();
                let wg: Vec<Complex64> = (0..m).map(|i| rho * gv[i] * acc[i]).collect();
                let nf = self.integ.integrate_values(&wf)?;
                let ng = self.integ.integrate_values(&wg)?;
                let prev = window.get(n as isize - 1).expect("previous level");
                let mix: Vec<Complex64> = (0..m).map(|i| rho * (fv[i] * prev.gt[i] - gv[i] * prev.ft[i])).collect();
                let ft = (0..m).map(|i| fv[i] * ng[i] - mix[i]).collect();
                let gt = (0..m).map(|i| gv[i] * nf[i] - mix[i]).collect();
                Level { n, f: nf, g: ng, ft, gt }
            };
            sink(&level, &window)?;
            window.push(level);
        }
        Ok(())
    }

    /// Full table of pencil powers up to index 2N+1.
    pub fn table(&self, order: usize) -> Result<PowerTable> {
        let grid = self.basis.grid().clone();
        let mut t = PowerTable {
            kind: PowerKind::Pencil,
            order,
            rho: self.basis.rho,
            f: Vec::new(),
            g: Vec::new(),
            ftil: Vec::new(),
            gtil: Vec::new(),
        };
        self.run(2 * order + 1, |lvl, _| {
            t.f.push(SampledFunction::new(grid.clone(), lvl.f.clone())?);
            t.g.push(SampledFunction::new(grid.clone(), lvl.g.clone())?);
            t.ftil.push(SampledFunction::new(grid.clone(), lvl.ft.clone())?);
            t.gtil.push(SampledFunction::new(grid.clone(), lvl.gt.clone())?);
            Ok(())
        })?;
        Ok(t)
    }
}

/// Pencil powers from precomputed `R_k[f]`, `R_k[g]`.
pub fn pencil_powers(
    basis: &SolutionBasis,
    rk_f: Vec<SampledFunction>,
    rk_g: Vec<SampledFunction>,
    order: usize,
) -> Result<PowerTable> {
    PencilRecursion::new(basis, rk_f, rk_g)?.table(order)
}

/// Constants of the a-priori estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Number of pencil terms N.
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `F_{2n}`, `G_{2n}`.
    EvenF,
    /// `F_{2n+1}`, `G_{2n+1}`.
    OddF,
    /// `F̃_{2n}`, `G̃_{2n}`.
    EvenFtil,
    /// `F̃_{2n+1}`, `G̃_{2n+1}`.
    OddFtil,
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Natural log of `C(n, x) = (1 + 2 c1 c2 c3 |x - x0|)^n / ⌊n/N⌋!`.
pub fn ln_growth(n: usize, c: &BoundConstants, dist: f64) -> f64 {
    n as f64 * (1.0 + 2.0 * c.c1 * c.c2 * c.c3 * dist).ln() - ln_factorial(n / c.terms.max(1))
}

/// Estimate for the family member with index `n` (meaning `2n` or `2n+1`)
/// at distance `dist = |x - x0|` from the anchor.
pub fn truncation_bound(family: Family, n: usize, c: &BoundConstants, dist: f64) -> f64 {
    ln_truncation_bound(family, n, c, dist).exp()
}

/// Natural log of [`truncation_bound`], safe from overflow.
pub fn ln_truncation_bound(family: Family, n: usize, c: &BoundConstants, dist: f64) -> f64 {
    match family {
        Family::EvenF => ln_growth(n, c, dist),
        Family::OddF => (2.0 * c.c1 * c.c3).ln() + ln_growth(n, c, dist),
        Family::EvenFtil => ((n + 1) as f64 * c.c3).ln() + ln_growth(n, c, dist),
        Family::OddFtil => ((n + 1) as f64 / (2.0 * c.c1)).ln() + ln_growth(n + 1, c, dist),
    }
}

/// Bound on `Σ_{n>order} |Λ|^n · bound(n)` for a series built from `family`.
pub fn tail_bound(family: Family, order: usize, c: &BoundConstants, dist: f64, lam_dist: f64) -> f64 {
    if lam_dist == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    let ln_l = lam_dist.ln();
    for n in order + 1..order + 100_000 {
        let term = (ln_truncation_bound(family, n, c, dist) + n as f64 * ln_l).exp();
        if !term.is_finite() {
            return f64::INFINITY;
        }
        total += term;
        if term < last && term <= 1e-17 * total {
            break;
        }
        last = term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, m: usize, x0: f64) -> Arc<Grid> {
        Grid::uniform(a, b, m, x0, &[]).unwrap().into_shared()
    }

    fn real(g: &Arc<Grid>, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction::from_real_fn(g.clone(), f)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn basis_example_rho_and_h() {
        let g = grid(0.0, 10.0, 1000, 0.0);
        let one = real(&g, |_| 1.0);
        let b = SolutionBasis::from_parts(real(&g, |x| 1.0 + x), one.clone(), one.clone(), real(&g, |_| 0.0), &one, 1e8)
            .unwrap();
        assert_eq!(b.rho, Complex64::new(-1.0, 0.0));
        assert_eq!(b.h, Complex64::new(1.0, 0.0));
        let b2 = SolutionBasis::from_samples(&real(&g, |x| 1.0 + x), &one, &one).unwrap();
        assert!((b2.rho + 1.0).norm() < 1e-12);
    }

    #[test]
    fn dependent_basis_rejected() {
        let g = grid(0.0, 1.0, 100, 0.0);
        let f = real(&g, |x| x.cos());
        let one = real(&g, |_| 1.0);
        assert!(matches!(SolutionBasis::from_samples(&f, &f, &one), Err(Error::LinearlyDependent)));
    }

    #[test]
    fn cos_sin_basis_wronskian() {
        let g = grid(0.0, 3.0, 600, 0.0);
        let one = real(&g, |_| 1.0);
        let b = SolutionBasis::from_samples(&real(&g, f64::cos), &real(&g, |x| x.cos() + x.sin()), &one).unwrap();
        assert!((b.rho - 1.0).norm() < 1e-10);
        assert!(b.wronskian_defect() < 1e-9);
    }

    #[test]
    fn original_powers_are_monomials() {
        let g = grid(0.0, 2.0, 200, 0.0);
        let one = real(&g, |_| 1.0);
        let t = original_powers(&one, &one, &one, 4, 1e8).unwrap();
        for n in 0..=9 {
            for (x, v) in g.nodes().iter().zip(t.f[n].values()) {
                let exact = x.powi(n as i32) / factorial(n);
                assert!((v.re - exact).abs() < 1e-12);
                assert!((t.ftil[n].values()[0]).norm() <= if n == 0 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn original_powers_exponential_f() {
        let g = grid(0.0, 1.0, 500, 0.0);
        let one = real(&g, |_| 1.0);
        let t = original_powers(&real(&g, f64::exp), &one, &one, 1, 1e8).unwrap();
        for (x, v) in g.nodes().iter().zip(t.f[1].values()) {
            assert!((v.re - (1.0 - (-2.0 * x).exp()) / 2.0).abs() < 1e-13);
        }
        let zero = real(&g, |_| 0.0);
        let t = original_powers(&real(&g, f64::exp), &one, &zero, 3, 1e8).unwrap();
        for k in 1..=3 {
            assert!(t.ftil[2 * k].is_identically_zero());
        }
    }

    #[test]
    fn modified_powers_example() {
        let c = 1.0;
        let g = grid(0.0, 10.0, 2000, 0.0);
        let one = real(&g, |_| 1.0);
        let basis =
            SolutionBasis::from_parts(real(&g, |x| 1.0 + c * x), one.clone(), real(&g, |_| c), real(&g, |_| 0.0), &one, 1e8)
                .unwrap();
        let t = modified_powers(&basis, &one, 6).unwrap();
        for n in 0..=13 {
            for (i, x) in g.nodes().iter().enumerate() {
                let gn = x.powi(n as i32) / factorial(n);
                let scale = gn.abs().max(1.0);
                assert!((t.g[n].at(i).re - gn).abs() < 1e-10 * scale, "G{n}");
                let fnv = if n % 2 == 1 {
                    gn
                } else {
                    x.powi(n as i32) * (n as f64 * (1.0 + c * x) + 1.0) / factorial(n + 1)
                };
                assert!((t.f[n].at(i).re - fnv).abs() < 1e-10 * fnv.abs().max(1.0), "F{n}");
            }
        }
        for (x, v) in g.nodes().iter().zip(t.f[2].values()) {
            assert!((v.re - x * x * (3.0 + 2.0 * x) / 6.0).abs() < 1e-11);
        }
    }

    #[test]
    fn pencil_reduces_to_modified() {
        let g = grid(0.0, 2.0, 400, 0.5);
        let p = real(&g, |x| 1.0 + 0.3 * x);
        let f = real(&g, |x| (0.7 * x).cos() + 0.2);
        let gg = real(&g, |x| 1.0 + (0.4 * x).sin());
        let basis = SolutionBasis::from_samples(&f, &gg, &p).unwrap();
        let r = real(&g, |x| -1.0 - 0.5 * x * x);
        let a = modified_powers(&basis, &r, 8).unwrap();
        let rec = PencilRecursion::from_terms(&basis, std::slice::from_ref(&r), &[real(&g, |_| 0.0)]).unwrap();
        let b = rec.table(8).unwrap();
        for n in 0..=17 {
            for fam in [(&a.f, &b.f), (&a.g, &b.g), (&a.ftil, &b.ftil), (&a.gtil, &b.gtil)] {
                for (u, v) in fam.0[n].values().iter().zip(fam.1[n].values()) {
                    assert!((u - v).norm() <= 1e-13 * u.norm().max(1.0), "n = {n}");
                }
            }
        }
    }

    #[test]
    fn zero_terms_kill_powers() {
        let g = grid(-1.0, 1.0, 100, -1.0);
        let one = real(&g, |_| 1.0);
        let basis = SolutionBasis::from_samples(&one, &real(&g, |x| 2.0 + x), &one).unwrap();
        let zero = real(&g, |_| 0.0);
        let t = pencil_powers(&basis, vec![zero.clone(), zero.clone()], vec![zero.clone(), zero], 3).unwrap();
        for n in 2..=7 {
            if n % 2 == 0 {
                assert!(t.f[n].is_identically_zero() && t.g[n].is_identically_zero());
            }
        }
    }

    #[test]
    fn bound_at_zero_is_one() {
        let c = BoundConstants { c1: 1.0, c2: 2.0, c3: 3.0, terms: 1 };
        assert_eq!(truncation_bound(Family::EvenF, 0, &c, 5.0), 1.0);
    }
}
