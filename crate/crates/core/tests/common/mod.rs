//! Randomized smooth Sturm-Liouville problems and the pointwise identities
//! their formal powers must satisfy. Shared by the property tests and the
//! acceptance run.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spps::powers::{
    modified_powers, original_powers_pair, truncation_bound, Family, PencilRecursion, PowerTable, SolutionBasis,
};
use spps::problem::{load_problem, SpectralProblem};
use spps::quadrature::SampledFunction;
use spps::series::assemble;
use spps::spectrum::bootstrap;

pub const POINTWISE_TOL: f64 = 1e-9;
pub const SECOND_DERIVATIVE_TOL: f64 = 1e-6;
pub const ORDER: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A random problem together with its λ = 0 basis and powers.
pub struct Case {
    pub label: String,
    pub document: String,
    pub problem: SpectralProblem,
    pub basis: SolutionBasis,
    pub r: SampledFunction,
    pub modified: PowerTable,
    pub original: PowerTable,
}

/// `(p u')' + q u = λ r u` on `[0, 1]` with
/// `p = 1 + a sin(w x + φ)`, `q = b cos(v x)`, `r = 1 + c cos(t x + ψ)`.
pub fn random_document(rng: &mut StdRng, label: &str) -> String {
    let a = rng.gen_range(-0.35..0.35);
    let w = rng.gen_range(0.5..3.0);
    let phi = rng.gen_range(0.0..6.0);
    let b = rng.gen_range(-1.0..1.0);
    let v = rng.gen_range(0.5..3.0);
    let c = rng.gen_range(-0.4..0.4);
    let t = rng.gen_range(0.5..3.0);
    let psi = rng.gen_range(0.0..6.0);
    let x0 = [0.0, 0.1, 0.2, 0.25][rng.gen_range(0..4)];
    format!(
        r#"name = "{label}"
[interval]
a = 0
b = 1
[grid]
M = 400
x0 = {x0}
[coefficients]
p = "1 + {a:.6} * sin({w:.6} * x + {phi:.6})"
q = "{b:.6} * cos({v:.6} * x)"
[[terms]]
k = 1
r = "1 + {c:.6} * cos({t:.6} * x + {psi:.6})"
[bc_left]
alpha = ["1"]
beta = ["0"]
[bc_right]
alpha = ["1"]
beta = ["0"]
"#
    )
}

pub fn random_cases(count: usize, seed: u64) -> Vec<Case> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let label = format!("random-{seed}-{i}");
            build_case(&label, random_document(&mut rng, &label))
        })
        .collect()
}

pub fn build_case(label: &str, document: String) -> Case {
    let problem = load_problem(&document).unwrap_or_else(|e| panic!("{label}: {e}"));
    let basis = bootstrap(&problem, ZERO, 40).unwrap_or_else(|e| panic!("{label}: {e}"));
    let r = problem.terms[0].r.clone();
    let modified = modified_powers(&basis, &r, ORDER).unwrap();
    let original = original_powers_pair(&basis, &problem.p, &r, ORDER, problem.flags.endpoint_cap).unwrap();
    Case { label: label.to_string(), document, problem, basis, r, modified, original }
}

fn max_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.sub(b).unwrap().max_abs()
}

fn interior(f: &SampledFunction, margin: usize) -> f64 {
    let v = f.values();
    v[margin..v.len() - margin].iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest pointwise violation of the relations linking the powers of `f`
/// and `g` (X, X̃ from f; Y, Ỹ from g).
pub fn pair_relations(c: &Case) -> f64 {
    let o = &c.original;
    let (f, g, rho) = (&c.basis.f, &c.basis.g, o.rho);
    let mut worst = 0.0f64;
    for k in 0..ORDER {
        let lhs = g.mul(&o.g[2 * k + 1]).unwrap();
        let r1a = f.mul(&o.f[2 * k + 1]).unwrap();
        let r1b = g.mul(&o.gtil[2 * k]).unwrap().sub(&f.mul(&o.ftil[2 * k]).unwrap()).unwrap().scale(rho);
        let r2 = g.mul(&o.f[2 * k]).unwrap().sub(&f.mul(&o.g[2 * k]).unwrap()).unwrap().scale(rho);
        worst = worst.max(max_diff(&lhs, &r1a)).max(max_diff(&lhs, &r1b)).max(max_diff(&lhs, &r2));
        if k >= 1 {
            let mix = g
                .mul(&o.ftil[2 * k - 1])
                .unwrap()
                .sub(&f.mul(&o.gtil[2 * k - 1]).unwrap())
                .unwrap()
                .scale(rho);
            let r3 = g.mul(&o.f[2 * k]).unwrap().add(&mix).unwrap();
            let r4 = f.mul(&o.g[2 * k]).unwrap().add(&mix).unwrap();
            worst = worst.max(max_diff(&g.mul(&o.gtil[2 * k]).unwrap(), &r3));
            worst = worst.max(max_diff(&f.mul(&o.ftil[2 * k]).unwrap(), &r4));
        }
    }
    worst
}

/// `F_{2n+1} = G_{2n+1} = ρ(G̃_{2n} − F̃_{2n})`.
pub fn odd_identity(c: &Case) -> f64 {
    let m = &c.modified;
    (0..=ORDER)
        .map(|n| {
            let rhs = m.gtil[2 * n].sub(&m.ftil[2 * n]).unwrap().scale(m.rho);
            max_diff(&m.f[2 * n + 1], &rhs).max(max_diff(&m.g[2 * n + 1], &rhs))
        })
        .fold(0.0, f64::max)
}

/// New powers against old ones: odd n gives `F_n = f X⁽ⁿ⁾`, `F̃_n = X̃⁽ⁿ⁾`;
/// even n gives `F_n = X⁽ⁿ⁾`, `F̃_n = f X̃⁽ⁿ⁾` (and the same with g, Y).
pub fn old_new_equivalence(c: &Case) -> f64 {
    let (m, o) = (&c.modified, &c.original);
    let mut worst = 0.0f64;
    for n in 0..=2 * ORDER + 1 {
        for (new, newt, old, oldt, u) in
            [(&m.f, &m.ftil, &o.f, &o.ftil, &c.basis.f), (&m.g, &m.gtil, &o.g, &o.gtil, &c.basis.g)]
        {
            let (a, b) = if n % 2 == 1 {
                (u.mul(&old[n]).unwrap(), oldt[n].clone())
            } else {
                (old[n].clone(), u.mul(&oldt[n]).unwrap())
            };
            worst = worst.max(max_diff(&new[n], &a)).max(max_diff(&newt[n], &b));
        }
    }
    worst
}

/// Every power with n ≥ 1 vanishes exactly at the anchor.
pub fn anchor_zeros(c: &Case) -> f64 {
    let m = &c.modified;
    (1..=2 * ORDER + 1)
        .flat_map(|n| [m.f[n].at_x0(), m.g[n].at_x0()])
        .chain((1..=2 * ORDER + 1).filter(|n| n % 2 == 1).flat_map(|n| [m.ftil[n].at_x0(), m.gtil[n].at_x0()]))
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// First-derivative identities, against numerical derivatives of the table:
/// `F'_{2k+1} = ρ(g'F_{2k} − f'G_{2k})` and
/// `F̃'_{2n} = f'G_{2n} − ρ(f'G̃_{2n−1} − g'F̃_{2n−1})` (and the G̃ twin).
pub fn first_derivatives(c: &Case) -> f64 {
    let integ = c.problem.integrator();
    let m = &c.modified;
    let (fp, gp) = (&c.basis.fp, &c.basis.gp);
    let mut worst = 0.0f64;
    for n in 1..=2 * ORDER + 1 {
        let exact = odd_or_even_derivatives(m, fp, gp, n);
        let (df, dft, dgt) = (
            integ.differentiate(&m.f[n]).unwrap(),
            integ.differentiate(&m.ftil[n]).unwrap(),
            integ.differentiate(&m.gtil[n]).unwrap(),
        );
        if let Some(e) = exact.f {
            worst = worst.max(max_diff(&df, &e));
        }
        if let Some((et, egt)) = exact.tilde {
            worst = worst.max(max_diff(&dft, &et)).max(max_diff(&dgt, &egt));
        }
    }
    worst
}

struct Derivatives {
    f: Option<SampledFunction>,
    tilde: Option<(SampledFunction, SampledFunction)>,
}

fn odd_or_even_derivatives(m: &PowerTable, fp: &SampledFunction, gp: &SampledFunction, n: usize) -> Derivatives {
    let rho = m.rho;
    if n % 2 == 1 {
        let f = gp.mul(&m.f[n - 1]).unwrap().sub(&fp.mul(&m.g[n - 1]).unwrap()).unwrap().scale(rho);
        Derivatives { f: Some(f), tilde: None }
    } else {
        let mix = fp.mul(&m.gtil[n - 1]).unwrap().sub(&gp.mul(&m.ftil[n - 1]).unwrap()).unwrap().scale(rho);
        let ft = fp.mul(&m.g[n]).unwrap().sub(&mix).unwrap();
        let gt = gp.mul(&m.f[n]).unwrap().sub(&mix).unwrap();
        Derivatives { f: None, tilde: Some((ft, gt)) }
    }
}

/// Second-order identities `(pF'_n)' + qF_n = rF_{n−2}` (odd n) and
/// `(pF̃'_n)' + qF̃_n = rF̃_{n−2}` (even n), with `pF'` from the first-order
/// identities and one numerical derivative. Checked away from the ends,
/// where one-sided stencils lose accuracy.
pub fn second_order_identities(c: &Case) -> f64 {
    let integ = c.problem.integrator();
    let m = &c.modified;
    let (p, q, r) = (&c.problem.p, &c.problem.q, &c.r);
    let (fp, gp) = (&c.basis.fp, &c.basis.gp);
    let mut worst = 0.0f64;
    for n in 2..=2 * ORDER + 1 {
        let d = odd_or_even_derivatives(m, fp, gp, n);
        let pairs: Vec<(SampledFunction, &SampledFunction, &SampledFunction)> = match (d.f, d.tilde) {
            (Some(f), _) => vec![(f, &m.f[n], &m.f[n - 2])],
            (None, Some((ft, gt))) => vec![(ft, &m.ftil[n], &m.ftil[n - 2]), (gt, &m.gtil[n], &m.gtil[n - 2])],
            _ => unreachable!(),
        };
        for (deriv, value, lower) in pairs {
            let flux = integ.differentiate(&p.mul(&deriv).unwrap()).unwrap();
            let lhs = flux.add(&q.mul(value).unwrap()).unwrap();
            let rhs = r.mul(lower).unwrap();
            worst = worst.max(interior(&lhs.sub(&rhs).unwrap(), 3));
        }
    }
    worst
}

/// Largest ratio `|power| / bound` over all nodes and families; at most 1
/// when the a-priori estimates hold.
pub fn bound_ratio(c: &Case) -> f64 {
    let zeros = SampledFunction::zeros(c.problem.grid.clone());
    let rec = PencilRecursion::from_terms(&c.basis, std::slice::from_ref(&c.r), std::slice::from_ref(&zeros)).unwrap();
    let consts = rec.bound_constants();
    let m = &c.modified;
    let nodes = c.problem.grid.nodes();
    let x0 = c.problem.grid.x0();
    let mut worst = 0.0f64;
    for n in 0..=ORDER {
        for (i, x) in nodes.iter().enumerate() {
            let dist = (x - x0).abs();
            for (family, values) in [
                (Family::EvenF, [m.f[2 * n].at(i), m.g[2 * n].at(i)]),
                (Family::OddF, [m.f[2 * n + 1].at(i), m.g[2 * n + 1].at(i)]),
                (Family::EvenFtil, [m.ftil[2 * n].at(i), m.gtil[2 * n].at(i)]),
                (Family::OddFtil, [m.ftil[2 * n + 1].at(i), m.gtil[2 * n + 1].at(i)]),
            ] {
                let bound = truncation_bound(family, n, &consts, dist);
                for v in values {
                    if v.norm() > 1e-300 {
                        worst = worst.max(v.norm() / bound);
                    }
                }
            }
        }
    }
    worst
}

/// `p(u₁u₂' − u₁'u₂) − 1` over the grid for the assembled solutions.
pub fn wronskian_defect(c: &Case, lams: &[Complex64]) -> f64 {
    let table = modified_powers(&c.basis, &c.r, 40).unwrap();
    let series = assemble(&table, &c.basis, ZERO).unwrap();
    let mut worst = 0.0f64;
    for &lam in lams {
        let v = series.evaluate_all(lam).unwrap();
        let w = v.u1.mul(&v.pu2p).unwrap().sub(&v.pu1p.mul(&v.u2).unwrap()).unwrap();
        worst = worst.max(w.map(|z| z - 1.0).max_abs());
    }
    worst
}

/// Swapping f and g (which negates ρ) swaps F↔G and F̃↔G̃.
pub fn swap_symmetry(c: &Case) -> f64 {
    let swapped = modified_powers(&c.basis.swapped(), &c.r, ORDER).unwrap();
    let m = &c.modified;
    let mut worst = 0.0f64;
    for n in 0..=2 * ORDER + 1 {
        worst = worst
            .max(max_diff(&m.f[n], &swapped.g[n]))
            .max(max_diff(&m.g[n], &swapped.f[n]))
            .max(max_diff(&m.ftil[n], &swapped.gtil[n]))
            .max(max_diff(&m.gtil[n], &swapped.ftil[n]));
    }
    worst
}

