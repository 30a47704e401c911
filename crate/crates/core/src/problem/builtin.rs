//! Registry of benchmark problems.

use num_complex::Complex64;

use super::file::{
    BcDoc, CoefficientsDoc, FlagsDoc, GridDoc, IntervalDoc, ProblemDocument, ReportDoc, SeedDoc, TermDoc,
};
use super::zs::ZakharovShabatProblem;
use super::{SpectralProblem, Window};
use crate::error::{Error, Result};
use crate::quadrature::{Grid, GridKind, SampledFunction};

/// Default replacement for non-finite coefficient samples at singular endpoints.
pub const DEFAULT_ENDPOINT_CAP: f64 = 1e8;

const NAMES: [&str; 9] = [
    "dirichlet_free",
    "pryce9",
    "pryce10",
    "pryce11",
    "paine2",
    "pencil_at33",
    "pencil_at31",
    "string",
    "bronski",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Overrides applied on top of a builtin's defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuiltinOptions {
    pub intervals: Option<usize>,
    pub kind: Option<GridKind>,
    pub x0: Option<f64>,
    pub endpoint_cap: Option<f64>,
    /// Semiclassical parameter of the `bronski` problem.
    pub epsilon: Option<f64>,
    /// Truncation half-width `a` of the `bronski` problem, support `[-a, a]`.
    pub half_width: Option<f64>,
}

fn term(k: usize, r: &str, s: &str) -> TermDoc {
    TermDoc { k, r: r.into(), s: s.into() }
}

fn seed(f: &str, g: &str, pfp: &str, pgp: &str) -> Option<SeedDoc> {
    Some(SeedDoc { f: f.into(), g: g.into(), pfp: pfp.into(), pgp: pgp.into() })
}

fn window(re_min: f64, re_max: f64) -> Option<Window> {
    Some(Window { re_min, re_max, ..Window::ALL })
}

#[allow(clippy::too_many_arguments)]
fn document(
    name: &str,
    a: &str,
    b: &str,
    m: usize,
    x0: &str,
    p: &str,
    q: &str,
    terms: Vec<TermDoc>,
    bc_left: BcDoc,
    bc_right: BcDoc,
    flags: FlagsDoc,
) -> ProblemDocument {
    ProblemDocument {
        name: Some(name.to_string()),
        interval: IntervalDoc { a: a.into(), b: b.into() },
        grid: GridDoc { kind: GridKind::Uniform, m, x0: Some(x0.into()), breakpoints: Vec::new() },
        coefficients: CoefficientsDoc { p: p.into(), q: q.into() },
        terms,
        bc_left,
        bc_right,
        flags,
        seed: None,
        report: None,
        zs: None,
    }
}

fn self_adjoint() -> FlagsDoc {
    FlagsDoc { self_adjoint: true, ..FlagsDoc::default() }
}

fn singular() -> FlagsDoc {
    FlagsDoc { self_adjoint: true, outside_theorem_hypotheses: true, ..FlagsDoc::default() }
}

/// Problem definitions in the stored sign convention
/// `(p u')' + q u = Σ λ^k (r_k u + s_k u')`: equations written as
/// `-(p u')' + q u = λ r u` are stored with `q → -q` and `r₁ = -r`.
pub(crate) fn builtin_document(name: &str) -> Option<ProblemDocument> {
    let doc = match name {
        "dirichlet_free" => ProblemDocument {
            seed: seed("1", "1+x", "0", "1"),
            report: Some(ReportDoc { first_index: 1, window: None }),
            ..document(
                name,
                "0",
                "pi",
                1000,
                "0",
                "1",
                "0",
                vec![term(1, "-1", "0")],
                BcDoc::dirichlet(),
                BcDoc::dirichlet(),
                self_adjoint(),
            )
        },
        "pryce10" => ProblemDocument {
            seed: seed("1", "1+arcsin(x)", "0", "1"),
            report: Some(ReportDoc { first_index: 0, window: None }),
            ..document(
                name,
                "-1",
                "1",
                20000,
                "0",
                "sqrt(1-x^2)",
                "0",
                vec![term(1, "-1", "0")],
                BcDoc::neumann(),
                BcDoc::dirichlet(),
                singular(),
            )
        },
        "pryce9" => ProblemDocument {
            seed: seed("1", "1+(x*sqrt(1-x^2)+arcsin(x))/2", "0", "1"),
            report: Some(ReportDoc { first_index: 0, window: None }),
            ..document(
                name,
                "-1",
                "1",
                20000,
                "0",
                "1/sqrt(1-x^2)",
                "0",
                vec![term(1, "-1/sqrt(1-x^2)", "0")],
                BcDoc::dirichlet(),
                BcDoc::dirichlet(),
                // The capped weight sample leaks into the Darboux second solution in
                // proportion to the cap; a moderate cap keeps that leak negligible.
                FlagsDoc { endpoint_cap: Some(1e4), ..singular() },
            )
        },
        "pryce11" => ProblemDocument {
            report: Some(ReportDoc { first_index: 0, window: None }),
            ..document(
                name,
                "0",
                "4",
                10000,
                "2",
                "1",
                "-ln(x)",
                vec![term(1, "-1", "0")],
                BcDoc::dirichlet(),
                BcDoc::dirichlet(),
                singular(),
            )
        },
        "paine2" => ProblemDocument {
            seed: seed(
                "(1+10*x)^((1+sqrt(5))/2)",
                "(1+10*x)^((1-sqrt(5))/2)",
                "5*(1+sqrt(5))*(1+10*x)^((sqrt(5)-1)/2)",
                "5*(1-sqrt(5))*(1+10*x)^(-(1+sqrt(5))/2)",
            ),
            report: Some(ReportDoc { first_index: 0, window: None }),
            ..document(
                name,
                "0",
                "pi",
                10000,
                "0",
                "1",
                "-1/(x+0.1)^2",
                vec![term(1, "-1", "0")],
                BcDoc::dirichlet(),
                BcDoc::dirichlet(),
                self_adjoint(),
            )
        },
        // -y'' + x² y = λ(2i y' + y),  y'(c) + iλ y(c) = 0 at both ends.
        "pencil_at33" => ProblemDocument {
            report: Some(ReportDoc { first_index: -2, window: window(-5.0, 7.0) }),
            ..document(
                name,
                "0",
                "1",
                10000,
                "0",
                "1",
                "-x^2",
                vec![term(1, "-1", "-2i")],
                BcDoc::new(&["0", "i"], &["1"]),
                BcDoc::new(&["0", "i"], &["1"]),
                self_adjoint(),
            )
        },
        // -y'' + q y = λ(2i y' + y), q = 1 on [0, 1/2], 0 on (1/2, 1];
        // y(0) = 0, y'(1) + iλ y(1) = 0.
        "pencil_at31" => {
            let mut d = document(
                name,
                "0",
                "1",
                10000,
                "0",
                "1",
                "0",
                vec![term(1, "-1", "-2i")],
                BcDoc::dirichlet(),
                BcDoc::new(&["0", "i"], &["1"]),
                self_adjoint(),
            );
            d.grid.breakpoints = vec![0.5.into()];
            d.coefficients.q = super::file::Coefficient::Piecewise(vec!["-1".into(), "0".into()]);
            d.report = Some(ReportDoc { first_index: -1, window: window(-3.0, 11.0) });
            d
        }
        // v'' + λ² v - i x λ v = 0, v(0) = 0, v'(1) + iλ v(1) - λ² v(1) = 0.
        "string" => ProblemDocument {
            seed: seed("1", "1+x", "0", "1"),
            report: Some(ReportDoc { first_index: 1, window: window(0.1, 14.0) }),
            ..document(
                name,
                "0",
                "1",
                10000,
                "0",
                "1",
                "0",
                vec![term(1, "i*x", "0"), term(2, "-1", "0")],
                BcDoc::dirichlet(),
                BcDoc::new(&["0", "i", "-1"], &["1"]),
                FlagsDoc::default(),
            )
        },
        _ => return None,
    };
    Some(doc)
}

/// Samples a benchmark problem by name.
pub fn builtin(name: &str, options: &BuiltinOptions) -> Result<SpectralProblem> {
    if name == "bronski" {
        return bronski(options).and_then(|zs| super::zs_to_pencil(&zs));
    }
    let mut doc = builtin_document(name).ok_or_else(|| Error::UnknownBuiltin {
        name: name.to_string(),
        available: NAMES.join(", "),
    })?;
    apply_options(&mut doc, options)?;
    doc.build()
}

/// Grid and flag overrides shared by builtins and problem files.
pub(crate) fn apply_options(doc: &mut ProblemDocument, options: &BuiltinOptions) -> Result<()> {
    if let Some(m) = options.intervals {
        doc.grid.m = m;
    }
    if let Some(kind) = options.kind {
        doc.grid.kind = kind;
    }
    if let Some(x0) = options.x0 {
        doc.grid.x0 = Some(x0.into());
    }
    if let Some(cap) = options.endpoint_cap {
        doc.flags.endpoint_cap = Some(cap);
    }
    if options.epsilon.is_some() || options.half_width.is_some() {
        let name = doc.name.as_deref().unwrap_or("custom");
        return Err(Error::Problem(format!("`{name}` takes no epsilon/half-width option")));
    }
    Ok(())
}

/// `iε v' = q w + λ v`, `iε w' = q̄ v - λ w` with `q = A e^{iS/ε}`,
/// `A = S = sech(2x)`, truncated to `[-a, a]`.
pub fn bronski(options: &BuiltinOptions) -> Result<ZakharovShabatProblem> {
    let eps = options.epsilon.unwrap_or(0.3);
    let a = options.half_width.unwrap_or(8.0);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Problem(format!("epsilon must be positive, got {eps}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Problem(format!("half-width must be positive, got {a}")));
    }
    let m = options.intervals.unwrap_or(4000);
    let x0 = options.x0.unwrap_or(-a);
    let grid = match options.kind.unwrap_or(GridKind::Uniform) {
        GridKind::Uniform => Grid::uniform(-a, a, m, x0, &[])?,
        GridKind::Chebyshev => Grid::chebyshev(-a, a, m, x0)?,
    }
    .into_shared();
    let q = |x: f64| {
        let amp = 1.0 / (2.0 * x).cosh();
        Complex64::from_polar(amp, amp / eps)
    };
    let i_eps = Complex64::new(0.0, eps);
    // Dividing by iε: v' = λ̃ v + P w, w' = -λ̃ w - Q v with λ̃ = λ / (iε).
    let p_pot = SampledFunction::from_fn(grid.clone(), |x| q(x) / i_eps);
    let q_pot = SampledFunction::from_fn(grid.clone(), |x| -q(x).conj() / i_eps);
    ZakharovShabatProblem::new("bronski", q_pot, p_pot, Some(eps), i_eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        let opts = BuiltinOptions { intervals: Some(200), ..Default::default() };
        for name in builtin_names() {
            let p = builtin(name, &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(p.name, *name);
        }
    }

    #[test]
    fn unknown_name_lists_builtins() {
        let err = builtin("bogus", &BuiltinOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("pryce10") && msg.contains("bronski"), "{msg}");
    }

    #[test]
    fn pryce10_flags_vanishing_p() {
        let p = builtin("pryce10", &BuiltinOptions { intervals: Some(100), ..Default::default() }).unwrap();
        assert!(p.flags.p_vanishes_at_endpoints);
        assert!(p.flags.outside_theorem_hypotheses);
    }

    #[test]
    fn pencil_at31_has_breakpoint_node() {
        let p = builtin("pencil_at31", &BuiltinOptions::default()).unwrap();
        let idx = p.grid.breakpoint_indices();
        assert_eq!(idx.len(), 1);
        assert_eq!(p.grid.nodes()[idx[0]], 0.5);
        assert_eq!(p.q.at(idx[0]).re, -1.0);
        assert_eq!(p.q.at(idx[0] + 1).re, 0.0);
    }

    #[test]
    fn pryce11_caps_log_singularity() {
        let p = builtin("pryce11", &BuiltinOptions { intervals: Some(100), ..Default::default() }).unwrap();
        assert_eq!(p.q.at(0).re, DEFAULT_ENDPOINT_CAP);
        assert_eq!(p.grid.x0(), 2.0);
    }
}
