//! Problem files: a TOML document describing interval, grid, coefficients,
//! pencil terms, boundary conditions and flags.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::{format_complex, parse_complex, Expr};
use super::{
    BoundaryCondition, BuiltinOptions, Endpoint, PencilTerm, ProblemFlags, ProblemMeta, Seed, SpectralProblem, Window,
    ZsInfo, DEFAULT_ENDPOINT_CAP,
};
use crate::error::{Error, Result};
use crate::quadrature::{Grid, GridKind, SampledFunction};

/// A real number written either as a literal or as a constant expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Scalar {
    Num(f64),
    Expr(String),
}

impl Scalar {
    fn value(&self) -> Result<f64> {
        match self {
            Self::Num(v) => Ok(*v),
            Self::Expr(s) => {
                let z = Expr::parse(s)?.constant()?;
                if z.im != 0.0 {
                    return Err(Error::Parse(format!("`{s}` must be real")));
                }
                Ok(z.re)
            }
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Self::Expr(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SamplesDoc {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// A coefficient: a number, one expression in `x`, one expression per
/// continuity segment, or explicit samples at every grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Coefficient {
    Num(f64),
    Expr(String),
    Piecewise(Vec<String>),
    Samples(SamplesDoc),
}

impl From<&str> for Coefficient {
    fn from(s: &str) -> Self {
        Self::Expr(s.to_string())
    }
}

impl Coefficient {
    fn zero() -> Self {
        Self::Num(0.0)
    }

    fn sample(&self, grid: &Arc<Grid>, what: &str) -> Result<SampledFunction> {
        match self {
            Self::Num(v) => Ok(SampledFunction::constant(grid.clone(), Complex64::new(*v, 0.0))),
            Self::Expr(s) => {
                let e = Expr::parse(s)?;
                Ok(SampledFunction::from_fn(grid.clone(), |x| e.eval(x)))
            }
            Self::Piecewise(parts) => {
                let nseg = grid.segments().len();
                if parts.len() != nseg {
                    return Err(Error::Problem(format!(
                        "`{what}` has {} pieces but the grid has {nseg} segments",
                        parts.len()
                    )));
                }
                let exprs = parts.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
                Ok(SampledFunction::from_segment_fn(grid.clone(), |k, x| exprs[k].eval(x)))
            }
            Self::Samples(s) => {
                if s.re.len() != grid.len() || s.im.len() != grid.len() {
                    return Err(Error::Problem(format!(
                        "`{what}` has {}/{} samples but the grid has {} nodes",
                        s.re.len(),
                        s.im.len(),
                        grid.len()
                    )));
                }
                let values = s.re.iter().zip(&s.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
                SampledFunction::new(grid.clone(), values)
            }
        }
    }

    fn from_samples(f: &SampledFunction) -> Self {
        Self::Samples(SamplesDoc {
            re: f.values().iter().map(|v| v.re).collect(),
            im: f.values().iter().map(|v| v.im).collect(),
        })
    }
}

fn default_kind() -> GridKind {
    GridKind::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct IntervalDoc {
    pub a: Scalar,
    pub b: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct GridDoc {
    #[serde(default = "default_kind")]
    pub kind: GridKind,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakpoints: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CoefficientsDoc {
    pub p: Coefficient,
    pub q: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TermDoc {
    pub k: usize,
    #[serde(default = "Coefficient::zero")]
    pub r: Coefficient,
    #[serde(default = "Coefficient::zero")]
    pub s: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BcDoc {
    #[serde(default)]
    pub alpha: Vec<String>,
    #[serde(default)]
    pub beta: Vec<String>,
}

impl BcDoc {
    pub fn new(alpha: &[&str], beta: &[&str]) -> Self {
        let v = |s: &[&str]| s.iter().map(|t| t.to_string()).collect();
        Self { alpha: v(alpha), beta: v(beta) }
    }

    pub fn dirichlet() -> Self {
        Self::new(&["1"], &["0"])
    }

    pub fn neumann() -> Self {
        Self::new(&["0"], &["1"])
    }

    fn build(&self, endpoint: Endpoint) -> Result<BoundaryCondition> {
        let parse = |v: &[String]| v.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>();
        BoundaryCondition::new(parse(&self.alpha)?, parse(&self.beta)?, endpoint)
    }

    fn from_bc(bc: &BoundaryCondition) -> Self {
        let f = |v: &[Complex64]| v.iter().map(|&z| format_complex(z)).collect();
        Self { alpha: f(&bc.alpha), beta: f(&bc.beta) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub(crate) struct FlagsDoc {
    #[serde(default)]
    pub self_adjoint: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_cap: Option<f64>,
    #[serde(default)]
    pub outside_theorem_hypotheses: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SeedDoc {
    pub f: Coefficient,
    pub g: Coefficient,
    pub pfp: Coefficient,
    pub pgp: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub(crate) struct ReportDoc {
    #[serde(default)]
    pub first_index: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ZsDoc {
    pub scale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// The complete problem-file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub interval: IntervalDoc,
    pub grid: GridDoc,
    pub coefficients: CoefficientsDoc,
    pub terms: Vec<TermDoc>,
    pub bc_left: BcDoc,
    pub bc_right: BcDoc,
    #[serde(default)]
    pub flags: FlagsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zs: Option<ZsDoc>,
}

impl ProblemDocument {
    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let a = self.interval.a.value()?;
        let b = self.interval.b.value()?;
        let x0 = match &self.grid.x0 {
            Some(s) => s.value()?,
            None => a,
        };
        let breakpoints = self.grid.breakpoints.iter().map(Scalar::value).collect::<Result<Vec<_>>>()?;
        let grid = match self.grid.kind {
            GridKind::Uniform => Grid::uniform(a, b, self.grid.m, x0, &breakpoints)?,
            GridKind::Chebyshev => {
                if !breakpoints.is_empty() {
                    return Err(Error::Grid("breakpoints require a uniform grid".into()));
                }
                Grid::chebyshev(a, b, self.grid.m, x0)?
            }
        };
        Ok(grid.into_shared())
    }

    pub fn build(&self) -> Result<SpectralProblem> {
        let grid = self.build_grid()?;
        let p = self.coefficients.p.sample(&grid, "p")?;
        let q = self.coefficients.q.sample(&grid, "q")?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(PencilTerm {
                    k: t.k,
                    r: t.r.sample(&grid, "r")?,
                    s: t.s.sample(&grid, "s")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let flags = ProblemFlags {
            self_adjoint: self.flags.self_adjoint,
            endpoint_cap: self.flags.endpoint_cap.unwrap_or(DEFAULT_ENDPOINT_CAP),
            p_vanishes_at_endpoints: false,
            outside_theorem_hypotheses: self.flags.outside_theorem_hypotheses,
        };
        let mut problem = SpectralProblem::new(
            self.name.clone().unwrap_or_else(|| "custom".into()),
            p,
            q,
            terms,
            self.bc_left.build(Endpoint::Left)?,
            self.bc_right.build(Endpoint::Right)?,
            flags,
        )?;
        if let Some(seed) = &self.seed {
            let cap = problem.flags.endpoint_cap;
            let sample = |c: &Coefficient, what: &str| -> Result<SampledFunction> {
                let mut f = c.sample(&grid, what)?;
                f.apply_cap(cap);
                Ok(f)
            };
            let seed = Seed {
                f: sample(&seed.f, "seed.f")?,
                g: sample(&seed.g, "seed.g")?,
                pfp: sample(&seed.pfp, "seed.pfp")?,
                pgp: sample(&seed.pgp, "seed.pgp")?,
            };
            problem = problem.with_seed(seed)?;
        }
        if let Some(report) = &self.report {
            problem.meta = ProblemMeta { first_index: report.first_index, window: report.window };
        }
        if let Some(zs) = &self.zs {
            problem.zs = Some(ZsInfo { scale: parse_complex(&zs.scale)?, epsilon: zs.epsilon });
        }
        Ok(problem)
    }

    /// Document holding every sampled array of `problem` verbatim.
    pub fn from_problem(problem: &SpectralProblem) -> Self {
        let grid = &problem.grid;
        let seed = problem.seed.as_ref().map(|s| SeedDoc {
            f: Coefficient::from_samples(&s.f),
            g: Coefficient::from_samples(&s.g),
            pfp: Coefficient::from_samples(&s.pfp),
            pgp: Coefficient::from_samples(&s.pgp),
        });
        Self {
            name: Some(problem.name.clone()),
            interval: IntervalDoc { a: grid.a().into(), b: grid.b().into() },
            grid: GridDoc {
                kind: grid.kind(),
                m: grid.intervals(),
                x0: Some(grid.x0().into()),
                breakpoints: grid.breakpoints().iter().map(|&c| c.into()).collect(),
            },
            coefficients: CoefficientsDoc {
                p: Coefficient::from_samples(&problem.p),
                q: Coefficient::from_samples(&problem.q),
            },
            terms: problem
                .terms
                .iter()
                .map(|t| TermDoc {
                    k: t.k,
                    r: Coefficient::from_samples(&t.r),
                    s: Coefficient::from_samples(&t.s),
                })
                .collect(),
            bc_left: BcDoc::from_bc(&problem.bc_left),
            bc_right: BcDoc::from_bc(&problem.bc_right),
            flags: FlagsDoc {
                self_adjoint: problem.flags.self_adjoint,
                endpoint_cap: Some(problem.flags.endpoint_cap),
                outside_theorem_hypotheses: problem.flags.outside_theorem_hypotheses,
            },
            seed,
            report: Some(ReportDoc { first_index: problem.meta.first_index, window: problem.meta.window }),
            zs: problem.zs.map(|z| ZsDoc { scale: format_complex(z.scale), epsilon: z.epsilon }),
        }
    }
}

/// Parses and samples a problem from TOML text. Unknown keys are rejected.
pub fn load_problem(document: &str) -> Result<SpectralProblem> {
    let doc: ProblemDocument = toml::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    doc.build()
}

pub fn load_problem_file(path: impl AsRef<Path>) -> Result<SpectralProblem> {
    load_problem_file_with(path, &BuiltinOptions::default())
}

/// Loads a problem file with grid and flag overrides applied before sampling.
pub fn load_problem_file_with(path: impl AsRef<Path>, options: &BuiltinOptions) -> Result<SpectralProblem> {
    let text = std::fs::read_to_string(path)?;
    let mut doc: ProblemDocument = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    super::builtin::apply_options(&mut doc, options)?;
    doc.build()
}

/// Serializes a problem with all coefficients as sample arrays, so that
/// `load_problem(save_problem(p))` reproduces every sample bit for bit.
pub fn save_problem(problem: &SpectralProblem) -> Result<String> {
    toml::to_string(&ProblemDocument::from_problem(problem)).map_err(|e| Error::Parse(e.to_string()))
}
