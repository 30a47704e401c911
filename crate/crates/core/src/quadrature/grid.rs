use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of intervals covered by one Newton-Cotes stencil.
pub const BLOCK: usize = 5;

/// Samples within this relative distance of an anchor are considered to sit on it.
const ANCHOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform,
    Chebyshev,
}

/// A maximal run of nodes on which coefficients are continuous. Inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start..=self.end).contains(&i)
    }
}

/// Sampling of `[a, b]` on which every coefficient and formal power is tabulated.
///
/// Breakpoints are stored as two consecutive nodes with the same abscissa: the
/// last node of the left segment and the first node of the right segment. This
/// lets a sampled function carry both one-sided limits of a jump.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    a: f64,
    b: f64,
    intervals: usize,
    nodes: Vec<f64>,
    x0_index: usize,
    segments: Vec<Segment>,
    breakpoints: Vec<f64>,
}

impl Grid {
    /// Uniform grid with at least `intervals` subintervals.
    ///
    /// The interval count is raised to the smallest admissible value for which
    /// `x0` and every breakpoint fall on a boundary of the five-interval blocks.
    pub fn uniform(a: f64, b: f64, intervals: usize, x0: f64, breakpoints: &[f64]) -> Result<Self> {
        check_interval(a, b, x0)?;
        let breakpoints = normalize_breakpoints(a, b, x0, breakpoints)?;

        let span = b - a;
        let mut anchors: Vec<f64> = breakpoints.iter().map(|&c| (c - a) / span).collect();
        anchors.push((x0 - a) / span);

        let start = intervals.max(BLOCK).div_ceil(BLOCK) * BLOCK;
        let limit = start.saturating_mul(10).max(start + 1_000_000);
        let m = (start..=limit)
            .step_by(BLOCK)
            .find(|&m| {
                anchors.iter().all(|&t| {
                    let blocks = t * m as f64 / BLOCK as f64;
                    (blocks - blocks.round()).abs() <= ANCHOR_TOL * blocks.abs().max(1.0)
                })
            })
            .ok_or_else(|| {
                Error::Grid(format!(
                    "no interval count in [{start}, {limit}] places x0 and the breakpoints on block boundaries"
                ))
            })?;

        let h = span / m as f64;
        let coord = |j: usize| -> f64 {
            if j == m {
                b
            } else {
                a + h * j as f64
            }
        };
        let anchor_index = |c: f64| ((c - a) / h).round() as usize;
        let break_idx: Vec<usize> = breakpoints.iter().map(|&c| anchor_index(c)).collect();

        let mut nodes = Vec::with_capacity(m + 1 + break_idx.len());
        let mut segments = Vec::with_capacity(break_idx.len() + 1);
        let mut seg_start = 0;
        let mut next_break = 0;
        for j in 0..=m {
            let mut x = coord(j);
            if next_break < break_idx.len() && break_idx[next_break] == j {
                x = breakpoints[next_break];
                nodes.push(x);
                segments.push(Segment { start: seg_start, end: nodes.len() - 1 });
                seg_start = nodes.len();
                next_break += 1;
            }
            nodes.push(x);
        }
        segments.push(Segment { start: seg_start, end: nodes.len() - 1 });

        let j0 = anchor_index(x0);
        let shift = break_idx.iter().filter(|&&jb| jb < j0).count();
        let x0_index = j0 + shift;
        nodes[x0_index] = x0;

        Ok(Self {
            kind: GridKind::Uniform,
            a,
            b,
            intervals: m,
            nodes,
            x0_index,
            segments,
            breakpoints,
        })
    }

    /// Chebyshev-Lobatto grid mapped to `[a, b]`. `x0` must coincide with a node;
    /// an interior midpoint anchor forces an even interval count.
    pub fn chebyshev(a: f64, b: f64, intervals: usize, x0: f64) -> Result<Self> {
        check_interval(a, b, x0)?;
        let mut m = intervals.max(2);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        if (x0 - mid).abs() <= ANCHOR_TOL * half && m % 2 == 1 {
            m += 1;
        }
        let mut nodes: Vec<f64> = (0..=m)
            .map(|j| mid - half * (PI * j as f64 / m as f64).cos())
            .collect();
        nodes[0] = a;
        nodes[m] = b;
        if m.is_multiple_of(2) {
            nodes[m / 2] = mid;
        }
        let (x0_index, dist) = nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| (i, (x - x0).abs()))
            .min_by(|l, r| l.1.total_cmp(&r.1))
            .expect("grid has nodes");
        if dist > ANCHOR_TOL * (b - a) {
            return Err(Error::Grid(format!(
                "x0 = {x0} is not a Chebyshev node of [{a}, {b}] with {m} intervals"
            )));
        }
        nodes[x0_index] = x0;
        Ok(Self {
            kind: GridKind::Chebyshev,
            a,
            b,
            intervals: m,
            segments: vec![Segment { start: 0, end: m }],
            nodes,
            x0_index,
            breakpoints: Vec::new(),
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals M (duplicated breakpoint nodes do not count).
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x0(&self) -> f64 {
        self.nodes[self.x0_index]
    }

    pub fn x0_index(&self) -> usize {
        self.x0_index
    }

    pub fn first(&self) -> usize {
        0
    }

    pub fn last(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Node indices of the left copies of every breakpoint.
    pub fn breakpoint_indices(&self) -> Vec<usize> {
        self.segments[..self.segments.len() - 1].iter().map(|s| s.end).collect()
    }

    /// Index of the segment holding the anchor node.
    pub fn x0_segment(&self) -> usize {
        self.segments
            .iter()
            .position(|s| s.contains(self.x0_index))
            .expect("x0 belongs to a segment")
    }

    /// Uniform spacing; `None` for Chebyshev grids.
    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some((self.b - self.a) / self.intervals as f64),
            GridKind::Chebyshev => None,
        }
    }

    /// Whether `x0` sits at the left endpoint.
    pub fn anchored_left(&self) -> bool {
        self.x0_index == 0
    }

    pub fn anchored_right(&self) -> bool {
        self.x0_index == self.last()
    }

    /// Same node layout with a different anchor; used when a problem is re-anchored.
    pub fn with_anchor(&self, x0: f64) -> Result<Self> {
        match self.kind {
            GridKind::Uniform => Self::uniform(self.a, self.b, self.intervals, x0, &self.breakpoints),
            GridKind::Chebyshev => Self::chebyshev(self.a, self.b, self.intervals, x0),
        }
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

fn check_interval(a: f64, b: f64, x0: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Grid(format!("invalid interval [{a}, {b}]")));
    }
    if !(a..=b).contains(&x0) {
        return Err(Error::Grid(format!("x0 = {x0} lies outside [{a}, {b}]")));
    }
    Ok(())
}

fn normalize_breakpoints(a: f64, b: f64, x0: f64, breakpoints: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = breakpoints.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    for &c in &out {
        if !(c > a && c < b) {
            return Err(Error::Grid(format!("breakpoint {c} is not interior to [{a}, {b}]")));
        }
        if (c - x0).abs() <= ANCHOR_TOL * (b - a) {
            return Err(Error::Grid(format!("x0 = {x0} coincides with a breakpoint")));
        }
    }
    Ok(out)
}

/// Complex samples of one function on a [`Grid`].
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl PartialEq for SampledFunction {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

pub(crate) fn same_grid(l: &Arc<Grid>, r: &Arc<Grid>) -> bool {
    Arc::ptr_eq(l, r) || **l == **r
}

impl SampledFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "sample count {} does not match node count {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: Complex64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Samples a piecewise definition: `f(segment_index, x)`.
    pub fn from_segment_fn(grid: Arc<Grid>, f: impl Fn(usize, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for (k, seg) in grid.segments().iter().enumerate() {
            for &x in &grid.nodes()[seg.start..=seg.end] {
                values.push(f(k, x));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn at_x0(&self) -> Complex64 {
        self.values[self.grid.x0_index()]
    }

    pub fn first(&self) -> Complex64 {
        self.values[0]
    }

    pub fn last(&self) -> Complex64 {
        self.values[self.values.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn recip(&self) -> Self {
        self.map(|v| v.inv())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// Replaces non-finite samples by a finite cap, keeping the sign of real and
    /// imaginary infinities. Returns the indices that were changed.
    pub fn apply_cap(&mut self, cap: f64) -> Vec<usize> {
        let clamp = |t: f64| {
            if t.is_nan() {
                cap
            } else if t.is_infinite() {
                cap.copysign(t)
            } else {
                t
            }
        };
        let mut changed = Vec::new();
        for (i, v) in self.values.iter_mut().enumerate() {
            if !v.is_finite() {
                *v = Complex64::new(clamp(v.re), if v.im.is_nan() { 0.0 } else { clamp(v.im) });
                changed.push(i);
            }
        }
        changed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_rounds_intervals_to_blocks() {
        let g = Grid::uniform(0.0, 1.0, 12, 0.0, &[]).unwrap();
        assert_eq!(g.intervals(), 15);
        assert_eq!(g.len(), 16);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[15], 1.0);
    }

    #[test]
    fn interior_anchor_lands_on_block_boundary() {
        let g = Grid::uniform(-1.0, 1.0, 19999, 0.0, &[]).unwrap();
        assert_eq!(g.intervals(), 20000);
        assert_eq!(g.x0(), 0.0);
        assert_eq!(g.x0_index() % BLOCK, 0);
    }

    #[test]
    fn breakpoints_are_duplicated_nodes() {
        let g = Grid::uniform(0.0, 1.0, 10001, 0.0, &[0.5]).unwrap();
        assert_eq!(g.intervals(), 10010);
        assert_eq!(g.len(), 10012);
        let idx = g.breakpoint_indices();
        assert_eq!(idx, vec![5005]);
        assert_eq!(g.nodes()[5005], 0.5);
        assert_eq!(g.nodes()[5006], 0.5);
        assert_eq!(g.segments().len(), 2);
        for s in g.segments() {
            assert_eq!((s.len() - 1) % BLOCK, 0);
        }
    }

    #[test]
    fn uniform_spacing_is_constant() {
        let g = Grid::uniform(0.0, std::f64::consts::PI, 1000, 0.0, &[]).unwrap();
        let h = g.spacing().unwrap();
        for w in g.nodes().windows(2) {
            assert!(((w[1] - w[0]) - h).abs() <= 1e-12 * h);
        }
    }

    #[test]
    fn anchor_at_breakpoint_rejected() {
        assert!(Grid::uniform(0.0, 1.0, 100, 0.5, &[0.5]).is_err());
    }

    #[test]
    fn chebyshev_nodes_and_anchor() {
        let g = Grid::chebyshev(-1.0, 1.0, 63, 0.0).unwrap();
        assert_eq!(g.intervals(), 64);
        assert_eq!(g.x0(), 0.0);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(Grid::chebyshev(0.0, 1.0, 10, 0.3).is_err());
    }

    #[test]
    fn cap_replaces_infinities() {
        let g = Grid::uniform(0.0, 1.0, 5, 0.0, &[]).unwrap().into_shared();
        let mut f = SampledFunction::from_real_fn(g, |x| if x == 0.0 { f64::NEG_INFINITY } else { x });
        let changed = f.apply_cap(1e8);
        assert_eq!(changed, vec![0]);
        assert_eq!(f.at(0).re, -1e8);
    }
}
