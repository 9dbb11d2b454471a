//! Uniform tensor grids on an interval or a rectangle, grid functions with
//! homogeneous Dirichlet data, trapezoid quadrature and `L^q` norms.
//!
//! Nodes are stored x-fastest: node `(i, j)` lives at `i + nx·j`. Boundary
//! nodes are kept explicitly and always carry 0.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Interval,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub h: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!("degenerate bounds [{lo}, {hi}]")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes per axis, got {n}")));
        }
        Ok(Axis { lo, hi, n, h: (hi - lo) / (n - 1) as f64 })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.h
        }
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    axes: Vec<Axis>,
    measure: f64,
    weights: Vec<f64>,
}

/// Builds a grid from per-axis bounds and node counts.
pub fn build_grid(kind: GridKind, bounds: &[(f64, f64)], n: &[usize]) -> Result<Grid> {
    let dim = match kind {
        GridKind::Interval => 1,
        GridKind::Rectangle => 2,
    };
    if bounds.len() != dim || n.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "{kind:?} needs {dim} axis specification(s), got {} bounds and {} node counts",
            bounds.len(),
            n.len()
        )));
    }
    let axes = bounds.iter().zip(n).map(|(&(lo, hi), &n)| Axis::new(lo, hi, n)).collect::<Result<Vec<_>>>()?;
    let measure = axes.iter().map(Axis::length).product();
    let weights = match kind {
        GridKind::Interval => (0..axes[0].n).map(|i| axes[0].weight(i)).collect(),
        GridKind::Rectangle => {
            let (ax, ay) = (axes[0], axes[1]);
            let mut w = Vec::with_capacity(ax.n * ay.n);
            for j in 0..ay.n {
                for i in 0..ax.n {
                    w.push(ax.weight(i) * ay.weight(j));
                }
            }
            w
        }
    };
    Ok(Grid { kind, axes, measure, weights })
}

impl Grid {
    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<Grid> {
        build_grid(GridKind::Interval, &[(lo, hi)], &[n])
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64), n: (usize, usize)) -> Result<Grid> {
        build_grid(GridKind::Rectangle, &[x, y], &[n.0, n.1])
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    /// |Ω|
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nx(&self) -> usize {
        self.axes[0].n
    }

    pub fn ny(&self) -> usize {
        self.axes.get(1).map_or(1, |a| a.n)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx(), idx / self.nx())
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.ij(idx);
        let on_x = i == 0 || i + 1 == self.nx();
        match self.kind {
            GridKind::Interval => on_x,
            GridKind::Rectangle => on_x || j == 0 || j + 1 == self.ny(),
        }
    }

    /// Node coordinates; the second entry is 0 on an interval.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.ij(idx);
        let x = self.axes[0].coord(i);
        let y = self.axes.get(1).map_or(0.0, |a| a.coord(j));
        [x, y]
    }

    /// Trapezoid weights, one per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn h_min(&self) -> f64 {
        self.axes.iter().map(|a| a.h).fold(f64::INFINITY, f64::min)
    }

    /// `1 / Σ_k h_k^{-2}`: the squared spacing entering explicit diffusion limits.
    pub fn h_eff_sq(&self) -> f64 {
        1.0 / self.axes.iter().map(|a| a.h.powi(-2)).sum::<f64>()
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| !self.is_boundary(k))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), actual: len });
        }
        Ok(())
    }

    /// Composite trapezoid value of `∫_Ω values dx` for arbitrary nodal data
    /// (boundary values are not forced to 0 here).
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values.len())?;
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// `(∫|u|^q)^{1/q}`.
    pub fn lp_norm(&self, field: &Field, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("L^q norm needs q >= 1, got {q}")));
        }
        self.check_len(field.len())?;
        let s: f64 = self.weights.iter().zip(field.values()).map(|(w, v)| w * v.abs().powf(q)).sum();
        Ok(s.powf(1.0 / q))
    }

    /// Nodal samples of an arbitrary function, boundary included.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.coords(k))).collect()
    }

    /// The grid obtained by `n → 2n − 1` on every axis.
    pub fn refined(&self) -> Grid {
        let bounds: Vec<_> = self.axes.iter().map(|a| (a.lo, a.hi)).collect();
        let n: Vec<_> = self.axes.iter().map(|a| 2 * a.n - 1).collect();
        build_grid(self.kind, &bounds, &n).expect("refinement of a valid grid is valid")
    }
}

/// Real-valued grid function with zero Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Field {
        Field { values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at interior nodes; boundary nodes are set to 0.
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: &Grid, f: F) -> Result<Field> {
        let values = (0..grid.len()).map(|k| if grid.is_boundary(k) { 0.0 } else { f(grid.coords(k)) }).collect();
        Field::from_values(grid, values)
    }

    /// Validates length, finiteness and the Dirichlet condition.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Field> {
        grid.check_len(values.len())?;
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k, value: v });
            }
            if grid.is_boundary(k) && v != 0.0 {
                return Err(Error::BoundaryNotZero { index: k, value: v });
            }
        }
        Ok(Field { values })
    }

    /// Caller guarantees the invariants (used inside time stepping).
    pub(crate) fn from_raw(values: Vec<f64>) -> Field {
        Field { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { values: self.values.iter().map(|v| s * v).collect() }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.values.iter().map(|&v| f(v)).collect()
    }

    /// Writes `x[,y],value`, one row per node.
    pub fn write_csv<W: Write>(&self, grid: &Grid, out: W) -> Result<()> {
        grid.check_len(self.len())?;
        let mut w = csv::Writer::from_writer(out);
        if grid.dim() == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (k, v) in self.values.iter().enumerate() {
            let c = grid.coords(k);
            if grid.dim() == 1 {
                w.write_record([format!("{:e}", c[0]), format!("{v:e}")])?;
            } else {
                w.write_record([format!("{:e}", c[0]), format!("{:e}", c[1]), format!("{v:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`Field::write_csv`] on the same grid. Node
    /// coordinates must match to within a hundredth of the spacing.
    pub fn read_csv<R: Read>(grid: &Grid, input: R) -> Result<Field> {
        let mut r = csv::Reader::from_reader(input);
        let mut values = Vec::with_capacity(grid.len());
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != grid.dim() + 1 {
                return Err(Error::Io(format!("row {k}: expected {} columns, got {}", grid.dim() + 1, rec.len())));
            }
            let parse =
                |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Io(format!("row {k}: cannot parse {s:?}: {e}")));
            if k < grid.len() {
                let c = grid.coords(k);
                for d in 0..grid.dim() {
                    let x = parse(&rec[d])?;
                    if (x - c[d]).abs() > 0.01 * grid.axis(d).h {
                        return Err(Error::Io(format!("row {k}: coordinate {x} does not match node {}", c[d])));
                    }
                }
            }
            values.push(parse(&rec[grid.dim()])?);
        }
        Field::from_values(grid, values)
    }
}
