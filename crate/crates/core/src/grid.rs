//! Node-centred Cartesian grids in one and two dimensions, the fields that
//! live on them, and the central-difference operators shared by the solvers.
//!
//! Nodes are indexed `0..=M` on every axis, boundary nodes included. In 2D a
//! node `(i, j)` (with `i` along x and `j` along y) is stored at
//! `i * (M1 + 1) + j`, so ascending storage order is the lexicographic sweep
//! order used by the explicit kernel.

use crate::error::{Error, Result};

/// Relative tolerance used to decide that two axis spacings are equal.
const SQUARE_CELL_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    cells: [usize; 2],
}

impl GridSpec {
    /// Builds a grid from per-axis closed intervals and cell counts.
    pub fn new(extent: &[(f64, f64)], cells: &[usize]) -> Result<Self> {
        let dim = extent.len();
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not supported")));
        }
        if cells.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} cell counts given for a {dim}D grid",
                cells.len()
            )));
        }
        let mut grid = GridSpec {
            dim,
            lower: [0.0; 2],
            upper: [0.0; 2],
            cells: [0; 2],
        };
        for axis in 0..dim {
            let (a, b) = extent[axis];
            let m = cells[axis];
            if !(a.is_finite() && b.is_finite()) || b <= a {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: extent [{a}, {b}] is not a proper interval"
                )));
            }
            if m < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: need at least 2 cells, got {m}"
                )));
            }
            grid.lower[axis] = a;
            grid.upper[axis] = b;
            grid.cells[axis] = m;
        }
        if dim == 2 {
            let (hx, hy) = (grid.spacing(0), grid.spacing(1));
            if (hx - hy).abs() > SQUARE_CELL_RTOL * hx.max(hy) {
                return Err(Error::InvalidGrid(format!(
                    "2D grids need square cells, got dx={hx} dy={hy}"
                )));
            }
        }
        Ok(grid)
    }

    pub fn line(a: f64, b: f64, cells: usize) -> Result<Self> {
        Self::new(&[(a, b)], &[cells])
    }

    /// Square domain `[a, b]^2` with `cells` cells per axis.
    pub fn square(a: f64, b: f64, cells: usize) -> Result<Self> {
        Self::new(&[(a, b), (a, b)], &[cells, cells])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn extent(&self, axis: usize) -> (f64, f64) {
        (self.lower[axis], self.upper[axis])
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    /// Grid spacing; axis 0 is authoritative since cells are square.
    pub fn dx(&self) -> f64 {
        self.spacing(0)
    }

    pub fn nodes_per_axis(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.cells[axis] + 1
        } else {
            1
        }
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        (0..self.dim).map(|a| self.nodes_per_axis(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `k` along `axis`. The last node hits the upper end
    /// of the interval exactly.
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        if k == self.cells[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + k as f64 * self.spacing(axis)
        }
    }

    /// Per-axis index of a flat node index.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            let n1 = self.nodes_per_axis(1);
            [idx / n1, idx % n1]
        }
    }

    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            i * self.nodes_per_axis(1) + j
        }
    }

    /// Physical position of a node; unused trailing components are zero.
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(idx);
        if self.dim == 1 {
            [self.coord(0, i), 0.0]
        } else {
            [self.coord(0, i), self.coord(1, j)]
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let [i, j] = self.multi_index(idx);
        let on0 = i == 0 || i == self.cells[0];
        if self.dim == 1 {
            on0
        } else {
            on0 || j == 0 || j == self.cells[1]
        }
    }

    /// Boundary node indices in ascending storage order.
    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_boundary(k)).collect()
    }

    /// Stride between neighbouring nodes along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        if self.dim == 2 && axis == 0 {
            self.nodes_per_axis(1)
        } else {
            1
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every node. The point slice has length `grid.dim()`.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let p = grid.position(k);
                f(&p[..grid.dim()])
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
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

    /// Rejects NaN and infinities.
    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    /// Rejects NaN only; used for obstacle fields where ±inf means "no bound".
    pub fn check_not_nan(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| v.is_nan()) {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Sup-norm of `self - other`.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        sup_diff(&self.values, &other.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// A `dim`-vector per grid node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            grid,
            values: vec![0.0; grid.len() * grid.dim()],
        }
    }

    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len() / grid.dim().max(1))?;
        if values.len() != grid.len() * grid.dim() {
            return Err(Error::LengthMismatch {
                expected: grid.len() * grid.dim(),
                got: values.len(),
            });
        }
        Ok(VectorField { grid, values })
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> [f64; 2]) -> Self {
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * d);
        for k in 0..grid.len() {
            let p = grid.position(k);
            let v = f(&p[..d]);
            values.extend_from_slice(&v[..d]);
        }
        VectorField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn node(&self, idx: usize) -> &[f64] {
        let d = self.grid.dim();
        &self.values[idx * d..(idx + 1) * d]
    }

    pub fn component(&self, idx: usize, c: usize) -> f64 {
        self.values[idx * self.grid.dim() + c]
    }
}

/// Dirichlet data: one value per boundary node, in ascending storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    grid: GridSpec,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl BoundaryData {
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let indices = grid.boundary_indices();
        let values = indices
            .iter()
            .map(|&k| {
                let p = grid.position(k);
                f(&p[..grid.dim()])
            })
            .collect();
        BoundaryData {
            grid,
            indices,
            values,
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Trace of a field on the boundary.
    pub fn from_field(field: &ScalarField) -> Self {
        let grid = *field.grid();
        let indices = grid.boundary_indices();
        let values = indices.iter().map(|&k| field.values()[k]).collect();
        BoundaryData {
            grid,
            indices,
            values,
        }
    }

    /// 1D convenience: values at the left and right end.
    pub fn endpoints(grid: GridSpec, left: f64, right: f64) -> Self {
        let m = grid.cells(0);
        let mut g = Self::constant(grid, left);
        if grid.dim() == 1 {
            g.values[1] = right;
        } else {
            for (slot, &k) in g.values.iter_mut().zip(&g.indices) {
                if grid.multi_index(k)[0] == m {
                    *slot = right;
                }
            }
        }
        g
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite {
                what: "boundary data",
                index: self.indices[i],
            }),
            None => Ok(()),
        }
    }

    /// Writes the boundary values into a full nodal array.
    pub fn impose(&self, values: &mut [f64]) {
        for (&k, &v) in self.indices.iter().zip(&self.values) {
            values[k] = v;
        }
    }

    /// True iff every boundary node of `values` equals the data bitwise.
    pub fn matches(&self, values: &[f64]) -> bool {
        self.indices
            .iter()
            .zip(&self.values)
            .all(|(&k, &v)| values[k].to_bits() == v.to_bits())
    }
}

/// Second-order central-difference Laplacian at interior nodes; boundary
/// entries of the result are zero.
pub fn laplacian_h(u: &ScalarField) -> ScalarField {
    let grid = *u.grid();
    let h2 = grid.dx() * grid.dx();
    let v = u.values();
    let mut out = vec![0.0; grid.len()];
    for (k, o) in out.iter_mut().enumerate() {
        if grid.is_boundary(k) {
            continue;
        }
        let mut acc = 0.0;
        for axis in 0..grid.dim() {
            let s = grid.stride(axis);
            acc += v[k - s] - 2.0 * v[k] + v[k + s];
        }
        *o = acc / h2;
    }
    ScalarField { grid, values: out }
}

/// Discrete gradient: central differences in the interior, first-order
/// one-sided differences on the boundary faces.
pub fn gradient_h(u: &ScalarField) -> VectorField {
    let grid = *u.grid();
    let d = grid.dim();
    let h = grid.dx();
    let v = u.values();
    let mut out = VectorField::zeros(grid);
    for k in 0..grid.len() {
        let idx = grid.multi_index(k);
        for axis in 0..d {
            let s = grid.stride(axis);
            let m = grid.cells(axis);
            out.values[k * d + axis] = if idx[axis] == 0 {
                (v[k + s] - v[k]) / h
            } else if idx[axis] == m {
                (v[k] - v[k - s]) / h
            } else {
                (v[k + s] - v[k - s]) / (2.0 * h)
            };
        }
    }
    out
}

/// Central-difference divergence. Interior nodes use the nodal values of `p`
/// directly; at boundary nodes the missing outside neighbour is a ghost
/// obtained by reflecting `p` across the boundary (zero normal derivative),
/// i.e. `p[-1] = p[1]` and `p[M+1] = p[M-1]`.
pub fn divergence_h(p: &VectorField) -> ScalarField {
    let grid = *p.grid();
    let d = grid.dim();
    let h = grid.dx();
    let pv = p.values();
    let mut out = vec![0.0; grid.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let idx = grid.multi_index(k);
        let mut acc = 0.0;
        for axis in 0..d {
            let s = grid.stride(axis);
            let m = grid.cells(axis);
            // reflection makes the one-sided central difference vanish
            if idx[axis] == 0 || idx[axis] == m {
                continue;
            }
            acc += (pv[(k + s) * d + axis] - pv[(k - s) * d + axis]) / (2.0 * h);
        }
        *o = acc;
    }
    ScalarField { grid, values: out }
}

/// Initial guess matching the boundary data: linear interpolation in 1D,
/// bilinear transfinite (Coons) interpolation of the four edges in 2D.
pub fn interp_boundary_lift(g: &BoundaryData) -> ScalarField {
    let grid = *g.grid();
    let mut full = vec![0.0; grid.len()];
    g.impose(&mut full);
    let m0 = grid.cells(0);
    let values = if grid.dim() == 1 {
        let (left, right) = (full[0], full[m0]);
        (0..=m0)
            .map(|i| {
                let s = i as f64 / m0 as f64;
                (1.0 - s) * left + s * right
            })
            .collect()
    } else {
        let m1 = grid.cells(1);
        let at = |i: usize, j: usize| full[grid.flat_index(i, j)];
        let mut out = vec![0.0; grid.len()];
        for i in 0..=m0 {
            let s = i as f64 / m0 as f64;
            for j in 0..=m1 {
                let t = j as f64 / m1 as f64;
                let edges = (1.0 - s) * at(0, j) + s * at(m0, j) + (1.0 - t) * at(i, 0)
                    + t * at(i, m1);
                let corners = (1.0 - s) * (1.0 - t) * at(0, 0)
                    + s * (1.0 - t) * at(m0, 0)
                    + (1.0 - s) * t * at(0, m1)
                    + s * t * at(m0, m1);
                out[grid.flat_index(i, j)] = edges - corners;
            }
        }
        out
    };
    let mut field = ScalarField { grid, values };
    g.impose(field.values_mut());
    field
}
