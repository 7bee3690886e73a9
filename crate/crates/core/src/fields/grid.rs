//! Torus grids and nodal scalar/vector fields.

use crate::error::{Error, Result};

/// Equispaced periodic grid on `[0, L)^dim`.
///
/// `n` is the number of nodes per axis and must be a power of two with
/// `n ≥ 8`; the same period `L` is used on every axis. Nodes are stored
/// row-major with the x index fastest: node `(i, j)` lives at flat index
/// `j * n + i` and position `(i Δx, j Δx)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    len: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, len: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Grid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::Grid(format!("torus period must be positive, got {len}")));
        }
        Ok(Self { dim, n, len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Torus period per axis.
    pub fn length(&self) -> f64 {
        self.len
    }

    /// Node spacing `Δx = L / N`.
    pub fn spacing(&self) -> f64 {
        self.len / self.n as f64
    }

    /// Total node count `N^dim`.
    pub fn node_count(&self) -> usize {
        match self.dim {
            1 => self.n,
            _ => self.n * self.n,
        }
    }

    /// Quadrature weight per node, `Δx^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Torus volume `L^dim`.
    pub fn volume(&self) -> f64 {
        self.len.powi(self.dim as i32)
    }

    /// Position of the node at flat index `idx`. The second coordinate is 0
    /// in one dimension.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let dx = self.spacing();
        match self.dim {
            1 => [idx as f64 * dx, 0.0],
            _ => {
                let i = idx % self.n;
                let j = idx / self.n;
                [i as f64 * dx, j as f64 * dx]
            }
        }
    }

    /// Signed integer mode index for FFT bin `j ∈ 0..N`
    /// (`0, 1, …, N/2−1, −N/2, …, −1`).
    pub fn mode_index(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Angular wavenumber `ξ = 2π k / L` for FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        std::f64::consts::TAU * self.mode_index(j) as f64 / self.len
    }
}

/// Real-valued grid function with one sample per node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.node_count()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            data: vec![c; grid.node_count()],
        }
    }

    /// Sample a function of position onto the grid.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let data = (0..grid.node_count()).map(|i| f(grid.coords(i))).collect();
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.node_count() {
            return Err(Error::Grid(format!(
                "field has {} samples, grid has {} nodes",
                data.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// True when every sample is finite.
    pub fn is_valid(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn ensure_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidField)
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += scale * other`, in place.
    pub fn axpy(&mut self, scale: f64, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    /// Torus integral by the Δx-weighted nodal sum.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * crate::util::ksum(self.data.iter().copied())
    }
}

/// Vector-valued grid function with `dim` components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Sample per-component functions of position.
    pub fn from_fn(grid: Grid, f: impl Fn(usize, [f64; 2]) -> f64) -> Self {
        let comps = (0..grid.dim())
            .map(|c| ScalarField::from_fn(grid, |x| f(c, x)))
            .collect();
        Self { grid, comps }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| Error::Grid("vector field needs at least one component".into()))?
            .grid();
        if comps.len() != grid.dim() {
            return Err(Error::Grid(format!(
                "vector field has {} components on a {}-dimensional grid",
                comps.len(),
                grid.dim()
            )));
        }
        if comps.iter().any(|c| c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn component(&self, c: usize) -> &ScalarField {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn is_valid(&self) -> bool {
        self.comps.iter().all(|c| c.is_valid())
    }

    pub fn ensure_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidField)
        }
    }

    /// Value at a node as a fixed pair; the second entry is 0 in 1-d.
    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 2] {
        match self.comps.len() {
            1 => [self.comps[0].data()[idx], 0.0],
            _ => [self.comps[0].data()[idx], self.comps[1].data()[idx]],
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            comps: self.comps.iter().map(|c| c.map(&f)).collect(),
        }
    }

    pub fn axpy(&mut self, scale: f64, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(scale, b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.comps.iter_mut() {
            c.scale(s);
        }
    }

    /// Nodewise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        for idx in 0..self.grid.node_count() {
            let v = self.at(idx);
            out.data_mut()[idx] = (v[0] * v[0] + v[1] * v[1]).sqrt();
        }
        out
    }
}
