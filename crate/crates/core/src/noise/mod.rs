//! Truncated cylindrical Wiener process and the noise coefficient family.
//!
//! The driving process is `W = Σ_k e_k β_k` truncated to `K` modes. Each mode
//! acts through a coefficient `G_k(x, ρ, q)`; the shipped family is the linear
//! model `G_k(x, ρ, q) = a_k(x) ρ + A_k(x) q` with smooth compactly supported
//! shapes built from `C^∞` bumps and decay weights `α_k = α₀ k^{-2}`. The
//! shapes are normalized so that the sup-norms of `a_k`, `A_k` and their first
//! few spectral derivatives are bounded by the recorded `α_k`.
//!
//! For the symmetric formulation the noise is `𝔽_R(r, u) =
//! ϱ(r)^{-1} φ_R(ϱ) φ_R(ϱ^{-1}) G(ϱ, ϱu)` with a smooth cut-off `φ_R` that
//! disables the noise near vacuum and at very large densities.

pub mod wiener;

pub use wiener::WienerPath;

use crate::error::{Error, Result};
use crate::fields::{spectral, Grid, ScalarField, VectorField};
use crate::thermo::PhysParams;
use crate::util::{Kahan, SmallRng};

/// Axis-aligned box inside the torus on which every noise coefficient is
/// supported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl SupportBox {
    pub fn contains(&self, x: [f64; 2], dim: usize) -> bool {
        (0..dim).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }
}

/// Matrix-valued grid function (`dim × dim` entries per node, row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    grid: Grid,
    data: Vec<f64>,
}

impl MatrixField {
    pub fn zeros(grid: Grid) -> Self {
        let dim = grid.dim();
        Self {
            grid,
            data: vec![0.0; grid.node_count() * dim * dim],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn entry(&self, node: usize, i: usize, j: usize) -> f64 {
        let dim = self.grid.dim();
        self.data[node * dim * dim + i * dim + j]
    }

    #[inline]
    pub fn entry_mut(&mut self, node: usize, i: usize, j: usize) -> &mut f64 {
        let dim = self.grid.dim();
        &mut self.data[node * dim * dim + i * dim + j]
    }

    /// Apply the node-local matrix to a vector.
    #[inline]
    pub fn apply(&self, node: usize, q: [f64; 2]) -> [f64; 2] {
        match self.grid.dim() {
            1 => [self.entry(node, 0, 0) * q[0], 0.0],
            _ => [
                self.entry(node, 0, 0) * q[0] + self.entry(node, 0, 1) * q[1],
                self.entry(node, 1, 0) * q[0] + self.entry(node, 1, 1) * q[1],
            ],
        }
    }

    /// Nodewise Frobenius norm.
    pub fn frobenius(&self, node: usize) -> f64 {
        let dim = self.grid.dim();
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let e = self.entry(node, i, j);
                s += e * e;
            }
        }
        s.sqrt()
    }

    pub fn max_frobenius(&self) -> f64 {
        (0..self.grid.node_count()).fold(0.0f64, |m, n| m.max(self.frobenius(n)))
    }

    pub fn scale(&mut self, s: f64) {
        for x in self.data.iter_mut() {
            *x *= s;
        }
    }

    /// Component `(i, j)` as a scalar field.
    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        let mut f = ScalarField::zeros(self.grid);
        for n in 0..self.grid.node_count() {
            f.data_mut()[n] = self.entry(n, i, j);
        }
        f
    }
}

/// One linear noise mode: `G_k(x, ρ, q) = a_k(x) ρ + A_k(x) q`.
#[derive(Clone, Debug)]
pub struct LinearMode {
    pub a: VectorField,
    pub mat: MatrixField,
}

/// Nodewise coefficient: either a shipped linear mode or a user closure
/// `(x, ρ, q) → G_k` evaluated at each node.
pub enum ModeCoeff {
    Linear(LinearMode),
    Custom(Box<dyn Fn([f64; 2], f64, [f64; 2]) -> [f64; 2] + Send + Sync>),
}

impl std::fmt::Debug for ModeCoeff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeCoeff::Linear(_) => write!(f, "ModeCoeff::Linear"),
            ModeCoeff::Custom(_) => write!(f, "ModeCoeff::Custom"),
        }
    }
}

/// Truncated noise model: `K` modes, decay weights, support box and cut-off
/// level.
#[derive(Debug)]
pub struct NoiseModel {
    grid: Grid,
    modes: Vec<ModeCoeff>,
    alphas: Vec<f64>,
    support: SupportBox,
    cutoff: Option<f64>,
}

/// Configuration block for building the shipped model.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub modes: usize,
    pub alpha0: f64,
    pub support_lo: [f64; 2],
    pub support_hi: [f64; 2],
    /// Cut-off level `R`; `None` disables the cut-off factors.
    pub cutoff: Option<f64>,
    pub seed: u64,
}

/// `C^∞` bump `exp(1 − 1/(1 − d²))` for `d = |x − c|/w < 1`, else 0.
fn bump(x: [f64; 2], center: [f64; 2], width: f64, dim: usize) -> f64 {
    let mut d2 = 0.0;
    for a in 0..dim {
        let dx = x[a] - center[a];
        d2 += dx * dx;
    }
    let s = d2 / (width * width);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

impl NoiseModel {
    /// Build the shipped linear family on `grid`. Mode `k` (1-based) carries
    /// weight `α_k = α₀ k^{-2}`; bump centers and widths are placed
    /// deterministically (keyed on `spec.seed`) inside the support box, and
    /// each shape is normalized so its sup-norm together with its first
    /// `deriv_check` spectral derivatives is exactly `α_k`.
    pub fn build(grid: Grid, spec: &NoiseSpec, deriv_check: usize) -> Result<Self> {
        let dim = grid.dim();
        for a in 0..dim {
            if !(spec.support_lo[a] >= 0.0
                && spec.support_hi[a] > spec.support_lo[a]
                && spec.support_hi[a] <= grid.length())
            {
                return Err(Error::Config(format!(
                    "noise support box [{}, {}] must sit inside the torus [0, {}]",
                    spec.support_lo[a],
                    spec.support_hi[a],
                    grid.length()
                )));
            }
        }
        if let Some(r) = spec.cutoff {
            if !(r > 0.0) {
                return Err(Error::Config(format!("cutoff level must be positive, got {r}")));
            }
        }
        if !(spec.alpha0 >= 0.0 && spec.alpha0.is_finite()) {
            return Err(Error::Config(format!("alpha0 must be nonnegative, got {}", spec.alpha0)));
        }
        let support = SupportBox {
            lo: spec.support_lo,
            hi: spec.support_hi,
        };
        let mut rng = SmallRng::new(spec.seed ^ 0x6e6f_6973);
        let mut modes = Vec::with_capacity(spec.modes);
        let mut alphas = Vec::with_capacity(spec.modes);
        for k in 1..=spec.modes {
            let alpha = spec.alpha0 / (k * k) as f64;
            // Keep the bump interior so the shape vanishes identically on the
            // box boundary: center within the middle half, width at most the
            // distance to the boundary.
            let mut center = [0.0; 2];
            let mut max_w = f64::INFINITY;
            for a in 0..dim {
                let span = support.hi[a] - support.lo[a];
                center[a] = support.lo[a] + span * rng.range(0.3, 0.7);
                max_w = max_w
                    .min(center[a] - support.lo[a])
                    .min(support.hi[a] - center[a]);
            }
            let width = max_w * rng.range(0.6, 0.95);

            let shape = ScalarField::from_fn(grid, |x| bump(x, center, width, dim));
            // Direction pattern for a_k and matrix pattern for A_k cycle with k.
            let dir: [f64; 2] = match (dim, k % 4) {
                (1, _) => [if k % 2 == 0 { -1.0 } else { 1.0 }, 0.0],
                (_, 0) => [1.0, 0.0],
                (_, 1) => [0.0, 1.0],
                (_, 2) => [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
                _ => [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
            };
            let mut a_field = VectorField::zeros(grid);
            for c in 0..dim {
                for n in 0..grid.node_count() {
                    a_field.component_mut(c).data_mut()[n] = dir[c] * shape.data()[n];
                }
            }
            let mut mat = MatrixField::zeros(grid);
            for n in 0..grid.node_count() {
                let b = shape.data()[n];
                match (dim, k % 3) {
                    (1, _) => *mat.entry_mut(n, 0, 0) = b,
                    (_, 0) => {
                        *mat.entry_mut(n, 0, 0) = b;
                        *mat.entry_mut(n, 1, 1) = b;
                    }
                    (_, 1) => {
                        *mat.entry_mut(n, 0, 0) = b;
                        *mat.entry_mut(n, 1, 1) = -b;
                    }
                    _ => {
                        *mat.entry_mut(n, 0, 1) = b;
                        *mat.entry_mut(n, 1, 0) = -b;
                    }
                }
            }

            // Normalize: measure the largest sup-norm over the shape fields
            // and their spectral derivatives up to order deriv_check, then
            // scale so the measured bound equals alpha.
            let mut sup = 0.0f64;
            let mut track = |f: &ScalarField| -> Result<()> {
                sup = sup.max(crate::fields::sup_norm(f));
                let mut level = vec![f.clone()];
                for _ in 0..deriv_check {
                    let mut next = Vec::new();
                    for g in &level {
                        for axis in 0..dim {
                            let d = spectral::derivative(g, axis)?;
                            sup = sup.max(crate::fields::sup_norm(&d));
                            next.push(d);
                        }
                    }
                    level = next;
                }
                Ok(())
            };
            for c in 0..dim {
                track(a_field.component(c))?;
            }
            for i in 0..dim {
                for j in 0..dim {
                    track(&mat.component(i, j))?;
                }
            }
            let scale = if sup > 0.0 { alpha / sup } else { 0.0 };
            a_field.scale(scale);
            mat.scale(scale);

            modes.push(ModeCoeff::Linear(LinearMode { a: a_field, mat }));
            alphas.push(alpha);
        }
        Ok(Self {
            grid,
            modes,
            alphas,
            support,
            cutoff: spec.cutoff,
        })
    }

    /// Model from explicit linear modes; used by tests and by callers that
    /// need exact control over the coefficient shapes.
    pub fn from_linear_modes(
        grid: Grid,
        modes: Vec<LinearMode>,
        alphas: Vec<f64>,
        support: SupportBox,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        if modes.len() != alphas.len() {
            return Err(Error::Config("one alpha per mode required".into()));
        }
        Ok(Self {
            grid,
            modes: modes.into_iter().map(ModeCoeff::Linear).collect(),
            alphas,
            support,
            cutoff,
        })
    }

    /// Model with user-supplied nodewise coefficients. The recorded `alphas`
    /// are taken on trust; the structural invariants checked for the shipped
    /// family cannot be verified automatically for closures.
    pub fn from_custom(
        grid: Grid,
        modes: Vec<Box<dyn Fn([f64; 2], f64, [f64; 2]) -> [f64; 2] + Send + Sync>>,
        alphas: Vec<f64>,
        support: SupportBox,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        if modes.len() != alphas.len() {
            return Err(Error::Config("one alpha per mode required".into()));
        }
        Ok(Self {
            grid,
            modes: modes.into_iter().map(ModeCoeff::Custom).collect(),
            alphas,
            support,
            cutoff,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn support(&self) -> SupportBox {
        self.support
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// The shipped linear mode `k`, if that is what the model holds.
    pub fn linear_mode(&self, k: usize) -> Option<&LinearMode> {
        match self.modes.get(k) {
            Some(ModeCoeff::Linear(m)) => Some(m),
            _ => None,
        }
    }

    /// True when every mode is from the shipped linear family.
    pub fn is_linear(&self) -> bool {
        self.modes.iter().all(|m| matches!(m, ModeCoeff::Linear(_)))
    }

    /// Sum over modes of the squared sup Frobenius norm of `A_k`; the
    /// certified constant for the noise-mismatch remainder block of the
    /// linear family.
    pub fn mat_sq_sum(&self) -> Option<f64> {
        if !self.is_linear() {
            return None;
        }
        let mut s = 0.0;
        for m in &self.modes {
            if let ModeCoeff::Linear(lm) = m {
                let f = lm.mat.max_frobenius();
                s += f * f;
            }
        }
        Some(s)
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.modes.len() {
            Err(Error::ModeIndex {
                index: k,
                modes: self.modes.len(),
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn eval_mode(&self, k: usize, node: usize, x: [f64; 2], rho: f64, q: [f64; 2]) -> [f64; 2] {
        match &self.modes[k] {
            ModeCoeff::Linear(m) => {
                let a = m.a.at(node);
                let mq = m.mat.apply(node, q);
                [a[0] * rho + mq[0], a[1] * rho + mq[1]]
            }
            ModeCoeff::Custom(f) => f(x, rho, q),
        }
    }

    /// `G_k(·, ρ(·), q(·))` nodewise; vanishes outside the support box.
    pub fn apply_g(&self, rho: &ScalarField, q: &VectorField, k: usize) -> Result<VectorField> {
        self.check_mode(k)?;
        rho.ensure_valid()?;
        q.ensure_valid()?;
        if rho.grid() != self.grid || q.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = VectorField::zeros(self.grid);
        for node in 0..self.grid.node_count() {
            let x = self.grid.coords(node);
            let g = self.eval_mode(k, node, x, rho.data()[node], q.at(node));
            for c in 0..self.grid.dim() {
                out.component_mut(c).data_mut()[node] = g[c];
            }
        }
        Ok(out)
    }

    /// Conservative-formulation noise with the cut-off factors:
    /// `φ_R(ρ) φ_R(ρ^{-1}) G_k(ρ, q)`. Without a cut-off this is `G_k` itself.
    pub fn apply_g_cut(&self, rho: &ScalarField, q: &VectorField, k: usize) -> Result<VectorField> {
        let mut out = self.apply_g(rho, q, k)?;
        if let Some(r_level) = self.cutoff {
            for node in 0..self.grid.node_count() {
                let rho_n = rho.data()[node];
                let f = if rho_n > 0.0 {
                    phi_cutoff(rho_n, r_level) * phi_cutoff(1.0 / rho_n, r_level)
                } else {
                    0.0
                };
                for c in 0..self.grid.dim() {
                    out.component_mut(c).data_mut()[node] *= f;
                }
            }
        }
        Ok(out)
    }

    /// Symmetric-formulation noise
    /// `𝔽_R(r, u) e_k = ϱ^{-1} φ_R(ϱ) φ_R(ϱ^{-1}) G_k(ϱ, ϱ u)` with
    /// `ϱ = ϱ(r)`. Errors on vacuum in `r`.
    pub fn apply_f_r(
        &self,
        params: &PhysParams,
        r: &ScalarField,
        u: &VectorField,
        k: usize,
    ) -> Result<VectorField> {
        self.check_mode(k)?;
        r.ensure_valid()?;
        u.ensure_valid()?;
        if r.grid() != self.grid || u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = VectorField::zeros(self.grid);
        for node in 0..self.grid.node_count() {
            let x = self.grid.coords(node);
            let rho = params.r_to_rho(r.data()[node])?;
            let uv = u.at(node);
            let q = [rho * uv[0], rho * uv[1]];
            let g = self.eval_mode(k, node, x, rho, q);
            let mut f = 1.0 / rho;
            if let Some(r_level) = self.cutoff {
                f *= phi_cutoff(rho, r_level) * phi_cutoff(1.0 / rho, r_level);
            }
            for c in 0..self.grid.dim() {
                out.component_mut(c).data_mut()[node] = f * g[c];
            }
        }
        Ok(out)
    }

    /// Itô correction density `½ Σ_k ρ^{-1} |G_k(ρ, ρv)|²`; zero outside the
    /// support box, errors on vacuum inside it.
    pub fn ito_correction(&self, rho: &ScalarField, v: &VectorField) -> Result<ScalarField> {
        self.ito_density(rho, v, false)
    }

    /// Itô correction density for the cut-off operator
    /// `φ_R(ρ) φ_R(ρ^{-1}) G_k`; matches the noise the stepper injects.
    pub fn ito_correction_cut(&self, rho: &ScalarField, v: &VectorField) -> Result<ScalarField> {
        self.ito_density(rho, v, true)
    }

    fn ito_density(&self, rho: &ScalarField, v: &VectorField, with_cut: bool) -> Result<ScalarField> {
        rho.ensure_valid()?;
        v.ensure_valid()?;
        if rho.grid() != self.grid || v.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = ScalarField::zeros(self.grid);
        let dim = self.grid.dim();
        for node in 0..self.grid.node_count() {
            let x = self.grid.coords(node);
            if !self.support.contains(x, dim) {
                continue;
            }
            let rho_n = rho.data()[node];
            if rho_n <= 0.0 {
                return Err(Error::Vacuum);
            }
            let cut = match (with_cut, self.cutoff) {
                (true, Some(r_level)) => phi_cutoff(rho_n, r_level) * phi_cutoff(1.0 / rho_n, r_level),
                _ => 1.0,
            };
            let uv = v.at(node);
            let q = [rho_n * uv[0], rho_n * uv[1]];
            let mut acc = Kahan::new();
            for k in 0..self.modes.len() {
                let g = self.eval_mode(k, node, x, rho_n, q);
                acc.add(cut * cut * (g[0] * g[0] + g[1] * g[1]));
            }
            out.data_mut()[node] = 0.5 * acc.value() / rho_n;
        }
        Ok(out)
    }
}

/// Smooth cut-off `φ_R: [0, ∞) → [0, 1]`: identically 1 on `[0, R]`, 0 on
/// `[R+1, ∞)`, quintic smoothstep (C²) across the unit transition band.
pub fn phi_cutoff(y: f64, r: f64) -> f64 {
    debug_assert!(y >= 0.0 && r > 0.0);
    if y <= r {
        1.0
    } else if y >= r + 1.0 {
        0.0
    } else {
        let t = y - r;
        1.0 - (6.0 * t.powi(5) - 15.0 * t.powi(4) + 10.0 * t.powi(3))
    }
}
