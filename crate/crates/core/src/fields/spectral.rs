//! FFT-backed differentiation on the torus.
//!
//! Derivatives are computed in frequency space, `∂u/∂x = F⁻¹{iξ F{u}}`, with
//! the Nyquist mode zeroed so derivatives of real fields stay real. The 2/3
//! dealiasing filter used on quadratic products lives here as well.
//!
//! Plans are cached in an internally synchronized planner; execution itself
//! is lock-free, so field operations can run from multiple workers at once.

use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::fields::{Grid, ScalarField, VectorField};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft_forward(n)
}

fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft_inverse(n)
}

/// Unnormalized forward DFT of the nodal samples (1-d or 2-d row-major).
pub(crate) fn forward(grid: Grid, data: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = data.iter().map(|&x| Complex::new(x, 0.0)).collect();
    forward_in_place(grid, &mut buf);
    buf
}

fn forward_in_place(grid: Grid, buf: &mut [Complex<f64>]) {
    let n = grid.points_per_axis();
    let fft = plan_forward(n);
    match grid.dim() {
        1 => fft.process(buf),
        _ => {
            for row in buf.chunks_exact_mut(n) {
                fft.process(row);
            }
            let mut col = vec![Complex::new(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    col[j] = buf[j * n + i];
                }
                fft.process(&mut col);
                for j in 0..n {
                    buf[j * n + i] = col[j];
                }
            }
        }
    }
}

/// Inverse DFT normalized by `1/N^dim`; returns the real parts.
pub(crate) fn inverse(grid: Grid, mut buf: Vec<Complex<f64>>) -> Vec<f64> {
    let n = grid.points_per_axis();
    let fft = plan_inverse(n);
    match grid.dim() {
        1 => fft.process(&mut buf),
        _ => {
            for row in buf.chunks_exact_mut(n) {
                fft.process(row);
            }
            let mut col = vec![Complex::new(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    col[j] = buf[j * n + i];
                }
                fft.process(&mut col);
                for j in 0..n {
                    buf[j * n + i] = col[j];
                }
            }
        }
    }
    let scale = 1.0 / grid.node_count() as f64;
    buf.into_iter().map(|z| z.re * scale).collect()
}

/// Signed mode index along `axis` for the flat spectral index `idx`.
#[inline]
fn axis_bin(grid: Grid, idx: usize, axis: usize) -> usize {
    let n = grid.points_per_axis();
    match (grid.dim(), axis) {
        (1, _) => idx,
        (_, 0) => idx % n,
        _ => idx / n,
    }
}

/// Spectral partial derivative along `axis`.
pub fn derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    field.ensure_valid()?;
    let grid = field.grid();
    assert!(axis < grid.dim(), "axis {axis} out of range");
    let n = grid.points_per_axis();
    let mut spec = forward(grid, field.data());
    for (idx, z) in spec.iter_mut().enumerate() {
        let j = axis_bin(grid, idx, axis);
        if j == n / 2 {
            // Nyquist mode carries no usable derivative information for real
            // fields; keep the output real by dropping it.
            *z = Complex::new(0.0, 0.0);
        } else {
            let xi = grid.wavenumber(j);
            *z *= Complex::new(0.0, xi);
        }
    }
    ScalarField::from_vec(grid, inverse(grid, spec))
}

/// Spectral gradient of a scalar field.
pub fn gradient(field: &ScalarField) -> Result<VectorField> {
    let comps = (0..field.grid().dim())
        .map(|axis| derivative(field, axis))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

/// Spectral divergence of a vector field.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let grid = v.grid();
    let mut out = derivative(v.component(0), 0)?;
    for axis in 1..grid.dim() {
        let d = derivative(v.component(axis), axis)?;
        out.axpy(1.0, &d)?;
    }
    Ok(out)
}

/// Spectral Laplacian (divergence of the gradient).
pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    field.ensure_valid()?;
    let grid = field.grid();
    let n = grid.points_per_axis();
    let mut spec = forward(grid, field.data());
    for (idx, z) in spec.iter_mut().enumerate() {
        let mut k2 = 0.0;
        for axis in 0..grid.dim() {
            let j = axis_bin(grid, idx, axis);
            if j == n / 2 {
                *z = Complex::new(0.0, 0.0);
                k2 = 0.0;
                break;
            }
            let xi = grid.wavenumber(j);
            k2 += xi * xi;
        }
        *z *= -k2;
    }
    ScalarField::from_vec(grid, inverse(grid, spec))
}

/// All partial derivatives `∂_j v_i`, returned row-major (`i * dim + j`).
pub fn jacobian(v: &VectorField) -> Result<Vec<ScalarField>> {
    let dim = v.grid().dim();
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            out.push(derivative(v.component(i), j)?);
        }
    }
    Ok(out)
}

/// 2/3-rule dealiasing: zero every mode with `|k| > N/3` on any axis.
/// Applied to quadratic products before they are differentiated.
pub fn dealias(field: &ScalarField) -> Result<ScalarField> {
    field.ensure_valid()?;
    let grid = field.grid();
    let n = grid.points_per_axis();
    let kcut = (n / 3) as i64;
    let mut spec = forward(grid, field.data());
    for (idx, z) in spec.iter_mut().enumerate() {
        for axis in 0..grid.dim() {
            let j = axis_bin(grid, idx, axis);
            if grid.mode_index(j).abs() > kcut {
                *z = Complex::new(0.0, 0.0);
                break;
            }
        }
    }
    ScalarField::from_vec(grid, inverse(grid, spec))
}
