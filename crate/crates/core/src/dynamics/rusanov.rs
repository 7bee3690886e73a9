//! First-order Rusanov finite-volume scheme for the 1-d Euler system.
//!
//! Deliberately a completely independent discretization: no FFTs, no
//! dealiasing, local fluxes only. It serves as a cross-validation oracle for
//! the pseudo-spectral solver in smooth regimes and stays usable past shock
//! formation.

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::dynamics::{Formulation, State};
use crate::thermo::PhysParams;

fn flux(p: &PhysParams, rho: f64, m: f64) -> (f64, f64) {
    let u = m / rho;
    (m, m * u + p.a * rho.powf(p.gamma))
}

fn wave_speed(p: &PhysParams, rho: f64, m: f64) -> f64 {
    (m / rho).abs() + (p.a * p.gamma * rho.powf(p.gamma - 1.0)).sqrt()
}

/// Semi-discrete Rusanov right-hand side on periodic cells.
pub fn rusanov_rhs(p: &PhysParams, rho: &[f64], m: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rho.len();
    let mut f_rho = vec![0.0; n + 1]; // interface i+1/2 stored at i+1
    let mut f_m = vec![0.0; n + 1];
    for i in 0..n {
        let j = (i + 1) % n;
        let (fl1, fl2) = flux(p, rho[i], m[i]);
        let (fr1, fr2) = flux(p, rho[j], m[j]);
        let s = wave_speed(p, rho[i], m[i]).max(wave_speed(p, rho[j], m[j]));
        f_rho[i + 1] = 0.5 * (fl1 + fr1) - 0.5 * s * (rho[j] - rho[i]);
        f_m[i + 1] = 0.5 * (fl2 + fr2) - 0.5 * s * (m[j] - m[i]);
    }
    f_rho[0] = f_rho[n];
    f_m[0] = f_m[n];
    let mut d_rho = vec![0.0; n];
    let mut d_m = vec![0.0; n];
    for i in 0..n {
        d_rho[i] = -(f_rho[i + 1] - f_rho[i]) / dx;
        d_m[i] = -(f_m[i + 1] - f_m[i]) / dx;
    }
    (d_rho, d_m)
}

/// Run the deterministic Rusanov scheme to time `t_end` with Heun steps under
/// the given CFL number. 1-d conservative states only.
pub fn run_rusanov_to(state0: &State, t_end: f64, cfl: f64) -> Result<State> {
    let grid = state0.grid();
    if grid.dim() != 1 {
        return Err(Error::Config("finite-volume oracle is one-dimensional".into()));
    }
    let (rho0, m0) = match &state0.form {
        Formulation::Conservative { rho, m } => (rho.clone(), m.clone()),
        _ => return Err(Error::Config("conservative formulation required".into())),
    };
    let p = state0.params;
    let dx = grid.spacing();
    let mut rho = rho0.into_data();
    let mut m = m0.component(0).clone().into_data();
    let mut t = 0.0;
    while t < t_end - 1e-14 {
        let smax = rho
            .iter()
            .zip(&m)
            .map(|(&r, &q)| wave_speed(&p, r, q))
            .fold(0.0f64, f64::max);
        let mut dt = if smax > 1e-14 { cfl * dx / smax } else { cfl * dx };
        if t + dt > t_end {
            dt = t_end - t;
        }
        let (k1r, k1m) = rusanov_rhs(&p, &rho, &m, dx);
        let rho_mid: Vec<f64> = rho.iter().zip(&k1r).map(|(&r, &k)| r + dt * k).collect();
        let m_mid: Vec<f64> = m.iter().zip(&k1m).map(|(&q, &k)| q + dt * k).collect();
        let (k2r, k2m) = rusanov_rhs(&p, &rho_mid, &m_mid, dx);
        for i in 0..rho.len() {
            rho[i] += 0.5 * dt * (k1r[i] + k2r[i]);
            m[i] += 0.5 * dt * (k1m[i] + k2m[i]);
        }
        t += dt;
    }
    let mut out = State::conservative(
        ScalarField::from_vec(grid, rho)?,
        VectorField::from_components(vec![ScalarField::from_vec(grid, m)?])?,
        p,
    )?;
    out.time = t_end;
    Ok(out)
}
