//! Convergence metrics for the inviscid limit.
//!
//! With `γ̄ = min{2, γ}`, the density gap is measured in
//! `L^γ̄((t₀,t₁) × torus)` and the momentum gap in `L^q` with
//! `q = 2γ̄/(γ̄+1)`; both tend to zero together with the relative energy.

use crate::error::{Error, Result};
use crate::dynamics::Trajectory;
use crate::util::Kahan;

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceMetrics {
    pub rho_gap: f64,
    pub momentum_gap: f64,
}

/// Windowed space-time gaps between a weak trajectory and a reference on a
/// shared recording grid. Errors when grids or recorded times differ.
pub fn convergence_metrics(
    weak: &Trajectory,
    reference: &Trajectory,
    window: (f64, f64),
) -> Result<ConvergenceMetrics> {
    if weak.grid != reference.grid {
        return Err(Error::GridMismatch);
    }
    let (t0, t1) = window;
    let pick = |traj: &Trajectory| -> Vec<usize> {
        traj.times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= t0 - 1e-12 && t <= t1 + 1e-12)
            .map(|(i, _)| i)
            .collect()
    };
    let iw = pick(weak);
    let ir = pick(reference);
    if iw.len() != ir.len() || iw.is_empty() {
        return Err(Error::MismatchedTimeGrids);
    }
    for (&a, &b) in iw.iter().zip(&ir) {
        if (weak.times[a] - reference.times[b]).abs() > 1e-9 * (1.0 + weak.times[a].abs()) {
            return Err(Error::MismatchedTimeGrids);
        }
    }

    let gamma_bar = weak.params.gamma.min(2.0);
    let q_exp = 2.0 * gamma_bar / (gamma_bar + 1.0);
    let vol = weak.grid.cell_volume();

    let mut rho_int = Kahan::new();
    let mut mom_int = Kahan::new();
    for (pos, (&a, &b)) in iw.iter().zip(&ir).enumerate() {
        // Left-point weight in time; a single shared instant gets weight 1.
        let dt = if iw.len() == 1 {
            1.0
        } else if pos + 1 < iw.len() {
            weak.times[iw[pos + 1]] - weak.times[a]
        } else {
            continue;
        };
        let rho_w = weak.states[a].density()?;
        let rho_r = reference.states[b].density()?;
        let m_w = weak.states[a].momentum()?;
        let m_r = reference.states[b].momentum()?;
        let mut sr = Kahan::new();
        let mut sm = Kahan::new();
        for n in 0..weak.grid.node_count() {
            sr.add((rho_w.data()[n] - rho_r.data()[n]).abs().powf(gamma_bar));
            let d = [
                m_w.at(n)[0] - m_r.at(n)[0],
                m_w.at(n)[1] - m_r.at(n)[1],
            ];
            sm.add((d[0] * d[0] + d[1] * d[1]).sqrt().powf(q_exp));
        }
        rho_int.add(dt * vol * sr.value());
        mom_int.add(dt * vol * sm.value());
    }
    Ok(ConvergenceMetrics {
        rho_gap: rho_int.value().powf(1.0 / gamma_bar),
        momentum_gap: mom_int.value().powf(1.0 / q_exp),
    })
}
