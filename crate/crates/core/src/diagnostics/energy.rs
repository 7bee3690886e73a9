//! Energy ledger.
//!
//! For each recorded time the ledger carries the kinetic and potential
//! energies, the accumulated viscous dissipation `∫₀ᵗ ε ∫ S(∇v):∇v`, the
//! noise work `Σ_k ∫₀ᵗ (∫ G_k·v dx) dβ_k` evaluated as a left-point Itô sum
//! over the stored increments, and the Itô correction
//! `½ Σ_k ∫₀ᵗ ∫ ρ^{-1}|G_k|²`. The defect
//!
//! ```text
//! defect(t) = E(t) + dissipation(t) − E(0) − noise_work(t) − ito(t)
//! ```
//!
//! vanishes for the continuous dynamics; discretely it converges to zero at
//! first order in dt and its Monte-Carlo mean is centered at zero.
//!
//! Dissipation is accumulated with the trapezoid rule between recorded steps;
//! the stochastic sums are left-point by construction (Itô).

use crate::error::{Error, Result};
use crate::dynamics::{stress_dissipation_density, Trajectory};
use crate::noise::NoiseModel;
use crate::util::Kahan;

#[derive(Clone, Copy, Debug)]
pub struct LedgerEntry {
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `∫₀ᵗ ε ∫ S(∇v):∇v dx ds`, nondecreasing.
    pub dissipation_accum: f64,
    /// `Σ_k ∫₀ᵗ (∫ G_k·v dx) dβ_k` as a left-point sum.
    pub noise_work_accum: f64,
    /// `½ Σ_k ∫₀ᵗ ∫ ρ^{-1} |G_k|² dx ds`, nondecreasing.
    pub ito_accum: f64,
    pub defect: f64,
}

/// Recompute every ledger term from the stored states and increments.
/// Requires a fully recorded trajectory (cadence 1).
pub fn energy_audit(traj: &Trajectory, model: &NoiseModel) -> Result<Vec<LedgerEntry>> {
    if !traj.record_full || traj.states.len() < traj.records.len() + 1 {
        return Err(Error::PathNotRecorded);
    }
    for rec in &traj.records {
        if rec.increments.len() != model.mode_count() {
            return Err(Error::PathNotRecorded);
        }
    }
    let p = &traj.params;
    let vol = traj.grid.cell_volume();
    let n_states = traj.states.len();

    // Pass 1: per-state energies and dissipation rates.
    let mut kinetic = Vec::with_capacity(n_states);
    let mut potential = Vec::with_capacity(n_states);
    let mut diss_rate = Vec::with_capacity(n_states);
    for state in &traj.states {
        let rho = state.density()?;
        let v = state.velocity()?;
        let mut kin = Kahan::new();
        let mut pot = Kahan::new();
        for n in 0..traj.grid.node_count() {
            let r = rho.data()[n];
            let vel = v.at(n);
            kin.add(0.5 * r * (vel[0] * vel[0] + vel[1] * vel[1]));
            pot.add(p.h_potential(r, p.rho_bar)?);
        }
        kinetic.push(vol * kin.value());
        potential.push(vol * pot.value());
        diss_rate.push(if p.epsilon > 0.0 {
            p.epsilon * stress_dissipation_density(&v, p)?.integral()
        } else {
            0.0
        });
    }

    // Pass 2: accumulate. Dissipation by the trapezoid rule between recorded
    // states; the stochastic sums are left-point (Itô) by construction.
    let e0 = kinetic[0] + potential[0];
    let mut dissipation = Kahan::new();
    let mut noise_work = Kahan::new();
    let mut ito = Kahan::new();
    let mut out = Vec::with_capacity(n_states);
    for i in 0..n_states {
        let energy = kinetic[i] + potential[i];
        out.push(LedgerEntry {
            t: traj.states[i].time,
            kinetic: kinetic[i],
            potential: potential[i],
            dissipation_accum: dissipation.value(),
            noise_work_accum: noise_work.value(),
            ito_accum: ito.value(),
            defect: energy + dissipation.value() - e0 - noise_work.value() - ito.value(),
        });
        if let Some(rec) = traj.records.get(i) {
            if p.epsilon > 0.0 && i + 1 < n_states {
                dissipation.add(0.5 * (diss_rate[i] + diss_rate[i + 1]) * rec.dt);
            }
            if model.mode_count() > 0 {
                let state = &traj.states[i];
                let rho = state.density()?;
                let v = state.velocity()?;
                let q = state.momentum()?;
                for (k, &db) in rec.increments.iter().enumerate() {
                    let gk = model.apply_g_cut(&rho, &q, k)?;
                    let mut dot = Kahan::new();
                    for n in 0..traj.grid.node_count() {
                        let g = gk.at(n);
                        let vel = v.at(n);
                        dot.add(g[0] * vel[0] + g[1] * vel[1]);
                    }
                    noise_work.add(vol * dot.value() * db);
                }
                let corr = model.ito_correction_cut(&rho, &v)?;
                ito.add(corr.integral() * rec.dt);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_until, State, StepControl, StopConfig};
    use crate::fields::{Grid, ScalarField, VectorField};
    use crate::noise::{NoiseModel, NoiseSpec, WienerPath};
    use crate::thermo::PhysParams;
    use std::f64::consts::TAU;

    fn quiet_model(grid: Grid) -> NoiseModel {
        NoiseModel::build(
            grid,
            &NoiseSpec {
                modes: 0,
                alpha0: 0.0,
                support_lo: [2.0, 0.0],
                support_hi: [4.0, 0.0],
                cutoff: None,
                seed: 0,
            },
            1,
        )
        .unwrap()
    }

    fn smooth_state(g: Grid, p: PhysParams) -> State {
        State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.05 * x[0].sin()),
            VectorField::from_fn(g, |_, x| 0.05 * x[0].cos()),
            p,
        )
        .unwrap()
    }

    fn run_deterministic(n_steps: u32, eps: f64) -> Vec<LedgerEntry> {
        let g = Grid::new(1, 64, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 1.0, eps).unwrap();
        let state = smooth_state(g, p);
        let t_end = 0.05;
        let stop = StopConfig {
            r_detector: 1e3,
            n_level: 1e9,
            s_order: 3.0,
            t_max: t_end,
            cfl: 0.9,
        };
        let path = WienerPath::new(0, t_end / n_steps as f64, 0).unwrap();
        let model = quiet_model(g);
        let traj = run_until(&state, &path, &model, &stop, &StepControl::default(), 1).unwrap();
        energy_audit(&traj, &model).unwrap()
    }

    #[test]
    fn deterministic_defect_shrinks_at_first_order() {
        // |defect(t)| <= C dt: halving dt at least halves the defect.
        let coarse = run_deterministic(512, 0.0);
        let fine = run_deterministic(1024, 0.0);
        let d_coarse = coarse.iter().map(|e| e.defect.abs()).fold(0.0f64, f64::max);
        let d_fine = fine.iter().map(|e| e.defect.abs()).fold(0.0f64, f64::max);
        assert!(d_fine <= 0.6 * d_coarse, "coarse={d_coarse:.3e} fine={d_fine:.3e}");
        assert!(d_coarse < 1e-6);
    }

    #[test]
    fn viscous_run_dissipates() {
        let entries = run_deterministic(512, 0.5);
        let last = entries.last().unwrap();
        assert!(last.dissipation_accum > 0.0);
        // E(t) + dissipation <= E(0) + tiny slack.
        let e0 = entries[0].kinetic + entries[0].potential;
        for e in &entries {
            assert!(
                e.kinetic + e.potential + e.dissipation_accum <= e0 * (1.0 + 1e-8),
                "t={}: energy balance exceeded",
                e.t
            );
        }
        // Accumulators are nondecreasing.
        for w in entries.windows(2) {
            assert!(w[1].dissipation_accum >= w[0].dissipation_accum);
            assert!(w[1].ito_accum >= w[0].ito_accum);
        }
    }

    #[test]
    fn audit_requires_full_recording() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let state = smooth_state(g, p);
        let stop = StopConfig {
            r_detector: 1e3,
            n_level: 1e9,
            s_order: 3.0,
            t_max: 0.02,
            cfl: 0.4,
        };
        let path = WienerPath::new(0, 0.02 / 8.0, 0).unwrap();
        let model = quiet_model(g);
        let traj = run_until(&state, &path, &model, &stop, &StepControl::default(), 2).unwrap();
        assert!(matches!(
            energy_audit(&traj, &model),
            Err(Error::PathNotRecorded)
        ));
    }

    #[test]
    fn stochastic_mean_defect_is_centered() {
        // Noise on, eps = 0, a handful of paths: the mean defect is within
        // three standard errors of zero (the noise-work term is a martingale).
        let g = Grid::new(1, 64, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let spec = NoiseSpec {
            modes: 2,
            alpha0: 0.2,
            support_lo: [2.0, 0.0],
            support_hi: [4.0, 0.0],
            cutoff: Some(10.0),
            seed: 21,
        };
        let model = NoiseModel::build(g, &spec, 1).unwrap();
        let t_end = 0.05;
        let stop = StopConfig {
            r_detector: 1e3,
            n_level: 1e9,
            s_order: 3.0,
            t_max: t_end,
            cfl: 0.4,
        };
        let m_paths = 24;
        let mut defects = Vec::new();
        for seed in 0..m_paths {
            let path = WienerPath::new(1000 + seed, t_end / 64.0, 2).unwrap();
            let state = smooth_state(g, p);
            let traj = run_until(&state, &path, &model, &stop, &StepControl::default(), 1).unwrap();
            let ledger = energy_audit(&traj, &model).unwrap();
            defects.push(ledger.last().unwrap().defect);
        }
        let n = defects.len() as f64;
        let mean = defects.iter().sum::<f64>() / n;
        let var = defects.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(mean.abs() <= 3.0 * se.max(1e-12), "mean={mean:.3e} se={se:.3e}");
    }
}
