//! Density maximum-principle envelopes.
//!
//! Along the continuity equation the density obeys
//!
//! ```text
//! inf ρ₀ · exp(−∫₀ᵗ ‖div u‖_∞ ds) ≤ ρ(t, x) ≤ sup ρ₀ · exp(+∫₀ᵗ ‖div u‖_∞ ds),
//! ```
//!
//! independent of the noise, which only enters the momentum balance. The
//! check below reconstructs the envelopes from the recorded `‖div u‖_∞`
//! series by left-point quadrature and compares the recorded density extrema
//! against them with the tolerance `τ = 10 · dt · (envelope width)`.

use crate::dynamics::Trajectory;

#[derive(Clone, Debug)]
pub struct MaxPrincipleReport {
    pub times: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub violated: bool,
}

pub fn max_principle_bounds(traj: &Trajectory) -> MaxPrincipleReport {
    let mut times = Vec::with_capacity(traj.records.len());
    let mut lower = Vec::with_capacity(traj.records.len());
    let mut upper = Vec::with_capacity(traj.records.len());
    let mut violated = false;
    let (rho_min0, rho_max0) = match traj.records.first() {
        Some(r) => (r.obs.min_rho, r.obs.max_rho),
        None => {
            return MaxPrincipleReport {
                times,
                lower,
                upper,
                violated: false,
            }
        }
    };
    let mut accum = 0.0f64;
    for rec in &traj.records {
        let lo = rho_min0 * (-accum).exp();
        let hi = rho_max0 * accum.exp();
        let tol = 10.0 * rec.dt * (hi - lo);
        times.push(rec.t);
        lower.push(lo);
        upper.push(hi);
        if rec.obs.min_rho < lo - tol || rec.obs.max_rho > hi + tol {
            violated = true;
        }
        accum += rec.dt * rec.obs.div_u_inf;
    }
    MaxPrincipleReport {
        times,
        lower,
        upper,
        violated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_until, State, StepControl, StopConfig};
    use crate::fields::{Grid, ScalarField, VectorField};
    use crate::noise::{NoiseModel, NoiseSpec, WienerPath};
    use crate::thermo::PhysParams;
    use std::f64::consts::TAU;

    #[test]
    fn constant_state_sits_inside_flat_envelopes() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let state = State::conservative(ScalarField::constant(g, 1.0), VectorField::zeros(g), p)
            .unwrap();
        let stop = StopConfig {
            r_detector: 10.0,
            n_level: 1e6,
            s_order: 3.0,
            t_max: 0.05,
            cfl: 0.4,
        };
        let path = WienerPath::new(1, 0.05 / 8.0, 0).unwrap();
        let model = NoiseModel::build(
            g,
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
        .unwrap();
        let traj = run_until(&state, &path, &model, &stop, &StepControl::default(), 1).unwrap();
        let rep = max_principle_bounds(&traj);
        assert!(!rep.violated);
        for (lo, hi) in rep.lower.iter().zip(&rep.upper) {
            assert!((lo - 1.0).abs() < 1e-12);
            assert!((hi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_acoustic_run_respects_envelopes() {
        let g = Grid::new(1, 64, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let state = State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.1 * x[0].sin()),
            VectorField::zeros(g),
            p,
        )
        .unwrap();
        let stop = StopConfig {
            r_detector: 100.0,
            n_level: 1e6,
            s_order: 3.0,
            t_max: 0.2,
            cfl: 0.3,
        };
        let path = WienerPath::new(1, 0.2 / 64.0, 0).unwrap();
        let model = NoiseModel::build(
            g,
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
        .unwrap();
        let traj = run_until(&state, &path, &model, &stop, &StepControl::default(), 1).unwrap();
        let rep = max_principle_bounds(&traj);
        assert!(!rep.violated);
        // Envelopes actually widen for this run.
        assert!(rep.upper.last().unwrap() > &1.1);
    }
}
