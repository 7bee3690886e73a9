//! Invariant self-test suite behind the `selftest` CLI subcommand.
//!
//! Each check is small enough to run in well under a second; together they
//! exercise the load-bearing invariants end to end without the full
//! acceptance suite.

use std::f64::consts::TAU;

use crate::diagnostics::relative_energy;
use crate::dynamics::{
    observables, rhs_euler_conservative, run_until, State, StepControl, StopConfig,
};
use crate::fields::{l2_norm, norms, Grid, ScalarField, VectorField};
use crate::noise::{phi_cutoff, NoiseModel, NoiseSpec, WienerPath};
use crate::thermo::PhysParams;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl Fn() -> Result<String, String>) -> CheckResult {
    match run() {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

/// Run every check; returns the individual results.
pub fn run_selftest() -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(check("parseval", || {
        let g = Grid::new(1, 64, TAU).map_err(|e| e.to_string())?;
        for seed in 0..20 {
            let f = norms::random_band_limited(g, 10, seed);
            let spectral = norms::sobolev_norm(&f, 0.0).map_err(|e| e.to_string())?;
            let quad = l2_norm(&f);
            if (spectral - quad).abs() > 1e-10 * (1.0 + quad) {
                return Err(format!("seed {seed}: {spectral} vs {quad}"));
            }
        }
        Ok("20 random band-limited fields".into())
    }));

    out.push(check("transform_roundtrip", || {
        let mut rng = crate::util::SmallRng::new(1);
        for _ in 0..2000 {
            let gamma = rng.range(1.05, 4.0);
            let a = rng.range(0.1, 5.0);
            let rho = rng.range(1e-6, 1e3);
            let p = PhysParams::new(gamma, a, 1.0, 0.0, 0.0, 0.0).map_err(|e| e.to_string())?;
            let back = p
                .r_to_rho(p.rho_to_r(rho).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            if (back - rho).abs() > 1e-12 * rho {
                return Err(format!("rho={rho} gamma={gamma} a={a}: back={back}"));
            }
        }
        Ok("2000 random (rho, gamma, a)".into())
    }));

    out.push(check("cutoff_plateaus", || {
        for r in [0.5, 2.0, 10.0] {
            if phi_cutoff(r, r) != 1.0 || phi_cutoff(r + 1.0, r) != 0.0 {
                return Err(format!("plateaus wrong at R={r}"));
            }
            if (phi_cutoff(r + 0.5, r) - 0.5).abs() > 1e-14 {
                return Err(format!("midpoint wrong at R={r}"));
            }
        }
        Ok("plateaus and midpoint".into())
    }));

    out.push(check("bridge_refinement", || {
        let p = WienerPath::new(11, 0.25, 2).map_err(|e| e.to_string())?;
        for level in 0..5u32 {
            for index in 0..32u64 {
                let parent = p.increment(0, level, index);
                let sum = p.increment(0, level + 1, 2 * index) + p.increment(0, level + 1, 2 * index + 1);
                let scale = parent.abs().max(1e-30);
                if (sum - parent).abs() > 8.0 * f64::EPSILON * scale {
                    return Err(format!("level {level} index {index}"));
                }
            }
        }
        Ok("children sum to parents across 5 levels".into())
    }));

    out.push(check("mass_conservation", || {
        let g = Grid::new(1, 64, TAU).map_err(|e| e.to_string())?;
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).map_err(|e| e.to_string())?;
        let s = State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.3 * x[0].sin()),
            VectorField::from_fn(g, |_, x| 0.2 * x[0].cos()),
            p,
        )
        .map_err(|e| e.to_string())?;
        let t = rhs_euler_conservative(&s).map_err(|e| e.to_string())?;
        let mean = t.scalar.integral();
        if mean.abs() > 1e-12 {
            return Err(format!("d/dt mass = {mean}"));
        }
        Ok(format!("d/dt mass = {mean:.2e}"))
    }));

    out.push(check("determinism", || {
        let g = Grid::new(1, 32, TAU).map_err(|e| e.to_string())?;
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).map_err(|e| e.to_string())?;
        let state = State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.05 * x[0].sin()),
            VectorField::zeros(g),
            p,
        )
        .map_err(|e| e.to_string())?;
        let stop = StopConfig {
            r_detector: 1e3,
            n_level: 1e9,
            s_order: 3.0,
            t_max: 0.02,
            cfl: 0.4,
        };
        let spec = NoiseSpec {
            modes: 2,
            alpha0: 0.1,
            support_lo: [2.0, 0.0],
            support_hi: [4.0, 0.0],
            cutoff: Some(8.0),
            seed: 3,
        };
        let model = NoiseModel::build(g, &spec, 1).map_err(|e| e.to_string())?;
        let path = WienerPath::new(5, 0.0025, 2).map_err(|e| e.to_string())?;
        let a = run_until(&state, &path, &model, &stop, &StepControl::default(), 1)
            .map_err(|e| e.to_string())?;
        let b = run_until(&state, &path, &model, &stop, &StepControl::default(), 1)
            .map_err(|e| e.to_string())?;
        let fa = a.final_state().density().map_err(|e| e.to_string())?;
        let fb = b.final_state().density().map_err(|e| e.to_string())?;
        for n in 0..g.node_count() {
            if fa.data()[n].to_bits() != fb.data()[n].to_bits() {
                return Err(format!("node {n} differs"));
            }
        }
        Ok("bit-identical repeat run".into())
    }));

    out.push(check("relative_energy_positivity", || {
        let g = Grid::new(1, 32, TAU).map_err(|e| e.to_string())?;
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).map_err(|e| e.to_string())?;
        for seed in 0..10 {
            let rho_r = norms::random_band_limited(g, 4, seed).map(|x| 1.0 + 0.1 * x);
            let rho_w = norms::random_band_limited(g, 4, 50 + seed).map(|x| 1.0 + 0.1 * x);
            let u = VectorField::from_components(vec![
                norms::random_band_limited(g, 4, 100 + seed).map(|x| 0.1 * x),
            ])
            .map_err(|e| e.to_string())?;
            let v = VectorField::from_components(vec![
                norms::random_band_limited(g, 4, 150 + seed).map(|x| 0.1 * x),
            ])
            .map_err(|e| e.to_string())?;
            let e = relative_energy(&rho_w, &v, &rho_r, &u, &p).map_err(|e| e.to_string())?;
            if e < 0.0 {
                return Err(format!("negative relative energy {e}"));
            }
            let self_e = relative_energy(&rho_w, &v, &rho_w, &v, &p).map_err(|e| e.to_string())?;
            if self_e.abs() > 1e-13 {
                return Err(format!("self distance {self_e}"));
            }
        }
        Ok("10 random pairs".into())
    }));

    out.push(check("energy_fixed_point", || {
        let g = Grid::new(1, 32, TAU).map_err(|e| e.to_string())?;
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).map_err(|e| e.to_string())?;
        let s = State::conservative(ScalarField::constant(g, 1.0), VectorField::zeros(g), p)
            .map_err(|e| e.to_string())?;
        let o = observables(&s).map_err(|e| e.to_string())?;
        if o.energy.abs() > 1e-14 {
            return Err(format!("constant state energy {}", o.energy));
        }
        Ok("constant state has zero energy".into())
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        for r in super::run_selftest() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
