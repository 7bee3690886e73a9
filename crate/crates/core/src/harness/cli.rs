//! Command implementations behind the `sceuler` binary.
//!
//! Exit codes: 0 on success, 1 on validation/config errors, 2 when a run is
//! halted by a numerical stop (vacuum or non-finite samples).

use std::path::{Path, PathBuf};

use crate::diagnostics::energy_audit;
use crate::dynamics::{run_until, StepControl, StopReason};
use crate::error::{Error, Result};
use crate::fields::snapshot::write_snapshot_file;
use crate::fields::{l2_norm_vec, ScalarField, VectorField};
use crate::harness::config::{build_run_config, parse_config_str, RawConfig, RunConfig};
use crate::harness::recipes::make_initial_state;
use crate::harness::report;
use crate::harness::storage::{load_trajectory, store_trajectory};
use crate::harness::sweep::inviscid_sweep;
use crate::harness::{plot, selftest};
use crate::noise::{NoiseModel, WienerPath};

/// Derivative order used when normalizing the shipped noise shapes;
/// the recorded α_k bound the sup-norms up to this many derivatives.
pub const NOISE_DERIV_CHECK: usize = 2;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL_STOP: i32 = 2;

/// Load a config file and apply `--override`s and `--seed`.
pub fn load_config(
    path: &Path,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<(RawConfig, RunConfig)> {
    let text = std::fs::read_to_string(path)?;
    let mut raw = parse_config_str(&text)?;
    for o in overrides {
        raw.apply_override(o)?;
    }
    if let Some(s) = seed {
        raw.apply_override(&format!("noise.seed={s}"))?;
    }
    let cfg = build_run_config(&raw)?;
    Ok((raw, cfg))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// `simulate`: one trajectory, diagnostics CSV, final snapshot, and (at
/// cadence 1) a stored trajectory directory for later auditing.
pub fn cmd_simulate(raw: &RawConfig, cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    ensure_dir(out_dir)?;
    let model = NoiseModel::build(cfg.grid, &cfg.noise, NOISE_DERIV_CHECK)?;
    let path = WienerPath::new(cfg.noise.seed, cfg.run.base_dt, cfg.noise.modes)?;
    let state = make_initial_state(cfg.grid, cfg.phys, &cfg.recipe)?;
    let traj = run_until(
        &state,
        &path,
        &model,
        &cfg.stop,
        &StepControl::default(),
        cfg.run.cadence,
    )?;

    std::fs::write(out_dir.join("diag.csv"), report::diagnostics_csv(&traj)?)?;
    let last = traj.final_state();
    if last.is_valid() {
        let rho = last.density()?;
        let v = last.velocity()?;
        let mut comps: Vec<&[f64]> = vec![rho.data()];
        for c in 0..cfg.grid.dim() {
            comps.push(v.component(c).data());
        }
        write_snapshot_file(&out_dir.join("final.fld"), cfg.grid, last.time, &comps)?;
    }
    if traj.record_full {
        store_trajectory(&out_dir.join("traj"), raw, &traj)?;
    }
    println!(
        "simulate: {} steps, stop={} at t={:.6}",
        traj.records.len(),
        traj.stop.as_str(),
        traj.stop_time
    );
    println!("wrote {}", out_dir.join("diag.csv").display());
    Ok(match traj.stop {
        StopReason::Vacuum | StopReason::NonFinite => EXIT_NUMERICAL_STOP,
        _ => EXIT_OK,
    })
}

/// `sweep`: the viscosity sweep with CSV and SVG outputs.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    ensure_dir(out_dir)?;
    let res = inviscid_sweep(cfg)?;
    std::fs::write(out_dir.join("sweep.csv"), report::sweep_csv(&res))?;
    std::fs::write(out_dir.join("series.csv"), report::series_csv(&res.series))?;
    std::fs::write(out_dir.join("sweep.svg"), plot::sweep_svg(&res))?;
    println!("sweep: window [0, {:.4}], c_R = {:.3}", res.window_end, res.c_r);
    println!("{:>12} {:>18} {:>12} {:>10}", "eps", "sup mean rel-E", "std err", "excluded");
    for e in &res.entries {
        println!(
            "{:>12.3e} {:>18.6e} {:>12.3e} {:>10}",
            e.eps, e.sup_mean_rel_energy, e.std_err, e.excluded
        );
    }
    println!("wrote {}", out_dir.join("sweep.csv").display());
    Ok(EXIT_OK)
}

/// `audit`: recompute the energy ledger of a stored trajectory.
pub fn cmd_audit(traj_dir: &Path, out_dir: &Path) -> Result<i32> {
    ensure_dir(out_dir)?;
    let (raw, traj) = load_trajectory(traj_dir)?;
    let cfg = build_run_config(&raw)?;
    let model = NoiseModel::build(cfg.grid, &cfg.noise, NOISE_DERIV_CHECK)?;
    let ledger = energy_audit(&traj, &model)?;
    std::fs::write(out_dir.join("ledger.csv"), report::ledger_csv(&ledger))?;
    let max_defect = ledger.iter().map(|e| e.defect.abs()).fold(0.0f64, f64::max);
    println!("audit: {} entries, max |defect| = {max_defect:.6e}", ledger.len());
    println!("wrote {}", out_dir.join("ledger.csv").display());
    Ok(EXIT_OK)
}

/// `convergence`: temporal Richardson triple and spatial doubling study on
/// the deterministic part of the configured problem.
pub fn cmd_convergence(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    ensure_dir(out_dir)?;
    let (temporal_order, spatial_drop) = convergence_study(cfg)?;
    let mut csv = String::from("# SCECONV v1\nquantity,value\n");
    csv.push_str(&format!("temporal_order,{temporal_order:.6}\n"));
    csv.push_str(&format!("spatial_error_drop,{spatial_drop:.6}\n"));
    std::fs::write(out_dir.join("convergence.csv"), csv)?;
    println!("temporal order (Heun, frozen path): {temporal_order:.3}");
    println!("spatial error drop per grid doubling: {spatial_drop:.1}x");
    println!("wrote {}", out_dir.join("convergence.csv").display());
    Ok(EXIT_OK)
}

/// Zero-noise self-convergence measurements used by `convergence` and the
/// acceptance suite: returns (temporal order, spatial error drop factor).
pub fn convergence_study(cfg: &RunConfig) -> Result<(f64, f64)> {
    let ctl = StepControl {
        disable_noise: true,
        ..StepControl::default()
    };
    let mut phys = cfg.phys;
    phys.epsilon = 0.0;
    let quiet = NoiseModel::build(cfg.grid, &crate::noise::NoiseSpec { modes: 0, alpha0: 0.0, ..cfg.noise.clone() }, 1)?;

    // Temporal: Richardson triple at dt, dt/2, dt/4 on the configured grid.
    let state = {
        let mut s = make_initial_state(cfg.grid, phys, &cfg.recipe)?;
        s.params = phys;
        s
    };
    let run_dt = |halvings: u32| -> Result<VectorField> {
        let path = WienerPath::new(0, cfg.run.base_dt / (1u64 << halvings) as f64, 0)?;
        let traj = run_until(&state, &path, &quiet, &cfg.stop, &ctl, usize::MAX / 2)?;
        if traj.stop != StopReason::None {
            return Err(Error::Numerical(format!(
                "convergence run stopped early: {}",
                traj.stop.as_str()
            )));
        }
        traj.final_state().momentum()
    };
    let y0 = run_dt(0)?;
    let y1 = run_dt(1)?;
    let y2 = run_dt(2)?;
    let d01 = {
        let mut d = y0.clone();
        d.axpy(-1.0, &y1)?;
        l2_norm_vec(&d)
    };
    let d12 = {
        let mut d = y1.clone();
        d.axpy(-1.0, &y2)?;
        l2_norm_vec(&d)
    };
    if d12 <= 0.0 {
        return Err(Error::Numerical("temporal differences vanished".into()));
    }
    let temporal_order = (d01 / d12).log2();

    // Spatial: N and 2N against a 4N reference, restricted to common nodes.
    let n0 = cfg.grid.points_per_axis();
    let run_n = |n: usize| -> Result<ScalarField> {
        let grid = crate::fields::Grid::new(cfg.grid.dim(), n, cfg.grid.length())?;
        let mut recipe = cfg.recipe.clone();
        recipe.mode = cfg.recipe.mode;
        let s = make_initial_state(grid, phys, &recipe)?;
        let path = WienerPath::new(0, cfg.run.base_dt / 4.0, 0)?;
        let quiet_n = NoiseModel::build(
            grid,
            &crate::noise::NoiseSpec {
                modes: 0,
                alpha0: 0.0,
                ..cfg.noise.clone()
            },
            1,
        )?;
        let traj = run_until(&s, &path, &quiet_n, &cfg.stop, &ctl, usize::MAX / 2)?;
        if traj.stop != StopReason::None {
            return Err(Error::Numerical("spatial run stopped early".into()));
        }
        traj.final_state().density()
    };
    let restrict = |fine: &ScalarField, coarse_n: usize| -> ScalarField {
        let grid = crate::fields::Grid::new(cfg.grid.dim(), coarse_n, cfg.grid.length()).unwrap();
        ScalarField::from_fn(grid, |x| {
            let nf = fine.grid().points_per_axis();
            let i = ((x[0] / fine.grid().spacing()).round() as usize) % nf;
            match grid.dim() {
                1 => fine.data()[i],
                _ => {
                    let j = ((x[1] / fine.grid().spacing()).round() as usize) % nf;
                    fine.data()[j * nf + i]
                }
            }
        })
    };
    let ya = run_n(n0)?;
    let yb = run_n(2 * n0)?;
    let yref = run_n(4 * n0)?;
    let ea = crate::fields::l2_norm(&ya.zip_with(&restrict(&yref, n0), |a, b| a - b)?);
    let eb = crate::fields::l2_norm(&yb.zip_with(&restrict(&yref, 2 * n0), |a, b| a - b)?);
    let spatial_drop = if eb > 0.0 { ea / eb } else { f64::INFINITY };
    Ok((temporal_order, spatial_drop))
}

/// `selftest`: run the invariant suite, print one line per check.
pub fn cmd_selftest() -> i32 {
    let mut ok = true;
    for r in selftest::run_selftest() {
        println!(
            "{} {} ({})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        ok &= r.passed;
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

/// Map an error to the documented exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Vacuum | Error::NonFiniteLike => EXIT_NUMERICAL_STOP,
        _ => EXIT_VALIDATION,
    }
}

/// Output directory default: `./out`.
pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
