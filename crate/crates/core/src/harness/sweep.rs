//! Viscosity sweep on a shared Wiener path family.
//!
//! For every seed one inviscid reference trajectory is computed, then one
//! viscous trajectory per entry of the ε list, all consuming the *same*
//! counter-keyed Brownian increments. The quantity reported per ε is the
//! sup over the comparison window of the Monte-Carlo mean relative energy
//! between the viscous run and the reference, together with its standard
//! error, a Gronwall-type certificate, and an energy-ledger summary.
//!
//! The comparison window is `[0, min over runs of the stop time]`: detector
//! hits truncate the window; vacuum or non-finite breakdowns exclude the
//! path from the mean (more than 10% exclusions fail the sweep).

use crate::error::{Error, Result};
use crate::diagnostics::{energy_audit, relative_energy_states};
use crate::dynamics::{run_until, State, StepControl, StopReason, Trajectory};
use crate::harness::config::RunConfig;
use crate::harness::recipes::{make_ill_prepared, make_initial_state};
use crate::noise::{NoiseModel, WienerPath};
use crate::util::Kahan;

/// Aggregated result for one viscosity value.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub eps: f64,
    /// `sup_t` over the window of the Monte-Carlo mean relative energy.
    pub sup_mean_rel_energy: f64,
    /// Standard error of the mean at the sup-attaining time.
    pub std_err: f64,
    /// Gronwall certificate `c_R (E(0) + ε) exp(c_R t_window)`.
    pub gronwall: f64,
    pub paths_used: usize,
    pub excluded: usize,
    /// Mean final ledger defect across paths (when auditing is on).
    pub defect_mean: f64,
    /// Standard error of the final ledger defect.
    pub defect_se: f64,
}

/// Mean relative-energy time series for one viscosity value.
#[derive(Clone, Debug)]
pub struct SweepSeries {
    pub eps: f64,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
}

#[derive(Debug)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub series: Vec<SweepSeries>,
    /// Comparison window actually used.
    pub window_end: f64,
    /// The Gronwall constant extracted from the reference runs.
    pub c_r: f64,
}

/// Per-seed payload computed by a worker.
struct PathResult {
    /// Relative-energy samples per ε, on the shared recording grid
    /// (empty when the member run broke down).
    rel_energy: Vec<Option<Vec<f64>>>,
    /// Final ledger defect per ε (None when auditing is off or the run broke).
    defect: Vec<Option<f64>>,
    /// Stop time of the earliest-stopping member (reference included).
    window_end: f64,
    /// Gronwall constant candidate from the reference run.
    c_r: f64,
    /// Initial relative energies per ε.
    rel0: Vec<f64>,
    /// True when the reference itself broke down (whole seed excluded).
    ref_broken: bool,
}

fn is_breakdown(stop: StopReason) -> bool {
    matches!(stop, StopReason::Vacuum | StopReason::NonFinite)
}

fn recorded_times(traj: &Trajectory) -> &[f64] {
    &traj.times
}

fn run_one_seed(cfg: &RunConfig, model: &NoiseModel, seed: u64) -> Result<PathResult> {
    let path = WienerPath::new(seed, cfg.run.base_dt, cfg.noise.modes)?;
    let ctl = StepControl::default();

    let base = make_initial_state(cfg.grid, cfg.phys, &cfg.recipe)?;
    let rho0 = base.density()?;
    let (rho_minus, rho_plus) = (0.5 * rho0.min(), 2.0 * rho0.max());

    // Reference: inviscid run from the base data.
    let mut ref_phys = cfg.phys;
    ref_phys.epsilon = 0.0;
    let mut ref_state = base.clone();
    ref_state.params = ref_phys;
    let ref_traj = run_until(&ref_state, &path, model, &cfg.stop, &ctl, cfg.run.cadence)?;
    if is_breakdown(ref_traj.stop) {
        return Ok(PathResult {
            rel_energy: vec![None; cfg.sweep.epsilons.len()],
            defect: vec![None; cfg.sweep.epsilons.len()],
            window_end: 0.0,
            c_r: 0.0,
            rel0: vec![0.0; cfg.sweep.epsilons.len()],
            ref_broken: true,
        });
    }
    let mut window_end = ref_traj.stop_time;

    // Gronwall constant from the reference sup-norms: convective and
    // pressure certificates plus the linear-noise constant.
    let mut c_r = 0.0f64;
    for rec in &ref_traj.records {
        c_r = c_r.max(2.0 * rec.lipschitz + (cfg.phys.gamma - 1.0) * rec.obs.div_u_inf);
    }
    c_r += model.mat_sq_sum().unwrap_or(0.0);

    let mut rel_energy = Vec::with_capacity(cfg.sweep.epsilons.len());
    let mut defects = Vec::with_capacity(cfg.sweep.epsilons.len());
    let mut rel0 = Vec::with_capacity(cfg.sweep.epsilons.len());
    let mut members: Vec<Option<Trajectory>> = Vec::with_capacity(cfg.sweep.epsilons.len());

    for &eps in &cfg.sweep.epsilons {
        let mut phys = cfg.phys;
        phys.epsilon = eps;
        let mut state = if cfg.sweep.ill_prepared {
            make_ill_prepared(eps, &base, rho_minus, rho_plus)?
        } else {
            base.clone()
        };
        state.params = phys;
        rel0.push(relative_energy_states(&state, &ref_state)?);
        let traj = run_until(&state, &path, model, &cfg.stop, &ctl, cfg.run.cadence)?;
        if is_breakdown(traj.stop) {
            members.push(None);
        } else {
            window_end = window_end.min(traj.stop_time);
            members.push(Some(traj));
        }
    }

    let record_dt = cfg.run.base_dt * cfg.run.cadence as f64;
    let find_at = |traj: &Trajectory, t: f64| -> Option<usize> {
        recorded_times(traj)
            .iter()
            .position(|&tr| (tr - t).abs() <= 1e-9 * (1.0 + t.abs()))
    };
    for member in &members {
        match member {
            None => {
                rel_energy.push(None);
                defects.push(None);
            }
            Some(traj) => {
                // Walk the shared cadence grid up to the pairwise window;
                // both runs recorded states at exactly these times.
                let local_window = traj.stop_time.min(ref_traj.stop_time);
                let mut samples = Vec::new();
                let mut ti = 0usize;
                loop {
                    let t = ti as f64 * record_dt;
                    if t > local_window + 1e-12 {
                        break;
                    }
                    match (find_at(traj, t), find_at(&ref_traj, t)) {
                        (Some(i), Some(j)) => samples.push(relative_energy_states(
                            &traj.states[i],
                            &ref_traj.states[j],
                        )?),
                        _ => break,
                    }
                    ti += 1;
                }
                if samples.is_empty() {
                    return Err(Error::MismatchedTimeGrids);
                }
                let defect = if cfg.sweep.audit && traj.record_full {
                    let ledger = energy_audit(traj, model)?;
                    ledger.last().map(|e| e.defect)
                } else {
                    None
                };
                rel_energy.push(Some(samples));
                defects.push(defect);
            }
        }
    }

    Ok(PathResult {
        rel_energy,
        defect: defects,
        window_end,
        c_r,
        rel0,
        ref_broken: false,
    })
}

/// Run the sweep over `sweep.paths` seeds, distributing seeds across
/// `run.workers` threads. Results are reduced in seed order, so the output
/// is identical for any worker count.
pub fn inviscid_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    let model = NoiseModel::build(cfg.grid, &cfg.noise, 2)?;
    let m_paths = cfg.sweep.paths;
    let seeds: Vec<u64> = (0..m_paths as u64).map(|i| cfg.sweep.seed0 + i).collect();

    let workers = cfg.run.workers.min(m_paths.max(1));
    let mut results: Vec<Option<Result<PathResult>>> = Vec::new();
    results.resize_with(m_paths, || None);
    if workers <= 1 {
        for (i, &seed) in seeds.iter().enumerate() {
            results[i] = Some(run_one_seed(cfg, &model, seed));
        }
    } else {
        let chunk = m_paths.div_ceil(workers);
        let mut slots: Vec<_> = results.iter_mut().enumerate().collect();
        std::thread::scope(|scope| {
            for batch in slots.chunks_mut(chunk) {
                // Each worker owns a disjoint slice of result slots.
                let model_ref = &model;
                let seeds_ref = &seeds;
                let batch: &mut [(usize, &mut Option<Result<PathResult>>)] = batch;
                scope.spawn(move || {
                    for (i, slot) in batch.iter_mut() {
                        **slot = Some(run_one_seed(cfg, model_ref, seeds_ref[*i]));
                    }
                });
            }
        });
    }
    let mut paths = Vec::with_capacity(m_paths);
    for r in results {
        paths.push(r.expect("every slot filled")?);
    }

    let usable: Vec<&PathResult> = paths.iter().filter(|p| !p.ref_broken).collect();
    let ref_excluded = m_paths - usable.len();
    if usable.is_empty() {
        return Err(Error::Numerical("every reference run broke down".into()));
    }
    let window_end = usable
        .iter()
        .map(|p| p.window_end)
        .fold(f64::INFINITY, f64::min);
    let c_r = usable.iter().map(|p| p.c_r).fold(0.0f64, f64::max).max(1.0);

    // Shared recording time grid inside the window.
    let record_dt = cfg.run.base_dt * cfg.run.cadence as f64;
    let n_times = (window_end / record_dt + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..n_times).map(|i| i as f64 * record_dt).collect();

    let mut entries = Vec::new();
    let mut series = Vec::new();
    for (e_idx, &eps) in cfg.sweep.epsilons.iter().enumerate() {
        let mut mean = vec![0.0; n_times];
        let mut se = vec![0.0; n_times];
        let mut used = 0usize;
        let samples: Vec<&Vec<f64>> = usable
            .iter()
            .filter_map(|p| p.rel_energy[e_idx].as_ref())
            .collect();
        let excluded = ref_excluded + (usable.len() - samples.len());
        if excluded * 10 > m_paths {
            return Err(Error::Numerical(format!(
                "eps={eps}: {excluded} of {m_paths} paths excluded (> 10%)"
            )));
        }
        for (ti, item) in mean.iter_mut().enumerate() {
            let vals: Vec<f64> = samples
                .iter()
                .filter_map(|s| s.get(ti).copied())
                .collect();
            if vals.is_empty() {
                continue;
            }
            used = used.max(vals.len());
            let n = vals.len() as f64;
            let m = crate::util::ksum(vals.iter().copied()) / n;
            *item = m;
            if vals.len() > 1 {
                let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
                se[ti] = (var / n).sqrt();
            }
        }
        let (sup_idx, sup_val) = mean
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });

        let rel0_mean = {
            let vals: Vec<f64> = usable.iter().map(|p| p.rel0[e_idx]).collect();
            crate::util::ksum(vals.iter().copied()) / vals.len() as f64
        };
        let gronwall = c_r * (rel0_mean + eps) * (c_r * window_end).exp();

        let defect_samples: Vec<f64> = usable
            .iter()
            .filter_map(|p| p.defect[e_idx])
            .collect();
        let (defect_mean, defect_se) = if defect_samples.is_empty() {
            (0.0, 0.0)
        } else {
            let n = defect_samples.len() as f64;
            let m = crate::util::ksum(defect_samples.iter().copied()) / n;
            let sd = if defect_samples.len() > 1 {
                (defect_samples.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (n - 1.0) / n)
                    .sqrt()
            } else {
                0.0
            };
            (m, sd)
        };

        entries.push(SweepEntry {
            eps,
            sup_mean_rel_energy: sup_val,
            std_err: se[sup_idx],
            gronwall,
            paths_used: used,
            excluded,
            defect_mean,
            defect_se,
        });
        series.push(SweepSeries {
            eps,
            times: times.clone(),
            mean,
            std_err: se,
        });
    }

    Ok(SweepResult {
        entries,
        series,
        window_end,
        c_r,
    })
}
