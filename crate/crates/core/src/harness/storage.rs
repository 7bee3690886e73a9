//! Trajectory storage for the `audit` subcommand.
//!
//! A stored trajectory is a directory with
//!
//! * `config.cfg` — echo of the run configuration (strict key-value format),
//! * `steps.csv` — per-step table `step,t,dt,level,index,db_0..db_{K-1}`,
//! * `state_NNNNNN.fld` — one `SCEFLD v1` snapshot per recorded step start
//!   (density first, then the velocity components), plus the final state.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::snapshot::{read_snapshot_file, write_snapshot_file};
use crate::fields::{ScalarField, VectorField};
use crate::dynamics::{observables, Formulation, State, StepRecord, StopReason, Trajectory};
use crate::harness::config::{build_run_config, parse_config_str, RawConfig};

/// Write a fully recorded trajectory to `dir`.
pub fn store_trajectory(dir: &Path, raw_cfg: &RawConfig, traj: &Trajectory) -> Result<()> {
    if !traj.record_full {
        return Err(Error::PathNotRecorded);
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.cfg"), raw_cfg.render())?;

    let modes = traj.records.first().map(|r| r.increments.len()).unwrap_or(0);
    let mut steps = String::from("# SCESTEPS v1\nstep,t,dt,level,index");
    for k in 0..modes {
        write!(steps, ",db_{k}").unwrap();
    }
    steps.push('\n');
    for (i, rec) in traj.records.iter().enumerate() {
        write!(
            steps,
            "{i},{:.17e},{:.17e},{},{}",
            rec.t, rec.dt, rec.level, rec.index
        )
        .unwrap();
        for db in &rec.increments {
            write!(steps, ",{db:.17e}").unwrap();
        }
        steps.push('\n');
    }
    std::fs::write(dir.join("steps.csv"), steps)?;

    for (i, state) in traj.states.iter().enumerate() {
        let rho = state.density()?;
        let v = state.velocity()?;
        let mut comps: Vec<&[f64]> = vec![rho.data()];
        for c in 0..traj.grid.dim() {
            comps.push(v.component(c).data());
        }
        write_snapshot_file(
            &dir.join(format!("state_{i:06}.fld")),
            traj.grid,
            state.time,
            &comps,
        )?;
    }
    std::fs::write(
        dir.join("stop.txt"),
        format!("{} {:.17e}\n", traj.stop.as_str(), traj.stop_time),
    )?;
    Ok(())
}

/// Load a stored trajectory and the raw config it was produced with.
pub fn load_trajectory(dir: &Path) -> Result<(RawConfig, Trajectory)> {
    let raw = parse_config_str(&std::fs::read_to_string(dir.join("config.cfg"))?)?;
    let cfg = build_run_config(&raw)?;

    let mut states = Vec::new();
    let mut times = Vec::new();
    let mut idx = 0usize;
    loop {
        let path = dir.join(format!("state_{idx:06}.fld"));
        if !path.exists() {
            break;
        }
        let snap = read_snapshot_file(&path)?;
        if snap.grid != cfg.grid {
            return Err(Error::Snapshot("stored grid differs from config".into()));
        }
        if snap.components.len() != 1 + cfg.grid.dim() {
            return Err(Error::Snapshot(format!(
                "expected {} components, found {}",
                1 + cfg.grid.dim(),
                snap.components.len()
            )));
        }
        let mut comps = snap.components.into_iter();
        let rho = ScalarField::from_vec(cfg.grid, comps.next().unwrap())?;
        let v = VectorField::from_components(
            comps
                .map(|c| ScalarField::from_vec(cfg.grid, c))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let mut m = v.clone();
        for c in 0..cfg.grid.dim() {
            *m.component_mut(c) = rho.zip_with(v.component(c), |a, b| a * b)?;
        }
        let mut state = State {
            form: Formulation::Conservative { rho, m },
            time: snap.time,
            params: cfg.phys,
        };
        state.time = snap.time;
        times.push(snap.time);
        states.push(state);
        idx += 1;
    }
    if states.is_empty() {
        return Err(Error::Snapshot("no state files found".into()));
    }

    let steps_text = std::fs::read_to_string(dir.join("steps.csv"))?;
    let mut records = Vec::new();
    for line in steps_text.lines().skip(2) {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() < 5 {
            return Err(Error::Snapshot(format!("bad steps row: `{line}`")));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Snapshot(format!("bad number `{s}` in steps.csv")))
        };
        let step_idx = records.len();
        let state = states
            .get(step_idx)
            .ok_or_else(|| Error::Snapshot("more steps than states".into()))?;
        records.push(StepRecord {
            t: parse_f(toks[1])?,
            dt: parse_f(toks[2])?,
            level: toks[3]
                .parse()
                .map_err(|_| Error::Snapshot("bad level".into()))?,
            index: toks[4]
                .parse()
                .map_err(|_| Error::Snapshot("bad index".into()))?,
            obs: observables(state)?,
            sobolev: f64::NAN,
            lipschitz: f64::NAN,
            max_wave_speed: f64::NAN,
            increments: toks[5..]
                .iter()
                .map(|s| parse_f(s))
                .collect::<Result<Vec<_>>>()?,
        });
    }

    let stop_text = std::fs::read_to_string(dir.join("stop.txt"))?;
    let mut stop_toks = stop_text.split_whitespace();
    let stop = match stop_toks.next() {
        Some("none") => StopReason::None,
        Some("sobolev_level") => StopReason::SobolevLevel,
        Some("lipschitz_blowup") => StopReason::LipschitzBlowup,
        Some("vacuum") => StopReason::Vacuum,
        Some("non_finite") => StopReason::NonFinite,
        other => return Err(Error::Snapshot(format!("bad stop reason {other:?}"))),
    };
    let stop_time = stop_toks
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Snapshot("bad stop time".into()))?;

    Ok((
        raw,
        Trajectory {
            grid: cfg.grid,
            params: cfg.phys,
            times,
            states,
            records,
            stop,
            stop_time,
            record_full: true,
        },
    ))
}
