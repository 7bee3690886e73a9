//! CSV output with versioned headers.
//!
//! Every file starts with a `# SCE<KIND> v1` comment line followed by the
//! column header. Formatting uses `{:.12e}` throughout, so identical runs
//! produce byte-identical files.

use std::fmt::Write as _;

use crate::diagnostics::{LedgerEntry, RemainderBreakdown};
use crate::dynamics::{observables, Trajectory};
use crate::error::Result;
use crate::harness::sweep::{SweepResult, SweepSeries};

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Per-step diagnostics of a trajectory. Columns (1-d):
/// `t,dt,mass,momentum_0,energy,sobolev_s,lipschitz,min_rho,max_rho,stop_flag`
/// (2-d adds `momentum_1` after `momentum_0`).
pub fn diagnostics_csv(traj: &Trajectory) -> Result<String> {
    let dim = traj.grid.dim();
    let mut out = String::from("# SCEDIAG v1\n");
    out.push_str("t,dt,mass,momentum_0,");
    if dim == 2 {
        out.push_str("momentum_1,");
    }
    out.push_str("energy,sobolev_s,lipschitz,min_rho,max_rho,stop_flag\n");
    for rec in &traj.records {
        let o = &rec.obs;
        write!(out, "{},{},{},{}", num(rec.t), num(rec.dt), num(o.mass), num(o.momentum[0])).unwrap();
        if dim == 2 {
            write!(out, ",{}", num(o.momentum[1])).unwrap();
        }
        writeln!(
            out,
            ",{},{},{},{},{},0",
            num(o.energy),
            num(rec.sobolev),
            num(rec.lipschitz),
            num(o.min_rho),
            num(o.max_rho)
        )
        .unwrap();
    }
    // Closing row for the final state with the stop flag.
    let last = traj.final_state();
    let o = observables(last).unwrap_or(crate::dynamics::Observables {
        mass: f64::NAN,
        momentum: [f64::NAN; 2],
        energy: f64::NAN,
        min_rho: f64::NAN,
        max_rho: f64::NAN,
        div_u_inf: f64::NAN,
    });
    write!(out, "{},{},{},{}", num(last.time), num(0.0), num(o.mass), num(o.momentum[0])).unwrap();
    if dim == 2 {
        write!(out, ",{}", num(o.momentum[1])).unwrap();
    }
    writeln!(
        out,
        ",{},{},{},{},{},{}",
        num(o.energy),
        num(f64::NAN),
        num(f64::NAN),
        num(o.min_rho),
        num(o.max_rho),
        traj.stop.code()
    )
    .unwrap();
    Ok(out)
}

/// Energy ledger series.
pub fn ledger_csv(entries: &[LedgerEntry]) -> String {
    let mut out = String::from("# SCELEDGER v1\nt,kinetic,potential,dissipation,noise_work,ito,defect\n");
    for e in entries {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(e.t),
            num(e.kinetic),
            num(e.potential),
            num(e.dissipation_accum),
            num(e.noise_work_accum),
            num(e.ito_accum),
            num(e.defect)
        )
        .unwrap();
    }
    out
}

/// Remainder block breakdown per timestamp.
pub fn remainder_csv(rows: &[(f64, RemainderBreakdown)]) -> String {
    let mut out =
        String::from("# SCEREMAINDER v1\nt,visc,convect,pressure_defect,noise_mismatch\n");
    for (t, b) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(*t),
            num(b.visc),
            num(b.convect),
            num(b.pressure_defect),
            num(b.noise_mismatch)
        )
        .unwrap();
    }
    out
}

/// Sweep summary, one row per viscosity value.
pub fn sweep_csv(res: &SweepResult) -> String {
    let mut out = String::from(
        "# SCESWEEP v1\neps,sup_mean_rel_energy,std_err,gronwall_bound,paths_used,excluded,defect_mean,defect_se\n",
    );
    for e in &res.entries {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(e.eps),
            num(e.sup_mean_rel_energy),
            num(e.std_err),
            num(e.gronwall),
            e.paths_used,
            e.excluded,
            num(e.defect_mean),
            num(e.defect_se)
        )
        .unwrap();
    }
    out
}

/// Mean relative-energy time series, one row per (ε, t).
pub fn series_csv(series: &[SweepSeries]) -> String {
    let mut out = String::from("# SCESERIES v1\neps,t,mean_rel_energy,std_err\n");
    for s in series {
        for ((t, m), se) in s.times.iter().zip(&s.mean).zip(&s.std_err) {
            writeln!(out, "{},{},{},{}", num(s.eps), num(*t), num(*m), num(*se)).unwrap();
        }
    }
    out
}
