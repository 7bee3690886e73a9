//! Strict key-value run configuration.
//!
//! Syntax: one `key = value` pair per line, `#` starts a comment, blank lines
//! are ignored. Keys are dotted paths from the fixed schema below; unknown
//! keys and duplicate keys are rejected. Values are numbers, integers,
//! booleans, comma-separated float lists, or the literal `off`/`auto` where
//! noted.
//!
//! ```text
//! grid.dim        1|2             grid.n          8..=65536 (power of two)
//! grid.length     L > 0
//! phys.gamma      > 1             phys.a          > 0
//! phys.rho_bar    > 0             phys.nu         >= 0
//! phys.lambda     >= 0            phys.epsilon    [0,1]
//! noise.modes     >= 0            noise.alpha0    >= 0
//! noise.support_lo / support_hi   per-axis comma list (or one value)
//! noise.cutoff    > 0 | off       noise.seed      u64
//! stop.r_detector > 0             stop.n_level    > 0
//! stop.s_order    >= 0 | auto     stop.t_max      > 0
//! stop.cfl        (0,1]
//! init.recipe     constant|acoustic|bump|compression
//! init.amp / init.u_amp / init.width / init.center    floats
//! init.mode       integer >= 1
//! run.base_dt     > 0             run.cadence     >= 1
//! run.workers     >= 1
//! sweep.epsilons  strictly decreasing comma list, entries in [0,1]
//! sweep.paths     >= 1            sweep.seed0     u64
//! sweep.ill_prepared  true|false  sweep.audit     true|false
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::dynamics::StopConfig;
use crate::harness::recipes::RecipeSpec;
use crate::noise::NoiseSpec;
use crate::thermo::PhysParams;

/// Ordered raw key-value map, before schema validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig(pub BTreeMap<String, String>);

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse the textual format; rejects malformed lines and duplicate keys.
pub fn parse_config_str(text: &str) -> Result<RawConfig> {
    let mut map = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
            return Err(cfg_err(format!("line {}: bad key `{key}`", lineno + 1)));
        }
        if value.is_empty() {
            return Err(cfg_err(format!("line {}: empty value for `{key}`", lineno + 1)));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(cfg_err(format!("duplicate key `{key}`")));
        }
    }
    Ok(RawConfig(map))
}

impl RawConfig {
    /// Apply a `key=value` override (CLI `--override`).
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("override `{spec}` is not key=value")))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(cfg_err(format!("override `{spec}` is not key=value")));
        }
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Render back to the textual format (used for trajectory metadata).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Step-size and recording controls.
#[derive(Clone, Copy, Debug)]
pub struct RunControls {
    /// Wiener path granularity; also the largest admissible step.
    pub base_dt: f64,
    /// Record a state every `cadence` base intervals (1 = every step).
    pub cadence: usize,
    pub workers: usize,
}

/// Sweep block: viscosity list, Monte-Carlo paths, data preparation.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub paths: usize,
    pub seed0: u64,
    pub ill_prepared: bool,
    pub audit: bool,
}

/// Fully validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: Grid,
    pub phys: PhysParams,
    pub noise: NoiseSpec,
    pub stop: StopConfig,
    pub recipe: RecipeSpec,
    pub run: RunControls,
    pub sweep: SweepSpec,
}

const KNOWN_KEYS: &[&str] = &[
    "grid.dim",
    "grid.n",
    "grid.length",
    "phys.gamma",
    "phys.a",
    "phys.rho_bar",
    "phys.nu",
    "phys.lambda",
    "phys.epsilon",
    "noise.modes",
    "noise.alpha0",
    "noise.support_lo",
    "noise.support_hi",
    "noise.cutoff",
    "noise.seed",
    "stop.r_detector",
    "stop.n_level",
    "stop.s_order",
    "stop.t_max",
    "stop.cfl",
    "init.recipe",
    "init.amp",
    "init.u_amp",
    "init.width",
    "init.center",
    "init.mode",
    "run.base_dt",
    "run.cadence",
    "run.workers",
    "sweep.epsilons",
    "sweep.paths",
    "sweep.seed0",
    "sweep.ill_prepared",
    "sweep.audit",
];

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl<'a> Reader<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.raw.0.get(key).map(|s| s.as_str())
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| cfg_err(format!("`{key}`: not a number: `{s}`"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| cfg_err(format!("`{key}`: not an integer: `{s}`"))),
        }
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| cfg_err(format!("`{key}`: not an integer: `{s}`"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(s) => Err(cfg_err(format!("`{key}`: expected true|false, got `{s}`"))),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => {
                let vals = s
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|_| cfg_err(format!("`{key}`: bad entry `{tok}`")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(Some(vals))
            }
        }
    }

    fn axis_pair(&self, key: &str, default: f64) -> Result<[f64; 2]> {
        match self.f64_list(key)? {
            None => Ok([default, default]),
            Some(v) if v.len() == 1 => Ok([v[0], v[0]]),
            Some(v) if v.len() == 2 => Ok([v[0], v[1]]),
            Some(v) => Err(cfg_err(format!(
                "`{key}`: expected 1 or 2 entries, got {}",
                v.len()
            ))),
        }
    }
}

/// Validate the raw map against the schema and build the run configuration.
/// Unknown keys are rejected.
pub fn build_run_config(raw: &RawConfig) -> Result<RunConfig> {
    for key in raw.0.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(cfg_err(format!("unknown key `{key}`")));
        }
    }
    let r = Reader { raw };

    let dim = r.usize("grid.dim", 1)?;
    let n = r.usize("grid.n", 256)?;
    let length = r.f64("grid.length", std::f64::consts::TAU)?;
    let grid = Grid::new(dim, n, length)?;

    let phys = PhysParams::new(
        r.f64("phys.gamma", 2.0)?,
        r.f64("phys.a", 1.0)?,
        r.f64("phys.rho_bar", 1.0)?,
        r.f64("phys.nu", 0.0)?,
        r.f64("phys.lambda", 1.0)?,
        r.f64("phys.epsilon", 0.0)?,
    )?;

    let cutoff = match r.get("noise.cutoff") {
        None => Some(10.0),
        Some("off") => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| cfg_err(format!("`noise.cutoff`: expected number or `off`, got `{s}`")))?,
        ),
    };
    let noise = NoiseSpec {
        modes: r.usize("noise.modes", 8)?,
        alpha0: r.f64("noise.alpha0", 0.05)?,
        support_lo: r.axis_pair("noise.support_lo", 0.3 * length)?,
        support_hi: r.axis_pair("noise.support_hi", 0.55 * length)?,
        cutoff,
        seed: r.u64("noise.seed", 1)?,
    };

    let s_order = match r.get("stop.s_order") {
        None | Some("auto") => StopConfig::default_s_order(dim),
        Some(s) => s
            .parse::<f64>()
            .map_err(|_| cfg_err(format!("`stop.s_order`: expected number or `auto`, got `{s}`")))?,
    };
    let stop = StopConfig {
        r_detector: r.f64("stop.r_detector", 100.0)?,
        n_level: r.f64("stop.n_level", 1e6)?,
        s_order,
        t_max: r.f64("stop.t_max", 0.5)?,
        cfl: r.f64("stop.cfl", 0.4)?,
    };
    stop.validate()?;

    let recipe = RecipeSpec {
        id: r.get("init.recipe").unwrap_or("acoustic").to_string(),
        amp: r.f64("init.amp", 0.1)?,
        u_amp: r.f64("init.u_amp", 0.0)?,
        width: r.f64("init.width", 0.15 * length)?,
        center: r.f64("init.center", 0.5 * length)?,
        mode: r.usize("init.mode", 1)?,
    };
    recipe.validate()?;

    let run = RunControls {
        base_dt: r.f64("run.base_dt", stop.t_max / 256.0)?,
        cadence: r.usize("run.cadence", 1)?,
        workers: r.usize("run.workers", 1)?,
    };
    if !(run.base_dt > 0.0 && run.base_dt.is_finite()) {
        return Err(cfg_err("`run.base_dt` must be positive"));
    }
    if run.cadence == 0 || run.workers == 0 {
        return Err(cfg_err("`run.cadence` and `run.workers` must be at least 1"));
    }

    let epsilons = r
        .f64_list("sweep.epsilons")?
        .unwrap_or_else(|| vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]);
    if epsilons.is_empty() {
        return Err(cfg_err("`sweep.epsilons` must not be empty"));
    }
    for w in epsilons.windows(2) {
        if w[1] >= w[0] {
            return Err(cfg_err("`sweep.epsilons` must be strictly decreasing"));
        }
    }
    for &e in &epsilons {
        if !(0.0..=1.0).contains(&e) {
            return Err(cfg_err(format!("`sweep.epsilons`: {e} outside [0,1]")));
        }
    }
    let sweep = SweepSpec {
        epsilons,
        paths: r.usize("sweep.paths", 32)?,
        seed0: r.u64("sweep.seed0", 1000)?,
        ill_prepared: r.bool("sweep.ill_prepared", false)?,
        audit: r.bool("sweep.audit", true)?,
    };
    if sweep.paths == 0 {
        return Err(cfg_err("`sweep.paths` must be at least 1"));
    }

    Ok(RunConfig {
        grid,
        phys,
        noise,
        stop,
        recipe,
        run,
        sweep,
    })
}
