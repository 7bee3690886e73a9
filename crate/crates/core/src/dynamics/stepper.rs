//! Time stepping: Heun (SSP-RK2) on the drift, explicit Euler-Maruyama for
//! the noise (Itô, left-point), CFL and viscous step-size control on a dyadic
//! refinement of the Wiener path grid, and the stopping detectors.

use crate::error::{Error, Result};
use crate::fields::{NormReport, ScalarField, VectorField};
use crate::dynamics::rhs::{rhs_euler_conservative, rhs_euler_symmetric, rhs_viscous, Tendency};
use crate::dynamics::{Formulation, State};
use crate::noise::{NoiseModel, WienerPath};

/// Why a run stopped (or `None` while it is still admissible).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    None,
    /// `‖(r − r̄, u)‖_{s,2}` reached the configured level.
    SobolevLevel,
    /// `‖u‖_{1,∞}` reached the blow-up level.
    LipschitzBlowup,
    /// Density at or below the vacuum guard.
    Vacuum,
    /// Non-finite samples appeared.
    NonFinite,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::None => "none",
            StopReason::SobolevLevel => "sobolev_level",
            StopReason::LipschitzBlowup => "lipschitz_blowup",
            StopReason::Vacuum => "vacuum",
            StopReason::NonFinite => "non_finite",
        }
    }

    /// Numeric code used in the diagnostics CSV.
    pub fn code(&self) -> u8 {
        match self {
            StopReason::None => 0,
            StopReason::SobolevLevel => 1,
            StopReason::LipschitzBlowup => 2,
            StopReason::Vacuum => 3,
            StopReason::NonFinite => 4,
        }
    }
}

/// Detector and step-control configuration.
#[derive(Clone, Copy, Debug)]
pub struct StopConfig {
    /// Blow-up level for `‖u‖_{1,∞}`.
    pub r_detector: f64,
    /// Stopping level for `‖(r − r̄, u)‖_{s,2}`.
    pub n_level: f64,
    /// Sobolev order of the level detector.
    pub s_order: f64,
    /// Time horizon.
    pub t_max: f64,
    /// CFL number in (0, 1].
    pub cfl: f64,
}

impl StopConfig {
    /// Default detector order for the given dimension: `dim/2 + 2.5`, which
    /// satisfies the strong-solution requirement `s > dim/2 + 2` strictly.
    pub fn default_s_order(dim: usize) -> f64 {
        dim as f64 / 2.0 + 2.5
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.r_detector > 0.0
            && self.n_level > 0.0
            && self.s_order >= 0.0
            && self.t_max > 0.0
            && self.cfl > 0.0
            && self.cfl <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid stop config: {self:?}")))
        }
    }
}

/// Outcome of a single step. `norms` describes the state the step departed
/// from; it is absent when that state already had non-finite samples.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub dt_used: f64,
    pub max_wave_speed: f64,
    pub stop: StopReason,
    pub norms: Option<NormReport>,
    /// Dyadic refinement level the step ran at.
    pub level: u32,
    /// Index of the consumed path interval at that level.
    pub index: u64,
    /// Brownian increments consumed, one per mode (empty for a blocked step).
    pub increments: Vec<f64>,
}

/// Evaluate the stopping detectors on a state, in the fixed order
/// vacuum → non-finite → Sobolev level → Lipschitz blow-up.
pub fn evaluate_detectors(state: &State, stop: &StopConfig) -> Result<(StopReason, Option<NormReport>)> {
    let params = state.params;
    // Vacuum first. NaN comparisons are false, so a non-finite state falls
    // through to the next detector as required.
    let vacuum = match &state.form {
        Formulation::Conservative { rho, .. } => rho.min() <= crate::thermo::VACUUM_REL * params.rho_bar,
        Formulation::Symmetric { r, .. } => {
            let r_thr = params
                .rho_to_r(crate::thermo::VACUUM_REL * params.rho_bar)
                .expect("positive threshold");
            r.min() <= r_thr
        }
    };
    if vacuum {
        return Ok((StopReason::Vacuum, None));
    }
    if !state.is_valid() {
        return Ok((StopReason::NonFinite, None));
    }
    let sym = state.to_symmetric()?;
    let (r, u) = match &sym.form {
        Formulation::Symmetric { r, u } => (r, u),
        _ => unreachable!(),
    };
    let r_hat = r.map(|x| x - params.r_bar());
    let norms = NormReport::for_pair(&r_hat, u, stop.s_order)?;
    if norms.sobolev >= stop.n_level {
        return Ok((StopReason::SobolevLevel, Some(norms)));
    }
    if norms.lipschitz >= stop.r_detector {
        return Ok((StopReason::LipschitzBlowup, Some(norms)));
    }
    Ok((StopReason::None, Some(norms)))
}

/// Step-size and switch controls for the integrator.
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    /// Cap on dyadic refinement below the path grid.
    pub max_level: u32,
    /// Drop the deterministic drift (pure-noise test runs).
    pub disable_drift: bool,
    /// Drop the stochastic increments.
    pub disable_noise: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            max_level: 24,
            disable_drift: false,
            disable_noise: false,
        }
    }
}

/// Advances one trajectory along a Wiener path. Steps always have width
/// `base_dt / 2^level`; the level only ever refines, so consumed increments
/// stay aligned with every other solver on the same path.
pub struct Integrator<'a> {
    path: &'a WienerPath,
    model: &'a NoiseModel,
    stop: StopConfig,
    ctl: StepControl,
    level: u32,
    index: u64,
}

impl<'a> Integrator<'a> {
    pub fn new(
        path: &'a WienerPath,
        model: &'a NoiseModel,
        stop: StopConfig,
        ctl: StepControl,
    ) -> Result<Self> {
        stop.validate()?;
        Ok(Self {
            path,
            model,
            stop,
            ctl,
            level: 0,
            index: 0,
        })
    }

    pub fn position(&self) -> (u32, u64) {
        (self.level, self.index)
    }

    pub fn stop_config(&self) -> &StopConfig {
        &self.stop
    }

    /// Time corresponding to the current path position.
    pub fn time(&self) -> f64 {
        self.path.base_dt() * self.index as f64 / (1u64 << self.level) as f64
    }

    fn drift(&self, state: &State) -> Result<Tendency> {
        let mut t = match &state.form {
            Formulation::Conservative { .. } => rhs_euler_conservative(state)?,
            Formulation::Symmetric { .. } => rhs_euler_symmetric(state)?,
        };
        if state.params.epsilon > 0.0 {
            match &state.form {
                Formulation::Conservative { rho, m } => {
                    let v = crate::dynamics::rhs::velocity_from_momentum(rho, m)?;
                    let v = dealias_vec(&v)?;
                    let visc = rhs_viscous(&v, &state.params)?;
                    t.vector.axpy(1.0, &visc)?;
                }
                Formulation::Symmetric { r, u } => {
                    let visc = rhs_viscous(u, &state.params)?;
                    for c in 0..u.grid().dim() {
                        let rho_inv =
                            r.map(|rv| 1.0 / state.params.r_to_rho(rv).unwrap_or(f64::NAN));
                        let scaled = visc.component(c).zip_with(&rho_inv, |a, b| a * b)?;
                        t.vector.component_mut(c).axpy(1.0, &scaled)?;
                    }
                }
            }
        }
        Ok(t)
    }

    fn apply_tendency(state: &State, t: &Tendency, dt: f64) -> Result<State> {
        let mut out = state.clone();
        match &mut out.form {
            Formulation::Conservative { rho, m } => {
                rho.axpy(dt, &t.scalar)?;
                m.axpy(dt, &t.vector)?;
            }
            Formulation::Symmetric { r, u } => {
                r.axpy(dt, &t.scalar)?;
                u.axpy(dt, &t.vector)?;
            }
        }
        Ok(out)
    }

    /// Largest nodewise `|u| + sqrt(p'(ρ))`; NaN-free states only.
    fn max_wave_speed(state: &State) -> Result<f64> {
        let rho = state.density()?;
        let v = state.velocity()?;
        let p = &state.params;
        let mut s = 0.0f64;
        for n in 0..rho.grid().node_count() {
            let vel = v.at(n);
            let speed = (vel[0] * vel[0] + vel[1] * vel[1]).sqrt()
                + p.sound_speed(rho.data()[n].max(0.0))?;
            s = s.max(speed);
        }
        Ok(s)
    }

    /// Advance by one step. A detector hit returns the state unchanged with
    /// the reason recorded; config errors throw.
    pub fn step(&mut self, state: &State) -> Result<(State, StepReport)> {
        let (reason, norms) = evaluate_detectors(state, &self.stop)?;
        if reason != StopReason::None {
            return Ok((
                state.clone(),
                StepReport {
                    dt_used: 0.0,
                    max_wave_speed: 0.0,
                    stop: reason,
                    norms,
                    level: self.level,
                    index: self.index,
                    increments: Vec::new(),
                },
            ));
        }

        let grid = state.grid();
        let dx = grid.spacing();
        let speed = Self::max_wave_speed(state)?;
        let mut dt_target = if speed > 1e-14 {
            self.stop.cfl * dx / speed
        } else {
            // Degenerate CFL (constant zero state): fall back to Δx·cfl.
            self.stop.cfl * dx
        };
        let p = &state.params;
        if p.epsilon > 0.0 && (p.nu > 0.0 || p.lambda > 0.0) {
            // Explicit-stability bound for the viscous symbol ε c k² with
            // k_max = π/Δx and safety 1/2 on the RK2 real-axis limit.
            let coef = p.nu + (p.nu * (1.0 - 2.0 / grid.dim() as f64) + p.lambda).max(0.0);
            let k_max = std::f64::consts::PI / dx;
            dt_target = dt_target.min(1.0 / (p.epsilon * coef * k_max * k_max));
        }

        // Smallest dyadic level at or beyond the current one whose width
        // fits the target.
        let mut level = self.level;
        while self.path.dt_at(level) > dt_target * (1.0 + 1e-12) {
            level += 1;
            if level > self.ctl.max_level {
                return Err(Error::Numerical(format!(
                    "step-size control requires level {level} (dt <= {dt_target:.3e}); \
                     raise the path resolution or max_level"
                )));
            }
        }
        if level > self.level {
            self.index <<= level - self.level;
            self.level = level;
        }
        let dt = self.path.dt_at(self.level);

        // Heun on the drift.
        let mut next = if self.ctl.disable_drift {
            state.clone()
        } else {
            let k1 = self.drift(state)?;
            let mid = Self::apply_tendency(state, &k1, dt)?;
            if mid.is_valid() {
                let k2 = self.drift(&mid)?;
                let half = Self::apply_tendency(state, &k1, dt / 2.0)?;
                Self::apply_tendency(&half, &k2, dt / 2.0)?
            } else {
                // The predictor left the finite range; keep it so the
                // detectors report NonFinite on the next step.
                mid
            }
        };

        // Euler-Maruyama noise increment, left-point in the departed state.
        let mut increments = Vec::new();
        if !self.ctl.disable_noise && self.model.mode_count() > 0 {
            increments = self.path.increments(self.level, self.index);
            match (&state.form, &mut next.form) {
                (Formulation::Conservative { rho, m: _ }, Formulation::Conservative { m, .. }) => {
                    let q = state.momentum()?;
                    for (k, &db) in increments.iter().enumerate() {
                        let gk = self.model.apply_g_cut(rho, &q, k)?;
                        m.axpy(db, &gk)?;
                    }
                }
                (Formulation::Symmetric { r, u }, Formulation::Symmetric { u: u_next, .. }) => {
                    for (k, &db) in increments.iter().enumerate() {
                        let fk = self.model.apply_f_r(&state.params, r, u, k)?;
                        u_next.axpy(db, &fk)?;
                    }
                }
                _ => unreachable!("formulation is preserved by the drift"),
            }
        }

        self.index += 1;
        next.time = self.time();
        Ok((
            next,
            StepReport {
                dt_used: dt,
                max_wave_speed: speed,
                stop: StopReason::None,
                norms,
                level: self.level,
                index: self.index - 1,
                increments,
            },
        ))
    }
}

fn dealias_vec(v: &VectorField) -> Result<VectorField> {
    let comps = v
        .components()
        .iter()
        .map(crate::fields::dealias)
        .collect::<Result<Vec<ScalarField>>>()?;
    VectorField::from_components(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::noise::NoiseSpec;
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

    fn stop_cfg() -> StopConfig {
        StopConfig {
            r_detector: 100.0,
            n_level: 1e6,
            s_order: 3.0,
            t_max: 1.0,
            cfl: 0.4,
        }
    }

    #[test]
    fn constant_state_is_unchanged_by_a_step() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let state = State::conservative(ScalarField::constant(g, 1.0), VectorField::zeros(g), p)
            .unwrap();
        let path = WienerPath::new(1, 0.01, 0).unwrap();
        let model = quiet_model(g);
        let mut it = Integrator::new(&path, &model, stop_cfg(), StepControl::default()).unwrap();
        let (next, rep) = it.step(&state).unwrap();
        assert_eq!(rep.stop, StopReason::None);
        let rho = next.density().unwrap();
        for &x in rho.data() {
            assert!((x - 1.0).abs() < 1e-13);
        }
        assert!(rep.dt_used > 0.0);
    }

    #[test]
    fn detectors_fire_in_expected_order() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let cfg = stop_cfg();

        // Vacuum.
        let mut rho = ScalarField::constant(g, 1.0);
        rho.data_mut()[0] = 0.0;
        let s = State::conservative(rho, VectorField::zeros(g), p).unwrap();
        assert_eq!(evaluate_detectors(&s, &cfg).unwrap().0, StopReason::Vacuum);

        // NonFinite.
        let mut rho = ScalarField::constant(g, 1.0);
        rho.data_mut()[0] = f64::NAN;
        let s = State::conservative(rho, VectorField::zeros(g), p).unwrap();
        assert_eq!(evaluate_detectors(&s, &cfg).unwrap().0, StopReason::NonFinite);

        // SobolevLevel: tiny level with order-1 data.
        let mut tight = cfg;
        tight.n_level = 1.0;
        let s = State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.5 * x[0].sin()),
            VectorField::zeros(g),
            p,
        )
        .unwrap();
        assert_eq!(
            evaluate_detectors(&s, &tight).unwrap().0,
            StopReason::SobolevLevel
        );

        // LipschitzBlowup: steep velocity, Sobolev level out of reach.
        let mut lip = cfg;
        lip.r_detector = 2.0;
        let s = State::conservative(
            ScalarField::constant(g, 1.0),
            VectorField::from_fn(g, |_, x| (4.0 * x[0]).sin()),
            p,
        )
        .unwrap();
        assert_eq!(
            evaluate_detectors(&s, &lip).unwrap().0,
            StopReason::LipschitzBlowup
        );
    }

    #[test]
    fn blocked_step_reports_without_advancing() {
        let g = Grid::new(1, 32, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let mut cfg = stop_cfg();
        cfg.n_level = 0.5;
        let state = State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.5 * x[0].sin()),
            VectorField::zeros(g),
            p,
        )
        .unwrap();
        let path = WienerPath::new(1, 0.01, 0).unwrap();
        let model = quiet_model(g);
        let mut it = Integrator::new(&path, &model, cfg, StepControl::default()).unwrap();
        let (next, rep) = it.step(&state).unwrap();
        assert_eq!(rep.stop, StopReason::SobolevLevel);
        assert_eq!(rep.dt_used, 0.0);
        assert_eq!(next.time, state.time);
        assert_eq!(it.position(), (0, 0));
    }

    #[test]
    fn pure_noise_step_adds_one_increment_of_a1() {
        // Drift disabled, single mode with A = 0: u gains exactly
        // F_1 ΔΒ_1 = (φ-factors · a_1) ΔΒ_1 per step.
        let g = Grid::new(1, 64, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let spec = NoiseSpec {
            modes: 1,
            alpha0: 0.3,
            support_lo: [2.0, 0.0],
            support_hi: [4.0, 0.0],
            cutoff: Some(8.0),
            seed: 5,
        };
        let model = NoiseModel::build(g, &spec, 1).unwrap();
        // Strip the matrix part so the increment is state-independent.
        let lm = model.linear_mode(0).unwrap();
        let a_only = crate::noise::LinearMode {
            a: lm.a.clone(),
            mat: crate::noise::MatrixField::zeros(g),
        };
        let model =
            NoiseModel::from_linear_modes(g, vec![a_only], vec![0.3], model.support(), model.cutoff())
                .unwrap();

        let path = WienerPath::new(77, 0.005, 1).unwrap();
        let state = State::symmetric(ScalarField::constant(g, p.r_bar()), VectorField::zeros(g), p)
            .unwrap();
        let ctl = StepControl {
            disable_drift: true,
            ..StepControl::default()
        };
        let mut it = Integrator::new(&path, &model, stop_cfg(), ctl).unwrap();
        let (next, rep) = it.step(&state).unwrap();
        let db = rep.increments[0];
        assert_eq!(db.to_bits(), path.increment(0, 0, 0).to_bits());
        let f = model.apply_f_r(&p, &ScalarField::constant(g, p.r_bar()), &VectorField::zeros(g), 0).unwrap();
        if let Formulation::Symmetric { u, .. } = &next.form {
            for n in 0..g.node_count() {
                assert!((u.at(n)[0] - db * f.at(n)[0]).abs() < 1e-15);
            }
        } else {
            panic!("expected symmetric");
        }
    }

    #[test]
    fn level_refines_when_viscosity_binds() {
        let g = Grid::new(1, 64, TAU).unwrap();
        let p = PhysParams::new(2.0, 1.0, 1.0, 0.0, 1.0, 0.1).unwrap();
        let state = State::conservative(
            ScalarField::from_fn(g, |x| 1.0 + 0.05 * x[0].sin()),
            VectorField::zeros(g),
            p,
        )
        .unwrap();
        // Base step chosen far above the viscous stability bound.
        let path = WienerPath::new(1, 0.05, 0).unwrap();
        let model = quiet_model(g);
        let mut it = Integrator::new(&path, &model, stop_cfg(), StepControl::default()).unwrap();
        let (_, rep) = it.step(&state).unwrap();
        assert!(rep.level > 0, "viscous bound should refine the level");
        let k_max = std::f64::consts::PI / g.spacing();
        assert!(rep.dt_used <= 1.0 / (0.1 * 1.0 * k_max * k_max) * (1.0 + 1e-9));
    }
}
