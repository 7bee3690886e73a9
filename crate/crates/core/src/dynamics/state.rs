//! Solution state in conservative or symmetric variables.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::thermo::PhysParams;

/// Which set of unknowns the state carries.
///
/// Conservative: density `ρ` and momentum `m = ρu`. Symmetric: sound variable
/// `r = r(ρ)` and velocity `u`; the two are connected by the nodewise
/// bijection of the thermodynamics module wherever the density is positive.
#[derive(Clone, Debug)]
pub enum Formulation {
    Conservative { rho: ScalarField, m: VectorField },
    Symmetric { r: ScalarField, u: VectorField },
}

/// A solution snapshot: unknowns, simulation time and physical parameters.
#[derive(Clone, Debug)]
pub struct State {
    pub form: Formulation,
    pub time: f64,
    pub params: PhysParams,
}

impl State {
    pub fn conservative(rho: ScalarField, m: VectorField, params: PhysParams) -> Result<Self> {
        if rho.grid() != m.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            form: Formulation::Conservative { rho, m },
            time: 0.0,
            params,
        })
    }

    pub fn symmetric(r: ScalarField, u: VectorField, params: PhysParams) -> Result<Self> {
        if r.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            form: Formulation::Symmetric { r, u },
            time: 0.0,
            params,
        })
    }

    pub fn grid(&self) -> Grid {
        match &self.form {
            Formulation::Conservative { rho, .. } => rho.grid(),
            Formulation::Symmetric { r, .. } => r.grid(),
        }
    }

    pub fn is_conservative(&self) -> bool {
        matches!(self.form, Formulation::Conservative { .. })
    }

    pub fn is_valid(&self) -> bool {
        match &self.form {
            Formulation::Conservative { rho, m } => rho.is_valid() && m.is_valid(),
            Formulation::Symmetric { r, u } => r.is_valid() && u.is_valid(),
        }
    }

    /// Density field in either formulation; errors on vacuum in the
    /// symmetric variables (the transform degenerates there).
    pub fn density(&self) -> Result<ScalarField> {
        match &self.form {
            Formulation::Conservative { rho, .. } => Ok(rho.clone()),
            Formulation::Symmetric { r, .. } => self.params.r_to_rho_field(r),
        }
    }

    /// Velocity field; errors on vacuum in the conservative variables.
    pub fn velocity(&self) -> Result<VectorField> {
        match &self.form {
            Formulation::Conservative { rho, m } => velocity_from(rho, m),
            Formulation::Symmetric { u, .. } => Ok(u.clone()),
        }
    }

    /// Momentum field `ρu`.
    pub fn momentum(&self) -> Result<VectorField> {
        match &self.form {
            Formulation::Conservative { m, .. } => Ok(m.clone()),
            Formulation::Symmetric { r, u } => {
                let rho = self.params.r_to_rho_field(r)?;
                let mut m = u.clone();
                for c in 0..m.grid().dim() {
                    let prod = rho.zip_with(u.component(c), |a, b| a * b)?;
                    *m.component_mut(c) = prod;
                }
                Ok(m)
            }
        }
    }

    /// Convert to conservative variables (no-op if already there).
    pub fn to_conservative(&self) -> Result<State> {
        match &self.form {
            Formulation::Conservative { .. } => Ok(self.clone()),
            Formulation::Symmetric { .. } => {
                let rho = self.density()?;
                let m = self.momentum()?;
                Ok(State {
                    form: Formulation::Conservative { rho, m },
                    time: self.time,
                    params: self.params,
                })
            }
        }
    }

    /// Convert to symmetric variables (no-op if already there).
    pub fn to_symmetric(&self) -> Result<State> {
        match &self.form {
            Formulation::Symmetric { .. } => Ok(self.clone()),
            Formulation::Conservative { rho, m } => {
                let r = self.params.rho_to_r_field(rho)?;
                let u = velocity_from(rho, m)?;
                Ok(State {
                    form: Formulation::Symmetric { r, u },
                    time: self.time,
                    params: self.params,
                })
            }
        }
    }
}

fn velocity_from(rho: &ScalarField, m: &VectorField) -> Result<VectorField> {
    if rho.min() <= 0.0 {
        return Err(Error::Vacuum);
    }
    let mut u = m.clone();
    for c in 0..u.grid().dim() {
        let div = m.component(c).zip_with(rho, |a, b| a / b)?;
        *u.component_mut(c) = div;
    }
    Ok(u)
}
