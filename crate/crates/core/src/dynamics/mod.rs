//! Semi-discrete dynamics: right-hand sides for the Euler system in both
//! formulations and the viscous stress, the Heun + Euler-Maruyama splitting
//! stepper with CFL control, stopping/blow-up detectors, trajectory
//! recording, the density maximum-principle check, and a first-order
//! finite-volume scheme used as an independent cross-validation oracle.

mod maxprin;
mod rhs;
mod rusanov;
mod state;
mod stepper;
mod trajectory;

pub use maxprin::{max_principle_bounds, MaxPrincipleReport};
pub use rhs::{
    rhs_euler_conservative, rhs_euler_symmetric, rhs_viscous, stress_dissipation_density,
    stress_tensor, velocity_from_momentum, Tendency,
};
pub use rusanov::{run_rusanov_to, rusanov_rhs};
pub use state::{Formulation, State};
pub use stepper::{
    evaluate_detectors, Integrator, StepControl, StepReport, StopConfig, StopReason,
};
pub use trajectory::{observables, run_until, Observables, StepRecord, Trajectory};
