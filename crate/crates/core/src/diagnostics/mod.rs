//! Energy ledger, relative energy functional with remainder decomposition,
//! and the inviscid-limit convergence metrics.

mod convergence;
mod energy;
mod relative;

pub use convergence::{convergence_metrics, ConvergenceMetrics};
pub use energy::{energy_audit, LedgerEntry};
pub use relative::{
    comparison_tendencies, relative_energy, relative_energy_states, remainder_general,
    remainder_terms, GeneralRemainder, RefTendencies, RemainderBreakdown,
};
