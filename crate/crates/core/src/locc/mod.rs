//! Executable LOCC protocols on bipartite state vectors.

mod exhaustive;
mod monte_carlo;
mod nielsen;
mod protocol;

pub use exhaustive::{
    exhaustive_run, exhaustive_run_from_schmidt, monotone_audit, Branch, Enumeration, ExactWeights,
    MonotoneAudit, RunOptions, DEFAULT_BRANCH_CAP,
};
pub use monte_carlo::{monte_carlo_run, AuditEntry, MonteCarloConfig, SimulationReport};
pub use nielsen::{build_full_protocol, deterministic_protocol, t_transform_chain, TTransform};
pub use protocol::{
    apply_measurement, Condition, Gate, Kraus, LoccProtocol, LoccStep, MeasurementOutcome, Outcome, Party,
    SuccessPredicate, PRUNE_THRESHOLD,
};
