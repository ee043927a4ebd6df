//! Solvers for the restricted assignment makespan minimization problem when
//! job sizes take only two values, 1 and epsilon.
//!
//! The crate provides a flow-based local search with a proven load bound of
//! `tau + r` per machine, a bipartite-matching baseline with a `2 - epsilon`
//! guarantee, the combination of the two, and independent brute-force
//! oracles used to verify all of them. All arithmetic on loads, capacities
//! and thresholds is exact rational arithmetic.

pub mod flow;
pub mod generator;
pub mod instance;
pub mod io;
pub mod matching;
pub mod numerics;
pub mod oracle;
pub mod schedule;
pub mod search;
pub mod solvers;

pub use instance::{makespan, tau_candidates, Instance, Job, JobId, Machine, Schedule, SizeClass};
pub use numerics::{make_params, sqrt_bounds, verify_params, Params, Rational};
pub use oracle::{brute_force_max_flow, brute_force_opt, OracleResult};
pub use schedule::PartialSchedule;
pub use search::{local_search, SearchCtx, SearchOutcome, TauTooSmall};
pub use solvers::{
    binary_search_solve, combined_solve, initial_big_assignment, local_search_solve,
    matching_solve, solve_with_tau, Method, SolveOutcome, SolveReport, SolveStats, SolverError,
    TauOutcome,
};
