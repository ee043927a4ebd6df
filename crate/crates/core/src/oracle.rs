//! Independent brute-force references: exact optimal makespan for small
//! instances and exhaustive max-flow values for small networks.
//!
//! Nothing here shares code with the solvers it checks. The makespan search
//! enumerates eligible assignments directly and the flow search enumerates
//! integral arc flows; both are exact.

use num_traits::Zero;
use thiserror::Error;

use crate::flow::{Capacity, FlowNetwork};
use crate::instance::{Instance, JobId, Machine, Schedule};
use crate::numerics::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {0} jobs, above the brute-force cap of {1}")]
    TooManyJobs(usize, usize),
    #[error("instance has no machines but jobs exist")]
    NoMachines,
    #[error("network too large for exhaustive search: {0}")]
    NetworkTooLarge(String),
    #[error("epsilon denominator too large for the unit-load search")]
    EpsilonTooFine,
}

/// Exact optimum with a witness schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub opt_makespan: Rational,
    pub witness: Schedule,
}

pub const DEFAULT_JOB_CAP: usize = 12;

/// Exhaustive branch-and-bound over all eligible assignments.
///
/// Loads are tracked in integer units of `1/denominator(epsilon)`, so every
/// comparison is exact. Jobs are branched big-first and machines in
/// declaration order; a branch is cut once its partial maximum load reaches
/// the incumbent.
pub fn brute_force_opt(instance: &Instance) -> Result<OracleResult, OracleError> {
    brute_force_opt_capped(instance, DEFAULT_JOB_CAP)
}

pub fn brute_force_opt_capped(
    instance: &Instance,
    job_cap: usize,
) -> Result<OracleResult, OracleError> {
    if instance.job_count() > job_cap {
        return Err(OracleError::TooManyJobs(instance.job_count(), job_cap));
    }
    if instance.machine_count() == 0 {
        if instance.job_count() == 0 {
            return Ok(OracleResult {
                opt_makespan: Rational::zero(),
                witness: Schedule { assignment: vec![] },
            });
        }
        return Err(OracleError::NoMachines);
    }
    let den: u64 = instance
        .epsilon()
        .denom()
        .try_into()
        .map_err(|_| OracleError::EpsilonTooFine)?;
    let num: u64 = instance
        .epsilon()
        .numer()
        .try_into()
        .map_err(|_| OracleError::EpsilonTooFine)?;

    // Big jobs first: they prune hardest.
    let mut order: Vec<JobId> = instance.jobs().collect();
    order.sort_by_key(|j| (!instance.is_big(*j), j.ix()));
    let units: Vec<u64> = order
        .iter()
        .map(|j| if instance.is_big(*j) { den } else { num })
        .collect();

    struct Search<'a> {
        instance: &'a Instance,
        order: &'a [JobId],
        units: &'a [u64],
        loads: Vec<u64>,
        chosen: Vec<Machine>,
        best: u64,
        best_assignment: Option<Vec<Machine>>,
    }

    impl Search<'_> {
        fn run(&mut self, depth: usize) {
            if depth == self.order.len() {
                let current = self.loads.iter().copied().max().unwrap_or(0);
                if current < self.best {
                    self.best = current;
                    self.best_assignment = Some(self.chosen.clone());
                }
                return;
            }
            let job = self.order[depth];
            let size = self.units[depth];
            for &m in self.instance.eligible(job) {
                let new_load = self.loads[m.ix()] + size;
                if new_load >= self.best {
                    continue;
                }
                self.loads[m.ix()] = new_load;
                self.chosen.push(m);
                self.run(depth + 1);
                self.chosen.pop();
                self.loads[m.ix()] -= size;
            }
        }
    }

    let mut search = Search {
        instance,
        order: &order,
        units: &units,
        loads: vec![0; instance.machine_count()],
        chosen: Vec::with_capacity(order.len()),
        best: u64::MAX,
        best_assignment: None,
    };
    search.run(0);
    let best_units = search.best;
    let by_order = search
        .best_assignment
        .expect("non-empty eligibility sets guarantee a schedule");

    let mut assignment = vec![Machine(0); instance.job_count()];
    for (slot, j) in order.iter().enumerate() {
        assignment[j.ix()] = by_order[slot];
    }
    Ok(OracleResult {
        opt_makespan: Rational::new(best_units.into(), den.into()),
        witness: Schedule { assignment },
    })
}

pub const FLOW_NODE_CAP: usize = 8;
pub const FLOW_ARC_CAP: usize = 16;
pub const FLOW_CAPACITY_CAP: u64 = 3;

/// Exact maximum flow value by exhaustive search over integral flows.
///
/// Admits networks with at most [`FLOW_NODE_CAP`] nodes, [`FLOW_ARC_CAP`]
/// arcs, and finite capacities up to [`FLOW_CAPACITY_CAP`]; unbounded arcs
/// are bounded by the total finite capacity.
pub fn brute_force_max_flow(net: &FlowNetwork) -> Result<u64, OracleError> {
    if net.node_count() > FLOW_NODE_CAP {
        return Err(OracleError::NetworkTooLarge(format!(
            "{} nodes",
            net.node_count()
        )));
    }
    if net.arcs().len() > FLOW_ARC_CAP {
        return Err(OracleError::NetworkTooLarge(format!(
            "{} arcs",
            net.arcs().len()
        )));
    }
    let mut finite_total: u64 = 0;
    for arc in net.arcs() {
        if let Capacity::Finite(c) = arc.capacity {
            if c > FLOW_CAPACITY_CAP {
                return Err(OracleError::NetworkTooLarge(format!("capacity {c}")));
            }
            finite_total += c;
        }
    }
    for t in net.sinks() {
        finite_total += net.sink_capacity(*t).unwrap();
    }
    let bounds: Vec<u64> = net
        .arcs()
        .iter()
        .map(|a| match a.capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => finite_total,
        })
        .collect();

    let n = net.node_count();
    let is_source: Vec<bool> = (0..n)
        .map(|v| net.sources().binary_search(&v).is_ok())
        .collect();

    // Remaining adjustability per node if all undecided arcs went to their
    // bounds; used to cut branches that can no longer balance.
    let mut in_slack = vec![0i64; n];
    let mut out_slack = vec![0i64; n];
    for (k, arc) in net.arcs().iter().enumerate() {
        in_slack[arc.to] += bounds[k] as i64;
        out_slack[arc.from] += bounds[k] as i64;
    }

    struct Search<'a> {
        net: &'a FlowNetwork,
        bounds: &'a [u64],
        is_source: &'a [bool],
        balance: Vec<i64>, // inflow - outflow so far
        in_slack: Vec<i64>,
        out_slack: Vec<i64>,
        best: u64,
    }

    impl Search<'_> {
        fn feasible_so_far(&self, v: usize) -> bool {
            let b = self.balance[v];
            if let Some(cap) = self.net.sink_capacity(v) {
                // A sink absorbs at most its vertex capacity; through-flow
                // is unconstrained.
                b - self.out_slack[v] <= cap as i64 && b + self.in_slack[v] >= 0
            } else if self.is_source[v] {
                b - self.out_slack[v] <= 0
            } else {
                b - self.out_slack[v] <= 0 && b + self.in_slack[v] >= 0
            }
        }

        fn run(&mut self, k: usize) {
            if k == self.net.arcs().len() {
                let mut value = 0i64;
                for v in 0..self.net.node_count() {
                    let b = self.balance[v];
                    if let Some(cap) = self.net.sink_capacity(v) {
                        // absorbed = inflow - outflow lies in [0, cap]
                        if b < 0 || b > cap as i64 {
                            return;
                        }
                        value += b;
                    } else if self.is_source[v] {
                        if b > 0 {
                            return;
                        }
                    } else if b != 0 {
                        return;
                    }
                }
                self.best = self.best.max(value as u64);
                return;
            }
            let arc = self.net.arcs()[k];
            let bound = self.bounds[k];
            for f in 0..=bound {
                self.balance[arc.to] += f as i64;
                self.balance[arc.from] -= f as i64;
                self.in_slack[arc.to] -= bound as i64;
                self.out_slack[arc.from] -= bound as i64;
                if self.feasible_so_far(arc.to) && self.feasible_so_far(arc.from) {
                    self.run(k + 1);
                }
                self.in_slack[arc.to] += bound as i64;
                self.out_slack[arc.from] += bound as i64;
                self.balance[arc.to] -= f as i64;
                self.balance[arc.from] += f as i64;
            }
        }
    }

    let mut search = Search {
        net,
        bounds: &bounds,
        is_source: &is_source,
        balance: vec![0; n],
        in_slack,
        out_slack,
        best: 0,
    };
    search.run(0);
    Ok(search.best)
}
