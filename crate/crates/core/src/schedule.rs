//! Partial schedules and the flow-based relocation procedures.
//!
//! A [`PartialSchedule`] assigns every big job and a subset of the small
//! jobs while keeping each machine load at most `tau + r` and at most one
//! big job per machine. Jobs move only along paths of two flow networks:
//! one over big jobs with unit arcs and unit sink vertex capacities, one
//! over small jobs measured in whole-job units with sink capacities floored
//! from the remaining load headroom.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::flow::{self, Capacity, Flow, FlowArc, FlowNetwork};
use crate::instance::{Instance, JobId, Machine};
use crate::numerics::{floor_div, int, Params, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Flow(#[from] flow::FlowError),
}

/// Role of a flow-network node in schedule terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    MachineNode(Machine),
    JobNode(JobId),
}

/// Bijection between flow-network nodes and machines/jobs: machines occupy
/// nodes `0..machine_count` in declaration order, jobs follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTags {
    machine_count: usize,
    jobs: Vec<JobId>,
    job_nodes: BTreeMap<JobId, usize>,
}

impl NetworkTags {
    fn new(machine_count: usize, jobs: Vec<JobId>) -> Self {
        let job_nodes = jobs
            .iter()
            .enumerate()
            .map(|(k, j)| (*j, machine_count + k))
            .collect();
        NetworkTags {
            machine_count,
            jobs,
            job_nodes,
        }
    }

    pub fn machine_node(&self, m: Machine) -> usize {
        m.ix()
    }

    pub fn job_node(&self, j: JobId) -> Option<usize> {
        self.job_nodes.get(&j).copied()
    }

    pub fn role(&self, node: usize) -> NodeRole {
        if node < self.machine_count {
            NodeRole::MachineNode(Machine(node as u32))
        } else {
            NodeRole::JobNode(self.jobs[node - self.machine_count])
        }
    }

    pub fn node_count(&self) -> usize {
        self.machine_count + self.jobs.len()
    }
}

/// A flow network together with its node labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledNetwork {
    pub network: FlowNetwork,
    pub tags: NetworkTags,
}

/// An alternating machine/job path `m_0, j_0, m_1, ..., j_{k-1}, m_k`
/// where `j_l` is currently assigned to `m_l` and eligible on `m_{l+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltPath {
    pub machines: Vec<Machine>,
    pub jobs: Vec<JobId>,
}

impl AltPath {
    pub fn source(&self) -> Machine {
        self.machines[0]
    }

    pub fn sink(&self) -> Machine {
        *self.machines.last().unwrap()
    }

    /// Interpret a node sequence from a flow decomposition.
    pub fn from_nodes(tags: &NetworkTags, nodes: &[usize]) -> Result<Self, ScheduleError> {
        let mut machines = Vec::new();
        let mut jobs = Vec::new();
        for (k, n) in nodes.iter().enumerate() {
            match tags.role(*n) {
                NodeRole::MachineNode(m) if k % 2 == 0 => machines.push(m),
                NodeRole::JobNode(j) if k % 2 == 1 => jobs.push(j),
                _ => {
                    return Err(ScheduleError::Precondition(
                        "flow path does not alternate machines and jobs".into(),
                    ))
                }
            }
        }
        if machines.len() != jobs.len() + 1 {
            return Err(ScheduleError::Precondition(
                "flow path must start and end at machines".into(),
            ));
        }
        Ok(AltPath { machines, jobs })
    }
}

/// The residual relocation flow returned by [`PartialSchedule::small_update`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelocationFlow {
    pub network: FlowNetwork,
    pub flow: Flow,
    /// Load moved per unit path: 1 for big jobs, epsilon for small jobs.
    pub unit_value: Rational,
    pub tags: NetworkTags,
    /// Path decomposition of `flow`, kept aligned with it.
    pub paths: Vec<AltPath>,
}

impl RelocationFlow {
    /// Flow value in load units (`unit_value` times the unit path count).
    pub fn load_value(&self) -> Rational {
        &self.unit_value * int(self.flow.value as i64)
    }

    pub fn paths_from(&self, source: Machine) -> usize {
        self.paths.iter().filter(|p| p.source() == source).count()
    }
}

/// A partial schedule: all big jobs placed, small jobs placed or TBD,
/// machine loads capped at `tau + r`, at most one big job per machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSchedule {
    instance: Arc<Instance>,
    params: Arc<Params>,
    tau: Rational,
    assignment: Vec<Option<Machine>>,
    loads: Vec<Rational>,
    big_on: Vec<Option<JobId>>,
    small_on: Vec<BTreeSet<JobId>>,
    /// tau + r
    load_cap: Rational,
    /// tau + r - epsilon
    small_slack: Rational,
    /// tau + r - 1
    big_slack: Rational,
}

impl PartialSchedule {
    /// Build a partial schedule from a placement of every big job; all
    /// small jobs start out TBD.
    pub fn new(
        instance: Arc<Instance>,
        tau: Rational,
        params: Arc<Params>,
        big_placement: &BTreeMap<JobId, Machine>,
    ) -> Result<Self, ScheduleError> {
        let m = instance.machine_count();
        let load_cap = &tau + &params.r;
        let small_slack = &load_cap - instance.epsilon();
        let big_slack = &load_cap - int(1);
        let mut sched = PartialSchedule {
            assignment: vec![None; instance.job_count()],
            loads: vec![Rational::zero(); m],
            big_on: vec![None; m],
            small_on: vec![BTreeSet::new(); m],
            instance,
            params,
            tau,
            load_cap,
            small_slack,
            big_slack,
        };
        for j in sched.instance.big_jobs() {
            let Some(&machine) = big_placement.get(j) else {
                return Err(ScheduleError::Domain(format!(
                    "big job {} left unplaced",
                    sched.instance.job(*j).name
                )));
            };
            if !sched.instance.eligible(*j).contains(&machine) {
                return Err(ScheduleError::Domain(format!(
                    "big job {} not eligible on its machine",
                    sched.instance.job(*j).name
                )));
            }
            if sched.big_on[machine.ix()].is_some() {
                return Err(ScheduleError::Domain(format!(
                    "machine {} would hold two big jobs",
                    sched.instance.machine_name(machine)
                )));
            }
            sched.big_on[machine.ix()] = Some(*j);
            sched.assignment[j.ix()] = Some(machine);
            sched.loads[machine.ix()] += int(1);
        }
        if sched.loads.iter().any(|l| *l > sched.load_cap) {
            return Err(ScheduleError::Domain(
                "initial big placement exceeds the load cap".into(),
            ));
        }
        Ok(sched)
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn params(&self) -> &Arc<Params> {
        &self.params
    }

    pub fn tau(&self) -> &Rational {
        &self.tau
    }

    /// tau + r, the hard per-machine load cap.
    pub fn load_cap(&self) -> &Rational {
        &self.load_cap
    }

    /// tau + r - epsilon: a machine at or below this can absorb a small job.
    pub fn small_slack(&self) -> &Rational {
        &self.small_slack
    }

    /// tau + r - 1: a machine at or below this can absorb a big job.
    pub fn big_slack(&self) -> &Rational {
        &self.big_slack
    }

    pub fn load(&self, m: Machine) -> &Rational {
        &self.loads[m.ix()]
    }

    pub fn assignment(&self, j: JobId) -> Option<Machine> {
        self.assignment[j.ix()]
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn big_job_on(&self, m: Machine) -> Option<JobId> {
        self.big_on[m.ix()]
    }

    pub fn small_jobs_on(&self, m: Machine) -> &BTreeSet<JobId> {
        &self.small_on[m.ix()]
    }

    pub fn is_big_machine(&self, m: Machine) -> bool {
        self.big_on[m.ix()].is_some()
    }

    /// Machines currently holding a big job, in declaration order.
    pub fn big_machines(&self) -> BTreeSet<Machine> {
        self.instance
            .machines()
            .filter(|m| self.is_big_machine(*m))
            .collect()
    }

    /// Machines without a big job, in declaration order.
    pub fn small_machines(&self) -> BTreeSet<Machine> {
        self.instance
            .machines()
            .filter(|m| !self.is_big_machine(*m))
            .collect()
    }

    /// Convert into a total [`crate::instance::Schedule`]; fails if any job
    /// is still TBD.
    pub fn into_schedule(self) -> Result<crate::instance::Schedule, ScheduleError> {
        let assignment: Option<Vec<Machine>> = self.assignment.iter().copied().collect();
        match assignment {
            Some(assignment) => Ok(crate::instance::Schedule { assignment }),
            None => Err(ScheduleError::Domain("schedule still has TBD jobs".into())),
        }
    }

    /// Move one assigned job to an eligible machine, maintaining all caches.
    pub(crate) fn relocate(&mut self, j: JobId, to: Machine) -> Result<(), ScheduleError> {
        let from = self.assignment[j.ix()].ok_or_else(|| {
            ScheduleError::Precondition(format!(
                "job {} is not assigned",
                self.instance.job(j).name
            ))
        })?;
        if !self.instance.eligible(j).contains(&to) {
            return Err(ScheduleError::Precondition(format!(
                "job {} is not eligible on {}",
                self.instance.job(j).name,
                self.instance.machine_name(to)
            )));
        }
        let size = self.instance.size(j);
        if self.instance.is_big(j) {
            if self.big_on[to.ix()].is_some() {
                return Err(ScheduleError::Precondition(format!(
                    "machine {} already holds a big job",
                    self.instance.machine_name(to)
                )));
            }
            self.big_on[from.ix()] = None;
            self.big_on[to.ix()] = Some(j);
        } else {
            self.small_on[from.ix()].remove(&j);
            self.small_on[to.ix()].insert(j);
        }
        self.loads[from.ix()] -= &size;
        self.loads[to.ix()] += &size;
        self.assignment[j.ix()] = Some(to);
        if self.loads[to.ix()] > self.load_cap {
            return Err(ScheduleError::Precondition(format!(
                "move of {} onto {} breaks the load cap",
                self.instance.job(j).name,
                self.instance.machine_name(to)
            )));
        }
        Ok(())
    }

    /// Assign a TBD small job directly (the final step of a successful
    /// search). The target load must leave room.
    pub(crate) fn place_small(&mut self, j: JobId, to: Machine) -> Result<(), ScheduleError> {
        if self.assignment[j.ix()].is_some() {
            return Err(ScheduleError::Precondition(format!(
                "job {} is already assigned",
                self.instance.job(j).name
            )));
        }
        if self.instance.is_big(j) {
            return Err(ScheduleError::Precondition(
                "place_small called on a big job".into(),
            ));
        }
        if !self.instance.eligible(j).contains(&to) {
            return Err(ScheduleError::Precondition(format!(
                "job {} is not eligible on {}",
                self.instance.job(j).name,
                self.instance.machine_name(to)
            )));
        }
        if self.loads[to.ix()] > self.small_slack {
            return Err(ScheduleError::Precondition(format!(
                "machine {} has no room for another small job",
                self.instance.machine_name(to)
            )));
        }
        self.small_on[to.ix()].insert(j);
        self.loads[to.ix()] += self.instance.epsilon();
        self.assignment[j.ix()] = Some(to);
        Ok(())
    }

    /// Full recomputation of the cached loads and structures; used by the
    /// debug assertions and tests.
    pub fn check_consistent(&self) -> Result<(), ScheduleError> {
        let mut loads = vec![Rational::zero(); self.instance.machine_count()];
        for j in self.instance.jobs() {
            if let Some(m) = self.assignment[j.ix()] {
                loads[m.ix()] += self.instance.size(j);
                if self.instance.is_big(j) {
                    if self.big_on[m.ix()] != Some(j) {
                        return Err(ScheduleError::Domain("big_on cache out of sync".into()));
                    }
                } else if !self.small_on[m.ix()].contains(&j) {
                    return Err(ScheduleError::Domain("small_on cache out of sync".into()));
                }
            }
        }
        if loads != self.loads {
            return Err(ScheduleError::Domain("cached loads out of sync".into()));
        }
        for j in self.instance.big_jobs() {
            if self.assignment[j.ix()].is_none() {
                return Err(ScheduleError::Domain("big job unassigned".into()));
            }
        }
        for l in &self.loads {
            if *l > self.load_cap {
                return Err(ScheduleError::Domain("load cap exceeded".into()));
            }
        }
        Ok(())
    }

    /// Machines reachable from `seed` by alternating small-job arcs: from a
    /// machine to each small job assigned to it, from a small job to every
    /// other eligible machine. Always contains `seed`.
    pub fn small_reachable(&self, seed: &BTreeSet<Machine>) -> BTreeSet<Machine> {
        let mut reached = seed.clone();
        let mut queue: Vec<Machine> = seed.iter().copied().collect();
        while let Some(m) = queue.pop() {
            for &j in &self.small_on[m.ix()] {
                for &m2 in self.instance.eligible(j) {
                    if reached.insert(m2) {
                        queue.push(m2);
                    }
                }
            }
        }
        reached
    }

    /// The flow network over big-job arcs with sources `sources` and sinks
    /// `sinks` (unit machine-to-job arcs, unit sink vertex capacities).
    pub fn build_big_network(
        &self,
        sources: &BTreeSet<Machine>,
        sinks: &BTreeSet<Machine>,
    ) -> Result<LabeledNetwork, ScheduleError> {
        for s in sources {
            if !self.is_big_machine(*s) {
                return Err(ScheduleError::Domain(format!(
                    "source {} is not a big machine",
                    self.instance.machine_name(*s)
                )));
            }
        }
        for t in sinks {
            if self.is_big_machine(*t) {
                return Err(ScheduleError::Domain(format!(
                    "sink {} is not a small machine",
                    self.instance.machine_name(*t)
                )));
            }
        }
        let machine_count = self.instance.machine_count();
        let tags = NetworkTags::new(machine_count, self.instance.big_jobs().to_vec());
        let mut arcs = Vec::new();
        for m in self.instance.machines() {
            if let Some(j) = self.big_on[m.ix()] {
                arcs.push(FlowArc {
                    from: tags.machine_node(m),
                    to: tags.job_node(j).unwrap(),
                    capacity: Capacity::Finite(1),
                });
            }
        }
        for &j in self.instance.big_jobs() {
            let here = self.assignment[j.ix()];
            for &m in self.instance.eligible(j) {
                if Some(m) != here {
                    arcs.push(FlowArc {
                        from: tags.job_node(j).unwrap(),
                        to: tags.machine_node(m),
                        capacity: Capacity::Unbounded,
                    });
                }
            }
        }
        let sink_capacity: BTreeMap<usize, u64> =
            sinks.iter().map(|t| (tags.machine_node(*t), 1)).collect();
        let network = FlowNetwork::new(
            tags.node_count(),
            arcs,
            sources.iter().map(|s| tags.machine_node(*s)).collect(),
            sinks.iter().map(|t| tags.machine_node(*t)).collect(),
            sink_capacity,
        )?;
        Ok(LabeledNetwork { network, tags })
    }

    /// Remaining load headroom of sink `m` in the small-job network:
    /// `1 + tau + r - load - epsilon` for big machines (the big job could
    /// still leave), `tau + r - load` for small machines.
    pub fn small_sink_headroom(&self, m: Machine) -> Rational {
        if self.is_big_machine(m) {
            int(1) + &self.load_cap - &self.loads[m.ix()] - self.instance.epsilon()
        } else {
            &self.load_cap - &self.loads[m.ix()]
        }
    }

    /// The flow network over small-job arcs in whole-job units: unit
    /// machine-to-job arcs and sink vertex capacities
    /// `floor(headroom / epsilon)`.
    pub fn build_small_network(
        &self,
        sources: &BTreeSet<Machine>,
        sinks: &BTreeSet<Machine>,
    ) -> Result<LabeledNetwork, ScheduleError> {
        for s in sources {
            if !self.is_big_machine(*s) {
                continue;
            }
            return Err(ScheduleError::Domain(format!(
                "source {} is not a small machine",
                self.instance.machine_name(*s)
            )));
        }
        if sources.intersection(sinks).next().is_some() {
            return Err(ScheduleError::Domain(
                "small-network sources and sinks overlap".into(),
            ));
        }
        let machine_count = self.instance.machine_count();
        let assigned_smalls: Vec<JobId> = self
            .instance
            .small_jobs()
            .iter()
            .copied()
            .filter(|j| self.assignment[j.ix()].is_some())
            .collect();
        let tags = NetworkTags::new(machine_count, assigned_smalls.clone());
        let mut arcs = Vec::new();
        for m in self.instance.machines() {
            for &j in &self.small_on[m.ix()] {
                arcs.push(FlowArc {
                    from: tags.machine_node(m),
                    to: tags.job_node(j).unwrap(),
                    capacity: Capacity::Finite(1),
                });
            }
        }
        for &j in &assigned_smalls {
            let here = self.assignment[j.ix()];
            for &m in self.instance.eligible(j) {
                if Some(m) != here {
                    arcs.push(FlowArc {
                        from: tags.job_node(j).unwrap(),
                        to: tags.machine_node(m),
                        capacity: Capacity::Unbounded,
                    });
                }
            }
        }
        let eps = self.instance.epsilon();
        let sink_capacity: BTreeMap<usize, u64> = sinks
            .iter()
            .map(|t| {
                let headroom = self.small_sink_headroom(*t);
                let jobs: u64 = floor_div(&headroom, eps).try_into().unwrap_or(0);
                (tags.machine_node(*t), jobs)
            })
            .collect();
        let network = FlowNetwork::new(
            tags.node_count(),
            arcs,
            sources.iter().map(|s| tags.machine_node(*s)).collect(),
            sinks.iter().map(|t| tags.machine_node(*t)).collect(),
            sink_capacity,
        )?;
        Ok(LabeledNetwork { network, tags })
    }

    /// Maximum-flow value of the big network, in unit paths.
    pub fn big_flow_value(
        &self,
        sources: &BTreeSet<Machine>,
        sinks: &BTreeSet<Machine>,
    ) -> Result<u64, ScheduleError> {
        let labeled = self.build_big_network(sources, sinks)?;
        Ok(flow::max_flow(&labeled.network)?.value)
    }

    /// Maximum-flow value of the small network, in whole jobs.
    pub fn small_flow_value(
        &self,
        sources: &BTreeSet<Machine>,
        sinks: &BTreeSet<Machine>,
    ) -> Result<u64, ScheduleError> {
        let labeled = self.build_small_network(sources, sinks)?;
        Ok(flow::max_flow(&labeled.network)?.value)
    }

    /// Relocate big jobs along vertex-disjoint paths. Every path must end
    /// at a small machine with load at most `tau + r - 1`; each path's
    /// source machine loses its big job.
    pub fn big_update(&self, paths: &[AltPath]) -> Result<PartialSchedule, ScheduleError> {
        let mut seen: BTreeSet<Machine> = BTreeSet::new();
        let mut seen_jobs: BTreeSet<JobId> = BTreeSet::new();
        for p in paths {
            for m in &p.machines {
                if !seen.insert(*m) {
                    return Err(ScheduleError::Precondition(
                        "big-update paths share a machine".into(),
                    ));
                }
            }
            for j in &p.jobs {
                if !seen_jobs.insert(*j) {
                    return Err(ScheduleError::Precondition(
                        "big-update paths share a job".into(),
                    ));
                }
            }
            if self.loads[p.sink().ix()] > self.big_slack {
                return Err(ScheduleError::Precondition(format!(
                    "path sink {} is too loaded for a big job",
                    self.instance.machine_name(p.sink())
                )));
            }
        }
        let mut next = self.clone();
        for p in paths {
            for (l, &j) in p.jobs.iter().enumerate() {
                if next.assignment[j.ix()] != Some(p.machines[l]) {
                    return Err(ScheduleError::Precondition(
                        "big-update path does not match the assignment".into(),
                    ));
                }
                next.relocate(j, p.machines[l + 1])?;
            }
        }
        debug_assert!(next.check_consistent().is_ok());
        Ok(next)
    }

    /// Relocate small jobs out of `sources` into `sinks`: maximize flow
    /// into low-load sinks first, augment over all sinks, then repeatedly
    /// drain any path whose sink still has room for a small job.
    ///
    /// Returns the updated schedule and the surviving maximum flow.
    pub fn small_update(
        &self,
        sources: &BTreeSet<Machine>,
        sinks: &BTreeSet<Machine>,
    ) -> Result<(PartialSchedule, RelocationFlow), ScheduleError> {
        let low_sinks: BTreeSet<Machine> = sinks
            .iter()
            .copied()
            .filter(|t| self.loads[t.ix()] <= self.small_slack)
            .collect();
        let restricted = self.build_small_network(sources, &low_sinks)?;
        let seeded = flow::max_flow(&restricted.network)?;
        let full = self.build_small_network(sources, sinks)?;
        debug_assert!(restricted.network.same_arcs(&full.network));
        let max = flow::augment(&full.network, &seeded)?;
        let decomposition = flow::decompose(&full.network, &max)?;
        let mut paths: Vec<Option<AltPath>> = decomposition
            .paths
            .iter()
            .map(|nodes| AltPath::from_nodes(&full.tags, nodes).map(Some))
            .collect::<Result<_, _>>()?;

        let mut next = self.clone();
        loop {
            let target = paths.iter().position(|p| {
                p.as_ref()
                    .is_some_and(|p| next.loads[p.sink().ix()] <= next.small_slack)
            });
            let Some(slot) = target else { break };
            let path = paths[slot].take().unwrap();
            for (l, &j) in path.jobs.iter().enumerate() {
                if next.assignment[j.ix()] != Some(path.machines[l]) {
                    return Err(ScheduleError::Precondition(
                        "small-update path does not match the assignment".into(),
                    ));
                }
                next.relocate(j, path.machines[l + 1])?;
            }
        }

        // Rebuild the surviving flow from the kept paths.
        let surviving: Vec<AltPath> = paths.into_iter().flatten().collect();
        let mut arc_flow = vec![0u64; full.network.arcs().len()];
        let mut arc_index: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (k, arc) in full.network.arcs().iter().enumerate() {
            arc_index.entry((arc.from, arc.to)).or_default().push(k);
        }
        for p in &surviving {
            for l in 0..p.jobs.len() {
                let mfrom = full.tags.machine_node(p.machines[l]);
                let job = full.tags.job_node(p.jobs[l]).unwrap();
                let mto = full.tags.machine_node(p.machines[l + 1]);
                for (a, b) in [(mfrom, job), (job, mto)] {
                    let k = arc_index[&(a, b)][0];
                    arc_flow[k] += 1;
                }
            }
        }
        let reloc = RelocationFlow {
            flow: Flow {
                arc_flow,
                value: surviving.len() as u64,
            },
            unit_value: self.instance.epsilon().clone(),
            network: full.network,
            tags: full.tags,
            paths: surviving,
        };
        debug_assert!(next.check_consistent().is_ok());
        Ok((next, reloc))
    }
}
