//! The layered local search that inserts one pending small job into a
//! partial schedule.
//!
//! The search grows layers of machines reachable through small-job
//! relocations. Each layer's sources are small machines admitted by an
//! exact flow test; progress is made by collapsing a layer once enough of
//! its sources become lightly loaded, moving big jobs along a canonical
//! staged flow and refilling with small-job relocations. A strictly
//! decreasing per-layer signature bounds the number of main-loop
//! iterations. Every analysis invariant is also wired up as an optional
//! runtime monitor, and any failure is treated as evidence that the current
//! makespan guess is below the feasible threshold.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::flow;
use crate::instance::{JobId, Machine};
use crate::numerics::{floor_log, int, Rational};
use crate::schedule::{AltPath, PartialSchedule, ScheduleError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("iteration guard tripped after {0} main-loop iterations")]
    IterationGuard(u64),
    #[error("search invariant broke: {0}")]
    Internal(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Flow(#[from] flow::FlowError),
}

/// Operational signal that the current makespan guess is too small. Not a
/// fault: the feasibility driver reacts by probing a larger guess.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TauTooSmall {
    /// The big jobs admit no machine-disjoint placement (a Hall violation
    /// certifies infeasibility of the guess).
    BigJobsUnmatchable,
    /// No big machine is reachable from the pending job's eligibility set.
    NoBigMachineReachable,
    /// A freshly built layer came out smaller than `mu1 |B_{<=ell}|`.
    LayerTooSmall { layer: usize },
    /// The collapse loop found no layer with a large enough exclusion set.
    CollapseChoiceUnavailable,
    /// A signature coordinate was undefined (a fringe lost its last big
    /// machine).
    SignatureUndefined { layer: usize },
    /// The signature failed to decrease lexicographically.
    SignatureNotDecreasing,
    /// No relocation chain reaches a machine with room for the pending job.
    NoRelocationPath,
    /// An instrumented analysis invariant failed.
    MonitorViolation(String),
}

impl std::fmt::Display for TauTooSmall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TauTooSmall::BigJobsUnmatchable => write!(f, "big jobs admit no placement"),
            TauTooSmall::NoBigMachineReachable => write!(f, "no reachable big machine"),
            TauTooSmall::LayerTooSmall { layer } => write!(f, "layer {layer} too small"),
            TauTooSmall::CollapseChoiceUnavailable => write!(f, "no collapsible prefix"),
            TauTooSmall::SignatureUndefined { layer } => {
                write!(f, "signature undefined at layer {layer}")
            }
            TauTooSmall::SignatureNotDecreasing => write!(f, "signature did not decrease"),
            TauTooSmall::NoRelocationPath => write!(f, "no relocation path for the pending job"),
            TauTooSmall::MonitorViolation(v) => write!(f, "monitor violation: {v}"),
        }
    }
}

/// One layer: source machines `A_i` and their reachability fringe `B_i`.
/// Layer 0 is anchored at the pending job, so its source set stays empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub sources: BTreeSet<Machine>,
    pub fringe: BTreeSet<Machine>,
}

/// The full search state: the evolving schedule, the pending job, layers
/// `L_0..L_ell` and exclusion sets `I_0..I_ell`.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub schedule: PartialSchedule,
    pub pending: JobId,
    pub layers: Vec<Layer>,
    pub exclusions: Vec<BTreeSet<Machine>>,
}

/// Per-layer integer potential plus an implicit trailing infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub coords: Vec<u64>,
}

impl Signature {
    /// Lexicographic comparison treating the element one past the end as
    /// infinity.
    pub fn lex_lt(&self, other: &Signature) -> bool {
        let n = self.coords.len().max(other.coords.len());
        for k in 0..n {
            match (self.coords.get(k), other.coords.get(k)) {
                (Some(a), Some(b)) if a == b => continue,
                (Some(a), Some(b)) => return a < b,
                // A missing coordinate is the trailing infinity.
                (Some(_), None) => return true,
                (None, _) => return false,
            }
        }
        false
    }
}

/// Deterministic counters accumulated across a solve.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub local_search_calls: u64,
    pub main_loop_iterations: u64,
    pub layers_built: u64,
    pub collapse_steps: u64,
    pub big_updates: u64,
    pub small_updates: u64,
    pub flow_computations: u64,
}

/// Instrumentation switches and counters threaded through a solve.
#[derive(Debug, Default)]
pub struct SearchCtx {
    /// Run every analysis invariant as an assertion; violations are
    /// recorded and reported as [`TauTooSmall::MonitorViolation`].
    pub check_invariants: bool,
    pub stats: SearchStats,
    pub violations: Vec<String>,
}

impl SearchCtx {
    pub fn instrumented() -> Self {
        SearchCtx {
            check_invariants: true,
            ..Default::default()
        }
    }
}

pub type SearchResult<T> = Result<T, SearchError>;

impl SearchState {
    pub fn new(schedule: PartialSchedule, pending: JobId) -> Self {
        let seed: BTreeSet<Machine> = schedule
            .instance()
            .eligible(pending)
            .iter()
            .copied()
            .collect();
        let fringe = schedule.small_reachable(&seed);
        SearchState {
            schedule,
            pending,
            layers: vec![Layer {
                sources: BTreeSet::new(),
                fringe,
            }],
            exclusions: vec![BTreeSet::new()],
        }
    }

    pub fn ell(&self) -> usize {
        self.layers.len() - 1
    }

    /// `L_{<=upto}` as a machine set.
    pub fn layer_union_upto(&self, upto: usize) -> BTreeSet<Machine> {
        let mut out = BTreeSet::new();
        for layer in &self.layers[..=upto] {
            out.extend(layer.sources.iter().copied());
            out.extend(layer.fringe.iter().copied());
        }
        out
    }

    pub fn layer_union(&self) -> BTreeSet<Machine> {
        self.layer_union_upto(self.ell())
    }

    /// `I_{<=upto}` as a machine set.
    pub fn exclusion_union_upto(&self, upto: usize) -> BTreeSet<Machine> {
        let mut out = BTreeSet::new();
        for e in &self.exclusions[..=upto] {
            out.extend(e.iter().copied());
        }
        out
    }

    pub fn exclusion_union(&self) -> BTreeSet<Machine> {
        self.exclusion_union_upto(self.ell())
    }

    /// `B_{<=upto}`.
    pub fn fringe_union_upto(&self, upto: usize) -> BTreeSet<Machine> {
        let mut out = BTreeSet::new();
        for layer in &self.layers[..=upto] {
            out.extend(layer.fringe.iter().copied());
        }
        out
    }

    /// `B_i` intersected with the current big machines.
    pub fn big_fringe(&self, i: usize) -> BTreeSet<Machine> {
        self.layers[i]
            .fringe
            .iter()
            .copied()
            .filter(|m| self.schedule.is_big_machine(*m))
            .collect()
    }

    /// `B_{<=upto}` intersected with the current big machines.
    pub fn big_fringe_union_upto(&self, upto: usize) -> BTreeSet<Machine> {
        self.fringe_union_upto(upto)
            .into_iter()
            .filter(|m| self.schedule.is_big_machine(*m))
            .collect()
    }

    /// Complement `T = M \ (L_{<=ell} U I_{<=ell} U extra)`.
    pub fn complement(&self, extra: &BTreeSet<Machine>) -> BTreeSet<Machine> {
        let blocked: BTreeSet<Machine> = self
            .layer_union()
            .into_iter()
            .chain(self.exclusion_union())
            .chain(extra.iter().copied())
            .collect();
        self.schedule
            .instance()
            .machines()
            .filter(|m| !blocked.contains(m))
            .collect()
    }
}

/// `tau - 1 + r - delta`: the load level a candidate source must justify
/// with relocation capacity before joining a layer.
fn addable_slack(sched: &PartialSchedule) -> Rational {
    sched.tau() + &sched.params().r - int(1) - &sched.params().delta
}

/// Exact comparison `eps * grown >= eps * base + (load - (tau-1+r-delta))`.
fn small_gain_sufficient(
    sched: &PartialSchedule,
    candidate: Machine,
    base_jobs: u64,
    grown_jobs: u64,
) -> bool {
    let eps = sched.instance().epsilon();
    let lhs = eps * int(grown_jobs as i64);
    let rhs = eps * int(base_jobs as i64) + sched.load(candidate) - addable_slack(sched);
    lhs >= rhs
}

/// Decide whether `candidate` can join the next layer's source set
/// `partial`: it must be an untouched small machine, buy one more
/// big-relocation option, and add enough small-relocation capacity to cover
/// its own load overhang. All comparisons are exact.
pub fn is_addable(
    state: &SearchState,
    candidate: Machine,
    partial: &BTreeSet<Machine>,
    ctx: &mut SearchCtx,
) -> SearchResult<bool> {
    let sched = &state.schedule;
    if sched.is_big_machine(candidate) {
        return Ok(false);
    }
    let touched = state.layer_union();
    let excluded = state.exclusion_union();
    if touched.contains(&candidate) || excluded.contains(&candidate) || partial.contains(&candidate)
    {
        return Ok(false);
    }
    let big_sources = state.big_fringe_union_upto(state.ell());
    let with_candidate: BTreeSet<Machine> = partial.iter().copied().chain([candidate]).collect();
    ctx.stats.flow_computations += 2;
    let base_big = sched.big_flow_value(&big_sources, partial)?;
    let grown_big = sched.big_flow_value(&big_sources, &with_candidate)?;
    if grown_big != base_big + 1 {
        return Ok(false);
    }
    let t = state.complement(partial);
    let t_minus: BTreeSet<Machine> = t.iter().copied().filter(|m| *m != candidate).collect();
    ctx.stats.flow_computations += 2;
    let base_small = sched.small_flow_value(partial, &t)?;
    let grown_small = sched.small_flow_value(&with_candidate, &t_minus)?;
    Ok(small_gain_sufficient(sched, candidate, base_small, grown_small))
}

/// Outcome of building one layer.
#[derive(Debug)]
pub enum LayerOutcome {
    Built {
        sources: BTreeSet<Machine>,
        fringe: BTreeSet<Machine>,
    },
    /// Fewer than `mu1 |B_{<=ell}|` machines were addable.
    TooSmall,
    /// An instrumented invariant failed along the way.
    Monitor(String),
}

/// Construct the next layer: greedily admit addable machines in declaration
/// order, relocating small jobs after each admission, then compute the new
/// fringe. Mutates `state.schedule` through the relocations.
pub fn build_layer(state: &mut SearchState, ctx: &mut SearchCtx) -> SearchResult<LayerOutcome> {
    ctx.stats.layers_built += 1;
    let mut sources: BTreeSet<Machine> = BTreeSet::new();
    loop {
        // One scan per admission: cache the base flow values for the
        // current source set, recompute only the grown side per candidate.
        let sched = &state.schedule;
        let big_sources = state.big_fringe_union_upto(state.ell());
        let t = state.complement(&sources);
        ctx.stats.flow_computations += 2;
        let base_big = sched.big_flow_value(&big_sources, &sources)?;
        let base_small = sched.small_flow_value(&sources, &t)?;
        let touched = state.layer_union();
        let excluded = state.exclusion_union();

        let mut admitted = None;
        for candidate in state.schedule.instance().machines() {
            let sched = &state.schedule;
            if sched.is_big_machine(candidate)
                || touched.contains(&candidate)
                || excluded.contains(&candidate)
                || sources.contains(&candidate)
            {
                continue;
            }
            let with_candidate: BTreeSet<Machine> =
                sources.iter().copied().chain([candidate]).collect();
            ctx.stats.flow_computations += 1;
            let grown_big = sched.big_flow_value(&big_sources, &with_candidate)?;
            if grown_big != base_big + 1 {
                continue;
            }
            let t_minus: BTreeSet<Machine> =
                t.iter().copied().filter(|m| *m != candidate).collect();
            ctx.stats.flow_computations += 1;
            let grown_small = sched.small_flow_value(&with_candidate, &t_minus)?;
            if small_gain_sufficient(sched, candidate, base_small, grown_small) {
                admitted = Some((candidate, with_candidate, t_minus));
                break;
            }
        }
        let Some((candidate, with_candidate, t_minus)) = admitted else {
            break;
        };
        ctx.stats.small_updates += 1;
        ctx.stats.flow_computations += 2;
        let (next, _) = state.schedule.small_update(&with_candidate, &t_minus)?;
        state.schedule = next;
        sources.insert(candidate);
        if ctx.check_invariants {
            if let Some(v) = check_no_low_sink_reachable(state, &with_candidate, &t_minus, ctx) {
                return Ok(LayerOutcome::Monitor(v));
            }
        }
    }

    // The always-on layer-size signal: |A_new| >= mu1 |B_{<=ell}|.
    let fringe_total = state.fringe_union_upto(state.ell()).len();
    let needed = &state.schedule.params().mu1 * int(fringe_total as i64);
    if int(sources.len() as i64) < needed {
        return Ok(LayerOutcome::TooSmall);
    }
    let reach = state.schedule.small_reachable(&sources);
    let blocked: BTreeSet<Machine> = state
        .layer_union()
        .into_iter()
        .chain(state.exclusion_union())
        .chain(sources.iter().copied())
        .collect();
    let fringe: BTreeSet<Machine> = reach.difference(&blocked).copied().collect();
    Ok(LayerOutcome::Built { sources, fringe })
}

/// Post-relocation monitor: no machine of `sinks` with room for a small
/// job may stay reachable from `sources`.
fn check_no_low_sink_reachable(
    state: &SearchState,
    sources: &BTreeSet<Machine>,
    sinks: &BTreeSet<Machine>,
    ctx: &mut SearchCtx,
) -> Option<String> {
    let sched = &state.schedule;
    let reach = sched.small_reachable(sources);
    for t in sinks {
        if reach.contains(t) && sched.load(*t) <= sched.small_slack() {
            let v = format!(
                "small update left low-load sink {} reachable",
                sched.instance().machine_name(*t)
            );
            ctx.violations.push(v.clone());
            return Some(v);
        }
    }
    None
}

/// The canonical staged flow over big-job arcs plus its per-layer sink
/// partition `I'_1..I'_ell` (index 0 of `refined` holds `I'_1`).
#[derive(Debug)]
pub struct Decomposition {
    pub refined: Vec<BTreeSet<Machine>>,
    pub paths: Vec<AltPath>,
}

/// Compute the maximum flow from `B_0` into `I_{<=ell} U extra`, then
/// augment it for each source prefix `B_{<=i}`, `i = 1..ell-1`. `I'_i`
/// collects the sinks of paths whose source lies in `B_{i-1}`.
pub fn canonical_decomposition(
    state: &SearchState,
    extra: &BTreeSet<Machine>,
    ctx: &mut SearchCtx,
) -> SearchResult<Decomposition> {
    let ell = state.ell();
    debug_assert!(ell >= 1);
    let sched = &state.schedule;
    let sinks: BTreeSet<Machine> = state
        .exclusion_union()
        .into_iter()
        .chain(extra.iter().copied())
        .collect();
    let mut labeled = sched.build_big_network(&state.big_fringe(0), &sinks)?;
    ctx.stats.flow_computations += 1;
    let mut current = flow::max_flow(&labeled.network)?;
    for i in 1..ell {
        let wider = sched.build_big_network(&state.big_fringe_union_upto(i), &sinks)?;
        debug_assert!(wider.network.same_arcs(&labeled.network));
        ctx.stats.flow_computations += 1;
        current = flow::augment(&wider.network, &current)?;
        labeled = wider;
    }
    let decomposition = flow::decompose(&labeled.network, &current)?;
    let paths: Vec<AltPath> = decomposition
        .paths
        .iter()
        .map(|nodes| AltPath::from_nodes(&labeled.tags, nodes))
        .collect::<Result<_, _>>()?;

    let mut refined = vec![BTreeSet::new(); ell];
    for p in &paths {
        let source = p.source();
        let layer = (0..ell)
            .find(|i| state.layers[*i].fringe.contains(&source))
            .ok_or_else(|| SearchError::Internal("flow path source outside every fringe".into()))?;
        refined[layer].insert(p.sink());
    }
    Ok(Decomposition { refined, paths })
}

/// Signature coordinates `floor(log_base((1/eta)^i |B_i ^ M^b|)) + i` with
/// `base = 1/(1 - mu1 mu2)`. `Err(i)` reports the first layer whose fringe
/// holds no big machine (the coordinate is undefined there).
pub fn signature(state: &SearchState) -> Result<Signature, usize> {
    let params = state.schedule.params();
    let one = int(1);
    let base = &one / (&one - &params.mu1 * &params.mu2);
    let inv_eta = &one / &params.eta;
    let mut coords = Vec::with_capacity(state.layers.len());
    let mut scaled = one.clone(); // (1/eta)^i
    for i in 0..state.layers.len() {
        let count = state.big_fringe(i).len();
        if count == 0 {
            return Err(i);
        }
        let x = &scaled * int(count as i64);
        coords.push(floor_log(&base, &x) + i as u64);
        scaled *= &inv_eta;
    }
    Ok(Signature { coords })
}

/// Result of one insertion attempt.
#[derive(Debug)]
pub enum SearchOutcome {
    Extended(PartialSchedule),
    TauTooSmall(TauTooSmall),
}

/// Number of sources in `layer` light enough to take a big job.
fn low_source_count(state: &SearchState, layer: usize) -> usize {
    state.layers[layer]
        .sources
        .iter()
        .filter(|m| state.schedule.load(**m) <= state.schedule.big_slack())
        .count()
}

fn collapse_condition(state: &SearchState) -> bool {
    let ell = state.ell();
    if ell < 1 {
        return false;
    }
    let low = low_source_count(state, ell);
    let size = state.layers[ell].sources.len();
    int(low as i64) >= &state.schedule.params().mu2 * int(size as i64)
}

/// Extend `schedule` with the unassigned small job `pending`, relocating
/// other jobs as needed, or report that the makespan guess is too small.
pub fn local_search(
    schedule: PartialSchedule,
    pending: JobId,
    ctx: &mut SearchCtx,
) -> SearchResult<SearchOutcome> {
    ctx.stats.local_search_calls += 1;
    if schedule.instance().is_big(pending) {
        return Err(SearchError::Internal("pending job must be small".into()));
    }
    if schedule.assignment(pending).is_some() {
        return Err(SearchError::Internal("pending job already assigned".into()));
    }
    let instance = schedule.instance().clone();
    let guard: u64 = {
        let n = (instance.machine_count() + instance.job_count()) as u64;
        n.pow(4) + 1000
    };
    let assigned_before = schedule.assigned_count();
    let mut state = SearchState::new(schedule, pending);
    let mut previous_signature: Option<Signature> = None;
    let mut iterations: u64 = 0;

    // Main loop: run until some fringe-0 machine can take the pending job.
    while !state.layers[0]
        .fringe
        .iter()
        .any(|m| state.schedule.load(*m) <= state.schedule.small_slack())
    {
        iterations += 1;
        if iterations > guard {
            return Err(SearchError::IterationGuard(iterations));
        }
        ctx.stats.main_loop_iterations += 1;

        // Signature bookkeeping: coordinates must be defined and the vector
        // must drop lexicographically between iterations.
        let sig = match signature(&state) {
            Ok(sig) => sig,
            Err(0) => {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::NoBigMachineReachable))
            }
            Err(layer) => {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::SignatureUndefined {
                    layer,
                }))
            }
        };
        if let Some(prev) = &previous_signature {
            if !sig.lex_lt(prev) {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::SignatureNotDecreasing));
            }
        }
        previous_signature = Some(sig);

        if ctx.check_invariants {
            if let Some(violation) = run_monitors(&state, ctx)? {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::MonitorViolation(
                    violation,
                )));
            }
        }

        match build_layer(&mut state, ctx)? {
            LayerOutcome::TooSmall => {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::LayerTooSmall {
                    layer: state.ell() + 1,
                }))
            }
            LayerOutcome::Monitor(v) => {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::MonitorViolation(v)))
            }
            LayerOutcome::Built { sources, fringe } => {
                state.layers.push(Layer { sources, fringe });
                state.exclusions.push(BTreeSet::new());
            }
        }

        // Collapse loop: while the last layer has enough light sources.
        while collapse_condition(&state) {
            ctx.stats.collapse_steps += 1;
            let ell = state.ell();
            let light: BTreeSet<Machine> = state.layers[ell]
                .sources
                .iter()
                .copied()
                .filter(|m| state.schedule.load(*m) <= state.schedule.big_slack())
                .collect();
            let decomposition = canonical_decomposition(&state, &light, ctx)?;
            for i in 1..=ell {
                state.exclusions[i] = decomposition.refined[i - 1].clone();
            }
            // Smallest r whose exclusion set covers a mu1 mu2 share of the
            // preceding fringe's big machines.
            let threshold = &state.schedule.params().mu1 * &state.schedule.params().mu2;
            let chosen = (1..=ell).find(|r| {
                let have = int(state.exclusions[*r].len() as i64);
                let need = &threshold * int(state.big_fringe(*r - 1).len() as i64);
                have >= need
            });
            let Some(r) = chosen else {
                return Ok(SearchOutcome::TauTooSmall(TauTooSmall::CollapseChoiceUnavailable));
            };
            let chosen_paths: Vec<AltPath> = decomposition
                .paths
                .iter()
                .filter(|p| state.exclusions[r].contains(&p.sink()))
                .cloned()
                .collect();
            ctx.stats.big_updates += 1;
            state.schedule = state.schedule.big_update(&chosen_paths)?;
            if r >= 2 {
                ctx.stats.small_updates += 1;
                ctx.stats.flow_computations += 2;
                let sources = state.layers[r - 1].sources.clone();
                let sinks = state.layers[r - 1].fringe.clone();
                let (next, _) = state.schedule.small_update(&sources, &sinks)?;
                state.schedule = next;
                if ctx.check_invariants {
                    if let Some(v) = check_no_low_sink_reachable(&state, &sources, &sinks, ctx) {
                        return Ok(SearchOutcome::TauTooSmall(TauTooSmall::MonitorViolation(v)));
                    }
                }
                let blocked: BTreeSet<Machine> = state
                    .layer_union_upto(r - 2)
                    .into_iter()
                    .chain(state.exclusion_union_upto(r - 2))
                    .chain(sources.iter().copied())
                    .collect();
                let reach = state.schedule.small_reachable(&sources);
                state.layers[r - 1].fringe = reach.difference(&blocked).copied().collect();
            }
            state.layers.truncate(r);
            state.exclusions.truncate(r);
        }
    }

    // Termination: shift small jobs along a shortest relocation chain from
    // the pending job to a machine with room, then place the pending job.
    let Some((jobs, machines)) = relocation_chain(&state) else {
        return Ok(SearchOutcome::TauTooSmall(TauTooSmall::NoRelocationPath));
    };
    let mut sched = state.schedule;
    for l in (1..jobs.len()).rev() {
        debug_assert_eq!(sched.assignment(jobs[l]), Some(machines[l - 1]));
        sched.relocate(jobs[l], machines[l])?;
    }
    sched.place_small(pending, machines[0])?;
    // Relocations preserve the assigned set; only the pending job joins it.
    debug_assert_eq!(sched.assigned_count(), assigned_before + 1);
    debug_assert!(sched.check_consistent().is_ok());
    Ok(SearchOutcome::Extended(sched))
}

/// Breadth-first relocation chain from the pending job to the lowest-index
/// reachable machine with load at most `tau + r - eps`. Returns parallel
/// vectors where `jobs[0]` is the pending job and `jobs[l]` moves to
/// `machines[l]`.
fn relocation_chain(state: &SearchState) -> Option<(Vec<JobId>, Vec<Machine>)> {
    let sched = &state.schedule;
    let instance = sched.instance();
    let mut parent: BTreeMap<Machine, (Machine, JobId)> = BTreeMap::new();
    let mut seen: BTreeSet<Machine> = BTreeSet::new();
    let mut queue: VecDeque<Machine> = VecDeque::new();
    for &m in instance.eligible(state.pending) {
        if seen.insert(m) {
            queue.push_back(m);
        }
    }
    while let Some(m) = queue.pop_front() {
        for &j in sched.small_jobs_on(m) {
            for &m2 in instance.eligible(j) {
                if seen.insert(m2) {
                    parent.insert(m2, (m, j));
                    queue.push_back(m2);
                }
            }
        }
    }
    let target = seen
        .iter()
        .copied()
        .find(|m| sched.load(*m) <= sched.small_slack())?;
    let mut machines = vec![target];
    let mut jobs = Vec::new();
    let mut cursor = target;
    while let Some((prev, j)) = parent.get(&cursor) {
        jobs.push(*j);
        machines.push(*prev);
        cursor = *prev;
    }
    jobs.push(state.pending);
    machines.reverse();
    jobs.reverse();
    Some((jobs, machines))
}

/// Instrumented analysis invariants, checked at the top of each main-loop
/// iteration. Returns the first violation, if any, after recording all of
/// them.
fn run_monitors(state: &SearchState, ctx: &mut SearchCtx) -> SearchResult<Option<String>> {
    let sched = &state.schedule;
    let ell = state.ell();
    let mut violations: Vec<String> = Vec::new();

    // Layer and exclusion sets are pairwise disjoint.
    {
        let mut seen: BTreeMap<Machine, String> = BTreeMap::new();
        let mut mark = |set: &BTreeSet<Machine>, tag: String, out: &mut Vec<String>| {
            for m in set {
                if let Some(prev) = seen.insert(*m, tag.clone()) {
                    out.push(format!("machine in both {prev} and {tag}"));
                }
            }
        };
        for (i, layer) in state.layers.iter().enumerate() {
            if i >= 1 {
                mark(&layer.sources, format!("A_{i}"), &mut violations);
            }
            mark(&layer.fringe, format!("B_{i}"), &mut violations);
        }
        for (i, e) in state.exclusions.iter().enumerate() {
            mark(e, format!("I_{i}"), &mut violations);
        }
    }

    // Every fringe machine is loaded beyond the small-job slack.
    for layer in &state.layers {
        for m in &layer.fringe {
            if sched.load(*m) <= sched.small_slack() {
                violations.push(format!(
                    "fringe machine {} is lightly loaded",
                    sched.instance().machine_name(*m)
                ));
            }
        }
    }

    // Small jobs inside the layers cannot escape them.
    let inside: BTreeSet<Machine> = state
        .layer_union()
        .into_iter()
        .chain(state.exclusion_union())
        .collect();
    for m in state.layer_union() {
        for &j in sched.small_jobs_on(m) {
            for m2 in sched.instance().eligible(j) {
                if !inside.contains(m2) {
                    violations.push(format!(
                        "job {} escapes the layers",
                        sched.instance().job(j).name
                    ));
                }
            }
        }
    }

    // No layer is collapsible at the top of the loop.
    for i in 1..=ell {
        let low = low_source_count(state, i);
        let size = state.layers[i].sources.len();
        if int(low as i64) >= &sched.params().mu2 * int(size as i64) {
            violations.push(format!("layer {i} is collapsible at loop entry"));
        }
    }

    // Exclusion sets stay small relative to the preceding big fringe.
    let threshold = &sched.params().mu1 * &sched.params().mu2;
    for i in 0..ell {
        let have = int(state.exclusions[i + 1].len() as i64);
        let bound = &threshold * int(state.big_fringe(i).len() as i64);
        if have >= bound {
            violations.push(format!("exclusion set {} grew too large", i + 1));
        }
    }

    // The first fringe keeps a big machine.
    if state.big_fringe(0).is_empty() {
        violations.push("no big machine in the first fringe".into());
    }

    // Each fringe keeps proportionally many big machines.
    let shrink =
        &sched.params().delta * (int(1) - &sched.params().mu2) - int(2) * &sched.params().mu2;
    for i in 1..=ell {
        let have = int(state.big_fringe(i).len() as i64);
        let bound = &shrink * int(state.layers[i].sources.len() as i64);
        if have <= bound {
            violations.push(format!("fringe {i} lost too many big machines"));
        }
    }

    // Disjoint-path counts cover each source set.
    for i in 0..ell {
        let sinks: BTreeSet<Machine> = state.layers[i + 1]
            .sources
            .iter()
            .copied()
            .chain(state.exclusion_union_upto(i + 1))
            .collect();
        ctx.stats.flow_computations += 1;
        let value = sched.big_flow_value(&state.big_fringe_union_upto(i), &sinks)?;
        if (value as usize) < state.layers[i + 1].sources.len() {
            violations.push(format!(
                "only {value} disjoint paths cover layer {} sources",
                i + 1
            ));
        }
    }

    // Layer sizes keep the mu1 share of the fringe union.
    for i in 0..ell {
        let have = int(state.layers[i + 1].sources.len() as i64);
        let need = &sched.params().mu1 * int(state.fringe_union_upto(i).len() as i64);
        if have < need {
            violations.push(format!("layer {} under the mu1 share", i + 1));
        }
    }

    // Signature coordinates are strictly increasing.
    if let Ok(sig) = signature(state) {
        if !sig.coords.windows(2).all(|w| w[0] < w[1]) {
            violations.push("signature coordinates are not increasing".into());
        }
    }

    ctx.violations.extend(violations.iter().cloned());
    Ok(violations.into_iter().next())
}
