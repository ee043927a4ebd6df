//! Deterministic integral max-flow on directed networks with arc capacities
//! and sink *vertex* capacities, plus min-cut extraction, path
//! decomposition, and incremental augmentation from an existing flow.
//!
//! A sink's vertex capacity bounds the flow *absorbed* there (inflow minus
//! outflow); flow may still pass through a sink on its way elsewhere. This
//! matters for two-phase solves: a maximum flow computed with only a sink
//! subset active stays feasible once the remaining sinks are opened, so it
//! can always be augmented instead of recomputed. Internally each sink
//! absorbs through a dedicated arc of its vertex capacity. Augmenting paths
//! are found breadth-first with adjacency scanned in node-declaration
//! order, so equal inputs always produce bit-identical flows.

use std::collections::BTreeMap;

use thiserror::Error;

/// Arc capacity: a non-negative integer or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(u64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

/// A directed flow network over nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<FlowArc>,
    sources: Vec<usize>,
    sinks: Vec<usize>,
    sink_capacity: BTreeMap<usize, u64>,
}

/// Per-arc integral flow values, parallel to [`FlowNetwork::arcs`]. Flow
/// is conserved at every non-source non-sink node; each sink absorbs its
/// inflow surplus, at most its vertex capacity; `value` is the total
/// absorbed (equivalently, the total net source outflow).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub arc_flow: Vec<u64>,
    pub value: u64,
}

/// A flow split into unit source-to-sink paths (node sequences).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDecomposition {
    pub paths: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("infeasible base flow: {0}")]
    InfeasibleBase(String),
    #[error("flow is not maximum")]
    NotMaximum,
    #[error("network admits unbounded flow")]
    Unbounded,
}

impl FlowNetwork {
    pub fn new(
        node_count: usize,
        arcs: Vec<FlowArc>,
        sources: Vec<usize>,
        sinks: Vec<usize>,
        sink_capacity: BTreeMap<usize, u64>,
    ) -> Result<Self, FlowError> {
        let mut sources = sources;
        let mut sinks = sinks;
        sources.sort_unstable();
        sources.dedup();
        sinks.sort_unstable();
        sinks.dedup();
        for arc in &arcs {
            if arc.from >= node_count || arc.to >= node_count {
                return Err(FlowError::InvalidNetwork(format!(
                    "arc ({}, {}) leaves the node range",
                    arc.from, arc.to
                )));
            }
        }
        for s in &sources {
            if *s >= node_count {
                return Err(FlowError::InvalidNetwork(format!("source {s} out of range")));
            }
            if sinks.binary_search(s).is_ok() {
                return Err(FlowError::InvalidNetwork(format!(
                    "node {s} is both a source and a sink"
                )));
            }
        }
        for t in &sinks {
            if *t >= node_count {
                return Err(FlowError::InvalidNetwork(format!("sink {t} out of range")));
            }
            if !sink_capacity.contains_key(t) {
                return Err(FlowError::InvalidNetwork(format!("sink {t} has no capacity")));
            }
        }
        if sink_capacity.len() != sinks.len() {
            return Err(FlowError::InvalidNetwork(
                "sink capacities defined for non-sinks".into(),
            ));
        }
        Ok(FlowNetwork {
            node_count,
            arcs,
            sources,
            sinks,
            sink_capacity,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn sink_capacity(&self, node: usize) -> Option<u64> {
        self.sink_capacity.get(&node).copied()
    }

    pub fn is_sink(&self, node: usize) -> bool {
        self.sink_capacity.contains_key(&node)
    }

    /// Two networks agree on everything except sources, sinks, and sink
    /// capacities. Flows transplant between such networks.
    pub fn same_arcs(&self, other: &FlowNetwork) -> bool {
        self.node_count == other.node_count && self.arcs == other.arcs
    }
}

/// Residual graph over the expansion with a super source and super sink.
struct Residual<'a> {
    net: &'a FlowNetwork,
    super_source: usize,
    super_sink: usize,
    /// Paired edges: `edge_to[e]` with `edge_residual[e]`, reverse at `e^1`.
    edge_to: Vec<usize>,
    edge_residual: Vec<u64>,
    adjacency: Vec<Vec<usize>>,
    /// Finite sentinel standing in for "unbounded" capacities.
    big: u64,
    /// Expanded edge index of each original arc (forward direction).
    arc_edge: Vec<usize>,
    /// Edge index of the super-source arc per source.
    source_edge: Vec<usize>,
    /// Edge index of each sink's absorption arc (its vertex capacity),
    /// keyed like `sinks`.
    absorb_edge: Vec<usize>,
}

impl<'a> Residual<'a> {
    fn build(net: &'a FlowNetwork) -> Residual<'a> {
        let mut finite_total: u64 = 1;
        for arc in &net.arcs {
            if let Capacity::Finite(c) = arc.capacity {
                finite_total = finite_total.saturating_add(c);
            }
        }
        for c in net.sink_capacity.values() {
            finite_total = finite_total.saturating_add(*c);
        }
        let big = finite_total;

        let super_source = net.node_count;
        let super_sink = net.node_count + 1;
        let expanded = net.node_count + 2;

        let mut res = Residual {
            net,
            super_source,
            super_sink,
            edge_to: Vec::new(),
            edge_residual: Vec::new(),
            adjacency: vec![Vec::new(); expanded],
            big,
            arc_edge: Vec::with_capacity(net.arcs.len()),
            source_edge: Vec::with_capacity(net.sources.len()),
            absorb_edge: Vec::with_capacity(net.sinks.len()),
        };

        for arc in &net.arcs {
            let cap = match arc.capacity {
                Capacity::Finite(c) => c.min(big),
                Capacity::Unbounded => big,
            };
            let e = res.add_edge(arc.from, arc.to, cap);
            res.arc_edge.push(e);
        }
        for s in net.sources.clone() {
            let e = res.add_edge(super_source, s, big);
            res.source_edge.push(e);
        }
        // A sink absorbs through this arc; the vertex capacity bounds the
        // absorbed amount, never the flow that only passes through.
        for t in net.sinks.clone() {
            let cap = net.sink_capacity[&t];
            let e = res.add_edge(t, super_sink, cap);
            res.absorb_edge.push(e);
        }
        // Fixed augmenting rule: neighbours are scanned in node order.
        for adj in &mut res.adjacency {
            adj.sort_by_key(|&e| (res.edge_to[e], e));
        }
        res
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let e = self.edge_to.len();
        self.edge_to.push(to);
        self.edge_residual.push(cap);
        self.adjacency[from].push(e);
        self.edge_to.push(from);
        self.edge_residual.push(0);
        self.adjacency[to].push(e + 1);
        e
    }

    /// Push `amount` through expanded edge `e` (reducing its residual).
    fn push(&mut self, e: usize, amount: u64) {
        self.edge_residual[e] -= amount;
        self.edge_residual[e ^ 1] += amount;
    }

    fn flow_on(&self, e: usize) -> u64 {
        self.edge_residual[e ^ 1]
    }

    /// Load an existing feasible flow of the original network.
    fn load_base(&mut self, base: &Flow) -> Result<(), FlowError> {
        if base.arc_flow.len() != self.net.arcs.len() {
            return Err(FlowError::InfeasibleBase(
                "arc flow vector has the wrong length".into(),
            ));
        }
        let n = self.net.node_count;
        let mut inflow = vec![0u64; n];
        let mut outflow = vec![0u64; n];
        for (k, arc) in self.net.arcs.iter().enumerate() {
            let f = base.arc_flow[k];
            if let Capacity::Finite(c) = arc.capacity {
                if f > c {
                    return Err(FlowError::InfeasibleBase(format!(
                        "arc {k} carries {f} over capacity {c}"
                    )));
                }
            }
            inflow[arc.to] += f;
            outflow[arc.from] += f;
        }
        let mut value = 0u64;
        for v in 0..n {
            let is_source = self.net.sources.binary_search(&v).is_ok();
            if let Some(cap) = self.net.sink_capacity.get(&v) {
                if outflow[v] > inflow[v] {
                    return Err(FlowError::InfeasibleBase(format!(
                        "sink {v} emits more than it receives"
                    )));
                }
                if inflow[v] - outflow[v] > *cap {
                    return Err(FlowError::InfeasibleBase(format!(
                        "sink {v} absorbs {} over vertex capacity {cap}",
                        inflow[v] - outflow[v]
                    )));
                }
            } else if is_source {
                if inflow[v] > outflow[v] {
                    return Err(FlowError::InfeasibleBase(format!(
                        "source {v} absorbs flow"
                    )));
                }
                value += outflow[v] - inflow[v];
            } else if inflow[v] != outflow[v] {
                return Err(FlowError::InfeasibleBase(format!(
                    "conservation violated at node {v}"
                )));
            }
        }
        if value != base.value {
            return Err(FlowError::InfeasibleBase(format!(
                "declared value {} but source outflow is {value}",
                base.value
            )));
        }
        for (k, _) in self.net.arcs.iter().enumerate() {
            let f = base.arc_flow[k];
            if f > 0 {
                self.push(self.arc_edge[k], f);
            }
        }
        for (k, t) in self.net.sinks.iter().enumerate() {
            let absorbed = inflow[*t] - outflow[*t];
            if absorbed > 0 {
                self.push(self.absorb_edge[k], absorbed);
            }
        }
        for (k, s) in self.net.sources.iter().enumerate() {
            let emitted = outflow[*s] - inflow[*s];
            self.push(self.source_edge[k], emitted);
        }
        Ok(())
    }

    /// Breadth-first search for an augmenting path; returns per-node parent
    /// edges when the super sink is reachable.
    fn bfs(&self) -> Option<Vec<usize>> {
        const UNSEEN: usize = usize::MAX;
        let mut parent = vec![UNSEEN; self.adjacency.len()];
        let mut queue = std::collections::VecDeque::new();
        parent[self.super_source] = usize::MAX - 1;
        queue.push_back(self.super_source);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adjacency[v] {
                let to = self.edge_to[e];
                if self.edge_residual[e] > 0 && parent[to] == UNSEEN {
                    parent[to] = e;
                    if to == self.super_sink {
                        return Some(parent);
                    }
                    queue.push_back(to);
                }
            }
        }
        None
    }

    fn augment_to_max(&mut self) -> Result<(), FlowError> {
        while let Some(parent) = self.bfs() {
            let mut bottleneck = u64::MAX;
            let mut v = self.super_sink;
            let mut all_big = true;
            while v != self.super_source {
                let e = parent[v];
                bottleneck = bottleneck.min(self.edge_residual[e]);
                all_big &= self.edge_residual[e] >= self.big;
                v = self.edge_to[e ^ 1];
            }
            if all_big {
                return Err(FlowError::Unbounded);
            }
            let mut v = self.super_sink;
            while v != self.super_source {
                let e = parent[v];
                self.push(e, bottleneck);
                v = self.edge_to[e ^ 1];
            }
        }
        Ok(())
    }

    fn extract(&self) -> Flow {
        let arc_flow: Vec<u64> = self.arc_edge.iter().map(|&e| self.flow_on(e)).collect();
        let value = self.absorb_edge.iter().map(|&e| self.flow_on(e)).sum();
        Flow { arc_flow, value }
    }

    /// Expanded nodes reachable from the super source in the residual graph.
    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.adjacency.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[self.super_source] = true;
        queue.push_back(self.super_source);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adjacency[v] {
                let to = self.edge_to[e];
                if self.edge_residual[e] > 0 && !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        seen
    }
}

/// Compute the deterministic maximum flow of `net`.
pub fn max_flow(net: &FlowNetwork) -> Result<Flow, FlowError> {
    let mut residual = Residual::build(net);
    residual.augment_to_max()?;
    Ok(residual.extract())
}

/// Augment a feasible `base` flow to a maximum flow of `net` using
/// augmenting paths only; the flow value never decreases along the way.
pub fn augment(net: &FlowNetwork, base: &Flow) -> Result<Flow, FlowError> {
    let mut residual = Residual::build(net);
    residual.load_base(base)?;
    residual.augment_to_max()?;
    Ok(residual.extract())
}

/// Source side of the minimum cut induced by the maximum flow `f`: the set
/// of original nodes reachable from the sources in the residual network.
///
/// Fails with [`FlowError::NotMaximum`] when `f` still admits an augmenting
/// path (equivalently, when the reachable cut does not pay for `f.value`).
pub fn min_cut(net: &FlowNetwork, f: &Flow) -> Result<std::collections::BTreeSet<usize>, FlowError> {
    let mut residual = Residual::build(net);
    residual.load_base(f)?;
    let seen = residual.reachable();
    if seen[residual.super_sink] {
        return Err(FlowError::NotMaximum);
    }
    // Crossing capacity: original arcs leaving the reachable side plus the
    // absorption capacity of reachable sinks; it must pay for the value.
    let mut capacity: u64 = 0;
    for arc in net.arcs() {
        if seen[arc.from] && !seen[arc.to] {
            match arc.capacity {
                Capacity::Finite(c) => capacity = capacity.saturating_add(c),
                Capacity::Unbounded => return Err(FlowError::NotMaximum),
            }
        }
    }
    for t in &net.sinks {
        if seen[*t] {
            capacity = capacity.saturating_add(net.sink_capacity[t]);
        }
    }
    if capacity != f.value {
        return Err(FlowError::NotMaximum);
    }
    Ok((0..net.node_count).filter(|v| seen[*v]).collect())
}

/// Split `f` into `f.value` unit source-to-sink paths over the original
/// nodes. Any circulation in the flow is cancelled first, so the returned
/// paths recompose exactly to the cycle-free part carried source-to-sink.
pub fn decompose(net: &FlowNetwork, f: &Flow) -> Result<PathDecomposition, FlowError> {
    if f.arc_flow.len() != net.arcs.len() {
        return Err(FlowError::InfeasibleBase(
            "arc flow vector has the wrong length".into(),
        ));
    }
    let n = net.node_count;
    let mut remaining: Vec<u64> = f.arc_flow.clone();
    cancel_cycles(net, &mut remaining);

    let mut inflow = vec![0u64; n];
    let mut outflow = vec![0u64; n];
    for (k, arc) in net.arcs.iter().enumerate() {
        inflow[arc.to] += remaining[k];
        outflow[arc.from] += remaining[k];
    }
    let mut absorb: Vec<u64> = (0..n)
        .map(|v| {
            if net.is_sink(v) {
                inflow[v].saturating_sub(outflow[v])
            } else {
                0
            }
        })
        .collect();

    // out_arcs[v]: indices of arcs leaving v, in declaration order.
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, arc) in net.arcs.iter().enumerate() {
        out_arcs[arc.from].push(k);
    }

    let mut paths = Vec::new();
    for &s in net.sources() {
        while outflow[s] > inflow[s] + paths_started_at(&paths, s) {
            let mut path = vec![s];
            let mut cur = s;
            loop {
                if cur != s && absorb[cur] > 0 {
                    absorb[cur] -= 1;
                    break;
                }
                let next_arc = out_arcs[cur]
                    .iter()
                    .copied()
                    .find(|&k| remaining[k] > 0)
                    .ok_or_else(|| {
                        FlowError::InfeasibleBase(format!(
                            "flow decomposition stuck at node {cur}"
                        ))
                    })?;
                remaining[next_arc] -= 1;
                cur = net.arcs[next_arc].to;
                path.push(cur);
            }
            paths.push(path);
        }
    }
    Ok(PathDecomposition { paths })
}

fn paths_started_at(paths: &[Vec<usize>], s: usize) -> u64 {
    paths.iter().filter(|p| p[0] == s).count() as u64
}

/// Remove circulations from `remaining` in place.
fn cancel_cycles(net: &FlowNetwork, remaining: &mut [u64]) {
    loop {
        let Some(cycle) = find_cycle(net, remaining) else {
            return;
        };
        let slack = cycle.iter().map(|&k| remaining[k]).min().unwrap();
        for k in cycle {
            remaining[k] -= slack;
        }
    }
}

/// One cycle (as arc indices) in the positive-flow support, if any.
fn find_cycle(net: &FlowNetwork, remaining: &[u64]) -> Option<Vec<usize>> {
    let n = net.node_count;
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, arc) in net.arcs.iter().enumerate() {
        if remaining[k] > 0 {
            out_arcs[arc.from].push(k);
        }
    }
    // Iterative DFS with an explicit stack of (node, next-neighbour index).
    let mut state = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        let mut via: Vec<usize> = Vec::new(); // arc taken to reach stack[i+1]
        state[start] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < out_arcs[v].len() {
                let k = out_arcs[v][*i];
                *i += 1;
                let to = net.arcs[k].to;
                match state[to] {
                    0 => {
                        state[to] = 1;
                        stack.push((to, 0));
                        via.push(k);
                    }
                    1 => {
                        // Found a cycle: arcs from `to` up the stack plus k.
                        let pos = stack.iter().position(|&(n, _)| n == to).unwrap();
                        let mut cycle: Vec<usize> = via[pos..].to_vec();
                        cycle.push(k);
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
                via.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(from: usize, to: usize, cap: u64) -> FlowArc {
        FlowArc {
            from,
            to,
            capacity: Capacity::Finite(cap),
        }
    }

    fn net(
        n: usize,
        arcs: Vec<FlowArc>,
        sources: Vec<usize>,
        sinks: Vec<(usize, u64)>,
    ) -> FlowNetwork {
        let caps: BTreeMap<usize, u64> = sinks.iter().copied().collect();
        FlowNetwork::new(n, arcs, sources, sinks.iter().map(|(t, _)| *t).collect(), caps)
            .unwrap()
    }

    #[test]
    fn empty_sources_mean_zero_flow() {
        let n = net(2, vec![arc(0, 1, 3)], vec![], vec![(1, 5)]);
        assert_eq!(max_flow(&n).unwrap().value, 0);
    }

    #[test]
    fn sink_vertex_capacity_binds() {
        let n = net(2, vec![arc(0, 1, 3)], vec![0], vec![(1, 2)]);
        let f = max_flow(&n).unwrap();
        assert_eq!(f.value, 2);
        assert_eq!(f.arc_flow, vec![2]);
    }

    #[test]
    fn unbounded_arcs_are_fine_behind_finite_cuts() {
        let mut arcs = vec![arc(0, 1, 2)];
        arcs.push(FlowArc {
            from: 1,
            to: 2,
            capacity: Capacity::Unbounded,
        });
        let n = net(3, arcs, vec![0], vec![(2, 5)]);
        assert_eq!(max_flow(&n).unwrap().value, 2);
    }

    #[test]
    fn diamond_flow_and_decomposition() {
        // 0 -> {1,2} -> 3 with one wide path; value 3.
        let arcs = vec![arc(0, 1, 2), arc(0, 2, 1), arc(1, 3, 2), arc(2, 3, 2)];
        let n = net(4, arcs, vec![0], vec![(3, 4)]);
        let f = max_flow(&n).unwrap();
        assert_eq!(f.value, 3);
        let d = decompose(&n, &f).unwrap();
        assert_eq!(d.paths.len(), 3);
        // Paths recompose to the per-arc flow.
        let mut recomposed = vec![0u64; n.arcs().len()];
        for p in &d.paths {
            for w in p.windows(2) {
                let k = n
                    .arcs()
                    .iter()
                    .position(|a| a.from == w[0] && a.to == w[1])
                    .unwrap();
                recomposed[k] += 1;
            }
        }
        assert_eq!(recomposed, f.arc_flow);
    }

    #[test]
    fn decompose_zero_flow_is_empty() {
        let n = net(2, vec![arc(0, 1, 3)], vec![0], vec![(1, 2)]);
        let zero = Flow {
            arc_flow: vec![0],
            value: 0,
        };
        assert!(decompose(&n, &zero).unwrap().paths.is_empty());
    }

    #[test]
    fn decompose_disjoint_arcs() {
        let arcs = vec![arc(0, 1, 1), arc(2, 3, 1)];
        let n = net(4, arcs, vec![0, 2], vec![(1, 1), (3, 1)]);
        let f = max_flow(&n).unwrap();
        assert_eq!(f.value, 2);
        let d = decompose(&n, &f).unwrap();
        assert_eq!(d.paths, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn augment_from_zero_equals_max_flow() {
        let arcs = vec![arc(0, 1, 2), arc(1, 2, 2), arc(0, 2, 1)];
        let n = net(3, arcs, vec![0], vec![(2, 3)]);
        let zero = Flow {
            arc_flow: vec![0, 0, 0],
            value: 0,
        };
        assert_eq!(augment(&n, &zero).unwrap(), max_flow(&n).unwrap());
    }

    #[test]
    fn augment_keeps_maximum_value() {
        let arcs = vec![arc(0, 1, 2)];
        let n = net(2, arcs, vec![0], vec![(1, 2)]);
        let f = max_flow(&n).unwrap();
        let again = augment(&n, &f).unwrap();
        assert_eq!(again.value, f.value);
    }

    #[test]
    fn augment_rejects_infeasible_base() {
        let n = net(2, vec![arc(0, 1, 1)], vec![0], vec![(1, 1)]);
        let bad = Flow {
            arc_flow: vec![5],
            value: 5,
        };
        assert!(matches!(
            augment(&n, &bad),
            Err(FlowError::InfeasibleBase(_))
        ));
    }

    #[test]
    fn two_phase_augmentation_reaches_full_value() {
        // Restrict to one sink first, then open the second: the staged flow
        // must reach the same value as solving the full network directly.
        let arcs = vec![arc(0, 1, 1), arc(0, 2, 1), arc(3, 1, 1), arc(3, 2, 1)];
        let restricted = net(4, arcs.clone(), vec![0, 3], vec![(1, 1)]);
        let full = net(4, arcs, vec![0, 3], vec![(1, 1), (2, 1)]);
        let f0 = max_flow(&restricted).unwrap();
        assert_eq!(f0.value, 1);
        let f = augment(&full, &f0).unwrap();
        assert_eq!(f.value, max_flow(&full).unwrap().value);
        assert_eq!(f.value, 2);
    }

    #[test]
    fn min_cut_trivia() {
        let n = net(2, vec![arc(0, 1, 3)], vec![], vec![(1, 1)]);
        let f = max_flow(&n).unwrap();
        assert!(min_cut(&n, &f).unwrap().is_empty());

        let n = net(2, vec![arc(0, 1, 1)], vec![0], vec![(1, 1)]);
        let f = max_flow(&n).unwrap();
        let cut = min_cut(&n, &f).unwrap();
        assert_eq!(cut.into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn min_cut_rejects_non_maximum() {
        let n = net(2, vec![arc(0, 1, 2)], vec![0], vec![(1, 2)]);
        let sub = Flow {
            arc_flow: vec![1],
            value: 1,
        };
        assert_eq!(min_cut(&n, &sub), Err(FlowError::NotMaximum));
    }

    #[test]
    fn determinism_bit_identical() {
        let arcs = vec![
            arc(0, 2, 2),
            arc(1, 2, 2),
            arc(2, 3, 1),
            arc(2, 4, 2),
            arc(0, 4, 1),
        ];
        let n = net(5, arcs, vec![0, 1], vec![(3, 1), (4, 2)]);
        let f1 = max_flow(&n).unwrap();
        let f2 = max_flow(&n).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn through_flow_does_not_consume_vertex_capacity() {
        // 0 -> 1 -> 2 where both 1 and 2 are sinks: one unit absorbs at 1
        // and a second passes through it into 2. The vertex capacity only
        // bounds absorption, which keeps two-phase flows transplantable.
        let arcs = vec![arc(0, 1, 2), arc(1, 2, 1)];
        let n = net(3, arcs, vec![0], vec![(1, 1), (2, 1)]);
        let f = max_flow(&n).unwrap();
        assert_eq!(f.value, 2);
    }

    #[test]
    fn restricted_phase_flow_stays_feasible_with_more_sinks() {
        // A path to the far sink that must squeeze through a machine which
        // later becomes a zero-capacity sink: the transplant still loads.
        let arcs = vec![arc(0, 1, 1), arc(1, 2, 1)];
        let restricted = net(3, arcs.clone(), vec![0], vec![(2, 1)]);
        let full = net(3, arcs, vec![0], vec![(1, 0), (2, 1)]);
        let seed = max_flow(&restricted).unwrap();
        assert_eq!(seed.value, 1);
        let staged = augment(&full, &seed).unwrap();
        assert_eq!(staged.value, max_flow(&full).unwrap().value);
    }
}
