//! Ergodic optimization on the de Bruijn graph, in exact arithmetic.
//!
//! The maximizing value `m(A)` is the maximum cycle mean (Karp). Critical
//! edges are the edges lying on cycles of mean `m(A)`; they are found as the
//! strongly connected part of the subgraph of edges that are tight for a
//! subsolution. Calibrated subactions, Mañé potential, Peierls barrier and
//! the deviation function all reduce to longest/shortest path problems with
//! normalized weights `A - m(A)`, for which every cycle is nonpositive.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::potential::LocallyConstantPotential;
use crate::rational::{format_rational, MaxPlus, Q};
use crate::symbolic::{DeBruijnGraph, EventuallyPeriodicPoint, Word};

/// Limit on the number of simple critical cycles listed in a report.
pub const MAX_LISTED_ORBITS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalStructure {
    /// Maximum cycle mean.
    pub m_a: Q,
    /// Edges of normalized weight lying on a zero-mean cycle, ascending.
    pub critical_edges: Vec<usize>,
    /// Nodes touched by critical edges, ascending.
    pub critical_nodes: Vec<usize>,
    /// Strongly connected components of the critical graph, each ascending,
    /// ordered by smallest node.
    pub critical_classes: Vec<Vec<usize>>,
    /// Simple cycles of the critical graph as edge lists, each starting at its
    /// smallest node.
    pub maximizing_orbits: Vec<Vec<usize>>,
    /// Set when the orbit list hit [`MAX_LISTED_ORBITS`].
    pub orbits_truncated: bool,
    /// Exactly one critical class and it is a single simple cycle.
    pub unique_maximizer: bool,
}

impl CriticalStructure {
    pub fn is_critical_edge(&self, e: usize) -> bool {
        self.critical_edges.binary_search(&e).is_ok()
    }

    pub fn is_critical_node(&self, v: usize) -> bool {
        self.critical_nodes.binary_search(&v).is_ok()
    }

    /// The maximizing cycle, refusing when the maximizer is not unique.
    pub fn unique_cycle(&self) -> Result<&[usize]> {
        if !self.unique_maximizer {
            return Err(Error::NotUnique(format!(
                "{} critical class(es), {} critical edge(s)",
                self.critical_classes.len(),
                self.critical_edges.len()
            )));
        }
        Ok(&self.maximizing_orbits[0])
    }

    /// The periodic word read along a cycle.
    pub fn orbit_word(g: &DeBruijnGraph, cycle: &[usize]) -> Word {
        let start = g.source(cycle[0]);
        let p = g.point_of_walk(start, &[], cycle);
        p.prefix_word(cycle.len())
    }
}

/// Calibrated subaction on nodes, pinned to zero at `anchor`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subaction {
    pub values: Vec<Q>,
    pub anchor: usize,
}

/// Nonnegative defect `R(e) = V(target) - V(source) - A(e) + m(A)` on edges.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorFunction {
    pub values: Vec<Q>,
}

/// Dense node-by-node max-plus table.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTable {
    n: usize,
    entries: Vec<MaxPlus>,
}

impl NodeTable {
    fn filled(n: usize, v: MaxPlus) -> Self {
        NodeTable { n, entries: vec![v; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> &MaxPlus {
        &self.entries[u * self.n + v]
    }

    fn set(&mut self, u: usize, v: usize, x: MaxPlus) {
        self.entries[u * self.n + v] = x;
    }

    /// Finite entry, panicking on `-∞` (never produced on the full shift).
    pub fn finite(&self, u: usize, v: usize) -> &Q {
        self.get(u, v).finite().expect("full shift is strongly connected")
    }
}

/// `A - m(A)` on every edge.
pub fn normalized_weights(g: &DeBruijnGraph, m_a: &Q) -> Vec<Q> {
    g.weights().iter().map(|w| w - m_a).collect()
}

/// Karp's maximum cycle mean for a strongly connected graph.
fn karp_max_mean(g: &DeBruijnGraph) -> Q {
    let n = g.node_count();
    let mut walks: Vec<Vec<MaxPlus>> = Vec::with_capacity(n + 1);
    let mut first = vec![MaxPlus::NegInf; n];
    first[0] = MaxPlus::Finite(Q::zero());
    walks.push(first);
    for k in 1..=n {
        let prev = &walks[k - 1];
        let row = (0..n).map(|v| g.in_edges(v).map(|e| prev[g.source(e)].plus(g.weight(e))).max().unwrap()).collect();
        walks.push(row);
    }
    (0..n)
        .filter_map(|v| {
            let top = walks[n][v].finite()?;
            (0..n)
                .filter_map(|k| walks[k][v].finite().map(|dk| (top - dk) / Q::from_integer(((n - k) as i64).into())))
                .min()
        })
        .max()
        .expect("some node carries a length-n walk")
}

/// Tarjan's strongly connected components over an explicit edge list.
fn strongly_connected(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        comp: Vec<usize>,
        next_index: usize,
        next_comp: usize,
    }
    fn visit(s: &mut State, v: usize) {
        s.index[v] = Some(s.next_index);
        s.low[v] = s.next_index;
        s.next_index += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for i in 0..s.adj[v].len() {
            let w = s.adj[v][i];
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                s.comp[w] = s.next_comp;
                if w == v {
                    break;
                }
            }
            s.next_comp += 1;
        }
    }
    let mut s = State {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        comp: vec![usize::MAX; n],
        next_index: 0,
        next_comp: 0,
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.comp
}

/// Edges that lie on cycles made only of `allowed` edges.
fn edges_on_cycles(g: &DeBruijnGraph, allowed: impl Fn(usize) -> bool) -> Vec<usize> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    let edges: Vec<usize> = (0..g.edge_count()).filter(|&e| allowed(e)).collect();
    for &e in &edges {
        adj[g.source(e)].push(g.target(e));
    }
    let comp = strongly_connected(n, &adj);
    edges.into_iter().filter(|&e| comp[g.source(e)] == comp[g.target(e)]).collect()
}

/// Simple cycles inside an edge set, each listed once from its smallest node.
fn simple_cycles(g: &DeBruijnGraph, edges: &[usize], limit: usize) -> (Vec<Vec<usize>>, bool) {
    let n = g.node_count();
    let mut out_edges = vec![Vec::new(); n];
    for &e in edges {
        out_edges[g.source(e)].push(e);
    }
    let mut cycles = Vec::new();
    let mut truncated = false;
    let mut on_path = vec![false; n];
    let mut path = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        g: &DeBruijnGraph,
        out_edges: &[Vec<usize>],
        start: usize,
        v: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        cycles: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> bool {
        for &e in &out_edges[v] {
            let t = g.target(e);
            if t == start {
                path.push(e);
                cycles.push(path.clone());
                path.pop();
                if cycles.len() >= limit {
                    return false;
                }
            } else if t > start && !on_path[t] {
                on_path[t] = true;
                path.push(e);
                let keep_going = dfs(g, out_edges, start, t, on_path, path, cycles, limit);
                path.pop();
                on_path[t] = false;
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    for start in 0..n {
        on_path[start] = true;
        if !dfs(g, &out_edges, start, start, &mut on_path, &mut path, &mut cycles, limit) {
            truncated = true;
            break;
        }
        on_path[start] = false;
    }
    (cycles, truncated)
}

/// Longest-path relaxation with initial values; all cycles must be nonpositive.
fn longest_paths(g: &DeBruijnGraph, weights: &[Q], mut best: Vec<MaxPlus>) -> Vec<MaxPlus> {
    let n = g.node_count();
    for _ in 0..=n {
        let mut changed = false;
        for e in 0..g.edge_count() {
            let cand = best[g.source(e)].plus(&weights[e]);
            let t = g.target(e);
            if cand > best[t] {
                best[t] = cand;
                changed = true;
            }
        }
        if !changed {
            return best;
        }
    }
    panic!("longest-path relaxation did not settle: positive normalized cycle");
}

/// Maximum cycle mean and the critical structure of the graph.
pub fn max_mean_cycle(g: &DeBruijnGraph) -> CriticalStructure {
    let m_a = karp_max_mean(g);
    let w = normalized_weights(g, &m_a);
    // Any subsolution certifies criticality: zero-mean cycles consist of tight edges.
    let sub = longest_paths(g, &w, vec![MaxPlus::Finite(Q::zero()); g.node_count()]);
    let tight = |e: usize| sub[g.source(e)].plus(&w[e]) == sub[g.target(e)];
    let critical_edges = edges_on_cycles(g, tight);

    let nodes: BTreeSet<usize> = critical_edges.iter().flat_map(|&e| [g.source(e), g.target(e)]).collect();
    let critical_nodes: Vec<usize> = nodes.into_iter().collect();

    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for &e in &critical_edges {
        adj[g.source(e)].push(g.target(e));
    }
    let comp = strongly_connected(n, &adj);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; n];
    for &v in &critical_nodes {
        if seen[v] {
            continue;
        }
        let class: Vec<usize> = critical_nodes.iter().copied().filter(|&u| comp[u] == comp[v]).collect();
        class.iter().for_each(|&u| seen[u] = true);
        classes.push(class);
    }

    let (maximizing_orbits, orbits_truncated) = simple_cycles(g, &critical_edges, MAX_LISTED_ORBITS);
    let unique_maximizer = classes.len() == 1 && critical_edges.len() == critical_nodes.len();
    CriticalStructure {
        m_a,
        critical_edges,
        critical_nodes,
        critical_classes: classes,
        maximizing_orbits,
        orbits_truncated,
        unique_maximizer,
    }
}

/// `V(x) = max_{u critical} S(u, x) - (same at the anchor)`, anchor = node 0.
pub fn calibrated_subaction(g: &DeBruijnGraph, cs: &CriticalStructure) -> Subaction {
    let w = normalized_weights(g, &cs.m_a);
    let mut init = vec![MaxPlus::NegInf; g.node_count()];
    for e in 0..g.edge_count() {
        if cs.is_critical_node(g.source(e)) {
            let cand = MaxPlus::Finite(w[e].clone());
            let t = g.target(e);
            if cand > init[t] {
                init[t] = cand;
            }
        }
    }
    let best = longest_paths(g, &w, init);
    let anchor = 0;
    let base = best[anchor].finite().expect("strongly connected").clone();
    let values: Vec<Q> = best.iter().map(|b| b.finite().expect("strongly connected") - &base).collect();
    let sub = Subaction { values, anchor };
    if let Some(v) = calibration_violation(g, &cs.m_a, &sub) {
        panic!("calibration fails at node {v}");
    }
    sub
}

/// Node where `V(x) = max_{e into x} V(source) + A(e) - m` fails, if any.
pub fn calibration_violation(g: &DeBruijnGraph, m_a: &Q, v: &Subaction) -> Option<usize> {
    (0..g.node_count()).find(|&x| {
        let best = g.in_edges(x).map(|e| &v.values[g.source(e)] + g.weight(e) - m_a).max().unwrap();
        best != v.values[x]
    })
}

/// `R(e) = V(target) - V(source) - A(e) + m(A)`.
pub fn error_function(g: &DeBruijnGraph, cs: &CriticalStructure, v: &Subaction) -> ErrorFunction {
    let values: Vec<Q> =
        (0..g.edge_count()).map(|e| &v.values[g.target(e)] - &v.values[g.source(e)] - g.weight(e) + &cs.m_a).collect();
    if let Some(e) = values.iter().position(|r| r.is_negative()) {
        panic!("negative error function on edge {}", g.edge_word(e));
    }
    for x in 0..g.node_count() {
        assert!(g.in_edges(x).any(|e| values[e].is_zero()), "node {} has no calibrating edge", g.node_word(x));
    }
    ErrorFunction { values }
}

/// Mañé potential: longest walk with at least one edge, normalized weights.
pub fn mane_potential(g: &DeBruijnGraph, cs: &CriticalStructure) -> NodeTable {
    let n = g.node_count();
    let w = normalized_weights(g, &cs.m_a);
    let mut s = NodeTable::filled(n, MaxPlus::NegInf);
    for e in 0..g.edge_count() {
        let (u, v) = (g.source(e), g.target(e));
        let cand = MaxPlus::Finite(w[e].clone());
        if &cand > s.get(u, v) {
            s.set(u, v, cand);
        }
    }
    for k in 0..n {
        for u in 0..n {
            let uk = s.get(u, k).clone();
            if uk == MaxPlus::NegInf {
                continue;
            }
            for v in 0..n {
                let cand = uk.times(s.get(k, v));
                if &cand > s.get(u, v) {
                    s.set(u, v, cand);
                }
            }
        }
    }
    s
}

/// Nodes with `S(u, u) = 0`.
pub fn aubry_set(mane: &NodeTable) -> Vec<usize> {
    (0..mane.size()).filter(|&u| matches!(mane.get(u, u), MaxPlus::Finite(v) if v.is_zero())).collect()
}

/// `h(u, v) = max_{c critical} S(u, c) + S(c, v)`.
pub fn peierls_barrier(cs: &CriticalStructure, mane: &NodeTable) -> NodeTable {
    let n = mane.size();
    let mut h = NodeTable::filled(n, MaxPlus::NegInf);
    for u in 0..n {
        for v in 0..n {
            let best = cs
                .critical_nodes
                .iter()
                .map(|&c| mane.get(u, c).times(mane.get(c, v)))
                .max()
                .unwrap_or(MaxPlus::NegInf);
            h.set(u, v, best);
        }
    }
    h
}

/// Nodes on cycles of zero cost: the critical nodes seen through `R`.
pub fn zero_cost_nodes(g: &DeBruijnGraph, r: &ErrorFunction) -> Vec<usize> {
    let edges = edges_on_cycles(g, |e| r.values[e].is_zero());
    let nodes: BTreeSet<usize> = edges.iter().flat_map(|&e| [g.source(e), g.target(e)]).collect();
    nodes.into_iter().collect()
}

/// `J(u)`: cheapest `R`-cost of a path from `u` into the critical graph; the
/// infimum of the deviation sum over the cylinder `u`.
pub fn min_cost_to_critical(g: &DeBruijnGraph, r: &ErrorFunction) -> Vec<Q> {
    let n = g.node_count();
    let mut best: Vec<Option<Q>> = vec![None; n];
    for c in zero_cost_nodes(g, r) {
        best[c] = Some(Q::zero());
    }
    for _ in 0..=n {
        let mut changed = false;
        for e in 0..g.edge_count() {
            let Some(tail) = &best[g.target(e)] else { continue };
            let cand = &r.values[e] + tail;
            let s = g.source(e);
            if best[s].as_ref().is_none_or(|cur| cand < *cur) {
                best[s] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    best.into_iter().map(|b| b.expect("full shift reaches the critical graph")).collect()
}

/// Every cheapest connector from `from` to its first critical node, as edge
/// lists in lexicographic order of edge words. Empty connector when `from` is
/// already critical.
pub fn optimal_connectors(
    g: &DeBruijnGraph,
    r: &ErrorFunction,
    j: &[Q],
    critical: &[usize],
    from: usize,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn walk(
        g: &DeBruijnGraph,
        r: &ErrorFunction,
        j: &[Q],
        critical: &[usize],
        v: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if critical.binary_search(&v).is_ok() {
            out.push(path.clone());
            return;
        }
        for e in g.out_edges(v) {
            let t = g.target(e);
            if &r.values[e] + &j[t] == j[v] {
                path.push(e);
                walk(g, r, j, critical, t, path, out);
                path.pop();
            }
        }
    }
    walk(g, r, j, critical, from, &mut path, &mut out);
    out
}

/// Value of a possibly infinite deviation sum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Deviation {
    Finite(Q),
    Infinite,
}

impl std::fmt::Display for Deviation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Deviation::Finite(v) => f.write_str(&format_rational(v)),
            Deviation::Infinite => f.write_str("inf"),
        }
    }
}

/// `I(p) = Σ_n R(T^n p)`: finite exactly when `R` vanishes along the terminal cycle.
pub fn deviation_at_point(g: &DeBruijnGraph, r: &ErrorFunction, p: &EventuallyPeriodicPoint) -> Result<Deviation> {
    if p.alphabet() != g.alphabet() {
        return Err(Error::AlphabetMismatch(g.alphabet(), p.alphabet()));
    }
    let width = g.node_depth() + 1;
    let window = |i: usize| -> usize { (i..i + width).fold(0, |acc, j| acc * g.alphabet() + p.symbol(j) as usize) };
    let pre = p.preperiod().len();
    let tail_zero = (pre..pre + p.period().len()).all(|i| r.values[window(i)].is_zero());
    if !tail_zero {
        return Ok(Deviation::Infinite);
    }
    Ok(Deviation::Finite((0..pre).map(|i| r.values[window(i)].clone()).sum()))
}

/// Outcome of the coboundary test.
#[derive(Clone, Debug, PartialEq)]
pub struct CoboundaryCheck {
    pub holds: bool,
    /// A simple cycle with nonzero weight, when `holds` is false.
    pub witness: Option<Vec<usize>>,
    pub witness_sum: Q,
}

/// `z` is a coboundary iff every simple cycle of its graph sums to zero, i.e.
/// both the maximum and the minimum cycle mean vanish.
pub fn is_coboundary(z: &LocallyConstantPotential) -> CoboundaryCheck {
    let g = DeBruijnGraph::from_potential(z);
    let upper = max_mean_cycle(&g);
    let neg = DeBruijnGraph::from_potential(&z.scale(&-Q::from_integer(1.into())));
    let lower = max_mean_cycle(&neg);
    let pick = if upper.m_a.is_positive() {
        Some(upper.maximizing_orbits[0].clone())
    } else if lower.m_a.is_positive() {
        Some(lower.maximizing_orbits[0].clone())
    } else {
        None
    };
    match pick {
        None => CoboundaryCheck { holds: true, witness: None, witness_sum: Q::zero() },
        Some(cycle) => {
            let sum = g.walk_weight(&cycle);
            CoboundaryCheck { holds: false, witness: Some(cycle), witness_sum: sum }
        }
    }
}

/// The max-plus analysis of one potential.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub graph: DeBruijnGraph,
    pub critical: CriticalStructure,
    pub subaction: Subaction,
    pub error: ErrorFunction,
    /// Infimum of the deviation function on each node cylinder.
    pub deviation_floor: Vec<Q>,
}

impl Analysis {
    pub fn new(potential: &LocallyConstantPotential) -> Self {
        let graph = DeBruijnGraph::from_potential(potential);
        let critical = max_mean_cycle(&graph);
        let subaction = calibrated_subaction(&graph, &critical);
        let error = error_function(&graph, &critical, &subaction);
        let deviation_floor = min_cost_to_critical(&graph, &error);
        Analysis { graph, critical, subaction, error, deviation_floor }
    }

    pub fn m_a(&self) -> &Q {
        &self.critical.m_a
    }
}
