//! Brute-force oracles and sample generators shared by the integration tests.
#![allow(dead_code)]

use ergotwist::genericity::{perturb_to_unique, random_sample};
use ergotwist::potential::LocallyConstantPotential;
use ergotwist::rational::{q, qf, MaxPlus};
use ergotwist::symbolic::DeBruijnGraph;
use ergotwist::Q;

/// Perturbed random binary potential; depths cycle through 2, 3, 4.
pub fn perturbed_sample(seed: u64, index: usize) -> LocallyConstantPotential {
    let depth = 2 + index % 3;
    perturb_to_unique(&random_sample(seed, index, depth), &qf(1, 10))
}

/// Largest mean over all simple cycles, by depth-first enumeration.
pub fn brute_force_max_mean(g: &DeBruijnGraph) -> Q {
    fn dfs(
        g: &DeBruijnGraph,
        start: usize,
        at: usize,
        on_path: &mut Vec<bool>,
        sum: Q,
        len: usize,
        best: &mut Option<Q>,
    ) {
        for e in g.out_edges(at) {
            let t = g.target(e);
            let s = &sum + g.weight(e);
            if t == start {
                let mean = &s / Q::from_integer((len as i64 + 1).into());
                if best.as_ref().is_none_or(|b| mean > *b) {
                    *best = Some(mean);
                }
            } else if t > start && !on_path[t] {
                on_path[t] = true;
                dfs(g, start, t, on_path, s, len + 1, best);
                on_path[t] = false;
            }
        }
    }
    let mut best = None;
    for s in 0..g.node_count() {
        let mut on_path = vec![false; g.node_count()];
        on_path[s] = true;
        dfs(g, s, s, &mut on_path, q(0), 0, &mut best);
    }
    best.expect("the graph has cycles")
}

fn mp_product(a: &[Vec<MaxPlus>], b: &[Vec<MaxPlus>]) -> Vec<Vec<MaxPlus>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| a[i][k].times(&b[k][j]))
                        .fold(MaxPlus::NegInf, |acc, v| if v > acc { v } else { acc })
                })
                .collect()
        })
        .collect()
}

/// `h(x, y)` as the largest normalized weight of walks `x → y` with length in
/// `[transient, transient + period)`. Exact once the max-plus powers of the
/// normalized matrix have become periodic.
pub fn peierls_by_walks(g: &DeBruijnGraph, m: &Q, transient: usize, period: usize) -> Vec<Vec<MaxPlus>> {
    let n = g.node_count();
    let mut step = vec![vec![MaxPlus::NegInf; n]; n];
    for e in 0..g.edge_count() {
        step[g.source(e)][g.target(e)] = MaxPlus::Finite(g.weight(e) - m);
    }
    let mut power = step.clone();
    for _ in 1..transient {
        power = mp_product(&power, &step);
    }
    let mut best = power.clone();
    for _ in 1..period {
        power = mp_product(&power, &step);
        for i in 0..n {
            for j in 0..n {
                if power[i][j] > best[i][j] {
                    best[i][j] = power[i][j].clone();
                }
            }
        }
    }
    best
}
