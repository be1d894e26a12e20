//! Involution kernel, dual potential and the b-function.
//!
//! For a depth-`k` potential the kernel `W(w, x)` depends only on the first
//! `k - 1` symbols of each argument, so it is stored as a square table over
//! node words. All identities below are exact.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::maxplus::{is_coboundary, Analysis, CoboundaryCheck};
use crate::potential::LocallyConstantPotential;
use crate::rational::{format_rational, Q};
use crate::symbolic::{EventuallyPeriodicPoint, Word};

/// `W(w, x)` over pairs of node words, for a fixed base point `x̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    base_point: EventuallyPeriodicPoint,
    alphabet: usize,
    width: usize,
    values: Vec<Q>,
}

impl KernelTable {
    pub fn base_point(&self) -> &EventuallyPeriodicPoint {
        &self.base_point
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Length of the node words indexing rows and columns.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn size(&self) -> usize {
        self.alphabet.pow(self.width as u32)
    }

    pub fn get(&self, w_node: usize, x_node: usize) -> &Q {
        &self.values[w_node * self.size() + x_node]
    }

    pub fn set(&mut self, w_node: usize, x_node: usize, v: Q) {
        let n = self.size();
        self.values[w_node * n + x_node] = v;
    }

    /// `W` at a pair of points, read through their prefixes.
    pub fn at_points(&self, w: &EventuallyPeriodicPoint, x: &EventuallyPeriodicPoint) -> &Q {
        self.get(w.prefix_word(self.width).index(), x.prefix_word(self.width).index())
    }

    fn x_bar_node(&self) -> usize {
        self.base_point.prefix_word(self.width).index()
    }
}

fn base_point_alphabet_check(a: &LocallyConstantPotential, p: &EventuallyPeriodicPoint) -> Result<()> {
    if a.alphabet() != p.alphabet() {
        return Err(Error::AlphabetMismatch(a.alphabet(), p.alphabet()));
    }
    Ok(())
}

/// `A(w_n ... w_0 y)` for a finite head of `y` at least `k - n - 1` long.
fn pulled_back(a: &LocallyConstantPotential, w: &[u8], n: usize, y: &[u8]) -> Q {
    let k = a.depth();
    let mut word: Vec<u8> = w[..=n].iter().rev().copied().collect();
    word.extend_from_slice(y);
    a.value_of_prefix(&word[..k]).clone()
}

/// `Σ_{n < terms} [A(w_n…w_0 x) − A(w_n…w_0 x̄)]` at points.
///
/// Terms with `n ≥ k − 1` vanish identically; any `terms ≥ k − 1` gives the
/// full kernel.
pub fn kernel_at_points(
    a: &LocallyConstantPotential,
    w: &EventuallyPeriodicPoint,
    x: &EventuallyPeriodicPoint,
    x_bar: &EventuallyPeriodicPoint,
    terms: usize,
) -> Q {
    let k = a.depth();
    let ws = w.prefix(terms.max(1));
    let xs = x.prefix(k);
    let bs = x_bar.prefix(k);
    (0..terms).map(|n| pulled_back(a, &ws, n, &xs) - pulled_back(a, &ws, n, &bs)).sum()
}

/// Tabulates `W(w, x) = Σ_{n=0}^{k-2} [A(τ_{n,w} x) − A(τ_{n,w} x̄)]`.
pub fn involution_kernel(a: &LocallyConstantPotential, x_bar: &EventuallyPeriodicPoint) -> Result<KernelTable> {
    base_point_alphabet_check(a, x_bar)?;
    let d = a.alphabet();
    let width = a.depth() - 1;
    let n = d.pow(width as u32);
    let bs = x_bar.prefix(a.depth());
    let mut values = Vec::with_capacity(n * n);
    for wi in 0..n {
        let w = Word::from_index(wi, width, d);
        for xi in 0..n {
            let x = Word::from_index(xi, width, d);
            // x has k-1 symbols; pulled_back needs at most k-1 of them.
            let v: Q = (0..width)
                .map(|m| pulled_back(a, w.symbols(), m, x.symbols()) - pulled_back(a, w.symbols(), m, &bs))
                .sum();
            values.push(v);
        }
    }
    Ok(KernelTable { base_point: x_bar.clone(), alphabet: d, width, values })
}

/// `A*(w) = A(w_0 x̄) + W(σw, w_0 x̄) − W(w, x̄)`, checked against every x.
pub fn dual_potential(a: &LocallyConstantPotential, kernel: &KernelTable) -> LocallyConstantPotential {
    let k = a.depth();
    let width = kernel.width();
    let x_bar = kernel.base_point();
    let head = |w0: u8, x: &[u8]| -> Vec<u8> {
        let mut v = vec![w0];
        v.extend_from_slice(x);
        v
    };
    let bs = x_bar.prefix(k);
    let dual = LocallyConstantPotential::from_fn(a.alphabet(), k, |w| {
        let s = w.symbols();
        let w_node = Word::new(s[..width].to_vec(), a.alphabet()).unwrap().index();
        let sigma_node = Word::new(s[1..].to_vec(), a.alphabet()).unwrap().index();
        let y = head(s[0], &bs);
        let y_node = Word::new(y[..width].to_vec(), a.alphabet()).unwrap().index();
        a.value_of_prefix(&y).clone() + kernel.get(sigma_node, y_node) - kernel.get(w_node, kernel.x_bar_node())
    })
    .expect("same shape as A");

    if let Some((e, x)) = dual_identity_violation(a, kernel, &dual) {
        panic!("dual potential identity fails at w={} x={}", Word::from_index(e, k, a.alphabet()), x);
    }
    dual
}

/// First `(w-edge, x-node)` where `A*(w) = A(w_0 x) + W(σw, w_0 x) − W(w, x)` fails.
pub fn dual_identity_violation(
    a: &LocallyConstantPotential,
    kernel: &KernelTable,
    dual: &LocallyConstantPotential,
) -> Option<(usize, Word)> {
    let d = a.alphabet();
    let width = kernel.width();
    let n = kernel.size();
    for e in 0..dual.values().len() {
        let w = Word::from_index(e, width + 1, d);
        let s = w.symbols();
        let w_node = e / d;
        let sigma_node = e % n;
        for xi in 0..n {
            let x = Word::from_index(xi, width, d);
            let mut y = vec![s[0]];
            y.extend_from_slice(x.symbols());
            let y_node = Word::new(y[..width].to_vec(), d).unwrap().index();
            let rhs = a.value_of_prefix(&y).clone() + kernel.get(sigma_node, y_node) - kernel.get(w_node, xi);
            if rhs != dual.values()[e] {
                return Some((e, x));
            }
        }
    }
    None
}

/// Closed form of the dual map with base point `base`:
/// `ψ*(w) = ψ(base) + Σ_{m<k} [ψ(w_m…w_0 base) − ψ(w_m…w_1 base)]`.
pub fn dual_transform(
    psi: &LocallyConstantPotential,
    base: &EventuallyPeriodicPoint,
) -> Result<LocallyConstantPotential> {
    base_point_alphabet_check(psi, base)?;
    let k = psi.depth();
    let bs = base.prefix(k);
    let at_base = psi.value_of_prefix(&bs).clone();
    LocallyConstantPotential::from_fn(psi.alphabet(), k, |w| {
        let s = w.symbols();
        let mut total = at_base.clone();
        for m in 0..k {
            let mut full: Vec<u8> = s[..=m].iter().rev().copied().collect();
            full.extend_from_slice(&bs);
            let mut short: Vec<u8> = s[1..=m].iter().rev().copied().collect();
            short.extend_from_slice(&bs);
            total += psi.value_of_prefix(&full[..k]).clone() - psi.value_of_prefix(&short[..k]);
        }
        total
    })
}

/// `(x-node, w-node)` table, stored row-major by x.
#[derive(Clone, Debug, PartialEq)]
pub struct NodePairTable {
    pub size: usize,
    pub values: Vec<Q>,
}

impl NodePairTable {
    pub fn get(&self, x: usize, w: usize) -> &Q {
        &self.values[x * self.size + w]
    }

    pub fn row(&self, x: usize) -> &[Q] {
        &self.values[x * self.size..(x + 1) * self.size]
    }
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub kernel: KernelTable,
    pub dual: LocallyConstantPotential,
    pub primal_analysis: Analysis,
    pub dual_analysis: Analysis,
    /// `D(x) − V(x)`, the same for every x-node.
    pub gamma: Q,
    /// `b(x, p) = V(x) + V*(p) + J*(p) − W(p, x) + γ`.
    pub b_table: NodePairTable,
    /// For each x-node, the w-nodes where `b` vanishes.
    pub optimal_w_per_x: Vec<Vec<usize>>,
}

/// The duality identity `V(x) + γ = max_p [W(p, x) − V*(p) − J*(p)]` and its slack.
pub fn build_duality_report(a: &LocallyConstantPotential, x_bar: &EventuallyPeriodicPoint) -> Result<DualityReport> {
    let kernel = involution_kernel(a, x_bar)?;
    let dual = dual_potential(a, &kernel);
    let primal_analysis = Analysis::new(a);
    if !primal_analysis.critical.unique_maximizer {
        primal_analysis.critical.unique_cycle()?;
    }
    let dual_analysis = Analysis::new(&dual);
    if primal_analysis.m_a() != dual_analysis.m_a() {
        return Err(Error::Inconsistency(format!(
            "m(A) = {} but m(A*) = {}",
            format_rational(primal_analysis.m_a()),
            format_rational(dual_analysis.m_a())
        )));
    }
    let n = kernel.size();
    let v = &primal_analysis.subaction.values;
    let v_star = &dual_analysis.subaction.values;
    let j_star = &dual_analysis.deviation_floor;
    let cost = |p: usize| &v_star[p] + &j_star[p];

    let mut gamma: Option<Q> = None;
    for x in 0..n {
        let dx = (0..n).map(|p| kernel.get(p, x) - cost(p)).max().unwrap();
        let g = dx - &v[x];
        match &gamma {
            None => gamma = Some(g),
            Some(g0) if *g0 != g => {
                return Err(Error::Inconsistency(format!(
                    "D - V is not constant: {} at x-node 0, {} at x-node {x}",
                    format_rational(g0),
                    format_rational(&g)
                )))
            }
            _ => {}
        }
    }
    let gamma = gamma.expect("at least one node");

    let mut values = Vec::with_capacity(n * n);
    for x in 0..n {
        for p in 0..n {
            values.push(&v[x] + cost(p) - kernel.get(p, x) + &gamma);
        }
    }
    let b_table = NodePairTable { size: n, values };
    let optimal_w_per_x = (0..n).map(|x| (0..n).filter(|&p| b_table.get(x, p).is_zero()).collect()).collect();
    let report = DualityReport { kernel, dual, primal_analysis, dual_analysis, gamma, b_table, optimal_w_per_x };
    if let Some(x) = report.b_violation() {
        return Err(Error::Inconsistency(format!("b-table row {x} is negative or has no zero")));
    }
    Ok(report)
}

impl DualityReport {
    /// An x-node whose b-row has a negative entry or no zero.
    pub fn b_violation(&self) -> Option<usize> {
        (0..self.b_table.size).find(|&x| {
            let row = self.b_table.row(x);
            row.iter().any(Signed::is_negative) || !row.iter().any(Zero::is_zero)
        })
    }

    pub fn alphabet(&self) -> usize {
        self.kernel.alphabet()
    }

    pub fn node_count(&self) -> usize {
        self.kernel.size()
    }

    /// Node of `w_0 x` for an x-node.
    fn pushed_node(&self, w0: u8, x: usize) -> usize {
        let width = self.kernel.width();
        if width == 0 {
            return 0;
        }
        let d = self.alphabet();
        let x_word = Word::from_index(x, width, d);
        let mut y = vec![w0];
        y.extend_from_slice(&x_word.symbols()[..width - 1]);
        Word::new(y, d).unwrap().index()
    }

    /// Edge `w_0 x` of the primal graph, for an x-node.
    fn pushed_edge(&self, w0: u8, x: usize) -> usize {
        w0 as usize * self.node_count() + x
    }
}

/// Which relation failed, and where.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationViolation {
    pub relation: &'static str,
    pub x_node: Word,
    pub w_edge: Word,
    pub lhs: Q,
    pub rhs: Q,
}

impl fmt::Display for RelationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at x={} w={}: {} != {}",
            self.relation,
            self.x_node,
            self.w_edge,
            format_rational(&self.lhs),
            format_rational(&self.rhs)
        )
    }
}

/// FR, FR1 and backward invariance on every `(x-node, w-edge)` pair.
///
/// FR: `R(τ_w x) = (V*+V−W)(x, w) − (V*+V−W)(τ_w x, σw) + R*(w)`.
/// FR1 at the point `w` = edge followed by a `J*`-optimal continuation:
/// `b(x, w) − b(τ_w x, σw) = R(τ_w x)`.
#[allow(clippy::result_large_err)]
pub fn fundamental_relation_check(report: &DualityReport) -> std::result::Result<(), RelationViolation> {
    let d = report.alphabet();
    let n = report.node_count();
    let w_tab = &report.kernel;
    let v = &report.primal_analysis.subaction.values;
    let r = &report.primal_analysis.error.values;
    let v_star = &report.dual_analysis.subaction.values;
    let r_star = &report.dual_analysis.error.values;
    let j_star = &report.dual_analysis.deviation_floor;
    let g = &report.dual_analysis.graph;
    let width = w_tab.width();

    for x in 0..n {
        for e in 0..g.edge_count() {
            let (p, t) = (g.source(e), g.target(e));
            let w0 = (e / n) as u8;
            let y = report.pushed_node(w0, x);
            let lhs = r[report.pushed_edge(w0, x)].clone();
            let violation = |relation, lhs: Q, rhs: Q| RelationViolation {
                relation,
                x_node: Word::from_index(x, width, d),
                w_edge: g.edge_word(e),
                lhs,
                rhs,
            };

            let rhs = (&v_star[p] + &v[x] - w_tab.get(p, x)) - (&v_star[t] + &v[y] - w_tab.get(t, y)) + &r_star[e];
            if lhs != rhs {
                return Err(violation("FR", lhs, rhs));
            }

            let b_point = &v[x] + &v_star[p] + &r_star[e] + &j_star[t] - w_tab.get(p, x) + &report.gamma;
            let rhs1 = b_point - report.b_table.get(y, t);
            if lhs != rhs1 {
                return Err(violation("FR1", lhs, rhs1));
            }

            let tight = (&r_star[e] + &j_star[t]) == j_star[p];
            if tight && report.b_table.get(x, p).is_zero() && !report.b_table.get(y, t).is_zero() {
                return Err(violation("backward invariance", report.b_table.get(y, t).clone(), Q::zero()));
            }
        }
    }
    Ok(())
}

/// Outcome of the goodness test on one analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct Goodness {
    pub good: bool,
    /// Smallest `R` over the entry edges; `None` when the cycle has none.
    pub margin: Option<Q>,
    /// Non-critical edges whose target lies on the maximizing cycle.
    pub entry_edges: Vec<usize>,
    /// Entry edges where `R` vanishes.
    pub witnesses: Vec<usize>,
}

/// Goodness of the side carried by `analysis`: `R > 0` on every edge that
/// enters the maximizing cycle from outside it.
pub fn goodness_margin(analysis: &Analysis) -> Result<Goodness> {
    analysis.critical.unique_cycle()?;
    let g = &analysis.graph;
    let entry_edges: Vec<usize> = (0..g.edge_count())
        .filter(|&e| !analysis.critical.is_critical_edge(e) && analysis.critical.is_critical_node(g.target(e)))
        .collect();
    let r = &analysis.error.values;
    let margin = entry_edges.iter().map(|&e| r[e].clone()).min();
    let witnesses: Vec<usize> = entry_edges.iter().copied().filter(|&e| r[e].is_zero()).collect();
    Ok(Goodness { good: witnesses.is_empty(), margin, entry_edges, witnesses })
}

/// Goodness of `A`: the test applied to `R*`.
pub fn goodness_check(a: &LocallyConstantPotential, x_bar: &EventuallyPeriodicPoint) -> Result<Goodness> {
    let kernel = involution_kernel(a, x_bar)?;
    let dual = dual_potential(a, &kernel);
    goodness_margin(&Analysis::new(&dual))
}

/// `L*(L(A)) − A` and its coboundary test.
pub fn dual_roundtrip_check(
    a: &LocallyConstantPotential,
    x_bar: &EventuallyPeriodicPoint,
    omega_bar: &EventuallyPeriodicPoint,
) -> Result<(LocallyConstantPotential, CoboundaryCheck)> {
    let forward = dual_transform(a, x_bar)?;
    let back = dual_transform(&forward, omega_bar)?;
    let diff = back.sub(a)?;
    let check = is_coboundary(&diff);
    Ok((diff, check))
}

fn matrix_csv(size: usize, width: usize, alphabet: usize, corner: &str, get: impl Fn(usize, usize) -> Q) -> String {
    let label = |i: usize| {
        let w = Word::from_index(i, width, alphabet).to_string();
        if w.is_empty() {
            "-".to_string()
        } else {
            w
        }
    };
    let mut out = String::from(corner);
    for c in 0..size {
        out.push(',');
        out.push_str(&label(c));
    }
    out.push('\n');
    for r in 0..size {
        out.push_str(&label(r));
        for c in 0..size {
            out.push(',');
            out.push_str(&format_rational(&get(r, c)));
        }
        out.push('\n');
    }
    out
}

/// Kernel as CSV, rows indexed by w-node and columns by x-node.
pub fn kernel_csv(kernel: &KernelTable) -> String {
    matrix_csv(kernel.size(), kernel.width(), kernel.alphabet(), "w\\x", |w, x| kernel.get(w, x).clone())
}

/// b-table as CSV, rows indexed by x-node and columns by w-node.
pub fn b_table_csv(report: &DualityReport) -> String {
    let k = &report.kernel;
    matrix_csv(k.size(), k.width(), k.alphabet(), "x\\w", |x, w| report.b_table.get(x, w).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::canonical_a2;
    use crate::rational::q;

    fn zero_point() -> EventuallyPeriodicPoint {
        EventuallyPeriodicPoint::constant(0, 2).unwrap()
    }

    #[test]
    fn a2_kernel_and_dual() {
        let a = canonical_a2();
        let w = involution_kernel(&a, &zero_point()).unwrap();
        assert_eq!((w.get(0, 0), w.get(0, 1), w.get(1, 0), w.get(1, 1)), (&q(0), &q(1), &q(0), &q(-1)));
        let dual = dual_potential(&a, &w);
        assert_eq!(dual.values(), &[q(-1), q(-1), q(1), q(-1)]);
        assert_eq!(dual_transform(&a, &zero_point()).unwrap(), dual);
    }

    #[test]
    fn depth_one_kernel_is_zero() {
        let a = LocallyConstantPotential::from_values(2, 1, vec![q(2), q(-3)]).unwrap();
        let w = involution_kernel(&a, &zero_point()).unwrap();
        assert_eq!(w.size(), 1);
        assert_eq!(w.get(0, 0), &q(0));
        assert_eq!(dual_potential(&a, &w), a);
    }

    #[test]
    fn base_point_row_vanishes() {
        let a = LocallyConstantPotential::from_fn(2, 3, |w| q(w.index() as i64 * 3 % 5 - 2)).unwrap();
        let base: EventuallyPeriodicPoint = "1(01)".parse().unwrap();
        let w = involution_kernel(&a, &base).unwrap();
        let col = base.prefix_word(2).index();
        assert!((0..w.size()).all(|r| w.get(r, col).is_zero()));
    }

    #[test]
    fn a2_duality_report() {
        let r = build_duality_report(&canonical_a2(), &zero_point()).unwrap();
        assert_eq!(r.gamma, q(1));
        assert_eq!(r.b_table.values, vec![q(1), q(0), q(0), q(1)]);
        assert_eq!(r.optimal_w_per_x, vec![vec![1], vec![0]]);
        assert!(fundamental_relation_check(&r).is_ok());
        assert_eq!(r.dual_analysis.error.values, vec![q(1), q(0), q(0), q(1)]);
    }

    #[test]
    fn corrupted_kernel_is_caught() {
        let mut r = build_duality_report(&canonical_a2(), &zero_point()).unwrap();
        let old = r.kernel.get(1, 1).clone();
        r.kernel.set(1, 1, old + q(1));
        let err = fundamental_relation_check(&r).unwrap_err();
        assert_eq!(err.relation, "FR");
    }

    #[test]
    fn non_unique_is_refused() {
        let a = LocallyConstantPotential::zero(2, 2).unwrap();
        assert!(matches!(build_duality_report(&a, &zero_point()), Err(Error::NotUnique(_))));
    }

    #[test]
    fn a2_is_good() {
        let g = goodness_check(&canonical_a2(), &zero_point()).unwrap();
        assert!(g.good);
        assert_eq!(g.entry_edges, vec![0, 3]);
        assert_eq!(g.margin, Some(q(1)));
    }

    #[test]
    fn roundtrip_examples() {
        let (_, c) = dual_roundtrip_check(&canonical_a2(), &zero_point(), &zero_point()).unwrap();
        assert!(c.holds);
        let a = LocallyConstantPotential::from_values(2, 1, vec![q(2), q(-3)]).unwrap();
        let (diff, _) = dual_roundtrip_check(&a, &zero_point(), &zero_point()).unwrap();
        assert!(diff.values().iter().all(Zero::is_zero));
    }

    #[test]
    fn kernel_tail_vanishes() {
        let a = LocallyConstantPotential::from_fn(2, 3, |w| q((w.index() as i64 * 7) % 4 - 1)).unwrap();
        let table = involution_kernel(&a, &zero_point()).unwrap();
        let w: EventuallyPeriodicPoint = "10(011)".parse().unwrap();
        let x: EventuallyPeriodicPoint = "(10)".parse().unwrap();
        let short = kernel_at_points(&a, &w, &x, &zero_point(), 2);
        assert_eq!(short, kernel_at_points(&a, &w, &x, &zero_point(), 6));
        assert_eq!(&short, table.at_points(&w, &x));
    }

    #[test]
    fn csv_export_labels_words() {
        let w = involution_kernel(&canonical_a2(), &zero_point()).unwrap();
        assert_eq!(kernel_csv(&w), "w\\x,0,1\n0,0,1\n1,0,-1\n");
    }
}
