//! Twist certificates, optimal pairs, the turning cut and the interval
//! decomposition of the x-side into the sets `B(w)`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::duality::{DualityReport, Goodness, KernelTable};
use crate::error::{Error, Result};
use crate::maxplus::{optimal_connectors, CriticalStructure};
use crate::rational::{format_rational, Q};
use crate::symbolic::{Cut, EventuallyPeriodicPoint, Word};

/// A failing rectangle `((a, b), (a', b'))` with both sides of the inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistWitness {
    pub a: usize,
    pub a_next: usize,
    pub b: usize,
    pub b_next: usize,
    /// `W(a,b) + W(a',b')`.
    pub diagonal: Q,
    /// `W(a,b') + W(a',b)`.
    pub anti_diagonal: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistCertificate {
    pub holds: bool,
    /// Number of adjacent rectangles examined.
    pub checked_pairs: usize,
    pub witness: Option<TwistWitness>,
}

fn require_binary(alphabet: usize) -> Result<()> {
    if alphabet != 2 {
        return Err(Error::NotImplemented(format!("twist analysis needs d = 2, got d = {alphabet}")));
    }
    Ok(())
}

/// `W(a,b) + W(a',b') < W(a,b') + W(a',b)` for all nodes `a < a'`, `b < b'`.
///
/// The cross difference is additive over subdivisions of a rectangle, so it
/// is enough to check rectangles of neighbouring nodes; any failure there is
/// also a failure of the full condition.
pub fn certify_twist(w: &KernelTable) -> Result<TwistCertificate> {
    require_binary(w.alphabet())?;
    let n = w.size();
    if n < 2 {
        let v = w.get(0, 0);
        return Ok(TwistCertificate {
            holds: false,
            checked_pairs: 0,
            witness: Some(TwistWitness { a: 0, a_next: 0, b: 0, b_next: 0, diagonal: v + v, anti_diagonal: v + v }),
        });
    }
    let mut checked = 0;
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            checked += 1;
            let diagonal = w.get(a, b) + w.get(a + 1, b + 1);
            let anti_diagonal = w.get(a, b + 1) + w.get(a + 1, b);
            if diagonal >= anti_diagonal {
                return Ok(TwistCertificate {
                    holds: false,
                    checked_pairs: checked,
                    witness: Some(TwistWitness { a, a_next: a + 1, b, b_next: b + 1, diagonal, anti_diagonal }),
                });
            }
        }
    }
    Ok(TwistCertificate { holds: true, checked_pairs: checked, witness: None })
}

/// One optimal `w` for an x-node, spelled out as an eventually periodic point.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalW {
    pub w_node: usize,
    /// Edges of the dual graph from `w_node` to the maximizing cycle.
    pub connector: Vec<usize>,
    /// The maximizing cycle of the dual, rotated to start where the connector ends.
    pub cycle: Vec<usize>,
    pub point: EventuallyPeriodicPoint,
}

#[derive(Clone, Debug)]
pub struct OptimalPairMap {
    pub alphabet: usize,
    pub node_depth: usize,
    /// Per x-node, optimal points in increasing lexicographic order.
    pub optimal: Vec<Vec<OptimalW>>,
    /// `V(x) + γ`, the value attained by every optimal `w`.
    pub values: Vec<Q>,
    /// False when goodness of the dual side fails.
    pub countability_guaranteed: bool,
    /// Every w-node is optimal for every x-node.
    pub degenerate: bool,
}

impl OptimalPairMap {
    pub fn node_count(&self) -> usize {
        self.optimal.len()
    }

    pub fn node_word(&self, x: usize) -> Word {
        Word::from_index(x, self.node_depth, self.alphabet)
    }

    /// Optimal points of an x-node.
    pub fn points(&self, x: usize) -> Vec<EventuallyPeriodicPoint> {
        self.optimal[x].iter().map(|o| o.point.clone()).collect()
    }

    /// All distinct optimal points, sorted.
    pub fn distinct_points(&self) -> Vec<EventuallyPeriodicPoint> {
        let mut all: Vec<EventuallyPeriodicPoint> = self.optimal.iter().flatten().map(|o| o.point.clone()).collect();
        sort_points(&mut all);
        all.dedup();
        all
    }
}

fn sort_points(points: &mut [EventuallyPeriodicPoint]) {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
}

fn rotate_to(g: &crate::symbolic::DeBruijnGraph, cycle: &[usize], node: usize) -> Vec<usize> {
    let at = cycle.iter().position(|&e| g.source(e) == node).expect("connector ends on the cycle");
    let mut out = cycle.to_vec();
    out.rotate_left(at);
    out
}

/// Zeros of `b` per x-node, expanded into full optimal points.
pub fn optimal_pair_map(report: &DualityReport, goodness: Option<&Goodness>) -> Result<OptimalPairMap> {
    let dual = &report.dual_analysis;
    let cycle = dual.critical.unique_cycle()?.to_vec();
    let g = &dual.graph;
    let n = report.node_count();
    let mut optimal = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = Vec::new();
        for &p in &report.optimal_w_per_x[x] {
            for connector in optimal_connectors(g, &dual.error, &dual.deviation_floor, &dual.critical.critical_nodes, p)
            {
                let end = connector.last().map_or(p, |&e| g.target(e));
                let rotated = rotate_to(g, &cycle, end);
                let point = g.point_of_walk(p, &connector, &rotated);
                row.push(OptimalW { w_node: p, connector, cycle: rotated, point });
            }
        }
        row.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap_or(Ordering::Equal));
        row.dedup_by(|a, b| a.point == b.point);
        optimal.push(row);
    }
    let values = report.primal_analysis.subaction.values.iter().map(|v| v + &report.gamma).collect();
    let degenerate = report.optimal_w_per_x.iter().all(|row| row.len() == n);
    Ok(OptimalPairMap {
        alphabet: report.alphabet(),
        node_depth: report.kernel.width(),
        optimal,
        values,
        countability_guaranteed: goodness.is_none_or(|g| g.good),
        degenerate,
    })
}

/// First pair of x-nodes `q < q'` with `max S(q') > min S(q)`.
pub fn monotonicity_violation(map: &OptimalPairMap) -> Option<(usize, usize)> {
    let n = map.node_count();
    let bounds: Vec<(EventuallyPeriodicPoint, EventuallyPeriodicPoint)> = (0..n)
        .map(|x| {
            let pts = map.points(x);
            (pts.first().unwrap().clone(), pts.last().unwrap().clone())
        })
        .collect();
    for q in 0..n {
        for q2 in q + 1..n {
            if bounds[q2].1 > bounds[q].0 {
                return Some((q, q2));
            }
        }
    }
    None
}

/// Location of the turning point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TurningCut {
    /// No optimal `w` starts with 1: the turning point is `0^∞`.
    LeftEnd,
    /// Every x-node admits an optimal `w` starting with 1: the turning point is `1^∞`.
    RightEnd,
    Interior(Cut),
}

impl TurningCut {
    /// Points realizing the turning point.
    pub fn representatives(&self) -> Vec<EventuallyPeriodicPoint> {
        match self {
            TurningCut::LeftEnd => vec![EventuallyPeriodicPoint::constant(0, 2).unwrap()],
            TurningCut::RightEnd => vec![EventuallyPeriodicPoint::constant(1, 2).unwrap()],
            TurningCut::Interior(c) => vec![c.left_rep.clone(), c.right_rep.clone()],
        }
    }

    pub fn is_boundary(&self) -> bool {
        !matches!(self, TurningCut::Interior(_))
    }
}

impl fmt::Display for TurningCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TurningCut::LeftEnd => f.write_str("(0)|(0)"),
            TurningCut::RightEnd => f.write_str("(1)|(1)"),
            TurningCut::Interior(c) => c.fmt(f),
        }
    }
}

fn cut_after(map: &OptimalPairMap, last_left: Option<usize>) -> Result<TurningCut> {
    let n = map.node_count();
    Ok(match last_left {
        None => TurningCut::LeftEnd,
        Some(q) if q + 1 == n => TurningCut::RightEnd,
        Some(q) => TurningCut::Interior(Cut::between(&map.node_word(q), &map.node_word(q + 1))?),
    })
}

/// The turning cut, computed from the optimal map and cross-checked against
/// the first x-node where `R(1·x) > 0`.
pub fn turning_cut(map: &OptimalPairMap, report: &DualityReport) -> Result<TurningCut> {
    require_binary(map.alphabet)?;
    if map.node_depth == 0 {
        return Err(Error::TwistFailure("depth-1 kernel is degenerate".into()));
    }
    let n = map.node_count();
    let starts_with_one = |o: &OptimalW| o.point.symbol(0) == 1;
    let last = (0..n).rev().find(|&x| map.optimal[x].iter().any(starts_with_one));
    let primary = cut_after(map, last)?;

    let r = &report.primal_analysis.error.values;
    let first_strict = (0..n).find(|&x| r[n + x].is_positive());
    let cross = cut_after(
        map,
        match first_strict {
            None => Some(n - 1),
            Some(0) => None,
            Some(x) => Some(x - 1),
        },
    )?;
    if primary != cross {
        return Err(Error::Inconsistency(format!("turning cut {primary} disagrees with defect formula {cross}")));
    }
    Ok(primary)
}

/// A maximal run of x-nodes with the same optimal set.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub optimal: Vec<EventuallyPeriodicPoint>,
    pub first_node: usize,
    pub last_node: usize,
    pub left: EventuallyPeriodicPoint,
    pub right: EventuallyPeriodicPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalDecomposition {
    pub intervals: Vec<Interval>,
    /// Cuts between consecutive intervals.
    pub boundaries: Vec<Cut>,
}

pub fn interval_decomposition(map: &OptimalPairMap) -> Result<IntervalDecomposition> {
    let n = map.node_count();
    let mut intervals: Vec<Interval> = Vec::new();
    for x in 0..n {
        let pts = map.points(x);
        match intervals.last_mut() {
            Some(last) if last.optimal == pts => {
                last.last_node = x;
                last.right = map.node_word(x).cylinder_sup();
            }
            _ => intervals.push(Interval {
                optimal: pts,
                first_node: x,
                last_node: x,
                left: map.node_word(x).cylinder_inf(),
                right: map.node_word(x).cylinder_sup(),
            }),
        }
    }
    // B(w) must be a contiguous run of x-nodes.
    let all: BTreeSet<String> = intervals.iter().flat_map(|i| i.optimal.iter().map(|p| p.to_string())).collect();
    for w in &all {
        let hits: Vec<usize> = (0..n).filter(|&x| map.points(x).iter().any(|p| p.to_string() == *w)).collect();
        if hits.last().unwrap() - hits.first().unwrap() + 1 != hits.len() {
            return Err(Error::TwistFailure(format!("B({w}) is not an interval of x-nodes")));
        }
    }
    let boundaries = intervals
        .windows(2)
        .map(|pair| Cut::between(&map.node_word(pair[0].last_node), &map.node_word(pair[1].first_node)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalDecomposition { intervals, boundaries })
}

impl fmt::Display for IntervalDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "intervals {}", self.intervals.len())?;
        for i in &self.intervals {
            let ws: Vec<String> = i.optimal.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}, {}] -> {}", i.left, i.right, ws.join(" "))?;
        }
        Ok(())
    }
}

/// Boundaries not reached by any forward iterate of the turning cut's
/// representatives.
pub fn change_characterization_check(dec: &IntervalDecomposition, c: &TurningCut) -> Vec<Cut> {
    let orbit: Vec<EventuallyPeriodicPoint> = c.representatives().iter().flat_map(|r| r.orbit()).collect();
    dec.boundaries.iter().filter(|b| !orbit.iter().any(|p| b.contains(p))).cloned().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinitenessReport {
    pub distinct_optimal: usize,
    /// Number of optimal points at each x-node lying on the maximizing cycle of `A`.
    pub atom_multiplicities: Vec<(Word, usize)>,
    /// At most one atom carries more than one optimal point.
    pub graph_property: bool,
    pub good: Option<bool>,
    pub goodness_margin: Option<Q>,
    pub degenerate: bool,
}

pub fn finiteness_report(
    map: &OptimalPairMap,
    report: &DualityReport,
    goodness: Option<&Goodness>,
) -> FinitenessReport {
    let g = &report.primal_analysis.graph;
    let atoms: Vec<usize> = match report.primal_analysis.critical.unique_cycle() {
        Ok(cycle) => cycle.iter().map(|&e| g.source(e)).collect(),
        Err(_) => Vec::new(),
    };
    let atom_multiplicities: Vec<(Word, usize)> =
        atoms.iter().map(|&x| (g.node_word(x), map.optimal[x].len())).collect();
    let multi = atom_multiplicities.iter().filter(|(_, m)| *m > 1).count();
    FinitenessReport {
        distinct_optimal: map.distinct_points().len(),
        atom_multiplicities,
        graph_property: multi <= 1,
        good: goodness.map(|g| g.good),
        goodness_margin: goodness.and_then(|g| g.margin.clone()),
        degenerate: map.degenerate,
    }
}

impl fmt::Display for FinitenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "distinct optimal w: {}", self.distinct_optimal)?;
        if let Some(m) = &self.goodness_margin {
            write!(f, ", goodness margin {}", format_rational(m))?;
        }
        if self.degenerate {
            f.write_str(" (degenerate)")?;
        }
        Ok(())
    }
}

/// Convenience: the maximizing cycle of the dual as a word.
pub fn dual_cycle_word(report: &DualityReport) -> Result<Word> {
    let cycle = report.dual_analysis.critical.unique_cycle()?;
    Ok(CriticalStructure::orbit_word(&report.dual_analysis.graph, cycle))
}

/// Exhaustive form of the twist inequality over all node pairs, used to
/// cross-check the neighbour-rectangle certificate.
pub fn twist_holds_exhaustive(w: &KernelTable) -> bool {
    let n = w.size();
    if n < 2 {
        return false;
    }
    for a in 0..n {
        for a2 in a + 1..n {
            for b in 0..n {
                for b2 in b + 1..n {
                    if w.get(a, b) + w.get(a2, b2) >= w.get(a, b2) + w.get(a2, b) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// True when every value of the table is zero.
pub fn kernel_is_zero(w: &KernelTable) -> bool {
    (0..w.size()).all(|a| (0..w.size()).all(|b| w.get(a, b).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{build_duality_report, goodness_check, involution_kernel};
    use crate::potential::{canonical_a2, LocallyConstantPotential};
    use crate::rational::q;

    fn zero_point() -> EventuallyPeriodicPoint {
        EventuallyPeriodicPoint::constant(0, 2).unwrap()
    }

    fn a2_map() -> (DualityReport, OptimalPairMap) {
        let r = build_duality_report(&canonical_a2(), &zero_point()).unwrap();
        let m = optimal_pair_map(&r, None).unwrap();
        (r, m)
    }

    #[test]
    fn a2_twist() {
        let w = involution_kernel(&canonical_a2(), &zero_point()).unwrap();
        let c = certify_twist(&w).unwrap();
        assert!(c.holds);
        assert!(twist_holds_exhaustive(&w));
    }

    #[test]
    fn degenerate_and_reversed_kernels_fail() {
        let one = LocallyConstantPotential::from_values(2, 1, vec![q(0), q(-1)]).unwrap();
        let w = involution_kernel(&one, &zero_point()).unwrap();
        let c = certify_twist(&w).unwrap();
        assert!(!c.holds);
        let wit = c.witness.unwrap();
        assert_eq!(wit.diagonal, wit.anti_diagonal);

        let mut w = involution_kernel(&canonical_a2(), &zero_point()).unwrap();
        let (w01, w11) = (w.get(0, 1).clone(), w.get(1, 1).clone());
        w.set(0, 1, w11);
        w.set(1, 1, w01);
        let c = certify_twist(&w).unwrap();
        assert!(!c.holds);
        let wit = c.witness.unwrap();
        assert!(wit.diagonal > wit.anti_diagonal);
    }

    #[test]
    fn ternary_twist_is_refused() {
        let a = LocallyConstantPotential::zero(3, 2).unwrap();
        let w = involution_kernel(&a, &EventuallyPeriodicPoint::constant(0, 3).unwrap()).unwrap();
        assert!(matches!(certify_twist(&w), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn a2_optimal_map_and_cut() {
        let (r, m) = a2_map();
        assert_eq!(m.points(0), vec!["(10)".parse().unwrap()]);
        assert_eq!(m.points(1), vec!["(01)".parse().unwrap()]);
        assert_eq!(monotonicity_violation(&m), None);
        let c = turning_cut(&m, &r).unwrap();
        assert_eq!(c.to_string(), "0(1)|1(0)");
    }

    #[test]
    fn a2_intervals() {
        let (r, m) = a2_map();
        let dec = interval_decomposition(&m).unwrap();
        assert_eq!(dec.intervals.len(), 2);
        assert_eq!(dec.intervals[0].left.to_string(), "(0)");
        assert_eq!(dec.intervals[0].right.to_string(), "0(1)");
        assert_eq!(dec.intervals[1].left.to_string(), "1(0)");
        assert_eq!(dec.intervals[1].right.to_string(), "(1)");
        let c = turning_cut(&m, &r).unwrap();
        assert!(change_characterization_check(&dec, &c).is_empty());
        let goodness = goodness_check(&canonical_a2(), &zero_point()).unwrap();
        let fin = finiteness_report(&m, &r, Some(&goodness));
        assert_eq!(fin.distinct_optimal, 2);
        assert!(fin.graph_property);
    }

    #[test]
    fn a2_refined_to_depth_three() {
        let a = canonical_a2().lift(3).unwrap();
        let r = build_duality_report(&a, &zero_point()).unwrap();
        let m = optimal_pair_map(&r, None).unwrap();
        let dec = interval_decomposition(&m).unwrap();
        let ends: Vec<String> = dec.intervals.iter().map(|i| format!("{} {}", i.left, i.right)).collect();
        assert_eq!(ends, vec!["(0) 0(1)", "1(0) (1)"]);
        assert_eq!(turning_cut(&m, &r).unwrap().to_string(), "0(1)|1(0)");
    }
}
