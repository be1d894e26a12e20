//! Kantorovich transport between the maximizing orbit measures of `A` and
//! `A*` with cost `-W`, solved exactly.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::duality::{DualityReport, KernelTable};
use crate::error::{Error, Result};
use crate::lp;
use crate::maxplus::{Analysis, CriticalStructure};
use crate::rational::{format_rational, Q};
use crate::symbolic::EventuallyPeriodicPoint;
use crate::twist::OptimalPairMap;

/// Largest support handled by exhaustive permutation search.
pub const MAX_PERMUTATION_ATOMS: usize = 8;

/// Uniform measure on one periodic orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitMeasure {
    /// Distinct shifts of the periodic word, in increasing lexicographic order.
    pub atoms: Vec<EventuallyPeriodicPoint>,
}

impl OrbitMeasure {
    pub fn period(&self) -> usize {
        self.atoms.len()
    }

    pub fn weight(&self) -> Q {
        Q::new(1.into(), (self.atoms.len() as i64).into())
    }

    fn from_analysis(a: &Analysis) -> Result<Self> {
        let cycle = a.critical.unique_cycle()?;
        let word = CriticalStructure::orbit_word(&a.graph, cycle);
        let mut atoms = word.periodic_point()?.orbit();
        atoms.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(OrbitMeasure { atoms })
    }

    /// `∫ f dμ` for a function of the atom.
    pub fn integrate(&self, mut f: impl FnMut(&EventuallyPeriodicPoint) -> Q) -> Q {
        let total: Q = self.atoms.iter().map(&mut f).sum();
        total * self.weight()
    }
}

/// Maximizing measures of `A` (x-side) and `A*` (w-side).
pub fn maximizing_orbit_measures(report: &DualityReport) -> Result<(OrbitMeasure, OrbitMeasure)> {
    Ok((OrbitMeasure::from_analysis(&report.primal_analysis)?, OrbitMeasure::from_analysis(&report.dual_analysis)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Permutation,
    LinearProgram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    pub x_atoms: Vec<EventuallyPeriodicPoint>,
    pub w_atoms: Vec<EventuallyPeriodicPoint>,
    /// `matrix[i][j]`: mass on `(x_i, w_j)`.
    pub matrix: Vec<Vec<Q>>,
    pub cost: Q,
    /// Partner `w`-index of each x-atom when the plan is a permutation.
    pub permutation: Option<Vec<usize>>,
    pub solver: Solver,
    /// Optimal value found by the exact LP.
    pub lp_cost: Q,
}

impl TransportPlan {
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// `-W(w_j, x_i)` for every atom pair.
pub fn cost_matrix(mu: &OrbitMeasure, mu_star: &OrbitMeasure, w: &KernelTable) -> Vec<Vec<Q>> {
    mu.atoms.iter().map(|x| mu_star.atoms.iter().map(|wp| -w.at_points(wp, x).clone()).collect()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                go(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

fn permutation_cost(cost: &[Vec<Q>], perm: &[usize]) -> Q {
    perm.iter().enumerate().map(|(i, &j)| cost[i][j].clone()).sum()
}

/// Every cost-minimizing permutation of a square cost matrix, lexicographic order.
pub fn optimal_permutations(cost: &[Vec<Q>]) -> Vec<Vec<usize>> {
    let all = permutations(cost.len());
    let costs: Vec<Q> = all.iter().map(|p| permutation_cost(cost, p)).collect();
    let best = costs.iter().min().cloned().unwrap_or_else(Q::zero);
    all.into_iter().zip(costs).filter(|(_, c)| *c == best).map(|(p, _)| p).collect()
}

/// Exact LP over couplings with the given uniform marginals.
pub fn transport_lp(cost: &[Vec<Q>]) -> Result<(Vec<Vec<Q>>, Q)> {
    let p = cost.len();
    let q = cost.first().map_or(0, Vec::len);
    let c: Vec<Q> = cost.iter().flatten().cloned().collect();
    let mut a = Vec::with_capacity(p + q);
    let mut b = Vec::with_capacity(p + q);
    for i in 0..p {
        a.push((0..p * q).map(|v| if v / q == i { Q::from_integer(1.into()) } else { Q::zero() }).collect());
        b.push(Q::new(1.into(), (p as i64).into()));
    }
    for j in 0..q {
        a.push((0..p * q).map(|v| if v % q == j { Q::from_integer(1.into()) } else { Q::zero() }).collect());
        b.push(Q::new(1.into(), (q as i64).into()));
    }
    let sol = lp::minimize(&c, &a, &b)?;
    let matrix = sol.x.chunks(q).map(<[Q]>::to_vec).collect();
    Ok((matrix, sol.value))
}

/// Optimal plan for cost `-W`: permutation search when both sides have the
/// same period `≤ 8`, checked against the LP optimum.
pub fn solve_transport(mu: &OrbitMeasure, mu_star: &OrbitMeasure, w: &KernelTable) -> Result<TransportPlan> {
    let cost = cost_matrix(mu, mu_star, w);
    let (lp_matrix, lp_cost) = transport_lp(&cost)?;
    let p = mu.period();
    if p == mu_star.period() && p <= MAX_PERMUTATION_ATOMS {
        let perm = optimal_permutations(&cost).swap_remove(0);
        let weight = mu.weight();
        let value = permutation_cost(&cost, &perm) * &weight;
        if value != lp_cost {
            return Err(Error::Inconsistency(format!(
                "permutation optimum {} differs from LP optimum {}",
                format_rational(&value),
                format_rational(&lp_cost)
            )));
        }
        let mut matrix = vec![vec![Q::zero(); p]; p];
        for (i, &j) in perm.iter().enumerate() {
            matrix[i][j] = weight.clone();
        }
        return Ok(TransportPlan {
            x_atoms: mu.atoms.clone(),
            w_atoms: mu_star.atoms.clone(),
            matrix,
            cost: value,
            permutation: Some(perm),
            solver: Solver::Permutation,
            lp_cost,
        });
    }
    let permutation = permutation_of(&lp_matrix);
    Ok(TransportPlan {
        x_atoms: mu.atoms.clone(),
        w_atoms: mu_star.atoms.clone(),
        matrix: lp_matrix,
        cost: lp_cost.clone(),
        permutation,
        solver: Solver::LinearProgram,
        lp_cost,
    })
}

fn permutation_of(matrix: &[Vec<Q>]) -> Option<Vec<usize>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut perm = Vec::with_capacity(n);
    for row in matrix {
        let nz: Vec<usize> = (0..n).filter(|&j| !row[j].is_zero()).collect();
        if nz.len() != 1 {
            return None;
        }
        perm.push(nz[0]);
    }
    let mut seen = perm.clone();
    seen.sort_unstable();
    seen.dedup();
    (seen.len() == n).then_some(perm)
}

/// Support is a permutation: every x-atom is coupled to exactly one w-atom.
pub fn graph_property_check(plan: &TransportPlan) -> bool {
    permutation_of(&plan.matrix).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slackness {
    /// `b(x_i, w_j)` for every atom pair.
    pub slack: Vec<Vec<Q>>,
    /// Pairs with negative slack (dual infeasibility).
    pub infeasible: Vec<(usize, usize)>,
    /// Support pairs with positive slack.
    pub loose_support: Vec<(usize, usize)>,
    /// `-∫V dμ - ∫V* dμ* - γ`.
    pub dual_value: Q,
}

impl Slackness {
    pub fn holds(&self) -> bool {
        self.infeasible.is_empty() && self.loose_support.is_empty()
    }
}

/// Dual feasibility of `(-V, -V*)` and complementary slackness on the plan.
///
/// The slack of a pair is `b(x, w) = V(x) + V*(w) + J*(w) − W(w, x) + γ`;
/// `J*` vanishes on the maximizing orbit of `A*`.
pub fn slackness_check(plan: &TransportPlan, report: &DualityReport) -> Slackness {
    let k = &report.kernel;
    let node = |p: &EventuallyPeriodicPoint| p.prefix_word(k.width()).index();
    let slack: Vec<Vec<Q>> = plan
        .x_atoms
        .iter()
        .map(|x| plan.w_atoms.iter().map(|w| report.b_table.get(node(x), node(w)).clone()).collect())
        .collect();
    let mut infeasible = Vec::new();
    for (i, row) in slack.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.is_negative() {
                infeasible.push((i, j));
            }
        }
    }
    let loose_support = plan.support().into_iter().filter(|&(i, j)| slack[i][j].is_positive()).collect();
    let v = &report.primal_analysis.subaction.values;
    let v_star = &report.dual_analysis.subaction.values;
    let mu = OrbitMeasure { atoms: plan.x_atoms.clone() };
    let mu_star = OrbitMeasure { atoms: plan.w_atoms.clone() };
    let dual_value =
        -mu.integrate(|x| v[node(x)].clone()) - mu_star.integrate(|w| v_star[node(w)].clone()) - &report.gamma;
    Slackness { slack, infeasible, loose_support, dual_value }
}

/// Cost of an arbitrary plan.
pub fn plan_cost(matrix: &[Vec<Q>], cost: &[Vec<Q>]) -> Q {
    matrix.iter().zip(cost).flat_map(|(mr, cr)| mr.iter().zip(cr).map(|(m, c)| m * c)).sum()
}

/// Each coupled pair `(x_i, w_j)` has `w_j` among the optimal points of `x_i`'s node.
pub fn plan_matches_optimal_map(plan: &TransportPlan, map: &OptimalPairMap) -> bool {
    let node = |p: &EventuallyPeriodicPoint| p.prefix_word(map.node_depth).index();
    plan.support().into_iter().all(|(i, j)| map.points(node(&plan.x_atoms[i])).contains(&plan.w_atoms[j]))
}

impl fmt::Display for TransportPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("x\\w")?;
        for w in &self.w_atoms {
            write!(f, ",{w}")?;
        }
        writeln!(f)?;
        for (x, row) in self.x_atoms.iter().zip(&self.matrix) {
            write!(f, "{x}")?;
            for v in row {
                write!(f, ",{}", format_rational(v))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Plan as CSV with atom labels.
pub fn plan_csv(plan: &TransportPlan) -> String {
    plan.to_string()
}
