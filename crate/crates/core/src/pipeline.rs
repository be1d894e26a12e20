//! End-to-end runs: the analysis pipeline and the bundle of exact checks.

use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::duality::{
    b_table_csv, build_duality_report, dual_identity_violation, dual_roundtrip_check, fundamental_relation_check,
    goodness_margin, kernel_csv, DualityReport,
};
use crate::error::{Error, Result};
use crate::maxplus::{calibration_violation, Analysis, CriticalStructure};
use crate::potential::LocallyConstantPotential;
use crate::rational::{format_rational, q, Q};
use crate::symbolic::EventuallyPeriodicPoint;
use crate::transport::{
    graph_property_check, maximizing_orbit_measures, plan_csv, plan_matches_optimal_map, slackness_check,
    solve_transport, TransportPlan,
};
use crate::twist::{
    certify_twist, change_characterization_check, finiteness_report, interval_decomposition, monotonicity_violation,
    optimal_pair_map, turning_cut, FinitenessReport, IntervalDecomposition, OptimalPairMap, TurningCut,
};

fn rat(v: &Q) -> Value {
    Value::String(format_rational(v))
}

fn rats(vs: &[Q]) -> Value {
    Value::Array(vs.iter().map(rat).collect())
}

/// Everything produced by a successful analysis run.
pub struct AnalyzeReport {
    pub potential: LocallyConstantPotential,
    pub duality: DualityReport,
    pub map: OptimalPairMap,
    pub cut: TurningCut,
    pub intervals: IntervalDecomposition,
    pub finiteness: FinitenessReport,
    pub plan: TransportPlan,
}

/// Runs max-plus, duality, twist and transport in order, stopping at the
/// first unmet precondition.
pub fn analyze(a: &LocallyConstantPotential, x_bar: &EventuallyPeriodicPoint) -> Result<AnalyzeReport> {
    let duality = build_duality_report(a, x_bar)?;
    let cert = certify_twist(&duality.kernel)?;
    if let Some(w) = &cert.witness {
        return Err(Error::TwistFailure(format!(
            "W({a},{b}) + W({a2},{b2}) = {} is not below {}",
            format_rational(&w.diagonal),
            format_rational(&w.anti_diagonal),
            a = duality.kernel_word(w.a),
            b = duality.kernel_word(w.b),
            a2 = duality.kernel_word(w.a_next),
            b2 = duality.kernel_word(w.b_next),
        )));
    }
    let goodness = goodness_margin(&duality.dual_analysis)?;
    let map = optimal_pair_map(&duality, Some(&goodness))?;
    let cut = turning_cut(&map, &duality)?;
    let intervals = interval_decomposition(&map)?;
    let finiteness = finiteness_report(&map, &duality, Some(&goodness));
    let (mu, mu_star) = maximizing_orbit_measures(&duality)?;
    let plan = solve_transport(&mu, &mu_star, &duality.kernel)?;
    Ok(AnalyzeReport { potential: a.clone(), duality, map, cut, intervals, finiteness, plan })
}

impl DualityReport {
    fn kernel_word(&self, node: usize) -> String {
        let w = crate::symbolic::Word::from_index(node, self.kernel.width(), self.alphabet()).to_string();
        if w.is_empty() {
            "-".into()
        } else {
            w
        }
    }
}

fn analysis_json(a: &Analysis) -> Value {
    let g = &a.graph;
    let orbit = a.critical.unique_cycle().map(|c| CriticalStructure::orbit_word(g, c).to_string()).unwrap_or_default();
    json!({
        "m": rat(a.m_a()),
        "maximizing_orbit": orbit,
        "critical_nodes": a.critical.critical_nodes.iter().map(|&v| g.node_word(v).to_string()).collect::<Vec<_>>(),
        "subaction": rats(&a.subaction.values),
        "error_function": rats(&a.error.values),
        "deviation_floor": rats(&a.deviation_floor),
    })
}

impl AnalyzeReport {
    pub fn to_json(&self) -> Value {
        let d = &self.duality;
        let optimal: Vec<Value> = (0..self.map.node_count())
            .map(|x| {
                json!({
                    "x_node": self.map.node_word(x).to_string(),
                    "value": rat(&self.map.values[x]),
                    "w": self.map.points(x).iter().map(ToString::to_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        let intervals: Vec<Value> = self
            .intervals
            .intervals
            .iter()
            .map(|i| {
                json!({
                    "left": i.left.to_string(),
                    "right": i.right.to_string(),
                    "w": i.optimal.iter().map(ToString::to_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "alphabet_size": self.potential.alphabet(),
            "depth": self.potential.depth(),
            "base_point": d.kernel.base_point().to_string(),
            "primal": analysis_json(&d.primal_analysis),
            "dual": analysis_json(&d.dual_analysis),
            "dual_potential": rats(d.dual.values()),
            "gamma": rat(&d.gamma),
            "optimal_pairs": optimal,
            "turning_cut": self.cut.to_string(),
            "intervals": intervals,
            "distinct_optimal_w": self.finiteness.distinct_optimal,
            "graph_property_on_atoms": self.finiteness.graph_property,
            "good": self.finiteness.good,
            "goodness_margin": self.finiteness.goodness_margin.as_ref().map(rat),
            "transport": {
                "x_atoms": self.plan.x_atoms.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "w_atoms": self.plan.w_atoms.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "permutation": self.plan.permutation,
                "cost": rat(&self.plan.cost),
            },
        })
    }

    /// Named CSV artifacts.
    pub fn csv_artifacts(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kernel.csv", kernel_csv(&self.duality.kernel)),
            ("b_table.csv", b_table_csv(&self.duality)),
            ("plan.csv", plan_csv(&self.plan)),
        ]
    }
}

impl fmt::Display for AnalyzeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.duality;
        writeln!(f, "m(A) = {}", format_rational(d.primal_analysis.m_a()))?;
        writeln!(f, "m(A*) = {}", format_rational(d.dual_analysis.m_a()))?;
        writeln!(f, "gamma = {}", format_rational(&d.gamma))?;
        writeln!(f, "{}", self.finiteness)?;
        for x in 0..self.map.node_count() {
            let ws: Vec<String> = self.map.points(x).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}] -> {}", self.map.node_word(x), ws.join(" "))?;
        }
        writeln!(f, "turning cut {}", self.cut)?;
        write!(f, "{}", self.intervals)?;
        writeln!(f, "transport cost {}", format_rational(&self.plan.cost))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    fn record(&mut self, name: &'static str, ok: bool, detail: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name, status, detail: detail.into() });
    }

    fn skip(&mut self, name: &'static str, why: impl Into<String>) {
        self.checks.push(Check { name, status: Status::Skipped, detail: why.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "status": format!("{:?}", c.status).to_lowercase(),
                "detail": c.detail,
            })).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            if c.detail.is_empty() {
                writeln!(f, "{tag} {}", c.name)?;
            } else {
                writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Options for [`verify`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub x_bar: EventuallyPeriodicPoint,
    /// Adds one to the last kernel entry before checking (negative control).
    pub corrupt_kernel: bool,
}

/// Every exact identity that applies to the potential.
pub fn verify(a: &LocallyConstantPotential, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let primal = Analysis::new(a);
    let bad = calibration_violation(&primal.graph, primal.m_a(), &primal.subaction);
    rep.record(
        "calibration",
        bad.is_none(),
        bad.map(|v| format!("node {}", primal.graph.node_word(v))).unwrap_or_default(),
    );
    let (diff, cob) = dual_roundtrip_check(a, &opts.x_bar, &opts.x_bar)?;
    rep.record(
        "dual roundtrip is a coboundary",
        cob.holds,
        cob.witness
            .as_ref()
            .map(|c| format!("cycle {:?} sums to {}", c, format_rational(&cob.witness_sum)))
            .unwrap_or_default(),
    );
    if a.depth() == 1 {
        rep.notes.push("depth-1 potential: kernel is identically zero, twist is degenerate".into());
        if !diff.values().iter().all(Zero::is_zero) {
            rep.record("depth-1 roundtrip is exact", false, "nonzero difference");
        }
    }

    let mut duality = match build_duality_report(a, &opts.x_bar) {
        Ok(r) => r,
        Err(e) if e.is_precondition() => {
            rep.notes.push(format!("{e}; duality checks skipped"));
            for name in ["m(A) = m(A*)", "FR / FR1 / backward invariance", "b-table", "transport"] {
                rep.skip(name, "maximizer not unique");
            }
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    if opts.corrupt_kernel {
        let n = duality.kernel.size();
        let v = duality.kernel.get(n - 1, n - 1) + q(1);
        duality.kernel.set(n - 1, n - 1, v);
        rep.notes.push("kernel corrupted on request".into());
    }
    rep.record("m(A) = m(A*)", duality.primal_analysis.m_a() == duality.dual_analysis.m_a(), "");
    let ident = dual_identity_violation(a, &duality.kernel, &duality.dual);
    rep.record(
        "dual potential identity",
        ident.is_none(),
        ident.map(|(e, x)| format!("w={} x={}", duality.dual_analysis.graph.edge_word(e), x)).unwrap_or_default(),
    );
    match fundamental_relation_check(&duality) {
        Ok(()) => rep.record("FR / FR1 / backward invariance", true, ""),
        Err(v) => rep.record("FR / FR1 / backward invariance", false, v.to_string()),
    }
    let brow = duality.b_violation();
    rep.record("b-table", brow.is_none(), brow.map(|x| format!("row {x}")).unwrap_or_default());
    let goodness = goodness_margin(&duality.dual_analysis)?;
    rep.record(
        "goodness",
        goodness.good,
        goodness.margin.as_ref().map(|m| format!("margin {}", format_rational(m))).unwrap_or_default(),
    );

    let (mu, mu_star) = maximizing_orbit_measures(&duality)?;
    match solve_transport(&mu, &mu_star, &duality.kernel) {
        Ok(plan) => {
            rep.record("transport LP = permutation optimum", plan.cost == plan.lp_cost, format_rational(&plan.cost));
            let s = slackness_check(&plan, &duality);
            rep.record("dual feasibility and slackness", s.holds(), "");
            rep.record(
                "weak duality at optimum",
                s.dual_value == plan.cost,
                format!("{} vs {}", format_rational(&s.dual_value), format_rational(&plan.cost)),
            );
            twist_checks(&mut rep, &duality, &goodness, Some(&plan))?;
        }
        Err(e @ Error::Inconsistency(_)) => rep.record("transport LP = permutation optimum", false, e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(rep)
}

fn twist_checks(
    rep: &mut VerifyReport,
    duality: &DualityReport,
    goodness: &crate::duality::Goodness,
    plan: Option<&TransportPlan>,
) -> Result<()> {
    let cert = match certify_twist(&duality.kernel) {
        Ok(c) => c,
        Err(e) => {
            rep.skip("twist", e.to_string());
            return Ok(());
        }
    };
    if !cert.holds {
        rep.notes.push("twist condition fails; combinatorial checks skipped".into());
        rep.skip("twist", "not certified");
        return Ok(());
    }
    rep.record("twist", true, format!("{} rectangles", cert.checked_pairs));
    let map = optimal_pair_map(duality, Some(goodness))?;
    let mono = monotonicity_violation(&map);
    rep.record(
        "optimal map is nonincreasing",
        mono.is_none(),
        mono.map(|(a, b)| format!("x-nodes {a} < {b}")).unwrap_or_default(),
    );
    match turning_cut(&map, duality) {
        Ok(cut) => {
            rep.record("turning cut: both formulas agree", true, cut.to_string());
            match interval_decomposition(&map) {
                Ok(dec) => {
                    rep.record("B(w) are intervals", true, format!("{} intervals", dec.intervals.len()));
                    let missing = change_characterization_check(&dec, &cut);
                    rep.record(
                        "boundaries on the orbit of the turning cut",
                        missing.is_empty(),
                        missing.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                    );
                }
                Err(e) => rep.record("B(w) are intervals", false, e.to_string()),
            }
        }
        Err(e) => rep.record("turning cut: both formulas agree", false, e.to_string()),
    }
    if let Some(plan) = plan {
        rep.record("transport support is a graph", graph_property_check(plan), "");
        rep.record("plan pairs are optimal pairs", plan_matches_optimal_map(plan, &map), "");
    }
    let bad_margin = goodness.margin.as_ref().is_some_and(|m| m.is_negative());
    if bad_margin {
        rep.notes.push("negative goodness margin".into());
    }
    Ok(())
}
