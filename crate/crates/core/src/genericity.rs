//! Sampling of generic properties: uniqueness, Aubry set equal to the support,
//! goodness, on random potentials after the perturbation that isolates one
//! maximizing cycle.

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::duality::{dual_potential, goodness_margin, involution_kernel};
use crate::error::Result;
use crate::maxplus::{aubry_set, mane_potential, max_mean_cycle, Analysis};
use crate::potential::{random_potential, LocallyConstantPotential};
use crate::rational::{pow, q, Q};
use crate::symbolic::{DeBruijnGraph, EventuallyPeriodicPoint};

/// `A + ψ` with `ψ = −ε` off the smallest maximizing cycle and `0` on it.
pub fn perturb_to_unique(a: &LocallyConstantPotential, eps: &Q) -> LocallyConstantPotential {
    let cs = max_mean_cycle(&DeBruijnGraph::from_potential(a));
    let cycle = cs.maximizing_orbits.iter().min().expect("a maximizing cycle exists").clone();
    a.map(|e, v| if cycle.contains(&e) { v.clone() } else { v - eps })
}

/// Per-sample outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleFlags {
    pub index: usize,
    pub unique_before: bool,
    pub unique: bool,
    pub unique_dual: bool,
    pub aubry_is_support: bool,
    pub aubry_is_support_dual: bool,
    pub good: bool,
    pub good_dual: bool,
}

impl SampleFlags {
    pub fn all_hold(&self) -> bool {
        self.unique
            && self.unique_dual
            && self.aubry_is_support
            && self.aubry_is_support_dual
            && self.good
            && self.good_dual
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericReport {
    pub seed: u64,
    pub depth: usize,
    pub samples: Vec<SampleFlags>,
}

impl GenericReport {
    pub fn count(&self, f: impl Fn(&SampleFlags) -> bool) -> usize {
        self.samples.iter().filter(|s| f(s)).count()
    }

    pub fn to_csv(&self) -> String {
        let b = |x: bool| if x { "1" } else { "0" };
        let mut out = String::from(
            "index,unique_before,unique,unique_dual,aubry_is_support,aubry_is_support_dual,good,good_dual\n",
        );
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.index,
                b(s.unique_before),
                b(s.unique),
                b(s.unique_dual),
                b(s.aubry_is_support),
                b(s.aubry_is_support_dual),
                b(s.good),
                b(s.good_dual)
            ));
        }
        let n = self.samples.len();
        out.push_str(&format!(
            "# samples {n}; unique before {}; unique {}; unique dual {}; aubry=support {}/{}; good {}/{}\n",
            self.count(|s| s.unique_before),
            self.count(|s| s.unique),
            self.count(|s| s.unique_dual),
            self.count(|s| s.aubry_is_support),
            self.count(|s| s.aubry_is_support_dual),
            self.count(|s| s.good),
            self.count(|s| s.good_dual),
        ));
        out
    }
}

/// Deterministic generator for sample `index` of a run.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Random binary depth-`depth` potential with values `j/1000` in `[−1, 1]`.
pub fn random_sample(seed: u64, index: usize, depth: usize) -> LocallyConstantPotential {
    random_potential(&mut sample_rng(seed, index), 2, depth, &q(-1), &q(1), 1000).expect("valid range")
}

fn aubry_matches_support(analysis: &Analysis) -> bool {
    let aubry = aubry_set(&mane_potential(&analysis.graph, &analysis.critical));
    match analysis.critical.unique_cycle() {
        Ok(cycle) => {
            let mut support: Vec<usize> = cycle.iter().map(|&e| analysis.graph.source(e)).collect();
            support.sort_unstable();
            support == aubry
        }
        Err(_) => false,
    }
}

fn flags_for(index: usize, raw: &LocallyConstantPotential, eps: &Q) -> Result<SampleFlags> {
    let unique_before = max_mean_cycle(&DeBruijnGraph::from_potential(raw)).unique_maximizer;
    let a = perturb_to_unique(raw, eps);
    let primal = Analysis::new(&a);
    let kernel = involution_kernel(&a, &EventuallyPeriodicPoint::constant(0, a.alphabet())?)?;
    let dual = Analysis::new(&dual_potential(&a, &kernel));
    let good = |an: &Analysis| goodness_margin(an).map(|g| g.good).unwrap_or(false);
    Ok(SampleFlags {
        index,
        unique_before,
        unique: primal.critical.unique_maximizer,
        unique_dual: dual.critical.unique_maximizer,
        aubry_is_support: aubry_matches_support(&primal),
        aubry_is_support_dual: aubry_matches_support(&dual),
        good: good(&primal),
        good_dual: good(&dual),
    })
}

/// Draws `count` random potentials, isolates a maximizing cycle with
/// `ε = 1/10`, and records the generic properties on both sides.
pub fn sample_generic_suite(seed: u64, count: usize, depth: usize) -> Result<GenericReport> {
    let eps = Q::new(1.into(), 10.into());
    let samples = (0..count)
        .into_par_iter()
        .map(|i| flags_for(i, &random_sample(seed, i, depth), &eps))
        .collect::<Result<Vec<_>>>()?;
    Ok(GenericReport { seed, depth, samples })
}

/// `|m(A) − m(B)| ≤ ‖A − B‖∞`.
pub fn max_mean_is_lipschitz(a: &LocallyConstantPotential, b: &LocallyConstantPotential) -> Result<bool> {
    let depth = a.depth().max(b.depth());
    let (a, b) = (a.lift(depth)?, b.lift(depth)?);
    let ma = max_mean_cycle(&DeBruijnGraph::from_potential(&a)).m_a;
    let mb = max_mean_cycle(&DeBruijnGraph::from_potential(&b)).m_a;
    Ok((ma - mb).abs() <= a.sub(&b)?.sup_norm())
}

/// Worst excess of `|V(u) − V(v)|` over its two a-priori bounds, across all
/// node pairs: `Σ_{n>j} var_n(A)` and `λ/(1−λ) · Lip_λ(A) · d(u, v)`, with `j`
/// the length of the common prefix. Nonpositive when both bounds hold.
pub fn subaction_holder_excess(a: &LocallyConstantPotential, lambda: &Q) -> Q {
    let analysis = Analysis::new(a);
    let g = &analysis.graph;
    let v = &analysis.subaction.values;
    let lip = a.lipschitz_seminorm(lambda);
    let factor = lambda / (Q::from_integer(1.into()) - lambda);
    let m = g.node_depth();
    let mut worst: Option<Q> = None;
    for x in 0..g.node_count() {
        for y in x + 1..g.node_count() {
            let (wx, wy) = (g.node_word(x), g.node_word(y));
            let j = wx.symbols().iter().zip(wy.symbols()).take_while(|(p, r)| p == r).count();
            let gap = (&v[x] - &v[y]).abs();
            let tail: Q = (j + 1..=m).map(|n| a.variation(n)).sum();
            let metric = &factor * &lip * pow(lambda, j + 1);
            let excess = (&gap - &tail).max(&gap - &metric);
            if worst.as_ref().is_none_or(|w| excess > *w) {
                worst = Some(excess);
            }
        }
    }
    worst.unwrap_or_else(|| Q::from_integer((-1).into()))
}
