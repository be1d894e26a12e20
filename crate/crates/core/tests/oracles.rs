#![allow(clippy::needless_range_loop)]

mod common;

use common::{brute_force_max_mean, peierls_by_walks, perturbed_sample};
use ergotwist::duality::{build_duality_report, dual_identity_violation, involution_kernel, kernel_at_points};
use ergotwist::genericity::random_sample;
use ergotwist::maxplus::{mane_potential, max_mean_cycle, peierls_barrier, Analysis};
use ergotwist::potential::canonical_a2;
use ergotwist::rational::qf;
use ergotwist::symbolic::{DeBruijnGraph, EventuallyPeriodicPoint};
use ergotwist::transport::{cost_matrix, maximizing_orbit_measures, optimal_permutations, plan_cost, transport_lp};
use ergotwist::twist::{certify_twist, twist_holds_exhaustive};

fn zero() -> EventuallyPeriodicPoint {
    EventuallyPeriodicPoint::constant(0, 2).unwrap()
}

#[test]
fn karp_matches_simple_cycle_enumeration_on_raw_samples() {
    for i in 0..120 {
        let a = random_sample(11, i, 2 + i % 3);
        let g = DeBruijnGraph::from_potential(&a);
        assert_eq!(max_mean_cycle(&g).m_a, brute_force_max_mean(&g), "sample {i}");
    }
}

#[test]
fn karp_matches_enumeration_on_ternary_alphabet() {
    use ergotwist::genericity::sample_rng;
    use ergotwist::potential::random_potential;
    use ergotwist::rational::q;
    for i in 0..30 {
        let a = random_potential(&mut sample_rng(5, i), 3, 2, &q(-1), &q(1), 7).unwrap();
        let g = DeBruijnGraph::from_potential(&a);
        assert_eq!(max_mean_cycle(&g).m_a, brute_force_max_mean(&g), "sample {i}");
    }
}

#[test]
fn peierls_barrier_matches_long_walks() {
    // Depth 3: four nodes, so every cycle length divides 12.
    let mut samples = vec![canonical_a2().lift(3).unwrap()];
    samples.extend((0..8).map(|i| ergotwist::genericity::perturb_to_unique(&random_sample(3, i, 3), &qf(1, 10))));
    for (i, a) in samples.iter().enumerate() {
        let g = DeBruijnGraph::from_potential(a);
        let cs = max_mean_cycle(&g);
        let h = peierls_barrier(&cs, &mane_potential(&g, &cs));
        let walks = peierls_by_walks(&g, &cs.m_a, 400, 12);
        for u in 0..g.node_count() {
            for v in 0..g.node_count() {
                assert_eq!(h.get(u, v), &walks[u][v], "sample {i}, nodes {u} -> {v}");
            }
        }
    }
}

#[test]
fn neighbour_twist_certificate_matches_exhaustive_check() {
    let mut held = 0;
    for i in 0..150 {
        let a = random_sample(17, i, 2 + i % 3);
        let w = involution_kernel(&a, &zero()).unwrap();
        let cert = certify_twist(&w).unwrap();
        assert_eq!(cert.holds, twist_holds_exhaustive(&w), "sample {i}");
        held += cert.holds as usize;
    }
    assert!(held > 0, "no sample satisfied the twist condition");
}

#[test]
fn kernel_table_matches_series_at_points() {
    for i in 0..30 {
        let a = perturbed_sample(23, i);
        let w = involution_kernel(&a, &zero()).unwrap();
        let width = w.width();
        for p in 0..w.size() {
            for x in 0..w.size() {
                let wp = ergotwist::symbolic::Word::from_index(p, width, 2).cylinder_inf();
                let xp = ergotwist::symbolic::Word::from_index(x, width, 2).cylinder_sup();
                let series = kernel_at_points(&a, &wp, &xp, &zero(), a.depth() + 3);
                assert_eq!(&series, w.at_points(&wp, &xp), "sample {i}");
            }
        }
        assert!(dual_identity_violation(&a, &w, &ergotwist::duality::dual_potential(&a, &w)).is_none());
    }
}

#[test]
fn permutation_search_matches_lp() {
    let mut checked = 0;
    for i in 0..60 {
        let a = perturbed_sample(29, i);
        let Ok(report) = build_duality_report(&a, &zero()) else { continue };
        let Ok((mu, mu_star)) = maximizing_orbit_measures(&report) else { continue };
        let cost = cost_matrix(&mu, &mu_star, &report.kernel);
        let p = cost.len();
        let best = optimal_permutations(&cost)
            .iter()
            .map(|perm| {
                let mut m = vec![vec![qf(0, 1); p]; p];
                for (i, &j) in perm.iter().enumerate() {
                    m[i][j] = qf(1, p as i64);
                }
                plan_cost(&m, &cost)
            })
            .min()
            .unwrap();
        let (_, lp) = transport_lp(&cost).unwrap();
        assert_eq!(best, lp, "sample {i}");
        checked += 1;
    }
    assert!(checked >= 50);
}

#[test]
fn analysis_of_lift_is_unchanged() {
    let a = canonical_a2();
    for depth in 2..=5 {
        let lifted = Analysis::new(&a.lift(depth).unwrap());
        assert_eq!(lifted.m_a(), Analysis::new(&a).m_a());
        assert!(lifted.subaction.values.iter().all(|v| *v == qf(0, 1)));
    }
}
