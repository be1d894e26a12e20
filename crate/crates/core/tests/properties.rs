mod common;

use common::perturbed_sample;
use ergotwist::duality::{build_duality_report, dual_roundtrip_check, fundamental_relation_check};
use ergotwist::genericity::{max_mean_is_lipschitz, random_sample, subaction_holder_excess};
use ergotwist::maxplus::{calibration_violation, Analysis};
use ergotwist::pipeline::analyze;
use ergotwist::rational::qf;
use ergotwist::symbolic::{EventuallyPeriodicPoint, Word};
use ergotwist::transport::{cost_matrix, maximizing_orbit_measures, optimal_permutations};
use ergotwist::twist::{
    certify_twist, change_characterization_check, interval_decomposition, monotonicity_violation, optimal_pair_map,
};
use num_traits::Signed;
use proptest::prelude::*;

fn zero() -> EventuallyPeriodicPoint {
    EventuallyPeriodicPoint::constant(0, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_identities_hold(seed in any::<u64>(), index in 0usize..3) {
        let a = perturbed_sample(seed, index);
        let an = Analysis::new(&a);
        prop_assert!(calibration_violation(&an.graph, an.m_a(), &an.subaction).is_none());
        let report = build_duality_report(&a, &zero()).unwrap();
        prop_assert_eq!(report.primal_analysis.m_a(), report.dual_analysis.m_a());
        prop_assert!(report.b_violation().is_none());
        if let Err(v) = fundamental_relation_check(&report) {
            prop_assert!(false, "{}", v);
        }
        let (_, cob) = dual_roundtrip_check(&a, &zero(), &zero()).unwrap();
        prop_assert!(cob.holds);
    }

    #[test]
    fn roundtrip_is_a_coboundary_for_any_base_points(seed in any::<u64>(), pre in 0u8..2, per in 0u8..2) {
        let a = random_sample(seed, 0, 3);
        let x_bar = EventuallyPeriodicPoint::new(vec![pre], vec![per], 2).unwrap();
        let w_bar = EventuallyPeriodicPoint::new(vec![], vec![0, 1], 2).unwrap();
        let (_, cob) = dual_roundtrip_check(&a, &x_bar, &w_bar).unwrap();
        prop_assert!(cob.holds);
    }

    #[test]
    fn refining_depth_keeps_value_subaction_and_gamma(seed in any::<u64>(), index in 0usize..3) {
        let a = perturbed_sample(seed, index);
        let fine = a.lift(a.depth() + 1).unwrap();
        let (coarse_an, fine_an) = (Analysis::new(&a), Analysis::new(&fine));
        prop_assert_eq!(coarse_an.m_a(), fine_an.m_a());
        let m = coarse_an.graph.node_depth();
        for x in 0..fine_an.graph.node_count() {
            let word = fine_an.graph.node_word(x);
            let prefix = Word::new(word.symbols()[..m].to_vec(), 2).unwrap();
            prop_assert_eq!(&fine_an.subaction.values[x], &coarse_an.subaction.values[prefix.index()]);
        }
        let g0 = build_duality_report(&a, &zero()).unwrap().gamma;
        let g1 = build_duality_report(&fine, &zero()).unwrap().gamma;
        prop_assert_eq!(g0, g1);
    }

    #[test]
    fn twist_combinatorics(seed in any::<u64>(), index in 0usize..3) {
        let a = perturbed_sample(seed, index);
        let report = build_duality_report(&a, &zero()).unwrap();
        prop_assume!(certify_twist(&report.kernel).unwrap().holds);
        let r = analyze(&a, &zero()).unwrap();
        prop_assert!(monotonicity_violation(&r.map).is_none());
        prop_assert!(r.finiteness.distinct_optimal <= r.map.node_count());
        prop_assert!(change_characterization_check(&r.intervals, &r.cut).is_empty());
        prop_assert!(ergotwist::transport::graph_property_check(&r.plan));
    }

    #[test]
    fn max_mean_is_one_lipschitz(s1 in any::<u64>(), s2 in any::<u64>(), d1 in 1usize..4, d2 in 1usize..4) {
        prop_assert!(max_mean_is_lipschitz(&random_sample(s1, 0, d1), &random_sample(s2, 0, d2)).unwrap());
    }

    #[test]
    fn subaction_obeys_holder_bound(seed in any::<u64>(), index in 0usize..3) {
        let a = perturbed_sample(seed, index);
        prop_assert!(!subaction_holder_excess(&a, &qf(1, 2)).is_positive());
    }

    #[test]
    fn shifting_cost_by_a_function_of_w_keeps_argmin(seed in any::<u64>(), index in 0usize..3, phi in proptest::collection::vec(-50i64..50, 16)) {
        let a = perturbed_sample(seed, index);
        let report = build_duality_report(&a, &zero()).unwrap();
        let (mu, mu_star) = maximizing_orbit_measures(&report).unwrap();
        let cost = cost_matrix(&mu, &mu_star, &report.kernel);
        let shifted: Vec<Vec<_>> = cost
            .iter()
            .map(|row| row.iter().enumerate().map(|(j, c)| c + qf(phi[j % phi.len()], 7)).collect())
            .collect();
        prop_assert_eq!(optimal_permutations(&cost), optimal_permutations(&shifted));
    }
}

#[test]
fn optimal_map_is_monotone_even_without_goodness_data() {
    let a = ergotwist::potential::canonical_a2();
    let report = build_duality_report(&a, &zero()).unwrap();
    let map = optimal_pair_map(&report, None).unwrap();
    assert!(monotonicity_violation(&map).is_none());
    assert_eq!(interval_decomposition(&map).unwrap().intervals.len(), 2);
}

#[test]
fn reports_are_deterministic() {
    let a = perturbed_sample(99, 1);
    let one = analyze(&a, &zero()).map(|r| r.to_json().to_string());
    let two = analyze(&a, &zero()).map(|r| r.to_json().to_string());
    assert_eq!(one.ok(), two.ok());
}
