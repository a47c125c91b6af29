//! Structure of optimal service policies against fixed opponent censuses.

use normsim_core::bestresponse::{canonical_threshold, prescribed_threshold, Solver};
use normsim_core::{
    closed_form_bimodal, opponent_of, solve_value_iteration, verify_threshold_structure,
    ActionSpace, CommunityParams, Configuration, FixedBelief, OpponentConfig, SocialNorm,
};
use proptest::prelude::*;

fn norm(n: usize, b: f64, delta: f64, eps: f64, h: usize) -> SocialNorm {
    SocialNorm::new(CommunityParams::new(n, 3, b, 1.0, delta, eps, 1.0).unwrap(), h).unwrap()
}

/// Random opponent census of `n - 1` users, either spread over all
/// reputations or split between the extremes.
fn arb_case() -> impl Strategy<Value = (SocialNorm, OpponentConfig)> {
    (
        3usize..=12,
        1usize..=3,
        0.05f64..0.95,
        1.1f64..6.0,
        prop_oneof![Just(0.0), 0.0f64..0.3],
        any::<bool>(),
        prop::collection::vec(0usize..4, 11),
    )
        .prop_map(|(n, h, delta, b, eps, spread, draws)| {
            let mut counts = vec![0; 4];
            for &r in &draws[..n - 1] {
                counts[if spread { r } else if r < 2 { 0 } else { 3 }] += 1;
            }
            (norm(n, b, delta, eps, h), OpponentConfig::new(counts, n, 3).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn unrestricted_optimum_is_a_threshold((nm, eta) in arb_case()) {
        let check = verify_threshold_structure(&nm, &eta, 1e-7).unwrap();
        prop_assert!(check.holds, "{:?}", check.counterexample);
    }

    #[test]
    fn never_serves_more_than_prescribed((nm, eta) in arb_case()) {
        let sol = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10).unwrap();
        for t in 0..=nm.l() {
            prop_assert!(sol.policy[t] >= prescribed_threshold(&nm, t), "{:?}", sol.policy);
        }
    }

    #[test]
    fn thresholds_fall_within_each_group((nm, eta) in arb_case()) {
        let sol = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10).unwrap();
        let h = nm.h();
        for t in 1..=nm.l() {
            if t != h {
                prop_assert!(sol.policy[t - 1] >= sol.policy[t], "{:?}", sol.policy);
            }
        }
    }

    #[test]
    fn values_rise_with_reputation((nm, eta) in arb_case()) {
        let sol = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10).unwrap();
        let scale = sol.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for w in sol.values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-8 * scale, "{:?}", sol.values);
        }
    }

    #[test]
    fn good_reputations_share_one_policy((nm, eta) in arb_case()) {
        let sol = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10).unwrap();
        let good = &sol.policy[nm.h()..];
        prop_assert!(good.iter().all(|&a| a == good[0]));
        prop_assert!(good[0] == nm.h() || good[0] == nm.l() + 1, "{:?}", sol.policy);
    }

    #[test]
    fn greedy_policy_reproduces_optimal_values((nm, eta) in arb_case()) {
        let table = normsim_core::bestresponse::BellmanTable::thresholds(&nm, &eta, &FixedBelief::for_norm(&nm));
        let sol = Solver::default().run(&table).unwrap();
        let v = table.evaluate(&sol.policy, 1e-12);
        for (a, b) in v.iter().zip(&sol.values) {
            prop_assert!((a - b).abs() < 1e-7 * b.abs().max(1.0));
        }
    }
}

#[test]
fn closed_form_matches_value_iteration_on_bimodal_censuses() {
    let mut checked = 0;
    for n in [5usize, 11] {
        for h in 1..=3 {
            for delta in [0.3, 0.5, 0.6, 0.8] {
                for b in [2.0, 3.0, 5.0] {
                    let nm = norm(n, b, delta, 0.0, h);
                    for top in 0..=n {
                        let mu = Configuration::bimodal(n, 3, top);
                        for own in [0, 3] {
                            if mu.counts()[own] == 0 {
                                continue;
                            }
                            let eta = opponent_of(&mu, own).unwrap();
                            let vi = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10)
                                .unwrap();
                            let cf = closed_form_bimodal(&nm, n - top, top, own).unwrap();
                            for t in 0..=3 {
                                assert!((vi.values[t] - cf.values[t]).abs() < 1e-7);
                                if vi.co_optimal[t].len() == 1 {
                                    let label = canonical_threshold(&nm, t, &eta, cf.policy[t]);
                                    assert_eq!(label, vi.policy[t], "N={n} h={h} δ={delta} b={b} top={top}");
                                }
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn closed_form_hand_values() {
    // N=5, h=1, δ=0.5, b=3, c=1, all four opponents at L.
    let nm = norm(5, 3.0, 0.5, 0.0, 1);
    let cf = closed_form_bimodal(&nm, 0, 5, 3).unwrap();
    assert_eq!(cf.good_action, 1);
    assert!((cf.values[3] - 4.0).abs() < 1e-12);
    // Climbing from 0 to 1: δV(1) - c = 0.5·4 - 1 = 1 > 0, so nobody defects.
    assert_eq!(cf.k, -1);
    assert!((cf.values[0] - 1.0).abs() < 1e-12);
}

#[test]
fn all_bad_opponents_make_everyone_defect() {
    for delta in [0.2, 0.6, 0.95] {
        let nm = norm(6, 5.0, delta, 0.0, 2);
        let eta = opponent_of(&Configuration::concentrated(6, 3, 0), 0).unwrap();
        let sol = solve_value_iteration(&nm, &eta, ActionSpace::Threshold, 1e-10).unwrap();
        assert!(sol.policy.iter().all(|&a| a == 4), "{:?}", sol.policy);
        assert!(sol.values.iter().all(|&v| v.abs() < 1e-9));
    }
}

#[test]
fn subset_and_threshold_solves_agree_on_values() {
    let nm = norm(8, 3.0, 0.7, 0.05, 2);
    let eta = OpponentConfig::new(vec![2, 1, 1, 3], 8, 3).unwrap();
    let belief = FixedBelief::for_norm(&nm);
    let s = Solver::default();
    let a = s.solve(&nm, &eta, &belief, ActionSpace::Subset).unwrap();
    let b = s.solve(&nm, &eta, &belief, ActionSpace::Threshold).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-8);
    }
}
