//! Property tests for the structural invariants: divergence conventions,
//! simulation roundtrips, channel contraction, and phase-space partitions.

use proptest::prelude::*;

use signedsim::measures::{
    kl_divergence, l1_distance, total_variation_weight, ProbDist, SignedMeasure,
};
use signedsim::rates::{chi_square_form, small_deviation_form};
use signedsim::scenario::{
    canonical_phase_space, induced_model, nonnegative_realization_exists, realize_minimal,
    states_consistent_with, MeasurementScenario,
};
use signedsim::simulation::{
    build_channel, classical_pushforward, double, signed_pushforward, OutcomeMap,
};

fn normalized(k: usize, lo: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..1.0f64, k).prop_map(|mut v| {
        let sum: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= sum);
        v
    })
}

/// A signed measure together with an outcome map that keeps every image
/// cell non-negative: fibers are built independently, each with a
/// non-negative signed total.
fn signed_measure_with_map() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, usize)> {
    let fiber = prop::collection::vec((0.02f64..1.0, any::<bool>()), 1..4);
    prop::collection::vec(fiber, 1..5).prop_map(|fibers| {
        let mut weights = Vec::new();
        let mut assignments = Vec::new();
        for (obs, fiber) in fibers.iter().enumerate() {
            let mut signed: Vec<f64> = fiber
                .iter()
                .map(|&(w, neg)| if neg { -w } else { w })
                .collect();
            if signed.iter().sum::<f64>() <= 0.02 {
                signed.iter_mut().for_each(|w| *w = w.abs());
            }
            for w in signed {
                weights.push(w);
                assignments.push(obs);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let n_obs = fibers.len();
        (weights, assignments, n_obs)
    })
}

proptest! {
    #[test]
    fn kl_is_nonnegative_and_faithful(
        q in normalized(4, 1e-4),
        p in normalized(4, 1e-4),
    ) {
        let q = ProbDist::from_probs(q).unwrap();
        let p = ProbDist::from_probs(p).unwrap();
        let d = kl_divergence(&q, &p).unwrap();
        prop_assert!(d >= 0.0);
        if l1_distance(&q, &p).unwrap() > 1e-6 {
            prop_assert!(d > 0.0);
        }
        prop_assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
    }

    #[test]
    fn kl_finite_iff_support_contained(
        base in normalized(4, 1e-3),
        zero_q in 0usize..4,
        zero_p in 0usize..4,
    ) {
        let mut q = base.clone();
        q[zero_q] = 0.0;
        let qs: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= qs);
        let mut p = base;
        p[zero_p] = 0.0;
        let ps: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= ps);
        let q = ProbDist::from_probs(q).unwrap();
        let p = ProbDist::from_probs(p).unwrap();
        let d = kl_divergence(&q, &p).unwrap();
        let contained = (0..4).all(|i| q.probs()[i] == 0.0 || p.probs()[i] > 0.0);
        prop_assert_eq!(d.is_finite(), contained);
    }

    #[test]
    fn tv_weight_is_one_exactly_for_classical((weights, _, _) in signed_measure_with_map()) {
        let lam = SignedMeasure::from_weights(weights).unwrap();
        let w = total_variation_weight(&lam);
        prop_assert!(w >= 1.0 - 1e-12);
        if lam.is_classical() {
            prop_assert!((w - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(w > 1.0);
        }
    }

    /// Cancelling the doubled simulation measure reproduces the classical
    /// image of the signed measure, for every compatible pair.
    #[test]
    fn simulation_reproduces_classical_image((weights, assignments, n_obs) in signed_measure_with_map()) {
        let lam = SignedMeasure::from_weights(weights).unwrap();
        let labels = (0..n_obs).map(|i| format!("o{i}")).collect();
        let chi = OutcomeMap::new(assignments, labels).unwrap();
        let mu = classical_pushforward(&lam, &chi).unwrap();
        let sim = double(&lam);
        let image = signed_pushforward(&sim.as_dist(), &chi).unwrap();
        prop_assert!(l1_distance(&image.dist, &mu).unwrap() < 1e-12);
    }

    /// The column-stochastic part of any signed channel contracts KL.
    #[test]
    fn channel_plus_part_contracts_kl(
        (weights, assignments, _) in signed_measure_with_map(),
        seed_q in proptest::array::uniform8(1e-3f64..1.0),
        seed_p in proptest::array::uniform8(1e-3f64..1.0),
    ) {
        let lam = SignedMeasure::from_weights(weights).unwrap();
        let m = lam.len();
        let labels = (0..m).map(|i| format!("o{i}")).collect();
        let chi = OutcomeMap::new(assignments, labels).unwrap();
        let channel = build_channel(&lam, &chi).unwrap();

        let mut q: Vec<f64> = seed_q.iter().cycle().take(m).copied().collect();
        let mut p: Vec<f64> = seed_p.iter().cycle().take(m).copied().collect();
        let qs: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= qs);
        let ps: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= ps);

        let d_fine: f64 = q
            .iter()
            .zip(&p)
            .filter(|(&qi, _)| qi > 0.0)
            .map(|(&qi, &pi)| qi * (qi / pi).ln())
            .sum();
        let tq = channel.apply_plus(&q);
        let tp = channel.apply_plus(&p);
        let d_coarse: f64 = tq
            .iter()
            .zip(&tp)
            .filter(|(&qi, _)| qi > 0.0)
            .map(|(&qi, &pi)| qi * (qi / pi).ln())
            .sum();
        prop_assert!(d_coarse <= d_fine + 1e-12, "{d_coarse} > {d_fine}");
    }

    #[test]
    fn consistent_states_partition_every_context(
        meas_a in 1usize..3,
        meas_b in 1usize..3,
        outcomes in 2usize..4,
    ) {
        let scenario = MeasurementScenario::new(
            vec!["P".into(), "Q".into()],
            vec![
                (0..meas_a).map(|i| format!("x{i}")).collect(),
                (0..meas_b).map(|i| format!("y{i}")).collect(),
            ],
            (0..outcomes).map(|i| format!("{i}")).collect(),
        )
        .unwrap();
        let space = canonical_phase_space(&scenario).unwrap();
        for ctx in scenario.contexts() {
            let mut seen = vec![0usize; space.len()];
            for jo in scenario.joint_outcomes() {
                for j in states_consistent_with(&space, &ctx, &jo) {
                    seen[j] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn quadratic_form_routes_agree(
        p in normalized(5, 5e-2),
        bump in prop::collection::vec(-0.02f64..0.02, 5),
    ) {
        let mut q: Vec<f64> = p.iter().zip(&bump).map(|(&x, &b)| (x + b).max(1e-4)).collect();
        let qs: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= qs);
        let p = ProbDist::from_probs(p).unwrap();
        let q = ProbDist::from_probs(q).unwrap();
        let a = small_deviation_form(&q, &p).unwrap();
        let b = chi_square_form(&q, &p).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Minimal total variation weight is one exactly when a non-negative
    /// realization exists; classical models built by pushing forward a
    /// non-negative phase-space measure always have one.
    #[test]
    fn classical_models_realize_without_negativity(raw in normalized(16, 1e-3)) {
        let scenario = MeasurementScenario::bell();
        let space = canonical_phase_space(&scenario).unwrap();
        let lam = SignedMeasure::new(space.state_labels(), raw).unwrap();
        let model = induced_model(&scenario, &lam).unwrap();
        let real = realize_minimal(&model).unwrap();
        prop_assert!((real.total_weight - 1.0).abs() < 1e-7, "weight {}", real.total_weight);
        prop_assert!(nonnegative_realization_exists(&model).unwrap());
    }
}
