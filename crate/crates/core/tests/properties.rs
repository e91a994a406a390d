use std::sync::Arc;

use proptest::prelude::*;

use privlearn::adversaries::{build_case2_sequence, verify_diagnostics, CaseIIConfig};
use privlearn::auditors::{audit_dp, default_event_family};
use privlearn::counters::{trace, CounterSpec};
use privlearn::game::{hoeffding_halfwidth, play, GameSequence, ProbEstimate};
use privlearn::hypothesis::{
    find_distinguishing_tuple, littlestone_dimension, make_point_class, Domain, Hypothesis, HypothesisClass,
};
use privlearn::learners::LearnerConfig;

fn class_from_masks(n: usize, masks: &[u16]) -> HypothesisClass {
    let mut seen = std::collections::BTreeSet::new();
    let members: Vec<Hypothesis> = masks
        .iter()
        .map(|m| m & ((1u16 << n) - 1))
        .filter(|m| seen.insert(*m))
        .map(|m| Hypothesis::from_bits(&(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
        .collect();
    HypothesisClass::new(Domain::new(n).unwrap(), members).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_free_counter_releases_prefix_sums(bits in prop::collection::vec(any::<bool>(), 1..200), seed in any::<u64>()) {
        let rows = trace(&CounterSpec::noise_free(bits.len()), &bits, seed).unwrap();
        let mut sum = 0u64;
        for (row, &b) in rows.iter().zip(&bits) {
            sum += b as u64;
            prop_assert_eq!(row.true_prefix, sum);
            prop_assert_eq!(row.released, sum as f64);
        }
    }

    #[test]
    fn hoeffding_interval_shrinks_and_stays_in_unit_range(n in 1usize..5000, k in 0usize..5000) {
        prop_assert!(hoeffding_halfwidth(n + 1) < hoeffding_halfwidth(n));
        let e = ProbEstimate::from_counts(k.min(n), n);
        prop_assert!(e.lower() >= 0.0 && e.upper() <= 1.0 && e.contains(e.p_hat));
    }

    #[test]
    fn soa_mistakes_never_exceed_littlestone_dimension(
        n in 2usize..6,
        masks in prop::collection::vec(any::<u16>(), 1..12),
        target in any::<prop::sample::Index>(),
        points in prop::collection::vec(any::<prop::sample::Index>(), 1..24),
    ) {
        let class = Arc::new(class_from_masks(n, &masks));
        let ldim = littlestone_dimension(&class).unwrap() as usize;
        let h = class.member(target.index(class.len())).clone();
        let xs: Vec<usize> = points.iter().map(|i| i.index(n) + 1).collect();
        let seq = GameSequence::new(h, xs).unwrap();
        let fac = LearnerConfig::Soa {}.build(class, seq.horizon(), 0).unwrap();
        prop_assert!(play(fac.as_ref(), &seq, 0).unwrap().mistake_count() <= ldim);
    }

    #[test]
    fn littlestone_dimension_is_monotone_under_inclusion(
        n in 2usize..6,
        masks in prop::collection::vec(any::<u16>(), 2..12),
        cut in any::<prop::sample::Index>(),
    ) {
        let full = class_from_masks(n, &masks);
        let keep = cut.index(full.len()) + 1;
        let sub = HypothesisClass::new(full.domain(), full.members()[..keep].to_vec()).unwrap();
        prop_assert!(littlestone_dimension(&sub).unwrap() <= littlestone_dimension(&full).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn zero_learner_pays_one_mistake_per_level(horizon in 3usize..400, seed in any::<u64>()) {
        let class = Arc::new(make_point_class(3).unwrap());
        let tuple = find_distinguishing_tuple(&class).unwrap();
        let fac = LearnerConfig::Fixed { bits: "000".into() }.build(class, horizon, 0).unwrap();
        let config = CaseIIConfig { n_trials: 100, ..CaseIIConfig::default() };
        let (seq, diag) = build_case2_sequence(fac.as_ref(), &tuple, horizon, &config, seed).unwrap();
        prop_assert!(verify_diagnostics(&diag, config.delta).passed());
        // Segments nest and every inserted point lies inside its own segment.
        for w in diag.levels.windows(2) {
            prop_assert!(w[0].l <= w[1].l && w[1].r <= w[0].r);
        }
        for lv in &diag.levels {
            prop_assert!(lv.inserted.iter().all(|&t| lv.l <= t && t <= lv.r));
        }
        let m = play(fac.as_ref(), &seq, seed).unwrap().mistake_count();
        prop_assert_eq!(m, diag.levels.len());
        prop_assert_eq!(diag.levels.len(), diag.k);
        prop_assert_eq!(diag.k, ((diag.effective_horizon + 1) as f64).log2().floor() as usize);
    }

    #[test]
    fn dp_audit_is_symmetric_in_its_inputs(
        horizon in 2usize..6,
        round in any::<prop::sample::Index>(),
        alt in 2usize..4,
        seed in any::<u64>(),
    ) {
        let class = Arc::new(make_point_class(3).unwrap());
        let target = class.by_name("f1").unwrap().clone();
        let tau = GameSequence::repeated(target, 1, horizon).unwrap();
        let tau_prime = tau.with_point(round.index(horizon) + 1, alt).unwrap();
        let fac = LearnerConfig::NameAndShame { delta: 0.2 }.build(class, horizon, 0).unwrap();
        let family = default_event_family(horizon, 3);
        let a = audit_dp(fac.as_ref(), &tau, &tau_prime, &family, 0.05, 200, seed).unwrap();
        let b = audit_dp(fac.as_ref(), &tau_prime, &tau, &family, 0.05, 200, seed).unwrap();
        prop_assert_eq!(a.eps_forward, b.eps_backward);
        prop_assert_eq!(a.eps_backward, b.eps_forward);
        prop_assert_eq!(a.eps_hat, b.eps_hat);
    }
}
