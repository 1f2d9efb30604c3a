//! Property tests for the simulator invariants and the counting
//! constraints.

use proptest::prelude::*;

use recsim_core::algorithm::{regret_of, run, StrategyTag};
use recsim_core::instrument::{audit, verify_constraints};
use recsim_core::model::ModelConfig;
use recsim_core::regularity::{lambda_count, SignMatrix};
use recsim_core::rng::Stream;

fn strategy() -> impl Strategy<Value = StrategyTag> {
    prop_oneof![
        Just(StrategyTag::Recsys),
        Just(StrategyTag::Random),
        Just(StrategyTag::UserUser),
        Just(StrategyTag::ItemItem),
        Just(StrategyTag::Heuristic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // No-repeat, type consistency, and determinism of every trace.
    #[test]
    fn traces_respect_model_invariants(
        n in 2usize..12,
        q_u in 1usize..5,
        q_i in 1usize..10,
        t in 1u64..30,
        seed in 0u64..1000,
        tag in strategy(),
    ) {
        let config = ModelConfig::new(n, q_u, q_i, seed);
        let out = run(config, t, tag, seed ^ 0xabcd).unwrap();
        let rerun = run(config, t, tag, seed ^ 0xabcd).unwrap();
        prop_assert_eq!(&out.trace.rows, &rerun.trace.rows);

        prop_assert_eq!(out.trace.rows.len(), n * t as usize);
        let mut world = out.world.clone();
        let mut seen = vec![std::collections::BTreeSet::new(); n];
        for row in &out.trace.rows {
            prop_assert!(seen[row.user].insert(row.item), "repeat to one user");
            let expect = world.rating(row.user, row.item).unwrap();
            prop_assert_eq!(row.rating, expect, "rating inconsistent with world");
        }

        // Regret curve is a nondecreasing prefix sum within [0, T].
        let curve = regret_of(&out.trace);
        prop_assert_eq!(curve.len(), t as usize);
        let mut prev = 0.0;
        for (idx, &v) in curve.iter().enumerate() {
            prop_assert!(v >= prev - 1e-12);
            prop_assert!(v <= (idx + 1) as f64 + 1e-12);
            prev = v;
        }
    }

    // The five counting constraints are deterministic facts about every
    // trace, for any thresholds.
    #[test]
    fn counting_constraints_hold_for_all_strategies(
        n in 2usize..12,
        q_u in 1usize..5,
        q_i in 1usize..8,
        t in 1u64..25,
        seed in 0u64..500,
        tag in strategy(),
        s_i in 0u32..4,
        s_u in 0u32..4,
    ) {
        let config = ModelConfig::new(n, q_u, q_i, seed);
        let out = run(config, t, tag, seed).unwrap();
        let stats = audit(&out.trace, &out.world, s_i, s_u).unwrap();
        let report = verify_constraints(&stats, t, n, s_i, s_u);
        prop_assert!(report.all_hold(), "{:?}", report);
        prop_assert_eq!(
            stats.first_type_lowc,
            stats.i_strong * s_i as u64 + stats.i_weak_mass
        );
        prop_assert!(stats.first_type_lowc <= stats.bad_counts[0] + stats.bad_counts[1]);
    }

    // Fixing s columns, the 2^s pattern counts partition the rows.
    #[test]
    fn lambda_counts_partition_rows(
        m in 1usize..24,
        n in 2usize..6,
        seed in 0u64..1000,
    ) {
        let mut stream = Stream::new(seed);
        let a = SignMatrix::random(m, n, &mut stream);
        let cols = [0usize, n - 1];
        let mut total = 0;
        for p0 in [-1i8, 1] {
            for p1 in [-1i8, 1] {
                total += lambda_count(&a, &cols, &[p0, p1]).unwrap();
            }
        }
        prop_assert_eq!(total, m as u64);
    }
}
