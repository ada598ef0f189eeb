mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use common::checks::{dnf_case, gpl_law_case, min_dep_case, order_case, topology_case};
use common::{as_maps, corpus_dir, universe};
use plangeo_core::gpl::{complement_rel, join, Relation};
use plangeo_core::harness::{load_dir, replay_solves, ProblemRecord};
use plangeo_core::par::Exec;
use plangeo_core::point::Point;
use plangeo_core::problem::{export_hypertree, replay_hypertree, Problem};
use plangeo_core::search::{applicable, interactive_apply, search, Method, Outcome, SearchConfig, Strategy as Order};
use plangeo_core::topology::{multi_repr, reflect, rotate, rotations};
use plangeo_core::Kb;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn distinct_seq(max: usize) -> impl Strategy<Value = Vec<Point>> {
    proptest::sample::subsequence((0u8..12).collect::<Vec<_>>(), 1..=max)
        .prop_shuffle()
        .prop_map(|v| v.into_iter().map(|i| Point(b'A' + i)).collect())
}

fn corpus() -> Vec<ProblemRecord> {
    let (records, _) = load_dir(&corpus_dir()).unwrap();
    records.into_iter().map(|(_, r)| r).collect()
}

fn load(kb: &Arc<Kb>, r: &ProblemRecord) -> Problem {
    r.load(kb.clone(), Exec::Sequential).unwrap()
}

fn falling(n: usize, k: usize) -> usize {
    (n - k + 1..=n).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotating_n_times_is_identity(seq in distinct_seq(8)) {
        let mut cur = seq.clone();
        for _ in 0..seq.len() {
            cur = rotate(&cur);
        }
        prop_assert_eq!(cur, seq);
    }

    #[test]
    fn reflection_is_an_involution(seq in distinct_seq(8)) {
        prop_assert_eq!(reflect(&reflect(&seq)), seq);
    }

    #[test]
    fn representation_is_rotation_invariant(seq in distinct_seq(8), k in 0usize..8) {
        let set = multi_repr(&seq);
        prop_assert_eq!(set.len(), seq.len());
        for r in rotations(&seq) {
            prop_assert!(set.contains(&r));
        }
        let shifted = &rotations(&seq)[k % seq.len()];
        prop_assert_eq!(multi_repr(shifted), set);
    }

    #[test]
    fn complement_partitions_distinct_tuples(seed in any::<u64>(), n in 2usize..=5, k in 1usize..=3) {
        let k = k.min(n);
        let pts = universe(n);
        let vars: Vec<Point> = (0..k).map(common::letter).collect();
        let tuples = common::random_tuples(&mut rng(seed), k, &pts, 6);
        let r = Relation::from_tuples(vars, tuples);
        let c = complement_rel(&r, &pts);
        prop_assert_eq!(c.len() + r.len(), falling(n, k));
        prop_assert!(c.tuples().all(|t| r.tuples().all(|u| u != t)));
        let back = complement_rel(&c, &pts);
        prop_assert_eq!(as_maps(&back), as_maps(&r));
    }

    #[test]
    fn unit_is_the_join_identity(seed in any::<u64>()) {
        let mut g = rng(seed);
        let vars: Vec<Point> = (0..3).map(common::letter).collect();
        let r = common::random_relation(&mut g, &vars, &universe(4), 6);
        prop_assert_eq!(as_maps(&join(&Relation::unit(), &r)), as_maps(&r));
        prop_assert_eq!(as_maps(&join(&r, &Relation::unit())), as_maps(&r));
    }

    #[test]
    fn join_commutes(seed in any::<u64>()) {
        let mut g = rng(seed);
        let vars: Vec<Point> = (0..3).map(common::letter).collect();
        let pts = universe(4);
        let a = common::random_relation(&mut g, &vars, &pts, 6);
        let b = common::random_relation(&mut g, &vars, &pts, 6);
        prop_assert_eq!(as_maps(&join(&a, &b)), as_maps(&join(&b, &a)));
    }

    #[test]
    fn composition_semigroup(seed in any::<u64>()) {
        prop_assert_eq!(topology_case(&mut rng(seed)).map(|_| ()), Ok(()));
    }

    #[test]
    fn construction_order_independence(seed in any::<u64>()) {
        prop_assert_eq!(order_case(&mut rng(seed), 4), Ok(()));
    }

    #[test]
    fn relational_laws(seed in any::<u64>()) {
        prop_assert_eq!(gpl_law_case(&mut rng(seed)), Ok(()));
    }

    #[test]
    fn dnf_preserves_meaning(seed in any::<u64>()) {
        prop_assert_eq!(dnf_case(&mut rng(seed), 4), Ok(()));
    }

    #[test]
    fn min_dep_solves_like_full_elimination(seed in any::<u64>()) {
        prop_assert!(min_dep_case(&mut rng(seed)).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn store_stays_a_consistent_dag(seed in any::<u64>(), pick in any::<prop::sample::Index>(), calls in 1usize..=6) {
        let kb = Kb::bundled();
        let records = corpus();
        let problem = load(&kb, pick.get(&records));
        let mut store = problem.store.clone();
        let mut goal = problem.goal.clone();
        let mut g = rng(seed);
        for _ in 0..calls {
            let Some(call) = applicable(&store).choose(&mut g).cloned() else { break };
            interactive_apply(&mut store, &mut goal, &call, Exec::Sequential).unwrap();
        }
        for c in store.conditions() {
            prop_assert!(c.premises.iter().all(|&p| p < c.id), "condition {} cites a later premise", c.id);
        }
        prop_assert_eq!(store.fact_set().len(), store.len());
        let doc = export_hypertree(&store, &goal);
        let rebuilt = replay_hypertree(kb.clone(), &doc).unwrap();
        prop_assert_eq!(rebuilt.fact_set(), store.fact_set());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn found_solutions_replay(seed in any::<u64>(), pick in any::<prop::sample::Index>(), backward in any::<bool>()) {
        let kb = Kb::bundled();
        let records = corpus();
        let problem = load(&kb, pick.get(&records));
        let config = SearchConfig {
            method: if backward { Method::Backward } else { Method::Forward },
            strategy: Order::Rs,
            max_depth: 8,
            beam_size: 20,
            timeout: Duration::from_secs(10),
            seed,
            exec: Exec::Sequential,
        };
        let result = search(&problem, &config);
        if result.outcome == Outcome::Solved {
            prop_assert!(replay_solves(&problem, &result.theorem_seqs, Exec::Sequential));
            let names: BTreeSet<&str> = result.theorem_seqs.iter().map(|s| s.split('(').next().unwrap()).collect();
            prop_assert!(names.iter().all(|n| kb.theorem(n).is_some()));
        }
    }
}
