use meandim_core::harness::random_system;
use meandim_core::nerve::{
    build_cover_for_scale, cover_objective, widim_chain, widim_upper, CoverStrategy, NerveComplex, WidimVariant,
};
use meandim_core::{FiniteSystem, Potential};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (FiniteSystem, Potential)> {
    (2usize..9, any::<u64>()).prop_flat_map(|(n, seed)| {
        (Just(random_system(n, seed).unwrap()), prop::collection::vec(-1.0f64..1.0, n))
            .prop_map(|(s, v)| (s, Potential::new(v, "p").unwrap()))
    })
}

/// A random cover: each point joins a few of `k` sets, then empty sets are dropped.
fn cover(n: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..7).prop_flat_map(move |k| {
        prop::collection::vec(1u32..(1 << k), n).prop_map(move |masks| {
            (0..k)
                .map(|s| (0..n).filter(|&x| masks[x] >> s & 1 == 1).collect::<Vec<_>>())
                .filter(|set| !set.is_empty())
                .collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn small_local_dimension_is_at_most_local_dimension(sets in (1usize..10).prop_flat_map(cover)) {
        let n = sets.iter().flatten().max().unwrap() + 1;
        let nerve = NerveComplex::new(&sets, n).unwrap();
        for x in 0..n {
            prop_assert!(nerve.small_local_dim(x) <= nerve.local_dim(x));
        }
    }

    #[test]
    fn simplexes_are_exactly_the_witnessed_subfamilies(sets in (1usize..10).prop_flat_map(cover)) {
        let n = sets.iter().flatten().max().unwrap() + 1;
        let nerve = NerveComplex::new(&sets, n).unwrap();
        let simplexes = nerve.simplexes(1 << 12).unwrap();
        for mask in 1u32..(1 << sets.len()) {
            let sub: Vec<usize> = (0..sets.len()).filter(|&k| mask >> k & 1 == 1).collect();
            let witnessed = (0..n).any(|x| sub.iter().all(|&k| sets[k].contains(&x)));
            prop_assert_eq!(simplexes.contains(&sub), witnessed);
            if witnessed {
                let w = nerve.witness(&sub).unwrap();
                prop_assert!(sub.iter().all(|&k| sets[k].contains(&w)));
            }
        }
    }

    #[test]
    fn lemma_chain_holds((sys, phi) in instance(), eps in 0.05f64..1.5) {
        let c = widim_chain(sys.dist(), &phi, eps, 12).unwrap();
        prop_assert!(c.holds && c.holds_per_cover);
    }

    #[test]
    fn enlarged_family_never_does_worse((sys, phi) in instance(), eps in 0.05f64..1.5) {
        for variant in [WidimVariant::Small, WidimVariant::Standard] {
            let best = widim_upper(sys.dist(), &phi, eps, variant, 12).unwrap().value;
            for strategy in [CoverStrategy::Cliques, CoverStrategy::Balls] {
                let base = build_cover_for_scale(sys.dist(), eps, strategy).unwrap();
                prop_assert!(best <= cover_objective(&base, &phi, variant).unwrap());
            }
        }
    }
}
