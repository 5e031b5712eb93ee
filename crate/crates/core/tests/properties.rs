use std::collections::HashMap;

use num_traits::{FromPrimitive, Zero};
use proptest::prelude::*;
use rwrs_core::graph::{run_walk, Graph, VertexId};
use rwrs_core::local_time::build_ledger;
use rwrs_core::regeneration::{detect_regenerations, epochs_disjoint};
use rwrs_core::scenery::{keyed_value, SceneryAssignment, SceneryDistribution};
use rwrs_core::stats::{
    compute_summary, decompose_lattice, decompose_tree, time_ordered_sum, SceneryCut,
};
use rwrs_core::Exact;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (2usize..6).prop_map(|d| Graph::Tree { d }),
        (3usize..6).prop_map(|d| Graph::Lattice { d }),
    ]
}

fn dist_strategy() -> impl Strategy<Value = SceneryDistribution> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|sigma| SceneryDistribution::Gaussian { sigma }),
        Just(SceneryDistribution::Rademacher),
        (4.5f64..9.0).prop_map(|alpha| SceneryDistribution::SymmetricPareto { alpha }),
        (0.1f64..3.0).prop_map(|a| SceneryDistribution::UniformCentered { a }),
    ]
}

fn brute_counts(graph: Graph, n: usize, seed: u64) -> HashMap<VertexId, u64> {
    let mut m = HashMap::new();
    for v in run_walk(graph, n, seed).unwrap().vertices() {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_shape(graph in graph_strategy(), n in 1usize..400, seed in any::<u64>()) {
        let t = run_walk(graph, n, seed).unwrap();
        let vs: Vec<VertexId> = t.vertices().collect();
        prop_assert_eq!(vs.len(), n + 1);
        prop_assert_eq!(&vs[0], &graph.origin());
        for w in vs.windows(2) {
            prop_assert!(graph.neighbors(&w[0]).unwrap().contains(&w[1]));
        }
        if graph.is_tree() {
            let levels = t.levels();
            prop_assert_eq!(levels[1], 1);
            for (k, (&l, v)) in levels.iter().zip(&vs).enumerate() {
                prop_assert_eq!(l as usize % 2, k % 2);
                prop_assert_eq!(Some(l as usize), v.level());
            }
        }
        prop_assert_eq!(run_walk(graph, n, seed).unwrap(), t);
    }

    #[test]
    fn ledger_matches_brute_force(graph in graph_strategy(), n in 1usize..600, seed in any::<u64>()) {
        let l = build_ledger(&run_walk(graph, n, seed).unwrap());
        let brute = brute_counts(graph, n, seed);
        prop_assert_eq!(brute.values().sum::<u64>(), n as u64 + 1);
        prop_assert_eq!(l.visits(), n as u64 + 1);
        prop_assert_eq!(l.range(), brute.len() as u64);
        prop_assert_eq!(l.silt2(), brute.values().map(|c| c * c).sum::<u64>());
        prop_assert_eq!(l.silt3(), brute.values().map(|&c| (c as u128).pow(3)).sum::<u128>());
        prop_assert_eq!(l.max_local_time(), *brute.values().max().unwrap());
        prop_assert!(l.silt2() > n as u64 && l.silt3() > n as u128);
        for (v, &c) in &brute {
            prop_assert_eq!(l.local_time(v), c);
        }
        let t = 1 + seed % 4;
        prop_assert_eq!(l.level_set_size(t), brute.values().filter(|&&c| c > t).count() as u64);
    }

    #[test]
    fn time_ordered_equals_aggregated(
        graph in graph_strategy(), dist in dist_strategy(), n in 1usize..500, seed in any::<u64>()
    ) {
        let trace = run_walk(graph, n, seed).unwrap();
        let l = build_ledger(&trace);
        let s: SceneryAssignment<f64> = SceneryAssignment::sample(&dist, &l, seed ^ 1);
        let agg = compute_summary(&l, &s).unwrap();
        let ordered = time_ordered_sum(&trace, |v| keyed_value(&dist, v.key(), seed ^ 1));
        prop_assert!((agg.t - ordered).abs() <= 1e-12 * agg.t.abs().max(ordered.abs()).max(1.0));
        // exact arithmetic: the identity holds with equality
        let ex = s.map(|&x| Exact::from_f64(x).unwrap());
        let agg_ex = compute_summary(&l, &ex).unwrap();
        let ordered_ex = time_ordered_sum(&trace, |v| {
            Exact::from_f64(keyed_value(&dist, v.key(), seed ^ 1)).unwrap()
        });
        prop_assert_eq!(agg_ex.t, ordered_ex);
    }

    #[test]
    fn decomposition_is_exact(
        n in 3usize..500, seed in any::<u64>(), y in 0.5f64..5.0, two_sided in any::<bool>(), d in 3usize..6
    ) {
        let cut = if two_sided { SceneryCut::TwoSided } else { SceneryCut::OneSided };
        let dist = SceneryDistribution::Gaussian { sigma: 2.0 };
        for graph in [Graph::Tree { d }, Graph::Lattice { d }] {
            let l = build_ledger(&run_walk(graph, n, seed).unwrap());
            let s = SceneryAssignment::<f64>::sample(&dist, &l, seed).map(|&x| Exact::from_f64(x).unwrap());
            let sum = compute_summary(&l, &s).unwrap();
            let dec = match graph {
                Graph::Tree { d } => decompose_tree(&l, &s, y, rwrs_core::regeneration::lambda_d(d).unwrap(), cut),
                Graph::Lattice { d } => decompose_lattice(&l, &s, y, d, cut),
            }.unwrap();
            prop_assert_eq!(dec.total_t(), sum.t.clone());
            prop_assert_eq!(dec.total_v2(), sum.v2.clone());
            prop_assert_eq!(dec.populations.iter().sum::<u64>(), l.range());
            prop_assert_eq!(dec.masses.iter().sum::<u64>(), l.visits());
            // T_i^2 <= (sum of l over the cell) * V_i^2
            for i in 0..3 {
                let t2 = dec.parts_t[i].clone() * dec.parts_t[i].clone();
                let bound = Exact::from_u64(dec.masses[i]).unwrap() * dec.parts_v2[i].clone();
                prop_assert!(t2 <= bound);
            }
        }
    }

    #[test]
    fn sign_and_scale(graph in graph_strategy(), dist in dist_strategy(), n in 1usize..400, seed in any::<u64>()) {
        let l = build_ledger(&run_walk(graph, n, seed).unwrap());
        let s: SceneryAssignment<f64> = SceneryAssignment::sample(&dist, &l, seed);
        let base = compute_summary(&l, &s).unwrap();
        let w = base.w.unwrap();
        prop_assert!(w.abs() <= ((n + 1) as f64).sqrt() * (1.0 + 1e-12));
        for c in [1e-6, 1.0, 1e6] {
            let ws = compute_summary(&l, &s.scaled(c)).unwrap().w.unwrap();
            prop_assert!((ws - w).abs() <= 1e-10 * w.abs().max(1e-300));
        }
        let neg = compute_summary(&l, &s.negated()).unwrap();
        prop_assert_eq!(neg.w.unwrap(), -w);
        prop_assert_eq!(neg.v2, base.v2);
        // exactly invariant in rational arithmetic
        let ex = s.map(|&x| Exact::from_f64(x).unwrap());
        let w2 = compute_summary(&l, &ex).unwrap().signed_w_squared().unwrap();
        let c = Exact::new(7.into(), 3.into());
        prop_assert_eq!(compute_summary(&l, &ex.scaled(c)).unwrap().signed_w_squared().unwrap(), w2.clone());
        prop_assert_eq!(compute_summary(&l, &ex.negated()).unwrap().signed_w_squared().unwrap(), -w2);
    }

    #[test]
    fn negation_keeps_local_time_cells(n in 3usize..400, seed in any::<u64>(), d in 3usize..6) {
        let l = build_ledger(&run_walk(Graph::Tree { d }, n, seed).unwrap());
        let s: SceneryAssignment<f64> = SceneryAssignment::sample(&SceneryDistribution::Rademacher, &l, seed);
        let lam = rwrs_core::regeneration::lambda_d(d).unwrap();
        let a = decompose_tree(&l, &s, 2.0, lam, SceneryCut::OneSided).unwrap();
        let b = decompose_tree(&l, &s.negated(), 2.0, lam, SceneryCut::OneSided).unwrap();
        prop_assert_eq!(a.populations[2], b.populations[2]);
        prop_assert_eq!(a.populations[0] + a.populations[1], b.populations[0] + b.populations[1]);
        prop_assert_eq!(b.parts_t[2], -a.parts_t[2]);
    }

    #[test]
    fn regeneration_definition(n in 2usize..3000, seed in any::<u64>(), d in 2usize..9) {
        let t = run_walk(Graph::Tree { d }, n, seed).unwrap();
        let levels = t.levels();
        let r = detect_regenerations(levels).unwrap();
        let brute: Vec<usize> = (1..levels.len() - 1)
            .filter(|&k| levels[..k].iter().all(|&x| x < levels[k]) && levels[k..].iter().all(|&x| x > levels[k - 1]))
            .collect();
        prop_assert_eq!(&r.taus, &brute);
        prop_assert_eq!(r.epochs.iter().sum::<usize>(), r.taus.last().copied().unwrap_or(0));
        let (_, sites) = t.sites();
        prop_assert!(epochs_disjoint(&sites, &r));
    }

    #[test]
    fn scenery_is_pure(dist in dist_strategy(), key in any::<u64>(), seed in any::<u64>()) {
        prop_assert_eq!(keyed_value(&dist, key, seed).to_bits(), keyed_value(&dist, key, seed).to_bits());
    }

    #[test]
    fn zero_scenery_has_no_statistic(n in 1usize..200, seed in any::<u64>()) {
        let l = build_ledger(&run_walk(Graph::Tree { d: 2 }, n, seed).unwrap());
        let s = SceneryAssignment::from_values(SceneryDistribution::Rademacher, 0, vec![Exact::zero(); l.range() as usize]);
        prop_assert!(compute_summary(&l, &s).unwrap().w.is_none());
    }
}
