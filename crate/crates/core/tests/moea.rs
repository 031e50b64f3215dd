mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tndp_core::evaluation::{EvalContext, Evaluator, ObjectiveVector};
use tndp_core::moea::{
    crossover, crowding_distance, dominates, hypervolume, is_feasible, mutate, nondominated_sort,
    random_genome, run_classic_ga, run_nsga2, GaConfig, ParetoArchive,
};
use tndp_core::network::{BusNetwork, RouteId};
use tndp_core::Error;

fn cfg(pop: usize, iters: usize, min: usize, max: usize, seed: u64) -> GaConfig {
    GaConfig {
        population_size: pop,
        iterations: iters,
        mutation_prob: 0.3,
        crossover_prob: 0.8,
        min_routes: min,
        max_routes: max,
        seed,
    }
}

/// Non-dominated genomes by pairwise comparison over an explicit list.
fn brute_front(scored: &[(BusNetwork, ObjectiveVector)]) -> BTreeSet<BusNetwork> {
    scored
        .iter()
        .filter(|(_, a)| !scored.iter().any(|(_, b)| dominates(&b.to_array(), &a.to_array())))
        .map(|(g, _)| g.clone())
        .collect()
}

fn archive_set(archive: &ParetoArchive) -> BTreeSet<BusNetwork> {
    archive.members().iter().map(|m| m.genome.clone()).collect()
}

#[test]
fn dominance_examples() {
    assert!(dominates(&[1.0, 2.0], &[2.0, 3.0]));
    assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
    assert!(!dominates(&[1.0, 3.0], &[2.0, 1.0]));
    assert!(!dominates(&[2.0, 1.0], &[1.0, 3.0]));
    assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
}

fn small_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..4).prop_map(f64::from), 4)
}

proptest! {
    #[test]
    fn dominance_is_a_strict_partial_order(a in small_vec(), b in small_vec(), c in small_vec()) {
        prop_assert!(!dominates(&a, &a));
        prop_assert!(!(dominates(&a, &b) && dominates(&b, &a)));
        if dominates(&a, &b) && dominates(&b, &c) {
            prop_assert!(dominates(&a, &c));
        }
    }

    #[test]
    fn first_front_is_the_nondominated_set(points in prop::collection::vec(prop::array::uniform4((0u8..5).prop_map(f64::from)), 1..40)) {
        let fronts = nondominated_sort(&points);
        prop_assert_eq!(&fronts[0], &brute_fronts(&points)[0]);
        let total: usize = fronts.iter().map(Vec::len).sum();
        prop_assert_eq!(total, points.len());
    }
}

#[test]
fn sort_examples() {
    let pts = [[1.0, 1.0], [1.0, 2.0], [2.0, 2.0]];
    assert_eq!(nondominated_sort(&pts), vec![vec![0], vec![1], vec![2]]);
    let same = [[3.0; 4]; 5];
    assert_eq!(nondominated_sort(&same), vec![vec![0, 1, 2, 3, 4]]);
}

#[test]
fn sort_and_crowding_match_oracles_on_random_populations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..200 {
        // coarse values in half the rounds to force ties
        let coarse = round % 2 == 0;
        let points: Vec<[f64; 4]> = (0..50)
            .map(|_| {
                std::array::from_fn(|_| {
                    if coarse {
                        rng.gen_range(0..6) as f64
                    } else {
                        rng.gen::<f64>()
                    }
                })
            })
            .collect();
        let fronts = nondominated_sort(&points);
        let mut want = brute_fronts(&points);
        want.iter_mut().for_each(|f| f.sort_unstable());
        assert_eq!(fronts, want, "round {round}");
        for front in &fronts {
            let pts: Vec<[f64; 4]> = front.iter().map(|&i| points[i]).collect();
            let got = crowding_distance(&pts);
            let oracle = brute_crowding(&pts);
            for (g, o) in got.iter().zip(&oracle) {
                assert!(g == o || (g - o).abs() <= 1e-9, "round {round}: {g} vs {o}");
            }
        }
    }
}

#[test]
fn crowding_examples() {
    let d = crowding_distance(&[[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]]);
    assert!(d[0].is_infinite() && d[2].is_infinite());
    assert!((d[1] - 2.0).abs() < 1e-12);
    assert!(crowding_distance(&[[1.0, 2.0], [2.0, 1.0]]).iter().all(|x| x.is_infinite()));
    let flat = crowding_distance(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]);
    assert_eq!(flat[1], 1.0);
}

#[test]
fn crossover_of_disjoint_parents_partitions_the_union() {
    let ctx = lines_city(1, 4);
    let ids = ctx.pool.mutable_ids();
    let a = BusNetwork::new(ids[..4].iter().copied());
    let b = BusNetwork::new(ids[4..].iter().copied());
    let c = GaConfig {
        crossover_prob: 1.0,
        ..cfg(10, 1, 2, 8, 0)
    };
    let union: BTreeSet<RouteId> = ids.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let (c1, c2) = crossover(&a, &b, &ctx.pool, &c, &mut rng);
        for child in [&c1, &c2] {
            assert!((2..=8).contains(&child.len()));
            assert!(child.routes().is_subset(&union));
        }
        let joined: BTreeSet<RouteId> = c1.routes().union(c2.routes()).copied().collect();
        assert_eq!(joined, union);
        assert!(c1.routes().is_disjoint(c2.routes()));
    }
}

#[test]
fn crossover_clamps_to_bounds() {
    let ctx = lines_city(1, 4);
    let ids = ctx.pool.mutable_ids();
    let a = BusNetwork::new(ids[..4].iter().copied());
    let b = BusNetwork::new(ids[4..].iter().copied());
    let c = GaConfig {
        crossover_prob: 1.0,
        ..cfg(10, 1, 5, 6, 0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (c1, c2) = crossover(&a, &b, &ctx.pool, &c, &mut rng);
        assert!(is_feasible(&c1, &ctx.pool, &c) && is_feasible(&c2, &ctx.pool, &c));
    }
}

#[test]
fn mutation_respects_bounds() {
    let ctx = lines_city(2, 4);
    let c = GaConfig {
        mutation_prob: 1.0,
        ..cfg(10, 1, 2, 4, 0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut g = random_genome(&ctx.pool, &c, &mut rng);
    for _ in 0..500 {
        g = mutate(&g, &ctx.pool, &c, &mut rng);
        assert!(is_feasible(&g, &ctx.pool, &c), "{:?}", g.routes());
    }
}

fn exhaustive(ctx: &EvalContext, lo: usize, hi: usize) -> Vec<(BusNetwork, ObjectiveVector)> {
    all_genomes(ctx.pool.mutable_ids(), lo, hi)
        .into_iter()
        .map(|g| {
            let o = ctx.evaluate(&g);
            (g, o)
        })
        .collect()
}

#[test]
fn two_route_pool_archive_is_exact() {
    let ctx = lines_city(4, 1);
    let all = exhaustive(&ctx, 1, 2);
    assert_eq!(all.len(), 3);
    let out = run_nsga2(&cfg(6, 10, 1, 2, 0), &ctx.pool, &ctx).unwrap();
    assert_eq!(archive_set(&out.archive), brute_front(&all));
    assert_eq!(out.constraint_violations, 0);
}

#[test]
fn six_route_pool_archive_is_exact() {
    for seed in 1..=3 {
        let ctx = lines_city(10 + seed, 3);
        let all = exhaustive(&ctx, 1, 3);
        assert_eq!(all.len(), 41);
        let out = run_nsga2(&cfg(40, 60, 1, 3, seed), &ctx.pool, &ctx).unwrap();
        assert_eq!(archive_set(&out.archive), brute_front(&all), "seed {seed}");
        assert!(out.archive.is_consistent());
        assert!(out.evaluations <= 41);
        assert_eq!(out.constraint_violations, 0);
    }
}

#[test]
fn zero_iterations_keep_the_initial_front() {
    let ctx = lines_city(5, 4);
    let out = run_nsga2(&cfg(12, 0, 1, 5, 9), &ctx.pool, &ctx).unwrap();
    assert_eq!(archive_set(&out.archive), brute_front(&out.initial_population));
    assert_eq!(out.history.len(), 1);
}

#[test]
fn archive_hypervolume_grows_from_initial_population() {
    let ctx = small_city(6, 64, 24, 4, Default::default());
    let n = ctx.pool.mutable_ids().len();
    let out = run_nsga2(&cfg(16, 15, 1, n, 6), &ctx.pool, &ctx).unwrap();
    let initial: Vec<[f64; 4]> = out.initial_population.iter().map(|(_, o)| o.to_array()).collect();
    let mut reference = [0.0f64; 4];
    for p in &initial {
        for k in 0..4 {
            reference[k] = reference[k].max(p[k]);
        }
    }
    reference.iter_mut().for_each(|r| *r = *r * 1.1 + 1e-6);
    let archived: Vec<[f64; 4]> = out.archive.members().iter().map(|m| m.objectives.to_array()).collect();
    let before = hypervolume(&initial, &reference);
    let after = hypervolume(&archived, &reference);
    assert!(before > 0.0);
    assert!(after >= before, "{after} < {before}");
}

#[test]
fn nsga2_is_deterministic() {
    let ctx = lines_city(7, 4);
    let a = run_nsga2(&cfg(10, 8, 1, 6, 3), &ctx.pool, &ctx).unwrap();
    let b = run_nsga2(&cfg(10, 8, 1, 6, 3), &ctx.pool, &ctx).unwrap();
    assert_eq!(a.archive.members(), b.archive.members());
    assert_eq!(a.history, b.history);
}

#[test]
fn impossible_bounds_fail_at_startup() {
    let ctx = lines_city(1, 2);
    let err = run_nsga2(&cfg(10, 1, 5, 6, 0), &ctx.pool, &ctx).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)), "{err}");
    let bad = GaConfig {
        mutation_prob: 1.5,
        ..cfg(10, 1, 1, 2, 0)
    };
    assert!(matches!(run_nsga2(&bad, &ctx.pool, &ctx), Err(Error::Config(_))));
}

#[test]
fn constant_scalarizer_gives_flat_history() {
    let ctx = lines_city(3, 3);
    let out = run_classic_ga(&cfg(8, 6, 1, 3, 0), &ctx.pool, &ctx, &|_: &ObjectiveVector| 7.0).unwrap();
    assert!(out.history.iter().all(|h| h.best == 7.0 && h.mean == 7.0));
    assert_eq!(out.best_score, 7.0);
}

#[test]
fn length_only_search_finds_the_shortest_network() {
    let ctx = lines_city(9, 1);
    let tl = |o: &ObjectiveVector| o.tl;
    let all = exhaustive(&ctx, 1, 2);
    let best = all.iter().map(|(_, o)| o.tl).fold(f64::INFINITY, f64::min);
    let out = run_classic_ga(&cfg(6, 10, 1, 2, 2), &ctx.pool, &ctx, &tl).unwrap();
    assert_eq!(out.best_score, best);

    let ctx = lines_city(9, 3);
    let all = exhaustive(&ctx, 1, 3);
    let best = all.iter().map(|(_, o)| o.tl).fold(f64::INFINITY, f64::min);
    let out = run_classic_ga(&cfg(10, 30, 1, 3, 2), &ctx.pool, &ctx, &tl).unwrap();
    assert_eq!(out.best_score, best);
}

#[test]
fn classic_ga_is_elitist_and_repeatable() {
    let ctx = small_city(8, 64, 24, 4, Default::default());
    let n = ctx.pool.mutable_ids().len();
    let score = |o: &ObjectiveVector| o.tl / 1000.0 + 10.0 * o.ud + o.ant;
    let a = run_classic_ga(&cfg(10, 12, 1, n, 4), &ctx.pool, &ctx, &score).unwrap();
    let b = run_classic_ga(&cfg(10, 12, 1, n, 4), &ctx.pool, &ctx, &score).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.best, b.best);
    for w in a.history.windows(2) {
        assert!(w[1].best <= w[0].best);
    }
    assert_eq!(a.best_score, a.history.last().unwrap().best);
    assert_eq!(a.constraint_violations, 0);
    assert!(is_feasible(&a.best, &ctx.pool, &cfg(10, 12, 1, n, 4)));
}
