use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use super::GaConfig;
use crate::network::{BusNetwork, RouteId};
use crate::routegen::RoutePool;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    Swap,
    Insert,
    Delete,
}

/// Route-count bounds hold, every route is a selectable pool route and
/// satisfies the pool's length bounds.
pub fn is_feasible(genome: &BusNetwork, pool: &RoutePool, cfg: &GaConfig) -> bool {
    let n = genome.len();
    n >= cfg.min_routes
        && n <= cfg.max_routes
        && genome.routes().iter().all(|&id| {
            pool.get(id)
                .is_some_and(|r| !r.kind.is_fixed() && pool.bounds().admits(r.length_m))
        })
}

/// A randomly sized network with routes drawn uniformly from the pool.
pub fn random_genome<R: Rng>(pool: &RoutePool, cfg: &GaConfig, rng: &mut R) -> BusNetwork {
    let ids = pool.mutable_ids();
    let hi = cfg.max_routes.min(ids.len());
    let lo = cfg.min_routes.min(hi);
    let size = rng.gen_range(lo..=hi);
    ids.choose_multiple(rng, size).copied().collect()
}

fn non_member<R: Rng>(genome: &BusNetwork, pool: &RoutePool, rng: &mut R) -> Option<RouteId> {
    pool.mutable_ids()
        .iter()
        .filter(|id| !genome.contains(**id))
        .choose(rng)
        .copied()
}

/// With probability `mutation_prob`, applies one of swap / insert / delete
/// drawn uniformly among the actions that keep the genome feasible.
pub fn mutate<R: Rng>(genome: &BusNetwork, pool: &RoutePool, cfg: &GaConfig, rng: &mut R) -> BusNetwork {
    let mut child = genome.clone();
    if !rng.gen_bool(cfg.mutation_prob) {
        return child;
    }
    let spare = pool.mutable_ids().len() > genome.len();
    let mut actions = Vec::with_capacity(3);
    if spare && !genome.is_empty() {
        actions.push(MutationKind::Swap);
    }
    if spare && genome.len() < cfg.max_routes {
        actions.push(MutationKind::Insert);
    }
    if genome.len() > cfg.min_routes {
        actions.push(MutationKind::Delete);
    }
    let Some(&action) = actions.choose(rng) else {
        return child;
    };
    match action {
        MutationKind::Swap => {
            let out = *genome.routes().iter().choose(rng).expect("non-empty genome");
            let incoming = non_member(genome, pool, rng).expect("spare pool route");
            child.remove(out);
            child.insert(incoming);
        }
        MutationKind::Insert => {
            let incoming = non_member(genome, pool, rng).expect("spare pool route");
            child.insert(incoming);
        }
        MutationKind::Delete => {
            let out = *genome.routes().iter().choose(rng).expect("non-empty genome");
            child.remove(out);
        }
    }
    child
}

/// Uniform route exchange. Routes shared by both parents go to both
/// children; the remaining routes of either parent are shuffled and dealt
/// alternately. Children are then clamped to the route-count bounds using
/// routes of the parents only.
pub fn crossover<R: Rng>(
    a: &BusNetwork,
    b: &BusNetwork,
    pool: &RoutePool,
    cfg: &GaConfig,
    rng: &mut R,
) -> (BusNetwork, BusNetwork) {
    if !rng.gen_bool(cfg.crossover_prob) || a == b {
        return (a.clone(), b.clone());
    }
    let shared: Vec<RouteId> = a.routes().intersection(b.routes()).copied().collect();
    let mut exclusive: Vec<RouteId> = a.routes().symmetric_difference(b.routes()).copied().collect();
    exclusive.shuffle(rng);
    let mut children = [BusNetwork::new(shared.clone()), BusNetwork::new(shared)];
    for (i, id) in exclusive.iter().enumerate() {
        children[i % 2].insert(*id);
    }
    for child in &mut children {
        while child.len() < cfg.min_routes {
            let Some(&id) = exclusive.iter().filter(|id| !child.contains(**id)).choose(rng) else {
                break;
            };
            child.insert(id);
        }
        drop_longest(child, pool, cfg.max_routes);
    }
    let [c1, c2] = children;
    (c1, c2)
}

fn drop_longest(genome: &mut BusNetwork, pool: &RoutePool, max_routes: usize) {
    if genome.len() <= max_routes {
        return;
    }
    let mut by_length = genome.route_ids();
    by_length.sort_by(|x, y| pool.length_of(*y).total_cmp(&pool.length_of(*x)).then(y.cmp(x)));
    for id in by_length.into_iter().take(genome.len() - max_routes) {
        genome.remove(id);
    }
}

/// Makes an arbitrary genome feasible: unknown, fixed or out-of-bounds
/// routes are removed, the longest routes dropped while above the maximum
/// count, and random pool routes inserted while below the minimum.
pub fn repair<R: Rng>(genome: &BusNetwork, pool: &RoutePool, cfg: &GaConfig, rng: &mut R) -> BusNetwork {
    let mut fixed: BusNetwork = genome
        .routes()
        .iter()
        .copied()
        .filter(|&id| {
            pool.get(id)
                .is_some_and(|r| !r.kind.is_fixed() && pool.bounds().admits(r.length_m))
        })
        .collect();
    drop_longest(&mut fixed, pool, cfg.max_routes);
    while fixed.len() < cfg.min_routes {
        let Some(id) = non_member(&fixed, pool, rng) else {
            break;
        };
        fixed.insert(id);
    }
    fixed
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::network::{NodeId, RoadEdge, RoadGraph, RoadNode, Route, RouteKind};
    use crate::routegen::LengthBounds;

    pub(crate) fn line_pool(n_routes: u32) -> RoutePool {
        let nodes = (0..=n_routes)
            .map(|i| RoadNode {
                id: NodeId(i),
                lat: 38.7,
                lon: -9.2 + i as f64 * 0.01,
                is_stop: true,
            })
            .collect();
        let edges = (0..n_routes)
            .map(|i| RoadEdge {
                from: NodeId(i),
                to: NodeId(i + 1),
                length_m: 1000.0 + 100.0 * i as f64,
                time_s: 200.0,
            })
            .collect();
        let road = RoadGraph::new(nodes, edges).unwrap();
        let routes = (0..n_routes)
            .map(|i| {
                Route::new(RouteId(i), RouteKind::Original, vec![NodeId(i), NodeId(i + 1)], &road)
                    .unwrap()
            })
            .collect();
        RoutePool::new(routes, LengthBounds::default()).unwrap().0
    }

    fn cfg(min: usize, max: usize) -> GaConfig {
        GaConfig {
            population_size: 10,
            iterations: 1,
            mutation_prob: 1.0,
            crossover_prob: 1.0,
            min_routes: min,
            max_routes: max,
            seed: 1,
        }
    }

    #[test]
    fn delete_never_breaks_minimum() {
        let pool = line_pool(3);
        let c = cfg(3, 3);
        let g = BusNetwork::new([RouteId(0), RouteId(1), RouteId(2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let child = mutate(&g, &pool, &c, &mut rng);
            assert_eq!(child, g);
        }
        let c = cfg(2, 3);
        for _ in 0..100 {
            let child = mutate(&g, &pool, &c, &mut rng);
            assert!(child.len() >= 2 && is_feasible(&child, &pool, &c));
        }
    }

    #[test]
    fn swap_keeps_count() {
        let pool = line_pool(8);
        let c = cfg(3, 3);
        let g = BusNetwork::new([RouteId(0), RouteId(1), RouteId(2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let child = mutate(&g, &pool, &c, &mut rng);
            assert_eq!(child.len(), 3);
            assert_eq!(child.routes().difference(g.routes()).count(), 1);
        }
    }

    #[test]
    fn mutation_is_deterministic_per_seed() {
        let pool = line_pool(8);
        let c = cfg(2, 6);
        let g = BusNetwork::new([RouteId(0), RouteId(4), RouteId(5)]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| mutate(&g, &pool, &c, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(4), run(4));
    }

    #[test]
    fn identical_parents_reproduce() {
        let pool = line_pool(8);
        let a = BusNetwork::new([RouteId(1), RouteId(3)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c1, c2) = crossover(&a, &a, &pool, &cfg(1, 5), &mut rng);
        assert_eq!((c1, c2), (a.clone(), a));
    }

    #[test]
    fn zero_crossover_probability_copies() {
        let pool = line_pool(8);
        let a = BusNetwork::new([RouteId(1), RouteId(3)]);
        let b = BusNetwork::new([RouteId(2), RouteId(4)]);
        let mut c = cfg(1, 5);
        c.crossover_prob = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(crossover(&a, &b, &pool, &c, &mut rng), (a, b));
    }

    #[test]
    fn repair_drops_longest_first() {
        let pool = line_pool(6);
        let c = cfg(1, 2);
        let g = BusNetwork::new([RouteId(0), RouteId(4), RouteId(5), RouteId(99)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let fixed = repair(&g, &pool, &c, &mut rng);
        assert_eq!(fixed, BusNetwork::new([RouteId(0), RouteId(4)]));
    }
}
