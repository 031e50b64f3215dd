use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nsga2::check_startup;
use super::{crossover, is_feasible, mutate, random_genome, EvalCache, GaConfig};
use crate::error::Result;
use crate::evaluation::{Evaluator, ObjectiveVector};
use crate::network::BusNetwork;
use crate::routegen::RoutePool;
use crate::weightfit::Scalarizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoGeneration {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct SoOutcome {
    pub best: BusNetwork,
    pub best_objectives: ObjectiveVector,
    pub best_score: f64,
    /// Entry 0 describes the initial population.
    pub history: Vec<SoGeneration>,
    pub constraint_violations: usize,
    pub evaluations: usize,
}

struct Scored {
    genome: BusNetwork,
    objectives: ObjectiveVector,
    score: f64,
}

fn best_index(population: &[Scored]) -> usize {
    (0..population.len())
        .min_by(|&a, &b| {
            population[a]
                .score
                .total_cmp(&population[b].score)
                .then_with(|| population[a].genome.cmp(&population[b].genome))
        })
        .expect("non-empty population")
}

fn tournament<'a, R: Rng>(population: &'a [Scored], rng: &mut R) -> &'a Scored {
    let a = &population[rng.gen_range(0..population.len())];
    let b = &population[rng.gen_range(0..population.len())];
    if b.score < a.score {
        b
    } else {
        a
    }
}

fn record(generation: usize, population: &[Scored]) -> SoGeneration {
    let best = population[best_index(population)].score;
    let mean = population.iter().map(|s| s.score).sum::<f64>() / population.len() as f64;
    SoGeneration {
        generation,
        best,
        mean,
    }
}

/// Best `n` of parents and children, distinct genomes first.
fn survivors(mut merged: Vec<Scored>, n: usize) -> Vec<Scored> {
    merged.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.genome.cmp(&b.genome)));
    let (mut kept, mut repeats) = (Vec::with_capacity(n), Vec::new());
    for s in merged {
        if kept.last().is_some_and(|k: &Scored| k.genome == s.genome) {
            repeats.push(s);
        } else {
            kept.push(s);
        }
    }
    kept.truncate(n);
    let missing = n - kept.len();
    kept.extend(repeats.into_iter().take(missing));
    kept
}

/// Genetic algorithm minimizing `scalarizer` over the objectives. Parents
/// and children compete for survival, so the per-generation best never
/// increases.
pub fn run_classic_ga<E, S>(cfg: &GaConfig, pool: &RoutePool, eval: &E, scalarizer: &S) -> Result<SoOutcome>
where
    E: Evaluator + ?Sized,
    S: Scalarizer + ?Sized,
{
    check_startup(pool, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache = EvalCache::new();
    let mut violations = 0;
    let n = cfg.population_size;
    let mut check = |g: &BusNetwork| {
        let ok = is_feasible(g, pool, cfg);
        debug_assert!(ok, "infeasible genome {:?}", g.routes());
        if !ok {
            violations += 1;
        }
    };
    let score_all = |genomes: Vec<BusNetwork>, cache: &mut EvalCache| -> Vec<Scored> {
        let objectives = cache.evaluate_batch(&genomes, eval);
        genomes
            .into_iter()
            .zip(objectives)
            .map(|(genome, objectives)| Scored {
                score: scalarizer.score(&objectives),
                genome,
                objectives,
            })
            .collect()
    };

    let genomes: Vec<BusNetwork> = (0..n).map(|_| random_genome(pool, cfg, &mut rng)).collect();
    genomes.iter().for_each(&mut check);
    let mut population = score_all(genomes, &mut cache);
    let mut history = vec![record(0, &population)];

    for generation in 1..=cfg.iterations {
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let p1 = tournament(&population, &mut rng);
            let p2 = tournament(&population, &mut rng);
            let (c1, c2) = crossover(&p1.genome, &p2.genome, pool, cfg, &mut rng);
            children.push(mutate(&c1, pool, cfg, &mut rng));
            children.push(mutate(&c2, pool, cfg, &mut rng));
        }
        children.truncate(n);
        children.iter().for_each(&mut check);
        population.extend(score_all(children, &mut cache));
        population = survivors(population, n);
        history.push(record(generation, &population));
    }

    let best = population.swap_remove(best_index(&population));
    Ok(SoOutcome {
        best: best.genome,
        best_objectives: best.objectives,
        best_score: best.score,
        history,
        constraint_violations: violations,
        evaluations: cache.evaluations(),
    })
}
