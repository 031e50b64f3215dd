use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    crossover, crowded_cmp, crowding_distance, is_feasible, mutate, nondominated_sort,
    random_genome, EvalCache, GaConfig, ParetoArchive,
};
use crate::error::{Error, Result};
use crate::evaluation::{Evaluator, ObjectiveVector};
use crate::network::BusNetwork;
use crate::routegen::RoutePool;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoGeneration {
    pub generation: usize,
    pub archive_size: usize,
    pub front_size: usize,
    pub min_tl: f64,
    pub min_ud: f64,
    pub min_ivt: f64,
    pub min_ant: f64,
}

#[derive(Debug, Clone)]
pub struct MoOutcome {
    pub archive: ParetoArchive,
    pub initial_population: Vec<(BusNetwork, ObjectiveVector)>,
    pub final_population: Vec<(BusNetwork, ObjectiveVector)>,
    pub history: Vec<MoGeneration>,
    /// Genomes created during the run that broke a design constraint.
    pub constraint_violations: usize,
    pub evaluations: usize,
}

struct Ranked {
    genome: BusNetwork,
    objectives: ObjectiveVector,
    rank: usize,
    crowding: f64,
}

pub(crate) fn check_startup(pool: &RoutePool, cfg: &GaConfig) -> Result<()> {
    cfg.validate()?;
    let available = pool.mutable_ids().len();
    if available == 0 || available < cfg.min_routes {
        return Err(Error::Infeasible(format!(
            "route pool offers {available} selectable routes, networks need at least {}",
            cfg.min_routes.max(1)
        )));
    }
    Ok(())
}

/// Rank and crowding for a whole population, then (mu + lambda) truncation
/// down to `keep` individuals.
fn environmental_selection(
    genomes: Vec<BusNetwork>,
    objectives: Vec<ObjectiveVector>,
    keep: usize,
) -> Vec<Ranked> {
    let points: Vec<[f64; 4]> = objectives.iter().map(|o| o.to_array()).collect();
    let mut slots: Vec<Option<(BusNetwork, ObjectiveVector)>> =
        genomes.into_iter().zip(objectives).map(Some).collect();
    let mut selected = Vec::with_capacity(keep);
    for (rank, front) in nondominated_sort(&points).into_iter().enumerate() {
        if selected.len() >= keep {
            break;
        }
        let front_points: Vec<[f64; 4]> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&front_points);
        let mut order: Vec<usize> = (0..front.len()).collect();
        if selected.len() + front.len() > keep {
            order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(front[a].cmp(&front[b])));
            order.truncate(keep - selected.len());
        }
        for k in order {
            let (genome, objectives) = slots[front[k]].take().expect("each index once");
            selected.push(Ranked {
                genome,
                objectives,
                rank,
                crowding: crowd[k],
            });
        }
    }
    selected
}

fn tournament<'a, R: Rng>(population: &'a [Ranked], rng: &mut R) -> &'a Ranked {
    let a = &population[rng.gen_range(0..population.len())];
    let b = &population[rng.gen_range(0..population.len())];
    if crowded_cmp(b.rank, b.crowding, a.rank, a.crowding).is_lt() {
        b
    } else {
        a
    }
}

fn summarize(generation: usize, archive: &ParetoArchive, population: &[Ranked]) -> MoGeneration {
    let min = |f: fn(&ObjectiveVector) -> f64| {
        population
            .iter()
            .map(|r| f(&r.objectives))
            .fold(f64::INFINITY, f64::min)
    };
    MoGeneration {
        generation,
        archive_size: archive.len(),
        front_size: population.iter().filter(|r| r.rank == 0).count(),
        min_tl: min(|o| o.tl),
        min_ud: min(|o| o.ud),
        min_ivt: min(|o| o.ivt),
        min_ant: min(|o| o.ant),
    }
}

/// Elitist non-dominated sorting search. The returned archive holds every
/// non-dominated genome evaluated during the run.
pub fn run_nsga2<E: Evaluator + ?Sized>(cfg: &GaConfig, pool: &RoutePool, eval: &E) -> Result<MoOutcome> {
    check_startup(pool, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache = EvalCache::new();
    let mut archive = ParetoArchive::new();
    let mut violations = 0;
    let n = cfg.population_size;

    let mut check = |g: &BusNetwork| {
        let ok = is_feasible(g, pool, cfg);
        debug_assert!(ok, "infeasible genome {:?}", g.routes());
        if !ok {
            violations += 1;
        }
    };

    let genomes: Vec<BusNetwork> = (0..n).map(|_| random_genome(pool, cfg, &mut rng)).collect();
    genomes.iter().for_each(&mut check);
    let objectives = cache.evaluate_batch(&genomes, eval);
    for (g, o) in genomes.iter().zip(&objectives) {
        archive.insert(g, *o);
    }
    let initial_population: Vec<_> = genomes.iter().cloned().zip(objectives.iter().copied()).collect();
    let mut population = environmental_selection(genomes, objectives, n);
    let mut history = vec![summarize(0, &archive, &population)];

    for generation in 1..=cfg.iterations {
        let mut offspring = Vec::with_capacity(n + 1);
        while offspring.len() < n {
            let p1 = tournament(&population, &mut rng);
            let p2 = tournament(&population, &mut rng);
            let (c1, c2) = crossover(&p1.genome, &p2.genome, pool, cfg, &mut rng);
            offspring.push(mutate(&c1, pool, cfg, &mut rng));
            offspring.push(mutate(&c2, pool, cfg, &mut rng));
        }
        offspring.truncate(n);
        offspring.iter().for_each(&mut check);
        let child_objectives = cache.evaluate_batch(&offspring, eval);
        for (g, o) in offspring.iter().zip(&child_objectives) {
            archive.insert(g, *o);
        }

        let (mut genomes, mut objectives): (Vec<_>, Vec<_>) =
            population.into_iter().map(|r| (r.genome, r.objectives)).unzip();
        genomes.extend(offspring);
        objectives.extend(child_objectives);
        population = environmental_selection(genomes, objectives, n);
        history.push(summarize(generation, &archive, &population));
        log::debug!(
            "nsga2 generation {generation}: archive {} front {}",
            archive.len(),
            history.last().map_or(0, |h| h.front_size)
        );
    }

    debug_assert!(archive.is_consistent());
    Ok(MoOutcome {
        archive,
        initial_population,
        final_population: population
            .into_iter()
            .map(|r| (r.genome, r.objectives))
            .collect(),
        history,
        constraint_violations: violations,
        evaluations: cache.evaluations(),
    })
}
