//! Evolutionary search over variable-length route sets: genome operators,
//! NSGA-II and a classic elitist genetic algorithm.

mod archive;
mod classic;
mod dominance;
mod eval_cache;
mod hypervolume;
mod nsga2;
mod operators;

use serde::{Deserialize, Serialize};

pub use archive::{sample_indices, ArchiveMember, ParetoArchive};
pub use classic::{run_classic_ga, SoGeneration, SoOutcome};
pub use dominance::{crowded_cmp, crowding_distance, dominates, nondominated_sort};
pub use eval_cache::EvalCache;
pub use hypervolume::hypervolume;
pub use nsga2::{run_nsga2, MoGeneration, MoOutcome};
pub use operators::{crossover, is_feasible, mutate, random_genome, repair, MutationKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub min_routes: usize,
    pub max_routes: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            iterations: 300,
            mutation_prob: 0.1,
            crossover_prob: 0.8,
            min_routes: 200,
            max_routes: 400,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("mutation", self.mutation_prob), ("crossover", self.crossover_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} probability {p} is outside [0, 1]")));
            }
        }
        if self.min_routes > self.max_routes {
            return Err(Error::Config(format!(
                "route bounds [{}, {}] are inverted",
                self.min_routes, self.max_routes
            )));
        }
        if self.max_routes == 0 {
            return Err(Error::Config("max_routes must be positive".into()));
        }
        if self.population_size < 2 {
            return Err(Error::Config("population needs at least two individuals".into()));
        }
        Ok(())
    }
}
