use std::collections::HashMap;

use rayon::prelude::*;

use crate::evaluation::{Evaluator, ObjectiveVector};
use crate::network::BusNetwork;

/// Memoized objective evaluation. Unseen genomes of a batch are evaluated in
/// parallel; results come back in input order, so runs stay deterministic.
#[derive(Debug, Default)]
pub struct EvalCache {
    known: HashMap<BusNetwork, ObjectiveVector>,
    evaluations: usize,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of genomes actually evaluated.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn evaluate_batch<E: Evaluator + ?Sized>(
        &mut self,
        genomes: &[BusNetwork],
        eval: &E,
    ) -> Vec<ObjectiveVector> {
        let mut pending: Vec<&BusNetwork> = Vec::new();
        for g in genomes {
            if !self.known.contains_key(g) && !pending.contains(&g) {
                pending.push(g);
            }
        }
        let fresh: Vec<ObjectiveVector> = pending.par_iter().map(|g| eval.evaluate(g)).collect();
        self.evaluations += fresh.len();
        for (g, v) in pending.into_iter().zip(fresh) {
            self.known.insert(g.clone(), v);
        }
        genomes.iter().map(|g| self.known[g]).collect()
    }
}
