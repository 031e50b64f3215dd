use serde::{Deserialize, Serialize};

use super::{crowding_distance, dominates};
use crate::evaluation::ObjectiveVector;
use crate::network::BusNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveMember {
    pub genome: BusNetwork,
    pub objectives: ObjectiveVector,
}

/// Every non-dominated genome seen during a run. No member dominates
/// another; distinct genomes with equal objectives are all kept.
#[derive(Debug, Clone, Default)]
pub struct ParetoArchive {
    members: Vec<ArchiveMember>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true when the candidate entered the archive.
    pub fn insert(&mut self, genome: &BusNetwork, objectives: ObjectiveVector) -> bool {
        let v = objectives.to_array();
        if self.members.iter().any(|m| {
            m.genome == *genome || dominates(&m.objectives.to_array(), &v)
        }) {
            return false;
        }
        self.members
            .retain(|m| !dominates(&v, &m.objectives.to_array()));
        self.members.push(ArchiveMember {
            genome: genome.clone(),
            objectives,
        });
        true
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ArchiveMember] {
        &self.members
    }

    pub fn is_consistent(&self) -> bool {
        self.members.iter().all(|a| {
            self.members
                .iter()
                .all(|b| !dominates(&a.objectives.to_array(), &b.objectives.to_array()))
        })
    }

    /// Members in crowding-distance order (most isolated first), ties broken
    /// by genome, each paired with its crowding distance.
    pub fn crowding_order(&self) -> Vec<(ArchiveMember, f64)> {
        let points: Vec<[f64; 4]> = self.members.iter().map(|m| m.objectives.to_array()).collect();
        let crowd = crowding_distance(&points);
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| {
            crowd[b]
                .total_cmp(&crowd[a])
                .then_with(|| self.members[a].genome.cmp(&self.members[b].genome))
        });
        order
            .into_iter()
            .map(|i| (self.members[i].clone(), crowd[i]))
            .collect()
    }
}

/// Positions of `n` evenly spread picks out of `total` ranked items, first
/// and last included: `floor(i * (total - 1) / (n - 1))`. With 200 items
/// and 9 picks this yields 0, 24, 49, ..., 199.
pub fn sample_indices(total: usize, n: usize) -> Vec<usize> {
    if n == 0 || total == 0 {
        return Vec::new();
    }
    if total <= n {
        return (0..total).collect();
    }
    if n == 1 {
        return vec![0];
    }
    (0..n).map(|i| i * (total - 1) / (n - 1)).collect()
}
