//! File formats of pipeline artifacts.

use serde::{Deserialize, Serialize};
use tndp_core::evaluation::ObjectiveVector;
use tndp_core::network::RouteId;
use tndp_core::report::Report;
use tndp_core::weightfit::WeightVector;

use crate::config::ScalarizerKind;

pub const NODES: &str = "nodes.csv";
pub const EDGES: &str = "edges.csv";
pub const METRO: &str = "metro.json";
pub const WALK: &str = "walk.json";
pub const GRID: &str = "grid.json";
pub const DEMAND: &str = "demand.csv";
pub const CLUSTER_MAP: &str = "cluster_map.json";
pub const ROUTES_ORIGINAL: &str = "routes_original.json";
pub const ROUTES: &str = "routes.json";
pub const POOL_REPORT: &str = "pool_report.json";
pub const PARETO: &str = "pareto.json";
pub const HISTORY_MO: &str = "history_mo.csv";
pub const SAMPLE: &str = "sample.json";
pub const RATINGS: &str = "ratings.jsonl";
pub const WEIGHTS: &str = "weights.json";
pub const BEST_SO: &str = "best_so.json";
pub const HISTORY_SO: &str = "history_so.csv";
pub const REPORT: &str = "report.json";
pub const ORIGINAL_GEOJSON: &str = "original.geojson";
pub const OPTIMIZED_GEOJSON: &str = "optimized.geojson";

/// Anything stamped with the manifest lineage that produced it.
pub trait Stamped {
    fn lineage(&self) -> &str;
}

macro_rules! stamped {
    ($($t:ty),*) => {
        $(impl Stamped for $t {
            fn lineage(&self) -> &str {
                &self.lineage
            }
        })*
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoMember {
    /// Position in crowding-distance order.
    pub id: usize,
    pub routes: Vec<RouteId>,
    pub objectives: ObjectiveVector,
    /// `None` for boundary members with infinite crowding distance.
    pub crowding: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFile {
    pub lineage: String,
    pub evaluations: usize,
    /// Generated genomes that broke the route-count or length bounds.
    pub constraint_violations: usize,
    pub members: Vec<ParetoMember>,
}

impl ParetoFile {
    pub fn member(&self, id: usize) -> Option<&ParetoMember> {
        self.members.get(id).filter(|m| m.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: usize,
    pub objectives: ObjectiveVector,
    pub route_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub lineage: String,
    pub networks: Vec<SampleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub lineage: String,
    #[serde(flatten)]
    pub weights: WeightVector,
    pub max_rating: f64,
    pub samples: usize,
    pub residual_norm: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveBest {
    pub id: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSoFile {
    pub lineage: String,
    pub scalarizer: ScalarizerKind,
    pub routes: Vec<RouteId>,
    pub objectives: ObjectiveVector,
    pub score: f64,
    /// Best Pareto archive member under the same scalarizer.
    pub archive_best: ArchiveBest,
    pub evaluations: usize,
    pub constraint_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub lineage: String,
    #[serde(flatten)]
    pub report: Report,
}

stamped!(ParetoFile, SampleFile, WeightsFile, BestSoFile, ReportFile);
