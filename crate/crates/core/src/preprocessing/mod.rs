//! Stop clustering, the origin-destination zone grid, demand matrices and
//! synthetic city generation.

mod cluster;
mod demand;
mod grid;
mod synth;

pub use cluster::{audit_clustering, cluster_stops, ClusterMap, Merge, DEFAULT_CLUSTER_THRESHOLD_M};
pub use demand::DemandMatrix;
pub use grid::{build_grid, ZoneGrid};
pub use synth::{synth_city, synth_routes, SynthCity, SynthRoutesParams};
