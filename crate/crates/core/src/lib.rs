//! Bus network redesign over a fixed road, metro and walking substrate.
//!
//! The crate covers the whole workflow: stop clustering and zoning, route
//! pool generation, multimodal trip planning with four network objectives,
//! NSGA-II search, weight inference from ratings and a weighted
//! single-objective search.

pub mod error;
pub mod evaluation;
pub mod geo;
pub mod io;
pub mod moea;
pub mod network;
pub mod preprocessing;
pub mod report;
pub mod routegen;
pub mod weightfit;

pub use error::{Error, ExitKind, Result};
pub use evaluation::{evaluate, plan_trip, EvalContext, EvalSettings, Evaluator, ObjectiveVector, Trip};
pub use moea::{run_classic_ga, run_nsga2, GaConfig, ParetoArchive};
pub use network::{
    BusNetwork, CompleteNetwork, MetroNetwork, NodeId, Place, RoadGraph, Route, RouteId, RouteKind, StopId,
    WalkNetwork, ZoneId,
};
pub use preprocessing::{DemandMatrix, ZoneGrid};
pub use routegen::RoutePool;
pub use weightfit::{fit_weights, Scalarizer, Uniform, WeightVector};
