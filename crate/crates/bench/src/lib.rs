//! Fixtures shared by the benches.

use std::sync::Arc;

use tndp_core::evaluation::{EvalContext, EvalSettings};
use tndp_core::network::WalkNetwork;
use tndp_core::preprocessing::{synth_city, synth_routes, SynthRoutesParams};
use tndp_core::routegen::{LengthBounds, RoutePool};

/// Synthetic city with its original lines as the route pool.
pub fn city(seed: u64, junctions: usize, stops: usize, grid: u32) -> EvalContext {
    let city = synth_city(seed, junctions, stops, grid).expect("synthetic city");
    let routes = synth_routes(&city.road, seed, &SynthRoutesParams::default()).expect("synthetic routes");
    let walk = WalkNetwork::build(&city.road, &city.metro, 300.0);
    let (pool, _) = RoutePool::new(routes, LengthBounds::default()).expect("route pool");
    EvalContext::new(
        Arc::new(city.road),
        city.metro,
        walk,
        city.grid,
        city.demand,
        Arc::new(pool),
        EvalSettings::default(),
    )
    .expect("context")
}
