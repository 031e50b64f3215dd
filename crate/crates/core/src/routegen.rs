//! Route pool construction: original routes plus generated hub connectors
//! and cross-city traversal routes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{LegCache, NodeId, RoadGraph, Route, RouteId, RouteKind};
use crate::preprocessing::{DemandMatrix, ZoneGrid};

/// Per-route length constraints of the design problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub min_route_len_m: f64,
    pub max_route_len_m: f64,
}

impl Default for LengthBounds {
    fn default() -> Self {
        Self {
            min_route_len_m: 1_000.0,
            max_route_len_m: 25_000.0,
        }
    }
}

impl LengthBounds {
    pub fn admits(&self, length_m: f64) -> bool {
        length_m >= self.min_route_len_m && length_m <= self.max_route_len_m
    }
}

/// Total demand originating or terminating in each stop's zone.
pub fn stop_busyness(road: &RoadGraph, grid: &ZoneGrid, demand: &DemandMatrix) -> BTreeMap<NodeId, f64> {
    let activity = demand.zone_activity();
    road.stops()
        .map(|s| {
            let zone = grid.zone_of(s.position());
            (s.id, activity.get(&zone).copied().unwrap_or(0.0))
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct Generated {
    /// Routes with provisional ids from 0; the pool renumbers them.
    pub routes: Vec<Route>,
    pub unreachable: usize,
    pub out_of_bounds: usize,
    pub shortfall: usize,
}

/// Stop sequence of a time-optimal road path: the road nodes along it that
/// are stops, endpoints included.
fn stops_along(road: &RoadGraph, cache: &mut LegCache, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
    let path = cache.tree(road, from).path_to(road, to)?;
    Some(path.into_iter().filter(|&n| road.is_stop(n)).collect())
}

/// Connects pairs of the `top_k` busiest stops along shortest paths. All
/// pairs are ranked by combined busyness and the first `max_pairs` are kept;
/// each route runs from the busier stop of its pair.
pub fn gen_hub_connectors(
    road: &RoadGraph,
    grid: &ZoneGrid,
    demand: &DemandMatrix,
    top_k: usize,
    max_pairs: usize,
    bounds: &LengthBounds,
) -> Result<Generated> {
    if top_k < 2 {
        return Err(Error::InvalidInput(format!("top_k must be at least 2, got {top_k}")));
    }
    let busyness = stop_busyness(road, grid, demand);
    let mut ranked: Vec<(NodeId, f64)> = busyness.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_k);

    let mut pairs = Vec::new();
    for i in 0..ranked.len() {
        for j in i + 1..ranked.len() {
            pairs.push((i, j, ranked[i].1 + ranked[j].1));
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    pairs.truncate(max_pairs);

    let mut out = Generated::default();
    let mut cache = LegCache::default();
    for (i, j, _) in pairs {
        let (a, b) = (ranked[i].0, ranked[j].0);
        let Some(stops) = stops_along(road, &mut cache, a, b) else {
            out.unreachable += 1;
            continue;
        };
        let id = RouteId(out.routes.len() as u32);
        let route = Route::with_cache(id, RouteKind::HubConnector, stops, road, &mut cache)?;
        if bounds.admits(route.length_m) {
            out.routes.push(route);
        } else {
            out.out_of_bounds += 1;
        }
    }
    Ok(out)
}

/// Long routes between opposite sides of the city: endpoints are drawn from
/// the lowest and highest thirds of the stop bounding box along a random
/// axis, joined by the time-optimal path, and kept when at least `min_len_m`
/// long and within `bounds`.
pub fn gen_traversal(
    road: &RoadGraph,
    n: usize,
    min_len_m: f64,
    seed: u64,
    bounds: &LengthBounds,
) -> Result<Generated> {
    let mut out = Generated::default();
    if n == 0 {
        return Ok(out);
    }
    let stops: Vec<_> = road.stops().map(|s| (s.id, s.position())).collect();
    if stops.len() < 2 {
        out.shortfall = n;
        return Ok(out);
    }
    let (mut min_lat, mut max_lat, mut min_lon, mut max_lon) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, p) in &stops {
        min_lat = min_lat.min(p.lat);
        max_lat = max_lat.max(p.lat);
        min_lon = min_lon.min(p.lon);
        max_lon = max_lon.max(p.lon);
    }
    let thirds = |value: f64, min: f64, max: f64| -> Option<bool> {
        let f = if max > min { (value - min) / (max - min) } else { 0.5 };
        if f < 1.0 / 3.0 {
            Some(false)
        } else if f > 2.0 / 3.0 {
            Some(true)
        } else {
            None
        }
    };
    let mut sides: [[Vec<NodeId>; 2]; 2] = Default::default();
    for (id, p) in &stops {
        if let Some(high) = thirds(p.lat, min_lat, max_lat) {
            sides[0][high as usize].push(*id);
        }
        if let Some(high) = thirds(p.lon, min_lon, max_lon) {
            sides[1][high as usize].push(*id);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = LegCache::default();
    let mut seen = BTreeSet::new();
    let max_attempts = 50 * n;
    let mut attempts = 0;
    while out.routes.len() < n && attempts < max_attempts {
        attempts += 1;
        let axis = &sides[usize::from(rand::Rng::gen_bool(&mut rng, 0.5))];
        let (Some(&a), Some(&b)) = (axis[0].choose(&mut rng), axis[1].choose(&mut rng)) else {
            continue;
        };
        let (from, to) = if rand::Rng::gen_bool(&mut rng, 0.5) { (a, b) } else { (b, a) };
        let Some(stops) = stops_along(road, &mut cache, from, to) else {
            out.unreachable += 1;
            continue;
        };
        if stops.len() < 2 || seen.contains(&stops) {
            continue;
        }
        let id = RouteId(out.routes.len() as u32);
        let route = Route::with_cache(id, RouteKind::Traversal, stops, road, &mut cache)?;
        if route.length_m < min_len_m || !bounds.admits(route.length_m) {
            out.out_of_bounds += 1;
            continue;
        }
        seen.insert(route.stops.clone());
        out.routes.push(route);
    }
    out.shortfall = n - out.routes.len();
    if out.shortfall > 0 {
        log::warn!("generated {} of {n} traversal routes", out.routes.len());
    }
    Ok(out)
}

/// The universe of routes genomes draw from. Non-fixed routes violating the
/// length bounds are never admitted.
#[derive(Debug, Clone)]
pub struct RoutePool {
    routes: Vec<Route>,
    index: HashMap<RouteId, usize>,
    mutable: Vec<RouteId>,
    fixed: Vec<RouteId>,
    bounds: LengthBounds,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PoolReport {
    pub original: usize,
    pub fixed: usize,
    pub hub_connectors: usize,
    pub traversal: usize,
    pub rejected_length: usize,
    pub rejected_duplicate: usize,
}

impl RoutePool {
    /// Pool of routes that already carry final ids.
    pub fn new(routes: Vec<Route>, bounds: LengthBounds) -> Result<(Self, PoolReport)> {
        let mut report = PoolReport::default();
        let mut seen_ids = BTreeSet::new();
        let mut kept = Vec::with_capacity(routes.len());
        for r in routes {
            if !seen_ids.insert(r.id) {
                return Err(Error::InvalidInput(format!("duplicate route id {}", r.id)));
            }
            if !r.kind.is_fixed() && !bounds.admits(r.length_m) {
                report.rejected_length += 1;
                continue;
            }
            match r.kind {
                RouteKind::Original => report.original += 1,
                RouteKind::TramFixed => report.fixed += 1,
                RouteKind::HubConnector => report.hub_connectors += 1,
                RouteKind::Traversal => report.traversal += 1,
            }
            kept.push(r);
        }
        kept.sort_by_key(|r| r.id);
        let index = kept.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
        let mutable = kept.iter().filter(|r| !r.kind.is_fixed()).map(|r| r.id).collect();
        let fixed = kept.iter().filter(|r| r.kind.is_fixed()).map(|r| r.id).collect();
        Ok((
            Self {
                routes: kept,
                index,
                mutable,
                fixed,
                bounds,
            },
            report,
        ))
    }

    /// Original routes keep their ids; generated routes are renumbered after
    /// the largest original id, skipping stop sequences already present.
    pub fn assemble(
        original: Vec<Route>,
        generated: Vec<Route>,
        bounds: LengthBounds,
    ) -> Result<(Self, PoolReport)> {
        let mut next = original.iter().map(|r| r.id.0 + 1).max().unwrap_or(0);
        let mut sequences: BTreeSet<Vec<NodeId>> =
            original.iter().map(|r| r.stops.clone()).collect();
        let mut all = original;
        let mut duplicates = 0;
        for mut r in generated {
            if !sequences.insert(r.stops.clone()) {
                duplicates += 1;
                continue;
            }
            r.id = RouteId(next);
            next += 1;
            all.push(r);
        }
        let (pool, mut report) = Self::new(all, bounds)?;
        report.rejected_duplicate = duplicates;
        Ok((pool, report))
    }

    pub fn get(&self, id: RouteId) -> Option<&Route> {
        self.index.get(&id).map(|&i| &self.routes[i])
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    /// Routes a genome may select, in id order.
    pub fn mutable_ids(&self) -> &[RouteId] {
        &self.mutable
    }

    pub fn fixed_ids(&self) -> &[RouteId] {
        &self.fixed
    }

    pub fn bounds(&self) -> &LengthBounds {
        &self.bounds
    }

    pub fn length_of(&self, id: RouteId) -> f64 {
        self.get(id).map_or(0.0, |r| r.length_m)
    }

    pub fn fixed_length_m(&self) -> f64 {
        self.fixed.iter().map(|&id| self.length_of(id)).sum()
    }

    /// Original (non-generated, non-fixed) routes: the baseline network.
    pub fn original_ids(&self) -> Vec<RouteId> {
        self.routes
            .iter()
            .filter(|r| r.kind == RouteKind::Original)
            .map(|r| r.id)
            .collect()
    }
}
