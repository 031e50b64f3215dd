use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{NodeId, RoadGraph, RouteId, ShortestPathTree};
use crate::error::{Error, Result};
use crate::evaluation::ObjectiveVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    Original,
    HubConnector,
    Traversal,
    /// Tram routes present in every candidate network and never mutated.
    TramFixed,
}

impl RouteKind {
    pub fn is_fixed(self) -> bool {
        self == RouteKind::TramFixed
    }
}

/// A directed bus (or tram) route: buses ride the time-optimal road path
/// between consecutive stops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub id: RouteId,
    pub kind: RouteKind,
    pub stops: Vec<NodeId>,
    pub length_m: f64,
    pub leg_times_s: Vec<f64>,
}

impl Route {
    pub fn new(id: RouteId, kind: RouteKind, stops: Vec<NodeId>, road: &RoadGraph) -> Result<Self> {
        let geometry = route_length(&stops, road)?;
        Ok(Self {
            id,
            kind,
            stops,
            length_m: geometry.length_m,
            leg_times_s: geometry.leg_times_s,
        })
    }

    pub fn with_cache(
        id: RouteId,
        kind: RouteKind,
        stops: Vec<NodeId>,
        road: &RoadGraph,
        cache: &mut LegCache,
    ) -> Result<Self> {
        let geometry = cache.route_length(&stops, road)?;
        Ok(Self {
            id,
            kind,
            stops,
            length_m: geometry.length_m,
            leg_times_s: geometry.leg_times_s,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.leg_times_s.iter().sum()
    }

    pub fn is_simple(&self) -> bool {
        let unique: BTreeSet<_> = self.stops.iter().collect();
        unique.len() == self.stops.len()
    }

    /// Recomputes the road geometry and checks the stored length and leg
    /// times against it (relative tolerance 1e-6).
    pub fn verify(&self, road: &RoadGraph) -> Result<()> {
        let geometry = route_length(&self.stops, road)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
        if !close(geometry.length_m, self.length_m) {
            return Err(Error::InvalidInput(format!(
                "route {} stores length {} m but its stops span {} m",
                self.id, self.length_m, geometry.length_m
            )));
        }
        let legs_ok = geometry.leg_times_s.len() == self.leg_times_s.len()
            && geometry
                .leg_times_s
                .iter()
                .zip(&self.leg_times_s)
                .all(|(a, b)| close(*a, *b));
        if !legs_ok {
            return Err(Error::InvalidInput(format!(
                "route {} leg times disagree with the road graph",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteGeometry {
    pub length_m: f64,
    pub leg_lengths_m: Vec<f64>,
    pub leg_times_s: Vec<f64>,
}

/// Sum of the lengths of the time-optimal road paths between consecutive stops.
pub fn route_length(stops: &[NodeId], road: &RoadGraph) -> Result<RouteGeometry> {
    LegCache::default().route_length(stops, road)
}

/// Memoizes shortest path trees by source node.
#[derive(Debug, Default)]
pub struct LegCache {
    trees: HashMap<NodeId, ShortestPathTree>,
}

impl LegCache {
    pub fn tree(&mut self, road: &RoadGraph, source: NodeId) -> &ShortestPathTree {
        self.trees
            .entry(source)
            .or_insert_with(|| road.shortest_paths(source))
    }

    pub fn route_length(&mut self, stops: &[NodeId], road: &RoadGraph) -> Result<RouteGeometry> {
        if stops.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a route needs at least two stops, got {}",
                stops.len()
            )));
        }
        for &s in stops {
            if !road.is_stop(s) {
                return Err(Error::InvalidInput(format!("{s} is not a stop of the road graph")));
            }
        }
        let mut geometry = RouteGeometry {
            length_m: 0.0,
            leg_lengths_m: Vec::with_capacity(stops.len() - 1),
            leg_times_s: Vec::with_capacity(stops.len() - 1),
        };
        for pair in stops.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            if from == to {
                return Err(Error::InvalidInput(format!(
                    "route repeats stop {from} on consecutive positions"
                )));
            }
            let tree = self.tree(road, from);
            let (Some(t), Some(l)) = (tree.time_to(to), tree.length_to(to)) else {
                return Err(Error::Unreachable { from, to });
            };
            geometry.length_m += l;
            geometry.leg_lengths_m.push(l);
            geometry.leg_times_s.push(t);
        }
        Ok(geometry)
    }
}

/// A candidate solution: the set of non-fixed pool routes it operates.
/// Fixed tram routes are implied and never stored here.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BusNetwork {
    routes: BTreeSet<RouteId>,
    #[serde(skip)]
    objectives: Option<ObjectiveVector>,
}

impl BusNetwork {
    pub fn new(routes: impl IntoIterator<Item = RouteId>) -> Self {
        Self {
            routes: routes.into_iter().collect(),
            objectives: None,
        }
    }

    pub fn routes(&self) -> &BTreeSet<RouteId> {
        &self.routes
    }

    pub fn route_ids(&self) -> Vec<RouteId> {
        self.routes.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn contains(&self, id: RouteId) -> bool {
        self.routes.contains(&id)
    }

    pub fn insert(&mut self, id: RouteId) -> bool {
        self.objectives = None;
        self.routes.insert(id)
    }

    pub fn remove(&mut self, id: RouteId) -> bool {
        self.objectives = None;
        self.routes.remove(&id)
    }

    pub fn objectives(&self) -> Option<ObjectiveVector> {
        self.objectives
    }

    pub fn set_objectives(&mut self, objectives: ObjectiveVector) {
        self.objectives = Some(objectives);
    }
}

impl PartialEq for BusNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.routes == other.routes
    }
}

impl Eq for BusNetwork {}

impl Hash for BusNetwork {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.routes.hash(state);
    }
}

impl PartialOrd for BusNetwork {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BusNetwork {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.routes.cmp(&other.routes)
    }
}

impl FromIterator<RouteId> for BusNetwork {
    fn from_iter<I: IntoIterator<Item = RouteId>>(iter: I) -> Self {
        Self::new(iter)
    }
}
