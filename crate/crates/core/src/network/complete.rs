use std::collections::HashMap;
use std::sync::Arc;

use super::{BusNetwork, LineId, MetroNetwork, Place, RoadGraph, RouteId, WalkNetwork};
use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::routegen::RoutePool;

/// Dense numbering of every stop and station, shared by all complete
/// networks assembled over the same substrate.
#[derive(Debug, Clone)]
pub struct PlaceIndex {
    places: Vec<Place>,
    positions: Vec<LatLon>,
    lookup: HashMap<Place, u32>,
    lines: Vec<String>,
}

impl PlaceIndex {
    pub fn new(road: &RoadGraph, metro: &MetroNetwork) -> Self {
        let mut places = Vec::new();
        let mut positions = Vec::new();
        for n in road.stops() {
            places.push(Place::Stop(n.id));
            positions.push(n.position());
        }
        for s in &metro.stations {
            places.push(Place::Station(s.id));
            positions.push(s.position());
        }
        let lookup = places
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as u32))
            .collect();
        Self {
            places,
            positions,
            lookup,
            lines: metro.lines(),
        }
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn place(&self, index: u32) -> Place {
        self.places[index as usize]
    }

    pub fn position(&self, index: u32) -> LatLon {
        self.positions[index as usize]
    }

    pub fn index_of(&self, place: Place) -> Option<u32> {
        self.lookup.get(&place).copied()
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn line_id(&self, label: &str) -> Option<LineId> {
        self.lines
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| LineId(i as u16))
    }

    pub fn line_label(&self, line: LineId) -> &str {
        &self.lines[line.0 as usize]
    }
}

/// What moves a passenger along a complete-network edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Carrier {
    Route(RouteId),
    Line(LineId),
    Walk,
}

impl Carrier {
    pub fn is_vehicle(self) -> bool {
        !matches!(self, Carrier::Walk)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteEdge {
    pub from: u32,
    pub to: u32,
    pub carrier: Carrier,
    pub time_s: f64,
}

/// Time-weighted multimodal multigraph: bus edges of the candidate's routes,
/// plus every metro and walking edge.
#[derive(Debug, Clone)]
pub struct CompleteNetwork {
    index: Arc<PlaceIndex>,
    edges: Vec<CompleteEdge>,
    offsets: Vec<u32>,
    adjacency: Vec<u32>,
}

impl CompleteNetwork {
    pub fn from_edges(index: Arc<PlaceIndex>, edges: Vec<CompleteEdge>) -> Self {
        let n = index.len();
        let mut offsets = vec![0u32; n + 1];
        for e in &edges {
            offsets[e.from as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![0u32; edges.len()];
        for (k, e) in edges.iter().enumerate() {
            let slot = &mut fill[e.from as usize];
            adjacency[*slot as usize] = k as u32;
            *slot += 1;
        }
        Self {
            index,
            edges,
            offsets,
            adjacency,
        }
    }

    pub fn index(&self) -> &Arc<PlaceIndex> {
        &self.index
    }

    pub fn edges(&self) -> &[CompleteEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn outgoing(&self, place: u32) -> impl Iterator<Item = (u32, &CompleteEdge)> + '_ {
        let (a, b) = (
            self.offsets[place as usize] as usize,
            self.offsets[place as usize + 1] as usize,
        );
        self.adjacency[a..b]
            .iter()
            .map(move |&k| (k, &self.edges[k as usize]))
    }
}

/// Builds the complete network for one candidate: every consecutive stop
/// pair of the selected and fixed routes becomes a bus edge, followed by the
/// metro and walking layers unchanged.
pub fn assemble_complete(
    bus: &BusNetwork,
    metro: &MetroNetwork,
    walk: &WalkNetwork,
    pool: &RoutePool,
    index: &Arc<PlaceIndex>,
) -> Result<CompleteNetwork> {
    let mut selected: Vec<RouteId> = bus.route_ids();
    selected.extend(pool.fixed_ids());
    selected.sort_unstable();
    selected.dedup();

    let mut edges = Vec::new();
    for id in selected {
        let route = pool.get(id).ok_or(Error::UnknownRoute(id))?;
        for (pair, &time_s) in route.stops.windows(2).zip(&route.leg_times_s) {
            edges.push(CompleteEdge {
                from: place_index(index, Place::Stop(pair[0]))?,
                to: place_index(index, Place::Stop(pair[1]))?,
                carrier: Carrier::Route(id),
                time_s,
            });
        }
    }
    for e in &metro.edges {
        let line = index
            .line_id(&e.line)
            .ok_or_else(|| Error::InvalidGraph(format!("unknown metro line {}", e.line)))?;
        edges.push(CompleteEdge {
            from: place_index(index, Place::Station(e.from))?,
            to: place_index(index, Place::Station(e.to))?,
            carrier: Carrier::Line(line),
            time_s: e.time_s(),
        });
    }
    for e in &walk.edges {
        edges.push(CompleteEdge {
            from: place_index(index, e.from)?,
            to: place_index(index, e.to)?,
            carrier: Carrier::Walk,
            time_s: e.time_s(),
        });
    }
    Ok(CompleteNetwork::from_edges(Arc::clone(index), edges))
}

fn place_index(index: &PlaceIndex, place: Place) -> Result<u32> {
    index
        .index_of(place)
        .ok_or_else(|| Error::InvalidGraph(format!("{place} is not a stop or station")))
}
