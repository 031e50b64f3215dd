use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{Place, RoadGraph, StationId};
use crate::error::{Error, Result};
use crate::geo::{self, LatLon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub lat: f64,
    pub lon: f64,
}

impl Station {
    pub fn position(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetroEdge {
    #[serde(rename = "u")]
    pub from: StationId,
    #[serde(rename = "v")]
    pub to: StationId,
    pub line: String,
    pub length_m: f64,
}

impl MetroEdge {
    pub fn time_s(&self) -> f64 {
        geo::metro_time_s(self.length_m)
    }
}

/// Index into the sorted list of metro line labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineId(pub u16);

/// The fixed metro layer. Station ids are dense from 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetroNetwork {
    pub stations: Vec<Station>,
    pub edges: Vec<MetroEdge>,
}

impl MetroNetwork {
    pub fn new(mut stations: Vec<Station>, edges: Vec<MetroEdge>) -> Result<Self> {
        stations.sort_by_key(|s| s.id);
        for (i, s) in stations.iter().enumerate() {
            if s.id.index() != i {
                return Err(Error::InvalidGraph(format!(
                    "station ids must be dense from 0, found {} at position {i}",
                    s.id
                )));
            }
        }
        for e in &edges {
            if e.from.index() >= stations.len() || e.to.index() >= stations.len() {
                return Err(Error::InvalidGraph(format!(
                    "metro edge {}->{} references a missing station",
                    e.from, e.to
                )));
            }
            if !(e.length_m > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "metro edge {}->{} must have positive length",
                    e.from, e.to
                )));
            }
        }
        Ok(Self { stations, edges })
    }

    pub fn lines(&self) -> Vec<String> {
        let labels: BTreeSet<&str> = self.edges.iter().map(|e| e.line.as_str()).collect();
        labels.into_iter().map(str::to_owned).collect()
    }

    pub fn station(&self, id: StationId) -> Option<&Station> {
        self.stations.get(id.index())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkEdge {
    #[serde(rename = "u")]
    pub from: Place,
    #[serde(rename = "v")]
    pub to: Place,
    pub length_m: f64,
}

impl WalkEdge {
    pub fn time_s(&self) -> f64 {
        geo::walk_time_s(self.length_m)
    }
}

/// Straight-line walking transfers between stops and stations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WalkNetwork {
    pub max_walk_m: f64,
    pub edges: Vec<WalkEdge>,
}

impl WalkNetwork {
    /// Connects every pair of distinct stops/stations whose great-circle
    /// distance is at most `max_walk_m`, in both directions.
    pub fn build(road: &RoadGraph, metro: &MetroNetwork, max_walk_m: f64) -> Self {
        let mut places: Vec<(Place, LatLon)> = road
            .stops()
            .map(|n| (Place::Stop(n.id), n.position()))
            .collect();
        places.extend(
            metro
                .stations
                .iter()
                .map(|s| (Place::Station(s.id), s.position())),
        );
        let mut edges = Vec::new();
        for (i, (a, pa)) in places.iter().enumerate() {
            for (b, pb) in &places[i + 1..] {
                let d = pa.distance_m(pb);
                if d <= max_walk_m {
                    edges.push(WalkEdge {
                        from: *a,
                        to: *b,
                        length_m: d,
                    });
                    edges.push(WalkEdge {
                        from: *b,
                        to: *a,
                        length_m: d,
                    });
                }
            }
        }
        Self { max_walk_m, edges }
    }

    pub fn validate(&self, road: &RoadGraph, metro: &MetroNetwork) -> Result<()> {
        let mut pairs = HashSet::new();
        for e in &self.edges {
            for p in [e.from, e.to] {
                let known = match p {
                    Place::Stop(s) => road.is_stop(s),
                    Place::Station(s) => metro.station(s).is_some(),
                };
                if !known {
                    return Err(Error::InvalidGraph(format!("walk edge touches unknown place {p}")));
                }
            }
            if e.length_m > self.max_walk_m || e.length_m < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "walk edge {}->{} is {} m, limit {} m",
                    e.from, e.to, e.length_m, self.max_walk_m
                )));
            }
            pairs.insert((e.from, e.to));
        }
        if let Some(e) = self
            .edges
            .iter()
            .find(|e| !pairs.contains(&(e.to, e.from)))
        {
            return Err(Error::InvalidGraph(format!(
                "walk edge {}->{} has no reverse edge",
                e.from, e.to
            )));
        }
        Ok(())
    }
}
