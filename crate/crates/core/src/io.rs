//! Reading and writing the on-disk dataset and artifact formats.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::network::{
    LegCache, MetroNetwork, NodeId, RoadEdge, RoadGraph, RoadNode, Route, RouteId, RouteKind, WalkNetwork,
};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.into(),
        source,
    }
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    reader
        .deserialize()
        .map(|row| row.map_err(csv_err(path)))
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        writer.serialize(row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct NodeRow {
    id: u32,
    lat: f64,
    lon: f64,
    #[serde(deserialize_with = "flag", serialize_with = "flag_out")]
    is_stop: bool,
}

fn flag<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" | "" => Ok(false),
        other => Err(serde::de::Error::custom(format!("not a flag: {other:?}"))),
    }
}

fn flag_out<S: Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*v))
}

/// Loads `nodes.csv` (id,lat,lon,is_stop) and `edges.csv` (u,v,length_m,time_s).
pub fn read_road(nodes: &Path, edges: &Path) -> Result<RoadGraph> {
    let nodes: Vec<NodeRow> = read_csv(nodes)?;
    let edges: Vec<RoadEdge> = read_csv(edges)?;
    RoadGraph::new(
        nodes
            .into_iter()
            .map(|n| RoadNode {
                id: NodeId(n.id),
                lat: n.lat,
                lon: n.lon,
                is_stop: n.is_stop,
            })
            .collect(),
        edges,
    )
}

pub fn write_road(road: &RoadGraph, nodes: &Path, edges: &Path) -> Result<()> {
    let rows: Vec<NodeRow> = road
        .nodes()
        .iter()
        .map(|n| NodeRow {
            id: n.id.0,
            lat: n.lat,
            lon: n.lon,
            is_stop: n.is_stop,
        })
        .collect();
    write_csv(nodes, &rows)?;
    write_csv(edges, road.edges())
}

pub fn read_metro(path: &Path) -> Result<MetroNetwork> {
    let raw: MetroNetwork = read_json(path)?;
    MetroNetwork::new(raw.stations, raw.edges)
}

pub fn read_walk(path: &Path, road: &RoadGraph, metro: &MetroNetwork) -> Result<WalkNetwork> {
    let walk: WalkNetwork = read_json(path)?;
    walk.validate(road, metro)?;
    Ok(walk)
}

/// A route as stored on disk. Lengths and leg times are recomputed from the
/// road graph on load; a stored length must agree to 1e-6 relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub id: RouteId,
    pub kind: RouteKind,
    pub stops: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
}

impl From<&Route> for RouteRecord {
    fn from(r: &Route) -> Self {
        Self {
            id: r.id,
            kind: r.kind,
            stops: r.stops.clone(),
            length_m: Some(r.length_m),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RoutesFile {
    routes: Vec<RouteRecord>,
}

pub fn read_routes(path: &Path, road: &RoadGraph) -> Result<Vec<Route>> {
    let file: RoutesFile = read_json(path)?;
    let mut cache = LegCache::default();
    file.routes
        .into_iter()
        .map(|rec| {
            let route = Route::with_cache(rec.id, rec.kind, rec.stops, road, &mut cache)?;
            if let Some(stored) = rec.length_m {
                let scale = stored.abs().max(route.length_m.abs()).max(1.0);
                if (stored - route.length_m).abs() > 1e-6 * scale {
                    return Err(Error::InvalidInput(format!(
                        "{}: route {} stores length {stored} m but its stops give {} m",
                        path.display(),
                        route.id,
                        route.length_m
                    )));
                }
            }
            Ok(route)
        })
        .collect()
}

pub fn write_routes<'a>(path: &Path, routes: impl IntoIterator<Item = &'a Route>) -> Result<()> {
    let file = RoutesFile {
        routes: routes.into_iter().map(RouteRecord::from).collect(),
    };
    write_json(path, &file)
}
