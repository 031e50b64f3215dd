use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_grid, DemandMatrix, ZoneGrid};
use crate::error::{Error, Result};
use crate::geo::{LatLon, DEFAULT_BUS_SPEED_MPS};
use crate::network::{
    MetroEdge, MetroNetwork, NodeId, RoadEdge, RoadGraph, RoadNode, Route, RouteId, RouteKind,
    Station, StationId,
};

const ORIGIN: LatLon = LatLon {
    lat: 38.70,
    lon: -9.20,
};
const LATTICE_SPACING_M: f64 = 250.0;
const METERS_PER_DEG_LAT: f64 = 111_195.0;
const MAX_ATTEMPTS: usize = 20;
const DEMAND_PER_STOP: f64 = 1000.0;

/// A generated desk-scale city.
#[derive(Debug, Clone)]
pub struct SynthCity {
    pub road: RoadGraph,
    pub metro: MetroNetwork,
    pub demand: DemandMatrix,
    pub grid: ZoneGrid,
}

/// Builds a jittered lattice road network with two-way streets, marks
/// `n_stops` junctions as stops, lays two metro lines across the middle and
/// draws gravity demand between zones of a `grid` x `grid` partition.
pub fn synth_city(seed: u64, n_junctions: usize, n_stops: usize, grid: u32) -> Result<SynthCity> {
    if n_stops == 0 {
        return Err(Error::InvalidInput("a synthetic city needs at least one stop".into()));
    }
    if n_stops > n_junctions {
        return Err(Error::InvalidInput(format!(
            "cannot place {n_stops} stops on {n_junctions} junctions"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = ((n_junctions as f64).sqrt() * 1.1).ceil().max(1.0) as usize;
    let rows = n_junctions.div_ceil(cols);
    let meters_per_deg_lon = METERS_PER_DEG_LAT * ORIGIN.lat.to_radians().cos();

    let mut nodes = Vec::with_capacity(n_junctions);
    let mut cell_of = Vec::with_capacity(n_junctions);
    for i in 0..n_junctions {
        let (r, c) = (i / cols, i % cols);
        let jy = rng.gen_range(-0.15..0.15);
        let jx = rng.gen_range(-0.15..0.15);
        nodes.push(RoadNode {
            id: NodeId(i as u32),
            lat: ORIGIN.lat + (r as f64 + jy) * LATTICE_SPACING_M / METERS_PER_DEG_LAT,
            lon: ORIGIN.lon + (c as f64 + jx) * LATTICE_SPACING_M / meters_per_deg_lon,
            is_stop: false,
        });
        cell_of.push((r, c));
    }
    let mut order: Vec<usize> = (0..n_junctions).collect();
    order.shuffle(&mut rng);
    for &i in &order[..n_stops] {
        nodes[i].is_stop = true;
    }

    let mut links = Vec::new();
    for i in 0..n_junctions {
        let (r, c) = cell_of[i];
        if c + 1 < cols && i + 1 < n_junctions {
            links.push((i, i + 1));
        }
        if r + 1 < rows && i + cols < n_junctions {
            links.push((i, i + cols));
        }
    }

    let mut road = None;
    for _ in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for &(a, b) in &links {
            if links.len() > n_junctions && rng.gen_bool(0.12) {
                continue;
            }
            let straight = nodes[a].position().distance_m(&nodes[b].position());
            let length_m = (straight * rng.gen_range(1.0..1.15)).max(1.0);
            let time_s = length_m / DEFAULT_BUS_SPEED_MPS;
            for (u, v) in [(a, b), (b, a)] {
                edges.push(RoadEdge {
                    from: NodeId(u as u32),
                    to: NodeId(v as u32),
                    length_m,
                    time_s,
                });
            }
        }
        let candidate = RoadGraph::new(nodes.clone(), edges)?;
        if candidate.is_strongly_connected() {
            road = Some(candidate);
            break;
        }
    }
    let road = road.ok_or_else(|| {
        Error::InvalidInput(format!(
            "no connected road graph after {MAX_ATTEMPTS} attempts (seed {seed})"
        ))
    })?;

    let metro = if rows >= 4 && cols >= 4 {
        lay_metro(&road, rows, cols, &mut rng)?
    } else {
        MetroNetwork::default()
    };
    let grid = build_grid(&road, &metro, grid, grid)?;
    let demand = gravity_demand(&road, &grid, &mut rng)?;
    Ok(SynthCity {
        road,
        metro,
        demand,
        grid,
    })
}

fn lay_metro(road: &RoadGraph, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<MetroNetwork> {
    let n = road.node_count();
    let mid_row = rows / 2;
    let mid_col = cols / 2;
    let horizontal: Vec<usize> = (0..cols)
        .step_by(3)
        .map(|c| mid_row * cols + c)
        .filter(|&i| i < n)
        .collect();
    let vertical: Vec<usize> = (0..rows)
        .step_by(3)
        .map(|r| r * cols + mid_col)
        .filter(|&i| i < n)
        .collect();

    let mut station_of: BTreeMap<usize, StationId> = BTreeMap::new();
    let mut stations = Vec::new();
    let mut edges = Vec::new();
    for (label, line) in [("blue", &horizontal), ("green", &vertical)] {
        let ids: Vec<StationId> = line
            .iter()
            .map(|&junction| {
                *station_of.entry(junction).or_insert_with(|| {
                    let id = StationId(stations.len() as u32);
                    let p = road.position(NodeId(junction as u32));
                    stations.push(Station {
                        id,
                        lat: p.lat + rng.gen_range(-0.0003..0.0003),
                        lon: p.lon + rng.gen_range(-0.0003..0.0003),
                    });
                    id
                })
            })
            .collect();
        for pair in ids.windows(2) {
            let length_m = stations[pair[0].index()]
                .position()
                .distance_m(&stations[pair[1].index()].position());
            for (u, v) in [(pair[0], pair[1]), (pair[1], pair[0])] {
                edges.push(MetroEdge {
                    from: u,
                    to: v,
                    line: label.to_owned(),
                    length_m,
                });
            }
        }
    }
    MetroNetwork::new(stations, edges)
}

fn gravity_demand(road: &RoadGraph, grid: &ZoneGrid, rng: &mut ChaCha8Rng) -> Result<DemandMatrix> {
    let mut population: BTreeMap<_, f64> = BTreeMap::new();
    for stop in road.stops() {
        let u: f64 = rng.gen();
        *population.entry(grid.zone_of(stop.position())).or_insert(0.0) += 1.0 + 4.0 * u * u * u;
    }
    let zones: Vec<_> = population.keys().copied().collect();
    let mut raw = Vec::new();
    let mut total = 0.0;
    for &s in &zones {
        for &t in &zones {
            if s == t {
                continue;
            }
            let d = grid.center(s).distance_m(&grid.center(t)).max(300.0);
            let q = population[&s] * population[&t] / d;
            total += q;
            raw.push(((s, t), q));
        }
    }
    if raw.is_empty() {
        return DemandMatrix::new([]);
    }
    let scale = DEMAND_PER_STOP * road.stop_count() as f64 / total;
    DemandMatrix::new(
        raw.into_iter()
            .map(|(k, q)| (k, (q * scale * 1000.0).round() / 1000.0)),
    )
}

#[derive(Debug, Clone)]
pub struct SynthRoutesParams {
    /// Number of two-way original lines; each contributes two directed routes.
    pub original_lines: usize,
    pub tram_lines: usize,
    pub min_span_m: f64,
}

impl Default for SynthRoutesParams {
    fn default() -> Self {
        Self {
            original_lines: 6,
            tram_lines: 1,
            min_span_m: 1500.0,
        }
    }
}

/// Baseline network for a synthetic city: random two-way lines along
/// time-optimal road paths between distant stops. Route ids start at 0; tram
/// lines come last.
pub fn synth_routes(road: &RoadGraph, seed: u64, params: &SynthRoutesParams) -> Result<Vec<Route>> {
    let stops: Vec<NodeId> = road.stops().map(|n| n.id).collect();
    if stops.len() < 2 {
        return Err(Error::InvalidInput("need at least two stops to lay routes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_b005);
    let mut routes = Vec::new();
    let mut seen: BTreeSet<Vec<NodeId>> = BTreeSet::new();
    let wanted = params.original_lines + params.tram_lines;
    let mut attempts = 0;
    while routes.len() < 2 * wanted && attempts < 200 * wanted.max(1) {
        attempts += 1;
        let a = *stops.choose(&mut rng).expect("non-empty");
        let b = *stops.choose(&mut rng).expect("non-empty");
        if a == b || road.position(a).distance_m(&road.position(b)) < params.min_span_m {
            continue;
        }
        let tree = road.shortest_paths(a);
        let Some(path) = tree.path_to(road, b) else {
            continue;
        };
        let forward: Vec<NodeId> = path.into_iter().filter(|&n| road.is_stop(n)).collect();
        let Some(backward) = road
            .shortest_paths(b)
            .path_to(road, a)
            .map(|p| p.into_iter().filter(|&n| road.is_stop(n)).collect::<Vec<_>>())
        else {
            continue;
        };
        if forward.len() < 3 || backward.len() < 3 || seen.contains(&forward) {
            continue;
        }
        let kind = if routes.len() / 2 < params.original_lines {
            RouteKind::Original
        } else {
            RouteKind::TramFixed
        };
        for stops in [forward, backward] {
            let id = RouteId(routes.len() as u32);
            seen.insert(stops.clone());
            routes.push(Route::new(id, kind, stops, road)?);
        }
    }
    if routes.len() < 2 * wanted {
        log::warn!(
            "laid {} of {} synthetic routes",
            routes.len(),
            2 * wanted
        );
    }
    Ok(routes)
}
