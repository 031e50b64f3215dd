//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tndp_core::evaluation::{EvalContext, EvalSettings};
use tndp_core::geo::{haversine_m, walk_time_s, LatLon, METRO_SPEED_MPS, WALK_SPEED_MPS};
use tndp_core::network::{
    BusNetwork, MetroEdge, MetroNetwork, NodeId, Place, RoadEdge, RoadGraph, RoadNode, Route, RouteId,
    RouteKind, Station, StationId, WalkNetwork, ZoneId,
};
use tndp_core::preprocessing::{build_grid, synth_city, synth_routes, DemandMatrix, SynthRoutesParams};
use tndp_core::routegen::{LengthBounds, RoutePool};

pub const OPEN_BOUNDS: LengthBounds = LengthBounds {
    min_route_len_m: 0.0,
    max_route_len_m: f64::INFINITY,
};

pub fn node(id: u32, lat: f64, lon: f64, is_stop: bool) -> RoadNode {
    RoadNode {
        id: NodeId(id),
        lat,
        lon,
        is_stop,
    }
}

pub fn edge(u: u32, v: u32, length_m: f64, time_s: f64) -> RoadEdge {
    RoadEdge {
        from: NodeId(u),
        to: NodeId(v),
        length_m,
        time_s,
    }
}

pub fn two_way(u: u32, v: u32, length_m: f64, time_s: f64) -> [RoadEdge; 2] {
    [edge(u, v, length_m, time_s), edge(v, u, length_m, time_s)]
}

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

pub fn bus(v: &[u32]) -> BusNetwork {
    v.iter().map(|&i| RouteId(i)).collect()
}

pub fn context(
    road: RoadGraph,
    metro: MetroNetwork,
    routes: Vec<Route>,
    demand: DemandMatrix,
    rows: u32,
    cols: u32,
    settings: EvalSettings,
) -> EvalContext {
    let grid = build_grid(&road, &metro, rows, cols).unwrap();
    let walk = WalkNetwork::build(&road, &metro, 300.0);
    let (pool, _) = RoutePool::new(routes, OPEN_BOUNDS).unwrap();
    EvalContext::new(Arc::new(road), metro, walk, grid, demand, Arc::new(pool), settings).unwrap()
}

/// Mandl-style benchmark: 15 stops on a 1 km lattice, three bus routes, one
/// fixed tram route and a two-station metro line.
pub struct Mandl {
    pub road: RoadGraph,
    pub routes: Vec<Route>,
    pub metro: MetroNetwork,
}

/// Lattice (row, col) of each Mandl node.
pub const MANDL_CELLS: [(u32, u32); 15] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 1),
    (1, 2),
    (0, 3),
    (2, 2),
    (1, 3),
    (2, 3),
    (3, 2),
    (3, 3),
    (2, 1),
    (3, 1),
    (4, 2),
    (2, 4),
];

pub const MANDL_LINKS: [(u32, u32); 21] = [
    (0, 1),
    (1, 2),
    (2, 5),
    (5, 7),
    (7, 14),
    (1, 3),
    (3, 4),
    (2, 4),
    (4, 6),
    (4, 7),
    (6, 9),
    (9, 13),
    (6, 8),
    (7, 8),
    (8, 10),
    (9, 10),
    (3, 11),
    (11, 12),
    (12, 9),
    (11, 6),
    (8, 14),
];

pub fn mandl_position(r: u32, c: u32) -> (f64, f64) {
    let lat = 38.70 + r as f64 * 0.009 + if (1..=3).contains(&r) { 0.0006 } else { 0.0 };
    let lon = -9.20 + c as f64 * 0.0115 + if (1..=3).contains(&c) { 0.0008 } else { 0.0 };
    (lat, lon)
}

pub fn mandl() -> Mandl {
    let nodes = MANDL_CELLS
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| {
            let (lat, lon) = mandl_position(r, c);
            node(i as u32, lat, lon, true)
        })
        .collect();
    let mut edges = Vec::new();
    for &(u, v) in &MANDL_LINKS {
        let len = if (u, v) == (7, 14) { 1400.0 } else { 1000.0 };
        edges.extend(two_way(u, v, len, len * 0.18));
    }
    let road = RoadGraph::new(nodes, edges).unwrap();
    let routes = vec![
        Route::new(RouteId(1), RouteKind::Original, ids(&[0, 1, 2, 5, 7, 14]), &road).unwrap(),
        Route::new(RouteId(2), RouteKind::Original, ids(&[11, 3, 4, 6, 9, 13]), &road).unwrap(),
        Route::new(RouteId(3), RouteKind::Original, ids(&[12, 9, 10, 8, 7]), &road).unwrap(),
        Route::new(RouteId(4), RouteKind::TramFixed, ids(&[0, 1, 3, 11, 12]), &road).unwrap(),
    ];
    let station = |id: u32, at: usize| {
        let (r, c) = MANDL_CELLS[at];
        let (lat, lon) = mandl_position(r, c);
        Station {
            id: StationId(id),
            lat: lat + 0.0009,
            lon,
        }
    };
    let metro = MetroNetwork::new(
        vec![station(0, 6), station(1, 9)],
        vec![
            MetroEdge {
                from: StationId(0),
                to: StationId(1),
                line: "red".into(),
                length_m: 1000.0,
            },
            MetroEdge {
                from: StationId(1),
                to: StationId(0),
                line: "red".into(),
                length_m: 1000.0,
            },
        ],
    )
    .unwrap();
    Mandl {
        road,
        routes,
        metro,
    }
}

/// Five nodes: A(0) -> B(1) -> E(4) is one 900 s route, A -> C(2) (300 s)
/// and C -> E (400 s) are two more. D(3) is a plain junction. Zones on a
/// 1x3 grid: {A}, {B, C}, {E}.
pub fn detour_fixture(penalty_s: f64) -> EvalContext {
    let road = RoadGraph::new(
        vec![
            node(0, 38.70, -9.20, true),
            node(1, 38.71, -9.18, true),
            node(2, 38.69, -9.18, true),
            node(3, 38.70, -9.17, false),
            node(4, 38.70, -9.16, true),
        ],
        [
            edge(0, 1, 2500.0, 450.0),
            edge(1, 4, 2500.0, 450.0),
            edge(0, 2, 2000.0, 300.0),
            edge(2, 4, 2200.0, 400.0),
            edge(2, 3, 1500.0, 300.0),
            edge(3, 4, 900.0, 200.0),
            edge(4, 0, 3500.0, 700.0),
        ]
        .to_vec(),
    )
    .unwrap();
    let routes = vec![
        Route::new(RouteId(1), RouteKind::Original, ids(&[0, 1, 4]), &road).unwrap(),
        Route::new(RouteId(2), RouteKind::Original, ids(&[0, 2]), &road).unwrap(),
        Route::new(RouteId(3), RouteKind::Original, ids(&[2, 4]), &road).unwrap(),
    ];
    let demand = DemandMatrix::new([((ZoneId(0), ZoneId(2)), 1.0)]).unwrap();
    context(
        road,
        MetroNetwork::default(),
        routes,
        demand,
        1,
        3,
        EvalSettings {
            penalty_s,
            ..EvalSettings::default()
        },
    )
}

/// Small seeded synthetic instance with metro, tram and walking transfers.
pub fn small_city(seed: u64, junctions: usize, stops: usize, grid: u32, settings: EvalSettings) -> EvalContext {
    let city = synth_city(seed, junctions, stops, grid).unwrap();
    let params = SynthRoutesParams {
        original_lines: 4,
        tram_lines: 1,
        min_span_m: 700.0,
    };
    let routes = synth_routes(&city.road, seed, &params).unwrap();
    let walk = WalkNetwork::build(&city.road, &city.metro, 300.0);
    let (pool, _) = RoutePool::new(routes, OPEN_BOUNDS).unwrap();
    EvalContext::new(
        Arc::new(city.road),
        city.metro,
        walk,
        city.grid,
        city.demand,
        Arc::new(pool),
        settings,
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Routing oracle: depth-first enumeration of every trip that never revisits a
// (place, carrier) state, with branch and bound on the generalized cost. The
// multigraph is rebuilt here from the raw layers, not taken from the crate.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Via {
    Bus(RouteId),
    Metro(usize),
    Walk,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleTrip {
    pub cost: f64,
    pub t_inv: f64,
    pub transfers: u32,
}

struct Oracle {
    out: HashMap<Place, Vec<(Place, Via, f64)>>,
    penalty: f64,
    max_transfers: u32,
}

fn place_position(ctx: &EvalContext, p: Place) -> LatLon {
    match p {
        Place::Stop(s) => ctx.road.position(s),
        Place::Station(s) => ctx.metro.station(s).unwrap().position(),
    }
}

fn zone_members(ctx: &EvalContext, zone: ZoneId) -> Vec<(Place, f64)> {
    let centre = ctx.grid.center(zone);
    let mut places: Vec<Place> = ctx.road.stops().map(|n| Place::Stop(n.id)).collect();
    places.extend(ctx.metro.stations.iter().map(|s| Place::Station(s.id)));
    places
        .into_iter()
        .filter(|&p| ctx.grid.zone_of(place_position(ctx, p)) == zone)
        .map(|p| {
            let pos = place_position(ctx, p);
            let d = haversine_m(centre.lat, centre.lon, pos.lat, pos.lon);
            (p, d / WALK_SPEED_MPS)
        })
        .collect()
}

impl Oracle {
    fn new(ctx: &EvalContext, network: &BusNetwork) -> Self {
        let mut out: HashMap<Place, Vec<(Place, Via, f64)>> = HashMap::new();
        let mut selected: Vec<RouteId> = network.route_ids();
        selected.extend(
            ctx.pool
                .routes()
                .iter()
                .filter(|r| r.kind == RouteKind::TramFixed)
                .map(|r| r.id),
        );
        for id in selected {
            let r = ctx.pool.get(id).unwrap();
            for (k, pair) in r.stops.windows(2).enumerate() {
                out.entry(Place::Stop(pair[0])).or_default().push((
                    Place::Stop(pair[1]),
                    Via::Bus(id),
                    r.leg_times_s[k],
                ));
            }
        }
        let mut lines: Vec<&str> = ctx.metro.edges.iter().map(|e| e.line.as_str()).collect();
        lines.sort_unstable();
        lines.dedup();
        for e in &ctx.metro.edges {
            let line = lines.binary_search(&e.line.as_str()).unwrap();
            out.entry(Place::Station(e.from)).or_default().push((
                Place::Station(e.to),
                Via::Metro(line),
                e.length_m / METRO_SPEED_MPS,
            ));
        }
        for e in &ctx.walk.edges {
            out.entry(e.from)
                .or_default()
                .push((e.to, Via::Walk, walk_time_s(e.length_m)));
        }
        Self {
            out,
            penalty: ctx.settings.penalty_s,
            max_transfers: ctx.settings.max_transfers,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        at: Place,
        via: Option<Via>,
        cost: f64,
        t_inv: f64,
        k: u32,
        visited: &mut Vec<(Place, Option<Via>)>,
        exits: &HashMap<Place, f64>,
        best: &mut Option<OracleTrip>,
    ) {
        if best.is_some_and(|b| cost >= b.cost + 1e-9) {
            return;
        }
        if matches!(via, Some(Via::Bus(_)) | Some(Via::Metro(_))) {
            if let Some(&egress) = exits.get(&at) {
                let total = cost + egress;
                if best.is_none_or(|b| total < b.cost - 1e-9) {
                    *best = Some(OracleTrip {
                        cost: total,
                        t_inv,
                        transfers: k,
                    });
                }
            }
        }
        let Some(edges) = self.out.get(&at) else {
            return;
        };
        for &(to, next, time) in edges {
            let vehicle = next != Via::Walk;
            let (extra, nk) = match via {
                None if vehicle => (0.0, k),
                None => continue,
                Some(Via::Walk) if !vehicle => continue,
                Some(Via::Walk) => (self.penalty, k + 1),
                Some(cur) if vehicle && cur == next => (0.0, k),
                Some(_) if vehicle => (self.penalty, k + 1),
                Some(_) => (self.penalty, k),
            };
            if nk > self.max_transfers {
                continue;
            }
            // a walk must be followed by a boarding, which costs a transfer
            if !vehicle && k + 1 > self.max_transfers {
                continue;
            }
            let state = (to, Some(next));
            if visited.contains(&state) {
                continue;
            }
            visited.push(state);
            let inv = if vehicle { t_inv + time } else { t_inv };
            self.dfs(to, Some(next), cost + time + extra, inv, nk, visited, exits, best);
            visited.pop();
        }
    }
}

/// Cheapest trip between two zones by exhaustive enumeration.
pub fn oracle_trip(ctx: &EvalContext, network: &BusNetwork, s: ZoneId, t: ZoneId) -> Option<OracleTrip> {
    if s == t {
        return None;
    }
    let oracle = Oracle::new(ctx, network);
    let exits: HashMap<Place, f64> = zone_members(ctx, t).into_iter().collect();
    let mut best = None;
    for (start, access) in zone_members(ctx, s) {
        let mut visited = vec![(start, None)];
        oracle.dfs(start, None, access, 0.0, 0, &mut visited, &exits, &mut best);
    }
    best
}

// ---------------------------------------------------------------------------
// Sorting oracle.

pub fn brute_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Fronts by repeatedly peeling the non-dominated subset, O(M N^3).
pub fn brute_fronts(points: &[[f64; 4]]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| brute_dominates(&points[j], &points[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Crowding distance by positional counting rather than sorting: a point's
/// neighbours along each objective are the points one rank below and above
/// it under the (value, index) order.
pub fn brute_crowding(front: &[[f64; 4]]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut d = vec![0.0; n];
    for m in 0..4 {
        let before = |j: usize, i: usize| front[j][m] < front[i][m] || (front[j][m] == front[i][m] && j < i);
        let pos: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| before(j, i)).count()).collect();
        let at = |p: usize| (0..n).find(|&i| pos[i] == p).unwrap();
        let (lo, hi) = (front[at(0)][m], front[at(n - 1)][m]);
        if hi <= lo {
            continue;
        }
        for i in 0..n {
            if pos[i] == 0 || pos[i] == n - 1 {
                d[i] = f64::INFINITY;
            } else if d[i].is_finite() {
                d[i] += (front[at(pos[i] + 1)][m] - front[at(pos[i] - 1)][m]) / (hi - lo);
            }
        }
    }
    d
}

/// Every genome over `ids` with between `lo` and `hi` routes.
pub fn all_genomes(ids: &[RouteId], lo: usize, hi: usize) -> Vec<BusNetwork> {
    let n = ids.len();
    (1u32..1 << n)
        .filter(|mask| (lo..=hi).contains(&(mask.count_ones() as usize)))
        .map(|mask| BusNetwork::new((0..n).filter(|i| mask >> i & 1 == 1).map(|i| ids[i])))
        .collect()
}

/// Small city whose pool holds exactly `2 * lines` selectable routes and
/// one fixed tram route.
pub fn lines_city(seed: u64, lines: usize) -> EvalContext {
    let city = synth_city(seed, 48, 18, 3).unwrap();
    let params = SynthRoutesParams {
        original_lines: lines,
        tram_lines: 1,
        min_span_m: 700.0,
    };
    let routes = synth_routes(&city.road, seed, &params).unwrap();
    let walk = WalkNetwork::build(&city.road, &city.metro, 300.0);
    let (pool, _) = RoutePool::new(routes, OPEN_BOUNDS).unwrap();
    assert_eq!(pool.mutable_ids().len(), 2 * lines);
    EvalContext::new(
        Arc::new(city.road),
        city.metro,
        walk,
        city.grid,
        city.demand,
        Arc::new(pool),
        EvalSettings::default(),
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Clustering oracle.

/// Dense random graph with many short links between stops.
pub fn random_road(seed: u64) -> RoadGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(5..30u32);
    let nodes = (0..n)
        .map(|i| node(i, 38.7 + rng.gen_range(0.0..0.01), -9.2 + rng.gen_range(0.0..0.01), rng.gen_bool(0.7)))
        .collect();
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(n..3 * n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push(edge(u, v, rng.gen_range(10.0..250.0), 30.0));
        }
    }
    RoadGraph::new(nodes, edges).unwrap()
}

/// Components of the undirected graph of qualifying edges, computed apart
/// from the crate.
pub fn expected_clusters(road: &RoadGraph, threshold: f64) -> BTreeSet<BTreeSet<NodeId>> {
    let mut indeg: BTreeMap<NodeId, usize> = BTreeMap::new();
    for e in road.edges() {
        *indeg.entry(e.to).or_default() += 1;
    }
    let qualifies = |e: &RoadEdge| {
        e.from != e.to
            && road.is_stop(e.from)
            && road.is_stop(e.to)
            && e.length_m < threshold
            && indeg.get(&e.to) == Some(&1)
    };
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for e in road.edges().iter().filter(|e| qualifies(e)) {
        adj.entry(e.from).or_default().push(e.to);
        adj.entry(e.to).or_default().push(e.from);
    }
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for s in road.stops().map(|n| n.id) {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = BTreeSet::from([s]);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in adj.get(&x).into_iter().flatten() {
                if seen.insert(y) {
                    comp.insert(y);
                    stack.push(y);
                }
            }
        }
        out.insert(comp);
    }
    out
}

