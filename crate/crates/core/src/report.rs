//! Comparison of an optimized network against the original one: objective
//! deltas, per-pair travel time and transfer differences, and GeoJSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::evaluation::{evaluate, plan_all, EvalContext, ObjectiveVector, OdOutcome};
use crate::network::{BusNetwork, LegCache, RoadGraph, RouteId, ZoneId};
use crate::routegen::RoutePool;

/// Differences up to this many minutes are treated as noise and left out of
/// the travel time histogram.
pub const DEFAULT_IGNORE_MIN: f64 = 2.5;
pub const DEFAULT_BIN_MIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    pub ignore_min: f64,
    pub bin_min: f64,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            ignore_min: DEFAULT_IGNORE_MIN,
            bin_min: DEFAULT_BIN_MIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveDelta {
    pub objective: String,
    pub original: f64,
    pub optimized: f64,
    pub delta: f64,
    /// Relative change in percent; absent when the original value is zero.
    pub delta_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBin {
    /// Bin bounds in minutes, optimized minus original; negative is faster.
    pub from_min: f64,
    pub to_min: f64,
    pub od_pairs: usize,
    pub passengers: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBin {
    pub delta: i64,
    pub od_pairs: usize,
    pub passengers: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChange {
    pub origin: ZoneId,
    pub destination: ZoneId,
    pub passengers: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub original_routes: usize,
    pub optimized_routes: usize,
    pub objectives: Vec<ObjectiveDelta>,
    pub travel_time_hist: Vec<TimeBin>,
    pub transfer_hist: Vec<TransferBin>,
    /// Pairs covered by both networks.
    pub compared_pairs: usize,
    pub newly_covered: Vec<PairChange>,
    pub newly_uncovered: Vec<PairChange>,
}

pub fn objective_deltas(original: &ObjectiveVector, optimized: &ObjectiveVector) -> Vec<ObjectiveDelta> {
    ObjectiveVector::NAMES
        .iter()
        .zip(original.to_array().into_iter().zip(optimized.to_array()))
        .map(|(name, (a, b))| ObjectiveDelta {
            objective: (*name).to_owned(),
            original: a,
            optimized: b,
            delta: b - a,
            delta_pct: (a != 0.0).then(|| 100.0 * (b - a) / a),
        })
        .collect()
}

pub fn compare(
    original: &BusNetwork,
    optimized: &BusNetwork,
    ctx: &EvalContext,
    settings: &ReportSettings,
) -> Result<Report> {
    let before = plan_all(original, ctx)?;
    let after = plan_all(optimized, ctx)?;
    let objectives = objective_deltas(&evaluate(original, ctx)?, &evaluate(optimized, ctx)?);
    let mut report = Report {
        original_routes: original.len(),
        optimized_routes: optimized.len(),
        objectives,
        travel_time_hist: Vec::new(),
        transfer_hist: Vec::new(),
        compared_pairs: 0,
        newly_covered: Vec::new(),
        newly_uncovered: Vec::new(),
    };
    let mut time_bins: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    let mut transfer_bins: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for (a, b) in before.iter().zip(&after) {
        debug_assert_eq!((a.origin, a.destination), (b.origin, b.destination));
        let change = |o: &OdOutcome| PairChange {
            origin: o.origin,
            destination: o.destination,
            passengers: o.passengers,
        };
        match (&a.trip, &b.trip) {
            (None, Some(_)) => report.newly_covered.push(change(a)),
            (Some(_), None) => report.newly_uncovered.push(change(a)),
            (None, None) => {}
            (Some(ta), Some(tb)) => {
                report.compared_pairs += 1;
                let dt = (tb.travel_time_s() - ta.travel_time_s()) / 60.0;
                if dt.abs() > settings.ignore_min {
                    let e = time_bins.entry((dt / settings.bin_min).floor() as i64).or_default();
                    e.0 += 1;
                    e.1 += a.passengers;
                }
                let dk = tb.transfers() as i64 - ta.transfers() as i64;
                if dk != 0 {
                    let e = transfer_bins.entry(dk).or_default();
                    e.0 += 1;
                    e.1 += a.passengers;
                }
            }
        }
    }
    report.travel_time_hist = time_bins
        .into_iter()
        .map(|(k, (od_pairs, passengers))| TimeBin {
            from_min: k as f64 * settings.bin_min,
            to_min: (k + 1) as f64 * settings.bin_min,
            od_pairs,
            passengers,
        })
        .collect();
    report.transfer_hist = transfer_bins
        .into_iter()
        .map(|(delta, (od_pairs, passengers))| TransferBin {
            delta,
            od_pairs,
            passengers,
        })
        .collect();
    Ok(report)
}

/// GeoJSON feature collection with one line string per route, following the
/// road path between stops. Fixed routes are included when `with_fixed`.
pub fn network_geojson(bus: &BusNetwork, pool: &RoutePool, road: &RoadGraph, with_fixed: bool) -> Value {
    let mut ids: Vec<RouteId> = bus.route_ids();
    if with_fixed {
        ids.extend_from_slice(pool.fixed_ids());
    }
    let mut cache = LegCache::default();
    let features: Vec<Value> = ids
        .into_iter()
        .filter_map(|id| pool.get(id))
        .map(|route| {
            let mut coords: Vec<[f64; 2]> = Vec::new();
            for pair in route.stops.windows(2) {
                let path = cache
                    .tree(road, pair[0])
                    .path_to(road, pair[1])
                    .unwrap_or_else(|| pair.to_vec());
                let skip = usize::from(!coords.is_empty());
                coords.extend(path.iter().skip(skip).map(|&n| {
                    let p = road.position(n);
                    [p.lon, p.lat]
                }));
            }
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": coords },
                "properties": {
                    "route_id": route.id,
                    "kind": route.kind,
                    "length_m": route.length_m,
                    "stops": route.stops,
                },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}
