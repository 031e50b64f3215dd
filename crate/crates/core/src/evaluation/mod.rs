//! Trip planning over the complete multimodal network and the four network
//! objectives: total length, unsatisfied demand, in-vehicle time and average
//! transfers.

mod trip;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use trip::{plan_trip, CarrierTag, OriginSearch, Stage, StageKind, Trip, TripSummary};

use crate::error::{Error, Result};
use crate::geo;
use crate::network::{assemble_complete, BusNetwork, CompleteNetwork, MetroNetwork, PlaceIndex, RoadGraph, WalkNetwork, ZoneId};
use crate::preprocessing::{DemandMatrix, ZoneGrid};
use crate::routegen::RoutePool;

/// Objective values of one network; every component is minimized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Total route length, meters.
    pub tl: f64,
    /// Fraction of demand without a trip within the transfer budget.
    pub ud: f64,
    /// In-vehicle passenger-seconds over covered pairs.
    pub ivt: f64,
    /// Transfers per covered passenger.
    pub ant: f64,
}

impl ObjectiveVector {
    pub const NAMES: [&'static str; 4] = ["tl", "ud", "ivt", "ant"];

    pub fn new(tl: f64, ud: f64, ivt: f64, ant: f64) -> Self {
        Self { tl, ud, ivt, ant }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.tl, self.ud, self.ivt, self.ant]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    /// Added to the generalized cost at every stage change.
    pub penalty_s: f64,
    /// Pairs needing more transfers than this count as unsatisfied.
    pub max_transfers: u32,
    /// Count fixed tram routes in TL.
    pub tl_include_fixed: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            penalty_s: 300.0,
            max_transfers: 3,
            tl_include_fixed: true,
        }
    }
}

/// Everything a candidate is evaluated against. Immutable and shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub road: Arc<RoadGraph>,
    pub metro: MetroNetwork,
    pub walk: WalkNetwork,
    pub grid: ZoneGrid,
    pub demand: DemandMatrix,
    pub pool: Arc<RoutePool>,
    pub settings: EvalSettings,
    index: Arc<PlaceIndex>,
    attachments: BTreeMap<ZoneId, Vec<(u32, f64)>>,
}

impl EvalContext {
    pub fn new(
        road: Arc<RoadGraph>,
        metro: MetroNetwork,
        walk: WalkNetwork,
        grid: ZoneGrid,
        demand: DemandMatrix,
        pool: Arc<RoutePool>,
        settings: EvalSettings,
    ) -> Result<Self> {
        if !(settings.penalty_s >= 0.0) {
            return Err(Error::Config(format!(
                "transfer penalty must be non-negative, got {}",
                settings.penalty_s
            )));
        }
        for ((s, t), _) in demand.entries() {
            if !grid.contains_zone(s) || !grid.contains_zone(t) {
                return Err(Error::InvalidInput(format!(
                    "demand pair {s}->{t} lies outside the {}x{} grid",
                    grid.rows, grid.cols
                )));
            }
        }
        let index = Arc::new(PlaceIndex::new(&road, &metro));
        let mut attachments: BTreeMap<ZoneId, Vec<(u32, f64)>> = BTreeMap::new();
        for i in 0..index.len() as u32 {
            let position = index.position(i);
            let zone = grid.zone_of(position);
            let walk_s = geo::walk_time_s(grid.center(zone).distance_m(&position));
            attachments.entry(zone).or_default().push((i, walk_s));
        }
        Ok(Self {
            road,
            metro,
            walk,
            grid,
            demand,
            pool,
            settings,
            index,
            attachments,
        })
    }

    pub fn with_demand(&self, demand: DemandMatrix) -> Self {
        Self {
            demand,
            ..self.clone()
        }
    }

    pub fn with_settings(&self, settings: EvalSettings) -> Self {
        Self {
            settings,
            ..self.clone()
        }
    }

    pub fn place_index(&self) -> &Arc<PlaceIndex> {
        &self.index
    }

    /// Stops and stations inside a zone with the walking time from the zone
    /// centroid.
    pub fn attachments(&self, zone: ZoneId) -> &[(u32, f64)] {
        self.attachments.get(&zone).map_or(&[], Vec::as_slice)
    }

    pub fn assemble(&self, bus: &BusNetwork) -> Result<CompleteNetwork> {
        assemble_complete(bus, &self.metro, &self.walk, &self.pool, &self.index)
    }

    pub fn total_length(&self, bus: &BusNetwork) -> f64 {
        let selected: f64 = bus.routes().iter().map(|&id| self.pool.length_of(id)).sum();
        if self.settings.tl_include_fixed {
            selected + self.pool.fixed_length_m()
        } else {
            selected
        }
    }
}

/// Anything that scores a genome on the four objectives.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &BusNetwork) -> ObjectiveVector;
}

impl Evaluator for EvalContext {
    fn evaluate(&self, genome: &BusNetwork) -> ObjectiveVector {
        evaluate(genome, self).expect("genomes only reference pool routes")
    }
}

pub fn evaluate(bus: &BusNetwork, ctx: &EvalContext) -> Result<ObjectiveVector> {
    let net = ctx.assemble(bus)?;
    let mut total = 0.0;
    let mut covered = 0.0;
    let mut ivt = 0.0;
    let mut transfers = 0.0;
    let mut current: Option<(ZoneId, OriginSearch<'_>)> = None;
    for (s, t, q) in ctx.demand.pairs() {
        total += q;
        if current.as_ref().is_none_or(|(o, _)| *o != s) {
            current = Some((s, OriginSearch::run(&net, ctx, s)));
        }
        let (_, search) = current.as_ref().expect("search for origin");
        if let Some(summary) = search.summary_to(t) {
            covered += q;
            ivt += summary.t_inv_s * q;
            transfers += summary.transfers as f64 * q;
        }
    }
    Ok(ObjectiveVector {
        tl: ctx.total_length(bus),
        ud: if total > 0.0 { (1.0 - covered / total).max(0.0) } else { 1.0 },
        ivt,
        ant: if covered > 0.0 { transfers / covered } else { 0.0 },
    })
}

/// Planned trip (or its absence) for one demand pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdOutcome {
    pub origin: ZoneId,
    pub destination: ZoneId,
    pub passengers: f64,
    pub trip: Option<Trip>,
}

/// Plans every demand pair and keeps the full stage breakdown.
pub fn plan_all(bus: &BusNetwork, ctx: &EvalContext) -> Result<Vec<OdOutcome>> {
    let net = ctx.assemble(bus)?;
    let mut out = Vec::new();
    let mut current: Option<(ZoneId, OriginSearch<'_>)> = None;
    for (s, t, q) in ctx.demand.pairs() {
        if current.as_ref().is_none_or(|(o, _)| *o != s) {
            current = Some((s, OriginSearch::run(&net, ctx, s)));
        }
        let (_, search) = current.as_ref().expect("search for origin");
        out.push(OdOutcome {
            origin: s,
            destination: t,
            passengers: q,
            trip: search.trip_to(t),
        });
    }
    Ok(out)
}
