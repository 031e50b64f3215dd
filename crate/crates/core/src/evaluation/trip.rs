use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::EvalContext;
use crate::network::{Carrier, CompleteNetwork, Place, RouteId, ZoneId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Bus,
    Metro,
    Walk,
}

/// Serializable carrier label: a bus route, a metro line or walking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierTag {
    Route(RouteId),
    Line(String),
    Walk,
}

/// Maximal run of consecutive edges sharing one carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub kind: StageKind,
    pub carrier: CarrierTag,
    pub legs: Vec<(Place, Place)>,
    pub duration_s: f64,
}

/// The planned journey between two zones. Times exclude the transfer
/// penalty, which only shapes the choice of path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub origin: ZoneId,
    pub destination: ZoneId,
    pub stages: Vec<Stage>,
    pub t_inv_s: f64,
    pub t_wal_s: f64,
    pub t_wai_s: f64,
    pub generalized_cost_s: f64,
}

impl Trip {
    pub fn travel_time_s(&self) -> f64 {
        self.t_inv_s + self.t_wai_s + self.t_wal_s
    }

    pub fn walk_stages(&self) -> usize {
        self.stages.iter().filter(|s| s.kind == StageKind::Walk).count()
    }

    /// Stage count minus walking stages minus one.
    pub fn transfers(&self) -> usize {
        self.stages.len() - self.walk_stages() - 1
    }
}

/// Costs of the best arrival at a destination zone, without materializing
/// the stage list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripSummary {
    pub generalized_cost_s: f64,
    pub t_inv_s: f64,
    pub t_wal_s: f64,
    pub transfers: u32,
}

/// Label of the carrier-aware search. `None` marks the access walk from the
/// origin zone centroid, before the first boarding.
type LabelKey = (u32, Option<Carrier>, u8);

#[derive(Debug, Clone)]
struct Label {
    key: LabelKey,
    cost: f64,
    t_inv: f64,
    t_wal: f64,
    pred: Option<(usize, u32)>,
}

/// All time-optimal labels reachable from one origin zone, respecting the
/// transfer budget. One search serves every destination of that origin.
pub struct OriginSearch<'a> {
    net: &'a CompleteNetwork,
    ctx: &'a EvalContext,
    origin: ZoneId,
    labels: Vec<Label>,
    best_arrival: Vec<Option<usize>>,
}

#[derive(Debug, PartialEq)]
struct QueueEntry {
    cost: f64,
    label: usize,
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.label.cmp(&self.label))
    }
}

impl<'a> OriginSearch<'a> {
    pub fn run(net: &'a CompleteNetwork, ctx: &'a EvalContext, origin: ZoneId) -> Self {
        let penalty = ctx.settings.penalty_s;
        let max_transfers = ctx.settings.max_transfers.min(u8::MAX as u32 - 1) as u8;
        let mut labels: Vec<Label> = Vec::new();
        let mut lookup: HashMap<LabelKey, usize> = HashMap::new();
        let mut settled: HashMap<(u32, Option<Carrier>), Vec<(u8, f64)>> = HashMap::new();
        let mut best_arrival: Vec<Option<usize>> = vec![None; net.index().len()];
        let mut heap = BinaryHeap::new();

        let mut relax = |labels: &mut Vec<Label>,
                         heap: &mut BinaryHeap<QueueEntry>,
                         candidate: Label| {
            match lookup.get(&candidate.key) {
                Some(&i) if labels[i].cost <= candidate.cost => {}
                Some(&i) => {
                    labels[i] = candidate;
                    heap.push(QueueEntry {
                        cost: labels[i].cost,
                        label: i,
                    });
                }
                None => {
                    let i = labels.len();
                    lookup.insert(candidate.key, i);
                    heap.push(QueueEntry {
                        cost: candidate.cost,
                        label: i,
                    });
                    labels.push(candidate);
                }
            }
        };

        for &(place, walk_s) in ctx.attachments(origin) {
            relax(
                &mut labels,
                &mut heap,
                Label {
                    key: (place, None, 0),
                    cost: walk_s,
                    t_inv: 0.0,
                    t_wal: walk_s,
                    pred: None,
                },
            );
        }

        let mut done = vec![false; 0];
        while let Some(QueueEntry { cost, label }) = heap.pop() {
            if done.len() < labels.len() {
                done.resize(labels.len(), false);
            }
            if done[label] || cost > labels[label].cost {
                continue;
            }
            done[label] = true;
            let current = labels[label].clone();
            let (place, carrier, k) = current.key;

            // a label is dominated by one at the same place and carrier that
            // used fewer transfers and cost no more
            let history = settled.entry((place, carrier)).or_default();
            if history.iter().any(|&(kk, c)| kk < k && c <= cost) {
                continue;
            }
            history.push((k, cost));

            if carrier.is_some_and(Carrier::is_vehicle) {
                let slot = &mut best_arrival[place as usize];
                if slot.is_none_or(|b| labels[b].cost > cost) {
                    *slot = Some(label);
                }
            }

            for (edge_id, edge) in net.outgoing(place) {
                let next = edge.carrier;
                let (extra, next_k) = match (carrier, next.is_vehicle()) {
                    (None, true) => (0.0, k),
                    (None, false) => continue,
                    (Some(Carrier::Walk), false) => continue,
                    (Some(Carrier::Walk), true) => (penalty, k + 1),
                    (Some(c), true) if c == next => (0.0, k),
                    (Some(_), true) => (penalty, k + 1),
                    // walking only pays off if another boarding fits the budget
                    (Some(_), false) if k < max_transfers => (penalty, k),
                    (Some(_), false) => continue,
                };
                if next_k > max_transfers {
                    continue;
                }
                let (t_inv, t_wal) = if next.is_vehicle() {
                    (current.t_inv + edge.time_s, current.t_wal)
                } else {
                    (current.t_inv, current.t_wal + edge.time_s)
                };
                relax(
                    &mut labels,
                    &mut heap,
                    Label {
                        key: (edge.to, Some(next), next_k),
                        cost: cost + edge.time_s + extra,
                        t_inv,
                        t_wal,
                        pred: Some((label, edge_id)),
                    },
                );
            }
        }

        Self {
            net,
            ctx,
            origin,
            labels,
            best_arrival,
        }
    }

    fn best_exit(&self, destination: ZoneId) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for &(place, walk_s) in self.ctx.attachments(destination) {
            let Some(label) = self.best_arrival[place as usize] else {
                continue;
            };
            let total = self.labels[label].cost + walk_s;
            if best.is_none_or(|(_, c, _)| total < c) {
                best = Some((label, total, walk_s));
            }
        }
        best.map(|(label, _, walk_s)| (label, walk_s))
    }

    pub fn summary_to(&self, destination: ZoneId) -> Option<TripSummary> {
        if destination == self.origin {
            return None;
        }
        let (label, egress_s) = self.best_exit(destination)?;
        let l = &self.labels[label];
        Some(TripSummary {
            generalized_cost_s: l.cost + egress_s,
            t_inv_s: l.t_inv,
            t_wal_s: l.t_wal + egress_s,
            transfers: l.key.2 as u32,
        })
    }

    pub fn trip_to(&self, destination: ZoneId) -> Option<Trip> {
        let summary = self.summary_to(destination)?;
        let (label, _) = self.best_exit(destination)?;
        let mut edges = Vec::new();
        let mut cursor = label;
        while let Some((prev, edge)) = self.labels[cursor].pred {
            edges.push(edge);
            cursor = prev;
        }
        edges.reverse();

        let index = self.net.index();
        let mut stages: Vec<Stage> = Vec::new();
        for k in edges {
            let e = &self.net.edges()[k as usize];
            let leg = (index.place(e.from), index.place(e.to));
            match stages.last_mut() {
                Some(stage) if stage.carrier == self.tag(e.carrier) && e.carrier.is_vehicle() => {
                    stage.legs.push(leg);
                    stage.duration_s += e.time_s;
                }
                _ => stages.push(Stage {
                    kind: match e.carrier {
                        Carrier::Route(_) => StageKind::Bus,
                        Carrier::Line(_) => StageKind::Metro,
                        Carrier::Walk => StageKind::Walk,
                    },
                    carrier: self.tag(e.carrier),
                    legs: vec![leg],
                    duration_s: e.time_s,
                }),
            }
        }
        Some(Trip {
            origin: self.origin,
            destination,
            stages,
            t_inv_s: summary.t_inv_s,
            t_wal_s: summary.t_wal_s,
            t_wai_s: 0.0,
            generalized_cost_s: summary.generalized_cost_s,
        })
    }

    fn tag(&self, carrier: Carrier) -> CarrierTag {
        match carrier {
            Carrier::Route(r) => CarrierTag::Route(r),
            Carrier::Line(l) => CarrierTag::Line(self.net.index().line_label(l).to_owned()),
            Carrier::Walk => CarrierTag::Walk,
        }
    }
}

/// Minimum generalized-cost trip between two zones, or `None` when the pair
/// is not covered within the transfer budget.
pub fn plan_trip(net: &CompleteNetwork, ctx: &EvalContext, origin: ZoneId, destination: ZoneId) -> Option<Trip> {
    if origin == destination {
        return None;
    }
    OriginSearch::run(net, ctx, origin).trip_to(destination)
}
