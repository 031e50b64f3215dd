//! Graph and route types, and assembly of the complete multimodal network
//! evaluated for every candidate bus network.

mod complete;
mod layers;
mod road;
mod route;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use complete::{assemble_complete, Carrier, CompleteEdge, CompleteNetwork, PlaceIndex};
pub use layers::{LineId, MetroEdge, MetroNetwork, Station, WalkEdge, WalkNetwork};
pub use road::{RoadEdge, RoadGraph, RoadNode, ShortestPathTree};
pub use route::{route_length, BusNetwork, LegCache, Route, RouteGeometry, RouteKind};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Road graph node. Stops are road nodes flagged `is_stop`.
    NodeId,
    "n"
);
id_type!(RouteId, "r");
id_type!(StationId, "m");
id_type!(
    /// Row-major cell index of the origin-destination grid.
    ZoneId,
    "z"
);

/// Stops are identified by the road node they sit on.
pub type StopId = NodeId;

/// A boarding point of the multimodal network: a bus stop or a metro station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Stop(StopId),
    Station(StationId),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Stop(s) => write!(f, "{s}"),
            Place::Station(s) => write!(f, "{s}"),
        }
    }
}
