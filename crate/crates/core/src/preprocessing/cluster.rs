use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geo::LatLon;
use crate::network::{NodeId, RoadGraph, RoadNode};

pub const DEFAULT_CLUSTER_THRESHOLD_M: f64 = 100.0;

/// One applied merge: stop `from` joined the cluster of stop `to` through the
/// road edge `from -> to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
}

/// Raw stop to cluster representative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterMap {
    pub threshold_m: f64,
    pub assignment: BTreeMap<NodeId, NodeId>,
    pub representatives: BTreeMap<NodeId, LatLon>,
    pub merges: Vec<Merge>,
}

impl ClusterMap {
    pub fn cluster_of(&self, stop: NodeId) -> NodeId {
        self.assignment.get(&stop).copied().unwrap_or(stop)
    }

    pub fn cluster_count(&self) -> usize {
        self.representatives.len()
    }

    /// Maps a raw stop sequence onto clusters, collapsing consecutive repeats.
    pub fn remap_stops(&self, stops: &[NodeId]) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::with_capacity(stops.len());
        for &s in stops {
            let c = self.cluster_of(s);
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.merges.is_empty() && self.assignment.iter().all(|(a, b)| a == b)
    }
}

/// Merges stops `u` and `v` whenever the road edge `u -> v` is shorter than
/// `threshold_m` and `v` has in-degree one, closing transitively. Each cluster
/// is represented by its most downstream stop; merged stops stay in the road
/// graph as plain junctions so road geometry is untouched.
pub fn cluster_stops(road: &RoadGraph, threshold_m: f64) -> (RoadGraph, ClusterMap) {
    let n = road.node_count();
    let mut candidates: Vec<(f64, NodeId, NodeId)> = road
        .edges()
        .iter()
        .filter(|e| {
            e.from != e.to
                && road.is_stop(e.from)
                && road.is_stop(e.to)
                && e.length_m < threshold_m
                && road.in_degree(e.to) == 1
        })
        .map(|e| (e.length_m, e.from, e.to))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut parent: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();
    for (length_m, u, v) in candidates {
        let (ru, rv) = (find(&mut parent, u.index()), find(&mut parent, v.index()));
        if ru != rv {
            parent[ru] = rv;
            merges.push(Merge {
                from: u,
                to: v,
                length_m,
            });
        }
    }

    let mut map = ClusterMap {
        threshold_m,
        merges,
        ..ClusterMap::default()
    };
    for stop in road.stops() {
        let rep = NodeId(find(&mut parent, stop.id.index()) as u32);
        map.assignment.insert(stop.id, rep);
        map.representatives.insert(rep, road.position(rep));
    }

    let nodes: Vec<RoadNode> = road
        .nodes()
        .iter()
        .map(|node| RoadNode {
            is_stop: node.is_stop && map.representatives.contains_key(&node.id),
            ..node.clone()
        })
        .collect();
    let clustered = RoadGraph::new(nodes, road.edges().to_vec())
        .expect("clustering preserves a valid graph");
    (clustered, map)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Re-checks every recorded merge against the pre-merge graph. Returns the
/// list of violations, empty when the clustering is sound.
pub fn audit_clustering(raw: &RoadGraph, map: &ClusterMap) -> Vec<String> {
    let mut problems = Vec::new();
    for m in &map.merges {
        let edge = raw
            .outgoing(m.from)
            .filter(|e| e.to == m.to)
            .map(|e| e.length_m)
            .fold(f64::INFINITY, f64::min);
        if !edge.is_finite() {
            problems.push(format!("merge {}->{} has no road edge", m.from, m.to));
        } else if !(edge < map.threshold_m) {
            problems.push(format!(
                "merge {}->{} uses a {edge} m edge, threshold {}",
                m.from, m.to, map.threshold_m
            ));
        }
        if raw.in_degree(m.to) != 1 {
            problems.push(format!(
                "merge {}->{}: in-degree of {} is {}",
                m.from,
                m.to,
                m.to,
                raw.in_degree(m.to)
            ));
        }
        if !raw.is_stop(m.from) || !raw.is_stop(m.to) {
            problems.push(format!("merge {}->{} joins a non-stop", m.from, m.to));
        }
    }
    for stop in raw.stops() {
        if !map.assignment.contains_key(&stop.id) {
            problems.push(format!("stop {} has no cluster", stop.id));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::RoadEdge;

    fn road(n: u32, stops: &[u32], edges: &[(u32, u32, f64)]) -> RoadGraph {
        let nodes = (0..n)
            .map(|i| RoadNode {
                id: NodeId(i),
                lat: 38.7 + i as f64 * 1e-4,
                lon: -9.1,
                is_stop: stops.contains(&i),
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(u, v, l)| RoadEdge {
                from: NodeId(u),
                to: NodeId(v),
                length_m: l,
                time_s: l / 5.0,
            })
            .collect();
        RoadGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn close_pair_with_single_entry_merges() {
        let g = road(2, &[0, 1], &[(0, 1, 50.0)]);
        let (clustered, map) = cluster_stops(&g, 100.0);
        assert_eq!(map.cluster_of(NodeId(0)), NodeId(1));
        assert_eq!(map.cluster_of(NodeId(1)), NodeId(1));
        assert_eq!(clustered.stop_count(), 1);
        assert_eq!(map.representatives[&NodeId(1)], g.position(NodeId(1)));
    }

    #[test]
    fn distant_pair_stays_apart() {
        let g = road(2, &[0, 1], &[(0, 1, 150.0)]);
        let (_, map) = cluster_stops(&g, 100.0);
        assert!(map.is_identity());
        assert_eq!(map.cluster_count(), 2);
    }

    #[test]
    fn chain_collapses_to_last_stop() {
        let g = road(3, &[0, 1, 2], &[(0, 1, 60.0), (1, 2, 60.0)]);
        let (clustered, map) = cluster_stops(&g, 100.0);
        for s in 0..3 {
            assert_eq!(map.cluster_of(NodeId(s)), NodeId(2));
        }
        assert_eq!(clustered.stop_count(), 1);
        assert!(audit_clustering(&g, &map).is_empty());
    }

    #[test]
    fn second_entry_blocks_merge() {
        // node 2 also enters stop 1, so in-degree of 1 is two
        let g = road(3, &[0, 1], &[(0, 1, 60.0), (2, 1, 500.0)]);
        let (_, map) = cluster_stops(&g, 100.0);
        assert!(map.is_identity());
    }

    #[test]
    fn junction_between_stops_blocks_merge() {
        let g = road(3, &[0, 2], &[(0, 1, 30.0), (1, 2, 30.0)]);
        let (_, map) = cluster_stops(&g, 100.0);
        assert!(map.is_identity());
    }

    #[test]
    fn reclustering_is_identity() {
        let g = road(4, &[0, 1, 2, 3], &[(0, 1, 60.0), (1, 2, 60.0), (2, 3, 400.0)]);
        let (once, _) = cluster_stops(&g, 100.0);
        let (twice, map) = cluster_stops(&once, 100.0);
        assert!(map.is_identity());
        assert_eq!(once.stop_count(), twice.stop_count());
    }

    #[test]
    fn remap_collapses_repeats() {
        let g = road(3, &[0, 1, 2], &[(0, 1, 60.0), (1, 2, 600.0)]);
        let (_, map) = cluster_stops(&g, 100.0);
        assert_eq!(
            map.remap_stops(&[NodeId(0), NodeId(1), NodeId(2)]),
            vec![NodeId(1), NodeId(2)]
        );
    }

    #[test]
    fn empty_graph() {
        let g = road(0, &[], &[]);
        let (c, map) = cluster_stops(&g, 100.0);
        assert_eq!(c.node_count(), 0);
        assert!(map.is_identity());
    }
}
