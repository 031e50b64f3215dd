use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::NodeId;
use crate::error::{Error, Result};
use crate::geo::LatLon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNode {
    pub id: NodeId,
    pub lat: f64,
    pub lon: f64,
    pub is_stop: bool,
}

impl RoadNode {
    pub fn position(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    #[serde(rename = "u")]
    pub from: NodeId,
    #[serde(rename = "v")]
    pub to: NodeId,
    pub length_m: f64,
    pub time_s: f64,
}

/// Directed road substrate. Node ids are dense: node `i` has id `i`.
#[derive(Debug, Clone)]
pub struct RoadGraph {
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
    outgoing: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
}

impl RoadGraph {
    pub fn new(mut nodes: Vec<RoadNode>, edges: Vec<RoadEdge>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        for (i, n) in nodes.iter().enumerate() {
            if n.id.index() != i {
                return Err(Error::InvalidGraph(format!(
                    "node ids must be dense from 0, found {} at position {i}",
                    n.id
                )));
            }
            if !n.lat.is_finite() || !n.lon.is_finite() {
                return Err(Error::InvalidGraph(format!("node {} has no position", n.id)));
            }
        }
        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut in_degree = vec![0; nodes.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.from.index() >= nodes.len() || e.to.index() >= nodes.len() {
                return Err(Error::InvalidGraph(format!(
                    "edge {}->{} references a missing node",
                    e.from, e.to
                )));
            }
            if !(e.length_m > 0.0) || !(e.time_s > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {}->{} must have positive length and time",
                    e.from, e.to
                )));
            }
            outgoing[e.from.index()].push(k);
            in_degree[e.to.index()] += 1;
        }
        Ok(Self {
            nodes,
            edges,
            outgoing,
            in_degree,
        })
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&RoadNode> {
        self.nodes.get(id.index())
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn is_stop(&self, id: NodeId) -> bool {
        self.node(id).is_some_and(|n| n.is_stop)
    }

    pub fn position(&self, id: NodeId) -> LatLon {
        self.nodes[id.index()].position()
    }

    pub fn stops(&self) -> impl Iterator<Item = &RoadNode> + '_ {
        self.nodes.iter().filter(|n| n.is_stop)
    }

    pub fn stop_count(&self) -> usize {
        self.stops().count()
    }

    pub fn outgoing(&self, id: NodeId) -> impl Iterator<Item = &RoadEdge> + '_ {
        self.outgoing[id.index()].iter().map(|&k| &self.edges[k])
    }

    pub fn in_degree(&self, id: NodeId) -> usize {
        self.in_degree[id.index()]
    }

    /// Time-optimal paths from `source` to every node. Ties on time are broken
    /// by length, then by node id, so the tree is deterministic.
    pub fn shortest_paths(&self, source: NodeId) -> ShortestPathTree {
        let n = self.nodes.len();
        let mut time = vec![f64::INFINITY; n];
        let mut length = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        time[source.index()] = 0.0;
        length[source.index()] = 0.0;
        heap.push(HeapEntry {
            time: 0.0,
            length: 0.0,
            node: source.index(),
        });
        while let Some(HeapEntry { node, .. }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            for &k in &self.outgoing[node] {
                let e = &self.edges[k];
                let v = e.to.index();
                if done[v] {
                    continue;
                }
                let t = time[node] + e.time_s;
                let l = length[node] + e.length_m;
                if (t, l) < (time[v], length[v]) {
                    time[v] = t;
                    length[v] = l;
                    pred[v] = Some(k);
                    heap.push(HeapEntry {
                        time: t,
                        length: l,
                        node: v,
                    });
                }
            }
        }
        ShortestPathTree {
            source,
            time,
            length,
            pred,
        }
    }

    /// True when every node reaches every other node.
    pub fn is_strongly_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let forward = self.reach(|k| (self.edges[k].from, self.edges[k].to));
        let backward = self.reach(|k| (self.edges[k].to, self.edges[k].from));
        forward && backward
    }

    fn reach(&self, ends: impl Fn(usize) -> (NodeId, NodeId)) -> bool {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for k in 0..self.edges.len() {
            let (a, b) = ends(k);
            adj[a.index()].push(b.index());
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    source: NodeId,
    time: Vec<f64>,
    length: Vec<f64>,
    pred: Vec<Option<usize>>,
}

impl ShortestPathTree {
    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn time_to(&self, target: NodeId) -> Option<f64> {
        let t = self.time[target.index()];
        t.is_finite().then_some(t)
    }

    pub fn length_to(&self, target: NodeId) -> Option<f64> {
        let l = self.length[target.index()];
        l.is_finite().then_some(l)
    }

    /// Node sequence from the source to `target`, both included.
    pub fn path_to(&self, road: &RoadGraph, target: NodeId) -> Option<Vec<NodeId>> {
        self.time_to(target)?;
        let mut path = vec![target];
        let mut cur = target;
        while let Some(k) = self.pred[cur.index()] {
            cur = road.edges[k].from;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Debug)]
struct HeapEntry {
    time: f64,
    length: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.length.total_cmp(&self.length))
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, is_stop: bool) -> RoadNode {
        RoadNode {
            id: NodeId(id),
            lat: 38.7 + id as f64 * 0.001,
            lon: -9.1,
            is_stop,
        }
    }

    fn edge(u: u32, v: u32, length_m: f64, time_s: f64) -> RoadEdge {
        RoadEdge {
            from: NodeId(u),
            to: NodeId(v),
            length_m,
            time_s,
        }
    }

    #[test]
    fn rejects_sparse_ids_and_bad_edges() {
        assert!(RoadGraph::new(vec![node(0, true), node(2, true)], vec![]).is_err());
        assert!(RoadGraph::new(vec![node(0, true)], vec![edge(0, 1, 1.0, 1.0)]).is_err());
        let nodes = vec![node(0, true), node(1, true)];
        assert!(RoadGraph::new(nodes.clone(), vec![edge(0, 1, 0.0, 1.0)]).is_err());
        assert!(RoadGraph::new(nodes, vec![edge(0, 1, 1.0, -1.0)]).is_err());
    }

    #[test]
    fn time_optimal_path_preferred_over_short_one() {
        let nodes = (0..4).map(|i| node(i, i == 0 || i == 3)).collect();
        let edges = vec![
            edge(0, 1, 100.0, 100.0),
            edge(1, 3, 100.0, 100.0),
            edge(0, 2, 400.0, 40.0),
            edge(2, 3, 400.0, 40.0),
        ];
        let g = RoadGraph::new(nodes, edges).unwrap();
        let spt = g.shortest_paths(NodeId(0));
        assert_eq!(spt.time_to(NodeId(3)), Some(80.0));
        assert_eq!(spt.length_to(NodeId(3)), Some(800.0));
        assert_eq!(
            spt.path_to(&g, NodeId(3)).unwrap(),
            vec![NodeId(0), NodeId(2), NodeId(3)]
        );
    }

    #[test]
    fn connectivity() {
        let nodes: Vec<_> = (0..3).map(|i| node(i, true)).collect();
        let chain = vec![edge(0, 1, 1.0, 1.0), edge(1, 2, 1.0, 1.0)];
        let g = RoadGraph::new(nodes.clone(), chain.clone()).unwrap();
        assert!(!g.is_strongly_connected());
        let mut cycle = chain;
        cycle.push(edge(2, 0, 1.0, 1.0));
        assert!(RoadGraph::new(nodes, cycle).unwrap().is_strongly_connected());
    }
}
