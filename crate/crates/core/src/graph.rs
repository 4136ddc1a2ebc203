//! Undirected network graph with hop-count distances to nodes and edges.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// A node or an edge that events may occur on.
///
/// The derived ordering (all nodes before all edges, then by id) is the canonical
/// target order used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Node(NodeId),
    Edge(EdgeId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(NodeId, NodeId)>,
    edge_index: HashMap<(NodeId, NodeId), usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, inserting the node if it is new.
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return NodeId(id);
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        NodeId(id)
    }

    /// Adds `count` nodes named by their dense index.
    pub fn with_numbered_nodes(count: usize) -> Self {
        let mut builder = Self::new();
        for i in 0..count {
            builder.node(&i.to_string());
        }
        builder
    }

    pub fn edge(&mut self, a: &str, b: &str) -> Result<EdgeId> {
        let a = self.node(a);
        let b = self.node(b);
        self.edge_between(a, b)
    }

    pub fn edge_between(&mut self, a: NodeId, b: NodeId) -> Result<EdgeId> {
        for id in [a, b] {
            if id.0 >= self.names.len() {
                return Err(Error::UnknownNodeId(id.0));
            }
        }
        if a == b {
            return Err(Error::SelfLoop(self.names[a.0].clone()));
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if self.edge_index.contains_key(&key) {
            return Err(Error::DuplicateEdge(self.names[key.0 .0].clone(), self.names[key.1 .0].clone()));
        }
        let id = self.edges.len();
        self.edges.push(key);
        self.edge_index.insert(key, id);
        Ok(EdgeId(id))
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_index.contains_key(&key)
    }

    pub fn build(self) -> NetworkGraph {
        let mut adjacency = vec![Vec::new(); self.names.len()];
        for &(a, b) in &self.edges {
            adjacency[a.0].push(b);
            adjacency[b.0].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        NetworkGraph { names: self.names, index: self.index, edges: self.edges, edge_index: self.edge_index, adjacency }
    }
}

/// Immutable undirected simple graph. Node ids are dense `0..n`; the original
/// string names are kept for output.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(NodeId, NodeId)>,
    edge_index: HashMap<(NodeId, NodeId), usize>,
    adjacency: Vec<Vec<NodeId>>,
}

impl NetworkGraph {
    /// Graph on nodes `0..n` (named by index) with the given edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut builder = GraphBuilder::with_numbered_nodes(n);
        for &(a, b) in edges {
            builder.edge_between(NodeId(a), NodeId(b))?;
        }
        Ok(builder.build())
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len()).map(NodeId)
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, NodeId, NodeId)> + '_ {
        self.edges.iter().enumerate().map(|(i, &(a, b))| (EdgeId(i), a, b))
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.names[node.0]
    }

    pub fn node_id(&self, name: &str) -> Result<NodeId> {
        self.index.get(name).map(|&i| NodeId(i)).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn edge_id(&self, a: NodeId, b: NodeId) -> Result<EdgeId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_index.get(&key).map(|&i| EdgeId(i)).ok_or_else(|| {
            let name = |n: NodeId| self.names.get(n.0).cloned().unwrap_or_else(|| n.to_string());
            Error::UnknownEdge(name(a), name(b))
        })
    }

    /// Endpoints of `edge` with the smaller id first.
    pub fn endpoints(&self, edge: EdgeId) -> Result<(NodeId, NodeId)> {
        self.edges.get(edge.0).copied().ok_or(Error::UnknownEdgeId(edge.0))
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.0]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    pub fn contains_edge(&self, a: NodeId, b: NodeId) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_index.contains_key(&key)
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node.0 < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownNodeId(node.0))
        }
    }

    pub fn check_target(&self, target: Target) -> Result<()> {
        match target {
            Target::Node(n) => self.check_node(n),
            Target::Edge(e) => self.endpoints(e).map(|_| ()),
        }
    }

    /// Every node as a target, in id order.
    pub fn all_node_targets(&self) -> Vec<Target> {
        self.nodes().map(Target::Node).collect()
    }

    /// Every edge as a target, in id order.
    pub fn all_edge_targets(&self) -> Vec<Target> {
        (0..self.edges.len()).map(|i| Target::Edge(EdgeId(i))).collect()
    }

    /// Hop distance from `source` to every node; `None` when unreachable.
    pub fn bfs_distances(&self, source: NodeId) -> Result<Vec<Option<usize>>> {
        self.check_node(source)?;
        Ok(self.bfs_within(source, usize::MAX))
    }

    /// Breadth-first search that stops expanding past `limit` hops. Nodes farther
    /// than `limit` are reported as `None`.
    pub(crate) fn bfs_within(&self, source: NodeId, limit: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source.0] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.0].expect("queued nodes have a distance");
            if du >= limit {
                continue;
            }
            for &v in &self.adjacency[u.0] {
                if dist[v.0].is_none() {
                    dist[v.0] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// `d(u, e) = max(d(u, i), d(u, j))` for `e = (i, j)`.
    pub fn node_edge_distance(&self, u: NodeId, edge: EdgeId) -> Result<Option<usize>> {
        let (a, b) = self.endpoints(edge)?;
        let dist = self.bfs_distances(u)?;
        Ok(max_distance(dist[a.0], dist[b.0]))
    }

    pub(crate) fn target_distance(&self, dist: &[Option<usize>], target: Target) -> Option<usize> {
        match target {
            Target::Node(n) => dist[n.0],
            Target::Edge(e) => {
                let (a, b) = self.edges[e.0];
                max_distance(dist[a.0], dist[b.0])
            }
        }
    }

    /// Targets (in input order) within distance `lambda` of a device at `u`.
    pub fn covered_targets(&self, u: NodeId, lambda: usize, targets: &[Target]) -> Result<Vec<Target>> {
        self.check_node(u)?;
        for &t in targets {
            self.check_target(t)?;
        }
        let dist = self.bfs_within(u, lambda);
        Ok(targets.iter().copied().filter(|&t| self.target_distance(&dist, t).is_some_and(|d| d <= lambda)).collect())
    }

    /// Display key for a target: the node name, or `a-b` for an edge.
    pub fn target_key(&self, target: Target) -> String {
        match target {
            Target::Node(n) => self.names[n.0].clone(),
            Target::Edge(e) => {
                let (a, b) = self.edges[e.0];
                format!("{}-{}", self.names[a.0], self.names[b.0])
            }
        }
    }

    /// Whether any three nodes are pairwise adjacent.
    pub fn has_triangle(&self) -> bool {
        self.edges.iter().any(|&(a, b)| {
            let (na, nb) = (&self.adjacency[a.0], &self.adjacency[b.0]);
            let (mut i, mut j) = (0, 0);
            while i < na.len() && j < nb.len() {
                match na[i].cmp(&nb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => return true,
                }
            }
            false
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count() == 0 {
            return true;
        }
        self.bfs_within(NodeId(0), usize::MAX).iter().all(Option::is_some)
    }
}

fn max_distance(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    Some(a?.max(b?))
}
