//! Directed traffic network: nodes, links and simple-path queries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(id: u32) -> Self {
        NodeId(id)
    }
}

/// Congestion level of a link. Each level is driven with one standard cycle:
/// `Low` uses HWFET, `Medium` uses UDDS and `High` uses NYC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficMode {
    Low,
    Medium,
    High,
}

impl TrafficMode {
    pub const ALL: [TrafficMode; 3] = [TrafficMode::Low, TrafficMode::Medium, TrafficMode::High];

    pub fn drive_cycle(self) -> &'static str {
        match self {
            TrafficMode::Low => "HWFET",
            TrafficMode::Medium => "UDDS",
            TrafficMode::High => "NYC",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrafficMode::Low => "low",
            TrafficMode::Medium => "medium",
            TrafficMode::High => "high",
        }
    }
}

impl fmt::Display for TrafficMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TrafficMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(TrafficMode::Low),
            "medium" => Ok(TrafficMode::Medium),
            "high" => Ok(TrafficMode::High),
            other => Err(format!("unknown traffic mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub length_mi: f64,
    pub avg_speed_mph: f64,
    pub mode: TrafficMode,
}

impl Link {
    pub fn new(
        from: impl Into<NodeId>,
        to: impl Into<NodeId>,
        length_mi: f64,
        avg_speed_mph: f64,
        mode: TrafficMode,
    ) -> Result<Self> {
        let link = Link {
            from: from.into(),
            to: to.into(),
            length_mi,
            avg_speed_mph,
            mode,
        };
        link.validate()?;
        Ok(link)
    }

    fn validate(&self) -> Result<()> {
        let reason = if self.from == self.to {
            Some("self-loop")
        } else if !(self.length_mi.is_finite() && self.length_mi > 0.0) {
            Some("length must be positive")
        } else if !(self.avg_speed_mph.is_finite() && self.avg_speed_mph > 0.0) {
            Some("speed must be positive")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::InvalidLink {
                from: self.from,
                to: self.to,
                reason: reason.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Hours needed to traverse the link at its average speed.
    pub fn travel_time(&self) -> f64 {
        self.length_mi / self.avg_speed_mph
    }
}

/// Ordered node sequence of a route.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<NodeId>);

impl Path {
    pub fn new(nodes: impl IntoIterator<Item = impl Into<NodeId>>) -> Self {
        Path(nodes.into_iter().map(Into::into).collect())
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    pub fn is_simple(&self) -> bool {
        self.0.iter().collect::<BTreeSet<_>>().len() == self.0.len()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Immutable directed graph without parallel links or self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    nodes: BTreeSet<NodeId>,
    links: Vec<Link>,
    by_arc: HashMap<(NodeId, NodeId), usize>,
    outgoing: BTreeMap<NodeId, Vec<usize>>,
    incoming: BTreeMap<NodeId, Vec<usize>>,
}

impl NetworkGraph {
    /// Builds a graph whose node set is the set of link endpoints.
    pub fn new(links: Vec<Link>) -> Result<Self> {
        Self::with_nodes(std::iter::empty::<NodeId>(), links)
    }

    /// Builds a graph that additionally contains the given (possibly isolated) nodes.
    pub fn with_nodes(
        nodes: impl IntoIterator<Item = impl Into<NodeId>>,
        links: Vec<Link>,
    ) -> Result<Self> {
        let mut node_set: BTreeSet<NodeId> = nodes.into_iter().map(Into::into).collect();
        let mut by_arc = HashMap::with_capacity(links.len());
        let mut outgoing: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        let mut incoming: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for (idx, link) in links.iter().enumerate() {
            link.validate()?;
            if by_arc.insert((link.from, link.to), idx).is_some() {
                return Err(Error::ParallelLink(link.from, link.to));
            }
            node_set.insert(link.from);
            node_set.insert(link.to);
            outgoing.entry(link.from).or_default().push(idx);
            incoming.entry(link.to).or_default().push(idx);
        }
        // Ascending neighbour order makes DFS output lexicographic.
        for list in outgoing.values_mut() {
            list.sort_by_key(|&i| links[i].to);
        }
        for list in incoming.values_mut() {
            list.sort_by_key(|&i| links[i].from);
        }
        Ok(NetworkGraph {
            nodes: node_set,
            links,
            by_arc,
            outgoing,
            incoming,
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    pub fn max_node_id(&self) -> Option<NodeId> {
        self.nodes.iter().next_back().copied()
    }

    fn require(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    pub fn link_index(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.by_arc.get(&(from, to)).copied()
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Option<&Link> {
        self.link_index(from, to).map(|i| &self.links[i])
    }

    /// Indices of links leaving `node`, ordered by head node id.
    pub fn out_links(&self, node: NodeId) -> &[usize] {
        self.outgoing.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Indices of links entering `node`, ordered by tail node id.
    pub fn in_links(&self, node: NodeId) -> &[usize] {
        self.incoming.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn out_neighbors(&self, node: NodeId) -> Result<BTreeSet<NodeId>> {
        self.require(node)?;
        Ok(self.out_links(node).iter().map(|&i| self.links[i].to).collect())
    }

    pub fn in_neighbors(&self, node: NodeId) -> Result<BTreeSet<NodeId>> {
        self.require(node)?;
        Ok(self.in_links(node).iter().map(|&i| self.links[i].from).collect())
    }

    /// Resolves every consecutive pair of `path` to its link, checking that the
    /// path is simple and non-empty.
    pub fn path_links(&self, path: &Path) -> Result<Vec<&Link>> {
        let invalid = |reason: String| Error::InvalidPath {
            path: path.to_string(),
            reason,
        };
        if path.is_empty() {
            return Err(invalid("empty path".into()));
        }
        for &node in path.nodes() {
            if !self.contains(node) {
                return Err(invalid(format!("unknown node {node}")));
            }
        }
        if !path.is_simple() {
            return Err(invalid("repeated node".into()));
        }
        path.arcs()
            .map(|(a, b)| {
                self.link(a, b)
                    .ok_or_else(|| invalid(format!("no link {a}->{b}")))
            })
            .collect()
    }

    pub fn path_travel_time(&self, path: &Path) -> Result<f64> {
        Ok(self.path_links(path)?.iter().map(|l| l.travel_time()).sum())
    }

    /// All simple `origin -> dest` paths in lexicographic node order.
    ///
    /// Fails with [`Error::TooManyPaths`] as soon as more than `max_paths`
    /// paths are found.
    pub fn enumerate_simple_paths(
        &self,
        origin: NodeId,
        dest: NodeId,
        max_paths: usize,
    ) -> Result<Vec<Path>> {
        self.require(origin)?;
        self.require(dest)?;
        if origin == dest {
            return Err(Error::InvalidParameter(
                "origin and destination must differ".into(),
            ));
        }
        if max_paths == 0 {
            return Err(Error::InvalidParameter("max_paths must be at least 1".into()));
        }
        let mut found = Vec::new();
        let mut stack = vec![origin];
        let mut on_path = BTreeSet::from([origin]);
        self.dfs_paths(dest, max_paths, &mut stack, &mut on_path, &mut found)?;
        Ok(found)
    }

    fn dfs_paths(
        &self,
        dest: NodeId,
        max_paths: usize,
        stack: &mut Vec<NodeId>,
        on_path: &mut BTreeSet<NodeId>,
        found: &mut Vec<Path>,
    ) -> Result<()> {
        let here = *stack.last().expect("stack starts with origin");
        for &li in self.out_links(here) {
            let next = self.links[li].to;
            if on_path.contains(&next) {
                continue;
            }
            stack.push(next);
            if next == dest {
                if found.len() == max_paths {
                    return Err(Error::TooManyPaths { limit: max_paths });
                }
                found.push(Path(stack.clone()));
            } else {
                on_path.insert(next);
                self.dfs_paths(dest, max_paths, stack, on_path, found)?;
                on_path.remove(&next);
            }
            stack.pop();
        }
        Ok(())
    }

    /// Copy of the graph without the given nodes and their incident links.
    pub fn without_nodes(&self, removed: &BTreeSet<NodeId>) -> NetworkGraph {
        let links = self
            .links
            .iter()
            .filter(|l| !removed.contains(&l.from) && !removed.contains(&l.to))
            .copied()
            .collect();
        let nodes = self.nodes.iter().filter(|n| !removed.contains(n)).copied();
        NetworkGraph::with_nodes(nodes, links).expect("subgraph of a valid graph is valid")
    }
}
