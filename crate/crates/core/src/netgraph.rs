//! Network model, demands, and exact minimum Steiner trees.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::sinkset::{PacketId, SinkSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    /// Node `E_i` observing source `i` (zero-based).
    Source(usize),
    /// Sink `S_j` (zero-based internally).
    Sink(usize),
    Intermediate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub role: NodeRole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected connected graph with nonnegative edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    source_nodes: Vec<usize>,
    sink_nodes: Vec<usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Network {
    /// Build a network from nodes and `(u, v, weight)` edges given by node id.
    pub fn new(nodes: Vec<Node>, edges: &[(&str, &str, f64)]) -> Result<Self> {
        let lookup = |id: &str| {
            nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| Error::InvalidNetwork(format!("edge references unknown node {id}")))
        };
        let edges = edges
            .iter()
            .map(|&(u, v, weight)| {
                Ok(Edge {
                    u: lookup(u)?,
                    v: lookup(v)?,
                    weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Network::from_indexed(nodes, edges)
    }

    pub fn from_indexed(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidNetwork("no nodes".into()));
        }
        for (k, a) in nodes.iter().enumerate() {
            if nodes[k + 1..].iter().any(|b| b.id == a.id) {
                return Err(Error::InvalidNetwork(format!("duplicate node id {}", a.id)));
            }
        }
        let index_list = |pick: fn(NodeRole) -> Option<usize>, what: &str| -> Result<Vec<usize>> {
            let mut found: BTreeMap<usize, usize> = BTreeMap::new();
            for (k, n) in nodes.iter().enumerate() {
                if let Some(i) = pick(n.role) {
                    if found.insert(i, k).is_some() {
                        return Err(Error::InvalidNetwork(format!(
                            "{what} {i} appears on more than one node"
                        )));
                    }
                }
            }
            if found.keys().enumerate().any(|(k, &i)| k != i) {
                return Err(Error::InvalidNetwork(format!("{what} indices must be contiguous")));
            }
            Ok(found.into_values().collect())
        };
        let source_nodes = index_list(
            |r| match r {
                NodeRole::Source(i) => Some(i),
                _ => None,
            },
            "source",
        )?;
        let sink_nodes = index_list(
            |r| match r {
                NodeRole::Sink(j) => Some(j),
                _ => None,
            },
            "sink",
        )?;
        if sink_nodes.len() > 31 {
            return Err(Error::InvalidNetwork("too many sinks".into()));
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            if e.u >= nodes.len() || e.v >= nodes.len() {
                return Err(Error::InvalidNetwork("edge endpoint out of range".into()));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "edge {}-{} has weight {}",
                    nodes[e.u].id, nodes[e.v].id, e.weight
                )));
            }
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        let net = Network {
            nodes,
            edges,
            source_nodes,
            sink_nodes,
            adjacency,
        };
        if net.shortest_paths_from(0).iter().any(|d| d.is_infinite()) {
            return Err(Error::InvalidNetwork("graph is not connected".into()));
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_sources(&self) -> usize {
        self.source_nodes.len()
    }

    pub fn num_sinks(&self) -> usize {
        self.sink_nodes.len()
    }

    pub fn source_node(&self, source: usize) -> Option<usize> {
        self.source_nodes.get(source).copied()
    }

    pub fn sink_node(&self, sink: usize) -> Option<usize> {
        self.sink_nodes.get(sink).copied()
    }

    /// Dijkstra distances from node `start` to every node.
    pub fn shortest_paths_from(&self, start: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }

        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[start] = 0.0;
        heap.push(Item(0.0, start));
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        dist
    }

    fn all_pairs(&self) -> Vec<Vec<f64>> {
        (0..self.nodes.len()).map(|s| self.shortest_paths_from(s)).collect()
    }
}

/// Exact minimum Steiner tree weight over the node set `terminals`
/// (Dreyfus-Wagner). `dist` holds all-pairs shortest path distances.
fn dreyfus_wagner(dist: &[Vec<f64>], root: usize, terminals: &[usize]) -> f64 {
    let t = terminals.len();
    if t == 0 {
        return 0.0;
    }
    let n = dist.len();
    let full = (1usize << t) - 1;
    // best[S][v]: minimum tree connecting terminals in S together with v.
    let mut best = vec![vec![f64::INFINITY; n]; 1 << t];
    for (k, &term) in terminals.iter().enumerate() {
        best[1 << k].clone_from(&dist[term]);
    }
    for s in 1..=full {
        if s.count_ones() < 2 {
            continue;
        }
        // Merge two subtrees at a junction node u.
        let mut merged = vec![f64::INFINITY; n];
        let low = s & s.wrapping_neg();
        let mut sub = (s - 1) & s;
        while sub > 0 {
            // Only consider splits containing the lowest bit to halve the work.
            if sub & low != 0 {
                let rest = s ^ sub;
                for u in 0..n {
                    let c = best[sub][u] + best[rest][u];
                    if c < merged[u] {
                        merged[u] = c;
                    }
                }
            }
            sub = (sub - 1) & s;
        }
        // Connect v to the junction by a shortest path.
        let row = &mut best[s];
        for v in 0..n {
            let mut b = f64::INFINITY;
            for u in 0..n {
                let c = dist[v][u] + merged[u];
                if c < b {
                    b = c;
                }
            }
            row[v] = b;
        }
    }
    best[full][root]
}

/// Minimum total weight of a tree joining source `root`'s node to every sink
/// in `terminals`.
pub fn steiner_weight(net: &Network, root: usize, terminals: SinkSet) -> Result<f64> {
    let root_node = net
        .source_node(root)
        .ok_or_else(|| Error::InvalidNetwork(format!("unknown source {root}")))?;
    if terminals.is_empty() {
        return Err(Error::InvalidParameter("terminal set is empty".into()));
    }
    let nodes = terminals
        .iter()
        .map(|j| {
            net.sink_node(j)
                .ok_or_else(|| Error::InvalidNetwork(format!("unknown sink {}", j + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let dist = net.all_pairs();
    Ok(dreyfus_wagner(&dist, root_node, &nodes))
}

/// Sinks requesting each source and sources requested by each sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandMap {
    num_sources: usize,
    sigma: Vec<BTreeSet<usize>>,
    pi: Vec<SinkSet>,
}

impl DemandMap {
    /// `sigma[j]` lists the (zero-based) sources requested by sink `j`.
    pub fn new(num_sources: usize, sigma: Vec<Vec<usize>>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::InvalidDemands("no sinks".into()));
        }
        if sigma.len() > 31 {
            return Err(Error::InvalidDemands("too many sinks".into()));
        }
        let mut pi = vec![SinkSet::EMPTY; num_sources];
        let mut sets = Vec::with_capacity(sigma.len());
        for (j, wanted) in sigma.into_iter().enumerate() {
            if wanted.is_empty() {
                return Err(Error::InvalidDemands(format!("sink {} requests no source", j + 1)));
            }
            let set: BTreeSet<usize> = wanted.iter().copied().collect();
            if set.len() != wanted.len() {
                return Err(Error::InvalidDemands(format!("sink {} lists a source twice", j + 1)));
            }
            for &i in &set {
                if i >= num_sources {
                    return Err(Error::InvalidDemands(format!(
                        "sink {} requests unknown source {i}",
                        j + 1
                    )));
                }
                pi[i] = pi[i].union(SinkSet::singleton(j));
            }
            sets.push(set);
        }
        Ok(DemandMap {
            num_sources,
            sigma: sets,
            pi,
        })
    }

    pub fn num_sources(&self) -> usize {
        self.num_sources
    }

    pub fn num_sinks(&self) -> usize {
        self.sigma.len()
    }

    pub fn all_sinks(&self) -> SinkSet {
        SinkSet::full(self.sigma.len())
    }

    /// Sources requested by sink `j`.
    pub fn sigma(&self, sink: usize) -> &BTreeSet<usize> {
        &self.sigma[sink]
    }

    /// Sinks requesting source `i`.
    pub fn pi(&self, source: usize) -> SinkSet {
        self.pi[source]
    }

    fn check_against(&self, net: &Network) -> Result<()> {
        if net.num_sources() != self.num_sources || net.num_sinks() != self.num_sinks() {
            return Err(Error::InvalidDemands(format!(
                "network has {} sources and {} sinks, demands describe {} and {}",
                net.num_sources(),
                net.num_sinks(),
                self.num_sources,
                self.num_sinks()
            )));
        }
        Ok(())
    }
}

/// Steiner weight `d_i(K)` multiplying the rate of each packet.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EffectiveCostTable {
    weights: BTreeMap<PacketId, f64>,
}

impl EffectiveCostTable {
    pub fn get(&self, packet: PacketId) -> Option<f64> {
        self.weights.get(&packet).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PacketId, f64)> + '_ {
        self.weights.iter().map(|(&p, &w)| (p, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Effective cost of every packet. With `restrict_no_helpers` only packets
/// addressed to subsets of the sinks requesting the source are listed.
pub fn effective_costs(net: &Network, demands: &DemandMap, restrict_no_helpers: bool) -> Result<EffectiveCostTable> {
    demands.check_against(net)?;
    let dist = net.all_pairs();
    let mut weights = BTreeMap::new();
    for i in 0..demands.num_sources() {
        let ambient = if restrict_no_helpers {
            demands.pi(i)
        } else {
            demands.all_sinks()
        };
        let root = net.source_nodes[i];
        for k in ambient.nonempty_subsets() {
            let terms: Vec<usize> = k.iter().map(|j| net.sink_nodes[j]).collect();
            weights.insert(PacketId::new(i, k), dreyfus_wagner(&dist, root, &terms));
        }
    }
    Ok(EffectiveCostTable { weights })
}

/// Broadcast weight of each source: a single tree reaching every sink that
/// requests it. Sources nobody requests are omitted.
pub fn broadcast_costs(net: &Network, demands: &DemandMap) -> Result<BTreeMap<usize, f64>> {
    demands.check_against(net)?;
    let dist = net.all_pairs();
    Ok((0..demands.num_sources())
        .filter(|&i| !demands.pi(i).is_empty())
        .map(|i| {
            let terms: Vec<usize> = demands.pi(i).iter().map(|j| net.sink_nodes[j]).collect();
            (i, dreyfus_wagner(&dist, net.source_nodes[i], &terms))
        })
        .collect())
}
