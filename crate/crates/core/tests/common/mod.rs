//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use dirnet_core::netgraph::Node;
use dirnet_core::{
    DemandMap, JointPmf, LinearConstraint, LinearProgram, Network, NodeRole, Provenance, RateRegion, RateVar, SinkSet,
    Variable,
};
use rand::Rng;

/// Binary entropy straight from the definition.
pub fn hb_direct(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Crossover of two cascaded binary symmetric channels, by enumerating the
/// four flip patterns.
pub fn cascade_direct(p: f64, q: f64) -> f64 {
    let mut flip = 0.0;
    for a in [false, true] {
        for b in [false, true] {
            let pr = if a { p } else { 1.0 - p } * if b { q } else { 1.0 - q };
            if a != b {
                flip += pr;
            }
        }
    }
    flip
}

/// Entropy of a probability vector.
pub fn entropy_direct(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn node(id: &str, role: NodeRole) -> Node {
    Node { id: id.into(), role }
}

/// `E0` reaches both sinks through a collector `C`; `E1`, `E2` hang off
/// their own sink.
pub fn fig2_network(w0: f64, w1: f64, w2: f64, w11: f64, w22: f64) -> Network {
    Network::new(
        vec![
            node("E0", NodeRole::Source(0)),
            node("E1", NodeRole::Source(1)),
            node("E2", NodeRole::Source(2)),
            node("C", NodeRole::Intermediate),
            node("S1", NodeRole::Sink(0)),
            node("S2", NodeRole::Sink(1)),
        ],
        &[
            ("E0", "C", w0),
            ("C", "S1", w1),
            ("C", "S2", w2),
            ("E1", "S1", w11),
            ("E2", "S2", w22),
        ],
    )
    .unwrap()
}

pub fn fig2_demands() -> DemandMap {
    DemandMap::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap()
}

/// Joint pmf over `alphabets.len()` sources with random entries; roughly one
/// in four tables gets some zero entries.
pub fn random_pmf<R: Rng>(rng: &mut R, alphabets: &[usize]) -> JointPmf {
    let size: usize = alphabets.iter().product();
    let sparse = rng.random_bool(0.25);
    let mut w: Vec<f64> = (0..size)
        .map(|_| {
            if sparse && rng.random_bool(0.3) {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    let vars = alphabets
        .iter()
        .enumerate()
        .map(|(i, &a)| Variable::source(format!("X{i}"), i, a))
        .collect();
    JointPmf::new(vars, w.iter().map(|x| x / total).collect()).unwrap()
}

/// Random demands: every sink requests a nonempty subset of the sources.
pub fn random_demands<R: Rng>(rng: &mut R, sources: usize, sinks: usize) -> DemandMap {
    let sigma = (0..sinks)
        .map(|_| {
            let mask = rng.random_range(1u32..(1 << sources));
            (0..sources).filter(|i| mask & (1 << i) != 0).collect()
        })
        .collect();
    DemandMap::new(sources, sigma).unwrap()
}

/// Minimum weight of an edge subset joining all `terminals`, by trying every
/// subset and checking connectivity with a union-find.
pub fn brute_force_steiner(nodes: usize, edges: &[(usize, usize, f64)], terminals: &[usize]) -> f64 {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << edges.len()) {
        let mut parent: Vec<usize> = (0..nodes).collect();
        let mut weight = 0.0;
        for (k, &(u, v, w)) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                weight += w;
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, terminals[0]);
        if terminals.iter().all(|&t| find(&mut parent, t) == root) && weight < best {
            best = weight;
        }
    }
    best
}

/// Floyd-Warshall all-pairs distances.
pub fn floyd_warshall(nodes: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; nodes]; nodes];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..nodes {
        for i in 0..nodes {
            for j in 0..nodes {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// A connected random graph with integer weights: a random spanning tree
/// plus extra edges. Node 0 is source 0; sinks sit on distinct other nodes.
pub struct RandomGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub sink_nodes: Vec<usize>,
    pub net: Network,
}

pub fn random_graph<R: Rng>(rng: &mut R, nodes: usize, max_edges: usize, sinks: usize) -> RandomGraph {
    assert!(nodes > sinks && max_edges + 1 >= nodes);
    let mut edges = Vec::new();
    for v in 1..nodes {
        let u = rng.random_range(0..v);
        edges.push((u, v, rng.random_range(0..10) as f64));
    }
    let extra = rng.random_range(0..=max_edges - (nodes - 1));
    for _ in 0..extra {
        let u = rng.random_range(0..nodes);
        let v = rng.random_range(0..nodes);
        if u != v {
            edges.push((u, v, rng.random_range(0..10) as f64));
        }
    }
    let mut others: Vec<usize> = (1..nodes).collect();
    for k in (1..others.len()).rev() {
        others.swap(k, rng.random_range(0..=k));
    }
    let sink_nodes: Vec<usize> = others[..sinks].to_vec();
    let node_list = (0..nodes)
        .map(|v| {
            let role = if v == 0 {
                NodeRole::Source(0)
            } else if let Some(j) = sink_nodes.iter().position(|&s| s == v) {
                NodeRole::Sink(j)
            } else {
                NodeRole::Intermediate
            };
            node(&format!("v{v}"), role)
        })
        .collect();
    let names: Vec<String> = (0..nodes).map(|v| format!("v{v}")).collect();
    let named: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|&(u, v, w)| (names[u].as_str(), names[v].as_str(), w))
        .collect();
    let net = Network::new(node_list, &named).unwrap();
    RandomGraph {
        nodes,
        edges,
        sink_nodes,
        net,
    }
}

/// Is `family` (a bitmask over the nonempty subsets of `m` sinks, bit `s-1`
/// standing for subset `s`) closed under supersets?
pub fn closed_family(m: usize, family: u32) -> bool {
    let full = (1u32 << m) - 1;
    (1..=full).all(|k| {
        family & (1 << (k - 1)) == 0
            || (1..=full)
                .filter(|&s| s != k && s & k == k)
                .all(|s| family & (1 << (s - 1)) != 0)
    })
}

/// Nonempty superset-closed families over `m` sinks, by filtering all families.
pub fn brute_force_qstar(m: usize) -> Vec<Vec<SinkSet>> {
    let subsets = (1u32 << m) - 1;
    (1u32..(1 << subsets))
        .filter(|&f| closed_family(m, f))
        .map(|f| {
            (1..=subsets)
                .filter(|&k| f & (1 << (k - 1)) != 0)
                .map(SinkSet::from_bits)
                .collect()
        })
        .collect()
}

/// LP `min c.x, A x >= b, x >= 0` over anonymous variables.
pub fn dense_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LinearProgram {
    let vars: Vec<RateVar> = (0..c.len()).map(RateVar::Broadcast).collect();
    let mut region = RateRegion::new(Provenance::Broadcast, vars.iter().copied());
    for (row, &rhs) in a.iter().zip(b) {
        let coeffs = row.iter().enumerate().map(|(j, &v)| (vars[j], v));
        if let Ok(c) = LinearConstraint::new(coeffs, rhs, "row") {
            region.push(c).unwrap();
        }
    }
    let objective = vars.iter().copied().zip(c.iter().copied()).collect();
    LinearProgram::new(region, objective).unwrap()
}

/// Random LP that is feasible by construction: rows pass through a random
/// nonnegative point with random slack. Half the time coefficients are drawn
/// from a small integer set, which produces degenerate vertices.
pub fn random_lp<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let integer = rng.random_bool(0.5);
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if integer {
                        [-1.0, 0.0, 1.0, 1.0, 2.0][rng.random_range(0..5)]
                    } else {
                        rng.random_range(-1.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    let b = a
        .iter()
        .map(|row| {
            let lhs: f64 = row.iter().zip(&x0).map(|(p, q)| p * q).sum();
            lhs - if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect();
    let c = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    (a, b, c)
}

/// Objective giving each packet variable its weight from `table`.
pub fn packet_objective(region: &RateRegion, weight: impl Fn(dirnet_core::PacketId) -> f64) -> BTreeMap<RateVar, f64> {
    region
        .vars()
        .iter()
        .filter_map(|&v| match v {
            RateVar::Packet(p) => Some((v, weight(p))),
            _ => None,
        })
        .collect()
}
