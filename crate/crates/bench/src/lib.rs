//! Fixtures shared by the benchmarks.

use dirnet_core::netgraph::Node;
use dirnet_core::{DemandMap, Network, NodeRole};

/// Grid graph of `side * side` nodes with unit-ish weights, source 0 in one
/// corner and `sinks` sinks spread along the opposite edge.
pub fn grid_network(side: usize, sinks: usize) -> Network {
    assert!(sinks <= side && side >= 2);
    let id = |r: usize, c: usize| format!("n{r}_{c}");
    let sink_cols: Vec<usize> = (0..sinks)
        .map(|j| {
            if sinks == 1 {
                side - 1
            } else {
                j * (side - 1) / (sinks - 1)
            }
        })
        .collect();
    let mut nodes = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let role = if (r, c) == (0, 0) {
                NodeRole::Source(0)
            } else if r == side - 1 && sink_cols.contains(&c) {
                NodeRole::Sink(sink_cols.iter().position(|&x| x == c).unwrap())
            } else {
                NodeRole::Intermediate
            };
            nodes.push(Node { id: id(r, c), role });
        }
    }
    let mut names = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let w = 1.0 + ((r * 7 + c * 3) % 5) as f64 / 4.0;
            if c + 1 < side {
                names.push((id(r, c), id(r, c + 1), w));
            }
            if r + 1 < side {
                names.push((id(r, c), id(r + 1, c), w + 0.5));
            }
        }
    }
    let edges: Vec<(&str, &str, f64)> = names.iter().map(|(a, b, w)| (a.as_str(), b.as_str(), *w)).collect();
    Network::new(nodes, &edges).expect("grid is connected")
}

/// Every sink requests source 0.
pub fn single_source_demands(sinks: usize) -> DemandMap {
    DemandMap::new(1, vec![vec![0]; sinks]).expect("valid demands")
}
