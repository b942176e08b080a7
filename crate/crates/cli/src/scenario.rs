//! Scenario files: one JSON document describing the sources, their joint pmf,
//! optional auxiliary variables, the network and the demands.
//!
//! Sources are numbered from 0 in declaration order, sinks from 1. The pmf
//! is flat and row-major over the sources followed by the auxiliaries, so the
//! last declared variable changes fastest. With three binary variables the
//! entries are ordered `000, 001, 010, 011, 100, 101, 110, 111`.
//!
//! ```json
//! {
//!   "sources": [{"name": "X0", "alphabet": 2}, {"name": "X1", "alphabet": 2}],
//!   "auxiliaries": [{"name": "U", "source": 0, "sinks": [1], "alphabet": 2}],
//!   "pmf": [0.4, 0.05, 0.05, 0.0, 0.0, 0.05, 0.05, 0.4],
//!   "network": {
//!     "nodes": [{"id": "E0", "source": 0}, {"id": "E1", "source": 1}, {"id": "S1", "sink": 1}],
//!     "edges": [{"from": "E0", "to": "S1", "weight": 1.0}, {"from": "E1", "to": "S1", "weight": 2.0}]
//!   },
//!   "demands": [{"sink": 1, "sources": [0, 1]}],
//!   "helper": {"delta": 0.1}
//! }
//! ```

use std::path::Path;

use dirnet_core::netgraph::Node;
use dirnet_core::probkit::marginalize;
use dirnet_core::{DemandMap, JointPmf, Network, NodeRole, SinkSet, Variable};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MAX_SOURCES: usize = 4;
pub const MAX_SINKS: usize = 3;
pub const MAX_ALPHABET: usize = 4;
pub const MAX_BLOCKLENGTH: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDecl {
    pub name: String,
    pub alphabet: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxDecl {
    pub name: String,
    pub source: usize,
    /// One-based sinks the auxiliary is addressed to.
    pub sinks: Vec<usize>,
    pub alphabet: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDecl {
    pub nodes: Vec<NodeDecl>,
    pub edges: Vec<EdgeDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDecl {
    pub sink: usize,
    pub sources: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelperDecl {
    pub delta: f64,
}

/// The document exactly as written in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub sources: Vec<SourceDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub auxiliaries: Vec<AuxDecl>,
    pub pmf: Vec<f64>,
    pub network: NetworkDecl,
    pub demands: Vec<DemandDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helper: Option<HelperDecl>,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    /// Sources and auxiliaries.
    pub pmf: JointPmf,
    pub network: Network,
    pub demands: DemandMap,
}

fn invalid(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| invalid("parse error", e))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("scenario serializes")
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let n = file.sources.len();
        if n == 0 {
            return Err(invalid("sources", "no sources declared"));
        }
        if n > MAX_SOURCES {
            return Err(invalid(
                "sources",
                format!("{n} declared, at most {MAX_SOURCES} allowed"),
            ));
        }
        let m = file.demands.len();
        if m == 0 {
            return Err(invalid("demands", "no sinks declared"));
        }
        if m > MAX_SINKS {
            return Err(invalid(
                "demands",
                format!("{m} sinks declared, at most {MAX_SINKS} allowed"),
            ));
        }

        let mut vars = Vec::new();
        for (i, s) in file.sources.iter().enumerate() {
            check_alphabet(&format!("sources[{i}].alphabet"), s.alphabet)?;
            vars.push(Variable::source(s.name.clone(), i, s.alphabet));
        }
        for (k, a) in file.auxiliaries.iter().enumerate() {
            let field = format!("auxiliaries[{k}]");
            check_alphabet(&format!("{field}.alphabet"), a.alphabet)?;
            if a.source >= n {
                return Err(invalid(
                    format!("{field}.source"),
                    format!("unknown source {}", a.source),
                ));
            }
            let sinks = sink_set(&format!("{field}.sinks"), &a.sinks, m)?;
            vars.push(Variable::auxiliary(a.name.clone(), a.source, sinks, a.alphabet));
        }
        let mut names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid("sources", format!("variable name {} used twice", w[0])));
        }
        let size: usize = vars.iter().map(|v| v.alphabet).product();
        if file.pmf.len() != size {
            return Err(invalid(
                "pmf",
                format!("{} entries, the declared alphabets need {size}", file.pmf.len()),
            ));
        }
        let pmf = JointPmf::new(vars, file.pmf.clone()).map_err(|e| invalid("pmf", e))?;

        let mut sigma = vec![None; m];
        for (k, d) in file.demands.iter().enumerate() {
            if d.sink == 0 || d.sink > m {
                return Err(invalid(
                    format!("demands[{k}].sink"),
                    format!("sink {} outside 1..={m}", d.sink),
                ));
            }
            if sigma[d.sink - 1].is_some() {
                return Err(invalid(
                    format!("demands[{k}].sink"),
                    format!("sink {} listed twice", d.sink),
                ));
            }
            if let Some((q, &i)) = d.sources.iter().enumerate().find(|(_, &i)| i >= n) {
                return Err(invalid(
                    format!("demands[{k}].sources[{q}]"),
                    format!("unknown source {i}"),
                ));
            }
            sigma[d.sink - 1] = Some(d.sources.clone());
        }
        let sigma: Vec<Vec<usize>> = sigma.into_iter().map(|s| s.expect("every sink listed once")).collect();
        let demands = DemandMap::new(n, sigma).map_err(|e| invalid("demands", e))?;

        let network = build_network(&file.network, n, m)?;
        if let Some(h) = file.helper {
            if !h.delta.is_finite() || h.delta < 0.0 {
                return Err(invalid(
                    "helper.delta",
                    format!("{} is not a nonnegative number", h.delta),
                ));
            }
        }
        Ok(Scenario {
            file,
            pmf,
            network,
            demands,
        })
    }

    pub fn num_sources(&self) -> usize {
        self.demands.num_sources()
    }

    pub fn num_sinks(&self) -> usize {
        self.demands.num_sinks()
    }

    pub fn has_auxiliaries(&self) -> bool {
        !self.file.auxiliaries.is_empty()
    }

    /// Joint pmf of the sources alone.
    pub fn source_pmf(&self) -> Result<JointPmf> {
        if !self.has_auxiliaries() {
            return Ok(self.pmf.clone());
        }
        Ok(marginalize(&self.pmf, self.pmf.sources())?)
    }
}

fn check_alphabet(field: &str, a: usize) -> Result<()> {
    if a == 0 || a > MAX_ALPHABET {
        return Err(invalid(field, format!("alphabet size {a} outside 1..={MAX_ALPHABET}")));
    }
    Ok(())
}

fn sink_set(field: &str, sinks: &[usize], m: usize) -> Result<SinkSet> {
    if sinks.is_empty() {
        return Err(invalid(field, "empty sink set"));
    }
    let mut set = SinkSet::EMPTY;
    for &j in sinks {
        if j == 0 || j > m {
            return Err(invalid(field, format!("sink {j} outside 1..={m}")));
        }
        if set.contains(j - 1) {
            return Err(invalid(field, format!("sink {j} listed twice")));
        }
        set = set.union(SinkSet::singleton(j - 1));
    }
    Ok(set)
}

fn build_network(decl: &NetworkDecl, n: usize, m: usize) -> Result<Network> {
    let mut nodes = Vec::with_capacity(decl.nodes.len());
    for (k, nd) in decl.nodes.iter().enumerate() {
        let field = format!("network.nodes[{k}]");
        let role = match (nd.source, nd.sink) {
            (Some(_), Some(_)) => return Err(invalid(field, "a node cannot be both a source and a sink")),
            (Some(i), None) if i >= n => return Err(invalid(format!("{field}.source"), format!("unknown source {i}"))),
            (Some(i), None) => NodeRole::Source(i),
            (None, Some(j)) if j == 0 || j > m => {
                return Err(invalid(format!("{field}.sink"), format!("sink {j} outside 1..={m}")))
            }
            (None, Some(j)) => NodeRole::Sink(j - 1),
            (None, None) => NodeRole::Intermediate,
        };
        nodes.push(Node {
            id: nd.id.clone(),
            role,
        });
    }
    for (k, e) in decl.edges.iter().enumerate() {
        for end in [&e.from, &e.to] {
            if !decl.nodes.iter().any(|nd| &nd.id == end) {
                return Err(invalid(format!("network.edges[{k}]"), format!("unknown node {end}")));
            }
        }
    }
    let edges: Vec<(&str, &str, f64)> = decl
        .edges
        .iter()
        .map(|e| (e.from.as_str(), e.to.as_str(), e.weight))
        .collect();
    let net = Network::new(nodes, &edges).map_err(|e| invalid("network", e))?;
    if net.num_sources() != n || net.num_sinks() != m {
        return Err(invalid(
            "network",
            format!(
                "{} source and {} sink nodes, the scenario declares {n} sources and {m} sinks",
                net.num_sources(),
                net.num_sinks()
            ),
        ));
    }
    Ok(net)
}
