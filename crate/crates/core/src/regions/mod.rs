//! Linear rate-region constraint systems.
//!
//! Every region is a list of `>=` constraints over named rate variables, all
//! of which are implicitly nonnegative.

mod broadcast;
mod helper;
mod power_binning;
mod theorem1;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::probkit::{Entropies, JointPmf, VarSubset};
use crate::sinkset::{PacketId, SinkSet};

pub use broadcast::broadcast_region;
pub use helper::{
    helper_broadcast_rate, helper_pmf, helper_rates, helper_region, helper_sweep, HelperAux, HelperRates, HelperSweep,
    HelperWeights,
};
pub use power_binning::power_binning_region;
pub use theorem1::theorem1_region;

/// A rate variable of one of the regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateVar {
    /// Rate of packet `P_{i,K}`.
    Packet(PacketId),
    /// Codebook rate `R'_{i,K}`.
    Prime(PacketId),
    /// Bin rate `R''_{i,K}` of the auxiliary codewords.
    DoublePrime(PacketId),
    /// Source bin rate `R~_{i,K}`, only for `K` inside the sinks requesting `i`.
    Tilde(PacketId),
    /// Single broadcast rate of a source.
    Broadcast(usize),
}

impl RateVar {
    pub fn packet(source: usize, sinks: SinkSet) -> Self {
        RateVar::Packet(PacketId::new(source, sinks))
    }

    pub fn source(self) -> usize {
        match self {
            RateVar::Packet(p) | RateVar::Prime(p) | RateVar::DoublePrime(p) | RateVar::Tilde(p) => p.source,
            RateVar::Broadcast(i) => i,
        }
    }

    pub fn packet_id(self) -> Option<PacketId> {
        match self {
            RateVar::Packet(p) | RateVar::Prime(p) | RateVar::DoublePrime(p) | RateVar::Tilde(p) => Some(p),
            RateVar::Broadcast(_) => None,
        }
    }
}

impl fmt::Display for RateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateVar::Packet(p) => write!(f, "R[{p}]"),
            RateVar::Prime(p) => write!(f, "R'[{p}]"),
            RateVar::DoublePrime(p) => write!(f, "R''[{p}]"),
            RateVar::Tilde(p) => write!(f, "Rt[{p}]"),
            RateVar::Broadcast(i) => write!(f, "R[{i}]"),
        }
    }
}

/// `sum coeffs * vars >= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    coeffs: Vec<(RateVar, f64)>,
    pub rhs: f64,
    /// Symbolic description of the right-hand side, e.g. `H(X0|X1)`.
    pub label: String,
}

impl LinearConstraint {
    /// Repeated variables are merged and zero coefficients dropped.
    pub fn new(coeffs: impl IntoIterator<Item = (RateVar, f64)>, rhs: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let mut merged: BTreeMap<RateVar, f64> = BTreeMap::new();
        for (v, c) in coeffs {
            *merged.entry(v).or_insert(0.0) += c;
        }
        let coeffs: Vec<_> = merged.into_iter().filter(|&(_, c)| c != 0.0).collect();
        if coeffs.is_empty() {
            return Err(Error::InvalidRegion(format!("constraint {label} has no variables")));
        }
        if !rhs.is_finite() || coeffs.iter().any(|(_, c)| !c.is_finite()) {
            return Err(Error::InvalidRegion(format!("constraint {label} is not finite")));
        }
        Ok(LinearConstraint { coeffs, rhs, label })
    }

    /// Sum of the listed variables with unit coefficients.
    pub fn sum(vars: impl IntoIterator<Item = RateVar>, rhs: f64, label: impl Into<String>) -> Result<Self> {
        LinearConstraint::new(vars.into_iter().map(|v| (v, 1.0)), rhs, label)
    }

    pub fn coeffs(&self) -> &[(RateVar, f64)] {
        &self.coeffs
    }

    pub fn coeff(&self, var: RateVar) -> f64 {
        self.coeffs
            .binary_search_by(|(v, _)| v.cmp(&var))
            .map_or(0.0, |k| self.coeffs[k].1)
    }

    pub fn lhs(&self, assignment: &BTreeMap<RateVar, f64>) -> f64 {
        self.coeffs
            .iter()
            .map(|(v, c)| c * assignment.get(v).copied().unwrap_or(0.0))
            .sum()
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (v, c)) in self.coeffs.iter().enumerate() {
            let sign = if *c < 0.0 {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.abs();
            if k > 0 {
                f.write_str(" ")?;
            }
            if mag == 1.0 {
                write!(f, "{sign}{v}")?;
            } else {
                write!(f, "{sign}{mag}*{v}")?;
            }
        }
        write!(f, " >= {} ({})", self.rhs, self.label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Broadcast,
    PowerBinning,
    Theorem1,
    Helper,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Broadcast => "broadcast",
            Provenance::PowerBinning => "power-binning",
            Provenance::Theorem1 => "theorem1",
            Provenance::Helper => "helper",
        })
    }
}

/// Constraints over a catalog of nonnegative rate variables.
#[derive(Clone, Debug, PartialEq)]
pub struct RateRegion {
    vars: Vec<RateVar>,
    constraints: Vec<LinearConstraint>,
    provenance: Provenance,
}

impl RateRegion {
    pub fn new(provenance: Provenance, vars: impl IntoIterator<Item = RateVar>) -> Self {
        let vars: BTreeSet<RateVar> = vars.into_iter().collect();
        RateRegion {
            vars: vars.into_iter().collect(),
            constraints: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, constraint: LinearConstraint) -> Result<()> {
        if let Some((v, _)) = constraint.coeffs.iter().find(|(v, _)| self.index_of(*v).is_none()) {
            return Err(Error::InvalidRegion(format!(
                "constraint {} uses unknown variable {v}",
                constraint.label
            )));
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn vars(&self) -> &[RateVar] {
        &self.vars
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn index_of(&self, var: RateVar) -> Option<usize> {
        self.vars.binary_search(&var).ok()
    }

    /// Largest amount by which `assignment` violates a constraint or a
    /// nonnegativity bound; 0 when feasible.
    pub fn max_violation(&self, assignment: &BTreeMap<RateVar, f64>) -> f64 {
        let bounds = self.vars.iter().map(|v| -assignment.get(v).copied().unwrap_or(0.0));
        let rows = self.constraints.iter().map(|c| c.rhs - c.lhs(assignment));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Substitute `var = value` and drop it from the catalog. Constraints left
    /// without variables must hold (within `1e-12`) and are removed; rows that
    /// end up with identical coefficients keep only the largest rhs.
    pub fn fix(&self, var: RateVar, value: f64) -> Result<RateRegion> {
        if self.index_of(var).is_none() {
            return Err(Error::DimensionMismatch(var.to_string()));
        }
        let mut out = RateRegion::new(self.provenance, self.vars.iter().copied().filter(|&v| v != var));
        let mut seen: BTreeMap<Vec<(RateVar, u64)>, usize> = BTreeMap::new();
        for c in &self.constraints {
            let k = c.coeff(var);
            let rhs = c.rhs - k * value;
            let rest: Vec<_> = c.coeffs.iter().copied().filter(|&(v, _)| v != var).collect();
            if rest.is_empty() {
                if rhs > 1e-12 {
                    return Err(Error::InvalidRegion(format!(
                        "fixing {var} = {value} violates {}",
                        c.label
                    )));
                }
                continue;
            }
            let label = if k == 0.0 {
                c.label.clone()
            } else {
                format!("{} - {k}*{var}", c.label)
            };
            let key: Vec<_> = rest.iter().map(|&(v, c)| (v, c.to_bits())).collect();
            match seen.get(&key) {
                Some(&idx) => {
                    let kept: &mut LinearConstraint = &mut out.constraints[idx];
                    if rhs > kept.rhs {
                        kept.rhs = rhs;
                        kept.label = label;
                    }
                }
                None => {
                    seen.insert(key, out.constraints.len());
                    out.constraints.push(LinearConstraint {
                        coeffs: rest,
                        rhs,
                        label,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// A family of sink subsets closed under taking supersets.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetFamily {
    members: BTreeSet<SinkSet>,
}

impl SubsetFamily {
    pub fn new(members: impl IntoIterator<Item = SinkSet>) -> Self {
        SubsetFamily {
            members: members.into_iter().collect(),
        }
    }

    pub fn contains(&self, k: SinkSet) -> bool {
        self.members.contains(&k)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = SinkSet> + '_ {
        self.members.iter().copied()
    }

    /// Whether every strict superset (inside `universe`) of a member is a member.
    pub fn is_superset_closed(&self, universe: &[SinkSet]) -> bool {
        self.members.iter().all(|&k| {
            universe
                .iter()
                .filter(|u| k.is_strict_subset_of(**u))
                .all(|u| self.members.contains(u))
        })
    }
}

impl fmt::Display for SubsetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.members.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// All superset-closed families drawn from `universe`, including the empty
/// family. Sets are decided largest first, so a set can only join once all of
/// its supersets have.
pub fn superset_closed_families(universe: &[SinkSet]) -> Vec<SubsetFamily> {
    let mut order: Vec<SinkSet> = universe.to_vec();
    order.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.bits()));
    order.dedup();

    fn grow(order: &[SinkSet], k: usize, chosen: &mut Vec<SinkSet>, out: &mut Vec<SubsetFamily>) {
        if k == order.len() {
            out.push(SubsetFamily::new(chosen.iter().copied()));
            return;
        }
        grow(order, k + 1, chosen, out);
        let s = order[k];
        let supersets_in = order[..k]
            .iter()
            .filter(|u| s.is_strict_subset_of(**u))
            .all(|u| chosen.contains(u));
        if supersets_in {
            chosen.push(s);
            grow(order, k + 1, chosen, out);
            chosen.pop();
        }
    }

    let mut out = Vec::new();
    grow(&order, 0, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Nonempty superset-closed families over the nonempty subsets of `ambient`.
pub fn enumerate_qstar(ambient: SinkSet) -> Vec<SubsetFamily> {
    let universe: Vec<SinkSet> = ambient.nonempty_subsets().collect();
    superset_closed_families(&universe)
        .into_iter()
        .filter(|f| !f.is_empty())
        .collect()
}

/// `H(X_a | X_b)`-style label using the pmf's variable names.
pub(crate) fn entropy_label(pmf: &JointPmf, target: VarSubset, given: VarSubset) -> String {
    let names = |s: VarSubset| {
        s.iter()
            .map(|k| pmf.vars()[k].name.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    if given.is_empty() {
        format!("H({})", names(target))
    } else {
        format!("H({}|{})", names(target), names(given))
    }
}

/// Source positions for the listed source indices.
pub(crate) fn source_subset<'a>(pmf: &JointPmf, sources: impl IntoIterator<Item = &'a usize>) -> Result<VarSubset> {
    sources
        .into_iter()
        .map(|&i| {
            pmf.source_position(i)
                .ok_or_else(|| Error::InvalidPmf(format!("pmf has no variable for source {i}")))
        })
        .collect()
}

/// Shared generator for the broadcast and power-binning regions: for every
/// sink and nonempty requested subset `S`, the rates `vars(i)` of sources in
/// `S` must cover `H(X_S | X_{rest})`.
pub(crate) fn sink_cut_constraints(
    region: &mut RateRegion,
    pmf: &JointPmf,
    demands: &crate::netgraph::DemandMap,
    vars: impl Fn(usize, usize) -> Vec<RateVar>,
) -> Result<()> {
    if pmf.num_sources()? != demands.num_sources() {
        return Err(Error::InvalidPmf(format!(
            "pmf has {} sources, demands expect {}",
            pmf.num_sources()?,
            demands.num_sources()
        )));
    }
    let h = Entropies::new(pmf);
    for j in 0..demands.num_sinks() {
        let sigma: Vec<usize> = demands.sigma(j).iter().copied().collect();
        for mask in 1u32..(1 << sigma.len()) {
            let (mut inside, mut outside) = (Vec::new(), Vec::new());
            for (b, &i) in sigma.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    inside.push(i);
                } else {
                    outside.push(i);
                }
            }
            let target = source_subset(pmf, &inside)?;
            let given = source_subset(pmf, &outside)?;
            let rhs = h.cond(target, given)?;
            let lhs = inside.iter().flat_map(|&i| vars(i, j));
            region.push(LinearConstraint::sum(lhs, rhs, entropy_label(pmf, target, given))?)?;
        }
    }
    Ok(())
}
