//! The general achievable region with auxiliary codebooks.
//!
//! Rate variables: packet rates `R[i,K]` for every nonempty `K`, codebook
//! rates `R'`, auxiliary bin rates `R''`, and source bin rates `Rt[i,K]` for
//! `K` inside the sinks requesting `i`.

use itertools::Itertools;

use super::{entropy_label, enumerate_qstar, source_subset, superset_closed_families};
use super::{LinearConstraint, Provenance, RateRegion, RateVar, SubsetFamily};
use crate::error::{Error, Result};
use crate::netgraph::DemandMap;
use crate::probkit::{validate_markov, Entropies, JointPmf, MarkovCheck, VarRole, VarSubset};
use crate::sinkset::{PacketId, SinkSet};

struct AuxIndex<'a> {
    h: Entropies<'a>,
    all: SinkSet,
    /// `pos[i][K.bits()]` is the pmf position of `U_{i,K}`, if present.
    pos: Vec<Vec<Option<usize>>>,
}

impl<'a> AuxIndex<'a> {
    fn new(pmf: &'a JointPmf, demands: &DemandMap) -> Result<Self> {
        let all = demands.all_sinks();
        let mut pos = vec![vec![None; 1 << demands.num_sinks()]; demands.num_sources()];
        for (k, v) in pmf.vars().iter().enumerate() {
            if let VarRole::Auxiliary { source, sinks } = v.role {
                if source >= demands.num_sources() || sinks.is_empty() || !sinks.is_subset_of(all) {
                    return Err(Error::InvalidAuxiliary(format!(
                        "{} is labelled ({source},{sinks}), which is not a valid packet",
                        v.name
                    )));
                }
                pos[source][sinks.bits() as usize] = Some(k);
            }
        }
        Ok(AuxIndex {
            h: Entropies::new(pmf),
            all,
            pos,
        })
    }

    /// `{U_i}_F` for the sink subsets in `family`; absent auxiliaries are constants.
    fn group(&self, i: usize, family: impl IntoIterator<Item = SinkSet>) -> VarSubset {
        family
            .into_iter()
            .filter_map(|k| self.pos[i][k.bits() as usize])
            .collect()
    }

    /// `H(U_{i,K} | {U_i}_{I+(K)})` where `I+(K)` are the strict supersets of `K`.
    fn link(&self, i: usize, k: SinkSet) -> Result<f64> {
        let Some(u) = self.pos[i][k.bits() as usize] else {
            return Ok(0.0);
        };
        let above = self.group(i, self.all.nonempty_subsets().filter(|s| k.is_strict_subset_of(*s)));
        self.h.cond(VarSubset::single(u), above)
    }
}

/// Generate the region for a pmf holding the sources and any auxiliaries
/// `U_{i,K}`. The pmf must satisfy the per-sink Markov factorisation.
pub fn theorem1_region(pmf: &JointPmf, demands: &DemandMap) -> Result<RateRegion> {
    if let MarkovCheck::Violated(v) = validate_markov(pmf, demands)? {
        return Err(Error::MarkovViolation {
            sink: v.sink + 1,
            worst: v.worst,
        });
    }
    let n = demands.num_sources();
    let m = demands.num_sinks();
    let all = demands.all_sinks();
    let aux = AuxIndex::new(pmf, demands)?;
    let h = &aux.h;

    let packets: Vec<PacketId> = (0..n)
        .flat_map(|i| all.nonempty_subsets().map(move |k| PacketId::new(i, k)))
        .collect();
    let local = |p: &PacketId| p.sinks.is_subset_of(demands.pi(p.source));
    let vars = packets.iter().flat_map(|&p| {
        let mut v = vec![RateVar::Packet(p), RateVar::Prime(p), RateVar::DoublePrime(p)];
        if local(&p) {
            v.push(RateVar::Tilde(p));
        }
        v
    });
    let mut region = RateRegion::new(Provenance::Theorem1, vars);

    // Codebook sizes: sum over Q of R' >= alpha(i, Q).
    let qstar = enumerate_qstar(all);
    for i in 0..n {
        let x = source_subset(pmf, &[i])?;
        for q in &qstar {
            let mut alpha = -h.cond(aux.group(i, q.iter()), x)?;
            for k in q.iter() {
                alpha += aux.link(i, k)?;
            }
            let lhs = q.iter().map(|k| RateVar::Prime(PacketId::new(i, k)));
            region.push(LinearConstraint::sum(lhs, alpha, format!("alpha({i};{q})"))?)?;
        }
    }

    // Auxiliary bins: for each sink and each tuple of closed families, the
    // bins outside the families must resolve the codewords outside them.
    for k in 0..m {
        let jk: Vec<SinkSet> = all.nonempty_subsets().filter(|s| s.contains(k)).collect();
        let full = SubsetFamily::new(jk.iter().copied());
        let families = superset_closed_families(&jk);
        for tuple in (0..n).map(|_| families.iter()).multi_cartesian_product() {
            if tuple.iter().all(|q| **q == full) {
                continue;
            }
            let mut known = VarSubset::EMPTY;
            let mut unknown = VarSubset::EMPTY;
            let mut beta = 0.0;
            let mut coeffs = Vec::new();
            for (i, q) in tuple.iter().enumerate() {
                known = known.union(aux.group(i, q.iter()));
                for &s in jk.iter().filter(|s| !q.contains(**s)) {
                    unknown = unknown.union(aux.group(i, [s]));
                    beta -= aux.link(i, s)?;
                    let p = PacketId::new(i, s);
                    coeffs.push((RateVar::DoublePrime(p), 1.0));
                    coeffs.push((RateVar::Prime(p), -1.0));
                }
            }
            beta += h.cond(unknown, known)?;
            let label = format!("beta({};{})", k + 1, tuple.iter().join(","));
            region.push(LinearConstraint::new(coeffs, beta, label)?)?;
        }
    }

    // Source bins: gamma_k(G) = H(X_G | X_{rest}, {U}_{J(k)}).
    for k in 0..m {
        let sigma: Vec<usize> = demands.sigma(k).iter().copied().collect();
        let reaching = (0..n)
            .map(|i| aux.group(i, all.nonempty_subsets().filter(|s| s.contains(k))))
            .fold(VarSubset::EMPTY, VarSubset::union);
        for mask in 1u32..(1 << sigma.len()) {
            let (mut gamma, mut rest) = (Vec::new(), Vec::new());
            for (b, &i) in sigma.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    gamma.push(i);
                } else {
                    rest.push(i);
                }
            }
            let target = source_subset(pmf, &gamma)?;
            let given = source_subset(pmf, &rest)?.union(reaching);
            let rhs = h.cond(target, given)?;
            let lhs = gamma.iter().flat_map(|&i| {
                demands
                    .pi(i)
                    .nonempty_subsets()
                    .filter(|s| s.contains(k))
                    .map(move |s| RateVar::Tilde(PacketId::new(i, s)))
            });
            region.push(LinearConstraint::sum(lhs, rhs, entropy_label(pmf, target, given))?)?;
        }
    }

    // Packet rates carry the auxiliary bins plus the source bins.
    for p in &packets {
        let mut coeffs = vec![(RateVar::Packet(*p), 1.0), (RateVar::DoublePrime(*p), -1.0)];
        if local(p) {
            coeffs.push((RateVar::Tilde(*p), -1.0));
        }
        region.push(LinearConstraint::new(coeffs, 0.0, format!("link({p})"))?)?;
    }
    Ok(region)
}
