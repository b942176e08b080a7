use super::{sink_cut_constraints, Provenance, RateRegion, RateVar};
use crate::error::Result;
use crate::netgraph::DemandMap;
use crate::probkit::JointPmf;

/// The no-helpers region: sink `j` sees every packet of source `i` whose
/// sink set contains `j`.
pub fn power_binning_region(pmf: &JointPmf, demands: &DemandMap) -> Result<RateRegion> {
    let vars =
        (0..demands.num_sources()).flat_map(|i| demands.pi(i).nonempty_subsets().map(move |k| RateVar::packet(i, k)));
    let mut region = RateRegion::new(Provenance::PowerBinning, vars);
    sink_cut_constraints(&mut region, pmf, demands, |i, j| {
        demands
            .pi(i)
            .nonempty_subsets()
            .filter(|k| k.contains(j))
            .map(|k| RateVar::packet(i, k))
            .collect()
    })?;
    Ok(region)
}
