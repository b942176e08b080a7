use super::{sink_cut_constraints, Provenance, RateRegion, RateVar};
use crate::error::Result;
use crate::netgraph::DemandMap;
use crate::probkit::JointPmf;

/// Broadcast routing: one rate `R_i` per requested source, delivered whole
/// to every sink asking for it.
pub fn broadcast_region(pmf: &JointPmf, demands: &DemandMap) -> Result<RateRegion> {
    let vars = (0..demands.num_sources())
        .filter(|&i| !demands.pi(i).is_empty())
        .map(RateVar::Broadcast);
    let mut region = RateRegion::new(Provenance::Broadcast, vars);
    sink_cut_constraints(&mut region, pmf, demands, |i, _| vec![RateVar::Broadcast(i)])?;
    Ok(region)
}
