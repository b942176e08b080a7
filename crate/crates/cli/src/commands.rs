use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use dirnet_core::binsim::{run_power_binning, BinModel, BinSimConfig, BinSimReport};
use dirnet_core::netgraph::{broadcast_costs, effective_costs};
use dirnet_core::probkit::hb;
use dirnet_core::regions::{
    broadcast_region, helper_broadcast_rate, helper_region, helper_sweep, power_binning_region, theorem1_region,
    HelperAux, HelperRates, HelperWeights,
};
use dirnet_core::{minimize, JointPmf, LinearProgram, LpStatus, PacketId, RateRegion, RateVar, SinkSet};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::format::sig12;
use crate::scenario::{Scenario, MAX_BLOCKLENGTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One stream per source, delivered whole to every sink requesting it.
    Broadcast,
    /// Dispersive routing with the power-binning region.
    DirPower,
    /// Dispersive routing with the auxiliary-variable region.
    DirThm1,
    /// Two sinks, one helper source, analytic auxiliaries.
    Helper,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Broadcast => "broadcast",
            Mode::DirPower => "dir-power",
            Mode::DirThm1 => "dir-thm1",
            Mode::Helper => "helper",
        };
        f.write_str(s)
    }
}

/// A region, the weights on its variables, and what the weights came from.
pub struct Problem {
    pub region: RateRegion,
    pub objective: BTreeMap<RateVar, f64>,
    pub costs: Vec<CostEntry>,
    pub baseline: Option<Baseline>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostEntry {
    pub item: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Baseline {
    pub description: String,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEntry {
    pub var: String,
    pub rate: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constant {
    pub id: usize,
    pub description: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub mode: Mode,
    pub cost: f64,
    pub rates: Vec<RateEntry>,
    pub costs: Vec<CostEntry>,
    pub constants: Vec<Constant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Baseline>,
}

impl CostReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode: {}", self.mode);
        let _ = writeln!(s, "optimal cost: {}", sig12(self.cost));
        if let Some(b) = &self.baseline {
            let _ = writeln!(s, "{}: {}", b.description, sig12(b.cost));
        }
        let _ = writeln!(s, "rates:");
        for r in &self.rates {
            let _ = writeln!(s, "  {:<12} {:<16} weight {}", r.var, sig12(r.rate), sig12(r.weight));
        }
        let _ = writeln!(s, "effective costs:");
        for c in &self.costs {
            let _ = writeln!(s, "  {:<12} {}", c.item, sig12(c.weight));
        }
        let _ = writeln!(s, "constants:");
        for c in &self.constants {
            let _ = writeln!(s, "  c{:<3} {:<16} {}", c.id, sig12(c.value), c.description);
        }
        s
    }
}

pub fn build_problem(scn: &Scenario, mode: Mode, no_helpers: bool) -> Result<Problem> {
    match mode {
        Mode::Broadcast => {
            let region = broadcast_region(&scn.source_pmf()?, &scn.demands)?;
            let bw = broadcast_costs(&scn.network, &scn.demands)?;
            let objective = region.vars().iter().map(|&v| (v, bw[&v.source()])).collect();
            let costs = bw
                .iter()
                .map(|(i, &w)| CostEntry {
                    item: format!("source {i}"),
                    weight: w,
                })
                .collect();
            Ok(Problem {
                region,
                objective,
                costs,
                baseline: None,
            })
        }
        Mode::DirPower => {
            let region = power_binning_region(&scn.source_pmf()?, &scn.demands)?;
            packet_problem(scn, region, true, None)
        }
        Mode::DirThm1 => {
            if !scn.has_auxiliaries() {
                return Err(CliError::Validation(
                    "dir-thm1 needs auxiliaries in the scenario".into(),
                ));
            }
            let mut region = theorem1_region(&scn.pmf, &scn.demands)?;
            if no_helpers {
                let outside: Vec<RateVar> = region
                    .vars()
                    .iter()
                    .copied()
                    .filter(|v| match v {
                        RateVar::Packet(p) => !p.sinks.is_subset_of(scn.demands.pi(p.source)),
                        _ => false,
                    })
                    .collect();
                for v in outside {
                    region = region.fix(v, 0.0)?;
                }
            }
            packet_problem(scn, region, no_helpers, None)
        }
        Mode::Helper => {
            let (p1, p2) = helper_shape(scn)?;
            let delta = scn
                .file
                .helper
                .ok_or_else(|| CliError::Validation("helper: helper mode needs helper.delta".into()))?
                .delta;
            let aux = HelperAux::analytic(p1, p2, delta)?;
            let region = helper_region(p1, p2, aux)?;
            let table = effective_costs(&scn.network, &scn.demands, false)?;
            let w = |i, k: SinkSet| table.get(PacketId::new(i, k)).expect("full table");
            let (s1, s2) = (SinkSet::singleton(0), SinkSet::singleton(1));
            let r0 = helper_broadcast_rate(p1, p2, delta)?;
            let cost = r0 * w(0, SinkSet::full(2)) + (hb(p1)? + delta) * w(1, s1) + (hb(p2)? + delta) * w(2, s2);
            let baseline = Baseline {
                description: "helper broadcast cost".into(),
                cost,
            };
            packet_problem(scn, region, false, Some(baseline))
        }
    }
}

fn packet_problem(scn: &Scenario, region: RateRegion, restrict: bool, baseline: Option<Baseline>) -> Result<Problem> {
    let table = effective_costs(&scn.network, &scn.demands, restrict)?;
    let objective = region
        .vars()
        .iter()
        .filter_map(|&v| match v {
            RateVar::Packet(p) => table.get(p).map(|w| (v, w)),
            _ => None,
        })
        .collect();
    let costs = table
        .iter()
        .map(|(p, w)| CostEntry {
            item: p.to_string(),
            weight: w,
        })
        .collect();
    Ok(Problem {
        region,
        objective,
        costs,
        baseline,
    })
}

/// Crossovers `(p1, p2)` if the scenario is the binary helper star: sink 1
/// wants `X1`, sink 2 wants `X2`, and `X1`, `X2` are `X0` through two
/// independent BSCs.
fn helper_shape(scn: &Scenario) -> Result<(f64, f64)> {
    let wrong = |why: &str| CliError::Validation(format!("helper mode: {why}"));
    if scn.num_sources() != 3 || scn.num_sinks() != 2 || scn.has_auxiliaries() {
        return Err(wrong("needs exactly 3 sources, 2 sinks and no auxiliaries"));
    }
    if scn.file.sources.iter().any(|s| s.alphabet != 2) {
        return Err(wrong("sources must be binary"));
    }
    let wanted = |j: usize| scn.demands.sigma(j).iter().copied().collect::<Vec<_>>();
    if wanted(0) != [1] || wanted(1) != [2] {
        return Err(wrong("sink 1 must request only source 1 and sink 2 only source 2"));
    }
    let p = scn.pmf.probs();
    // Entries are indexed x0*4 + x1*2 + x2.
    let p1: f64 = (0..8).filter(|k| (k >> 2) != (k >> 1) & 1).map(|k| p[k]).sum();
    let p2: f64 = (0..8).filter(|k| (k >> 2) != k & 1).map(|k| p[k]).sum();
    let star = JointPmf::dsbs_star(p1, p2)?;
    if star.probs().iter().zip(p).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(wrong("pmf is not a uniform X0 observed through two independent BSCs"));
    }
    Ok((p1, p2))
}

pub fn cost(scn: &Scenario, mode: Mode, no_helpers: bool) -> Result<CostReport> {
    let problem = build_problem(scn, mode, no_helpers)?;
    let lp = LinearProgram::new(problem.region.clone(), problem.objective.clone())?;
    let sol = minimize(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(CliError::Infeasible("infeasible".into())),
        LpStatus::Unbounded => return Err(CliError::Infeasible("unbounded".into())),
    }
    let scale = problem
        .region
        .constraints()
        .iter()
        .fold(1.0f64, |s, c| s.max(c.rhs.abs()));
    let violation = problem.region.max_violation(&sol.assignment);
    if violation > 1e-7 * scale {
        return Err(CliError::Infeasible(format!(
            "returning a point that violates the region by {violation:.3e}"
        )));
    }
    let rates: Vec<RateEntry> = problem
        .region
        .vars()
        .iter()
        .filter_map(|&v| {
            problem.objective.get(&v).map(|&w| RateEntry {
                var: v.to_string(),
                rate: sol.get(v),
                weight: w,
            })
        })
        .collect();
    let recomputed: f64 = rates.iter().map(|r| r.rate * r.weight).sum();
    if (recomputed - sol.value).abs() > 1e-8 * (1.0 + sol.value.abs()) {
        return Err(CliError::Infeasible(format!(
            "cost {} disagrees with its rates ({recomputed})",
            sol.value
        )));
    }
    let constants = problem
        .region
        .constraints()
        .iter()
        .enumerate()
        .map(|(k, c)| Constant {
            id: k + 1,
            description: c.label.clone(),
            value: c.rhs,
        })
        .collect();
    Ok(CostReport {
        mode,
        cost: sol.value,
        rates,
        costs: problem.costs,
        constants,
        baseline: problem.baseline,
    })
}

/// One row per constraint: id, a coefficient column per variable, sense,
/// rhs and the symbolic rhs.
pub fn region_csv<W: Write>(region: &RateRegion, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend(region.vars().iter().map(|v| v.to_string()));
    header.extend(["sense", "rhs", "description"].map(String::from));
    w.write_record(&header)?;
    for (k, c) in region.constraints().iter().enumerate() {
        let mut row = vec![(k + 1).to_string()];
        row.extend(region.vars().iter().map(|&v| sig12(c.coeff(v))));
        row.extend([">=".to_string(), sig12(c.rhs), c.label.clone()]);
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io("output", e))?;
    Ok(())
}

/// Parse `0:12=0.6,0:1=0.1` into packet rates.
pub fn parse_rates(text: &str) -> Result<BTreeMap<PacketId, f64>> {
    let mut rates = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Validation(format!("--rates: cannot read {item:?}, expected source:sinks=rate"));
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let packet = PacketId::parse(key).ok_or_else(bad)?;
        let rate: f64 = value.trim().parse().map_err(|_| bad())?;
        if !rate.is_finite() || rate < 0.0 {
            return Err(CliError::Validation(format!(
                "--rates: {item:?} needs a nonnegative rate"
            )));
        }
        if rates.insert(packet, rate).is_some() {
            return Err(CliError::Validation(format!("--rates: packet {key} given twice")));
        }
    }
    if rates.is_empty() {
        return Err(CliError::Validation("--rates: no packets given".into()));
    }
    Ok(rates)
}

pub fn simulate(
    scn: &Scenario,
    n: usize,
    rates: BTreeMap<PacketId, f64>,
    trials: u64,
    seed: u64,
) -> Result<BinSimReport> {
    if n == 0 || n > MAX_BLOCKLENGTH {
        return Err(CliError::Validation(format!(
            "--n: blocklength {n} outside 1..={MAX_BLOCKLENGTH}"
        )));
    }
    if trials == 0 {
        return Err(CliError::Validation("--trials: need at least one trial".into()));
    }
    let model = BinModel::General {
        pmf: scn.source_pmf()?,
        demands: scn.demands.clone(),
    };
    Ok(run_power_binning(&BinSimConfig {
        n,
        model,
        rates,
        trials,
        seed,
    })?)
}

pub fn simulate_text(r: &BinSimReport) -> String {
    let mut s = format!("n = {}, {} trials, seed {}\n", r.n, r.trials, r.seed);
    for e in &r.per_sink {
        let _ = writeln!(
            s,
            "sink {}: {} errors, rate {} +/- {}",
            e.sink + 1,
            e.errors,
            sig12(e.error_rate),
            sig12(e.ci_half_width)
        );
    }
    let _ = writeln!(s, "average block error rate {}", sig12(r.average));
    s
}

pub fn simulate_csv<W: Write>(r: &BinSimReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sink", "n", "trials", "seed", "errors", "error_rate", "ci_half_width"])?;
    for e in &r.per_sink {
        w.write_record([
            (e.sink + 1).to_string(),
            r.n.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
            e.errors.to_string(),
            sig12(e.error_rate),
            sig12(e.ci_half_width),
        ])?;
    }
    let errors: u64 = r.per_sink.iter().map(|e| e.errors).sum();
    w.write_record([
        "average".to_string(),
        r.n.to_string(),
        r.trials.to_string(),
        r.seed.to_string(),
        errors.to_string(),
        sig12(r.average),
        sig12(r.max_ci()),
    ])?;
    w.flush().map_err(|e| CliError::io("output", e))?;
    Ok(())
}

pub struct SweepOutput {
    pub text: String,
    pub rows: Vec<(String, HelperAux, HelperRates, f64)>,
}

pub fn helper_sweep_run(p1: f64, p2: f64, delta: f64, grid: usize) -> Result<SweepOutput> {
    let s = helper_sweep(p1, p2, delta, grid)?;
    let w = HelperWeights::unit();
    let analytic_cost = w.cost(&s.analytic_rates);
    let r0 = helper_broadcast_rate(p1, p2, delta)?;
    let bc = w.broadcast_cost(r0, hb(p1)? + delta, hb(p2)? + delta);
    let text = format!(
        "best grid point: fine sink {}, p_fine {}, p_coarse {}, cost {}\n\
         analytic choice: fine sink {}, p_fine {}, p_coarse {}, cost {}\n\
         helper broadcast cost {}\n",
        s.aux.fine_sink + 1,
        sig12(s.aux.p_fine),
        sig12(s.aux.p_coarse()),
        sig12(s.cost),
        s.analytic.fine_sink + 1,
        sig12(s.analytic.p_fine),
        sig12(s.analytic.p_coarse()),
        sig12(analytic_cost),
        sig12(bc),
    );
    let rows = vec![
        ("sweep".to_string(), s.aux, s.rates, s.cost),
        ("analytic".to_string(), s.analytic, s.analytic_rates, analytic_cost),
    ];
    Ok(SweepOutput { text, rows })
}

pub fn helper_sweep_csv<W: Write>(rows: &[(String, HelperAux, HelperRates, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "point",
        "fine_sink",
        "p_fine",
        "p_extra",
        "p_coarse",
        "R[0,12]",
        "R[0,1]",
        "R[0,2]",
        "R[1,1]",
        "R[2,2]",
        "cost",
    ])?;
    for (name, aux, r, cost) in rows {
        w.write_record([
            name.clone(),
            (aux.fine_sink + 1).to_string(),
            sig12(aux.p_fine),
            sig12(aux.p_extra),
            sig12(aux.p_coarse()),
            sig12(r.r012),
            sig12(r.r01),
            sig12(r.r02),
            sig12(r.r11),
            sig12(r.r22),
            sig12(*cost),
        ])?;
    }
    w.flush().map_err(|e| CliError::io("output", e))?;
    Ok(())
}
