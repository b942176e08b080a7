//! Monte Carlo power binning at small blocklength.
//!
//! Every length-`n` binary sequence of a coded source gets an independent
//! pseudorandom bin index for each packet the source sends. A sink keeps the
//! sequences whose bins match everything it received and picks the one most
//! likely given its side information (the sources it requests that are sent
//! uncoded). Sources without any rate entry count as uncoded.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netgraph::DemandMap;
use crate::probkit::{JointPmf, VarRole};
use crate::sinkset::{PacketId, SinkSet};

pub const MAX_BLOCKLENGTH: usize = 20;
/// Cap on `n` times the number of coded sources decoded jointly at one sink.
pub const MAX_DECODE_BITS: usize = 20;
const MAX_SOURCES: usize = 3;
const MAX_BINS: u64 = 1 << 62;

#[derive(Clone, Debug, PartialEq)]
pub enum BinModel {
    /// `X1`, `X2` are a uniform `X0` through BSC(p1) and BSC(p2); sink 1
    /// wants `(X0, X1)` and sink 2 wants `(X0, X2)`.
    DsbsStar { p1: f64, p2: f64 },
    /// Binary sources with arbitrary correlation and demands.
    General { pmf: JointPmf, demands: DemandMap },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinSimConfig {
    pub n: usize,
    pub model: BinModel,
    /// Bits per source symbol for each packet.
    pub rates: BTreeMap<PacketId, f64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinkEstimate {
    /// Zero-based sink.
    pub sink: usize,
    pub errors: u64,
    pub error_rate: f64,
    /// Half-width of the 95% interval.
    pub ci_half_width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinSimReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub per_sink: Vec<SinkEstimate>,
    /// Mean of the per-sink error rates.
    pub average: f64,
}

impl BinSimReport {
    /// Widest per-sink interval.
    pub fn max_ci(&self) -> f64 {
        self.per_sink.iter().map(|s| s.ci_half_width).fold(0.0, f64::max)
    }
}

/// Normal interval with continuity correction. A single trial gives a
/// half-width of 0.5, an interval of total width 1.
pub fn ci_half_width(errors: u64, trials: u64) -> f64 {
    let t = trials as f64;
    let p = errors as f64 / t;
    (1.96 * (p * (1.0 - p) / t).sqrt() + 0.5 / t).min(1.0)
}

/// `ceil(2^(n R))`, at least one bin.
pub fn bin_count(n: usize, rate: f64) -> u64 {
    let bins = (n as f64 * rate).exp2().ceil();
    if bins >= MAX_BINS as f64 {
        MAX_BINS
    } else {
        (bins as u64).max(1)
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bin of `sequence` for `packet`, uniform over `0..bins`.
pub fn bin_index(seed: u64, packet: PacketId, sequence: u64, bins: u64) -> u64 {
    let key = mix(mix(mix(seed) ^ packet.source as u64) ^ u64::from(packet.sinks.bits()));
    let h = mix(key ^ sequence);
    ((u128::from(h) * u128::from(bins)) >> 64) as u64
}

/// Bin of every sequence plus the sequences sorted by bin.
struct BinTable {
    packet: PacketId,
    bins: Vec<u64>,
    by_bin: Vec<(u64, u32)>,
    count: u64,
}

impl BinTable {
    fn new(seed: u64, packet: PacketId, n: usize, rate: f64) -> Self {
        let count = bin_count(n, rate);
        let bins: Vec<u64> = (0..1u64 << n).map(|s| bin_index(seed, packet, s, count)).collect();
        let mut by_bin: Vec<(u64, u32)> = bins.iter().enumerate().map(|(s, &b)| (b, s as u32)).collect();
        by_bin.sort_unstable();
        BinTable {
            packet,
            bins,
            by_bin,
            count,
        }
    }

    fn members(&self, bin: u64) -> &[(u64, u32)] {
        let lo = self.by_bin.partition_point(|&(b, _)| b < bin);
        let hi = self.by_bin.partition_point(|&(b, _)| b <= bin);
        &self.by_bin[lo..hi]
    }
}

/// What one sink decodes and with which help.
struct SinkPlan {
    /// Coded sources to decode and the tables of the packets reaching this sink.
    coded: Vec<(usize, Vec<usize>)>,
    /// Row-major log-probabilities over `order` (sorted source indices).
    order: Vec<usize>,
    log_p: Vec<f64>,
}

struct Prepared {
    n: usize,
    num_sources: usize,
    /// Cumulative joint pmf of the sources, row-major over source index.
    cumulative: Vec<f64>,
    tables: Vec<BinTable>,
    sinks: Vec<SinkPlan>,
}

fn resolve(model: &BinModel) -> Result<(JointPmf, DemandMap)> {
    match model {
        BinModel::DsbsStar { p1, p2 } => Ok((
            JointPmf::dsbs_star(*p1, *p2)?,
            DemandMap::new(3, vec![vec![0, 1], vec![0, 2]])?,
        )),
        BinModel::General { pmf, demands } => Ok((pmf.clone(), demands.clone())),
    }
}

impl Prepared {
    fn new(cfg: &BinSimConfig) -> Result<Self> {
        let n = cfg.n;
        if n == 0 || n > MAX_BLOCKLENGTH {
            return Err(Error::InvalidConfig(format!(
                "blocklength {n} outside 1..={MAX_BLOCKLENGTH}"
            )));
        }
        if cfg.trials == 0 {
            return Err(Error::InvalidConfig("zero trials".into()));
        }
        let (pmf, demands) = resolve(&cfg.model)?;
        let num_sources = pmf.num_sources()?;
        if num_sources != demands.num_sources() {
            return Err(Error::InvalidConfig(
                "pmf and demands disagree on the number of sources".into(),
            ));
        }
        if num_sources > MAX_SOURCES {
            return Err(Error::InvalidConfig(format!(
                "at most {MAX_SOURCES} sources can be simulated"
            )));
        }
        if pmf
            .vars()
            .iter()
            .any(|v| matches!(v.role, VarRole::Source(_)) && v.alphabet != 2)
        {
            return Err(Error::InvalidConfig("simulated sources must be binary".into()));
        }
        for (p, &r) in &cfg.rates {
            if p.source >= num_sources {
                return Err(Error::InvalidConfig(format!("rate for unknown source {}", p.source)));
            }
            if p.sinks.is_empty() || !p.sinks.is_subset_of(demands.pi(p.source)) {
                return Err(Error::InvalidConfig(format!(
                    "packet {p} goes to sinks that do not request source {}",
                    p.source
                )));
            }
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidConfig(format!("rate {r} for packet {p}")));
            }
        }

        // Source joint in source-index order; the pmf may order variables differently.
        let positions: Vec<usize> = (0..num_sources)
            .map(|i| pmf.source_position(i).expect("validated sources"))
            .collect();
        let by_position = pmf.marginal_table(pmf.sources())?;
        let mut sorted_pos = positions.clone();
        sorted_pos.sort_unstable();
        let mut joint = vec![0.0; 1 << num_sources];
        for (idx, &p) in by_position.iter().enumerate() {
            let mut out = 0;
            for (i, &pos) in positions.iter().enumerate() {
                let k = sorted_pos.iter().position(|&q| q == pos).unwrap();
                let bit = (idx >> (num_sources - 1 - k)) & 1;
                out |= bit << (num_sources - 1 - i);
            }
            joint[out] += p;
        }
        let mut acc = 0.0;
        let cumulative = joint
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();

        let coded: Vec<bool> = (0..num_sources)
            .map(|i| cfg.rates.keys().any(|p| p.source == i))
            .collect();
        let tables: Vec<BinTable> = cfg
            .rates
            .iter()
            .map(|(&p, &r)| BinTable::new(cfg.seed, p, n, r))
            .collect();

        let mut sinks = Vec::new();
        for j in 0..demands.num_sinks() {
            let order: Vec<usize> = demands.sigma(j).iter().copied().collect();
            let decode: Vec<(usize, Vec<usize>)> = order
                .iter()
                .filter(|&&i| coded[i])
                .map(|&i| {
                    let received = tables
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| t.packet.source == i && t.packet.sinks.contains(j))
                        .map(|(k, _)| k)
                        .collect();
                    (i, received)
                })
                .collect();
            if decode.len() * n > MAX_DECODE_BITS {
                return Err(Error::InvalidConfig(format!(
                    "sink {} would search 2^{} candidates (cap 2^{MAX_DECODE_BITS})",
                    j + 1,
                    decode.len() * n
                )));
            }
            let log_p = (0..1usize << order.len())
                .map(|pattern| {
                    let p: f64 = joint
                        .iter()
                        .enumerate()
                        .filter(|(full, _)| {
                            order.iter().enumerate().all(|(k, &i)| {
                                (full >> (num_sources - 1 - i)) & 1 == (pattern >> (order.len() - 1 - k)) & 1
                            })
                        })
                        .map(|(_, p)| p)
                        .sum();
                    if p > 0.0 {
                        p.log2()
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            sinks.push(SinkPlan {
                coded: decode,
                order,
                log_p,
            });
        }
        Ok(Prepared {
            n,
            num_sources,
            cumulative,
            tables,
            sinks,
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let mut words = vec![0u32; self.num_sources];
        for t in 0..self.n {
            let u: f64 = rng.random();
            let sym = self
                .cumulative
                .partition_point(|&c| c <= u)
                .min(self.cumulative.len() - 1);
            for (i, w) in words.iter_mut().enumerate() {
                if (sym >> (self.num_sources - 1 - i)) & 1 == 1 {
                    *w |= 1 << t;
                }
            }
        }
        words
    }

    fn candidates(&self, received: &[usize], truth: u32) -> Vec<u32> {
        let Some(&first) = received.iter().max_by_key(|&&k| self.tables[k].count) else {
            return (0..1u32 << self.n).collect();
        };
        let table = &self.tables[first];
        table
            .members(table.bins[truth as usize])
            .iter()
            .map(|&(_, s)| s)
            .filter(|&s| {
                received
                    .iter()
                    .all(|&k| self.tables[k].bins[s as usize] == self.tables[k].bins[truth as usize])
            })
            .collect()
    }

    fn log_likelihood(&self, plan: &SinkPlan, words: &[u32]) -> f64 {
        let mask = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        let width = plan.order.len();
        let mut total = 0.0;
        for (pattern, &lp) in plan.log_p.iter().enumerate() {
            let mut hit = mask;
            for (k, w) in words.iter().enumerate() {
                hit &= if (pattern >> (width - 1 - k)) & 1 == 1 { *w } else { !*w };
            }
            let count = hit.count_ones();
            if count > 0 {
                total += f64::from(count) * lp;
            }
        }
        total
    }

    /// One trial; returns which sinks decoded wrongly.
    fn trial(&self, seed: u64, trial: u64) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let truth = self.sample(&mut rng);
        self.sinks
            .iter()
            .map(|plan| {
                if plan.coded.is_empty() {
                    return false;
                }
                let lists: Vec<Vec<u32>> = plan
                    .coded
                    .iter()
                    .map(|(i, received)| self.candidates(received, truth[*i]))
                    .collect();
                let mut words: Vec<u32> = plan.order.iter().map(|&i| truth[i]).collect();
                let slots: Vec<usize> = plan
                    .coded
                    .iter()
                    .map(|(i, _)| plan.order.iter().position(|o| o == i).unwrap())
                    .collect();
                let mut idx = vec![0usize; lists.len()];
                let mut best: Option<(f64, Vec<usize>)> = None;
                let mut ties = 0u64;
                loop {
                    for (k, &slot) in slots.iter().enumerate() {
                        words[slot] = lists[k][idx[k]];
                    }
                    let ll = self.log_likelihood(plan, &words);
                    match &best {
                        Some((b, _)) if ll < *b - 1e-9 => {}
                        Some((b, _)) if ll <= *b + 1e-9 => {
                            ties += 1;
                            if rng.random_range(0..ties) == 0 {
                                best = Some((*b, idx.clone()));
                            }
                        }
                        _ => {
                            best = Some((ll, idx.clone()));
                            ties = 1;
                        }
                    }
                    // Odometer over the candidate lists.
                    let mut k = 0;
                    while k < idx.len() {
                        idx[k] += 1;
                        if idx[k] < lists[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == idx.len() {
                        break;
                    }
                }
                let (_, chosen) = best.expect("the true sequence is always a candidate");
                plan.coded
                    .iter()
                    .enumerate()
                    .any(|(k, (i, _))| lists[k][chosen[k]] != truth[*i])
            })
            .collect()
    }
}

/// Run `cfg.trials` independent blocks and report per-sink block error rates.
pub fn run_power_binning(cfg: &BinSimConfig) -> Result<BinSimReport> {
    let prep = Prepared::new(cfg)?;
    let m = prep.sinks.len();
    let counts = (0..cfg.trials)
        .into_par_iter()
        .map(|t| prep.trial(cfg.seed, t))
        .fold(
            || vec![0u64; m],
            |mut acc, errs| {
                for (a, e) in acc.iter_mut().zip(errs) {
                    *a += u64::from(e);
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; m],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let per_sink: Vec<SinkEstimate> = counts
        .iter()
        .enumerate()
        .map(|(sink, &errors)| SinkEstimate {
            sink,
            errors,
            error_rate: errors as f64 / cfg.trials as f64,
            ci_half_width: ci_half_width(errors, cfg.trials),
        })
        .collect();
    let average = per_sink.iter().map(|s| s.error_rate).sum::<f64>() / m as f64;
    Ok(BinSimReport {
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        per_sink,
        average,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub offset: f64,
    pub n: usize,
    pub per_sink: Vec<f64>,
    pub error: f64,
    /// Widest per-sink interval half-width.
    pub ci: f64,
}

/// For each offset and blocklength, shift every coded source's widest packet
/// (the one addressed to the most sinks) by `offset` bits, clamped at zero,
/// and simulate. An empty `blocklengths` uses `base.n`.
pub fn threshold_sweep(base: &BinSimConfig, offsets: &[f64], blocklengths: &[usize]) -> Result<Vec<SweepRow>> {
    let ns: Vec<usize> = if blocklengths.is_empty() {
        vec![base.n]
    } else {
        blocklengths.to_vec()
    };
    let mut widest: BTreeMap<usize, PacketId> = BTreeMap::new();
    for p in base.rates.keys() {
        let e = widest.entry(p.source).or_insert(*p);
        if (p.sinks.len(), p.sinks.bits()) > (e.sinks.len(), e.sinks.bits()) {
            *e = *p;
        }
    }
    let mut rows = Vec::new();
    for &offset in offsets {
        let mut rates = base.rates.clone();
        for p in widest.values() {
            let r = rates.get_mut(p).expect("packet from the same map");
            *r = (*r + offset).max(0.0);
        }
        for &n in &ns {
            let cfg = BinSimConfig {
                n,
                rates: rates.clone(),
                ..base.clone()
            };
            let report = run_power_binning(&cfg)?;
            rows.push(SweepRow {
                offset,
                n,
                per_sink: report.per_sink.iter().map(|s| s.error_rate).collect(),
                error: report.average,
                ci: report.max_ci(),
            });
        }
    }
    Ok(rows)
}

/// Source-0 packet rates for the two-sink DSBS star: `R[0,12]` carries the
/// smaller of `h1`, `h2` plus `offset`, and the sink with the larger
/// conditional entropy gets the difference as a private packet.
pub fn dsbs_shared_rates(h1: f64, h2: f64, offset: f64) -> BTreeMap<PacketId, f64> {
    let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
    let private = if h1 <= h2 { 1 } else { 0 };
    BTreeMap::from([
        (PacketId::new(0, SinkSet::full(2)), (lo + offset).max(0.0)),
        (PacketId::new(0, SinkSet::singleton(private)), hi - lo),
    ])
}
