//! Exact discrete probability engine.
//!
//! Every entropic constant used by the rate regions is computed here by
//! summing over the full joint table. Logarithms are base 2 and `0 log 0 = 0`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::netgraph::DemandMap;
use crate::sinkset::SinkSet;

/// Sum tolerance for a valid pmf.
pub const PMF_SUM_TOL: f64 = 1e-12;
/// Entrywise tolerance of the Markov factorisation check.
pub const MARKOV_TOL: f64 = 1e-9;
/// Mutual informations above `-MI_CLAMP` are clamped to zero.
pub const MI_CLAMP: f64 = 1e-12;

const MAX_TABLE: usize = 1 << 24;
const MAX_VARS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// The source observed at source node `i`.
    Source(usize),
    /// Auxiliary variable `U_{i,K}` of source `source` for sink subset `sinks`.
    Auxiliary { source: usize, sinks: SinkSet },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
    pub alphabet: usize,
}

impl Variable {
    pub fn source(name: impl Into<String>, index: usize, alphabet: usize) -> Self {
        Variable {
            name: name.into(),
            role: VarRole::Source(index),
            alphabet,
        }
    }

    pub fn auxiliary(name: impl Into<String>, source: usize, sinks: SinkSet, alphabet: usize) -> Self {
        Variable {
            name: name.into(),
            role: VarRole::Auxiliary { source, sinks },
            alphabet,
        }
    }
}

/// A set of variable positions into a [`JointPmf`], kept sorted.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSubset(u64);

impl VarSubset {
    pub const EMPTY: VarSubset = VarSubset(0);

    /// Fails on duplicates or on positions that cannot be represented.
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for i in indices {
            if i >= MAX_VARS {
                return Err(Error::VariableOutOfRange {
                    index: i,
                    count: MAX_VARS,
                });
            }
            if mask & (1 << i) != 0 {
                return Err(Error::InvalidParameter(format!("duplicate variable index {i}")));
            }
            mask |= 1 << i;
        }
        Ok(VarSubset(mask))
    }

    pub fn single(index: usize) -> Self {
        VarSubset(1 << index)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_VARS && self.0 & (1 << index) != 0
    }

    pub fn union(self, other: VarSubset) -> VarSubset {
        VarSubset(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: VarSubset) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let m = self.0;
        (0..MAX_VARS).filter(move |i| m & (1 << i) != 0)
    }
}

impl FromIterator<usize> for VarSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VarSubset(iter.into_iter().fold(0, |m, i| m | (1 << i)))
    }
}

impl fmt::Debug for VarSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Discrete joint distribution stored row-major over the variable order
/// (the last variable varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    vars: Vec<Variable>,
    probs: Vec<f64>,
    strides: Vec<usize>,
}

fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn strides_for(vars: &[Variable]) -> Vec<usize> {
    let mut strides = vec![1; vars.len()];
    for k in (0..vars.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * vars[k + 1].alphabet;
    }
    strides
}

impl JointPmf {
    pub fn new(vars: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidPmf("no variables".into()));
        }
        if vars.len() > MAX_VARS {
            return Err(Error::InvalidPmf(format!("more than {MAX_VARS} variables")));
        }
        let mut size = 1usize;
        for v in &vars {
            if v.alphabet == 0 {
                return Err(Error::InvalidPmf(format!("variable {} has an empty alphabet", v.name)));
            }
            size = size
                .checked_mul(v.alphabet)
                .filter(|&s| s <= MAX_TABLE)
                .ok_or_else(|| Error::InvalidPmf("joint table too large".into()))?;
        }
        for (a, va) in vars.iter().enumerate() {
            for vb in &vars[a + 1..] {
                if va.name == vb.name {
                    return Err(Error::InvalidPmf(format!("duplicate variable name {}", va.name)));
                }
                if va.role == vb.role {
                    return Err(Error::InvalidPmf(format!(
                        "variables {} and {} share the same role",
                        va.name, vb.name
                    )));
                }
            }
            if let VarRole::Auxiliary { sinks, .. } = va.role {
                if sinks.is_empty() {
                    return Err(Error::InvalidAuxiliary(format!("{} has an empty sink set", va.name)));
                }
            }
        }
        if probs.len() != size {
            return Err(Error::InvalidPmf(format!(
                "expected {size} probabilities, got {}",
                probs.len()
            )));
        }
        if let Some((k, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!(
                "entry {k} is {p}, must be a nonnegative number"
            )));
        }
        let total = neumaier_sum(probs.iter().copied());
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!(
                "probabilities sum to {total}, not 1 (normalization)"
            )));
        }
        let strides = strides_for(&vars);
        Ok(JointPmf { vars, probs, strides })
    }

    /// Build a pmf by evaluating `f` on every joint outcome.
    pub fn from_fn(vars: Vec<Variable>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let strides = strides_for(&vars);
        let size: usize = vars.iter().map(|v| v.alphabet).product();
        let mut digits = vec![0usize; vars.len()];
        let probs = (0..size)
            .map(|idx| {
                for (k, d) in digits.iter_mut().enumerate() {
                    *d = (idx / strides[k]) % vars[k].alphabet;
                }
                f(&digits)
            })
            .collect();
        JointPmf::new(vars, probs)
    }

    /// Uniform `X_0` observed through independent binary symmetric channels
    /// with crossovers `p1` and `p2`, giving `(X_0, X_1, X_2)`.
    pub fn dsbs_star(p1: f64, p2: f64) -> Result<Self> {
        check_probability(p1)?;
        check_probability(p2)?;
        let vars = vec![
            Variable::source("X0", 0, 2),
            Variable::source("X1", 1, 2),
            Variable::source("X2", 2, 2),
        ];
        JointPmf::from_fn(vars, |d| 0.5 * bsc(p1, d[0], d[1]) * bsc(p2, d[0], d[2]))
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn all(&self) -> VarSubset {
        (0..self.vars.len()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn source_position(&self, source: usize) -> Option<usize> {
        self.vars.iter().position(|v| v.role == VarRole::Source(source))
    }

    pub fn auxiliary_position(&self, source: usize, sinks: SinkSet) -> Option<usize> {
        self.vars
            .iter()
            .position(|v| v.role == VarRole::Auxiliary { source, sinks })
    }

    /// Number of source variables, after checking they are labelled `0..N`.
    pub fn num_sources(&self) -> Result<usize> {
        let mut seen: Vec<usize> = self
            .vars
            .iter()
            .filter_map(|v| match v.role {
                VarRole::Source(i) => Some(i),
                _ => None,
            })
            .collect();
        seen.sort_unstable();
        if seen.iter().enumerate().any(|(k, &i)| k != i) {
            return Err(Error::InvalidPmf("source variables must be labelled 0..N".into()));
        }
        Ok(seen.len())
    }

    /// Positions of all source variables.
    pub fn sources(&self) -> VarSubset {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.role, VarRole::Source(_)))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn has_auxiliaries(&self) -> bool {
        self.vars.iter().any(|v| matches!(v.role, VarRole::Auxiliary { .. }))
    }

    fn check_subset(&self, s: VarSubset) -> Result<()> {
        if let Some(i) = s.iter().find(|&i| i >= self.vars.len()) {
            return Err(Error::VariableOutOfRange {
                index: i,
                count: self.vars.len(),
            });
        }
        Ok(())
    }

    /// Marginal table over `keep`, row-major in increasing position order.
    pub fn marginal_table(&self, keep: VarSubset) -> Result<Vec<f64>> {
        self.check_subset(keep)?;
        let kept: Vec<usize> = keep.iter().collect();
        let mut mstrides = vec![1usize; kept.len()];
        for k in (0..kept.len().saturating_sub(1)).rev() {
            mstrides[k] = mstrides[k + 1] * self.vars[kept[k + 1]].alphabet;
        }
        let size: usize = kept.iter().map(|&v| self.vars[v].alphabet).product();
        let mut table = vec![0.0; size];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let m: usize = kept
                .iter()
                .zip(&mstrides)
                .map(|(&v, &ms)| ((idx / self.strides[v]) % self.vars[v].alphabet) * ms)
                .sum();
            table[m] += p;
        }
        Ok(table)
    }

    /// Joint entropy of the variables in `s`, in bits. The empty set has
    /// entropy zero.
    pub fn entropy(&self, s: VarSubset) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of(&self.marginal_table(s)?))
    }
}

fn bsc(p: f64, input: usize, output: usize) -> f64 {
    if input == output {
        1.0 - p
    } else {
        p
    }
}

/// Shannon entropy of a probability vector, in bits.
pub fn entropy_of(probs: &[f64]) -> f64 {
    -neumaier_sum(probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()))
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

/// Marginal distribution over `keep`, preserving variable metadata.
pub fn marginalize(pmf: &JointPmf, keep: VarSubset) -> Result<JointPmf> {
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    let probs = pmf.marginal_table(keep)?;
    let vars = keep.iter().map(|k| pmf.vars[k].clone()).collect::<Vec<_>>();
    let strides = strides_for(&vars);
    Ok(JointPmf { vars, probs, strides })
}

/// `H(target | given)` in bits.
pub fn cond_entropy(pmf: &JointPmf, target: VarSubset, given: VarSubset) -> Result<f64> {
    if target.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !target.is_disjoint(given) {
        return Err(Error::OverlappingSubsets);
    }
    let h = pmf.entropy(target.union(given))? - pmf.entropy(given)?;
    Ok(h.max(0.0))
}

/// `I(a; b | given)` in bits, clamped at zero.
pub fn mutual_info(pmf: &JointPmf, a: VarSubset, b: VarSubset, given: VarSubset) -> Result<f64> {
    if !a.is_disjoint(b) || !a.is_disjoint(given) || !b.is_disjoint(given) {
        return Err(Error::OverlappingSubsets);
    }
    let i = pmf.entropy(a.union(given))? + pmf.entropy(b.union(given))?
        - pmf.entropy(a.union(b).union(given))?
        - pmf.entropy(given)?;
    Ok(if i < 0.0 { 0.0 } else { i })
}

/// Binary entropy function.
pub fn hb(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(entropy_of(&[p, 1.0 - p]))
}

/// Crossover probability of two cascaded binary symmetric channels.
pub fn bsc_convolve(p: f64, q: f64) -> Result<f64> {
    check_probability(p)?;
    check_probability(q)?;
    Ok((p * (1.0 - q) + q * (1.0 - p)).clamp(0.0, 1.0))
}

/// Find `x` in `[0, 1/2]` with `hb(bsc_convolve(p_base, x)) == target`.
///
/// `hb(p_base * x)` is nondecreasing in `x` on `[0, 1/2]`, so plain bisection
/// suffices.
pub fn solve_crossover(p_base: f64, target: f64) -> Result<f64> {
    check_probability(p_base)?;
    let p = p_base.min(1.0 - p_base);
    let lo_target = hb(p)?;
    if !target.is_finite() || target < lo_target - 1e-12 || target > 1.0 + 1e-12 {
        return Err(Error::TargetOutOfRange { target, lo: lo_target });
    }
    let f = |x: f64| hb(bsc_convolve(p, x).unwrap_or(0.5)).unwrap_or(1.0) - target;
    if f(0.0) >= 0.0 {
        return Ok(0.0);
    }
    if f(0.5) <= 0.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Outcome of [`validate_markov`].
#[derive(Clone, Debug, PartialEq)]
pub enum MarkovCheck {
    Holds,
    Violated(MarkovViolation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovViolation {
    /// Zero-based sink at which the factorisation fails.
    pub sink: usize,
    /// Largest absolute difference between joint and factored probability.
    pub worst: f64,
    /// The outcome where the worst difference occurs, as (variable, value).
    pub entry: Vec<(String, usize)>,
    pub joint: f64,
    pub factored: f64,
}

impl MarkovCheck {
    pub fn holds(&self) -> bool {
        matches!(self, MarkovCheck::Holds)
    }
}

/// Index of an assignment (given as digits over `full`) inside the marginal
/// table of `sub`, where `sub` is a subset of `full`.
fn sub_index(pmf: &JointPmf, full: &[usize], digits: &[usize], sub: VarSubset) -> usize {
    let mut idx = 0;
    for (k, &v) in full.iter().enumerate() {
        if sub.contains(v) {
            idx = idx * pmf.vars[v].alphabet + digits[k];
        }
    }
    idx
}

/// Check that, for every sink `j`, the sources and the auxiliaries reaching
/// `j` factor as `P(X) * prod_i P({U_i}_{J(j)} | X_i)`.
pub fn validate_markov(pmf: &JointPmf, demands: &DemandMap) -> Result<MarkovCheck> {
    let n_sources = pmf.num_sources()?;
    if n_sources != demands.num_sources() {
        return Err(Error::InvalidPmf(format!(
            "pmf has {n_sources} sources, demands expect {}",
            demands.num_sources()
        )));
    }
    let all_sinks = SinkSet::full(demands.num_sinks());
    for v in &pmf.vars {
        if let VarRole::Auxiliary { source, sinks } = v.role {
            if source >= n_sources {
                return Err(Error::InvalidAuxiliary(format!(
                    "{} is attached to unknown source {source}",
                    v.name
                )));
            }
            if !sinks.is_subset_of(all_sinks) {
                return Err(Error::InvalidAuxiliary(format!(
                    "{} addresses sinks {sinks} outside the network",
                    v.name
                )));
            }
        }
    }
    let sources = pmf.sources();
    let source_table = pmf.marginal_table(sources)?;

    let mut worst: Option<MarkovViolation> = None;
    for sink in 0..demands.num_sinks() {
        let groups: Vec<(usize, VarSubset)> = (0..n_sources)
            .map(|i| {
                let group = pmf
                    .vars
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| {
                        matches!(v.role, VarRole::Auxiliary { source, sinks } if source == i && sinks.contains(sink))
                    })
                    .map(|(k, _)| k)
                    .collect::<VarSubset>();
                (pmf.source_position(i).expect("validated source"), group)
            })
            .collect();
        let all_aux = groups.iter().fold(VarSubset::EMPTY, |acc, (_, g)| acc.union(*g));
        if all_aux.is_empty() {
            continue;
        }
        let scope = sources.union(all_aux);
        let full: Vec<usize> = scope.iter().collect();
        let joint = pmf.marginal_table(scope)?;
        let cond: Vec<(VarSubset, Vec<f64>, VarSubset, Vec<f64>)> = groups
            .iter()
            .filter(|(_, g)| !g.is_empty())
            .map(|&(x, g)| {
                let xu = g.union(VarSubset::single(x));
                Ok((
                    xu,
                    pmf.marginal_table(xu)?,
                    VarSubset::single(x),
                    pmf.marginal_table(VarSubset::single(x))?,
                ))
            })
            .collect::<Result<_>>()?;

        let mut digits = vec![0usize; full.len()];
        for (flat, &p_joint) in joint.iter().enumerate() {
            let mut rem = flat;
            for k in (0..full.len()).rev() {
                let a = pmf.vars[full[k]].alphabet;
                digits[k] = rem % a;
                rem /= a;
            }
            let mut factored = source_table[sub_index(pmf, &full, &digits, sources)];
            for (xu, t_xu, x, t_x) in &cond {
                let px = t_x[sub_index(pmf, &full, &digits, *x)];
                factored *= if px > 0.0 {
                    t_xu[sub_index(pmf, &full, &digits, *xu)] / px
                } else {
                    0.0
                };
            }
            let diff = (p_joint - factored).abs();
            if diff > MARKOV_TOL && worst.as_ref().is_none_or(|w| diff > w.worst) {
                worst = Some(MarkovViolation {
                    sink,
                    worst: diff,
                    entry: full
                        .iter()
                        .zip(&digits)
                        .map(|(&v, &d)| (pmf.vars[v].name.clone(), d))
                        .collect(),
                    joint: p_joint,
                    factored,
                });
            }
        }
    }
    Ok(match worst {
        Some(v) => MarkovCheck::Violated(v),
        None => MarkovCheck::Holds,
    })
}

/// Memoised joint entropies of one pmf, keyed by variable subset.
pub struct Entropies<'a> {
    pmf: &'a JointPmf,
    cache: RefCell<HashMap<VarSubset, f64>>,
}

impl<'a> Entropies<'a> {
    pub fn new(pmf: &'a JointPmf) -> Self {
        Entropies {
            pmf,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn pmf(&self) -> &'a JointPmf {
        self.pmf
    }

    pub fn joint(&self, s: VarSubset) -> Result<f64> {
        if let Some(&h) = self.cache.borrow().get(&s) {
            return Ok(h);
        }
        let h = self.pmf.entropy(s)?;
        self.cache.borrow_mut().insert(s, h);
        Ok(h)
    }

    /// `H(target | given)` without the disjointness check; overlap is
    /// harmless here because the union absorbs it.
    pub fn cond(&self, target: VarSubset, given: VarSubset) -> Result<f64> {
        Ok((self.joint(target.union(given))? - self.joint(given)?).max(0.0))
    }

    pub fn mutual(&self, a: VarSubset, b: VarSubset, given: VarSubset) -> Result<f64> {
        let i = self.joint(a.union(given))? + self.joint(b.union(given))?
            - self.joint(a.union(b).union(given))?
            - self.joint(given)?;
        Ok(i.max(0.0))
    }
}
