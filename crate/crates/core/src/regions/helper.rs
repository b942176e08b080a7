//! Two sinks, one helper: sink 1 wants `X1`, sink 2 wants `X2`, and source 0
//! only helps. `X1` and `X2` are a uniform `X0` seen through binary symmetric
//! channels with crossovers `p1` and `p2`.
//!
//! The auxiliaries are binary symmetric degradations of `X0`: a fine one
//! `U_fine = BSC(p_fine)(X0)` sent privately to one sink, and a shared
//! `U0 = BSC(p_extra)(U_fine)` sent to both. The other private auxiliary is
//! constant. The fine channel goes to the sink that needs more help, that is
//! the one whose target crossover is smaller.

use super::{LinearConstraint, Provenance, RateRegion, RateVar};
use crate::error::{Error, Result};
use crate::probkit::{bsc_convolve, hb, solve_crossover, Entropies, JointPmf, VarSubset, Variable};
use crate::sinkset::SinkSet;

/// Parameters of the binary symmetric auxiliaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelperAux {
    pub p_fine: f64,
    pub p_extra: f64,
    /// Zero-based sink receiving the private auxiliary (0 or 1).
    pub fine_sink: usize,
}

impl HelperAux {
    /// Shared auxiliary built from the fine one and its coarse crossover.
    pub fn from_coarse(p_fine: f64, p_coarse: f64, fine_sink: usize) -> Result<Self> {
        if !(0.0..=0.5).contains(&p_fine) || !(p_fine..=0.5).contains(&p_coarse) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= p_fine <= p_coarse <= 1/2, got {p_fine} and {p_coarse}"
            )));
        }
        // p_fine . x = p_fine + x (1 - 2 p_fine)
        let p_extra = if p_fine >= 0.5 {
            0.5
        } else {
            ((p_coarse - p_fine) / (1.0 - 2.0 * p_fine)).clamp(0.0, 0.5)
        };
        Ok(HelperAux {
            p_fine,
            p_extra,
            fine_sink,
        })
    }

    /// Target crossovers `(p01, p02)` with `H_b(p_j . p0j) = H_b(p_j) + delta`,
    /// or 1/2 when the excess already reaches one bit.
    pub fn roots(p1: f64, p2: f64, delta: f64) -> Result<(f64, f64)> {
        check_inputs(p1, p2, delta)?;
        let root = |p: f64| -> Result<f64> {
            let target = hb(p)? + delta;
            if target >= 1.0 {
                Ok(0.5)
            } else {
                solve_crossover(p, target)
            }
        };
        Ok((root(p1)?, root(p2)?))
    }

    /// Auxiliaries placing each sink exactly at its target crossover.
    pub fn analytic(p1: f64, p2: f64, delta: f64) -> Result<Self> {
        let (r1, r2) = HelperAux::roots(p1, p2, delta)?;
        if r1 <= r2 {
            HelperAux::from_coarse(r1, r2, 0)
        } else {
            HelperAux::from_coarse(r2, r1, 1)
        }
    }

    /// Both auxiliaries independent of everything.
    pub fn useless() -> Self {
        HelperAux {
            p_fine: 0.5,
            p_extra: 0.5,
            fine_sink: 1,
        }
    }

    pub fn p_coarse(&self) -> f64 {
        bsc_convolve(self.p_fine, self.p_extra).unwrap_or(0.5)
    }

    fn check(&self) -> Result<()> {
        for p in [self.p_fine, self.p_extra] {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "auxiliary crossover {p} outside [0, 1/2]"
                )));
            }
        }
        if self.fine_sink > 1 {
            return Err(Error::InvalidParameter(format!(
                "fine sink {} is not 0 or 1",
                self.fine_sink
            )));
        }
        Ok(())
    }
}

fn check_inputs(p1: f64, p2: f64, delta: f64) -> Result<()> {
    for p in [p1, p2] {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::InvalidParameter(format!("crossover {p} outside [0, 1/2]")));
        }
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("infeasible delta {delta}")));
    }
    Ok(())
}

fn bsc(p: f64, a: usize, b: usize) -> f64 {
    if a == b {
        1.0 - p
    } else {
        p
    }
}

/// Joint pmf of `(X0, X1, X2, U0, U_fine)`.
pub fn helper_pmf(p1: f64, p2: f64, aux: HelperAux) -> Result<JointPmf> {
    check_inputs(p1, p2, 0.0)?;
    aux.check()?;
    let fine_name = if aux.fine_sink == 0 { "U1" } else { "U2" };
    let vars = vec![
        Variable::source("X0", 0, 2),
        Variable::source("X1", 1, 2),
        Variable::source("X2", 2, 2),
        Variable::auxiliary("U0", 0, SinkSet::full(2), 2),
        Variable::auxiliary(fine_name, 0, SinkSet::singleton(aux.fine_sink), 2),
    ];
    JointPmf::from_fn(vars, |d| {
        0.5 * bsc(p1, d[0], d[1]) * bsc(p2, d[0], d[2]) * bsc(aux.p_fine, d[0], d[4]) * bsc(aux.p_extra, d[4], d[3])
    })
}

/// Minimum rates allowed by the five helper constraints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelperRates {
    pub r012: f64,
    pub r01: f64,
    pub r02: f64,
    pub r11: f64,
    pub r22: f64,
}

/// Per-edge weights of the helper network: `E0`-collector `w0`, collector to
/// each sink `w1`, `w2`, and the direct links `w11`, `w22`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelperWeights {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub w11: f64,
    pub w22: f64,
}

impl HelperWeights {
    /// Unit collector weights; direct links are free since their rates are fixed.
    pub fn unit() -> Self {
        HelperWeights {
            w0: 1.0,
            w1: 1.0,
            w2: 1.0,
            w11: 0.0,
            w22: 0.0,
        }
    }

    pub fn cost(&self, r: &HelperRates) -> f64 {
        self.w11 * r.r11
            + self.w22 * r.r22
            + (self.w0 + self.w1) * r.r01
            + (self.w0 + self.w2) * r.r02
            + (self.w0 + self.w1 + self.w2) * r.r012
    }

    /// Cost when the helper broadcasts `r0` to both sinks.
    pub fn broadcast_cost(&self, r0: f64, r11: f64, r22: f64) -> f64 {
        (self.w0 + self.w1 + self.w2) * r0 + self.w11 * r11 + self.w22 * r22
    }
}

struct HelperVars {
    x: [usize; 3],
    u0: usize,
    u: [Option<usize>; 2],
}

fn helper_vars(pmf: &JointPmf, aux: &HelperAux) -> HelperVars {
    let fine = pmf.auxiliary_position(0, SinkSet::singleton(aux.fine_sink));
    let mut u = [None, None];
    u[aux.fine_sink] = fine;
    HelperVars {
        x: [0, 1, 2].map(|i| pmf.source_position(i).expect("helper pmf")),
        u0: pmf.auxiliary_position(0, SinkSet::full(2)).expect("helper pmf"),
        u,
    }
}

pub fn helper_rates(p1: f64, p2: f64, aux: HelperAux) -> Result<HelperRates> {
    let pmf = helper_pmf(p1, p2, aux)?;
    let v = helper_vars(&pmf, &aux);
    let h = Entropies::new(&pmf);
    let one = VarSubset::single;
    let u0 = one(v.u0);
    let private = |j: usize| v.u[j].map_or(VarSubset::EMPTY, one);
    Ok(HelperRates {
        r012: h.mutual(one(v.x[0]), u0, VarSubset::EMPTY)?,
        r01: h.mutual(one(v.x[0]), private(0), u0)?,
        r02: h.mutual(one(v.x[0]), private(1), u0)?,
        r11: h.cond(one(v.x[1]), u0.union(private(0)))?,
        r22: h.cond(one(v.x[2]), u0.union(private(1)))?,
    })
}

/// The five helper constraints evaluated on the auxiliaries `aux`.
pub fn helper_region(p1: f64, p2: f64, aux: HelperAux) -> Result<RateRegion> {
    let r = helper_rates(p1, p2, aux)?;
    let (s1, s2, both) = (SinkSet::singleton(0), SinkSet::singleton(1), SinkSet::full(2));
    let rows = [
        (RateVar::packet(0, both), r.r012, "I(X0;U0)"),
        (RateVar::packet(0, s1), r.r01, "I(X0;U1|U0)"),
        (RateVar::packet(0, s2), r.r02, "I(X0;U2|U0)"),
        (RateVar::packet(1, s1), r.r11, "H(X1|U0,U1)"),
        (RateVar::packet(2, s2), r.r22, "H(X2|U0,U2)"),
    ];
    let mut region = RateRegion::new(Provenance::Helper, rows.iter().map(|r| r.0));
    for (var, rhs, label) in rows {
        region.push(LinearConstraint::sum([var], rhs, label)?)?;
    }
    Ok(region)
}

/// Smallest rate the helper must broadcast so that each sink, receiving its
/// own source at `H_b(p_j) + delta`, can decode.
pub fn helper_broadcast_rate(p1: f64, p2: f64, delta: f64) -> Result<f64> {
    let (r1, r2) = HelperAux::roots(p1, p2, delta)?;
    Ok((1.0 - hb(r1)?).max(1.0 - hb(r2)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HelperSweep {
    pub aux: HelperAux,
    pub rates: HelperRates,
    pub cost: f64,
    pub analytic: HelperAux,
    pub analytic_rates: HelperRates,
    /// Grid spacing in crossover units.
    pub cell: f64,
}

/// Grid search over `(p_fine, p_extra)` on `k / (2 grid_steps)` in both
/// orientations, minimising the unit-weight helper cost subject to each
/// sink's own rate staying within `delta` of its conditional entropy. The
/// best grid point is then pushed to the feasibility boundary inside its cell.
pub fn helper_sweep(p1: f64, p2: f64, delta: f64, grid_steps: usize) -> Result<HelperSweep> {
    check_inputs(p1, p2, delta)?;
    if grid_steps == 0 {
        return Err(Error::InvalidParameter("grid needs at least one step".into()));
    }
    let weights = HelperWeights::unit();
    let caps = [hb(p1)? + delta + 1e-12, hb(p2)? + delta + 1e-12];
    let feasible = |r: &HelperRates| r.r11 <= caps[0] && r.r22 <= caps[1];
    let cell = 0.5 / grid_steps as f64;

    let mut best: Option<(f64, HelperAux, HelperRates)> = None;
    for fine_sink in 0..2 {
        for a in 0..=grid_steps {
            for b in 0..=grid_steps {
                let aux = HelperAux {
                    p_fine: a as f64 * cell,
                    p_extra: b as f64 * cell,
                    fine_sink,
                };
                let r = helper_rates(p1, p2, aux)?;
                if !feasible(&r) {
                    continue;
                }
                let c = weights.cost(&r);
                if best.as_ref().is_none_or(|(bc, _, _)| c < *bc - 1e-15) {
                    best = Some((c, aux, r));
                }
            }
        }
    }
    let (mut cost, mut aux, mut rates) =
        best.ok_or_else(|| Error::InvalidParameter(format!("infeasible delta {delta}")))?;

    // The private sink only sees U_fine, the other only U0, so the two
    // crossovers can be pushed out one at a time.
    let eval = |pf: f64, pc: f64| -> Result<HelperRates> {
        helper_rates(p1, p2, HelperAux::from_coarse(pf, pc.max(pf), aux.fine_sink)?)
    };
    let fine_cap = caps[aux.fine_sink];
    let other_cap = caps[1 - aux.fine_sink];
    let fine_of = |r: &HelperRates| if aux.fine_sink == 0 { r.r11 } else { r.r22 };
    let other_of = |r: &HelperRates| if aux.fine_sink == 0 { r.r22 } else { r.r11 };
    let push_out = |lo: f64, hi: f64, ok: &dyn Fn(f64) -> Result<bool>| -> Result<f64> {
        if ok(hi)? {
            return Ok(hi);
        }
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    };
    let pc0 = aux.p_coarse();
    let pf = push_out(aux.p_fine, (aux.p_fine + cell).min(0.5), &|pf| {
        Ok(fine_of(&eval(pf, 0.5)?) <= fine_cap)
    })?;
    let pc = push_out(pc0.max(pf), (pc0 + cell).min(0.5).max(pf), &|pc| {
        Ok(other_of(&eval(pf, pc)?) <= other_cap)
    })?;
    let refined = HelperAux::from_coarse(pf, pc.max(pf), aux.fine_sink)?;
    let r = helper_rates(p1, p2, refined)?;
    if feasible(&r) && weights.cost(&r) <= cost {
        cost = weights.cost(&r);
        aux = refined;
        rates = r;
    }

    let analytic = HelperAux::analytic(p1, p2, delta)?;
    Ok(HelperSweep {
        aux,
        rates,
        cost,
        analytic,
        analytic_rates: helper_rates(p1, p2, analytic)?,
        cell,
    })
}
