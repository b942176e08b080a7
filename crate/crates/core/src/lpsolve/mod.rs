//! Minimum-cost points of rate regions.

mod oracle;
mod simplex;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::regions::{RateRegion, RateVar};

pub use oracle::vertex_oracle;
use simplex::{Outcome, FEAS_TOL};

/// Minimise a nonnegative linear cost over a region.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    region: RateRegion,
    objective: BTreeMap<RateVar, f64>,
}

impl LinearProgram {
    /// Variables missing from `objective` cost nothing.
    pub fn new(region: RateRegion, objective: BTreeMap<RateVar, f64>) -> Result<Self> {
        for (v, &w) in &objective {
            if region.index_of(*v).is_none() {
                return Err(Error::DimensionMismatch(v.to_string()));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "weight {w} of {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(LinearProgram { region, objective })
    }

    pub fn region(&self) -> &RateRegion {
        &self.region
    }

    pub fn objective(&self) -> &BTreeMap<RateVar, f64> {
        &self.objective
    }

    pub fn weight(&self, var: RateVar) -> f64 {
        self.objective.get(&var).copied().unwrap_or(0.0)
    }

    pub fn cost(&self, assignment: &BTreeMap<RateVar, f64>) -> f64 {
        self.objective
            .iter()
            .map(|(v, w)| w * assignment.get(v).copied().unwrap_or(0.0))
            .sum()
    }

    /// Dense `(A, b, c)` in catalog order.
    pub(crate) fn dense(&self) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let vars = self.region.vars();
        let a = self
            .region
            .constraints()
            .iter()
            .map(|con| {
                let mut row = vec![0.0; vars.len()];
                for &(v, c) in con.coeffs() {
                    row[self.region.index_of(v).expect("validated region")] = c;
                }
                row
            })
            .collect();
        let b = self.region.constraints().iter().map(|c| c.rhs).collect();
        let c = vars.iter().map(|&v| self.weight(v)).collect();
        (a, b, c)
    }

    pub(crate) fn solution(&self, x: &[f64]) -> LpSolution {
        let assignment: BTreeMap<RateVar, f64> = self.region.vars().iter().copied().zip(x.iter().copied()).collect();
        LpSolution {
            status: LpStatus::Optimal,
            value: self.cost(&assignment),
            assignment,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub assignment: BTreeMap<RateVar, f64>,
}

impl LpSolution {
    pub(crate) fn infeasible() -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            assignment: BTreeMap::new(),
        }
    }

    pub fn get(&self, var: RateVar) -> f64 {
        self.assignment.get(&var).copied().unwrap_or(0.0)
    }
}

type Route = fn(&[Vec<f64>], &[f64], &[f64]) -> Outcome;

/// Two-phase simplex with Bland's rule. Tall problems (more constraints than
/// variables) are solved through their dual; either way the returned point
/// is checked against the constraints and the other route is tried if the
/// check fails.
pub fn minimize(lp: &LinearProgram) -> Result<LpSolution> {
    let (a, b, c) = lp.dense();
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = FEAS_TOL * scale;
    let routes: [Route; 2] = if a.len() > c.len() {
        [simplex::dual, simplex::primal]
    } else {
        [simplex::primal, simplex::dual]
    };
    let mut verdict = None;
    for route in routes {
        match route(&a, &b, &c) {
            Outcome::Optimal(x) if simplex::violation(&a, &b, &x) <= tol => return Ok(lp.solution(&x)),
            Outcome::Optimal(_) => {}
            other => {
                verdict.get_or_insert(other);
            }
        }
    }
    match verdict {
        Some(Outcome::Unbounded) => Ok(LpSolution {
            status: LpStatus::Unbounded,
            ..LpSolution::infeasible()
        }),
        Some(_) => Ok(LpSolution::infeasible()),
        None => Err(Error::InvalidRegion("simplex lost feasibility on both routes".into())),
    }
}
