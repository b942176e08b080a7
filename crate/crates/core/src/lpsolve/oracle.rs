use itertools::Itertools;

use super::{LinearProgram, LpSolution};
use crate::error::{Error, Result};

const MAX_VARS: usize = 8;
const MAX_CONSTRAINTS: usize = 40;

/// Solve the square system `m x = r` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let p = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[p][col].abs() < 1e-11 {
            return None;
        }
        m.swap(col, p);
        r.swap(col, p);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot = &top[col];
        for (k, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                r[col + 1 + k] -= f * r[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Some(x)
}

/// Brute force: intersect every choice of `n` hyperplanes among the
/// constraints and the coordinate planes, and keep the cheapest feasible
/// intersection point. Limited to 8 variables and 40 constraints.
pub fn vertex_oracle(lp: &LinearProgram) -> Result<LpSolution> {
    let (a, b, c) = lp.dense();
    let n = c.len();
    if n > MAX_VARS || a.len() > MAX_CONSTRAINTS {
        return Err(Error::SizeCap(format!(
            "vertex enumeration handles at most {MAX_VARS} variables and {MAX_CONSTRAINTS} constraints"
        )));
    }
    if n == 0 {
        return Ok(if b.iter().all(|&v| v <= 1e-9) {
            lp.solution(&[])
        } else {
            LpSolution::infeasible()
        });
    }
    let planes: Vec<(Vec<f64>, f64)> = a
        .iter()
        .cloned()
        .zip(b.iter().copied())
        .chain((0..n).map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            (e, 0.0)
        }))
        .collect();
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for pick in (0..planes.len()).combinations(n) {
        let m = pick.iter().map(|&k| planes[k].0.clone()).collect();
        let r = pick.iter().map(|&k| planes[k].1).collect();
        let Some(x) = solve_square(m, r) else { continue };
        if super::simplex::violation(&a, &b, &x) > 1e-9 * scale {
            continue;
        }
        let value: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, x));
        }
    }
    Ok(match best {
        Some((_, x)) => {
            let x: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
            lp.solution(&x)
        }
        None => LpSolution::infeasible(),
    })
}
