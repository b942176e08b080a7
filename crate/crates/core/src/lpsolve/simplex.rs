//! Dense tableau simplex for `min c.x  s.t.  A x >= b, x >= 0`.

pub(crate) const PIVOT_TOL: f64 = 1e-9;
pub(crate) const FEAS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Outcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Rows of `[A | rhs]` with a basis and a reduced-cost row `[d | -value]`.
struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, &pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column, ratio ties to the
    /// lowest-index leaving variable. Columns at or beyond `limit` never enter.
    fn run(&mut self, limit: usize) -> Step {
        loop {
            let Some(c) = (0..limit).find(|&j| self.cost[j] < -PIVOT_TOL) else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12 || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Step::Unbounded,
            }
        }
    }

    fn set_cost(&mut self, c: &[f64]) {
        self.cost = c.to_vec();
        self.cost.resize(self.width + 1, 0.0);
        for r in 0..self.rows.len() {
            let f = self.cost[self.basis[r]];
            if f != 0.0 {
                for (v, &rv) in self.cost.iter_mut().zip(&self.rows[r]) {
                    *v -= f * rv;
                }
            }
        }
    }
}

/// Two-phase primal simplex. Columns: `x (n) | surplus/slack (m) | artificial`.
pub(crate) fn primal(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Outcome {
    let (m, n) = (a.len(), c.len());
    let needs_art: Vec<usize> = (0..m).filter(|&i| b[i] > 0.0).collect();
    let width = n + m + needs_art.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        if b[i] > 0.0 {
            // A_i x - s_i + a_i = b_i
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = -1.0;
            row[n + m + art] = 1.0;
            row[width] = b[i];
            basis.push(n + m + art);
            art += 1;
        } else {
            // -A_i x + s_i = -b_i
            for (v, &x) in row.iter_mut().zip(&a[i]) {
                *v = -x;
            }
            row[n + i] = 1.0;
            row[width] = -b[i];
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        cost: Vec::new(),
        basis,
        width,
    };

    if !needs_art.is_empty() {
        let mut phase1 = vec![0.0; width];
        for v in &mut phase1[n + m..] {
            *v = 1.0;
        }
        t.set_cost(&phase1);
        t.run(width);
        if -t.cost[width] > FEAS_TOL {
            return Outcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n + m {
                match (0..n + m).find(|&j| t.rows[r][j].abs() > PIVOT_TOL) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }
    t.set_cost(c);
    if let Step::Unbounded = t.run(n + m) {
        return Outcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.rhs(r).max(0.0);
        }
    }
    Outcome::Optimal(x)
}

/// Solve through the dual `max b.y  s.t.  A^T y <= c, y >= 0`, which starts
/// feasible at `y = 0` because `c >= 0`. The primal point is read off the
/// reduced costs of the dual slacks. Cheaper than [`primal`] when `A` has
/// many more rows than columns.
pub(crate) fn dual(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Outcome {
    let (m, n) = (a.len(), c.len());
    debug_assert!(c.iter().all(|&w| w >= 0.0));
    let width = m + n;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut row = vec![0.0; width + 1];
            for i in 0..m {
                row[i] = a[i][j];
            }
            row[m + j] = 1.0;
            row[width] = c[j];
            row
        })
        .collect();
    let mut t = Tableau {
        rows,
        cost: Vec::new(),
        basis: (m..m + n).collect(),
        width,
    };
    let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
    t.set_cost(&neg_b);
    match t.run(width) {
        Step::Unbounded => Outcome::Infeasible,
        Step::Optimal => Outcome::Optimal((0..n).map(|j| t.cost[m + j].max(0.0)).collect()),
    }
}

/// Largest violation of `A x >= b` or `x >= 0`.
pub(crate) fn violation(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    let rows = a.iter().zip(b).map(|(row, &bi)| {
        let lhs: f64 = row.iter().zip(x).map(|(p, q)| p * q).sum();
        bi - lhs
    });
    rows.chain(x.iter().map(|v| -v)).fold(0.0, f64::max)
}
