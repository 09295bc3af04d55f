//! Dense two-phase simplex over `BigRational` with Bland's rule.
//!
//! Problems are `max c·x` subject to `A x = b`, `x >= 0`. Every outcome
//! carries a dual vector so callers can build replayable witnesses.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Q = BigRational;

pub(crate) fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

#[derive(Clone, Debug)]
pub(crate) enum LpOutcome {
    /// `y·A >= 0` componentwise and `y·b < 0`.
    Infeasible { farkas: Vec<Q> },
    Unbounded,
    /// Optimal primal point, dual `y` with `y·A >= c` and `y·b = value`.
    Optimal { x: Vec<Q>, y: Vec<Q>, value: Q },
}

/// Sparse equality rows: `(coefficients by column, rhs)`.
#[derive(Clone, Debug, Default)]
pub(crate) struct EqSystem {
    pub cols: usize,
    pub rows: Vec<(Vec<(usize, Q)>, Q)>,
}

struct Tableau {
    m: usize,
    /// Columns: `n` structural, `m` artificial, then the rhs.
    n: usize,
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn rhs(&self, r: usize) -> &Q {
        &self.t[r][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for j in 0..w {
                if !self.t[r][j].is_zero() {
                    self.t[r][j] = &self.t[r][j] / &p;
                }
            }
        }
        let nz: Vec<usize> = (0..w).filter(|&j| !self.t[r][j].is_zero()).collect();
        let prow: Vec<Q> = nz.iter().map(|&j| self.t[r][j].clone()).collect();
        for i in 0..self.m {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (k, &j) in nz.iter().enumerate() {
                let v = &self.t[i][j] - &f * &prow[k];
                self.t[i][j] = v;
            }
        }
        self.basis[r] = c;
    }

    /// Maximises `cost` over columns `< limit`, Bland's rule.
    fn optimise(&mut self, cost: &[Q], limit: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j].clone();
                for i in 0..self.m {
                    if !self.t[i][j].is_zero() {
                        red -= &self.cbar(cost, i) * &self.t[i][j];
                    }
                }
                if red.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut best: Option<(Q, usize)> = None;
            for i in 0..self.m {
                let a = &self.t[i][c];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &best {
                        None => true,
                        Some((br, bi)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            let Some((_, r)) = best else { return false };
            self.pivot(r, c);
        }
    }

    fn cbar(&self, cost: &[Q], row: usize) -> Q {
        cost[self.basis[row]].clone()
    }

    /// `y = c_B B^{-1}`, read off the artificial block.
    fn duals(&self, cost: &[Q]) -> Vec<Q> {
        let mut y = vec![Q::zero(); self.m];
        for i in 0..self.m {
            let cb = self.cbar(cost, i);
            if cb.is_zero() {
                continue;
            }
            for (k, yk) in y.iter_mut().enumerate() {
                let v = &self.t[i][self.n + k];
                if !v.is_zero() {
                    *yk += &cb * v;
                }
            }
        }
        y
    }
}

/// Solves `max c·x`, `A x = b`, `x >= 0` exactly.
pub(crate) fn solve(sys: &EqSystem, c: &[Q]) -> LpOutcome {
    let m = sys.rows.len();
    let n = sys.cols;
    let mut sign = vec![Q::one(); m];
    let mut t = vec![vec![Q::zero(); n + m + 1]; m];
    for (i, (coeffs, rhs)) in sys.rows.iter().enumerate() {
        if rhs.is_negative() {
            sign[i] = -Q::one();
        }
        for (j, v) in coeffs {
            t[i][*j] += v * &sign[i];
        }
        t[i][n + i] = Q::one();
        t[i][n + m] = rhs * &sign[i];
    }
    let mut tab = Tableau { m, n, t, basis: (n..n + m).collect() };

    let mut phase1 = vec![Q::zero(); n + m];
    for v in phase1.iter_mut().skip(n) {
        *v = -Q::one();
    }
    tab.optimise(&phase1, n + m);
    let infeas: Q = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.rhs(i).clone()).sum();
    if infeas.is_positive() {
        // Phase-one duals satisfy y·A >= 0 and y·b = -infeas on the
        // sign-adjusted rows.
        let y = tab.duals(&phase1);
        let farkas = y.iter().zip(&sign).map(|(v, s)| v * s).collect();
        return LpOutcome::Infeasible { farkas };
    }
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, j);
            }
        }
    }
    let mut cost = vec![Q::zero(); n + m];
    cost[..n].clone_from_slice(c);
    if !tab.optimise(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).clone();
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    let y = tab.duals(&cost).iter().zip(&sign).map(|(v, s)| v * s).collect();
    LpOutcome::Optimal { x, y, value }
}

/// `y·A` as a dense vector.
#[cfg(test)]
pub(crate) fn combine(sys: &EqSystem, y: &[Q]) -> (Vec<Q>, Q) {
    let mut lhs = vec![Q::zero(); sys.cols];
    let mut rhs = Q::zero();
    for ((coeffs, b), yi) in sys.rows.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (j, v) in coeffs {
            lhs[*j] += v * yi;
        }
        rhs += b * yi;
    }
    (lhs, rhs)
}
