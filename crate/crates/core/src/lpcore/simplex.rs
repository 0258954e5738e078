//! Phase-one revised simplex with an explicit basis inverse.
//!
//! Pricing is Dantzig's rule while the objective moves and Bland's rule once
//! a run of degenerate pivots suggests stalling, which rules out cycling.
//! The system is `A·x = b`, `1·x = 1`, `x ≥ 0`. Rows are sign-flipped so the
//! right-hand side is nonnegative and every row gets one artificial column.
//! The phase-one objective is the sum of the artificials.

use crate::error::LpError;
use crate::scalar::{Mode, Scalar};

/// Dense-inverse, sparse-column linear system in phase-one form.
#[derive(Debug, Clone)]
pub struct LinearSystem<S> {
    /// Structural columns as `(row, value)` lists; the normalization row is last.
    pub cols: Vec<Vec<(usize, S)>>,
    pub rhs: Vec<S>,
}

impl<S: Scalar> LinearSystem<S> {
    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn to_f64(&self) -> LinearSystem<f64> {
        LinearSystem {
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|(r, v)| (*r, v.to_f64())).collect())
                .collect(),
            rhs: self.rhs.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Reduced costs below `-ENTER_TOL` qualify for entering (float mode).
const ENTER_TOL: f64 = 1e-11;
/// Pivot candidates need `w_i > PIVOT_TOL` (float mode).
const PIVOT_TOL: f64 = 1e-9;
/// Float-mode basis inverse is rebuilt from scratch this often.
const REFACTOR_EVERY: usize = 64;
pub const ITERATION_LIMIT: usize = 500_000;
/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const STALL_LIMIT: usize = 1_000;
/// Primal infeasibility tolerated by the two-pass ratio test (float mode).
const HARRIS_TOL: f64 = 1e-11;
/// Objective decrease that counts as progress (float mode).
const PROGRESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PhaseOneOutcome<S> {
    /// Basic variable per row: `< n` structural, `n + i` the artificial of row `i`.
    pub basis: Vec<usize>,
    /// Values of the structural variables.
    pub x: Vec<S>,
    /// Phase-one objective (sum of artificials) at termination.
    pub objective: S,
    /// `c_B·B⁻¹`, one entry per row.
    pub duals: Vec<S>,
    pub iterations: usize,
}

struct Engine<'a, S> {
    sys: &'a LinearSystem<S>,
    m: usize,
    n: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<S>>,
    xb: Vec<S>,
}

fn negative_enough<S: Scalar>(d: &S) -> bool {
    match S::MODE {
        Mode::Exact => d.is_negative(),
        Mode::Float => d.to_f64() < -ENTER_TOL,
    }
}

fn pivot_candidate<S: Scalar>(w: &S) -> bool {
    match S::MODE {
        Mode::Exact => w.is_positive(),
        Mode::Float => w.to_f64() > PIVOT_TOL,
    }
}

impl<'a, S: Scalar> Engine<'a, S> {
    fn column(&self, var: usize) -> Vec<(usize, S)> {
        if var < self.n {
            self.sys.cols[var].clone()
        } else {
            vec![(var - self.n, S::one())]
        }
    }

    /// `B⁻¹` by Gauss-Jordan on the basis columns; `None` if singular.
    fn factor(sys: &LinearSystem<S>, basis: &[usize]) -> Option<Vec<Vec<S>>> {
        let m = sys.n_rows();
        let n = sys.n_cols();
        // row-major B augmented with I
        let mut a = vec![vec![S::zero(); m]; m];
        for (k, &var) in basis.iter().enumerate() {
            if var < n {
                for (r, v) in &sys.cols[var] {
                    a[*r][k] = v.clone();
                }
            } else {
                a[var - n][k] = S::one();
            }
        }
        let mut inv: Vec<Vec<S>> = (0..m)
            .map(|i| {
                let mut row = vec![S::zero(); m];
                row[i] = S::one();
                row
            })
            .collect();
        for col in 0..m {
            let p = match S::MODE {
                Mode::Exact => (col..m).find(|&r| !a[r][col].is_zero())?,
                Mode::Float => {
                    let (p, mag) = (col..m)
                        .map(|r| (r, a[r][col].to_f64().abs()))
                        .max_by(|x, y| x.1.total_cmp(&y.1))?;
                    if mag < 1e-12 {
                        return None;
                    }
                    p
                }
            };
            a.swap(col, p);
            inv.swap(col, p);
            let piv = a[col][col].clone();
            if !piv.is_one() {
                let r = S::one() / piv;
                for v in a[col].iter_mut().skip(col) {
                    if !v.is_zero() {
                        *v *= &r;
                    }
                }
                for v in inv[col].iter_mut() {
                    if !v.is_zero() {
                        *v *= &r;
                    }
                }
            }
            let (pa, pi) = (a[col].clone(), inv[col].clone());
            let a_nz: Vec<usize> = (col + 1..m).filter(|&c| !pa[c].is_zero()).collect();
            let i_nz: Vec<usize> = (0..m).filter(|&c| !pi[c].is_zero()).collect();
            for r in 0..m {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                a[r][col] = S::zero();
                for &c in &a_nz {
                    let d = f.clone() * &pa[c];
                    a[r][c] -= d;
                }
                for &c in &i_nz {
                    let d = f.clone() * &pi[c];
                    inv[r][c] -= d;
                }
            }
        }
        // rows of `inv` are now in basis-position order
        Some(inv)
    }

    fn compute_xb(&mut self) {
        let sys = self.sys;
        self.xb = self
            .binv
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&sys.rhs)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b)
            })
            .collect();
    }

    fn new(sys: &'a LinearSystem<S>, basis: Vec<usize>, binv: Vec<Vec<S>>) -> Self {
        let m = sys.n_rows();
        let n = sys.n_cols();
        let mut is_basic = vec![false; n + m];
        for &v in &basis {
            is_basic[v] = true;
        }
        let mut e = Engine {
            sys,
            m,
            n,
            basis,
            is_basic,
            binv,
            xb: Vec::new(),
        };
        e.compute_xb();
        e
    }

    fn duals(&self) -> Vec<S> {
        let mut y = vec![S::zero(); self.m];
        for (i, &var) in self.basis.iter().enumerate() {
            if var >= self.n {
                for (k, v) in self.binv[i].iter().enumerate() {
                    if !v.is_zero() {
                        y[k] += v;
                    }
                }
            }
        }
        y
    }

    fn objective(&self) -> S {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(v, _)| **v >= self.n)
            .fold(S::zero(), |acc, (_, x)| acc + x.clone())
    }

    fn reduced_cost(&self, y: &[S], j: usize) -> S {
        self.sys.cols[j]
            .iter()
            .fold(S::zero(), |acc, (r, a)| acc - y[*r].clone() * a)
    }

    /// Bland: smallest-index structural column with negative reduced cost.
    /// Otherwise the most negative one, ties to the smaller index.
    fn entering(&self, y: &[S], bland: bool, rejected: &[usize]) -> Option<usize> {
        let open = |j: usize| !self.is_basic[j] && !rejected.contains(&j);
        if bland {
            return (0..self.n).find(|&j| open(j) && negative_enough(&self.reduced_cost(y, j)));
        }
        let mut best: Option<(usize, S)> = None;
        for j in 0..self.n {
            if !open(j) {
                continue;
            }
            let d = self.reduced_cost(y, j);
            if !negative_enough(&d) {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b)| d < *b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    fn refactor(&mut self) -> bool {
        let Some(binv) = Self::factor(self.sys, &self.basis) else {
            return false;
        };
        self.binv = binv;
        self.compute_xb();
        for x in self.xb.iter_mut() {
            if x.is_negative() {
                *x = S::zero();
            }
        }
        true
    }

    /// Leaving row for entering column `w`. Float mode uses a two-pass
    /// (Harris) test: among rows whose ratio is within a small relaxation of
    /// the minimum, take the largest pivot, or the lowest basic index under
    /// Bland's rule.
    fn leaving(&self, w: &[S], bland: bool) -> Option<usize> {
        let rows = (0..self.m).filter(|&i| pivot_candidate(&w[i]));
        if S::MODE == Mode::Exact {
            let mut leave: Option<(usize, S)> = None;
            for i in rows {
                let ratio = self.xb[i].clone() / w[i].clone();
                let better = match &leave {
                    None => true,
                    Some((p, best)) => match ratio.partial_cmp(best) {
                        Some(std::cmp::Ordering::Less) => true,
                        Some(std::cmp::Ordering::Equal) => self.basis[i] < self.basis[*p],
                        _ => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            return leave.map(|(i, _)| i);
        }
        let rows: Vec<usize> = rows.collect();
        let bound = rows
            .iter()
            .map(|&i| (self.xb[i].to_f64().max(0.0) + HARRIS_TOL) / w[i].to_f64())
            .fold(f64::INFINITY, f64::min);
        rows.into_iter()
            .filter(|&i| self.xb[i].to_f64().max(0.0) / w[i].to_f64() <= bound)
            .min_by(|&i, &k| {
                if bland {
                    self.basis[i].cmp(&self.basis[k])
                } else {
                    w[k].to_f64().total_cmp(&w[i].to_f64())
                }
            })
    }

    fn run(&mut self) -> Result<usize, LpError> {
        let mut iterations = 0;
        let mut stalled = 0usize;
        let mut best = self.objective();
        // columns that priced as improving but had no usable pivot
        let mut rejected: Vec<usize> = Vec::new();
        let mut fresh = false;
        loop {
            if iterations >= ITERATION_LIMIT {
                return Err(LpError::IterationLimit(ITERATION_LIMIT));
            }
            if S::MODE == Mode::Float && iterations > 0 && iterations % REFACTOR_EVERY == 0 && !fresh {
                fresh = self.refactor();
            }
            let bland = stalled >= STALL_LIMIT;
            let y = self.duals();
            let Some(j) = self.entering(&y, bland, &rejected) else {
                return Ok(iterations);
            };
            let col = self.column(j);
            let w: Vec<S> = self
                .binv
                .iter()
                .map(|row| {
                    col.iter()
                        .fold(S::zero(), |acc, (r, a)| acc + row[*r].clone() * a)
                })
                .collect();
            // phase one is bounded below, so a missing pivot means the column
            // only looked improving through round-off
            let Some(p) = self.leaving(&w, bland) else {
                if S::MODE == Mode::Exact {
                    return Err(LpError::NumericallyAmbiguous {
                        objective: self.objective().to_f64(),
                        margin: f64::NAN,
                    });
                }
                if !fresh {
                    fresh = self.refactor();
                } else {
                    rejected.push(j);
                }
                continue;
            };
            self.pivot(p, j, &w);
            fresh = false;
            rejected.clear();
            iterations += 1;
            // progress is judged on the objective, so round-off steps that
            // never add up to anything still count as stalling
            let obj = self.objective();
            if (best.clone() - obj.clone()).sign_within(PROGRESS_TOL) == std::cmp::Ordering::Greater {
                best = obj;
                stalled = 0;
            } else {
                stalled += 1;
            }
        }
    }

    fn pivot(&mut self, p: usize, entering: usize, w: &[S]) {
        let inv_piv = S::one() / w[p].clone();
        for v in self.binv[p].iter_mut() {
            if !v.is_zero() {
                *v *= &inv_piv;
            }
        }
        self.xb[p] *= &inv_piv;
        let prow = self.binv[p].clone();
        let nz: Vec<usize> = (0..self.m).filter(|&c| !prow[c].is_zero()).collect();
        let xp = self.xb[p].clone();
        for i in 0..self.m {
            if i == p || w[i].is_zero() {
                continue;
            }
            let f = &w[i];
            for &c in &nz {
                let d = f.clone() * &prow[c];
                self.binv[i][c] -= d;
            }
            let d = f.clone() * &xp;
            self.xb[i] -= d;
            if S::MODE == Mode::Float && self.xb[i].is_negative() && self.xb[i].to_f64() > -1e-12 {
                self.xb[i] = S::zero();
            }
        }
        self.is_basic[self.basis[p]] = false;
        self.is_basic[entering] = true;
        self.basis[p] = entering;
    }

    fn outcome(&self, iterations: usize) -> PhaseOneOutcome<S> {
        let mut x = vec![S::zero(); self.n];
        for (i, &v) in self.basis.iter().enumerate() {
            if v < self.n {
                x[v] = self.xb[i].clone();
            }
        }
        PhaseOneOutcome {
            basis: self.basis.clone(),
            x,
            objective: self.objective(),
            duals: self.duals(),
            iterations,
        }
    }
}

/// Phase one from the all-artificial basis.
pub fn phase_one<S: Scalar>(sys: &LinearSystem<S>) -> Result<PhaseOneOutcome<S>, LpError> {
    let m = sys.n_rows();
    let n = sys.n_cols();
    let basis: Vec<usize> = (n..n + m).collect();
    let binv = (0..m)
        .map(|i| {
            let mut row = vec![S::zero(); m];
            row[i] = S::one();
            row
        })
        .collect();
    let mut e = Engine::new(sys, basis, binv);
    let it = e.run()?;
    Ok(e.outcome(it))
}

/// Phase one started from a basis found elsewhere, typically by a float
/// solve; falls back to a cold start if that basis is singular or infeasible.
pub fn phase_one_from<S: Scalar>(
    sys: &LinearSystem<S>,
    basis: &[usize],
) -> Result<PhaseOneOutcome<S>, LpError> {
    if let Some(binv) = Engine::factor(sys, basis) {
        let mut e = Engine::new(sys, basis.to_vec(), binv);
        if e.xb.iter().all(|x| !x.is_negative()) {
            let it = e.run()?;
            return Ok(e.outcome(it));
        }
    }
    phase_one(sys)
}
