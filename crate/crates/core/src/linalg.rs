//! Small dense linear algebra over [`Scalar`], used by vertex enumeration and
//! the coverage minimizer.

use crate::scalar::Scalar;

/// Pivots with magnitude below this are treated as zero in float mode.
const PIVOT_TOL: f64 = 1e-10;

fn pivot_row<S: Scalar>(m: &[Vec<S>], col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for (r, row) in m.iter().enumerate().skip(from) {
        let mag = row[col].abs();
        if mag.sign_within(PIVOT_TOL) != std::cmp::Ordering::Greater {
            continue;
        }
        match &best {
            Some((_, b)) if *b >= mag => {}
            _ => best = Some((r, mag)),
        }
    }
    best.map(|(r, _)| r)
}

/// Solve the square system `a·x = b`; `None` if `a` is singular.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = a.len();
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            debug_assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = pivot_row(&m, col, col)?;
        m.swap(col, p);
        let inv = S::one() / m[col][col].clone();
        for c in col..=n {
            m[col][c] = m[col][c].clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                let delta = factor.clone() * m[col][c].clone();
                m[r][c] -= delta;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Rank of the row set.
pub fn rank<S: Scalar>(rows: &[Vec<S>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m = rows.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = pivot_row(&m, col, rank) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / m[rank][col].clone();
            for c in col..cols {
                let delta = factor.clone() * m[rank][c].clone();
                m[r][c] -= delta;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}
