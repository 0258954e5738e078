//! The polytope of correlators `(F_AB, F_BC, F_AC, F_ABC)` for which `q_u`
//! is a valid probability distribution.
//!
//! Each of the sixteen rows is `16·q_u(i, j, k, t) ≥ 0` written as
//! `coeffs·F + offset ≥ 0` with `F` in the fixed order `(F_AB, F_AC, F_BC, F_ABC)`.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::PolytopeError;
use crate::family::{CorrelatorPoint, UParam};
use crate::linalg;
use crate::scalar::Scalar;

/// Row definitions in order `a..p`: coefficient signs, then the multiples of
/// `u²(u²−v²)`, `v²(u²−v²)` and `8u³v³` added to the constant 1.
const ROWS: [(char, [i8; 4], [i64; 3]); 16] = [
    ('a', [-1, -1, -1, 1], [6, 0, -1]),
    ('b', [1, 1, 1, -1], [0, -6, -1]),
    ('c', [-1, 1, 1, -1], [0, 2, 1]),
    ('d', [1, -1, -1, 1], [-2, 0, 1]),
    ('e', [1, -1, 1, -1], [0, 2, 1]),
    ('f', [-1, 1, -1, 1], [-2, 0, 1]),
    ('g', [1, 1, -1, 1], [-2, 0, -1]),
    ('h', [-1, -1, 1, -1], [0, 2, -1]),
    ('i', [1, 1, -1, -1], [0, 2, 1]),
    ('j', [-1, -1, 1, 1], [-2, 0, 1]),
    ('k', [1, -1, 1, 1], [-2, 0, -1]),
    ('l', [-1, 1, -1, -1], [0, 2, -1]),
    ('m', [-1, 1, 1, 1], [-2, 0, -1]),
    ('n', [1, -1, -1, -1], [0, 2, -1]),
    ('o', [-1, -1, -1, -1], [0, -6, 1]),
    ('p', [1, 1, 1, 1], [6, 0, 1]),
];

/// Rows whose common zero is the reference vertex.
const QPLUS_ROWS: [usize; 4] = [1, 7, 11, 13];

/// `coeffs·F + offset ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace<S> {
    pub tag: char,
    pub coeffs: [i8; 4],
    pub offset: S,
}

impl<S: Scalar> Halfspace<S> {
    pub fn value(&self, coords: &[S; 4]) -> S {
        let mut acc = self.offset.clone();
        for (c, x) in self.coeffs.iter().zip(coords) {
            if *c > 0 {
                acc += x;
            } else {
                acc -= x;
            }
        }
        acc
    }

    /// The `(i, j, k, t)` signs of the probability this row bounds.
    pub fn outcome(&self) -> [i64; 4] {
        let c = self.coeffs.map(i64::from);
        let t = c[0] * c[1] * c[2];
        [c[3] * c[2], c[3] * c[1], c[3] * c[0], t]
    }
}

#[derive(Debug, Clone)]
pub struct HalfspaceSystem<S> {
    pub rows: Vec<Halfspace<S>>,
    pub u: UParam<S>,
}

impl<S: Scalar> HalfspaceSystem<S> {
    pub fn values(&self, f: &CorrelatorPoint<S>) -> Vec<S> {
        let coords = f.to_halfspace_coords();
        self.rows.iter().map(|r| r.value(&coords)).collect()
    }
}

#[derive(Debug)]
pub struct Polytope4<S> {
    pub halfspaces: HalfspaceSystem<S>,
    vertices: OnceLock<Vec<CorrelatorPoint<S>>>,
}

impl<S: Scalar> Polytope4<S> {
    pub fn u(&self) -> &UParam<S> {
        &self.halfspaces.u
    }

    pub fn rows(&self) -> &[Halfspace<S>] {
        &self.halfspaces.rows
    }

    /// Vertices, computed on first use.
    pub fn vertices(&self) -> &[CorrelatorPoint<S>] {
        self.vertices.get_or_init(|| compute_vertices(&self.halfspaces))
    }

    pub fn contains(&self, f: &CorrelatorPoint<S>) -> bool {
        contains(self, f)
    }

    /// Indices of rows that vanish at `f`.
    pub fn active_rows(&self, f: &CorrelatorPoint<S>) -> Vec<usize> {
        self.halfspaces
            .values(f)
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_negligible())
            .map(|(i, _)| i)
            .collect()
    }
}

impl<S: Scalar> Clone for Polytope4<S> {
    fn clone(&self) -> Self {
        let vertices = OnceLock::new();
        if let Some(v) = self.vertices.get() {
            let _ = vertices.set(v.clone());
        }
        Polytope4 {
            halfspaces: self.halfspaces.clone(),
            vertices,
        }
    }
}

pub fn build_polytope<S: Scalar>(u: &UParam<S>) -> Polytope4<S> {
    let gap = u.gap();
    let su = u.u_squared().clone() * gap.clone();
    let sv = u.v_squared().clone() * gap;
    let w8 = S::from_i64(8) * u.u3v3().clone();
    let rows = ROWS
        .iter()
        .map(|&(tag, coeffs, [cu, cv, cw])| Halfspace {
            tag,
            coeffs,
            offset: S::one()
                + S::from_i64(cu) * su.clone()
                + S::from_i64(cv) * sv.clone()
                + S::from_i64(cw) * w8.clone(),
        })
        .collect();
    Polytope4 {
        halfspaces: HalfspaceSystem {
            rows,
            u: u.clone(),
        },
        vertices: OnceLock::new(),
    }
}

fn is_feasible_value<S: Scalar>(v: &S) -> bool {
    v.is_nonnegative()
}

pub fn contains<S: Scalar>(p: &Polytope4<S>, f: &CorrelatorPoint<S>) -> bool {
    p.halfspaces.values(f).iter().all(is_feasible_value)
}

/// All 4-element row subsets in lexicographic order.
fn four_subsets(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn coeff_row<S: Scalar>(h: &Halfspace<S>) -> Vec<S> {
    h.coeffs.iter().map(|&c| S::from_i64(c as i64)).collect()
}

/// Tolerance for merging float vertices.
const DEDUP_TOL: f64 = 1e-9;

fn same_point<S: Scalar>(a: &[S; 4], b: &[S; 4]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.clone() - y.clone()).sign_within(DEDUP_TOL) == std::cmp::Ordering::Equal)
}

fn compute_vertices<S: Scalar>(sys: &HalfspaceSystem<S>) -> Vec<CorrelatorPoint<S>> {
    let rows = &sys.rows;
    let mut found: Vec<[S; 4]> = four_subsets(rows.len())
        .par_iter()
        .filter_map(|subset| {
            let a: Vec<Vec<S>> = subset.iter().map(|&i| coeff_row(&rows[i])).collect();
            let b: Vec<S> = subset.iter().map(|&i| -rows[i].offset.clone()).collect();
            let x = linalg::solve(&a, &b)?;
            let coords: [S; 4] = [x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()];
            rows.iter()
                .all(|r| is_feasible_value(&r.value(&coords)))
                .then_some(coords)
        })
        .collect();
    found.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut unique: Vec<[S; 4]> = Vec::new();
    for v in found {
        if !unique.iter().any(|w| same_point(w, &v)) {
            unique.push(v);
        }
    }
    unique
        .into_iter()
        .map(CorrelatorPoint::from_halfspace_coords)
        .collect()
}

/// Every vertex, in lexicographic order of `(F_AB, F_AC, F_BC, F_ABC)`.
pub fn enumerate_vertices<S: Scalar>(p: &Polytope4<S>) -> Vec<CorrelatorPoint<S>> {
    p.vertices().to_vec()
}

pub fn is_empty<S: Scalar>(u: &UParam<S>) -> bool {
    build_polytope(u).vertices().is_empty()
}

/// `u₀`, above which the polytope is empty.
pub fn emptiness_threshold() -> f64 {
    let a: f64 = 9.0 + 6.0 * 3f64.sqrt();
    ((a.powf(2.0 / 3.0) - 3.0) / (2.0 * a.cbrt())).sqrt()
}

/// Largest `u` for which the reference vertex stays inside the polytope.
pub fn qplus_validity_endpoint() -> f64 {
    let c43 = 3f64.powf(4.0 / 3.0);
    let c23 = 3f64.powf(2.0 / 3.0);
    let x = c43 + c23 - 5.0;
    0.5 * (1.0 + x.sqrt() + (20.0 / x.sqrt() - 10.0 - c43 - c23).sqrt()).sqrt()
}

/// `F_AB = F_BC = F_AC = 2v²(u²−v²)`, `F_ABC = 1 − 8u³v³`.
pub fn qplus_point<S: Scalar>(u: &UParam<S>) -> CorrelatorPoint<S> {
    let f2 = S::from_i64(2) * u.v_squared().clone() * u.gap();
    let f3 = S::one() - S::from_i64(8) * u.u3v3().clone();
    CorrelatorPoint::symmetric(f2, f3)
}

/// The reference vertex, checked against all sixteen rows.
pub fn qplus_vertex<S: Scalar>(u: &UParam<S>) -> Result<CorrelatorPoint<S>, PolytopeError> {
    let f = qplus_point(u);
    let p = build_polytope(u);
    for (row, value) in p.rows().iter().zip(p.halfspaces.values(&f)) {
        if !is_feasible_value(&value) {
            return Err(PolytopeError::VertexOutsidePolytope {
                u: u.u().to_f64(),
                row: row.tag,
                value: value.to_f64(),
            });
        }
    }
    Ok(f)
}

/// Rows `b, h, l, n`, which define the reference vertex.
pub fn qplus_defining_rows() -> [usize; 4] {
    QPLUS_ROWS
}

/// A constraint of the symmetric slice `F_AB = F_BC = F_AC = F₂`, `F_ABC = F₃`:
/// `a2·F₂ + a3·F₃ + offset ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceLine<S> {
    pub a2: i64,
    pub a3: i64,
    pub offset: S,
    pub tags: Vec<char>,
}

/// Distinct slice constraints; rows that coincide on the slice are merged.
pub fn slice_lines<S: Scalar>(p: &Polytope4<S>) -> Vec<SliceLine<S>> {
    let mut lines: Vec<SliceLine<S>> = Vec::new();
    for row in p.rows() {
        let a2 = row.coeffs[..3].iter().map(|&c| c as i64).sum();
        let a3 = row.coeffs[3] as i64;
        match lines
            .iter_mut()
            .find(|l| l.a2 == a2 && l.a3 == a3 && l.offset.approx_eq(&row.offset))
        {
            Some(l) => l.tags.push(row.tag),
            None => lines.push(SliceLine {
                a2,
                a3,
                offset: row.offset.clone(),
                tags: vec![row.tag],
            }),
        }
    }
    lines
}

/// Vertices of the symmetric slice as a counter-clockwise polygon in `(F₂, F₃)`.
pub fn f2f3_slice<S: Scalar>(p: &Polytope4<S>) -> Vec<[S; 2]> {
    let lines = slice_lines(p);
    let mut pts: Vec<[S; 2]> = Vec::new();
    for (i, l1) in lines.iter().enumerate() {
        for l2 in &lines[i + 1..] {
            let a = vec![
                vec![S::from_i64(l1.a2), S::from_i64(l1.a3)],
                vec![S::from_i64(l2.a2), S::from_i64(l2.a3)],
            ];
            let b = vec![-l1.offset.clone(), -l2.offset.clone()];
            let Some(x) = linalg::solve(&a, &b) else {
                continue;
            };
            let pt = [x[0].clone(), x[1].clone()];
            let inside = lines.iter().all(|l| {
                is_feasible_value(
                    &(S::from_i64(l.a2) * pt[0].clone()
                        + S::from_i64(l.a3) * pt[1].clone()
                        + l.offset.clone()),
                )
            });
            let fresh = !pts.iter().any(|q| {
                (q[0].clone() - pt[0].clone()).sign_within(DEDUP_TOL).is_eq()
                    && (q[1].clone() - pt[1].clone()).sign_within(DEDUP_TOL).is_eq()
            });
            if inside && fresh {
                pts.push(pt);
            }
        }
    }
    if pts.len() > 2 {
        let n = pts.len() as f64;
        let cx = pts.iter().map(|q| q[0].to_f64()).sum::<f64>() / n;
        let cy = pts.iter().map(|q| q[1].to_f64()).sum::<f64>() / n;
        pts.sort_by(|a, b| {
            let ta = (a[1].to_f64() - cy).atan2(a[0].to_f64() - cx);
            let tb = (b[1].to_f64() - cy).atan2(b[0].to_f64() - cx);
            ta.total_cmp(&tb)
        });
    }
    pts
}
