//! Point certification, polytope-wide coverage, the continuation sweep and
//! Bell-inequality export.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::error::CertifyError;
use crate::family::{condition_q, conditional_affine, eval_q, BinaryDist3, CorrelatorPoint, Sign, UParam};
use crate::inflation::{build_inflation_lp, hier_pair, row_rhs, weighted_columns, LpOptions, RowKind, SymmetryMode};
use crate::linalg;
use crate::lpcore::{solve_feasibility, verify_certificate, FarkasCertificate, FeasibilityResult, Provenance};
use crate::polytope::{build_polytope, qplus_vertex, Polytope4};
use crate::scalar::{Mode, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<S> {
    Nonlocal(FarkasCertificate<S>),
    LpFeasible,
}

#[derive(Debug, Clone)]
pub struct PointVerdict<S> {
    pub u: UParam<S>,
    pub f: CorrelatorPoint<S>,
    pub t: Sign,
    pub status: Verdict<S>,
    pub notes: Vec<String>,
}

impl<S: Scalar> PointVerdict<S> {
    pub fn is_nonlocal(&self) -> bool {
        matches!(self.status, Verdict::Nonlocal(_))
    }

    pub fn certificate(&self) -> Option<&FarkasCertificate<S>> {
        match &self.status {
            Verdict::Nonlocal(c) => Some(c),
            Verdict::LpFeasible => None,
        }
    }
}

fn provenance<S: Scalar>(u: &UParam<S>, f: &CorrelatorPoint<S>, t: Sign, options: &LpOptions) -> Provenance {
    let (u_text, u_exact) = match S::MODE {
        Mode::Float => (u.u().render(), None),
        Mode::Exact => (format!("{:?}", u.u().to_f64()), Some(u.u().render())),
    };
    Provenance {
        u: u_text,
        u_exact,
        t: Some(t),
        f: Some([
            f.f_ab.render(),
            f.f_bc.render(),
            f.f_ac.render(),
            f.f_abc.render(),
        ]),
        mode: Some(S::MODE),
        options: options.describe(),
    }
}

pub fn certify_point<S: Scalar>(
    u: &UParam<S>,
    f: &CorrelatorPoint<S>,
    t: Sign,
) -> Result<PointVerdict<S>, CertifyError> {
    certify_point_with(u, f, t, LpOptions::default())
}

/// [`certify_point`] with a chosen set of constraint families.
pub fn certify_point_with<S: Scalar>(
    u: &UParam<S>,
    f: &CorrelatorPoint<S>,
    t: Sign,
    options: LpOptions,
) -> Result<PointVerdict<S>, CertifyError> {
    let q = condition_q(&eval_q(u, f), t)?;
    let problem = build_inflation_lp(&q, options);
    let mut notes = vec![format!(
        "{} rows over {} variables ({})",
        problem.rows.len(),
        problem.n_vars,
        options.describe()
    )];
    let status = match solve_feasibility(&problem)? {
        FeasibilityResult::Feasible { .. } => Verdict::LpFeasible,
        FeasibilityResult::Infeasible { certificate } => {
            if !verify_certificate(&certificate, &problem)? {
                return Err(CertifyError::NoCertificate(u.u().to_f64()));
            }
            notes.push(format!(
                "certificate with {} nonzero entries, margin {}",
                certificate.entries.len(),
                certificate.margin.to_f64()
            ));
            Verdict::Nonlocal(certificate.with_provenance(provenance(u, f, t, &options)))
        }
    };
    Ok(PointVerdict {
        u: u.clone(),
        f: f.clone(),
        t,
        status,
        notes,
    })
}

fn net_multipliers<S: Scalar>(cert: &FarkasCertificate<S>) -> (Vec<(RowKind, S)>, SymmetryMode) {
    let mut lambda: Vec<(RowKind, S)> = cert.multipliers().into_iter().collect();
    lambda.sort_by_key(|(k, _)| *k);
    let symmetry = if lambda.iter().any(|(k, _)| matches!(k, RowKind::Sym { .. })) {
        SymmetryMode::Explicit
    } else {
        SymmetryMode::Collapsed
    };
    (lambda, symmetry)
}

/// `m(F) = c + L·F + Fᵀ·Q·F` in halfspace coordinates `(F_AB, F_AC, F_BC, F_ABC)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginModel<S> {
    pub constant: S,
    pub linear: [S; 4],
    /// Symmetric.
    pub quadratic: [[S; 4]; 4],
}

impl<S: Scalar> MarginModel<S> {
    pub fn eval(&self, f: &CorrelatorPoint<S>) -> S {
        let x = f.to_halfspace_coords();
        let mut acc = self.constant.clone();
        for a in 0..4 {
            acc += self.linear[a].clone() * &x[a];
            for b in 0..4 {
                acc += self.quadratic[a][b].clone() * &x[a] * &x[b];
            }
        }
        acc
    }
}

/// The certificate's relaxed margin as a function of `F` at fixed `u`.
pub fn margin_model<S: Scalar>(u: &UParam<S>, cert: &FarkasCertificate<S>, t: Sign) -> MarginModel<S> {
    let (lambda, symmetry) = net_multipliers(cert);
    let (base, slope) = conditional_affine(u, t);
    // marginals do not depend on F, so the F = 0 slice carries them
    let base_dist = BinaryDist3::from_entries(base.clone(), Some(t));
    let marginals = [
        base_dist.marginal_plus(0),
        base_dist.marginal_plus(1),
        base_dist.marginal_plus(2),
    ];
    let columns = weighted_columns(&lambda, &marginals, symmetry);
    let max = columns.into_iter().reduce(S::max_of).unwrap_or_else(S::zero);

    let mut constant = -max;
    let mut linear: [S; 4] = std::array::from_fn(|_| S::zero());
    let mut quadratic: [[S; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    let half = S::ratio(1, 2);
    for (kind, l) in &lambda {
        match *kind {
            RowKind::Hier(bits) => {
                let (x, y) = hier_pair(bits);
                constant += l.clone() * &base[x] * &base[y];
                for a in 0..4 {
                    linear[a] += l.clone() * (base[x].clone() * &slope[y][a] + base[y].clone() * &slope[x][a]);
                    for b in 0..4 {
                        let sym = slope[x][a].clone() * &slope[y][b] + slope[y][a].clone() * &slope[x][b];
                        quadratic[a][b] += l.clone() * &half * sym;
                    }
                }
            }
            RowKind::Hd(_) => constant += l.clone() * row_rhs(*kind, &base_dist),
            RowKind::Sym { .. } | RowKind::Lpi { .. } => {}
        }
    }
    MarginModel {
        constant,
        linear,
        quadratic,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coverage<S> {
    pub covered: bool,
    pub min_margin: S,
    pub argmin: CorrelatorPoint<S>,
}

/// Stationary point of `model` on `{F : row_i(F) = 0, i ∈ active}`.
fn face_candidate<S: Scalar>(model: &MarginModel<S>, poly: &Polytope4<S>, active: &[usize]) -> Option<[S; 4]> {
    let k = active.len();
    let n = 4 + k;
    let mut a = vec![vec![S::zero(); n]; n];
    let mut b = vec![S::zero(); n];
    for r in 0..4 {
        for c in 0..4 {
            a[r][c] = S::from_i64(2) * &model.quadratic[r][c];
        }
        for (m, &i) in active.iter().enumerate() {
            a[r][4 + m] = -S::from_i64(poly.rows()[i].coeffs[r] as i64);
        }
        b[r] = -model.linear[r].clone();
    }
    for (m, &i) in active.iter().enumerate() {
        let row = &poly.rows()[i];
        for c in 0..4 {
            a[4 + m][c] = S::from_i64(row.coeffs[c] as i64);
        }
        b[4 + m] = -row.offset.clone();
    }
    let x = linalg::solve(&a, &b)?;
    Some([x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()])
}

/// Exact minimum of a quadratic over the polytope.
///
/// The minimum sits in the relative interior of some face, where it is a
/// stationary point of the restricted quadratic; when that restriction is
/// singular the minimum is also reached on a smaller face. So solving the
/// stationarity system on the affine hull of every set of at most four rows
/// and keeping the feasible solutions finds it.
pub fn minimize_over_polytope<S: Scalar>(model: &MarginModel<S>, poly: &Polytope4<S>) -> Option<(S, CorrelatorPoint<S>)> {
    let n = poly.rows().len();
    let subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() <= 4)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    subsets
        .par_iter()
        .filter_map(|active| {
            let x = face_candidate(model, poly, active)?;
            poly.rows()
                .iter()
                .all(|r| r.value(&x).is_nonnegative())
                .then(|| {
                    let f = CorrelatorPoint::from_halfspace_coords(x);
                    (model.eval(&f), f)
                })
        })
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
}

/// Minimum of the certificate's relaxed margin over every `F` in the polytope.
pub fn polytope_coverage<S: Scalar>(
    u: &UParam<S>,
    cert: &FarkasCertificate<S>,
    t: Sign,
) -> Result<Coverage<S>, CertifyError> {
    let poly = build_polytope(u);
    if poly.vertices().is_empty() {
        return Err(CertifyError::EmptyPolytope(u.u().to_f64()));
    }
    let model = margin_model(u, cert, t);
    let (min_margin, argmin) =
        minimize_over_polytope(&model, &poly).ok_or_else(|| CertifyError::EmptyPolytope(u.u().to_f64()))?;
    Ok(Coverage {
        covered: min_margin.is_certified_positive(),
        min_margin,
        argmin,
    })
}

/// Reference vertex when it lies in the polytope, else the vertex centroid.
pub fn certification_point(u: &UParam<f64>) -> Option<CorrelatorPoint<f64>> {
    if let Ok(f) = qplus_vertex(u) {
        return Some(f);
    }
    let poly = build_polytope(u);
    let vs = poly.vertices();
    if vs.is_empty() {
        return None;
    }
    let n = vs.len() as f64;
    let sum = vs.iter().fold([0.0; 4], |mut acc, v| {
        for (a, x) in acc.iter_mut().zip(v.to_halfspace_coords()) {
            *a += x;
        }
        acc
    });
    Some(CorrelatorPoint::from_halfspace_coords(sum.map(|s| s / n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Up,
    Down,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub step: f64,
    pub resolution: f64,
    pub t: Sign,
    pub options: LpOptions,
    pub max_segments: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            step: 1e-4,
            resolution: 1e-6,
            t: Sign::Minus,
            options: LpOptions::default(),
            max_segments: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub u_start: f64,
    pub u_end: f64,
    pub certificate: FarkasCertificate<f64>,
    /// Coverage minima at the start, midpoint and end.
    pub min_margins: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub segments: Vec<Segment>,
    pub total_range: [f64; 2],
    pub direction: SweepDirection,
    /// Where the sweep stopped.
    pub frontier: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SweepError {
    #[error("coverage lost at u = {frontier}")]
    CoverageLost { frontier: f64, report: Box<SweepReport> },
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

/// Coverage minimum of `cert` at `u`, or `None` when it cannot be evaluated.
fn coverage_min(u: f64, cert: &FarkasCertificate<f64>, t: Sign) -> Option<f64> {
    let up = UParam::new(u).ok()?;
    polytope_coverage(&up, cert, t).ok().map(|c| c.min_margin)
}

fn covers(u: f64, cert: &FarkasCertificate<f64>, t: Sign) -> bool {
    coverage_min(u, cert, t).is_some_and(|m| m.is_certified_positive())
}

/// Furthest `u` from `from` toward `stop` that `cert` still covers.
fn furthest_covered(from: f64, stop: f64, cert: &FarkasCertificate<f64>, cfg: &SweepConfig) -> f64 {
    let dir = (stop - from).signum();
    let mut good = from;
    let mut bad = None;
    while good != stop {
        let next = if (stop - good).abs() <= cfg.step {
            stop
        } else {
            good + dir * cfg.step
        };
        if covers(next, cert, cfg.t) {
            good = next;
        } else {
            bad = Some(next);
            break;
        }
    }
    if let Some(mut bad) = bad {
        while (bad - good).abs() > cfg.resolution {
            let mid = 0.5 * (good + bad);
            if covers(mid, cert, cfg.t) {
                good = mid;
            } else {
                bad = mid;
            }
        }
    }
    good
}

pub fn sweep(u_start: f64, u_stop: f64) -> Result<SweepReport, SweepError> {
    sweep_with(u_start, u_stop, &SweepConfig::default())
}

/// Continuation: certify at `u`, push the same certificate as far as its
/// coverage holds, recertify there, repeat.
pub fn sweep_with(u_start: f64, u_stop: f64, cfg: &SweepConfig) -> Result<SweepReport, SweepError> {
    let direction = if u_stop >= u_start {
        SweepDirection::Up
    } else {
        SweepDirection::Down
    };
    let mut report = SweepReport {
        segments: Vec::new(),
        total_range: [u_start, u_start],
        direction,
        frontier: u_start,
    };
    let mut u = u_start;
    while u != u_stop && report.segments.len() < cfg.max_segments {
        let Some(cert) = certificate_at(u, cfg)? else {
            break;
        };
        let Some(start_min) = coverage_min(u, &cert, cfg.t).filter(|m| m.is_certified_positive()) else {
            break;
        };
        let mut end = furthest_covered(u, u_stop, &cert, cfg);
        let mut mid_min = f64::NEG_INFINITY;
        while (end - u).abs() > cfg.resolution {
            match coverage_min(0.5 * (u + end), &cert, cfg.t) {
                Some(m) if m.is_certified_positive() => {
                    mid_min = m;
                    break;
                }
                _ => end = 0.5 * (u + end),
            }
        }
        if (end - u).abs() <= cfg.resolution && end != u_stop {
            break;
        }
        let end_min = coverage_min(end, &cert, cfg.t).unwrap_or(f64::NEG_INFINITY);
        report.segments.push(Segment {
            u_start: u,
            u_end: end,
            certificate: cert,
            min_margins: [start_min, mid_min, end_min],
        });
        u = end;
        report.frontier = u;
        report.total_range = [u_start.min(u), u_start.max(u)];
    }
    if u == u_stop {
        Ok(report)
    } else {
        Err(SweepError::CoverageLost {
            frontier: u,
            report: Box::new(report),
        })
    }
}

fn certificate_at(u: f64, cfg: &SweepConfig) -> Result<Option<FarkasCertificate<f64>>, CertifyError> {
    let Ok(up) = UParam::new(u) else {
        return Ok(None);
    };
    let Some(f) = certification_point(&up) else {
        return Ok(None);
    };
    let verdict = certify_point_with(&up, &f, cfg.t, cfg.options)?;
    Ok(verdict.certificate().cloned())
}

/// `const + Σ_X coef_X·P(X = +1)`: one column of `λ·A(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBound<S> {
    pub constant: S,
    pub marginal: [S; 3],
}

/// `L(q) ≤ max_b bound_b(q)`, valid for every triangle-local distribution `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellInequality<S> {
    /// `coef·q(x)·q(y)` with `x ≤ y` (bits `ijk`, 0 = +1).
    pub quadratic: Vec<((usize, usize), S)>,
    /// `coef·P(A = a)·P(B = b)·P(C = c)`.
    pub cubic: Vec<([Sign; 3], S)>,
    pub bounds: Vec<AffineBound<S>>,
}

fn cmp_scalars<S: Scalar>(a: &[S], b: &[S]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub fn export_inequality<S: Scalar>(cert: &FarkasCertificate<S>) -> BellInequality<S> {
    let (lambda, symmetry) = net_multipliers(cert);
    let mut quadratic: Vec<((usize, usize), S)> = Vec::new();
    let mut cubic = Vec::new();
    for (kind, l) in &lambda {
        match *kind {
            RowKind::Hier(bits) => {
                let (x, y) = hier_pair(bits);
                let key = (x.min(y), x.max(y));
                match quadratic.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, c)) => *c += l,
                    None => quadratic.push((key, l.clone())),
                }
            }
            RowKind::Hd(bits) => {
                let signs = [2, 1, 0].map(|s| Sign::from_bit((bits as usize) >> s));
                cubic.push((signs, l.clone()));
            }
            _ => {}
        }
    }
    quadratic.retain(|(_, c)| !c.is_zero());
    quadratic.sort_by_key(|(k, _)| *k);

    let zero = S::zero();
    let at = |m: [S; 3]| weighted_columns(&lambda, &m, symmetry);
    let base = at([zero.clone(), zero.clone(), zero.clone()]);
    let unit: Vec<Vec<S>> = (0..3)
        .map(|p| at(std::array::from_fn(|q| if q == p { S::one() } else { S::zero() })))
        .collect();
    let mut keys: Vec<[S; 4]> = base
        .iter()
        .enumerate()
        .map(|(j, c)| {
            [
                c.clone(),
                unit[0][j].clone() - c,
                unit[1][j].clone() - c,
                unit[2][j].clone() - c,
            ]
        })
        .collect();
    keys.sort_by(|a, b| cmp_scalars(a, b));
    keys.dedup();
    let bounds = keys
        .into_iter()
        .map(|[c, a, b, d]| AffineBound {
            constant: c,
            marginal: [a, b, d],
        })
        .collect();
    BellInequality {
        quadratic,
        cubic,
        bounds,
    }
}

fn bits_label(x: usize) -> String {
    (0..3).rev().map(|s| Sign::from_bit(x >> s).symbol()).collect()
}

impl<S: Scalar> BellInequality<S> {
    pub fn lhs(&self, q: &BinaryDist3<S>) -> S {
        let e = q.entries();
        let mut acc = S::zero();
        for ((x, y), c) in &self.quadratic {
            acc += c.clone() * &e[*x] * &e[*y];
        }
        for (signs, c) in &self.cubic {
            let mut term = c.clone();
            for (p, s) in signs.iter().enumerate() {
                term *= q.marginal(p, *s);
            }
            acc += term;
        }
        acc
    }

    pub fn rhs(&self, q: &BinaryDist3<S>) -> S {
        let m = [q.marginal_plus(0), q.marginal_plus(1), q.marginal_plus(2)];
        self.bounds
            .iter()
            .map(|b| {
                b.marginal
                    .iter()
                    .zip(&m)
                    .fold(b.constant.clone(), |acc, (c, x)| acc + c.clone() * x)
            })
            .reduce(S::max_of)
            .unwrap_or_else(S::zero)
    }

    /// `L(q) − R(q)`; the inequality holds iff this is `≤ 0`.
    pub fn evaluate(&self, q: &BinaryDist3<S>) -> S {
        self.lhs(q) - self.rhs(q)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# network Bell inequality  L(q) <= R(q)");
        let _ = writeln!(out, "# q[ijk] = q(i,j,k), i,j,k in {{+,-}}; mA = P(A=+1), likewise mB, mC");
        let _ = writeln!(out, "# PA(+) = mA, PA(-) = 1 - mA");
        let _ = writeln!(out, "L(q) =");
        for ((x, y), c) in &self.quadratic {
            let _ = writeln!(out, "  + ({}) * q[{}] * q[{}]", c.render(), bits_label(*x), bits_label(*y));
        }
        for (s, c) in &self.cubic {
            let _ = writeln!(
                out,
                "  + ({}) * PA({}) * PB({}) * PC({})",
                c.render(),
                s[0].symbol(),
                s[1].symbol(),
                s[2].symbol()
            );
        }
        let _ = writeln!(out, "R(q) = max of {} terms:", self.bounds.len());
        for b in &self.bounds {
            let _ = writeln!(
                out,
                "  ({}) + ({}) * mA + ({}) * mB + ({}) * mC",
                b.constant.render(),
                b.marginal[0].render(),
                b.marginal[1].render(),
                b.marginal[2].render()
            );
        }
        out
    }
}
