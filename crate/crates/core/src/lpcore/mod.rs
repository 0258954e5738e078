//! Feasibility of inflation problems over the probability simplex, with
//! Farkas certificates for the infeasible case.
//!
//! A certificate is a nonnegative vector `y` over the canonical inequality
//! rows: each equality `a·x = b` is exported as `a·x ≥ b` (label suffix
//! `:+`) followed by `−a·x ≥ −b` (suffix `:-`), in problem row order. It
//! proves infeasibility when `y·b − max_j (y·A)_j > 0`, the maximum running
//! over simplex vertices, i.e. over columns.

pub mod simplex;

use std::collections::HashMap;
use std::fmt;

use crate::error::LpError;
use crate::family::Sign;
use crate::inflation::{InflationProblem, RowKind, SymmetryMode};
use crate::scalar::{Mode, Rational, Scalar, MARGIN_THRESHOLD};
use simplex::{phase_one, phase_one_from, LinearSystem};

/// Float-mode phase-one optima at or below this count as zero.
pub const FEASIBLE_OBJECTIVE: f64 = 1e-10;
/// Float-mode witnesses must satisfy every row to this accuracy.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `a·x ≥ b`
    Plus,
    /// `−a·x ≥ −b`
    Minus,
}

impl Direction {
    pub fn suffix(self) -> &'static str {
        match self {
            Direction::Plus => ":+",
            Direction::Minus => ":-",
        }
    }
}

/// One canonical inequality row of a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateEntry<S> {
    pub kind: RowKind,
    pub direction: Direction,
    pub y: S,
}

impl<S> CertificateEntry<S> {
    pub fn label(&self) -> String {
        format!("{}{}", self.kind, self.direction.suffix())
    }
}

/// Split a canonical label into its row kind and direction.
pub fn parse_canonical_label(label: &str) -> Option<(RowKind, Direction)> {
    if let Some(base) = label.strip_suffix(":+") {
        RowKind::parse(base).map(|k| (k, Direction::Plus))
    } else if let Some(base) = label.strip_suffix(":-").or_else(|| label.strip_suffix(":−")) {
        RowKind::parse(base).map(|k| (k, Direction::Minus))
    } else {
        None
    }
}

/// Where a certificate came from; filled in by the caller of the solver.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub u: String,
    pub u_exact: Option<String>,
    pub t: Option<Sign>,
    /// `(F_AB, F_BC, F_AC, F_ABC)` as decimal or `p/q` strings.
    pub f: Option<[String; 4]>,
    pub mode: Option<Mode>,
    pub options: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate<S> {
    /// Nonzero entries only, in canonical row order.
    pub entries: Vec<CertificateEntry<S>>,
    pub margin: S,
    pub provenance: Provenance,
}

impl<S: Scalar> FarkasCertificate<S> {
    /// Net multiplier `y₊ − y₋` per constraint.
    pub fn multipliers(&self) -> HashMap<RowKind, S> {
        let mut out: HashMap<RowKind, S> = HashMap::new();
        for e in &self.entries {
            let v = match e.direction {
                Direction::Plus => e.y.clone(),
                Direction::Minus => -e.y.clone(),
            };
            let slot = out.entry(e.kind).or_insert_with(S::zero);
            *slot += v;
        }
        out
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(CertificateEntry::label).collect()
    }

    pub fn to_f64(&self) -> FarkasCertificate<f64> {
        FarkasCertificate {
            entries: self
                .entries
                .iter()
                .map(|e| CertificateEntry {
                    kind: e.kind,
                    direction: e.direction,
                    y: e.y.to_f64(),
                })
                .collect(),
            margin: self.margin.to_f64(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

impl FarkasCertificate<f64> {
    /// Exact copy of a float certificate (every `f64` is a dyadic rational).
    pub fn to_rational(&self) -> FarkasCertificate<Rational> {
        let conv = |x: f64| Rational::from_float(x).unwrap_or_else(|| Rational::from_i64(0));
        FarkasCertificate {
            entries: self
                .entries
                .iter()
                .map(|e| CertificateEntry {
                    kind: e.kind,
                    direction: e.direction,
                    y: conv(e.y),
                })
                .collect(),
            margin: conv(self.margin),
            provenance: self.provenance.clone(),
        }
    }
}

/// Canonical certificate from net multipliers `λ` in problem row order.
pub fn canonicalize<S: Scalar>(p: &InflationProblem<S>, lambda: &[S]) -> Vec<CertificateEntry<S>> {
    p.rows
        .iter()
        .zip(lambda)
        .filter(|(_, l)| !l.is_zero())
        .map(|(row, l)| CertificateEntry {
            kind: row.kind,
            direction: if l.is_positive() {
                Direction::Plus
            } else {
                Direction::Minus
            },
            y: l.abs(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult<S> {
    Feasible { witness: Vec<S> },
    Infeasible { certificate: FarkasCertificate<S> },
}

impl<S> FeasibilityResult<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }

    pub fn certificate(&self) -> Option<&FarkasCertificate<S>> {
        match self {
            FeasibilityResult::Infeasible { certificate } => Some(certificate),
            FeasibilityResult::Feasible { .. } => None,
        }
    }
}

impl<S> fmt::Display for FeasibilityResult<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeasibilityResult::Feasible { .. } => "feasible",
            FeasibilityResult::Infeasible { .. } => "infeasible",
        })
    }
}

/// Phase-one form: nonzero rows only, sign-flipped to `b ≥ 0`, plus the
/// normalization row. Returns the system, the kept row indices and their signs.
fn phase_one_system<S: Scalar>(p: &InflationProblem<S>) -> (LinearSystem<S>, Vec<usize>, Vec<bool>) {
    let kept: Vec<usize> = (0..p.rows.len())
        .filter(|&i| !p.rows[i].coeffs.is_empty())
        .collect();
    let flipped: Vec<bool> = kept.iter().map(|&i| p.rows[i].rhs.is_negative()).collect();
    let m = kept.len() + 1;
    let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); p.n_vars];
    let mut rhs = Vec::with_capacity(m);
    for (r, (&i, &neg)) in kept.iter().zip(&flipped).enumerate() {
        let row = &p.rows[i];
        for (j, a) in &row.coeffs {
            cols[*j].push((r, if neg { -a.clone() } else { a.clone() }));
        }
        rhs.push(if neg { -row.rhs.clone() } else { row.rhs.clone() });
    }
    for col in cols.iter_mut() {
        col.push((m - 1, S::one()));
    }
    rhs.push(S::one());
    (LinearSystem { cols, rhs }, kept, flipped)
}

/// `λ·b − max_j (λ·A)_j` for net multipliers in problem row order.
fn lambda_margin<S: Scalar>(p: &InflationProblem<S>, lambda: &[S]) -> S {
    let mut acc = vec![S::zero(); p.n_vars];
    let mut yb = S::zero();
    for (row, l) in p.rows.iter().zip(lambda) {
        if l.is_zero() {
            continue;
        }
        yb += l.clone() * &row.rhs;
        for (j, a) in &row.coeffs {
            acc[*j] += l.clone() * a;
        }
    }
    let max = acc.into_iter().reduce(S::max_of).unwrap_or_else(S::zero);
    yb - max
}

fn solve_collapsed<S: Scalar>(p: &InflationProblem<S>) -> Result<FeasibilityResult<S>, LpError> {
    // an empty row with nonzero right-hand side is infeasible on its own
    if let Some(i) = p
        .rows
        .iter()
        .position(|r| r.coeffs.is_empty() && !r.rhs.is_zero())
    {
        let mut lambda = vec![S::zero(); p.rows.len()];
        lambda[i] = if p.rows[i].rhs.is_positive() {
            S::one()
        } else {
            -S::one()
        };
        let margin = lambda_margin(p, &lambda);
        return Ok(FeasibilityResult::Infeasible {
            certificate: FarkasCertificate {
                entries: canonicalize(p, &lambda),
                margin,
                provenance: Provenance::default(),
            },
        });
    }

    let (sys, kept, flipped) = phase_one_system(p);
    let outcome = match S::MODE {
        Mode::Float => phase_one(&sys)?,
        Mode::Exact => {
            let hint = phase_one(&sys.to_f64())?;
            phase_one_from(&sys, &hint.basis)?
        }
    };

    let objective = outcome.objective.clone();
    let feasible = match S::MODE {
        Mode::Exact => objective.is_zero(),
        Mode::Float => objective.to_f64() <= FEASIBLE_OBJECTIVE,
    };
    if feasible {
        let mut witness = outcome.x;
        if S::MODE == Mode::Float {
            for v in witness.iter_mut() {
                if v.is_negative() {
                    *v = S::zero();
                }
            }
        }
        let (rows, domain) = p.residual(&witness);
        let ok = match S::MODE {
            Mode::Exact => rows.is_zero() && domain.is_zero(),
            Mode::Float => rows.to_f64() <= WITNESS_TOL && domain.to_f64() <= WITNESS_TOL,
        };
        if !ok {
            return Err(LpError::NumericallyAmbiguous {
                objective: objective.to_f64(),
                margin: f64::NAN,
            });
        }
        return Ok(FeasibilityResult::Feasible { witness });
    }

    let mut lambda = vec![S::zero(); p.rows.len()];
    for ((&i, &neg), y) in kept.iter().zip(&flipped).zip(&outcome.duals) {
        lambda[i] = if neg { -y.clone() } else { y.clone() };
    }
    let margin = lambda_margin(p, &lambda);
    if !margin.is_certified_positive() {
        return Err(LpError::NumericallyAmbiguous {
            objective: objective.to_f64(),
            margin: margin.to_f64(),
        });
    }
    Ok(FeasibilityResult::Infeasible {
        certificate: FarkasCertificate {
            entries: canonicalize(p, &lambda),
            margin,
            provenance: Provenance::default(),
        },
    })
}

/// Sym-row multipliers that make every raw column equal its orbit average,
/// so the explicit problem inherits the collapsed margin. Flows are pushed
/// along a spanning tree of each orbit, leaves first.
fn symmetry_multipliers<S: Scalar>(explicit: &InflationProblem<S>, lambda: &mut [S]) {
    let orbits = explicit.orbits();
    let mut col = vec![S::zero(); explicit.n_vars];
    for (row, l) in explicit.rows.iter().zip(lambda.iter()) {
        if l.is_zero() || matches!(row.kind, RowKind::Sym { .. }) {
            continue;
        }
        for (j, a) in &row.coeffs {
            col[*j] += l.clone() * a;
        }
    }
    for members in &orbits.members {
        if members.len() == 1 {
            continue;
        }
        let size = S::from_i64(members.len() as i64);
        let avg = members
            .iter()
            .fold(S::zero(), |acc, &o| acc + col[o].clone())
            / size;
        // BFS tree from the representative; parent edge is a sym row
        let root = members[0];
        let mut order = vec![root];
        let mut parent: HashMap<usize, (usize, RowKind)> = HashMap::new();
        let mut k = 0;
        while k < order.len() {
            let o = order[k];
            k += 1;
            for g in 1..crate::inflation::N_GROUP {
                let nb = crate::inflation::act(g, o);
                if nb == root || parent.contains_key(&nb) {
                    continue;
                }
                let kind = RowKind::Sym {
                    g: g as u8,
                    var: o.min(nb) as u16,
                };
                parent.insert(nb, (o, kind));
                order.push(nb);
            }
        }
        // excess[o] = avg − col[o] must be delivered to o
        let mut need: HashMap<usize, S> = members
            .iter()
            .map(|&o| (o, avg.clone() - col[o].clone()))
            .collect();
        for &o in order.iter().skip(1).rev() {
            let (par, kind) = parent[&o];
            let d = need[&o].clone();
            if d.is_zero() {
                continue;
            }
            // row `kind` adds z at its larger outcome and −z at its smaller one
            let z = if o > par { d.clone() } else { -d.clone() };
            let idx = explicit.row_index(&kind).expect("sym row present");
            lambda[idx] += z;
            *need.get_mut(&par).unwrap() += d;
        }
    }
}

fn solve_explicit<S: Scalar>(p: &InflationProblem<S>) -> Result<FeasibilityResult<S>, LpError> {
    let collapsed = p.rebuild_with_symmetry(SymmetryMode::Collapsed);
    match solve_collapsed(&collapsed)? {
        FeasibilityResult::Feasible { witness } => Ok(FeasibilityResult::Feasible {
            witness: collapsed.expand_to_raw(&witness),
        }),
        FeasibilityResult::Infeasible { certificate } => {
            let mut lambda = vec![S::zero(); p.rows.len()];
            let mult = certificate.multipliers();
            for (i, row) in p.rows.iter().enumerate() {
                if let Some(v) = mult.get(&row.kind) {
                    lambda[i] = v.clone();
                }
            }
            symmetry_multipliers(p, &mut lambda);
            let margin = lambda_margin(p, &lambda);
            if !margin.is_certified_positive() {
                return Err(LpError::NumericallyAmbiguous {
                    objective: certificate.margin.to_f64(),
                    margin: margin.to_f64(),
                });
            }
            Ok(FeasibilityResult::Infeasible {
                certificate: FarkasCertificate {
                    entries: canonicalize(p, &lambda),
                    margin,
                    provenance: Provenance::default(),
                },
            })
        }
    }
}

/// Decide whether the inflation LP has a solution on the probability simplex.
///
/// Exact problems are solved in rational arithmetic, starting from the basis a
/// float solve ends on. Problems with explicit symmetry rows are solved on
/// orbit variables and the answer is lifted back.
pub fn solve_feasibility<S: Scalar>(p: &InflationProblem<S>) -> Result<FeasibilityResult<S>, LpError> {
    let result = match p.options.symmetry {
        SymmetryMode::Collapsed => solve_collapsed(p)?,
        SymmetryMode::Explicit => solve_explicit(p)?,
    };
    if cfg!(debug_assertions) {
        if let FeasibilityResult::Infeasible { certificate } = &result {
            debug_assert!(verify_certificate(certificate, p).unwrap_or(false));
        }
    }
    Ok(result)
}

/// Net multipliers in problem row order; `None` if any `y` is negative.
fn lambda_from_certificate<S: Scalar>(
    cert: &FarkasCertificate<S>,
    p: &InflationProblem<S>,
) -> Result<Option<Vec<S>>, LpError> {
    let mut lambda = vec![S::zero(); p.rows.len()];
    let mut nonnegative = true;
    for e in &cert.entries {
        let idx = p
            .row_index(&e.kind)
            .ok_or_else(|| LpError::LabelMismatch(e.label()))?;
        if e.y.is_negative() {
            nonnegative = false;
        }
        match e.direction {
            Direction::Plus => lambda[idx] += &e.y,
            Direction::Minus => lambda[idx] -= &e.y,
        }
    }
    Ok(nonnegative.then_some(lambda))
}

/// `y·b′ − max_j (y·A′)_j` for the given certificate on problem `p`.
pub fn relaxed_margin<S: Scalar>(cert: &FarkasCertificate<S>, p: &InflationProblem<S>) -> Result<S, LpError> {
    let mut lambda = vec![S::zero(); p.rows.len()];
    for e in &cert.entries {
        let idx = p
            .row_index(&e.kind)
            .ok_or_else(|| LpError::LabelMismatch(e.label()))?;
        match e.direction {
            Direction::Plus => lambda[idx] += &e.y,
            Direction::Minus => lambda[idx] -= &e.y,
        }
    }
    Ok(lambda_margin(p, &lambda))
}

/// Recompute the certificate from scratch: `y ≥ 0` and a strictly positive
/// margin (above the float threshold in float mode).
pub fn verify_certificate<S: Scalar>(cert: &FarkasCertificate<S>, p: &InflationProblem<S>) -> Result<bool, LpError> {
    let Some(lambda) = lambda_from_certificate(cert, p)? else {
        return Ok(false);
    };
    Ok(lambda_margin(p, &lambda).is_certified_positive())
}

/// Float threshold used by [`verify_certificate`] in float mode.
pub const fn margin_threshold() -> f64 {
    MARGIN_THRESHOLD
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{condition_q, eval_q, UParam};
    use crate::inflation::{build_inflation_lp, LpOptions};
    use crate::localmodel::{eval_local, TriangleLocalModel};
    use crate::polytope::qplus_point;

    fn headline_problem() -> InflationProblem<f64> {
        let u = UParam::new(0.8090).unwrap();
        let q = condition_q(&eval_q(&u, &qplus_point(&u)), Sign::Minus).unwrap();
        build_inflation_lp(&q, LpOptions::default())
    }

    #[test]
    fn parity_problem_is_feasible() {
        let q = eval_local(&TriangleLocalModel::<f64>::parity());
        let p = build_inflation_lp(&q, LpOptions::default());
        let res = solve_feasibility(&p).unwrap();
        let FeasibilityResult::Feasible { witness } = res else {
            panic!("expected feasible");
        };
        let (rows, domain) = p.residual(&witness);
        assert!(rows < 1e-9 && domain < 1e-9);
    }

    #[test]
    fn headline_problem_is_infeasible_and_verifies() {
        let p = headline_problem();
        let res = solve_feasibility(&p).unwrap();
        let cert = res.certificate().expect("infeasible").clone();
        assert!(cert.margin > 1e-9);
        assert!(verify_certificate(&cert, &p).unwrap());
        assert!((relaxed_margin(&cert, &p).unwrap() - cert.margin).abs() < 1e-15);

        let mut bad = cert.clone();
        bad.entries[0].y = -bad.entries[0].y;
        assert!(!verify_certificate(&bad, &p).unwrap());

        let mut foreign = cert.clone();
        foreign.entries.push(CertificateEntry {
            kind: RowKind::Hd(0),
            direction: Direction::Plus,
            y: 1.0,
        });
        let hier_only = build_inflation_lp(&p.source, LpOptions::hierarchy_only());
        assert!(matches!(
            verify_certificate(&foreign, &hier_only),
            Err(LpError::LabelMismatch(_))
        ));
    }

    #[test]
    fn certificate_fails_far_away_and_survives_nearby() {
        let p = headline_problem();
        let cert = solve_feasibility(&p).unwrap().certificate().unwrap().clone();
        let at = |u: f64| {
            let u = UParam::new(u).unwrap();
            let q = crate::family::conditional_unchecked(&eval_q(&u, &qplus_point(&u)), Sign::Minus);
            p.rebuild(&q)
        };
        assert!(relaxed_margin(&cert, &at(0.80901)).unwrap() > 0.0);
        assert!(!verify_certificate(&cert, &at(0.71)).unwrap());
    }

    #[test]
    fn canonical_labels_parse() {
        assert_eq!(
            parse_canonical_label("hier:000111:-"),
            Some((RowKind::Hier(7), Direction::Minus))
        );
        assert_eq!(
            parse_canonical_label("lpi:B:111111:+"),
            Some((RowKind::Lpi { party: 1, bits: 63 }, Direction::Plus))
        );
        assert_eq!(parse_canonical_label("hier:000111"), None);
    }
}
