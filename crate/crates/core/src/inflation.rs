//! The hexagon web-inflation linear program for a binary triangle distribution.
//!
//! Inflation outcomes are 12-bit indices over the party copies
//! `A11 A12 A21 A22 B11 … C22`, with `A11` the most significant bit and the
//! usual `+1 → 0`, `−1 → 1` encoding. Copy `A^{xy}` receives `(β_x, γ_y)`,
//! `B^{xy}` receives `(γ_x, α_y)` and `C^{xy}` receives `(α_x, β_y)`.
//!
//! Nonnegativity and normalization are not rows: the variables live on the
//! probability simplex and the solver enforces that domain directly.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::family::{BinaryDist3, Sign};
use crate::scalar::Scalar;

pub const N_OUTCOMES: usize = 4096;
pub const N_GROUP: usize = 8;

/// Bit position (0 = `A11`, 11 = `C22`) of party copy `(party, x, y)`.
pub fn copy_position(party: usize, x: usize, y: usize) -> usize {
    party * 4 + x * 2 + y
}

fn bit_at(o: usize, pos: usize) -> usize {
    (o >> (11 - pos)) & 1
}

/// Apply group element `g` (bit 2 swaps the β copies, bit 1 the γ copies,
/// bit 0 the α copies) to an outcome index.
pub fn act(g: usize, o: usize) -> usize {
    let (pb, pg, pa) = ((g >> 2) & 1, (g >> 1) & 1, g & 1);
    // per party: which swap acts on the first and on the second copy index
    let swaps = [(pb, pg), (pg, pa), (pa, pb)];
    let mut out = 0;
    for (party, &(sx, sy)) in swaps.iter().enumerate() {
        for x in 0..2 {
            for y in 0..2 {
                let v = bit_at(o, copy_position(party, x, y));
                out |= v << (11 - copy_position(party, x ^ sx, y ^ sy));
            }
        }
    }
    out
}

/// Partition of the 4096 outcomes into orbits of the copy-permutation group.
#[derive(Debug)]
pub struct OrbitTable {
    /// Orbit id of each outcome; ids follow increasing representatives.
    pub orbit_of: Vec<usize>,
    /// Smallest outcome index in each orbit.
    pub representatives: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl OrbitTable {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn size(&self, orbit: usize) -> usize {
        self.members[orbit].len()
    }
}

pub fn orbit_decomposition() -> &'static OrbitTable {
    static TABLE: OnceLock<OrbitTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut orbit_of = vec![usize::MAX; N_OUTCOMES];
        let mut representatives = Vec::new();
        let mut members = Vec::new();
        for o in 0..N_OUTCOMES {
            if orbit_of[o] != usize::MAX {
                continue;
            }
            let id = representatives.len();
            let mut orbit: Vec<usize> = (0..N_GROUP).map(|g| act(g, o)).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &m in &orbit {
                orbit_of[m] = id;
            }
            representatives.push(o);
            members.push(orbit);
        }
        OrbitTable {
            orbit_of,
            representatives,
            members,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryMode {
    /// One variable per orbit, holding the orbit's total probability.
    Collapsed,
    /// One variable per outcome plus explicit `p(g·o) − p(o) = 0` rows.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LpOptions {
    pub hierarchy: bool,
    pub higher_degree: bool,
    pub lpi: bool,
    pub symmetry: SymmetryMode,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            hierarchy: true,
            higher_degree: true,
            lpi: true,
            symmetry: SymmetryMode::Collapsed,
        }
    }
}

impl LpOptions {
    pub fn hierarchy_only() -> Self {
        LpOptions {
            higher_degree: false,
            lpi: false,
            ..Default::default()
        }
    }

    pub fn without_lpi() -> Self {
        LpOptions {
            lpi: false,
            ..Default::default()
        }
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.hierarchy {
            parts.push("hierarchy");
        }
        if self.higher_degree {
            parts.push("higher-degree");
        }
        if self.lpi {
            parts.push("lpi");
        }
        if self.symmetry == SymmetryMode::Explicit {
            parts.push("explicit-symmetry");
        }
        parts.join(",")
    }

    /// Inverse of [`LpOptions::describe`].
    pub fn from_description(text: &str) -> Option<LpOptions> {
        let mut o = LpOptions {
            hierarchy: false,
            higher_degree: false,
            lpi: false,
            symmetry: SymmetryMode::Collapsed,
        };
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "hierarchy" => o.hierarchy = true,
                "higher-degree" => o.higher_degree = true,
                "lpi" => o.lpi = true,
                "explicit-symmetry" => o.symmetry = SymmetryMode::Explicit,
                _ => return None,
            }
        }
        Some(o)
    }
}

/// The constraint that generated a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    /// `p(g·o) − p(o) = 0` for the smaller outcome `o` of the pair.
    Sym { g: u8, var: u16 },
    /// Diagonal copies `(a11, a22, b11, b22, c11, c22)`, first listed is the high bit.
    Hier(u8),
    /// Off-diagonal copies `(a12, b12, c12)`.
    Hd(u8),
    /// Factored party (0 = A) and its six-copy assignment, factored copy first.
    Lpi { party: u8, bits: u8 },
}

const HIER_POSITIONS: [usize; 6] = [0, 3, 4, 7, 8, 11];
const HD_POSITIONS: [usize; 3] = [1, 5, 9];
const LPI_POSITIONS: [[usize; 6]; 3] = [
    // a11 | a22 b21 b22 c12 c22
    [0, 3, 6, 7, 9, 11],
    // b11 | b22 c21 c22 a12 a22
    [4, 7, 10, 11, 1, 3],
    // c11 | c22 a21 a22 b12 b22
    [8, 11, 2, 3, 5, 7],
];

impl RowKind {
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn parse(label: &str) -> Option<RowKind> {
        let parts: Vec<&str> = label.split(':').collect();
        let bits = |s: &str, n: usize| -> Option<u8> {
            (s.len() == n && s.chars().all(|c| c == '0' || c == '1'))
                .then(|| u8::from_str_radix(s, 2).ok())
                .flatten()
        };
        match parts.as_slice() {
            ["sym", g, var] => {
                let g: u8 = g.parse().ok()?;
                let var: u16 = var.parse().ok()?;
                ((1..N_GROUP as u8).contains(&g) && (var as usize) < N_OUTCOMES)
                    .then_some(RowKind::Sym { g, var })
            }
            ["hier", b] => bits(b, 6).map(RowKind::Hier),
            ["hd", b] => bits(b, 3).map(RowKind::Hd),
            ["lpi", p, b] => {
                let party = match *p {
                    "A" => 0,
                    "B" => 1,
                    "C" => 2,
                    _ => return None,
                };
                bits(b, 6).map(|bits| RowKind::Lpi { party, bits })
            }
            _ => None,
        }
    }

    /// Copy positions and required bit values that select the marginal.
    fn pattern(&self) -> Vec<(usize, usize)> {
        let spread = |pos: &[usize], bits: u8| {
            let n = pos.len();
            pos.iter()
                .enumerate()
                .map(|(k, &p)| (p, ((bits >> (n - 1 - k)) & 1) as usize))
                .collect()
        };
        match *self {
            RowKind::Sym { .. } => Vec::new(),
            RowKind::Hier(b) => spread(&HIER_POSITIONS, b),
            RowKind::Hd(b) => spread(&HD_POSITIONS, b),
            RowKind::Lpi { party, bits } => spread(&LPI_POSITIONS[party as usize], bits),
        }
    }

    fn matches(pattern: &[(usize, usize)], o: usize) -> bool {
        pattern.iter().all(|&(p, v)| bit_at(o, p) == v)
    }
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RowKind::Sym { g, var } => write!(f, "sym:{g}:{var}"),
            RowKind::Hier(b) => write!(f, "hier:{b:06b}"),
            RowKind::Hd(b) => write!(f, "hd:{b:03b}"),
            RowKind::Lpi { party, bits } => {
                write!(f, "lpi:{}:{bits:06b}", ["A", "B", "C"][party as usize])
            }
        }
    }
}

/// `Σ coeffs·x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow<S> {
    pub kind: RowKind,
    /// Sorted by column, no zeros.
    pub coeffs: Vec<(usize, S)>,
    pub rhs: S,
}

impl<S: Scalar> ConstraintRow<S> {
    pub fn label(&self) -> String {
        self.kind.label()
    }

    pub fn dot(&self, x: &[S]) -> S {
        self.coeffs
            .iter()
            .fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone())
    }
}

#[derive(Debug, Clone)]
pub struct InflationProblem<S> {
    pub n_vars: usize,
    pub rows: Vec<ConstraintRow<S>>,
    pub source: BinaryDist3<S>,
    pub options: LpOptions,
    orbits: &'static OrbitTable,
    index: Arc<OnceLock<std::collections::HashMap<RowKind, usize>>>,
}

/// Single-party marginals `P(X = +1)` for X = A, B, C.
fn plus_marginals<S: Scalar>(q: &BinaryDist3<S>) -> [S; 3] {
    [q.marginal_plus(0), q.marginal_plus(1), q.marginal_plus(2)]
}

fn marginal_at<S: Scalar>(plus: &S, bit: usize) -> S {
    if bit == 0 {
        plus.clone()
    } else {
        S::one() - plus.clone()
    }
}

fn q_at<S: Scalar>(q: &BinaryDist3<S>, bits3: usize) -> S {
    q.entries()[bits3].clone()
}

/// Right-hand side of a row; depends on `q` only through its entries and marginals.
/// Source outcomes `(x, x′)` whose product a hierarchy row equates to.
pub fn hier_pair(bits: u8) -> (usize, usize) {
    let b = bits as usize;
    let first = (((b >> 5) & 1) << 2) | (((b >> 3) & 1) << 1) | ((b >> 1) & 1);
    let second = (((b >> 4) & 1) << 2) | (((b >> 2) & 1) << 1) | (b & 1);
    (first, second)
}

pub fn row_rhs<S: Scalar>(kind: RowKind, q: &BinaryDist3<S>) -> S {
    match kind {
        RowKind::Sym { .. } | RowKind::Lpi { .. } => S::zero(),
        RowKind::Hier(b) => {
            let (first, second) = hier_pair(b);
            q_at(q, first) * q_at(q, second)
        }
        RowKind::Hd(b) => {
            let m = plus_marginals(q);
            (0..3).fold(S::one(), |acc, p| {
                acc * marginal_at(&m[p], ((b as usize) >> (2 - p)) & 1)
            })
        }
    }
}

/// Integer tallies that determine a row's coefficient on one orbit.
#[derive(Clone, Copy, Default)]
struct Tally {
    /// outcomes matching the full pattern
    full: i64,
    /// outcomes matching all but the factored copy
    rest: i64,
}

fn collapsed_row<S: Scalar>(
    kind: RowKind,
    orbits: &OrbitTable,
    marginals: &[S; 3],
) -> Vec<(usize, S)> {
    let pattern = kind.pattern();
    let factored = matches!(kind, RowKind::Lpi { .. });
    let mut tallies = vec![Tally::default(); orbits.len()];
    for o in 0..N_OUTCOMES {
        let t = &mut tallies[orbits.orbit_of[o]];
        if factored {
            if RowKind::matches(&pattern[1..], o) {
                t.rest += 1;
                if bit_at(o, pattern[0].0) == pattern[0].1 {
                    t.full += 1;
                }
            }
        } else if RowKind::matches(&pattern, o) {
            t.full += 1;
        }
    }
    let c = match kind {
        RowKind::Lpi { party, .. } => Some(marginal_at(&marginals[party as usize], pattern[0].1)),
        _ => None,
    };
    tallies
        .iter()
        .enumerate()
        .filter_map(|(orb, t)| {
            let size = S::from_i64(orbits.size(orb) as i64);
            let value = match &c {
                // f(1 − c) − (rest − f)c = f − rest·c
                Some(c) => (S::from_i64(t.full) - S::from_i64(t.rest) * c.clone()) / size,
                None => S::from_i64(t.full) / size,
            };
            (!value.is_zero()).then_some((orb, value))
        })
        .collect()
}

fn explicit_row<S: Scalar>(kind: RowKind, marginals: &[S; 3]) -> Vec<(usize, S)> {
    let pattern = kind.pattern();
    match kind {
        RowKind::Sym { g, var } => {
            let o = var as usize;
            vec![(o, -S::one()), (act(g as usize, o), S::one())]
        }
        RowKind::Lpi { party, .. } => {
            let c = marginal_at(&marginals[party as usize], pattern[0].1);
            let hit = S::one() - c.clone();
            let miss = -c;
            (0..N_OUTCOMES)
                .filter(|&o| RowKind::matches(&pattern[1..], o))
                .filter_map(|o| {
                    let v = if bit_at(o, pattern[0].0) == pattern[0].1 {
                        hit.clone()
                    } else {
                        miss.clone()
                    };
                    (!v.is_zero()).then_some((o, v))
                })
                .collect()
        }
        _ => (0..N_OUTCOMES)
            .filter(|&o| RowKind::matches(&pattern, o))
            .map(|o| (o, S::one()))
            .collect(),
    }
}

/// `Σ_r λ_r·A_r` over the variables of the given layout, with rows built
/// from the single-party marginals `P(X = +1)`.
pub fn weighted_columns<S: Scalar>(
    lambda: &[(RowKind, S)],
    plus_marginals: &[S; 3],
    symmetry: SymmetryMode,
) -> Vec<S> {
    let orbits = orbit_decomposition();
    let n = match symmetry {
        SymmetryMode::Collapsed => orbits.len(),
        SymmetryMode::Explicit => N_OUTCOMES,
    };
    let mut acc = vec![S::zero(); n];
    for (kind, l) in lambda {
        if l.is_zero() {
            continue;
        }
        let coeffs = match symmetry {
            SymmetryMode::Collapsed => collapsed_row(*kind, orbits, plus_marginals),
            SymmetryMode::Explicit => explicit_row(*kind, plus_marginals),
        };
        for (j, a) in coeffs {
            acc[j] += l.clone() * a;
        }
    }
    acc
}

/// Row kinds in emission order for the given options.
pub fn row_kinds(options: &LpOptions) -> Vec<RowKind> {
    let mut kinds = Vec::new();
    if options.symmetry == SymmetryMode::Explicit {
        for g in 1..N_GROUP {
            for o in 0..N_OUTCOMES {
                if act(g, o) > o {
                    kinds.push(RowKind::Sym {
                        g: g as u8,
                        var: o as u16,
                    });
                }
            }
        }
    }
    if options.hierarchy {
        kinds.extend((0..64).map(RowKind::Hier));
    }
    if options.higher_degree {
        kinds.extend((0..8).map(RowKind::Hd));
    }
    if options.lpi {
        for party in 0..3 {
            kinds.extend((0..64).map(|bits| RowKind::Lpi { party, bits }));
        }
    }
    kinds
}

pub fn build_inflation_lp<S: Scalar>(q: &BinaryDist3<S>, options: LpOptions) -> InflationProblem<S> {
    use rayon::prelude::*;
    let orbits = orbit_decomposition();
    let marginals = plus_marginals(q);
    let rows = row_kinds(&options)
        .into_par_iter()
        .map(|kind| ConstraintRow {
            kind,
            coeffs: match options.symmetry {
                SymmetryMode::Collapsed => collapsed_row(kind, orbits, &marginals),
                SymmetryMode::Explicit => explicit_row(kind, &marginals),
            },
            rhs: row_rhs(kind, q),
        })
        .collect();
    InflationProblem {
        n_vars: match options.symmetry {
            SymmetryMode::Collapsed => orbits.len(),
            SymmetryMode::Explicit => N_OUTCOMES,
        },
        rows,
        source: q.clone(),
        options,
        orbits,
        index: Arc::new(OnceLock::new()),
    }
}

impl<S: Scalar> InflationProblem<S> {
    pub fn orbits(&self) -> &'static OrbitTable {
        self.orbits
    }

    pub fn is_collapsed(&self) -> bool {
        self.options.symmetry == SymmetryMode::Collapsed
    }

    pub fn row_labels(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.label()).collect()
    }

    pub fn row_index(&self, kind: &RowKind) -> Option<usize> {
        self.index
            .get_or_init(|| self.rows.iter().enumerate().map(|(i, r)| (r.kind, i)).collect())
            .get(kind)
            .copied()
    }

    /// Map a 4096-entry inflation distribution onto this problem's variables.
    pub fn project_raw(&self, raw: &[S]) -> Vec<S> {
        assert_eq!(raw.len(), N_OUTCOMES);
        if !self.is_collapsed() {
            return raw.to_vec();
        }
        let mut x = vec![S::zero(); self.n_vars];
        for (o, p) in raw.iter().enumerate() {
            x[self.orbits.orbit_of[o]] += p;
        }
        x
    }

    /// Spread orbit masses uniformly over their members.
    pub fn expand_to_raw(&self, x: &[S]) -> Vec<S> {
        if !self.is_collapsed() {
            return x.to_vec();
        }
        let mut raw = vec![S::zero(); N_OUTCOMES];
        for (orb, members) in self.orbits.members.iter().enumerate() {
            let share = x[orb].clone() / S::from_i64(members.len() as i64);
            for &o in members {
                raw[o] = share.clone();
            }
        }
        raw
    }

    /// Largest `|A·x − b|` over the rows, and the simplex-domain violation.
    pub fn residual(&self, x: &[S]) -> (S, S) {
        let rows = self
            .rows
            .iter()
            .map(|r| (r.dot(x) - r.rhs.clone()).abs())
            .fold(S::zero(), S::max_of);
        let neg = x
            .iter()
            .filter(|v| v.is_negative())
            .map(|v| v.abs())
            .fold(S::zero(), S::max_of);
        let total = x.iter().fold(S::zero(), |acc, v| acc + v.clone());
        (rows, S::max_of(neg, (total - S::one()).abs()))
    }

    /// Whether `x` satisfies every row and the simplex domain (exactly in exact mode).
    pub fn is_feasible_point(&self, x: &[S]) -> bool {
        let (rows, domain) = self.residual(x);
        rows.is_negligible() && domain.is_negligible()
    }

    /// Rebuild the same row set for a different source distribution.
    pub fn rebuild(&self, q: &BinaryDist3<S>) -> InflationProblem<S> {
        build_inflation_lp(q, self.options)
    }

    pub fn rebuild_with_symmetry(&self, symmetry: SymmetryMode) -> InflationProblem<S> {
        build_inflation_lp(
            &self.source,
            LpOptions {
                symmetry,
                ..self.options
            },
        )
    }
}

/// Single-party marginal `P(X = s)`; all three coincide for the family.
pub fn party_marginal<S: Scalar>(q: &BinaryDist3<S>, party: usize, s: Sign) -> S {
    q.marginal(party, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{condition_q, eval_q, CorrelatorPoint, UParam};
    use crate::localmodel::{eval_local, inflation_witness_distribution, TriangleLocalModel};
    use crate::scalar::Rational;
    use std::collections::HashSet;

    #[test]
    fn group_action_is_faithful_involutive_and_commutative() {
        for o in [0usize, 1, 0b101100111010, 4095, 0b100000000000] {
            assert_eq!(act(0, o), o);
            for g in 0..8 {
                assert_eq!(act(g, act(g, o)), o);
                for h in 0..8 {
                    assert_eq!(act(g, act(h, o)), act(g ^ h, o));
                }
            }
        }
        // swapping α copies moves b^{k,1} ↔ b^{k,2} and c^{1,n} ↔ c^{2,n}
        let b11 = 1 << (11 - copy_position(1, 0, 0));
        assert_eq!(act(1, b11), 1 << (11 - copy_position(1, 0, 1)));
        let c12 = 1 << (11 - copy_position(2, 0, 1));
        assert_eq!(act(1, c12), 1 << (11 - copy_position(2, 1, 1)));
        let a21 = 1 << (11 - copy_position(0, 1, 0));
        assert_eq!(act(1, a21), a21);
    }

    #[test]
    fn orbit_table_partitions_outcomes() {
        let t = orbit_decomposition();
        assert_eq!(t.members.iter().map(Vec::len).sum::<usize>(), N_OUTCOMES);
        assert!(t.members.iter().all(|m| N_GROUP % m.len() == 0));
        assert_eq!(t.size(t.orbit_of[0]), 1);
        assert_eq!(t.size(t.orbit_of[4095]), 1);
        // Burnside count
        let fixed: usize = (0..N_GROUP)
            .map(|g| (0..N_OUTCOMES).filter(|&o| act(g, o) == o).count())
            .sum();
        assert_eq!(t.len(), fixed / N_GROUP);
        assert_eq!(t.len(), 640);
        for (id, m) in t.members.iter().enumerate() {
            assert_eq!(t.representatives[id], m[0]);
        }
        assert!(t.representatives.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn option_descriptions_round_trip() {
        for o in [
            LpOptions::default(),
            LpOptions::hierarchy_only(),
            LpOptions::without_lpi(),
            LpOptions {
                symmetry: SymmetryMode::Explicit,
                higher_degree: false,
                ..Default::default()
            },
        ] {
            assert_eq!(LpOptions::from_description(&o.describe()), Some(o));
        }
        assert_eq!(LpOptions::from_description("hierarchy,bogus"), None);
    }

    #[test]
    fn labels_round_trip() {
        let opts = LpOptions {
            symmetry: SymmetryMode::Explicit,
            ..Default::default()
        };
        let kinds = row_kinds(&opts);
        let set: HashSet<_> = kinds.iter().collect();
        assert_eq!(set.len(), kinds.len());
        for k in kinds.iter().step_by(97).chain(kinds.iter().rev().take(300)) {
            assert_eq!(RowKind::parse(&k.label()), Some(*k));
        }
        assert_eq!(RowKind::Hier(0b100001).label(), "hier:100001");
        assert_eq!(RowKind::Lpi { party: 2, bits: 5 }.label(), "lpi:C:000101");
        assert_eq!(RowKind::parse("lpi:D:000000"), None);
        assert_eq!(RowKind::parse("hier:0101"), None);
    }

    #[test]
    fn row_counts() {
        let q = eval_local(&TriangleLocalModel::<f64>::parity());
        let p = build_inflation_lp(&q, LpOptions::default());
        assert_eq!(p.rows.len(), 64 + 8 + 192);
        assert_eq!(p.n_vars, 640);
        let sym = row_kinds(&LpOptions {
            symmetry: SymmetryMode::Explicit,
            ..Default::default()
        })
        .iter()
        .filter(|k| matches!(k, RowKind::Sym { .. }))
        .count();
        let moved: usize = (1..N_GROUP)
            .map(|g| (0..N_OUTCOMES).filter(|&o| act(g, o) != o).count() / 2)
            .sum();
        assert_eq!(sym, moved);
    }

    #[test]
    fn hierarchy_rhs_sums_to_one() {
        let u = UParam::new(0.8090).unwrap();
        let f = crate::polytope::qplus_point(&u);
        let q = condition_q(&eval_q(&u, &f), Sign::Minus).unwrap();
        let total: f64 = (0..64).map(|b| row_rhs(RowKind::Hier(b), &q)).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let hd: f64 = (0..8).map(|b| row_rhs(RowKind::Hd(b), &q)).sum();
        assert!((hd - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parity_witness_is_exactly_feasible() {
        let m = TriangleLocalModel::<Rational>::parity();
        let q = eval_local(&m);
        let raw = inflation_witness_distribution(&m);
        for symmetry in [SymmetryMode::Collapsed, SymmetryMode::Explicit] {
            let p = build_inflation_lp(
                &q,
                LpOptions {
                    symmetry,
                    ..Default::default()
                },
            );
            assert!(p.is_feasible_point(&p.project_raw(&raw)));
        }
    }

    #[test]
    fn deterministic_witness_is_feasible() {
        let m = TriangleLocalModel::<Rational>::deterministic_plus();
        let p = build_inflation_lp(&eval_local(&m), LpOptions::default());
        let x = p.project_raw(&inflation_witness_distribution(&m));
        assert!(p.is_feasible_point(&x));
    }

    #[test]
    fn collapsed_rows_agree_with_explicit_rows_on_symmetric_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = TriangleLocalModel::random(&mut rng, [2, 2, 3]);
        let q = eval_local(&m);
        let collapsed = build_inflation_lp(&q, LpOptions::default());
        let explicit = build_inflation_lp(
            &q,
            LpOptions {
                symmetry: SymmetryMode::Explicit,
                ..Default::default()
            },
        );
        let x: Vec<f64> = (0..collapsed.n_vars).map(|_| rng.gen_range(0.0..1.0)).collect();
        let raw = collapsed.expand_to_raw(&x);
        for row in &collapsed.rows {
            let e = &explicit.rows[explicit.row_index(&row.kind).unwrap()];
            assert!((row.dot(&x) - e.dot(&raw)).abs() < 1e-12, "{}", row.label());
        }
    }

    #[test]
    fn lhs_matrix_is_independent_of_correlators() {
        let u = UParam::<Rational>::from_triple(55, 48, 73).unwrap();
        let build = |f: CorrelatorPoint<Rational>| {
            let q = crate::family::conditional_unchecked(&eval_q(&u, &f), Sign::Minus);
            build_inflation_lp(&q, LpOptions::default())
        };
        let p0 = build(crate::polytope::qplus_point(&u));
        let p1 = build(CorrelatorPoint::zero());
        assert!(p0.rows.iter().zip(&p1.rows).all(|(a, b)| a.coeffs == b.coeffs));
        assert!(p0.rows.iter().zip(&p1.rows).any(|(a, b)| a.rhs != b.rhs));
    }
}
