//! The four-outcome distribution family `P_u`, its binary reduction `q_u`
//! and the conditionals `q_u^±`.
//!
//! Outcome signs are encoded as bits with `+1 → 0` and `−1 → 1`; every
//! table in this module and every serialized index follows that rule.

use std::fmt;

use num_traits::One;

use crate::error::FamilyError;
use crate::scalar::{Rational, Ring, Scalar};

/// A `±1` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn from_bit(bit: usize) -> Sign {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => f.write_str("+1"),
            Sign::Minus => f.write_str("-1"),
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Sign::Plus),
            "-1" | "-" | "−1" => Ok(Sign::Minus),
            other => Err(format!("expected +1 or -1, got `{other}`")),
        }
    }
}

/// `u = p/r`, `v = q/r` with `p² + q² = r²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PythagoreanTriple {
    pub p: u64,
    pub q: u64,
    pub r: u64,
}

/// The family parameter `u ∈ (1/√2, 1]` together with the derived
/// quantities the formulas actually consume.
#[derive(Debug, Clone, PartialEq)]
pub struct UParam<S> {
    u: S,
    v: S,
    /// `u²`
    s: S,
    /// `v² = 1 − u²`
    v2: S,
    /// `u·v`
    uv: S,
    /// `u³v³`
    w3: S,
    triple: Option<PythagoreanTriple>,
}

impl<S: Scalar> UParam<S> {
    /// Build from a Pythagorean triple `(p, q, r)`; valid in both modes.
    pub fn from_triple(p: u64, q: u64, r: u64) -> Result<Self, FamilyError> {
        if r == 0 || (p as u128).pow(2) + (q as u128).pow(2) != (r as u128).pow(2) {
            return Err(FamilyError::NotPythagorean(format!("{p}/{r}")));
        }
        // 1/√2 < p/r  ⟺  2p² > r²
        if 2 * (p as u128).pow(2) <= (r as u128).pow(2) {
            return Err(FamilyError::OutOfDomain(p as f64 / r as f64));
        }
        let u = S::ratio(p as i64, r as i64);
        let v = S::ratio(q as i64, r as i64);
        Ok(Self::assemble(u, v, Some(PythagoreanTriple { p, q, r })))
    }

    fn assemble(u: S, v: S, triple: Option<PythagoreanTriple>) -> Self {
        let s = u.clone() * u.clone();
        let v2 = v.clone() * v.clone();
        let uv = u.clone() * v.clone();
        let w3 = uv.clone() * uv.clone() * uv.clone();
        UParam {
            u,
            v,
            s,
            v2,
            uv,
            w3,
            triple,
        }
    }

    pub fn u(&self) -> &S {
        &self.u
    }

    pub fn v(&self) -> &S {
        &self.v
    }

    pub fn u_squared(&self) -> &S {
        &self.s
    }

    pub fn v_squared(&self) -> &S {
        &self.v2
    }

    pub fn uv(&self) -> &S {
        &self.uv
    }

    pub fn u3v3(&self) -> &S {
        &self.w3
    }

    /// `u² − v²`
    pub fn gap(&self) -> S {
        self.s.clone() - self.v2.clone()
    }

    pub fn triple(&self) -> Option<PythagoreanTriple> {
        self.triple
    }

    pub fn is_pythagorean(&self) -> bool {
        self.triple.is_some()
    }

    pub fn to_f64(&self) -> UParam<f64> {
        UParam {
            u: self.u.to_f64(),
            v: self.v.to_f64(),
            s: self.s.to_f64(),
            v2: self.v2.to_f64(),
            uv: self.uv.to_f64(),
            w3: self.w3.to_f64(),
            triple: self.triple,
        }
    }
}

impl UParam<f64> {
    /// Float-mode parameter; requires `1/√2 < u ≤ 1`.
    pub fn new(u: f64) -> Result<Self, FamilyError> {
        if !(u > std::f64::consts::FRAC_1_SQRT_2 && u <= 1.0) {
            return Err(FamilyError::OutOfDomain(u));
        }
        let v = (1.0 - u * u).max(0.0).sqrt();
        Ok(Self::assemble(u, v, None))
    }

    /// The degenerate endpoint `u = v = 1/√2`, where the polytope is a point.
    pub fn boundary() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        UParam {
            u: h,
            v: h,
            s: 0.5,
            v2: 0.5,
            uv: 0.5,
            w3: 0.125,
            triple: None,
        }
    }
}

impl UParam<Rational> {
    /// Exact parameter; `u` must be a Pythagorean ratio so that `v` is rational.
    pub fn exact(u: &Rational) -> Result<Self, FamilyError> {
        let one = Rational::one();
        let v = (one - u * u)
            .sqrt_opt()
            .ok_or_else(|| FamilyError::NotPythagorean(u.render()))?;
        let r = u.denom().clone();
        let to_u64 = |x: &num_bigint::BigInt| -> Result<u64, FamilyError> {
            u64::try_from(x).map_err(|_| FamilyError::NotPythagorean(u.render()))
        };
        let p = to_u64(u.numer())?;
        let q = to_u64(&(v.numer() * &r / v.denom()))?;
        Self::from_triple(p, q, to_u64(&r)?)
    }
}

/// One of the four outcomes of each party in `P_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FourOutcome {
    Zero,
    OnePlus,
    OneMinus,
    Two,
}

impl FourOutcome {
    pub const ALL: [FourOutcome; 4] = [
        FourOutcome::Zero,
        FourOutcome::OnePlus,
        FourOutcome::OneMinus,
        FourOutcome::Two,
    ];

    fn code(self) -> usize {
        self as usize
    }

    /// `1̄_i` for the sign `i`.
    pub fn one(sign: Sign) -> FourOutcome {
        match sign {
            Sign::Plus => FourOutcome::OnePlus,
            Sign::Minus => FourOutcome::OneMinus,
        }
    }
}

/// `P_u(a, b, c)` over `{0̄, 1̄₊, 1̄₋, 2̄}³`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourOutcomeDist<S> {
    entries: Vec<S>,
}

impl<S: Scalar> FourOutcomeDist<S> {
    fn index(a: FourOutcome, b: FourOutcome, c: FourOutcome) -> usize {
        a.code() * 16 + b.code() * 4 + c.code()
    }

    pub fn get(&self, a: FourOutcome, b: FourOutcome, c: FourOutcome) -> &S {
        &self.entries[Self::index(a, b, c)]
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn total(&self) -> S {
        self.entries.iter().fold(S::zero(), |acc, x| acc + x.clone())
    }

    fn set_cyclic(&mut self, a: FourOutcome, b: FourOutcome, c: FourOutcome, value: S) {
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            self.entries[Self::index(x, y, z)] = value.clone();
        }
    }

    /// `(a, b, c) → (b, c, a)` applied to the whole table.
    pub fn cycled(&self) -> Self {
        let mut entries = vec![S::zero(); 64];
        for a in FourOutcome::ALL {
            for b in FourOutcome::ALL {
                for c in FourOutcome::ALL {
                    entries[Self::index(b, c, a)] = self.get(a, b, c).clone();
                }
            }
        }
        FourOutcomeDist { entries }
    }
}

/// `P_u` as produced by the four-outcome excitation-counting measurement.
#[allow(non_snake_case)]
pub fn eval_P<S: Scalar>(u: &UParam<S>) -> FourOutcomeDist<S> {
    use FourOutcome::*;
    let eight = S::from_i64(8);
    let s = u.u_squared().clone();
    let v2 = u.v_squared().clone();
    let uv = u.uv().clone();
    let u6v6 = s.clone() * s.clone() * s.clone() + v2.clone() * v2.clone() * v2.clone();
    let two_w = S::from_i64(2) * u.u3v3().clone();
    let uv2 = s.clone() * v2.clone();
    let two_uv = S::from_i64(2) * uv;

    let mut dist = FourOutcomeDist {
        entries: vec![S::zero(); 64],
    };
    dist.set_cyclic(Zero, OneMinus, Two, s.clone() / eight.clone());
    dist.set_cyclic(Zero, Two, OnePlus, s / eight.clone());
    dist.set_cyclic(Zero, OnePlus, Two, v2.clone() / eight.clone());
    dist.set_cyclic(Zero, Two, OneMinus, v2 / eight.clone());
    // (v³ + j u³)² = u⁶ + v⁶ + 2j u³v³
    dist.set_cyclic(
        OnePlus,
        OnePlus,
        OnePlus,
        (u6v6.clone() + two_w.clone()) / eight.clone(),
    );
    dist.set_cyclic(OneMinus, OneMinus, OneMinus, (u6v6 - two_w) / eight.clone());
    // u²v²(u + k v)² = u²v²(1 + 2k uv)
    dist.set_cyclic(
        OnePlus,
        OnePlus,
        OneMinus,
        uv2.clone() * (S::one() - two_uv.clone()) / eight.clone(),
    );
    dist.set_cyclic(
        OneMinus,
        OneMinus,
        OnePlus,
        uv2 * (S::one() + two_uv) / eight,
    );
    dist
}

/// The four free correlators `(F_AB, F_BC, F_AC, F_ABC)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorPoint<S> {
    pub f_ab: S,
    pub f_bc: S,
    pub f_ac: S,
    pub f_abc: S,
}

impl<S: Scalar> CorrelatorPoint<S> {
    pub fn new(f_ab: S, f_bc: S, f_ac: S, f_abc: S) -> Self {
        CorrelatorPoint {
            f_ab,
            f_bc,
            f_ac,
            f_abc,
        }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero(), S::zero())
    }

    /// Symmetric point `F_AB = F_BC = F_AC = f2`, `F_ABC = f3`.
    pub fn symmetric(f2: S, f3: S) -> Self {
        Self::new(f2.clone(), f2.clone(), f2, f3)
    }

    /// Coordinates in the halfspace order `(F_AB, F_AC, F_BC, F_ABC)`.
    pub fn to_halfspace_coords(&self) -> [S; 4] {
        [
            self.f_ab.clone(),
            self.f_ac.clone(),
            self.f_bc.clone(),
            self.f_abc.clone(),
        ]
    }

    pub fn from_halfspace_coords(c: [S; 4]) -> Self {
        let [ab, ac, bc, abc] = c;
        Self::new(ab, bc, ac, abc)
    }

    pub fn in_unit_box(&self) -> bool {
        let one = S::one();
        self.to_halfspace_coords()
            .iter()
            .all(|x| (one.clone() - x.abs()).is_nonnegative())
    }

    pub fn to_f64(&self) -> CorrelatorPoint<f64> {
        CorrelatorPoint::new(
            self.f_ab.to_f64(),
            self.f_bc.to_f64(),
            self.f_ac.to_f64(),
            self.f_abc.to_f64(),
        )
    }
}

/// The correlators of `q_u` pinned by `P_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedCorrelators<S> {
    /// `E_A = E_B = E_C`
    pub e_single: S,
    pub f: S,
    /// `F_A = F_B = F_C = u² − v²`
    pub f_single: S,
    /// `E_AB = E_BC = E_AC = (u² − v²)²`
    pub e_pair: S,
    /// `E_ABC = 8u³v³`
    pub e_abc: S,
}

pub fn fixed_correlators<S: Scalar>(u: &UParam<S>) -> FixedCorrelators<S> {
    let gap = u.gap();
    FixedCorrelators {
        e_single: S::zero(),
        f: S::zero(),
        f_single: gap.clone(),
        e_pair: gap.clone() * gap,
        e_abc: S::from_i64(8) * u.u3v3().clone(),
    }
}

/// `q_u(i, j, k, t)` over `{±1}⁴`, indexed by `(i, j, k, t)` bits, `i` most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDist4<S> {
    entries: [S; 16],
}

impl<S: Scalar> BinaryDist4<S> {
    pub fn index(i: Sign, j: Sign, k: Sign, t: Sign) -> usize {
        (i.bit() << 3) | (j.bit() << 2) | (k.bit() << 1) | t.bit()
    }

    pub fn get(&self, i: Sign, j: Sign, k: Sign, t: Sign) -> &S {
        &self.entries[Self::index(i, j, k, t)]
    }

    pub fn entries(&self) -> &[S; 16] {
        &self.entries
    }

    pub fn from_entries(entries: [S; 16]) -> Self {
        BinaryDist4 { entries }
    }

    pub fn total(&self) -> S {
        self.entries.iter().fold(S::zero(), |acc, x| acc + x.clone())
    }

    /// `Σ_{ijk} q(i, j, k, t)`
    pub fn t_weight(&self, t: Sign) -> S {
        (0..8).fold(S::zero(), |acc, x| acc + self.entries[(x << 1) | t.bit()].clone())
    }

    /// `q(party = i, t)` with the other two parties summed out; `party ∈ {0, 1, 2}`.
    pub fn single_party(&self, party: usize, i: Sign, t: Sign) -> S {
        (0..8)
            .filter(|x| (x >> (2 - party)) & 1 == i.bit())
            .fold(S::zero(), |acc, x| acc + self.entries[(x << 1) | t.bit()].clone())
    }
}

/// Bracket of the binary family before the `1/16` normalization, shared by
/// `q_u` and its conditionals.
fn family_bracket<S: Scalar>(
    u: &UParam<S>,
    f: &CorrelatorPoint<S>,
    i: i64,
    j: i64,
    k: i64,
    t: i64,
) -> S {
    let gap = u.gap();
    let pairs = S::from_i64(i * j + j * k + k * i);
    let ijk = i * j * k;
    S::one()
        + gap.clone() * gap.clone() * pairs
        + gap * S::from_i64((i + j + k) * t)
        + S::from_i64(8 * ijk) * u.u3v3().clone()
        + S::from_i64(t * i * j) * f.f_ab.clone()
        + S::from_i64(t * j * k) * f.f_bc.clone()
        + S::from_i64(t * k * i) * f.f_ac.clone()
        + S::from_i64(ijk * t) * f.f_abc.clone()
}

/// `q_u(i, j, k, t)` for the given correlators; negative entries are kept.
pub fn eval_q<S: Scalar>(u: &UParam<S>, f: &CorrelatorPoint<S>) -> BinaryDist4<S> {
    let sixteen = S::from_i64(16);
    let entries = std::array::from_fn(|idx| {
        let sgn = |shift: usize| Sign::from_bit(idx >> shift).value();
        family_bracket(u, f, sgn(3), sgn(2), sgn(1), sgn(0)) / sixteen.clone()
    });
    BinaryDist4 { entries }
}

/// A binary tripartite distribution `q(i, j, k)`, indexed by `(i, j, k)` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDist3<S> {
    entries: [S; 8],
    t_label: Option<Sign>,
}

impl<S: Ring> BinaryDist3<S> {
    pub fn index(i: Sign, j: Sign, k: Sign) -> usize {
        (i.bit() << 2) | (j.bit() << 1) | k.bit()
    }

    /// Wrap raw entries; callers are responsible for normalization.
    pub fn from_entries(entries: [S; 8], t_label: Option<Sign>) -> Self {
        BinaryDist3 { entries, t_label }
    }

    pub fn get(&self, i: Sign, j: Sign, k: Sign) -> &S {
        &self.entries[Self::index(i, j, k)]
    }

    pub fn entries(&self) -> &[S; 8] {
        &self.entries
    }

    pub fn t_label(&self) -> Option<Sign> {
        self.t_label
    }

    pub fn total(&self) -> S {
        self.entries.iter().fold(S::zero(), |acc, x| acc + x.clone())
    }

    /// `P(party = +1)` for `party ∈ {0, 1, 2}` (A, B, C).
    pub fn marginal_plus(&self, party: usize) -> S {
        (0..8)
            .filter(|x| (x >> (2 - party)) & 1 == 0)
            .fold(S::zero(), |acc, x| acc + self.entries[x].clone())
    }

    /// `P(party = s)`.
    pub fn marginal(&self, party: usize, s: Sign) -> S {
        let plus = self.marginal_plus(party);
        match s {
            Sign::Plus => plus,
            Sign::Minus => S::one() - plus,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries
            .iter()
            .all(|x| x.sign() != std::cmp::Ordering::Less)
    }
}

impl<S: Scalar> BinaryDist3<S> {
    pub fn to_f64(&self) -> BinaryDist3<f64> {
        BinaryDist3 {
            entries: std::array::from_fn(|i| self.entries[i].to_f64()),
            t_label: self.t_label,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(S::zero(), S::max_of)
    }
}

/// The conditional `q^t(i, j, k) = 2·q(i, j, k, t)` without a sign check.
///
/// This is the affine map `F ↦ q^t` that coverage analysis differentiates;
/// use [`condition_q`] for anything that must be a probability distribution.
pub fn conditional_unchecked<S: Scalar>(q: &BinaryDist4<S>, t: Sign) -> BinaryDist3<S> {
    let two = S::from_i64(2);
    let entries = std::array::from_fn(|x| two.clone() * q.entries[(x << 1) | t.bit()].clone());
    BinaryDist3 {
        entries,
        t_label: Some(t),
    }
}

/// `q^t(i, j, k) = q(i, j, k | t)`; fails when `q(·, ·, ·, t)` has a negative entry.
pub fn condition_q<S: Scalar>(q: &BinaryDist4<S>, t: Sign) -> Result<BinaryDist3<S>, FamilyError> {
    for x in 0..8 {
        let value = &q.entries[(x << 1) | t.bit()];
        if value.sign() == std::cmp::Ordering::Less {
            return Err(FamilyError::NegativeConditional {
                i: Sign::from_bit(x >> 2),
                j: Sign::from_bit(x >> 1),
                k: Sign::from_bit(x),
                t,
                value: value.to_f64(),
            });
        }
    }
    Ok(conditional_unchecked(q, t))
}

/// Coefficients of the affine map `F ↦ q^t(F)`: `q^t_x = base_x + slope_x · F`
/// with `F` in halfspace order `(F_AB, F_AC, F_BC, F_ABC)`.
pub fn conditional_affine<S: Scalar>(u: &UParam<S>, t: Sign) -> ([S; 8], [[S; 4]; 8]) {
    let eight = S::from_i64(8);
    let zero = CorrelatorPoint::zero();
    let tv = t.value();
    let base = std::array::from_fn(|x| {
        let sg = |shift: usize| Sign::from_bit(x >> shift).value();
        family_bracket(u, &zero, sg(2), sg(1), sg(0), tv) / eight.clone()
    });
    let slope = std::array::from_fn(|x| {
        let (i, j, k) = (
            Sign::from_bit(x >> 2).value(),
            Sign::from_bit(x >> 1).value(),
            Sign::from_bit(x).value(),
        );
        [
            S::ratio(tv * i * j, 8),
            S::ratio(tv * k * i, 8),
            S::ratio(tv * j * k, 8),
            S::ratio(tv * i * j * k, 8),
        ]
    });
    (base, slope)
}

/// One checked marginal relation between `q_u` and `P_u`.
#[derive(Debug, Clone)]
pub struct RelationCheck<S> {
    pub name: String,
    pub lhs: S,
    pub rhs: S,
    pub residual: S,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport<S> {
    pub relations: Vec<RelationCheck<S>>,
}

impl<S: Scalar> ConsistencyReport<S> {
    pub fn all_passed(&self) -> bool {
        self.relations.iter().all(|r| r.passed)
    }

    /// Relations whose name starts with the given family tag (`"a"`, `"b"` or `"c"`).
    pub fn family(&self, tag: &str) -> impl Iterator<Item = &RelationCheck<S>> {
        let prefix = format!("{tag}:");
        self.relations
            .iter()
            .filter(move |r| r.name.starts_with(&prefix))
    }

    pub fn family_passed(&self, tag: &str) -> bool {
        self.family(tag).all(|r| r.passed)
    }

    pub fn max_residual(&self, tag: &str) -> S {
        self.family(tag)
            .map(|r| r.residual.clone())
            .fold(S::zero(), S::max_of)
    }
}

/// Verify the marginal relations that tie `q_u(i, j, k, t)` to `P_u(a, b, c)`.
///
/// * `a`: `¼[q(i,j,k,+1) + q(i,j,k,−1)] = P(1̄_i, 1̄_j, 1̄_k)`
/// * `b`: for each party X with cyclic successor Y and predecessor Z,
///   `¼ q_X(i, t=−1) = P(X=1̄_i, Y=2̄, Z=0̄)` and `¼ q_X(i, t=+1) = P(X=1̄_i, Y=0̄, Z=2̄)`
/// * `c`: `q(t=+1) = q(t=−1) = ½`
pub fn check_consistency<S: Scalar>(q: &BinaryDist4<S>, p: &FourOutcomeDist<S>) -> ConsistencyReport<S> {
    use FourOutcome::{Two, Zero as Z0};
    let quarter = S::ratio(1, 4);
    let mut relations = Vec::new();
    let mut push = |name: String, lhs: S, rhs: S| {
        let residual = (lhs.clone() - rhs.clone()).abs();
        let passed = residual.is_negligible();
        relations.push(RelationCheck {
            name,
            lhs,
            rhs,
            residual,
            passed,
        });
    };

    for i in Sign::BOTH {
        for j in Sign::BOTH {
            for k in Sign::BOTH {
                let lhs = quarter.clone()
                    * (q.get(i, j, k, Sign::Plus).clone() + q.get(i, j, k, Sign::Minus).clone());
                let rhs = p
                    .get(FourOutcome::one(i), FourOutcome::one(j), FourOutcome::one(k))
                    .clone();
                push(
                    format!("a:({},{},{})", i.symbol(), j.symbol(), k.symbol()),
                    lhs,
                    rhs,
                );
            }
        }
    }

    let place = |party: usize, x: FourOutcome, next: FourOutcome, prev: FourOutcome| {
        let mut slots = [Z0; 3];
        slots[party] = x;
        slots[(party + 1) % 3] = next;
        slots[(party + 2) % 3] = prev;
        slots
    };
    for party in 0..3 {
        let name = ["A", "B", "C"][party];
        for i in Sign::BOTH {
            for (t, next, prev) in [(Sign::Minus, Two, Z0), (Sign::Plus, Z0, Two)] {
                let lhs = quarter.clone() * q.single_party(party, i, t);
                let [a, b, c] = place(party, FourOutcome::one(i), next, prev);
                push(
                    format!("b:{name}:{}:t={}", i.symbol(), t.symbol()),
                    lhs,
                    p.get(a, b, c).clone(),
                );
            }
        }
    }

    let half = S::ratio(1, 2);
    for t in Sign::BOTH {
        push(format!("c:t={}", t.symbol()), q.t_weight(t), half.clone());
    }
    ConsistencyReport { relations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn u5573() -> UParam<Rational> {
        UParam::from_triple(55, 48, 73).unwrap()
    }

    #[test]
    fn uparam_domain() {
        assert!(UParam::new(0.70).is_err());
        assert!(UParam::new(std::f64::consts::FRAC_1_SQRT_2).is_err());
        assert!(UParam::new(1.0).is_ok());
        assert!(UParam::new(1.0001).is_err());
        let u = UParam::new(0.8).unwrap();
        assert!((u.u_squared() + u.v_squared() - 1.0).abs() < 1e-12);
        let b = UParam::boundary();
        assert_eq!(*b.u_squared(), 0.5);
    }

    #[test]
    fn exact_uparam_requires_triple() {
        let u = UParam::exact(&r(55, 73)).unwrap();
        assert_eq!(u.triple(), Some(PythagoreanTriple { p: 55, q: 48, r: 73 }));
        assert_eq!(*u.v(), r(48, 73));
        assert_eq!(u.u_squared() + u.v_squared(), Rational::one());
        assert!(matches!(
            UParam::exact(&r(809, 1000)),
            Err(FamilyError::NotPythagorean(_))
        ));
        assert!(UParam::<Rational>::from_triple(3, 4, 5).is_err(), "3/5 < 1/√2");
        assert!(UParam::<Rational>::from_triple(4, 3, 5).is_ok());
        assert!(UParam::<Rational>::from_triple(4, 4, 5).is_err());
    }

    #[test]
    fn p_at_boundary() {
        use FourOutcome::*;
        let p = eval_P(&UParam::boundary());
        assert!((p.get(Zero, OneMinus, Two) - 1.0 / 16.0).abs() < 1e-15);
        assert!(p.get(OneMinus, OneMinus, OneMinus).abs() < 1e-15);
        assert!((p.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn p_exact_at_55_73() {
        use FourOutcome::*;
        let p = eval_P(&u5573());
        assert_eq!(*p.get(Zero, OneMinus, Two), r(3025, 42632));
        assert_eq!(p.total(), Rational::one());
        assert!(p.entries().iter().all(|x| x.is_nonnegative()));
    }

    #[test]
    fn p_support_pattern() {
        use FourOutcome::*;
        let p = eval_P(&u5573());
        // no party sees 0̄ twice, and (0̄, 0̄, ·) style entries vanish
        assert!(p.get(Zero, Zero, Two).is_zero());
        assert!(p.get(Two, Two, Zero).is_zero());
        assert!(p.get(Zero, OnePlus, OnePlus).is_zero());
        assert!(p.get(OnePlus, Two, Two).is_zero());
        let nonzero = p.entries().iter().filter(|x| !x.is_zero()).count();
        // 4 patterns × 3 rotations + 2 diagonal + 2 × 3 mixed
        assert_eq!(nonzero, 20);
    }

    #[test]
    fn q_at_boundary_and_zero_correlators() {
        let q = eval_q(&UParam::boundary(), &CorrelatorPoint::zero());
        assert!((q.get(Sign::Plus, Sign::Plus, Sign::Plus, Sign::Plus) - 0.125).abs() < 1e-15);
        assert!(q.get(Sign::Plus, Sign::Plus, Sign::Minus, Sign::Plus).abs() < 1e-15);
        assert!((q.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_exact_entry_matches_term_expansion() {
        let u = u5573();
        let one = Rational::one();
        let f = CorrelatorPoint::new(one.clone(), one.clone(), one.clone(), one.clone());
        let q = eval_q(&u, &f);
        // independent expansion for (i, j, k, t) = (−1, −1, −1, +1):
        // 1 + 3d² − 3d − 8w + (1 + 1 + 1) − 1, all over 16
        let d = r(3025 - 2304, 5329);
        let w = r(55i64.pow(3) * 48i64.pow(3), 73i64.pow(6));
        let expected = (one.clone() + r(3, 1) * &d * &d - r(3, 1) * &d - r(8, 1) * &w + r(2, 1))
            / r(16, 1);
        assert_eq!(*q.get(Sign::Minus, Sign::Minus, Sign::Minus, Sign::Plus), expected);
        assert_eq!(q.total(), one);
    }

    #[test]
    fn fixed_correlator_values() {
        let b = fixed_correlators(&UParam::boundary());
        assert!(b.f_single.abs() < 1e-15 && b.e_pair.abs() < 1e-15);
        assert!((b.e_abc - 1.0).abs() < 1e-15);
        let one = fixed_correlators(&UParam::new(1.0).unwrap());
        assert_eq!((one.f_single, one.e_pair, one.e_abc), (1.0, 1.0, 0.0));
        let e = fixed_correlators(&u5573());
        assert_eq!(e.e_abc, r(8, 1) * r((55 * 48_i64).pow(3), 73i64.pow(6)));
        // E_ABC = Σ ijk q at F = 0
        let q = eval_q(&u5573(), &CorrelatorPoint::zero());
        let mut acc = Rational::zero();
        for idx in 0..16 {
            let s = |b: usize| Sign::from_bit(idx >> b).value();
            acc += Rational::from_i64(s(3) * s(2) * s(1)) * q.entries()[idx].clone();
        }
        assert_eq!(acc, e.e_abc);
    }

    #[test]
    fn conditional_at_boundary_is_parity() {
        let q = eval_q(&UParam::boundary(), &CorrelatorPoint::zero());
        let qm = condition_q(&q, Sign::Minus).unwrap();
        for x in 0..8 {
            let ijk = (0..3).map(|b| Sign::from_bit(x >> b).value()).product::<i64>();
            assert!((qm.entries()[x] - (1.0 + ijk as f64) / 8.0).abs() < 1e-15);
        }
        assert_eq!(qm.t_label(), Some(Sign::Minus));
    }

    #[test]
    fn conditional_rejects_outside_polytope() {
        let u = UParam::new(0.8090).unwrap();
        let f = CorrelatorPoint::new(1.0, 1.0, 1.0, -1.0);
        let q = eval_q(&u, &f);
        let t_neg = condition_q(&q, Sign::Minus);
        let t_pos = condition_q(&q, Sign::Plus);
        assert!(
            matches!(t_neg, Err(FamilyError::NegativeConditional { .. }))
                || matches!(t_pos, Err(FamilyError::NegativeConditional { .. }))
        );
        let negatives = q.entries().iter().filter(|x| **x < -1e-12).count();
        assert!(negatives >= 1);
    }

    #[test]
    fn conditional_affine_matches_evaluation() {
        let u = UParam::new(0.79).unwrap();
        let f = CorrelatorPoint::new(0.1, -0.2, 0.05, 0.3);
        for t in Sign::BOTH {
            let (base, slope) = conditional_affine(&u, t);
            let q = conditional_unchecked(&eval_q(&u, &f), t);
            let coords = f.to_halfspace_coords();
            for x in 0..8 {
                let lin: f64 = (0..4).map(|c| slope[x][c] * coords[c]).sum();
                assert!((base[x] + lin - q.entries()[x]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn consistency_exact_at_boundary() {
        let u = UParam::boundary();
        let rep = check_consistency(&eval_q(&u, &CorrelatorPoint::zero()), &eval_P(&u));
        assert!(rep.all_passed(), "{rep:#?}");
    }

    #[test]
    fn consistency_exact_for_pythagorean_u() {
        let u = u5573();
        let f = CorrelatorPoint::new(r(1, 10), r(-1, 7), r(0, 1), r(1, 3));
        let rep = check_consistency(&eval_q(&u, &f), &eval_P(&u));
        assert!(rep.all_passed());
        assert!(rep.relations.iter().all(|r| r.residual.is_zero()));
    }

    #[test]
    fn consistency_marginals_independent_of_correlators() {
        let u = UParam::new(0.8).unwrap();
        let p = eval_P(&u);
        for f in [
            CorrelatorPoint::symmetric(0.2016, 1.0 - 8.0 * (0.48f64).powi(3)),
            CorrelatorPoint::new(0.1, 0.1, 0.1, 0.1),
        ] {
            let rep = check_consistency(&eval_q(&u, &f), &p);
            assert!(rep.family_passed("b"));
            assert!(rep.max_residual("b") < 1e-12);
        }
    }

    #[test]
    fn corrupted_q_fails_relation_a() {
        let u = UParam::boundary();
        let mut entries = *eval_q(&u, &CorrelatorPoint::zero()).entries();
        entries[0] += 1e-3;
        let rep = check_consistency(&BinaryDist4::from_entries(entries), &eval_P(&u));
        assert!(!rep.family_passed("a"));
        // ¼ of the perturbation lands in relation (a)
        assert!((rep.max_residual("a") - 2.5e-4).abs() < 1e-12);
    }
}
