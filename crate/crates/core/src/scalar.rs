//! Numeric back ends shared by every module.
//!
//! Two arithmetic modes are supported. Exact mode uses arbitrary-precision
//! rationals and compares with zero exactly. Float mode uses `f64` and every
//! equality or sign test goes through [`FLOAT_TOL`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{NumAssignRef, NumRef, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational in lowest terms.
pub type Rational = BigRational;

/// Tolerance used by all float-mode equality comparisons.
pub const FLOAT_TOL: f64 = 1e-12;

/// Float-mode margins at or below this value are never accepted as positive.
pub const MARGIN_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown arithmetic mode `{other}`")),
        }
    }
}

/// Commutative ring operations plus an exact-or-tolerant sign.
///
/// This is the minimum needed to push probabilities through sums of
/// products, which lets local-model evaluation run over quadratic surds.
pub trait Ring:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Sign of the value; float implementations treat `|x| <= FLOAT_TOL` as zero.
    fn sign(&self) -> Ordering;

    fn approx(&self) -> f64;

    fn from_int(n: i64) -> Self {
        let mut acc = Self::zero();
        let one = Self::one();
        let step = if n >= 0 { one } else { -one };
        for _ in 0..n.unsigned_abs() {
            acc = acc + step.clone();
        }
        acc
    }
}

/// An ordered field: the scalar type of every exact-or-float computation.
pub trait Scalar:
    Ring + NumRef + NumAssignRef + Signed + PartialOrd + fmt::Display + 'static
{
    const MODE: Mode;

    fn from_i64(n: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Square root when it is representable in this field.
    fn sqrt_opt(&self) -> Option<Self>;

    /// Sign test against an explicit float tolerance (ignored in exact mode).
    fn sign_within(&self, tol: f64) -> Ordering;

    fn is_negligible(&self) -> bool {
        self.sign() == Ordering::Equal
    }

    fn is_positive_strict(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    /// `self >= 0` up to the mode tolerance.
    fn is_nonnegative(&self) -> bool {
        self.sign() != Ordering::Less
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    /// Positive as a certificate margin: `> 0` exactly, `> MARGIN_THRESHOLD` in float mode.
    fn is_certified_positive(&self) -> bool {
        match Self::MODE {
            Mode::Exact => self.sign() == Ordering::Greater,
            Mode::Float => self.to_f64() > MARGIN_THRESHOLD,
        }
    }

    /// Canonical text: shortest round-trip decimal for floats, `num/den` for rationals.
    fn render(&self) -> String;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Ring for f64 {
    fn sign(&self) -> Ordering {
        self.sign_within_tol(FLOAT_TOL)
    }

    fn approx(&self) -> f64 {
        *self
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }
}

trait FloatSign {
    fn sign_within_tol(&self, tol: f64) -> Ordering;
}

impl FloatSign for f64 {
    fn sign_within_tol(&self, tol: f64) -> Ordering {
        if self.abs() <= tol {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_opt(&self) -> Option<Self> {
        if *self < -FLOAT_TOL {
            None
        } else {
            Some(self.max(0.0).sqrt())
        }
    }

    fn sign_within(&self, tol: f64) -> Ordering {
        self.sign_within_tol(tol)
    }

    fn render(&self) -> String {
        format!("{self:?}")
    }
}

impl Ring for Rational {
    fn sign(&self) -> Ordering {
        self.numer().sign().cmp(&num_bigint::Sign::NoSign)
    }

    fn approx(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_opt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }

    fn sign_within(&self, _tol: f64) -> Ordering {
        Ring::sign(self)
    }

    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Parse `num/den` or an integer into a lowest-terms rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => {
            let n: BigInt = text.parse().ok()?;
            Some(Rational::from_integer(n))
        }
    }
}

/// Exact value of a decimal literal such as `0.8090` or `-1.5e-3`.
pub fn parse_decimal_exact(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let all = all / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

/// `a + b·√d` over the rationals, with a fixed radicand shared by all operands.
///
/// A `None` radicand marks a plain rational (`b == 0`) that adopts the
/// radicand of whatever it is combined with.
#[derive(Debug, Clone)]
pub struct QuadraticSurd {
    pub a: Rational,
    pub b: Rational,
    pub d: Option<Rational>,
}

impl QuadraticSurd {
    pub fn rational(a: Rational) -> Self {
        QuadraticSurd {
            a,
            b: Rational::zero(),
            d: None,
        }
    }

    pub fn new(a: Rational, b: Rational, d: Rational) -> Self {
        QuadraticSurd { a, b, d: Some(d) }
    }

    /// The rational value, if the surd part vanishes.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.b.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }

    fn radicand(&self, other: &Self) -> Option<Rational> {
        match (&self.d, &other.d) {
            (Some(x), Some(y)) => {
                assert_eq!(x, y, "mixed radicands in quadratic surd arithmetic");
                Some(x.clone())
            }
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }
}

impl PartialEq for QuadraticSurd {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl Add for QuadraticSurd {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let d = self.radicand(&rhs);
        QuadraticSurd {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
            d,
        }
    }
}

impl Sub for QuadraticSurd {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let d = self.radicand(&rhs);
        QuadraticSurd {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
            d,
        }
    }
}

impl Mul for QuadraticSurd {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let d = self.radicand(&rhs);
        let cross = match &d {
            Some(d) => &self.b * &rhs.b * d,
            None => Rational::zero(),
        };
        QuadraticSurd {
            a: &self.a * &rhs.a + cross,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            d,
        }
    }
}

impl Neg for QuadraticSurd {
    type Output = Self;
    fn neg(self) -> Self {
        QuadraticSurd {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

impl Zero for QuadraticSurd {
    fn zero() -> Self {
        QuadraticSurd::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadraticSurd {
    fn one() -> Self {
        QuadraticSurd::rational(Rational::one())
    }
}

impl Ring for QuadraticSurd {
    fn sign(&self) -> Ordering {
        let d = match &self.d {
            Some(d) if !self.b.is_zero() => d,
            _ => return Ring::sign(&self.a),
        };
        // sign(a + b√d) from the signs of a, b and the comparison of a² with b²d.
        let sa = Ring::sign(&self.a);
        let sb = Ring::sign(&self.b);
        if sa == sb || sa == Ordering::Equal {
            return sb;
        }
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * d;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    fn approx(&self) -> f64 {
        let root = self
            .d
            .as_ref()
            .map(|d| Scalar::to_f64(d).sqrt())
            .unwrap_or(0.0);
        Scalar::to_f64(&self.a) + Scalar::to_f64(&self.b) * root
    }

    fn from_int(n: i64) -> Self {
        QuadraticSurd::rational(Rational::from_i64(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_only_for_squares() {
        let x = Rational::ratio(2304, 5329);
        assert_eq!(x.sqrt_opt(), Some(Rational::ratio(48, 73)));
        assert_eq!(Rational::ratio(2, 9).sqrt_opt(), None);
        assert_eq!(Rational::ratio(-1, 4).sqrt_opt(), None);
    }

    #[test]
    fn float_sign_uses_tolerance() {
        assert_eq!(Ring::sign(&1e-13), Ordering::Equal);
        assert_eq!(Ring::sign(&-2e-12), Ordering::Less);
        assert!(!5e-10_f64.is_certified_positive());
        assert!(2e-9_f64.is_certified_positive());
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal_exact("0.8090"), Some(Rational::ratio(809, 1000)));
        assert_eq!(parse_decimal_exact("-1.5e-3"), Some(Rational::ratio(-3, 2000)));
        assert_eq!(parse_decimal_exact("12"), Some(Rational::from_i64(12)));
        assert_eq!(parse_decimal_exact("1.2.3"), None);
        assert_eq!(parse_rational("110/146"), Some(Rational::ratio(55, 73)));
        assert_eq!(parse_rational("3/0"), None);
    }

    #[test]
    fn rendering_round_trips() {
        let r = Rational::ratio(-6, 4);
        assert_eq!(r.render(), "-3/2");
        assert_eq!(parse_rational(&r.render()), Some(r));
        let x = 0.1_f64 + 0.2;
        assert_eq!(x.render().parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn surd_arithmetic_and_sign() {
        let d = Rational::from_i64(7);
        let x = QuadraticSurd::new(Rational::one(), Rational::one(), d.clone());
        let y = QuadraticSurd::new(Rational::one(), -Rational::one(), d);
        // (1 + √7)(1 − √7) = −6
        let p = x.clone() * y;
        assert_eq!(p.as_rational(), Some(&Rational::from_i64(-6)));
        assert_eq!(Ring::sign(&p), Ordering::Less);
        let z = QuadraticSurd::new(Rational::from_i64(-3), Rational::one(), Rational::from_i64(7));
        assert_eq!(Ring::sign(&z), Ordering::Less);
        assert!((x.approx() - (1.0 + 7f64.sqrt())).abs() < 1e-15);
    }
}
