//! Parsing of `u`, `F` and `t` arguments in either arithmetic mode.

use anyhow::{anyhow, bail, Result};
use inflacert::polytope::qplus_vertex;
use inflacert::scalar::{parse_decimal_exact, parse_rational};
use inflacert::{CorrelatorPoint, Rational, Scalar, Sign, UParam};

/// Float `u` this close to `1/√2` is taken to be the degenerate endpoint.
pub const BOUNDARY_SNAP: f64 = 1e-6;

pub trait CliScalar: Scalar {
    /// `p/q`, an integer, or a decimal literal.
    fn parse_value(text: &str) -> Option<Self>;

    fn uparam(text: &str) -> Result<UParam<Self>>;
}

impl CliScalar for f64 {
    fn parse_value(text: &str) -> Option<f64> {
        let text = text.trim();
        if text.contains('/') {
            parse_rational(text).map(|r| r.to_f64())
        } else {
            text.parse().ok()
        }
    }

    fn uparam(text: &str) -> Result<UParam<f64>> {
        let u = Self::parse_value(text).ok_or_else(|| anyhow!("cannot parse u = `{text}`"))?;
        if (u - std::f64::consts::FRAC_1_SQRT_2).abs() <= BOUNDARY_SNAP {
            return Ok(UParam::boundary());
        }
        Ok(UParam::new(u)?)
    }
}

impl CliScalar for Rational {
    fn parse_value(text: &str) -> Option<Rational> {
        parse_rational(text).or_else(|| parse_decimal_exact(text))
    }

    fn uparam(text: &str) -> Result<UParam<Rational>> {
        let u = Self::parse_value(text).ok_or_else(|| anyhow!("cannot parse u = `{text}` as a rational"))?;
        Ok(UParam::exact(&u)?)
    }
}

/// `qplus-vertex`, or four comma-separated values `F_AB,F_BC,F_AC,F_ABC`.
pub fn parse_point<S: CliScalar>(text: &str, u: &UParam<S>) -> Result<CorrelatorPoint<S>> {
    if text.trim() == "qplus-vertex" {
        return Ok(qplus_vertex(u)?);
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("F needs four comma-separated values or `qplus-vertex`, got `{text}`");
    }
    let v = parts
        .iter()
        .map(|p| S::parse_value(p).ok_or_else(|| anyhow!("cannot parse F component `{p}`")))
        .collect::<Result<Vec<S>>>()?;
    let [ab, bc, ac, abc]: [S; 4] = v.try_into().map_err(|_| anyhow!("F needs four values"))?;
    Ok(CorrelatorPoint::new(ab, bc, ac, abc))
}

pub fn parse_sign(text: &str) -> Result<Sign> {
    text.trim().parse::<Sign>().map_err(|e| anyhow!("bad t `{text}`: {e}"))
}
