use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Nonlinearity `f` of `Λ^α u = f(u) + cu + a`, with `f'` and the
/// antiderivative `F` (normalized by `F(0) = 0`).
#[derive(Clone, Debug, PartialEq)]
pub enum Nonlinearity {
    /// f(u) = u²
    Quadratic,
    /// f(u) = u^p for an integer p ≥ 2
    Power(u32),
    /// f(u) = Σ_k p_k u^k from a coefficient table
    Polynomial(Vec<f64>),
}

impl Nonlinearity {
    pub fn power(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::Parse(format!("power nonlinearity needs p >= 2, got {p}")));
        }
        Ok(if p == 2 { Self::Quadratic } else { Self::Power(p) })
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parse("polynomial needs finite coefficients".into()));
        }
        Ok(Self::Polynomial(coefficients))
    }

    /// True when `f(u) = u²` exactly, in whatever form it was given.
    pub fn is_quadratic(&self) -> bool {
        match self {
            Self::Quadratic => true,
            Self::Power(p) => *p == 2,
            Self::Polynomial(c) => {
                let mut trimmed = c.as_slice();
                while let [rest @ .., 0.0] = trimmed {
                    trimmed = rest;
                }
                trimmed == [0.0, 0.0, 1.0]
            }
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match self {
            Self::Quadratic => u * u,
            Self::Power(p) => u.powi(*p as i32),
            Self::Polynomial(c) => horner(c, u),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Self::Quadratic => 2.0 * u,
            Self::Power(p) => *p as f64 * u.powi(*p as i32 - 1),
            Self::Polynomial(c) => {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect();
                horner(&d, u)
            }
        }
    }

    pub fn antiderivative(&self, u: f64) -> f64 {
        match self {
            Self::Quadratic => u * u * u / 3.0,
            Self::Power(p) => u.powi(*p as i32 + 1) / (*p as f64 + 1.0),
            Self::Polynomial(c) => {
                let mut integral = vec![0.0];
                integral.extend(c.iter().enumerate().map(|(k, ck)| ck / (k as f64 + 1.0)));
                horner(&integral, u)
            }
        }
    }
}

fn horner(coefficients: &[f64], u: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic => write!(f, "quadratic"),
            Self::Power(p) => write!(f, "power:{p}"),
            Self::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

/// Accepts `quadratic`, `power:<p>` and `poly:<p0>,<p1>,...`.
impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("quadratic") {
            return Ok(Self::Quadratic);
        }
        if let Some(p) = s.strip_prefix("power:") {
            let p: u32 = p.trim().parse().map_err(|e| Error::Parse(format!("power `{p}`: {e}")))?;
            return Self::power(p);
        }
        if let Some(list) = s.strip_prefix("poly:") {
            let coefficients = list
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("coefficient `{t}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            return Self::polynomial(coefficients);
        }
        Err(Error::Parse(format!("unknown nonlinearity `{s}` (expected quadratic, power:<p> or poly:<p0>,<p1>,...)")))
    }
}
