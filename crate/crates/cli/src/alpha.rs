//! Threshold expressions in the density δ of the instance set.
//!
//! An expression is a product of factors joined by `*` or `/`, each factor a
//! rational literal, `delta` or `delta^p`. The keyword `prop` stands for
//! `δ^{3/2}/(2√2)`, carried exactly through its square `δ³/8`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use speclab::setspec::parse_rational;
use speclab::{Alpha, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Form {
    /// `coefficient · δ^power`
    Monomial { coefficient: BigRational, power: i32 },
    Proposition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaExpr {
    text: String,
    form: Form,
}

impl AlphaExpr {
    pub fn text(&self) -> &str {
        &self.text
    }

    /// Exact α for a set of density `delta`.
    pub fn eval(&self, delta: &BigRational) -> Result<Alpha> {
        if !delta.is_positive() {
            return Err(Error::Input(format!("alpha {:?} needs a nonempty set", self.text)));
        }
        match &self.form {
            Form::Monomial { coefficient, power } => Alpha::rational(coefficient * delta.pow(*power)),
            Form::Proposition => Alpha::from_squared(delta.pow(3) / BigRational::from_integer(BigInt::from(8))),
        }
    }
}

impl FromStr for AlphaExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim().to_string();
        if text == "prop" {
            return Ok(AlphaExpr { text, form: Form::Proposition });
        }
        let mut coefficient = BigRational::one();
        let mut power = 0i32;
        let mut divide = false;
        let mut rest = text.as_str();
        loop {
            let end = rest.find(['*', '/']).unwrap_or(rest.len());
            let factor = rest[..end].trim();
            // a literal p/q is one factor, so absorb "/q" when both sides are numeric
            let (factor, end) = match (rest[end..].strip_prefix('/'), factor.parse::<BigInt>()) {
                (Some(after), Ok(_)) => {
                    let next = after.find(['*', '/']).unwrap_or(after.len());
                    if after[..next].trim().parse::<BigInt>().is_ok() {
                        (rest[..end + 1 + next].trim(), end + 1 + next)
                    } else {
                        (factor, end)
                    }
                }
                _ => (factor, end),
            };
            let (value, exp) = if let Some(p) = factor.strip_prefix("delta") {
                let exp = match p.trim().strip_prefix('^') {
                    Some(e) => e.trim().parse::<i32>().map_err(|_| Error::Input(format!("bad exponent in {s:?}")))?,
                    None if p.trim().is_empty() => 1,
                    None => return Err(Error::Input(format!("bad factor {factor:?} in {s:?}"))),
                };
                (BigRational::one(), exp)
            } else {
                (parse_rational(factor)?, 0)
            };
            if divide {
                if value == BigRational::from_integer(0.into()) {
                    return Err(Error::Input(format!("division by zero in {s:?}")));
                }
                coefficient /= value;
                power -= exp;
            } else {
                coefficient *= value;
                power += exp;
            }
            if end == rest.len() {
                break;
            }
            divide = rest[end..].starts_with('/');
            rest = &rest[end + 1..];
        }
        if !coefficient.is_positive() {
            return Err(Error::Input(format!("alpha {s:?} must be positive")));
        }
        Ok(AlphaExpr { text, form: Form::Monomial { coefficient, power } })
    }
}

impl fmt::Display for AlphaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
