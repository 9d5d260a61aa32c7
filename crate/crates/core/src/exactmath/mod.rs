//! Exact arithmetic: rationals, sparse multivariate polynomials and
//! nullspace computation over the rationals.

mod matrix;
pub mod parse;
mod poly;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

pub use matrix::{integer_content, normalize_first_nonzero, random_prime_62, RatMatrix};
pub use parse::ParseError;
pub use poly::{var_list, Monomial, Poly, PolyJson};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactMathError {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("prime {prime} divides an entry denominator; retry with another prime")]
    DenominatorDivisible { prime: u64 },
    #[error("invalid rational literal '{0}'")]
    BadRational(String),
}

/// `"num/den"`, with the denominator omitted when it is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ExactMathError> {
    let bad = || ExactMathError::BadRational(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings() {
        let x = parse_rational("10/-4").unwrap();
        assert_eq!(format_rational(&x), "-5/2");
        assert_eq!(format_rational(&parse_rational("6/3").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
