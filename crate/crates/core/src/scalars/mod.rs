//! Exact ground ring: rationals, polynomials, rational functions.

mod poly;
mod ratfunc;
mod scalar;

pub use poly::{Monomial, Poly};
pub use ratfunc::{register_irreducible, RatFunc};
pub use scalar::Scalar;

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub type Rat = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero polynomial")]
    DivisionByZero,
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse `"a"`, `"-a/b"` (whitespace tolerated).
pub fn parse_rat(s: &str) -> Result<Rat, ScalarError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || ScalarError::Parse(s.to_string());
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n, d),
        None => (t.as_str(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rat::new(n, d))
}

/// Coefficient ring for tensors and matrices. Methods are named to stay clear
/// of the `std::ops` traits that several implementors also carry.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negate(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;
    /// Text form with integer coefficients, using the given coordinate names.
    fn render(&self, names: &[String]) -> String;

    fn scale(&self, r: &Rat) -> Self {
        self.times(&Self::from_rat(r))
    }
}

/// Coefficients that can be inverted (every nonzero element).
pub trait Field: Coeff {
    fn inv(&self) -> Option<Self>;
}

impl Coeff for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negate(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn render(&self, _names: &[String]) -> String {
        self.to_string()
    }
}

impl Field for Rat {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}
