//! The tagged ground scalar: a rational constant or a rational function.

use std::fmt;

use super::{parse_rat, Coeff, Field, Rat, RatFunc, ScalarError};

/// Constants are always stored as `Rat`, so derived equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    Rat(Rat),
    Func(RatFunc),
}

impl Scalar {
    fn canon(f: RatFunc) -> Scalar {
        match f.constant_value() {
            Some(c) => Scalar::Rat(c),
            None => Scalar::Func(f),
        }
    }

    pub fn from_func(f: RatFunc) -> Scalar {
        Scalar::canon(f)
    }

    pub fn to_func(&self) -> RatFunc {
        match self {
            Scalar::Rat(r) => RatFunc::from_rat(r.clone()),
            Scalar::Func(f) => f.clone(),
        }
    }

    fn lift2(&self, o: &Scalar, fr: impl Fn(&Rat, &Rat) -> Rat, ff: impl Fn(&RatFunc, &RatFunc) -> RatFunc) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(fr(a, b)),
            _ => Scalar::canon(ff(&self.to_func(), &o.to_func())),
        }
    }

    pub fn differentiate(&self, var: usize) -> Scalar {
        match self {
            Scalar::Rat(_) => Scalar::Rat(<Rat as Coeff>::zero()),
            Scalar::Func(f) => Scalar::canon(f.derivative(var)),
        }
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        let inv = o.inv().ok_or(ScalarError::DivisionByZero)?;
        Ok(self.times(&inv))
    }

    pub fn display_with(&self, names: &[String]) -> String {
        match self {
            Scalar::Rat(r) => r.to_string(),
            Scalar::Func(f) => f.display_with(names),
        }
    }

    /// Parses rational constants only; rational-function strings are output-only.
    pub fn parse(s: &str) -> Result<Scalar, ScalarError> {
        parse_rat(s).map(Scalar::Rat)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl From<Rat> for Scalar {
    fn from(r: Rat) -> Self {
        Scalar::Rat(r)
    }
}

impl From<RatFunc> for Scalar {
    fn from(f: RatFunc) -> Self {
        Scalar::canon(f)
    }
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Scalar::Rat(<Rat as Coeff>::zero())
    }
    fn one() -> Self {
        Scalar::Rat(<Rat as Coeff>::one())
    }
    fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => Coeff::is_zero(r),
            Scalar::Func(f) => f.is_zero(),
        }
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.lift2(rhs, |a, b| a + b, RatFunc::add)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.lift2(rhs, |a, b| a - b, RatFunc::sub)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.lift2(rhs, |a, b| a * b, RatFunc::mul)
    }
    fn negate(&self) -> Self {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Func(f) => Scalar::Func(f.neg()),
        }
    }
    fn from_rat(r: &Rat) -> Self {
        Scalar::Rat(r.clone())
    }
    fn render(&self, names: &[String]) -> String {
        self.display_with(names)
    }
}

impl Field for Scalar {
    fn inv(&self) -> Option<Self> {
        match self {
            Scalar::Rat(r) => r.inv().map(Scalar::Rat),
            Scalar::Func(f) => RatFunc::inv(f).ok().map(Scalar::canon),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{int, Poly};

    #[test]
    fn constants_collapse_to_rat() {
        let x = Scalar::from(RatFunc::var(0));
        let d = x.minus(&x);
        assert_eq!(d, Scalar::Rat(int(0)));
        assert_eq!(x.differentiate(0), Scalar::Rat(int(1)));
    }

    #[test]
    fn cw_coefficient_is_free_of_xm() {
        // coordinates (xm, x1, xp); g_pp = x1^2
        let x1 = Poly::var(1);
        let s = Scalar::from(RatFunc::from_poly(&x1 * &x1));
        assert!(s.differentiate(0).is_zero());
    }

    #[test]
    fn parse_and_divide() {
        let a = Scalar::parse("-3/6").unwrap();
        assert_eq!(a.to_string(), "-1/2");
        assert!(a.div(&Scalar::zero()).is_err());
    }
}
