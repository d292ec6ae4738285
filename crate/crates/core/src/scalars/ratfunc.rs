//! Normalised quotients of polynomials.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{Coeff, Field, Poly, Rat, ScalarError};

/// `num/den` with `gcd(num, den) = 1` and `den` monic in grlex order, so equal
/// functions have identical representations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

/// Monic polynomials known to be irreducible over Q. Denominators that factor
/// completely over this list are reduced by trial division instead of a gcd.
fn registry() -> &'static RwLock<Vec<Poly>> {
    static R: OnceLock<RwLock<Vec<Poly>>> = OnceLock::new();
    R.get_or_init(|| RwLock::new(Vec::new()))
}

type Factored = Option<Vec<(Poly, u32)>>;

fn factor_cache() -> &'static RwLock<HashMap<Poly, Factored>> {
    static C: OnceLock<RwLock<HashMap<Poly, Factored>>> = OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Declare `p` irreducible over Q. The caller vouches for irreducibility; a
/// reducible entry would leave some fractions unreduced.
pub fn register_irreducible(p: &Poly) {
    if p.is_constant() {
        return;
    }
    let p = p.monic();
    let mut r = registry().write().expect("registry lock");
    if !r.contains(&p) {
        r.push(p);
        factor_cache().write().expect("cache lock").clear();
    }
}

/// `den = lc · Π f_i^k_i` over registered factors, or `None`.
fn factor_den(den: &Poly) -> Factored {
    if let Some(f) = factor_cache().read().expect("cache lock").get(den) {
        return f.clone();
    }
    let reg = registry().read().expect("registry lock").clone();
    let mut rest = den.clone();
    let mut out = Vec::new();
    for f in &reg {
        let mut k = 0;
        while rest.total_degree() >= f.total_degree() {
            match rest.div_exact(f) {
                Some(q) => {
                    rest = q;
                    k += 1;
                }
                None => break,
            }
        }
        if k > 0 {
            out.push((f.clone(), k));
        }
    }
    let res = rest.is_constant().then_some(out);
    factor_cache().write().expect("cache lock").insert(den.clone(), res.clone());
    res
}

/// Monic `gcd(p, den)`.
fn gcd_den(p: &Poly, den: &Poly) -> Poly {
    match factor_den(den) {
        Some(fs) => {
            let mut g = Poly::one();
            let mut rest = p.clone();
            for (f, k) in fs {
                for _ in 0..k {
                    match rest.div_exact(&f) {
                        Some(q) => {
                            rest = q;
                            g = &g * &f;
                        }
                        None => break,
                    }
                }
            }
            g
        }
        None => p.gcd(den),
    }
}

impl RatFunc {
    pub fn normalize(num: Poly, den: Poly) -> Result<RatFunc, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        if let Some(c) = den.constant_value() {
            return Ok(RatFunc { num: num.scale(&c.recip()), den: Poly::one() });
        }
        let g = gcd_den(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        Ok(RatFunc::monic_den(num, den))
    }

    fn monic_den(num: Poly, den: Poly) -> RatFunc {
        let lc = den.leading_coefficient();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let s = lc.recip();
            RatFunc { num: num.scale(&s), den: den.scale(&s) }
        }
    }

    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn from_rat(r: Rat) -> Self {
        RatFunc::from_poly(Poly::constant(r))
    }

    pub fn var(i: usize) -> Self {
        RatFunc::from_poly(Poly::var(i))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let n = &self.num + &o.num;
            if self.den.is_one() {
                return RatFunc::from_poly(n);
            }
            return RatFunc::normalize(n, self.den.clone()).expect("nonzero den");
        }
        if self.den.is_one() {
            return RatFunc { num: &(&self.num * &o.den) + &o.num, den: o.den.clone() };
        }
        if o.den.is_one() {
            return RatFunc { num: &self.num + &(&o.num * &self.den), den: self.den.clone() };
        }
        // Henrici: only the common part of the denominators can cancel.
        let g = gcd_den(&self.den, &o.den);
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = o.den.div_exact(&g).expect("gcd divides");
        let t = &(&self.num * &d2) + &(&o.num * &d1);
        if t.is_zero() {
            return RatFunc::zero();
        }
        let g2 = if g.is_one() { g } else { gcd_den(&t, &g) };
        let (t, d2) = if g2.is_one() {
            (t, o.den.clone())
        } else {
            (t.div_exact(&g2).expect("gcd divides"), o.den.div_exact(&g2).expect("gcd divides"))
        };
        RatFunc::monic_den(t, &d1 * &d2)
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(&self.num * &o.num);
        }
        if let Some(c) = self.num.constant_value().filter(|_| self.den.is_one()) {
            return RatFunc { num: o.num.scale(&c), den: o.den.clone() };
        }
        if let Some(c) = o.num.constant_value().filter(|_| o.den.is_one()) {
            return RatFunc { num: self.num.scale(&c), den: self.den.clone() };
        }
        let g1 = gcd_den(&self.num, &o.den);
        let g2 = gcd_den(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = o.den.div_exact(&g1).expect("gcd divides");
        let n2 = o.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        RatFunc::monic_den(&n1 * &n2, &d1 * &d2)
    }

    pub fn inv(&self) -> Result<RatFunc, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(RatFunc::monic_den(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc, ScalarError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        if Zero::is_zero(c) {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, k: u32) -> RatFunc {
        RatFunc { num: self.num.pow(k), den: self.den.pow(k) }
    }

    /// Exact partial derivative (quotient rule, then reduced).
    pub fn derivative(&self, var: usize) -> RatFunc {
        let dn = self.num.derivative(var);
        if self.den.is_one() {
            return RatFunc::from_poly(dn);
        }
        let dd = self.den.derivative(var);
        if dd.is_zero() {
            return RatFunc::normalize(dn, self.den.clone()).expect("nonzero den");
        }
        // (n/d)' = (n' d - n d') / d^2; common factors can only come from d.
        let top = &(&dn * &self.den) - &(&self.num * &dd);
        RatFunc::normalize(top, &self.den * &self.den).expect("nonzero den")
    }

    pub fn eval(&self, point: &[Rat]) -> Result<Rat, ScalarError> {
        let d = self.den.eval(point);
        if Zero::is_zero(&d) {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self.num.eval(point) / d)
    }

    /// Numerator and denominator scaled to coprime integer coefficients, the
    /// denominator's leading coefficient positive.
    pub fn integer_form(&self) -> (Poly, Poly) {
        let l = self.num.denominator_lcm().lcm(&self.den.denominator_lcm());
        let lr = Rat::from_integer(l);
        let n = self.num.scale(&lr);
        let d = self.den.scale(&lr);
        let g = n
            .terms()
            .chain(d.terms())
            .fold(BigInt::zero(), |g, (_, c)| g.gcd(c.numer()));
        if g.is_zero() || g.is_one() {
            return (n, d);
        }
        let gr = Rat::from_integer(g).recip();
        (n.scale(&gr), d.scale(&gr))
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let (n, d) = self.integer_form();
        if d.is_one() {
            return n.display_with(names);
        }
        let wrap = |p: &Poly| {
            let s = p.display_with(names);
            if p.num_terms() > 1 || s.starts_with('-') {
                format!("({s})")
            } else {
                s
            }
        };
        if let Some(c) = d.constant_value() {
            return format!("{}/{}", wrap(&n), c);
        }
        format!("{}/{}", wrap(&n), wrap(&d))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl Coeff for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn from_rat(r: &Rat) -> Self {
        RatFunc::from_rat(r.clone())
    }
    fn render(&self, names: &[String]) -> String {
        self.display_with(names)
    }
    fn scale(&self, r: &Rat) -> Self {
        RatFunc::scale(self, r)
    }
}

impl Field for RatFunc {
    fn inv(&self) -> Option<Self> {
        RatFunc::inv(self).ok()
    }
}
