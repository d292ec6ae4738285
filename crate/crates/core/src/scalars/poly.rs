//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are identified by index; names live in the owning chart. Exponent
//! vectors are stored with trailing zeros trimmed, so a constant has the empty
//! exponent vector and polynomials over different variable counts mix freely.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rat;

/// Exponent vector ordered graded-lexicographically (variable 0 is the most
/// significant in the lexicographic tie-break).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exp(&self, var: usize) -> u32 {
        self.0.get(var).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let e = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial::new(e)
    }

    fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.0.len() > self.0.len() && other.0[self.0.len()..].iter().any(|&x| x > 0) {
            return None;
        }
        let mut e = Vec::with_capacity(self.0.len());
        for i in 0..self.0.len() {
            let (a, b) = (self.exp(i), other.exp(i));
            if b > a {
                return None;
            }
            e.push(a - b);
        }
        Some(Monomial::new(e))
    }

    fn with_exp(&self, var: usize, value: u32) -> Monomial {
        let mut e = self.0.clone();
        if e.len() <= var {
            e.resize(var + 1, 0);
        }
        e[var] = value;
        Monomial::new(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for i in 0..n {
                match self.exp(i).cmp(&other.exp(i)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `Q[x0, x1, ...]`. No zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(Rat::from_integer(BigInt::from(c)))
    }

    pub fn var(i: usize) -> Self {
        Poly::monomial(Rat::one(), Monomial::var(i))
    }

    pub fn monomial(c: Rat, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(it: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_value().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial.
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// Number of variable slots touched (one past the largest variable index used).
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.0.len()).max().unwrap_or(0)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> Rat {
        self.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(Rat::zero)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(var);
            if e == 0 {
                continue;
            }
            let nm = m.with_exp(var, e - 1);
            out.add_term(nm, c * Rat::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let x = point.get(i).cloned().unwrap_or_else(Rat::zero);
                    t *= num_traits::pow(x, e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Divide by the leading coefficient so the result is monic (zero stays zero).
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Scale to a primitive integer polynomial with positive leading coefficient.
    pub fn primitive_integer(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let (ints, _) = self.integer_coefficients();
        let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        let sign = if self.leading_coefficient().is_negative() { -1 } else { 1 };
        let denom = g * BigInt::from(sign);
        Poly {
            terms: self
                .terms
                .keys()
                .cloned()
                .zip(ints)
                .map(|(m, c)| (m, Rat::from_integer(c / &denom)))
                .collect(),
        }
    }

    /// Integer coefficients after multiplying through by the lcm of the
    /// denominators; returns the coefficients (in term order) and that lcm.
    pub fn integer_coefficients(&self) -> (Vec<BigInt>, BigInt) {
        let l = self.denominator_lcm();
        let ints = self
            .terms
            .values()
            .map(|c| (c * Rat::from_integer(l.clone())).to_integer())
            .collect();
        (ints, l)
    }

    pub fn denominator_lcm(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |l, c| l.lcm(c.denom()))
    }

    /// Coefficients of powers of `var`, each a polynomial free of `var`.
    pub fn coefficients_in(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exp(var) as usize;
            out[e].add_term(m.with_exp(var, 0), c.clone());
        }
        out
    }

    fn leading_coefficient_in(&self, var: usize) -> Poly {
        let d = self.degree_in(var);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m.exp(var) == d {
                out.add_term(m.with_exp(var, 0), c.clone());
            }
        }
        out
    }

    fn smallest_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .filter_map(|m| m.0.iter().position(|&e| e > 0))
            .min()
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(c) = divisor.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = divisor.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&lm)?;
            let qc = rc / &lc;
            for (m, c) in &divisor.terms {
                rem.add_term(m.mul(&qm), -(c * &qc));
            }
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        gcd_rec(self, other)
    }

    pub fn lcm(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(other);
        let q = self.div_exact(&g).expect("gcd divides its argument");
        (&q * other).monic()
    }

    /// Render with the given variable names; unnamed variables print as `x{i}`.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(a.to_string());
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

fn content_in(p: &Poly, var: usize) -> Poly {
    let mut g = Poly::zero();
    for c in p.coefficients_in(var).into_iter().filter(|c| !c.is_zero()) {
        if c.is_constant() {
            return Poly::one();
        }
        g = gcd_rec(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn primitive_in(p: &Poly, var: usize) -> Poly {
    let c = content_in(p, var);
    p.div_exact(&c).expect("content divides").primitive_integer()
}

fn pseudo_remainder(a: &Poly, b: &Poly, var: usize) -> Poly {
    let db = b.degree_in(var);
    let lb = b.leading_coefficient_in(var);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(var) >= db {
        let dr = r.degree_in(var);
        let lr = r.leading_coefficient_in(var);
        let shift = Poly::monomial(Rat::one(), Monomial::one().with_exp(var, dr - db));
        r = &(&r * &lb) - &(&(&lr * b) * &shift);
    }
    r
}

/// Recursive primitive-PRS gcd in `Q[x0, x1, ...]`, result monic.
fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let v = match (a.smallest_var(), b.smallest_var()) {
        (Some(x), Some(y)) => x.min(y),
        _ => return Poly::one(),
    };
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 {
        return gcd_rec(a, &content_in(b, v));
    }
    if db == 0 {
        return gcd_rec(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd_rec(&ca, &cb);
    let mut pa = a.div_exact(&ca).expect("content divides").primitive_integer();
    let mut pb = b.div_exact(&cb).expect("content divides").primitive_integer();
    if pa.degree_in(v) < pb.degree_in(v) {
        std::mem::swap(&mut pa, &mut pb);
    }
    let g = loop {
        let r = pseudo_remainder(&pa, &pb, v);
        if r.is_zero() {
            break pb;
        }
        if r.degree_in(v) == 0 {
            break Poly::one();
        }
        pa = pb;
        pb = primitive_in(&r, v);
    };
    let g = if g.is_constant() { g } else { primitive_in(&g, v) };
    (&c * &g).monic()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
