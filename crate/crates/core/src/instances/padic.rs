//! Fixed-precision p-adic numbers.
//!
//! An element is `p^v · u` with `u` a unit known modulo `p^k`, so the value
//! is known modulo `p^{v+k}`. Elements built from rationals keep the exact
//! rational alongside; the shadow survives arithmetic between exact
//! operands and makes cancellation decidable.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exactla::abelian::valuation;
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PAdicElement {
    pub p: u64,
    pub valuation: i64,
    /// Base-p digits of the unit part, least significant first, `precision` many.
    pub digits: Vec<u64>,
    pub precision: usize,
    pub exact_zero: bool,
    /// The exact rational value, when known.
    pub exact: Option<Rational>,
}

fn pow(p: u64, k: usize) -> BigInt {
    num_traits::pow(BigInt::from(p), k)
}

fn pow_rat(p: u64, e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(pow(p, e as usize))
    } else {
        Rational::new(BigInt::one(), pow(p, (-e) as usize))
    }
}

fn to_digits(mut u: BigInt, p: u64, k: usize) -> Vec<u64> {
    let pb = BigInt::from(p);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let (q, r) = u.div_mod_floor(&pb);
        out.push(r.try_into().expect("digit below p"));
        u = q;
    }
    out
}

impl PAdicElement {
    pub fn zero(p: u64) -> Self {
        PAdicElement { p, valuation: 0, digits: Vec::new(), precision: 0, exact_zero: true, exact: Some(Rational::zero()) }
    }

    /// `p^v · u` with `u` reduced modulo `p^k`; `u` must be a unit.
    fn from_unit(p: u64, v: i64, u: &BigInt, k: usize, exact: Option<Rational>) -> Self {
        let m = pow(p, k);
        let u = u.mod_floor(&m);
        debug_assert!(k == 0 || !u.is_multiple_of(&BigInt::from(p)));
        PAdicElement { p, valuation: v, digits: to_digits(u, p, k), precision: k, exact_zero: false, exact }
    }

    /// The expansion of a rational with `k` digits of unit part.
    pub fn from_rational(q: &Rational, p: u64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InsufficientPrecision("precision must be at least one digit".into()));
        }
        if q.is_zero() {
            return Ok(Self::zero(p));
        }
        let v = valuation(q, p);
        let unit = q.clone() / pow_rat(p, v);
        let m = pow(p, k);
        let inv = mod_inverse(unit.denom(), &m).expect("denominator is a unit");
        let u = (unit.numer() * inv).mod_floor(&m);
        Ok(Self::from_unit(p, v, &u, k, Some(q.clone())))
    }

    /// Parses digits written most significant first, e.g. `(-2, "1011")`.
    pub fn from_digits(p: u64, v: i64, digits_lsf: Vec<u64>) -> Result<Self> {
        if digits_lsf.iter().any(|&d| d >= p) {
            return Err(Error::InvalidSystem(format!("digit out of range for p = {p}")));
        }
        if digits_lsf.is_empty() {
            return Err(Error::InsufficientPrecision("no digits".into()));
        }
        if digits_lsf[0] == 0 {
            return Err(Error::InvalidSystem("leading digit must be nonzero; shift the valuation".into()));
        }
        let k = digits_lsf.len();
        Ok(PAdicElement { p, valuation: v, digits: digits_lsf, precision: k, exact_zero: false, exact: None })
    }

    pub fn unit_part(&self) -> BigInt {
        let pb = BigInt::from(self.p);
        self.digits.iter().rev().fold(BigInt::zero(), |acc, &d| acc * &pb + BigInt::from(d))
    }

    /// Exponent `N` such that the value is known modulo `p^N`.
    pub fn absolute_precision(&self) -> Option<i64> {
        if self.exact_zero {
            None
        } else {
            Some(self.valuation + self.precision as i64)
        }
    }

    /// `None` for the exact zero.
    pub fn valuation(&self) -> Option<i64> {
        (!self.exact_zero).then_some(self.valuation)
    }

    pub fn is_integral(&self) -> bool {
        self.exact_zero || self.valuation >= 0
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ShapeMismatch(format!("{}-adic and {}-adic operands", self.p, other.p)));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        if self.exact_zero {
            return self.clone();
        }
        Self::from_unit(self.p, self.valuation, &-self.unit_part(), self.precision, self.exact.as_ref().map(|q| -q.clone()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if self.exact_zero {
            return Ok(other.clone());
        }
        if other.exact_zero {
            return Ok(self.clone());
        }
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.clone() + b.clone()),
            _ => None,
        };
        if let Some(q) = &exact {
            if q.is_zero() {
                return Ok(Self::zero(self.p));
            }
        }
        let n = self.absolute_precision().unwrap().min(other.absolute_precision().unwrap());
        let v0 = self.valuation.min(other.valuation);
        let width = (n - v0) as usize;
        let lift = |x: &Self| x.unit_part() * pow(x.p, (x.valuation - v0) as usize);
        let m = pow(self.p, width);
        let sum = (lift(self) + lift(other)).mod_floor(&m);
        if sum.is_zero() {
            return match exact {
                Some(q) => Self::from_rational(&q, self.p, self.precision.min(other.precision)),
                None => Err(Error::InsufficientPrecision(format!(
                    "sum vanishes modulo {}^{n}; its valuation is undetermined",
                    self.p
                ))),
            };
        }
        let mut t = 0usize;
        let pb = BigInt::from(self.p);
        let mut u = sum;
        while u.is_multiple_of(&pb) {
            u /= &pb;
            t += 1;
        }
        Ok(Self::from_unit(self.p, v0 + t as i64, &u, width - t, exact))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if self.exact_zero || other.exact_zero {
            return Ok(Self::zero(self.p));
        }
        let k = self.precision.min(other.precision);
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.clone() * b.clone()),
            _ => None,
        };
        Ok(Self::from_unit(self.p, self.valuation + other.valuation, &(self.unit_part() * other.unit_part()), k, exact))
    }

    /// `Σ_{v+i<0} dᵢ p^{v+i}`, exactly.
    pub fn principal_part(&self) -> Result<Rational> {
        if self.exact_zero || self.valuation >= 0 {
            return Ok(Rational::zero());
        }
        let needed = (-self.valuation) as usize;
        if self.precision < needed {
            return Err(Error::InsufficientPrecision(format!(
                "{} digits known but the principal part needs {needed}",
                self.precision
            )));
        }
        Ok(self.digits[..needed]
            .iter()
            .enumerate()
            .map(|(i, &d)| Rational::from_integer(BigInt::from(d)) * pow_rat(self.p, self.valuation + i as i64))
            .fold(Rational::zero(), |a, b| a + b))
    }

    /// Whether `q` agrees with this element on every known digit.
    pub fn agrees_with(&self, q: &Rational) -> bool {
        if self.exact_zero {
            return q.is_zero();
        }
        let n = self.absolute_precision().unwrap();
        let Ok(x) = PAdicElement::from_rational(q, self.p, (n - valuation_or(q, self.p, n)).max(1) as usize) else {
            return false;
        };
        match x.sub(self) {
            Ok(d) => d.exact_zero || d.valuation >= n,
            // vanishing to all known digits
            Err(_) => true,
        }
    }
}

fn valuation_or(q: &Rational, p: u64, fallback: i64) -> i64 {
    if q.is_zero() {
        fallback - 1
    } else {
        valuation(q, p)
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    g.gcd.is_one().then(|| g.x.mod_floor(m))
}

impl fmt::Display for PAdicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact_zero {
            return write!(f, "0");
        }
        let digits: String = self.digits.iter().rev().map(|d| if self.p <= 10 { d.to_string() } else { format!("{d},") }).collect();
        write!(f, "{}^{} * ...{} (mod {}^{})", self.p, self.valuation, digits, self.p, self.absolute_precision().unwrap())
    }
}

/// Whether a rational has denominator supported in the given primes.
pub fn has_denominator_in(q: &Rational, primes: &[u64]) -> bool {
    let mut d = q.denom().abs();
    for &p in primes {
        let pb = BigInt::from(p);
        while d.is_multiple_of(&pb) {
            d /= &pb;
        }
    }
    d.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    #[test]
    fn seven_quarters() {
        let x = PAdicElement::from_rational(&ratio(7, 4), 2, 8).unwrap();
        assert_eq!(x.valuation(), Some(-2));
        assert_eq!(&x.digits[..3], &[1, 1, 1]);
        assert_eq!(x.principal_part().unwrap(), ratio(3, 4));
    }

    #[test]
    fn cancellation() {
        let x = PAdicElement::from_rational(&ratio(5, 3), 3, 6).unwrap();
        assert!(x.add(&x.neg()).unwrap().exact_zero);
        let y = PAdicElement::from_digits(3, 0, vec![1, 2, 0, 1]).unwrap();
        assert_eq!(y.add(&y.neg()).unwrap_err().code(), "precision");
    }

    #[test]
    fn valuation_of_p_times_unit() {
        let u = PAdicElement::from_rational(&ratio(4, 7), 5, 10).unwrap();
        let p = PAdicElement::from_rational(&ratio(5, 1), 5, 10).unwrap();
        assert_eq!(p.mul(&u).unwrap().valuation(), Some(1));
    }

    #[test]
    fn precision_drops_with_cancellation() {
        // 1 + (−1 + 2^3) = 2^3 known to fewer digits
        let a = PAdicElement::from_digits(2, 0, vec![1, 0, 0, 0, 0, 0]).unwrap();
        let b = PAdicElement::from_rational(&ratio(7, 1), 2, 6).unwrap().neg();
        let s = a.add(&b).unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.absolute_precision(), Some(6));
        assert_eq!(s.precision, 5);
    }

    #[test]
    fn agreement_and_principal_parts_of_sums() {
        let a = PAdicElement::from_rational(&ratio(1, 6), 2, 16).unwrap();
        let b = PAdicElement::from_rational(&ratio(5, 12), 2, 16).unwrap();
        let s = a.add(&b).unwrap();
        assert!(s.agrees_with(&ratio(7, 12)));
        assert!(!s.agrees_with(&ratio(7, 13)));
        // 7/12 − 1/4 = 1/3
        assert_eq!(s.principal_part().unwrap(), ratio(1, 4));
        assert!(has_denominator_in(&ratio(7, 12), &[2, 3]));
        assert!(!has_denominator_in(&ratio(7, 10), &[2, 3]));
    }
}
