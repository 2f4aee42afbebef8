use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::monomial::{Monomial, Specialization};
use super::poly::LaurentPoly;
use crate::Error;

/// Element of the fraction field, kept as an unreduced num/den pair.
///
/// Only integer content and monomial content are stripped; equality is
/// decided by cross-multiplication.
#[derive(Clone, Debug)]
pub struct FieldElement {
    num: LaurentPoly,
    den: LaurentPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        Self::normalized(p, LaurentPoly::one())
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Self::from_poly(LaurentPoly::monomial(m, 1))
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(LaurentPoly::monomial(Monomial::ONE, c))
    }

    pub fn zero() -> Self {
        Self::from_poly(LaurentPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    fn normalized(mut num: LaurentPoly, mut den: LaurentPoly) -> Self {
        if num.is_zero() {
            return FieldElement { num, den: LaurentPoly::one() };
        }
        // move monomial content into the numerator
        if let Some(m) = den.monomial_content() {
            den = den.mul_monomial(m.inv());
            num = num.mul_monomial(m.inv());
        }
        let g = num.content().gcd(&den.content());
        if !g.is_one() && !g.is_zero() {
            num = num.div_exact_int(&g);
            den = den.div_exact_int(&g);
        }
        if den.leading_coeff_sign() < 0 {
            num = -&num;
            den = -&den;
        }
        FieldElement { num, den }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn neg(&self) -> Self {
        FieldElement { num: -&self.num, den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self, Error> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::normalized(&self.num + &o.num, self.den.clone());
        }
        Self::normalized(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::normalized(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &Self) -> Result<Self, Error> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn apply(&self, op: FieldOp, o: &Self) -> Result<Self, Error> {
        Ok(match op {
            FieldOp::Add => self.add(o),
            FieldOp::Sub => self.sub(o),
            FieldOp::Mul => self.mul(o),
            FieldOp::Div => self.div(o)?,
        })
    }

    pub fn scale_int(&self, c: i64) -> Self {
        Self::normalized(self.num.scale(&BigInt::from(c)), self.den.clone())
    }

    pub fn specialize(&self, s: &Specialization) -> Result<Self, Error> {
        let den = self.den.specialize(s)?;
        if den.is_zero() {
            return Err(Error::SpecializationCollapsesDenominator);
        }
        Ok(Self::normalized(self.num.specialize(s)?, den))
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, o: &Self) -> bool {
        &self.num * &o.den == &o.num * &self.den
    }
}

impl Eq for FieldElement {}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_minus_qinv() -> FieldElement {
        FieldElement::from_poly(LaurentPoly::binomial(Monomial::q(), Monomial::q().inv()))
    }

    #[test]
    fn inverse_times_self() {
        let x = q_minus_qinv();
        assert!(x.inv().unwrap().mul(&x).is_one());
    }

    #[test]
    fn representatives_agree() {
        // (q² − 1)/q = q − q⁻¹
        let a = FieldElement::new(LaurentPoly::binomial(Monomial::q2(), Monomial::ONE), LaurentPoly::monomial(Monomial::q(), 1)).unwrap();
        assert_eq!(a, q_minus_qinv());
    }

    #[test]
    fn vanishing_factor() {
        let p1 = Monomial::new(0, 0, 1, 0, 0);
        let p0 = Monomial::q1() * p1;
        let f = |a: Monomial| FieldElement::from_poly(LaurentPoly::binomial(p0, a * p1));
        assert!(f(Monomial::q1()).mul(&f(Monomial::q3())).is_zero());
    }

    #[test]
    fn div_by_zero() {
        assert!(matches!(FieldElement::one().div(&FieldElement::zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn specialization_collapse() {
        let x = FieldElement::new(LaurentPoly::one(), LaurentPoly::binomial(Monomial::d(), Monomial::q().pow(-2))).unwrap();
        let s: Specialization = "d=q^-2".parse().unwrap();
        assert!(matches!(x.specialize(&s), Err(Error::SpecializationCollapsesDenominator)));
    }
}
