//! Rational functions of z in factored form with monomial roots.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::{Factored, FieldElement, Monomial, Specialization};
use crate::Error;

/// sign · lead · ∏(z − zᵢ) / ∏(z − pⱼ).
///
/// Roots are stored as a single map: positive multiplicity for zeros,
/// negative for poles, so a root present on both sides cancels on
/// construction and equality of canonical forms is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredRatZ {
    sign: i8,
    lead: Monomial,
    roots: BTreeMap<Monomial, i32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RzProperties {
    pub balanced: bool,
    /// Poles with multiplicity, ascending.
    pub poles: Vec<(Monomial, i32)>,
    pub simple_poles_only: bool,
}

impl FactoredRatZ {
    pub fn one() -> Self {
        Self::constant(1, Monomial::ONE)
    }

    pub fn constant(sign: i8, lead: Monomial) -> Self {
        FactoredRatZ { sign: sign.signum(), lead, roots: BTreeMap::new() }
    }

    pub fn new(sign: i8, lead: Monomial, zeros: &[Monomial], poles: &[Monomial]) -> Self {
        let mut f = Self::constant(sign, lead);
        for z in zeros {
            f.bump(*z, 1);
        }
        for p in poles {
            f.bump(*p, -1);
        }
        f
    }

    /// αz − β
    pub fn linear(alpha: Monomial, beta: Monomial) -> Self {
        Self::new(1, alpha, &[beta / alpha], &[])
    }

    fn bump(&mut self, r: Monomial, by: i32) {
        let slot = self.roots.entry(r).or_insert(0);
        *slot += by;
        if *slot == 0 {
            self.roots.remove(&r);
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn lead(&self) -> Monomial {
        self.lead
    }

    /// Zeros with multiplicity.
    pub fn zeros(&self) -> impl Iterator<Item = (Monomial, i32)> + '_ {
        self.roots.iter().filter(|(_, e)| **e > 0).map(|(r, e)| (*r, *e))
    }

    /// Poles with multiplicity (as positive numbers).
    pub fn poles(&self) -> impl Iterator<Item = (Monomial, i32)> + '_ {
        self.roots.iter().filter(|(_, e)| **e < 0).map(|(r, e)| (*r, -*e))
    }

    pub fn pole_order(&self, p: Monomial) -> i32 {
        (-self.roots.get(&p).copied().unwrap_or(0)).max(0)
    }

    pub fn is_regular_at(&self, p: Monomial) -> bool {
        self.pole_order(p) == 0
    }

    pub fn is_one(&self) -> bool {
        self.sign == 1 && self.lead.is_one() && self.roots.is_empty()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.sign *= o.sign;
        out.lead = out.lead * o.lead;
        for (r, e) in &o.roots {
            out.bump(*r, *e);
        }
        out
    }

    pub fn inv(&self) -> Self {
        FactoredRatZ { sign: self.sign, lead: self.lead.inv(), roots: self.roots.iter().map(|(r, e)| (*r, -e)).collect() }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn degree_balance(&self) -> i32 {
        self.roots.values().sum()
    }

    /// f(p) exactly, as a factored scalar.
    pub fn eval(&self, p: Monomial) -> Result<Factored, Error> {
        if !self.is_regular_at(p) {
            return Err(Error::EvaluationAtPole(p.to_string()));
        }
        self.eval_skipping(p, None)
    }

    fn eval_skipping(&self, p: Monomial, skip: Option<Monomial>) -> Result<Factored, Error> {
        let mut acc = Factored::signed_monomial(self.sign, self.lead);
        for (r, e) in &self.roots {
            if Some(*r) == skip {
                continue;
            }
            acc = acc.mul(&Factored::binomial_pow(p, *r, *e)?);
        }
        Ok(acc)
    }

    pub fn eval_field(&self, p: Monomial) -> Result<FieldElement, Error> {
        Ok(self.eval(p)?.to_field())
    }

    /// res_{z=p} f(z) dz/z at a simple pole.
    pub fn residue(&self, p: Monomial) -> Result<Factored, Error> {
        match self.pole_order(p) {
            0 => Err(Error::NotAPole(p.to_string())),
            1 => Ok(self.eval_skipping(p, Some(p))?.mul_monomial(p.inv())),
            _ => Err(Error::PoleNotSimple(p.to_string())),
        }
    }

    pub fn residue_field(&self, p: Monomial) -> Result<FieldElement, Error> {
        Ok(self.residue(p)?.to_field())
    }

    /// Value at z = ∞ (only meaningful when balanced).
    pub fn at_infinity(&self) -> Factored {
        Factored::signed_monomial(self.sign, self.lead)
    }

    /// Value at z = 0, i.e. sign·lead·∏(−zᵢ)/∏(−pⱼ). Requires no root at 0,
    /// which holds for monomial roots.
    pub fn at_zero(&self) -> Factored {
        let mut sign = self.sign;
        let mut m = self.lead;
        for (r, e) in &self.roots {
            if e % 2 != 0 {
                sign = -sign;
            }
            m = m * r.pow(*e);
        }
        Factored::signed_monomial(sign, m)
    }

    pub fn properties(&self) -> RzProperties {
        let poles: Vec<(Monomial, i32)> = self.poles().collect();
        let simple_poles_only = poles.iter().all(|(_, e)| *e == 1);
        let balanced = self.degree_balance() == 0 && self.at_zero().mul(&self.at_infinity()) == Factored::one();
        RzProperties { balanced, poles, simple_poles_only }
    }

    /// f(z/a): roots multiplied by a; the lead is unchanged for balanced f.
    pub fn scale_roots(&self, a: Monomial) -> Self {
        let shift = a.pow(self.degree_balance());
        FactoredRatZ { sign: self.sign, lead: self.lead / shift, roots: self.roots.iter().map(|(r, e)| (*r * a, *e)).collect() }
    }

    pub fn swap_q1_q3(&self) -> Self {
        FactoredRatZ {
            sign: self.sign,
            lead: self.lead.swap_q1_q3(),
            roots: self.roots.iter().map(|(r, e)| (r.swap_q1_q3(), *e)).collect(),
        }
    }

    pub fn specialize(&self, s: &Specialization) -> Result<Self, Error> {
        let mut out = Self::constant(self.sign, self.lead.specialize(s)?);
        for (r, e) in &self.roots {
            out.bump(r.specialize(s)?, *e);
        }
        Ok(out)
    }
}

impl fmt::Display for FactoredRatZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign < 0 { "-" } else { "" };
        let lead = if self.lead.is_one() && !self.roots.is_empty() { String::new() } else { self.lead.to_string() };
        let fac = |(r, e): (Monomial, i32)| {
            if e == 1 {
                format!("(z - {r})")
            } else {
                format!("(z - {r})^{e}")
            }
        };
        let num: Vec<String> = self.zeros().map(fac).collect();
        let den: Vec<String> = self.poles().map(fac).collect();
        let mut out = format!("{sign}{lead}");
        if !num.is_empty() {
            if !lead.is_empty() {
                out.push(' ');
            }
            out.push_str(&num.join(""));
        } else if lead.is_empty() {
            out.push('1');
        }
        if !den.is_empty() {
            out.push_str(" / ");
            out.push_str(&den.join(""));
        }
        write!(f, "{out}")
    }
}

impl Serialize for FactoredRatZ {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let expand =
            |it: Vec<(Monomial, i32)>| -> Vec<Monomial> { it.into_iter().flat_map(|(r, e)| std::iter::repeat_n(r, e as usize)).collect() };
        let mut st = ser.serialize_struct("FactoredRatZ", 4)?;
        st.serialize_field("sign", &self.sign)?;
        st.serialize_field("lead", &self.lead)?;
        st.serialize_field("zeros", &expand(self.zeros().collect()))?;
        st.serialize_field("poles", &expand(self.poles().collect()))?;
        st.end()
    }
}

/// (φ⁰(z), φ¹(z))
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LWeightPair {
    pub comp0: FactoredRatZ,
    pub comp1: FactoredRatZ,
}

impl LWeightPair {
    pub fn new(comp0: FactoredRatZ, comp1: FactoredRatZ) -> Self {
        LWeightPair { comp0, comp1 }
    }

    pub fn one() -> Self {
        Self::new(FactoredRatZ::one(), FactoredRatZ::one())
    }

    pub fn comp(&self, i: u8) -> &FactoredRatZ {
        if i == 0 {
            &self.comp0
        } else {
            &self.comp1
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.comp0.mul(&o.comp0), self.comp1.mul(&o.comp1))
    }

    pub fn inv(&self) -> Self {
        Self::new(self.comp0.inv(), self.comp1.inv())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn swap_colors(&self) -> Self {
        Self::new(self.comp1.clone(), self.comp0.clone())
    }

    pub fn scale_roots(&self, a: Monomial) -> Self {
        Self::new(self.comp0.scale_roots(a), self.comp1.scale_roots(a))
    }

    pub fn swap_q1_q3(&self) -> Self {
        Self::new(self.comp0.swap_q1_q3(), self.comp1.swap_q1_q3())
    }

    pub fn specialize(&self, s: &Specialization) -> Result<Self, Error> {
        Ok(Self::new(self.comp0.specialize(s)?, self.comp1.specialize(s)?))
    }

    pub fn is_one(&self) -> bool {
        self.comp0.is_one() && self.comp1.is_one()
    }

    /// Both components evaluated at p.
    pub fn eval(&self, p: Monomial) -> Result<(Factored, Factored), Error> {
        Ok((self.comp0.eval(p)?, self.comp1.eval(p)?))
    }
}

impl fmt::Display for LWeightPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "( {} , {} )", self.comp0, self.comp1)
    }
}

/// The weight 0_a = ((qz − a)/(z − aq), 1).
pub fn weight_zero(a: Monomial) -> LWeightPair {
    let q = Monomial::q();
    LWeightPair::new(FactoredRatZ::new(1, q, &[a / q], &[a * q]), FactoredRatZ::one())
}

/// The weight 1_a = (1, (qz − a)/(z − aq)).
pub fn weight_one(a: Monomial) -> LWeightPair {
    weight_zero(a).swap_colors()
}

/// c_a for color c.
pub fn weight(color: u8, a: Monomial) -> LWeightPair {
    if color == 0 {
        weight_zero(a)
    } else {
        weight_one(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Monomial {
        Monomial::new(0, 1, 1, 0, 0)
    }

    #[test]
    fn weight_times_inverse() {
        assert!(weight_zero(a()).mul(&weight_zero(a()).inv()).is_one());
    }

    #[test]
    fn residue_of_zero_weight() {
        // res_{z=aq} (qz−a)/(z−aq) dz/z = (q·aq − a)/(aq) = q − q⁻¹
        let f = weight_zero(a()).comp0;
        let r = f.residue(a() * Monomial::q()).unwrap();
        assert_eq!(r.to_field(), crate::algebra::q_minus_qinv().to_field());
    }

    #[test]
    fn residue_errors() {
        let f = weight_zero(a()).comp0;
        assert!(matches!(f.residue(a()), Err(Error::NotAPole(_))));
        let g = FactoredRatZ::new(1, Monomial::ONE, &[a()], &[Monomial::q(), Monomial::q()]);
        assert!(matches!(g.residue(Monomial::q()), Err(Error::PoleNotSimple(_))));
        assert!(!g.properties().simple_poles_only);
    }

    #[test]
    fn eval_at_pole_is_error() {
        let f = weight_zero(a()).comp0;
        assert!(matches!(f.eval(a() * Monomial::q()), Err(Error::EvaluationAtPole(_))));
    }

    #[test]
    fn balance_of_zero_weight() {
        let f = weight_zero(a()).comp0;
        assert_eq!(f.at_zero().mul(&f.at_infinity()), Factored::one());
        let p = f.properties();
        assert!(p.balanced && p.simple_poles_only);
        assert_eq!(p.poles, vec![(a() * Monomial::q(), 1)]);
    }

    #[test]
    fn scale_roots_is_argument_rescaling() {
        // f(z/s) at z = s·p equals f(p)
        let f = weight_zero(a()).comp0.mul(&weight_zero(Monomial::d()).comp0.inv());
        let s = Monomial::new(1, 2, 0, 1, 0);
        let p = Monomial::new(3, 0, 0, 0, 1);
        assert_eq!(f.scale_roots(s).eval(s * p).unwrap().to_field(), f.eval(p).unwrap().to_field());
    }

    #[test]
    fn display_and_json() {
        let f = weight_zero(Monomial::ONE).comp0;
        assert_eq!(f.to_string(), "q (z - q^-1) / (z - q)");
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["poles"][0][0], 1);
    }
}
