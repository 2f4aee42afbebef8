use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use super::field::FieldElement;
use super::monomial::{Monomial, Specialization};
use super::poly::LaurentPoly;
use crate::Error;

/// A scalar kept as ±m·∏(1 − mᵢ)^{eᵢ}.
///
/// Every constant the engine produces (evaluations and residues of
/// factored ℓ-weights, structure factors at delta supports) has this
/// shape. Products are exponent merges; sums are tested for zero by
/// pulling out the common factor and expanding only what remains.
///
/// Each mᵢ is normalized to be lexicographically positive, so (a − b)
/// and (b − a) share one key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factored {
    // 0 encodes the zero scalar
    sign: i8,
    mono: Monomial,
    factors: BTreeMap<Monomial, i32>,
}

impl Factored {
    pub fn zero() -> Self {
        Factored { sign: 0, mono: Monomial::ONE, factors: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::ONE)
    }

    pub fn monomial(m: Monomial) -> Self {
        Factored { sign: 1, mono: m, factors: BTreeMap::new() }
    }

    pub fn signed_monomial(sign: i8, m: Monomial) -> Self {
        Factored { sign: sign.signum(), mono: m, factors: BTreeMap::new() }
    }

    /// a − b raised to `exp`. Zero if a = b (an error for negative `exp`).
    pub fn binomial_pow(a: Monomial, b: Monomial, exp: i32) -> Result<Self, Error> {
        if exp == 0 {
            return Ok(Self::one());
        }
        if a == b {
            return if exp > 0 { Ok(Self::zero()) } else { Err(Error::DivisionByZero) };
        }
        let r = b / a;
        let (sign, mono, key) = if r.is_lex_positive() { (1, a, r) } else { (-1, b, r.inv()) };
        let mut f = Factored { sign: if exp % 2 == 0 { 1 } else { sign }, mono: mono.pow(exp), factors: BTreeMap::new() };
        f.factors.insert(key, exp);
        Ok(f)
    }

    /// a − b
    pub fn binomial(a: Monomial, b: Monomial) -> Self {
        Self::binomial_pow(a, b, 1).expect("positive power never fails")
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.sign = -out.sign;
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = self.clone();
        out.sign *= o.sign;
        out.mono = out.mono * o.mono;
        for (k, e) in &o.factors {
            let slot = out.factors.entry(*k).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.factors.remove(k);
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: Monomial) -> Self {
        let mut out = self.clone();
        out.mono = out.mono * m;
        out
    }

    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Factored { sign: self.sign, mono: self.mono.inv(), factors: self.factors.iter().map(|(k, e)| (*k, -e)).collect() })
    }

    pub fn div(&self, o: &Self) -> Result<Self, Error> {
        Ok(self.mul(&o.inv()?))
    }

    /// Numerator and denominator polynomials.
    fn expand(&self) -> (LaurentPoly, LaurentPoly) {
        if self.is_zero() {
            return (LaurentPoly::zero(), LaurentPoly::one());
        }
        let mut num = LaurentPoly::monomial(self.mono, self.sign as i64);
        let mut den = LaurentPoly::one();
        for (k, e) in &self.factors {
            let target = if *e > 0 { &mut num } else { &mut den };
            for _ in 0..e.abs() {
                target.mul_one_minus(*k);
            }
        }
        (num, den)
    }

    pub fn to_field(&self) -> FieldElement {
        let (n, d) = self.expand();
        FieldElement::new(n, d).expect("denominator is a product of nonzero binomials")
    }

    pub fn specialize(&self, s: &Specialization) -> Result<FieldElement, Error> {
        self.to_field().specialize(s)
    }

    /// Exact test Σ terms = 0.
    pub fn sum_is_zero(terms: &[Factored]) -> bool {
        let refs: Vec<&Factored> = terms.iter().collect();
        Self::sum_is_zero_refs(&refs)
    }

    pub fn sum_is_zero_refs(terms: &[&Factored]) -> bool {
        let Some((live, common, keys)) = Self::common_part(terms.iter().copied()) else { return true };
        match expand_small(&live, &common, &keys) {
            Some(acc) => acc.values().all(|c| *c == 0),
            None => expand_big(&live, &common, &keys).is_zero(),
        }
    }

    /// Σ terms as a field element.
    pub fn sum_to_field(terms: &[Factored]) -> FieldElement {
        match Self::common_part(terms.iter()) {
            None => FieldElement::zero(),
            Some((live, common, keys)) => common.to_field().mul(&FieldElement::from_poly(expand_big(&live, &common, &keys))),
        }
    }

    /// The nonzero terms, their common factor, and every factor key.
    fn common_part<'a>(terms: impl Iterator<Item = &'a Factored>) -> Option<(Vec<&'a Factored>, Factored, Vec<Monomial>)> {
        let live: Vec<&Factored> = terms.filter(|t| !t.is_zero()).collect();
        let mut mono = live.first()?.mono;
        for t in &live {
            mono = mono.min(t.mono);
        }
        // a key absent from a term counts as exponent 0
        let mut keys: Vec<Monomial> = live.iter().flat_map(|t| t.factors.keys().copied()).collect();
        keys.sort();
        keys.dedup();
        let mut mins = BTreeMap::new();
        for k in &keys {
            let m = live.iter().map(|t| t.factors.get(k).copied().unwrap_or(0)).min().unwrap_or(0);
            if m != 0 {
                mins.insert(*k, m);
            }
        }
        Some((live, Factored { sign: 1, mono, factors: mins }, keys))
    }

    fn residual_exponent(&self, common: &Factored, k: &Monomial) -> i32 {
        self.factors.get(k).copied().unwrap_or(0) - common.factors.get(k).copied().unwrap_or(0)
    }
}

/// Monomials packed as Σ eᵢ·2^{12i} so that products are additions.
/// Valid while every half-exponent stays below `PACK_LIMIT` in size.
const PACK_BITS: u32 = 12;
const PACK_LIMIT: i64 = 1 << (PACK_BITS - 2);

fn pack(m: Monomial) -> i64 {
    m.halves().iter().enumerate().map(|(i, e)| (*e as i64) << (PACK_BITS * i as u32)).sum()
}

/// Residual Σ terms / common with machine integers; None when a
/// coefficient or exponent leaves the fast range.
fn expand_small(live: &[&Factored], common: &Factored, keys: &[Monomial]) -> Option<HashMap<i64, i64>> {
    let mut acc: HashMap<i64, i64> = HashMap::default();
    let mut cur: Vec<(i64, i64)> = Vec::new();
    let mut next: Vec<(i64, i64)> = Vec::new();
    for t in live {
        let base = t.mono / common.mono;
        let mut reach = base.halves().map(|e| (e as i64).abs());
        cur.clear();
        cur.push((pack(base), t.sign as i64));
        for k in keys {
            let r = t.residual_exponent(common, k);
            if r == 0 {
                continue;
            }
            for (slot, e) in reach.iter_mut().zip(k.halves()) {
                *slot += r as i64 * (e as i64).abs();
            }
            let kp = pack(*k);
            let mut binom = 1i64;
            next.clear();
            for j in 0..=r as i64 {
                let c = if j % 2 == 0 { binom } else { -binom };
                for &(m, a) in &cur {
                    next.push((m + j * kp, a.checked_mul(c)?));
                }
                binom = binom.checked_mul(r as i64 - j)? / (j + 1);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        if reach.iter().any(|e| *e >= PACK_LIMIT) {
            return None;
        }
        for &(m, c) in &cur {
            let e = acc.entry(m).or_insert(0);
            *e = e.checked_add(c)?;
        }
    }
    Some(acc)
}

fn expand_big(live: &[&Factored], common: &Factored, keys: &[Monomial]) -> LaurentPoly {
    let mut residual = LaurentPoly::zero();
    for t in live {
        let mut p = LaurentPoly::monomial(t.mono / common.mono, t.sign as i64);
        for k in keys {
            for _ in 0..t.residual_exponent(common, k) {
                p.mul_one_minus(*k);
            }
        }
        residual = &residual + &p;
    }
    residual
}

impl fmt::Display for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.sign < 0 {
            write!(f, "-")?;
        }
        write!(f, "{}", self.mono)?;
        for (k, e) in &self.factors {
            if *e == 1 {
                write!(f, " (1 - {k})")?;
            } else {
                write!(f, " (1 - {k})^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Monomial {
        Monomial::q()
    }

    #[test]
    fn binomial_orientation_shares_key() {
        let a = Factored::binomial(q(), Monomial::d());
        let b = Factored::binomial(Monomial::d(), q());
        assert_eq!(a.neg(), b);
        assert!(Factored::sum_is_zero(&[a, b]));
    }

    #[test]
    fn to_field_matches_poly() {
        let f = Factored::binomial(q(), q().inv());
        let expect = FieldElement::from_poly(LaurentPoly::binomial(q(), q().inv()));
        assert_eq!(f.to_field(), expect);
    }

    #[test]
    fn difference_of_squares() {
        // (q² − 1) − (q − 1)(q + 1) = 0, written with factored pieces
        let lhs = Factored::binomial(Monomial::q2(), Monomial::ONE);
        let minus = Factored::binomial(q(), Monomial::ONE);
        let plus = [Factored::monomial(q()), Factored::one()];
        let terms = [lhs.clone(), minus.mul(&plus[0]).neg(), minus.mul(&plus[1]).neg()];
        assert!(Factored::sum_is_zero(&terms));
        assert!(!Factored::sum_is_zero(&[lhs, minus.neg()]));
    }

    #[test]
    fn sum_with_denominators() {
        // 1/(1−q) − 1/(1−q) · (1−q²)/(1−q²) = 0
        let x = Factored::binomial(Monomial::ONE, q()).inv().unwrap();
        let y = x.mul(&Factored::binomial(Monomial::ONE, Monomial::q2())).div(&Factored::binomial(Monomial::ONE, Monomial::q2())).unwrap();
        assert!(Factored::sum_is_zero(&[x.clone(), y.neg()]));
        // 1/(1−q) + q/(1−q) − (1+q)/(1−q) style: 1/(1-q) - 1 = q/(1-q)
        let lhs = x.clone();
        let rhs = [Factored::one(), Factored::monomial(q()).mul(&x)];
        assert!(Factored::sum_is_zero(&[lhs, rhs[0].neg(), rhs[1].neg()]));
    }

    #[test]
    fn zero_propagates() {
        assert!(Factored::binomial(q(), q()).is_zero());
        assert!(Factored::binomial(q(), q()).mul(&Factored::one()).is_zero());
        assert!(Factored::binomial_pow(q(), q(), -1).is_err());
    }

    #[test]
    fn sum_to_field_agrees() {
        let a = Factored::binomial(q(), Monomial::d());
        let b = Factored::binomial(Monomial::d(), Monomial::ONE).inv().unwrap();
        let s = Factored::sum_to_field(&[a.clone(), b.clone()]);
        assert_eq!(s, a.to_field().add(&b.to_field()));
    }
}
