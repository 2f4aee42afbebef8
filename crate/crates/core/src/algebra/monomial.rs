use std::fmt;
use std::ops::{Div, Mul};
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Formal generators. `U` stands for q₂^{-μ}, `V` for q₂^{-ν}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Q,
    D,
    U,
    V,
    Kappa,
}

impl Gen {
    pub const ALL: [Gen; 5] = [Gen::Q, Gen::D, Gen::U, Gen::V, Gen::Kappa];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Gen::Q => "q",
            Gen::D => "d",
            Gen::U => "U",
            Gen::V => "V",
            Gen::Kappa => "k",
        }
    }

    pub fn parse(s: &str) -> Option<Gen> {
        match s {
            "q" => Some(Gen::Q),
            "d" => Some(Gen::D),
            "U" | "u" => Some(Gen::U),
            "V" | "v" => Some(Gen::V),
            "k" | "kappa" | "κ" => Some(Gen::Kappa),
            _ => None,
        }
    }
}

/// A monomial q^a d^b U^c V^e κ^f.
///
/// Exponents are stored in half-units so that square roots such as
/// q^{-μ} = U^{1/2} or κ = p^{-1/2} stay inside the lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    half: [i32; 5],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { half: [0; 5] };
    pub const Q: Monomial = Monomial { half: [2, 0, 0, 0, 0] };
    /// q₁ = q⁻¹d
    pub const Q1: Monomial = Monomial { half: [-2, 2, 0, 0, 0] };
    /// q₂ = q²
    pub const Q2: Monomial = Monomial { half: [4, 0, 0, 0, 0] };
    /// q₃ = q⁻¹d⁻¹
    pub const Q3: Monomial = Monomial { half: [-2, -2, 0, 0, 0] };

    /// Whole-integer exponents.
    pub fn new(q: i32, d: i32, u: i32, v: i32, k: i32) -> Self {
        Monomial { half: [2 * q, 2 * d, 2 * u, 2 * v, 2 * k] }
    }

    pub fn from_halves(half: [i32; 5]) -> Self {
        Monomial { half }
    }

    pub fn halves(&self) -> [i32; 5] {
        self.half
    }

    pub fn gen(g: Gen) -> Self {
        let mut half = [0; 5];
        half[g.index()] = 2;
        Monomial { half }
    }

    pub fn q() -> Self {
        Self::gen(Gen::Q)
    }
    pub fn d() -> Self {
        Self::gen(Gen::D)
    }
    pub fn u() -> Self {
        Self::gen(Gen::U)
    }
    pub fn v() -> Self {
        Self::gen(Gen::V)
    }
    pub fn kappa() -> Self {
        Self::gen(Gen::Kappa)
    }
    /// q₁ = q⁻¹d
    pub fn q1() -> Self {
        Self::Q1
    }
    /// q₂ = q²
    pub fn q2() -> Self {
        Self::Q2
    }
    /// q₃ = q⁻¹d⁻¹
    pub fn q3() -> Self {
        Self::Q3
    }

    pub fn is_one(&self) -> bool {
        self.half == [0; 5]
    }

    pub fn inv(self) -> Self {
        Monomial { half: self.half.map(|e| -e) }
    }

    pub fn pow(self, n: i32) -> Self {
        Monomial { half: self.half.map(|e| e * n) }
    }

    /// Square root, if every exponent is a whole integer.
    pub fn sqrt(self) -> Option<Self> {
        if self.half.iter().all(|e| e % 2 == 0) {
            Some(Monomial { half: self.half.map(|e| e / 2) })
        } else {
            None
        }
    }

    /// True when the first nonzero exponent is positive.
    pub fn is_lex_positive(&self) -> bool {
        self.half.iter().find(|e| **e != 0).is_some_and(|e| *e > 0)
    }

    /// The involution q₁ ↔ q₃ (d ↦ d⁻¹).
    pub fn swap_q1_q3(self) -> Self {
        let mut half = self.half;
        half[Gen::D.index()] = -half[Gen::D.index()];
        Monomial { half }
    }

    pub fn exponent_halves(&self, g: Gen) -> i32 {
        self.half[g.index()]
    }

    /// Componentwise minimum; used for monomial content.
    pub fn min(self, other: Self) -> Self {
        let mut half = self.half;
        for (h, o) in half.iter_mut().zip(other.half) {
            *h = (*h).min(o);
        }
        Monomial { half }
    }

    pub fn specialize(&self, s: &Specialization) -> Result<Monomial, Error> {
        let mut out = [0i64; 5];
        for g in Gen::ALL {
            let e = self.half[g.index()] as i64;
            if e == 0 {
                continue;
            }
            match s.image(g) {
                None => out[g.index()] += 2 * e,
                Some(img) => {
                    for (o, h) in out.iter_mut().zip(img.half) {
                        *o += e * h as i64;
                    }
                }
            }
        }
        // `out` is in quarter-units now
        let mut half = [0; 5];
        for (h, o) in half.iter_mut().zip(out) {
            if o % 2 != 0 {
                return Err(Error::NotRepresentable(self.to_string()));
            }
            *h = (o / 2) as i32;
        }
        Ok(Monomial { half })
    }
}

// multiplication adds exponents
impl Mul for Monomial {
    type Output = Monomial;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Monomial) -> Monomial {
        let mut half = self.half;
        for (h, r) in half.iter_mut().zip(rhs.half) {
            *h += r;
        }
        Monomial { half }
    }
}

impl Div for Monomial {
    type Output = Monomial;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Monomial) -> Monomial {
        self * rhs.inv()
    }
}

fn fmt_exp(h: i32) -> String {
    if h % 2 == 0 {
        (h / 2).to_string()
    } else {
        format!("{h}/2")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for g in Gen::ALL {
            let h = self.half[g.index()];
            if h == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if h == 2 {
                write!(f, "{}", g.symbol())?;
            } else {
                write!(f, "{}^{}", g.symbol(), fmt_exp(h))?;
            }
        }
        Ok(())
    }
}

fn parse_exponent_halves(s: &str) -> Option<i32> {
    let s = s.trim_start_matches(['(', '{']).trim_end_matches([')', '}']);
    if let Some((n, d)) = s.split_once('/') {
        let n: i32 = n.trim().parse().ok()?;
        match d.trim() {
            "1" => Some(2 * n),
            "2" => Some(n),
            _ => None,
        }
    } else {
        s.trim().parse::<i32>().ok().map(|n| 2 * n)
    }
}

/// Accepts products like `q^-1 d`, `q3^2*U^1/2`, `kappa`, `1`.
/// Besides the five generators the shorthands q1, q2, q3 are understood.
impl FromStr for Monomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("bad monomial `{s}`"));
        let mut acc = Monomial::ONE;
        for tok in s.split(|c: char| c == '*' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let (sym, exp) = match tok.split_once('^') {
                Some((a, b)) => (a, parse_exponent_halves(b).ok_or_else(bad)?),
                None => (tok, 2),
            };
            let base = match sym {
                "1" => Monomial::ONE,
                "q1" => Monomial::q1(),
                "q2" => Monomial::q2(),
                "q3" => Monomial::q3(),
                other => Monomial::gen(Gen::parse(other).ok_or_else(bad)?),
            };
            // base^(exp/2): every base above has even half-exponents
            let mut half = base.half;
            for h in half.iter_mut() {
                *h = *h * exp / 2;
            }
            acc = acc * Monomial { half };
        }
        Ok(acc)
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<serde_json::Value> = self.half.iter().map(|&h| half_to_json(h)).collect();
        vals.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let vals: Vec<f64> = Vec::deserialize(de)?;
        if vals.len() != 5 {
            return Err(D::Error::custom("monomial needs 5 exponents"));
        }
        let mut half = [0; 5];
        for (h, v) in half.iter_mut().zip(vals) {
            let t = v * 2.0;
            if t.fract() != 0.0 {
                return Err(D::Error::custom("exponents must be multiples of 1/2"));
            }
            *h = t as i32;
        }
        Ok(Monomial { half })
    }
}

fn half_to_json(h: i32) -> serde_json::Value {
    if h % 2 == 0 {
        serde_json::Value::from(h / 2)
    } else {
        serde_json::Value::from(h as f64 / 2.0)
    }
}

/// A substitution of generators by monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Specialization {
    images: [Option<Monomial>; 5],
}

impl Specialization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, g: Gen, img: Monomial) -> Self {
        self.images[g.index()] = Some(img);
        self
    }

    pub fn image(&self, g: Gen) -> Option<Monomial> {
        self.images[g.index()]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().all(|i| i.is_none())
    }
}

/// `d=q^-2,kappa=q3`
impl FromStr for Specialization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut out = Specialization::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (g, img) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected gen=monomial in `{part}`")))?;
            let g = Gen::parse(g.trim()).ok_or_else(|| Error::Parse(format!("unknown generator `{g}`")))?;
            out.images[g.index()] = Some(img.trim().parse()?);
        }
        Ok(out)
    }
}

impl fmt::Display for Specialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Gen::ALL.iter().filter_map(|g| self.image(*g).map(|m| format!("{}={}", g.symbol(), m))).collect();
        write!(f, "{}", parts.join(","))
    }
}
