//! Boxes, states, positions and ℓ-weights.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::Monomial;
use crate::rational::{FactoredRatZ, LWeightPair};
use crate::Error;

/// An integer plus multiples of the formal parameters μ and ν.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shifted {
    pub int: i64,
    pub mu: i64,
    pub nu: i64,
}

impl Shifted {
    pub fn int(int: i64) -> Self {
        Shifted { int, mu: 0, nu: 0 }
    }

    pub fn new(int: i64, mu: i64, nu: i64) -> Self {
        Shifted { int, mu, nu }
    }

    pub fn step(self, by: i64) -> Self {
        Shifted { int: self.int + by, ..self }
    }

    pub fn same_shift(&self, o: &Shifted) -> bool {
        self.mu == o.mu && self.nu == o.nu
    }
}

impl fmt::Display for Shifted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.mu {
            0 => {}
            1 => parts.push("μ".to_string()),
            m => parts.push(format!("{m}μ")),
        }
        match self.nu {
            0 => {}
            1 => parts.push("ν".to_string()),
            n => parts.push(format!("{n}ν")),
        }
        let mut s = parts.join("+");
        if s.is_empty() {
            s = self.int.to_string();
        } else if self.int > 0 {
            s = format!("{s}+{}", self.int);
        } else if self.int < 0 {
            s = format!("{s}{}", self.int);
        }
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// A colored signed box. Only the y coordinate carries μ/ν shifts.
///
/// Field order makes the derived `Ord` agree with the box order of a
/// family whose groups are ranked by their tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub group: u8,
    pub y: Shifted,
    pub z: i64,
    pub x: i64,
    pub color: u8,
    pub sign: Sign,
}

impl Block {
    pub fn new(x: i64, y: Shifted, z: i64, color: u8, sign: Sign, group: u8) -> Self {
        Block { group, y, z, x, color, sign }
    }

    pub fn coords(&self) -> (i64, Shifted, i64) {
        (self.x, self.y, self.z)
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.is_positive() { "" } else { "-" };
        write!(f, "{s}({},{},{})", self.x, self.y, self.z)
    }
}

impl Serialize for Block {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut st = ser.serialize_struct("Block", 6)?;
        st.serialize_field("color", &self.color)?;
        st.serialize_field("sign", if self.is_positive() { "+" } else { "-" })?;
        st.serialize_field("x", &[self.x, 0, 0])?;
        st.serialize_field("y", &[self.y.int, self.y.mu, self.y.nu])?;
        st.serialize_field("z", &[self.z, 0, 0])?;
        st.serialize_field("group", &self.group)?;
        st.end()
    }
}

/// p(□) = q₁^{-x} q₂^{-y} q₃^{-z} = q^{x−2y+z} d^{z−x}, with q₂^{-μ} = U, q₂^{-ν} = V.
pub fn position(b: &Block) -> Monomial {
    let (x, y, z) = (b.x as i32, b.y, b.z as i32);
    Monomial::new(x - 2 * y.int as i32 + z, z - x, y.mu as i32, y.nu as i32, 0)
}

/// Order within a family: rank of the group first, then (y, z, x).
pub fn box_order(b1: &Block, b2: &Block, group_rank: &[u8]) -> Result<Ordering, Error> {
    let r1 = group_rank.get(b1.group as usize).copied().unwrap_or(b1.group);
    let r2 = group_rank.get(b2.group as usize).copied().unwrap_or(b2.group);
    if r1 != r2 {
        return Ok(r1.cmp(&r2));
    }
    if !b1.y.same_shift(&b2.y) {
        return Err(Error::IncomparableBoxes(b1.to_string(), b2.to_string()));
    }
    Ok((b1.y.int, b1.z, b1.x).cmp(&(b2.y.int, b2.z, b2.x)))
}

/// A_{0,a} = ((q₂z − a)/(z − q₂a), (q₁z − a)(q₃z − a)/((z − q₁a)(z − q₃a))); A_{1,a} swaps.
pub fn affine_root(color: u8, a: Monomial) -> LWeightPair {
    let (q1, q2, q3) = (Monomial::q1(), Monomial::q2(), Monomial::q3());
    let same = FactoredRatZ::new(1, q2, &[a / q2], &[a * q2]);
    let other = FactoredRatZ::new(1, q1 * q3, &[a / q1, a / q3], &[a * q1, a * q3]);
    let root = LWeightPair::new(same, other);
    if color == 0 {
        root
    } else {
        root.swap_colors()
    }
}

/// λ = λ⁺ ⊔ λ⁻
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub plus: BTreeSet<Block>,
    pub minus: BTreeSet<Block>,
}

impl State {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = Block>) -> Self {
        let mut s = State::empty();
        for b in blocks {
            if b.is_positive() {
                s.plus.insert(b);
            } else {
                s.minus.insert(b);
            }
        }
        s
    }

    pub fn box_count(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.plus.iter().chain(self.minus.iter())
    }

    /// Whether the box is currently part of the state (in λ⁺ or λ⁻).
    pub fn contains(&self, b: &Block) -> bool {
        if b.is_positive() {
            self.plus.contains(b)
        } else {
            self.minus.contains(b)
        }
    }

    /// Add a concave box: positive boxes join λ⁺, negative boxes leave λ⁻.
    pub fn add(&self, b: &Block) -> State {
        let mut s = self.clone();
        if b.is_positive() {
            s.plus.insert(*b);
        } else {
            s.minus.remove(b);
        }
        s
    }

    /// Remove a convex box: positive boxes leave λ⁺, negative boxes join λ⁻.
    pub fn remove(&self, b: &Block) -> State {
        let mut s = self.clone();
        if b.is_positive() {
            s.plus.remove(b);
        } else {
            s.minus.insert(*b);
        }
        s
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks().map(|b| b.to_string()).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

/// Ψ · ∏_{λ⁺} A⁻¹ · ∏_{λ⁻} A, with every position multiplied by `shift`.
pub fn lweight_shifted(state: &State, psi: &LWeightPair, shift: Monomial) -> LWeightPair {
    let mut out = psi.clone();
    for b in &state.plus {
        out = out.div(&affine_root(b.color, shift * position(b)));
    }
    for b in &state.minus {
        out = out.mul(&affine_root(b.color, shift * position(b)));
    }
    out
}

pub fn lweight(state: &State, psi: &LWeightPair) -> LWeightPair {
    lweight_shifted(state, psi, Monomial::ONE)
}

/// The contribution of one box of λ to its ℓ-weight.
pub fn box_factor(b: &Block, shift: Monomial) -> LWeightPair {
    let a = affine_root(b.color, shift * position(b));
    if b.is_positive() {
        a.inv()
    } else {
        a
    }
}

/// (φ_{λ,<□}, φ_{λ,>□}), excluding □ itself.
///
/// Ψ sits in the first part when □ is positive and in the second when □
/// is negative: the reference ℓ-weight stands for the filled negative
/// region, which lies between negative and positive boxes.
pub fn lweight_split(
    state: &State,
    psi: &LWeightPair,
    b: &Block,
    group_rank: &[u8],
    shift: Monomial,
) -> Result<(LWeightPair, LWeightPair), Error> {
    let mut before = LWeightPair::one();
    let mut after = LWeightPair::one();
    for other in state.blocks() {
        if other == b {
            continue;
        }
        let f = box_factor(other, shift);
        match box_order(other, b, group_rank)? {
            Ordering::Less => before = before.mul(&f),
            _ => after = after.mul(&f),
        }
    }
    if b.is_positive() {
        before = psi.mul(&before);
    } else {
        after = psi.mul(&after);
    }
    Ok((before, after))
}

/// (deg₀, deg₁): positive boxes count +1 in their color, negative −1.
pub fn state_degree(state: &State) -> (i64, i64) {
    let mut d = [0i64; 2];
    for b in &state.plus {
        d[b.color as usize] += 1;
    }
    for b in &state.minus {
        d[b.color as usize] -= 1;
    }
    (d[0], d[1])
}
