//! Module families: box universes, reference ℓ-weights, validity.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;

use crate::algebra::{Gen, Monomial, Specialization};
use crate::boxes::{self, Block, Shifted, Sign, State};
use crate::rational::{weight_one, weight_zero, FactoredRatZ, LWeightPair};
use crate::Error;

type Coord = (i64, Shifted, i64);

/// Escape hatch for experiments and negative tests: an arbitrary universe
/// plus an extra validity predicate. Colors follow the usual x + z rule.
#[derive(Clone)]
pub struct CustomFamily {
    pub classify: Arc<dyn Fn(Coord) -> Option<(u8, Sign)> + Send + Sync>,
    pub seeds: Vec<Coord>,
    pub valid: Arc<dyn Fn(&State) -> bool + Send + Sync>,
}

#[derive(Clone)]
pub enum FamilyKind {
    Vector,
    Fock,
    Macmahon,
    Restricted { prohibited: (i64, i64, i64) },
    Verma,
    Relaxed,
    Slanted { m: i64 },
    Custom(CustomFamily),
}

impl fmt::Debug for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Vector => write!(f, "Vector"),
            FamilyKind::Fock => write!(f, "Fock"),
            FamilyKind::Macmahon => write!(f, "Macmahon"),
            FamilyKind::Restricted { prohibited } => write!(f, "Restricted{prohibited:?}"),
            FamilyKind::Verma => write!(f, "Verma"),
            FamilyKind::Relaxed => write!(f, "Relaxed"),
            FamilyKind::Slanted { m } => write!(f, "Slanted({m})"),
            FamilyKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

// group tags
const BOTTOM: u8 = 0;
const PEDESTAL: u8 = 1;
const TOWER: u8 = 2;
// in the evaluation Verma family the z = 1 group is the larger one
const VERMA_PEDESTAL: u8 = 0;
const VERMA_BOTTOM: u8 = 1;

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub kind: FamilyKind,
    /// Colors of the universe are the x + z parity XOR this bit.
    pub color: u8,
    pub psi: LWeightPair,
    /// Every position is multiplied by this monomial.
    pub shift: Monomial,
    /// rank of each group tag in the box order
    pub group_rank: Vec<u8>,
    /// Applied to Ψ and positions.
    pub specialization: Option<Specialization>,
}

/// Concave and convex boxes, by color.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CcCv {
    pub cc: [Vec<Block>; 2],
    pub cv: [Vec<Block>; 2],
}

impl CcCv {
    pub fn total(&self) -> usize {
        self.cc[0].len() + self.cc[1].len() + self.cv[0].len() + self.cv[1].len()
    }
}

fn unshifted(y: &Shifted) -> bool {
    y.mu == 0 && y.nu == 0
}

fn vector_psi() -> LWeightPair {
    let q = Monomial::q();
    weight_zero(q.inv()).mul(&weight_one(q * Monomial::q1()).inv())
}

fn macmahon_psi() -> LWeightPair {
    let k = Monomial::kappa();
    LWeightPair::new(FactoredRatZ::new(1, k, &[k.pow(-2)], &[Monomial::ONE]), FactoredRatZ::one())
}

/// q^{-μ} = U^{1/2}
fn q_minus_mu() -> Monomial {
    Monomial::from_halves([0, 0, 1, 0, 0])
}

fn verma_psi() -> LWeightPair {
    let (q3, u) = (Monomial::q3(), Monomial::u());
    let c0 = FactoredRatZ::new(1, q3 * q_minus_mu(), &[q3.pow(-2)], &[u]);
    let c1 = FactoredRatZ::new(1, q_minus_mu().inv(), &[q3.inv() * u], &[q3.inv()]);
    LWeightPair::new(c0, c1)
}

fn relaxed_psi() -> LWeightPair {
    let (q1, q2, q3) = (Monomial::q1(), Monomial::q2(), Monomial::q3());
    let (u, v) = (Monomial::u(), Monomial::v());
    let uv = u * v;
    // q^{-μ-2ν} = U^{1/2} V
    let lead = q_minus_mu() * v;
    let c0 = FactoredRatZ::new(1, q3 * lead, &[q3.pow(-2), u * q2], &[uv, uv * q2]);
    let c1 = FactoredRatZ::new(1, lead.inv(), &[q3.inv() * uv, q1.inv() * uv], &[q3.inv(), q1.inv() * u]);
    LWeightPair::new(c0, c1)
}

pub fn slanted_psi(m: i64) -> LWeightPair {
    let (q1, q2, q3) = (Monomial::q1(), Monomial::q2(), Monomial::q3());
    let (u, v) = (Monomial::u(), Monomial::v());
    let uv = u * v;
    let m = m as i32;
    let lead = q_minus_mu() * v;
    let stair = |i: i32| q1.pow(i) * q3.pow(-i);
    let mut z0 = vec![q3.pow(-2), q1.inv() * q3.inv() * u];
    z0.extend((1..m).map(|i| uv * stair(i)));
    let p0: Vec<Monomial> = (0..=m).map(|i| uv * q2 * stair(i)).collect();
    let c0 = FactoredRatZ::new(1, lead * q3.pow(1 - m), &z0, &p0);
    let z1: Vec<Monomial> = (0..=m + 1).map(|i| q1.pow(i - 1) * q3.pow(-i) * uv).collect();
    let mut p1 = vec![q3.inv(), q1.inv() * u];
    p1.extend((0..m).map(|i| q1.pow(i + 1) * q3.pow(-i) * uv));
    let c1 = FactoredRatZ::new(1, lead.inv() * q3.pow(m), &z1, &p1);
    LWeightPair::new(c0, c1)
}

impl FamilySpec {
    fn base(name: &str, kind: FamilyKind, psi: LWeightPair, color: u8) -> Self {
        let psi = if color == 0 { psi } else { psi.swap_colors() };
        FamilySpec { name: name.to_string(), kind, color, psi, shift: Monomial::ONE, group_rank: vec![0, 1, 2], specialization: None }
    }

    pub fn reference(&self) -> State {
        State::empty()
    }

    pub fn has_negative_boxes(&self) -> bool {
        matches!(self.kind, FamilyKind::Vector | FamilyKind::Relaxed | FamilyKind::Slanted { .. })
    }

    /// Position of a box in this family (shift and specialization applied).
    pub fn position(&self, b: &Block) -> Monomial {
        let p = self.shift * boxes::position(b);
        match &self.specialization {
            Some(s) => p.specialize(s).expect("integral positions always specialize"),
            None => p,
        }
    }

    pub fn lweight(&self, state: &State) -> LWeightPair {
        let mut out = self.psi.clone();
        for b in state.blocks() {
            out = out.mul(&self.box_factor(b));
        }
        out
    }

    /// A structure constant such as q₁ under the family's specialization.
    pub fn param(&self, m: Monomial) -> Monomial {
        match &self.specialization {
            Some(s) => m.specialize(s).expect("integral monomials always specialize"),
            None => m,
        }
    }

    pub fn box_factor(&self, b: &Block) -> LWeightPair {
        let generic = boxes::affine_root(b.color, self.shift * boxes::position(b));
        let a = match &self.specialization {
            Some(s) => generic.specialize(s).expect("integral positions always specialize"),
            None => generic,
        };
        if b.is_positive() {
            a.inv()
        } else {
            a
        }
    }

    pub fn order(&self, a: &Block, b: &Block) -> Result<std::cmp::Ordering, Error> {
        boxes::box_order(a, b, &self.group_rank)
    }

    /// (φ_{λ,<□}, φ_{λ,>□})
    pub fn split(&self, state: &State, b: &Block) -> Result<(LWeightPair, LWeightPair), Error> {
        let mut before = LWeightPair::one();
        let mut after = LWeightPair::one();
        for other in state.blocks() {
            if other == b {
                continue;
            }
            let f = self.box_factor(other);
            if self.order(other, b)? == std::cmp::Ordering::Less {
                before = before.mul(&f);
            } else {
                after = after.mul(&f);
            }
        }
        if b.is_positive() {
            before = self.psi.mul(&before);
        } else {
            after = self.psi.mul(&after);
        }
        Ok((before, after))
    }

    pub fn shift_twist(&self, a: Monomial) -> Self {
        let mut out = self.clone();
        out.shift = out.shift * a;
        out.psi = out.psi.scale_roots(a);
        out
    }

    /// Exchange colors everywhere (universe, Ψ, states).
    pub fn swap_colors(&self) -> Self {
        let mut out = self.clone();
        out.color ^= 1;
        out.psi = out.psi.swap_colors();
        out
    }

    pub fn specialize(&self, s: &Specialization) -> Result<Self, Error> {
        let mut out = self.clone();
        out.psi = out.psi.specialize(s)?;
        out.specialization = Some(match &self.specialization {
            None => s.clone(),
            Some(prev) => compose(prev, s)?,
        });
        Ok(out)
    }

    pub fn with_group_order(&self, rank: Vec<u8>) -> Self {
        let mut out = self.clone();
        out.group_rank = rank;
        out
    }

    pub fn describe(&self) -> serde_json::Value {
        let mut params = json!({ "color": self.color, "shift": self.shift });
        match &self.kind {
            FamilyKind::Slanted { m } => params["m"] = json!(m),
            FamilyKind::Restricted { prohibited } => params["prohibited"] = json!([prohibited.0, prohibited.1, prohibited.2]),
            _ => {}
        }
        if let Some(s) = &self.specialization {
            params["specialize"] = json!(s.to_string());
        }
        json!({ "name": self.name, "params": params })
    }

    fn color_of(&self, x: i64, z: i64) -> u8 {
        ((x + z).rem_euclid(2) as u8) ^ self.color
    }

    /// Which group (and sign) a coordinate belongs to, if any.
    pub fn classify(&self, (x, y, z): Coord) -> Option<(u8, Sign)> {
        use Sign::*;
        let tower_sign = if y.int >= 0 { Positive } else { Negative };
        match &self.kind {
            FamilyKind::Vector => (unshifted(&y) && y.int == 0 && z == 0).then_some((0, if x < 0 { Negative } else { Positive })),
            FamilyKind::Fock => (unshifted(&y) && y.int == 0 && x >= 0 && z >= 0).then_some((0, Positive)),
            FamilyKind::Macmahon | FamilyKind::Restricted { .. } => {
                (unshifted(&y) && x >= 0 && y.int >= 0 && z >= 0).then_some((0, Positive))
            }
            FamilyKind::Verma => {
                if z == 1 && unshifted(&y) && x >= 0 && y.int >= 0 {
                    Some((VERMA_BOTTOM, Positive))
                } else if z == 0 && y.mu == 1 && y.nu == 0 && x >= 0 && y.int >= 0 {
                    Some((VERMA_PEDESTAL, Positive))
                } else {
                    None
                }
            }
            FamilyKind::Relaxed | FamilyKind::Slanted { .. } => {
                if z == 1 && unshifted(&y) && x >= 0 && y.int >= 0 {
                    return Some((BOTTOM, Positive));
                }
                if z == 0 && y.mu == 1 && y.nu == 0 && x >= 1 && y.int >= 0 {
                    return Some((PEDESTAL, Positive));
                }
                if y.mu != 1 || y.nu != 1 {
                    return None;
                }
                let m = match &self.kind {
                    FamilyKind::Slanted { m } => *m,
                    _ => 0,
                };
                let white = z >= 0 && z <= m && x == -z;
                let black = z >= 0 && z < m && x == -1 - z;
                (white || black).then_some((TOWER, tower_sign))
            }
            FamilyKind::Custom(c) => (c.classify)((x, y, z)),
        }
    }

    pub fn block_at(&self, coord: Coord) -> Option<Block> {
        let (group, sign) = self.classify(coord)?;
        let (x, y, z) = coord;
        Some(Block::new(x, y, z, self.color_of(x, z), sign, group))
    }

    fn seeds(&self) -> Vec<Coord> {
        let s = Shifted::int;
        match &self.kind {
            FamilyKind::Vector => vec![(0, s(0), 0), (-1, s(0), 0)],
            FamilyKind::Fock | FamilyKind::Macmahon | FamilyKind::Restricted { .. } => vec![(0, s(0), 0)],
            FamilyKind::Verma => vec![(0, s(0), 1), (0, Shifted::new(0, 1, 0), 0)],
            FamilyKind::Relaxed | FamilyKind::Slanted { .. } => {
                let m = match &self.kind {
                    FamilyKind::Slanted { m } => *m,
                    _ => 0,
                };
                let mut out = vec![(0, s(0), 1), (1, Shifted::new(0, 1, 0), 0)];
                for (x, z) in tower_columns(m) {
                    out.push((x, Shifted::new(0, 1, 1), z));
                    out.push((x, Shifted::new(-1, 1, 1), z));
                }
                out
            }
            FamilyKind::Custom(c) => c.seeds.clone(),
        }
    }

    pub fn is_valid(&self, state: &State) -> bool {
        for b in state.blocks() {
            match self.block_at(b.coords()) {
                Some(expected) if expected == *b => {}
                _ => return false,
            }
        }
        if !state.plus.iter().all(|b| b.is_positive()) || !state.minus.iter().all(|b| !b.is_positive()) {
            return false;
        }
        match &self.kind {
            FamilyKind::Vector => line_valid(state.plus.iter().map(|b| b.x), state.minus.iter().map(|b| b.x)),
            FamilyKind::Custom(c) => (c.valid)(state),
            FamilyKind::Restricted { prohibited } => {
                let (i, j, k) = *prohibited;
                let hit = state.plus.iter().any(|b| b.coords() == (i, Shifted::int(j), k));
                !hit && self.ideal_valid(state)
            }
            FamilyKind::Relaxed | FamilyKind::Slanted { .. } => {
                let Some(cols) = tower_heights(state) else { return false };
                if let FamilyKind::Slanted { m } = self.kind {
                    let (a, b) = staircase_from_heights(m, &cols);
                    if !tower_condition(&a, &b) {
                        return false;
                    }
                }
                self.ideal_valid(state)
            }
            _ => self.ideal_valid(state),
        }
    }

    /// Positive boxes outside towers form order ideals within their group.
    fn ideal_valid(&self, state: &State) -> bool {
        for b in &state.plus {
            if b.group == TOWER && matches!(self.kind, FamilyKind::Relaxed | FamilyKind::Slanted { .. }) {
                continue;
            }
            let (x, y, z) = b.coords();
            for c in [(x - 1, y, z), (x, y.step(-1), z), (x, y, z - 1)] {
                if let Some(pred) = self.block_at(c) {
                    if pred.group == b.group && pred.is_positive() && !state.plus.contains(&pred) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn candidates(&self, state: &State) -> BTreeSet<Block> {
        let mut coords: HashSet<Coord> = self.seeds().into_iter().collect();
        for b in state.blocks() {
            let (x, y, z) = b.coords();
            coords.extend([(x, y, z), (x + 1, y, z), (x - 1, y, z), (x, y.step(1), z), (x, y.step(-1), z), (x, y, z + 1), (x, y, z - 1)]);
        }
        coords.into_iter().filter_map(|c| self.block_at(c)).collect()
    }

    pub fn concave_convex(&self, state: &State) -> Result<CcCv, Error> {
        if !self.is_valid(state) {
            return Err(Error::InvalidState(state.to_string()));
        }
        let mut out = CcCv::default();
        for b in self.candidates(state) {
            let c = b.color as usize;
            // a box currently in the state can only be removed if positive,
            // re-added if negative; otherwise the other way round
            let addable = if b.is_positive() { !state.contains(&b) } else { state.contains(&b) };
            if addable {
                if self.is_valid(&state.add(&b)) {
                    out.cc[c].push(b);
                }
            } else if self.is_valid(&state.remove(&b)) {
                out.cv[c].push(b);
            }
        }
        for v in out.cc.iter_mut().chain(out.cv.iter_mut()) {
            v.sort_by(|a, b| self.order(a, b).unwrap_or_else(|_| a.cmp(b)));
        }
        Ok(out)
    }

    /// All states within `bound` moves of the reference, with their distance,
    /// sorted by (distance, state).
    pub fn enumerate_with_distance(&self, bound: usize) -> Vec<(State, usize)> {
        let mut seen: HashSet<State> = HashSet::new();
        let reference = self.reference();
        seen.insert(reference.clone());
        let mut out = vec![(reference.clone(), 0)];
        let mut frontier = vec![reference];
        for dist in 1..=bound {
            let next: Vec<Vec<State>> = frontier
                .par_iter()
                .map(|s| {
                    let cc = self.concave_convex(s).expect("enumerated states are valid");
                    let adds = cc.cc.iter().flatten().map(|b| s.add(b));
                    let rems = cc.cv.iter().flatten().map(|b| s.remove(b));
                    adds.chain(rems).collect()
                })
                .collect();
            let mut level: Vec<State> = Vec::new();
            for s in next.into_iter().flatten() {
                if seen.insert(s.clone()) {
                    level.push(s);
                }
            }
            level.sort();
            out.extend(level.iter().map(|s| (s.clone(), dist)));
            frontier = level;
        }
        out
    }

    pub fn enumerate_states(&self, bound: usize) -> Vec<State> {
        self.enumerate_with_distance(bound).into_iter().map(|(s, _)| s).collect()
    }

    /// Human-readable label of a state (see [`FamilySpec::parse_state`]).
    pub fn label(&self, state: &State) -> String {
        let part = |v: Vec<i64>| -> String {
            if v.is_empty() {
                "∅".to_string()
            } else {
                v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        match &self.kind {
            FamilyKind::Vector => (state.plus.len() as i64 - state.minus.len() as i64).to_string(),
            FamilyKind::Fock => part(rows_by(state.plus.iter(), |b| b.z)),
            FamilyKind::Macmahon | FamilyKind::Restricted { .. } => {
                let mut layers: BTreeMap<i64, Vec<&Block>> = BTreeMap::new();
                for b in &state.plus {
                    layers.entry(b.y.int).or_default().push(b);
                }
                if layers.is_empty() {
                    return "∅".into();
                }
                layers.values().map(|l| part(rows_by(l.iter().copied(), |b| b.z))).collect::<Vec<_>>().join("/")
            }
            FamilyKind::Verma => {
                let ped = columns(state, VERMA_PEDESTAL, 0);
                let bot = columns(state, VERMA_BOTTOM, 0);
                format!("{}|{}", part(ped), part(bot))
            }
            FamilyKind::Relaxed | FamilyKind::Slanted { .. } => {
                let ped = columns(state, PEDESTAL, 1);
                let bot = columns(state, BOTTOM, 0);
                let cols = tower_heights(state).unwrap_or_default();
                let tower = match self.kind {
                    FamilyKind::Slanted { m } => {
                        let (a, b) = staircase_from_heights(m, &cols);
                        format!("{};{}", join(&a), join(&b))
                    }
                    _ => cols.get(&(0, 0)).copied().unwrap_or(0).to_string(),
                };
                format!("{}|{}|{}", part(ped), part(bot), tower)
            }
            FamilyKind::Custom(_) => state.to_string(),
        }
    }

    /// Parse a state label.
    ///
    /// * vector: `k`
    /// * fock: row lengths `4,2,1` (rows along x, stacked in z)
    /// * macmahon and restricted: layers in y, `4,2,1/3,1/1`
    /// * verma: vertical partitions `pedestal|bottom`, e.g. `4,2,1,1|2,1,1`
    /// * relaxed: `pedestal|bottom|k`
    /// * slanted: `pedestal|bottom|a0,..,am;b0,..,b(m-1)`
    ///
    /// `∅`, `-` or an empty string denote the empty partition. A JSON
    /// array of boxes `[{"x":..,"y":[int,mu,nu],"z":..}]` is accepted for
    /// every family.
    pub fn parse_state(&self, label: &str) -> Result<State, Error> {
        let label = label.trim();
        let state = if label.starts_with('[') { self.parse_json_state(label)? } else { self.parse_label(label)? };
        if !self.is_valid(&state) {
            return Err(Error::InvalidState(label.to_string()));
        }
        Ok(state)
    }

    fn parse_json_state(&self, label: &str) -> Result<State, Error> {
        let v: serde_json::Value = serde_json::from_str(label).map_err(|e| Error::Parse(e.to_string()))?;
        let arr = v.as_array().ok_or_else(|| Error::Parse("expected an array of boxes".into()))?;
        let mut blocks = Vec::new();
        for b in arr {
            let int = |key: &str| -> Result<i64, Error> {
                let f = &b[key];
                f.as_i64().or_else(|| f.get(0).and_then(|v| v.as_i64())).ok_or_else(|| Error::Parse(format!("box field {key}")))
            };
            let y = &b["y"];
            let y = match y.as_array() {
                Some(a) => Shifted::new(
                    a.first().and_then(|v| v.as_i64()).unwrap_or(0),
                    a.get(1).and_then(|v| v.as_i64()).unwrap_or(0),
                    a.get(2).and_then(|v| v.as_i64()).unwrap_or(0),
                ),
                None => Shifted::int(int("y")?),
            };
            let coord = (int("x")?, y, int("z")?);
            let blk = self.block_at(coord).ok_or_else(|| Error::InvalidState(format!("box {coord:?} not in universe")))?;
            blocks.push(blk);
        }
        Ok(State::from_blocks(blocks))
    }

    fn parse_label(&self, label: &str) -> Result<State, Error> {
        let bad = || Error::Parse(format!("cannot parse state `{label}` for family {}", self.name));
        let mk = |c: Coord| self.block_at(c).ok_or_else(|| Error::InvalidState(format!("{c:?} outside universe")));
        let mut blocks = Vec::new();
        match &self.kind {
            FamilyKind::Vector => {
                let k: i64 = label.parse().map_err(|_| bad())?;
                let xs: Vec<i64> = if k >= 0 { (0..k).collect() } else { (k..0).collect() };
                for x in xs {
                    blocks.push(mk((x, Shifted::int(0), 0))?);
                }
            }
            FamilyKind::Fock => {
                for (z, len) in parse_partition(label).ok_or_else(bad)?.into_iter().enumerate() {
                    for x in 0..len {
                        blocks.push(mk((x, Shifted::int(0), z as i64))?);
                    }
                }
            }
            FamilyKind::Macmahon | FamilyKind::Restricted { .. } => {
                if !is_empty_label(label) {
                    for (y, layer) in label.split('/').enumerate() {
                        for (z, len) in parse_partition(layer).ok_or_else(bad)?.into_iter().enumerate() {
                            for x in 0..len {
                                blocks.push(mk((x, Shifted::int(y as i64), z as i64))?);
                            }
                        }
                    }
                }
            }
            FamilyKind::Verma | FamilyKind::Relaxed | FamilyKind::Slanted { .. } => {
                let parts: Vec<&str> = label.split('|').collect();
                let want = if matches!(self.kind, FamilyKind::Verma) { 2 } else { 3 };
                if parts.len() != want {
                    return Err(bad());
                }
                let x0 = if matches!(self.kind, FamilyKind::Verma) { 0 } else { 1 };
                for (x, h) in parse_partition(parts[0]).ok_or_else(bad)?.into_iter().enumerate() {
                    for k in 0..h {
                        blocks.push(mk((x as i64 + x0, Shifted::new(k, 1, 0), 0))?);
                    }
                }
                for (x, h) in parse_partition(parts[1]).ok_or_else(bad)?.into_iter().enumerate() {
                    for k in 0..h {
                        blocks.push(mk((x as i64, Shifted::int(k), 1))?);
                    }
                }
                if want == 3 {
                    let heights: Vec<((i64, i64), i64)> = match self.kind {
                        FamilyKind::Slanted { m } => {
                            let (a, b) = parts[2].split_once(';').ok_or_else(bad)?;
                            let a = parse_ints(a).ok_or_else(bad)?;
                            let b = parse_ints(b).ok_or_else(bad)?;
                            if a.len() != m as usize + 1 || b.len() != m as usize {
                                return Err(bad());
                            }
                            let mut h: Vec<((i64, i64), i64)> = a.iter().enumerate().map(|(s, v)| ((-(s as i64), s as i64), *v)).collect();
                            h.extend(b.iter().enumerate().map(|(s, v)| ((-1 - s as i64, s as i64), *v)));
                            h
                        }
                        _ => vec![((0, 0), parts[2].trim().parse().map_err(|_| bad())?)],
                    };
                    for ((x, z), h) in heights {
                        let ints: Vec<i64> = if h >= 0 { (0..h).collect() } else { (h..0).collect() };
                        for k in ints {
                            blocks.push(mk((x, Shifted::new(k, 1, 1), z))?);
                        }
                    }
                }
            }
            FamilyKind::Custom(_) => return Err(bad()),
        }
        Ok(State::from_blocks(blocks))
    }
}

fn compose(first: &Specialization, then: &Specialization) -> Result<Specialization, Error> {
    let mut out = Specialization::new();
    for g in Gen::ALL {
        let img = match first.image(g) {
            Some(m) => m.specialize(then)?,
            None => match then.image(g) {
                Some(m) => m,
                None => continue,
            },
        };
        out = out.with(g, img);
    }
    Ok(out)
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn is_empty_label(s: &str) -> bool {
    matches!(s.trim(), "" | "∅" | "-" | "0")
}

fn parse_ints(s: &str) -> Option<Vec<i64>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn parse_partition(s: &str) -> Option<Vec<i64>> {
    if is_empty_label(s) {
        return Some(Vec::new());
    }
    let v = parse_ints(s)?;
    v.iter().all(|p| *p > 0).then_some(v)
}

/// Counts of boxes per value of `key`, listed for key = 0, 1, ...
fn rows_by<'a>(blocks: impl Iterator<Item = &'a Block>, key: impl Fn(&Block) -> i64) -> Vec<i64> {
    let mut rows: BTreeMap<i64, i64> = BTreeMap::new();
    for b in blocks {
        *rows.entry(key(b)).or_default() += 1;
    }
    rows.into_values().collect()
}

fn columns(state: &State, group: u8, _x0: i64) -> Vec<i64> {
    rows_by(state.plus.iter().filter(|b| b.group == group), |b| b.x)
}

/// Tower columns (x, z) for slope m; m = 0 is the single relaxed column.
pub fn tower_columns(m: i64) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = (0..=m).map(|s| (-s, s)).collect();
    out.extend((0..m).map(|s| (-1 - s, s)));
    out
}

/// Net heights of the tower columns, or None if some column is not a
/// contiguous run from the base (positives 0.., negatives ..−1, not both).
pub fn tower_heights(state: &State) -> Option<BTreeMap<(i64, i64), i64>> {
    let mut pos: BTreeMap<(i64, i64), Vec<i64>> = BTreeMap::new();
    let mut neg: BTreeMap<(i64, i64), Vec<i64>> = BTreeMap::new();
    for b in state.plus.iter().filter(|b| b.group == TOWER) {
        pos.entry((b.x, b.z)).or_default().push(b.y.int);
    }
    for b in state.minus.iter().filter(|b| b.group == TOWER) {
        neg.entry((b.x, b.z)).or_default().push(b.y.int);
    }
    let mut out = BTreeMap::new();
    for (col, ys) in &pos {
        if neg.contains_key(col) {
            return None;
        }
        let mut ys = ys.clone();
        ys.sort();
        if ys.iter().enumerate().any(|(i, y)| *y != i as i64) {
            return None;
        }
        out.insert(*col, ys.len() as i64);
    }
    for (col, ys) in &neg {
        let mut ys = ys.clone();
        ys.sort_by(|a, b| b.cmp(a));
        if ys.iter().enumerate().any(|(i, y)| *y != -1 - i as i64) {
            return None;
        }
        out.insert(*col, -(ys.len() as i64));
    }
    Some(out)
}

fn line_valid(plus: impl Iterator<Item = i64>, minus: impl Iterator<Item = i64>) -> bool {
    let mut p: Vec<i64> = plus.collect();
    let mut n: Vec<i64> = minus.collect();
    if !p.is_empty() && !n.is_empty() {
        return false;
    }
    p.sort();
    n.sort_by(|a, b| b.cmp(a));
    p.iter().enumerate().all(|(i, x)| *x == i as i64) && n.iter().enumerate().all(|(i, x)| *x == -1 - i as i64)
}

/// (a₀..a_m, b₀..b_{m−1}) from column heights.
pub fn staircase_from_heights(m: i64, cols: &BTreeMap<(i64, i64), i64>) -> (Vec<i64>, Vec<i64>) {
    let a = (0..=m).map(|s| cols.get(&(-s, s)).copied().unwrap_or(0)).collect();
    let b = (0..m).map(|s| cols.get(&(-1 - s, s)).copied().unwrap_or(0)).collect();
    (a, b)
}

/// b_s ≥ a_s and b_s ≥ a_{s+1}
pub fn tower_condition(a: &[i64], b: &[i64]) -> bool {
    b.iter().enumerate().all(|(s, bs)| *bs >= a[s] && *bs >= a[s + 1])
}

pub fn make_vector(color: u8) -> FamilySpec {
    FamilySpec::base("vector", FamilyKind::Vector, vector_psi(), color)
}

pub fn make_fock(color: u8) -> FamilySpec {
    FamilySpec::base("fock", FamilyKind::Fock, weight_zero(Monomial::q().inv()), color)
}

/// κ stays a formal generator.
pub fn make_macmahon(color: u8) -> FamilySpec {
    FamilySpec::base("macmahon", FamilyKind::Macmahon, macmahon_psi(), color)
}

/// Macmahon with one white box excluded and κ² = p(□)⁻¹.
pub fn make_restricted_macmahon(color: u8, prohibited: (i64, i64, i64)) -> Result<FamilySpec, Error> {
    let (i, j, k) = prohibited;
    let white = (i + k).rem_euclid(2) == 0;
    if i < 0 || j < 0 || k < 0 || !white || i.min(j).min(k) >= 1 {
        return Err(Error::InvalidProhibitedBox(format!("({i},{j},{k})")));
    }
    let probe = Block::new(i, Shifted::int(j), k, 0, Sign::Positive, 0);
    let kappa = boxes::position(&probe).inv().sqrt().ok_or_else(|| Error::InvalidProhibitedBox(format!("({i},{j},{k})")))?;
    let spec = Specialization::new().with(Gen::Kappa, kappa);
    let mut fam = FamilySpec::base("restricted-macmahon", FamilyKind::Restricted { prohibited }, macmahon_psi(), color);
    fam.psi = fam.psi.specialize(&spec)?;
    fam.specialization = Some(spec);
    Ok(fam)
}

/// G₀: plane partitions avoiding (0,0,2), κ = q₃.
pub fn make_g0(color: u8) -> FamilySpec {
    let mut f = make_restricted_macmahon(color, (0, 0, 2)).expect("(0,0,2) is admissible");
    f.name = "g0".into();
    f
}

pub fn make_eval_verma() -> FamilySpec {
    FamilySpec::base("verma", FamilyKind::Verma, verma_psi(), 0)
}

pub fn make_relaxed_verma() -> FamilySpec {
    FamilySpec::base("relaxed", FamilyKind::Relaxed, relaxed_psi(), 0)
}

pub fn make_slanted(m: i64) -> Result<FamilySpec, Error> {
    if m < 1 {
        return Err(Error::InvalidSlope(m));
    }
    Ok(FamilySpec::base("slanted", FamilyKind::Slanted { m }, slanted_psi(m), 0))
}

/// Plane partitions with two layers in y but no containment between the
/// layers. Not a module: the ℓ-weights acquire double poles.
pub fn make_unstacked_layers() -> FamilySpec {
    let classify =
        Arc::new(|(x, y, z): Coord| (unshifted(&y) && x >= 0 && (0..2).contains(&y.int) && z >= 0).then_some((0u8, Sign::Positive)));
    let valid = Arc::new(|s: &State| {
        s.plus.iter().all(|b| {
            let (x, y, z) = b.coords();
            let has = |c: Coord| s.plus.iter().any(|o| o.coords() == c);
            (x == 0 || has((x - 1, y, z))) && (z == 0 || has((x, y, z - 1)))
        })
    });
    let custom = CustomFamily { classify, seeds: vec![(0, Shifted::int(0), 0), (0, Shifted::int(1), 0)], valid };
    FamilySpec::base("unstacked-layers", FamilyKind::Custom(custom), macmahon_psi(), 0)
}

pub fn shift_twist(family: &FamilySpec, a: Monomial) -> FamilySpec {
    family.shift_twist(a)
}

pub fn concave_convex(family: &FamilySpec, state: &State) -> Result<CcCv, Error> {
    family.concave_convex(state)
}

pub fn enumerate_states(family: &FamilySpec, bound: usize) -> Vec<State> {
    family.enumerate_states(bound)
}

/// Family by CLI name.
pub fn by_name(name: &str, color: u8, m: i64) -> Result<FamilySpec, Error> {
    let fam = match name {
        "vector" => make_vector(color),
        "fock" => make_fock(color),
        "macmahon" => make_macmahon(color),
        "g0" => make_g0(color),
        "verma" => make_eval_verma(),
        "relaxed" => make_relaxed_verma(),
        "slanted" => make_slanted(m)?,
        "unstacked-layers" | "broken" => make_unstacked_layers(),
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    // the last three constructors are color 0; swap for color 1
    if color == 1 && matches!(name, "verma" | "relaxed" | "slanted") {
        return Ok(fam.swap_colors());
    }
    Ok(fam)
}

pub const FAMILY_NAMES: &[&str] = &["vector", "fock", "macmahon", "g0", "verma", "relaxed", "slanted", "unstacked-layers"];

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(v: &[Block]) -> Vec<(i64, i64, i64)> {
        let mut out: Vec<_> = v.iter().map(|b| (b.x, b.y.int, b.z)).collect();
        out.sort();
        out
    }

    #[test]
    fn vector_states() {
        let f = make_vector(0);
        let s3 = f.parse_state("3").unwrap();
        assert_eq!(coords(&s3.plus.iter().copied().collect::<Vec<_>>()), vec![(0, 0, 0), (1, 0, 0), (2, 0, 0)]);
        let m1 = f.parse_state("-1").unwrap();
        assert!(m1.plus.is_empty());
        assert_eq!(m1.minus.iter().next().unwrap().x, -1);
        for k in -3..=3 {
            let s = f.parse_state(&k.to_string()).unwrap();
            let cc = f.concave_convex(&s).unwrap();
            let all_cc: Vec<Block> = cc.cc.concat();
            let all_cv: Vec<Block> = cc.cv.concat();
            assert_eq!(coords(&all_cc), vec![(k, 0, 0)]);
            assert_eq!(coords(&all_cv), vec![(k - 1, 0, 0)]);
        }
    }

    #[test]
    fn fock_421() {
        let f = make_fock(0);
        let s = f.parse_state("4,2,1").unwrap();
        let cc = f.concave_convex(&s).unwrap();
        assert_eq!(coords(&cc.cc.concat()), vec![(0, 0, 3), (1, 0, 2), (2, 0, 1), (4, 0, 0)]);
        assert_eq!(coords(&cc.cv.concat()), vec![(0, 0, 2), (1, 0, 1), (3, 0, 0)]);
        assert!(f.parse_state("1,2").is_err());
        assert_eq!(f.label(&s), "4,2,1");
        assert_eq!(boxes::state_degree(&s), (4, 3));
    }

    #[test]
    fn macmahon_states() {
        let f = make_macmahon(0);
        let s = f.parse_state("4,2,1/3,1/1").unwrap();
        assert_eq!(s.plus.len(), 12);
        assert!(f.parse_state("1/2").is_err());
        let cc = f.concave_convex(&State::empty()).unwrap();
        assert_eq!(coords(&cc.cc[0]), vec![(0, 0, 0)]);
        assert!(cc.cc[1].is_empty() && cc.cv.concat().is_empty());
    }

    #[test]
    fn restricted_families() {
        assert!(make_restricted_macmahon(0, (1, 1, 1)).is_err());
        assert!(make_restricted_macmahon(0, (0, 0, 1)).is_err());
        let fock_like = make_restricted_macmahon(0, (0, 1, 0)).unwrap();
        assert!(fock_like.parse_state("2,1/1").is_err());
        assert!(fock_like.parse_state("2,1").is_ok());
        let g0 = make_g0(0);
        assert!(g0.parse_state("4,3/2,1/1/1").is_ok());
        assert!(g0.parse_state("1,1,1").is_err());
    }

    #[test]
    fn verma_and_relaxed_labels() {
        let v = make_eval_verma();
        let s = v.parse_state("4,2,1,1|2,1,1").unwrap();
        assert_eq!(s.plus.len(), 12);
        assert_eq!(v.label(&s), "4,2,1,1|2,1,1");
        let r = make_relaxed_verma();
        let s = r.parse_state("2,2,1|2,1|2").unwrap();
        assert_eq!(r.label(&s), "2,2,1|2,1|2");
        let s = r.parse_state("∅|∅|-3").unwrap();
        let ys: Vec<i64> = s.minus.iter().map(|b| b.y.int).collect();
        assert_eq!(ys, vec![-3, -2, -1]);
    }

    #[test]
    fn slanted_constraint() {
        let f = make_slanted(1).unwrap();
        assert!(f.parse_state("2,2,1|2,1|2,1;2").is_ok());
        assert!(f.parse_state("∅|∅|1,0;0").is_err());
        assert!(make_slanted(0).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(make_fock(0).enumerate_states(4).len(), 12);
        assert_eq!(make_macmahon(0).enumerate_states(3).len(), 11);
        let v = make_vector(0);
        let labels: Vec<String> = v.enumerate_states(2).iter().map(|s| v.label(s)).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["-1", "-2", "0", "1", "2"]);
    }

    #[test]
    fn color_swap() {
        let a = make_fock(1);
        let b = make_fock(0).swap_colors();
        assert_eq!(a.psi, b.psi);
        assert_eq!(a.enumerate_states(4), b.enumerate_states(4));
    }
}
