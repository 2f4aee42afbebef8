//! The action of the currents on states, and the checkers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap as HashMap;
use serde::Serialize;

use crate::algebra::{Factored, FieldElement, Monomial};
use crate::boxes::{Block, State};
use crate::families::FamilySpec;
use crate::rational::{FactoredRatZ, LWeightPair};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Op {
    E,
    F,
}

#[derive(Clone, Debug)]
pub struct Transition {
    pub target: State,
    pub block: Block,
    pub support: Monomial,
    pub coeff: Factored,
}

/// E_i(z) or F_i(z) applied to one state.
#[derive(Clone, Debug)]
pub struct TransitionSet {
    pub op: Op,
    pub color: u8,
    pub entries: Vec<Transition>,
}

impl TransitionSet {
    pub fn as_map(&self) -> BTreeMap<(State, Monomial), FieldElement> {
        self.entries.iter().map(|t| ((t.target.clone(), t.support), t.coeff.to_field())).collect()
    }
}

/// Multiply one coefficient by `factor`; used to test that the checker
/// notices corrupted actions.
#[derive(Clone, Debug)]
pub struct Mutation {
    pub op: Op,
    pub source: State,
    pub block: Block,
    pub factor: Factored,
}

type TransKey = (State, Op, u8);
type TransResult = Arc<Result<Vec<Transition>, Error>>;
type StepResult = Arc<Result<Vec<Step>, Error>>;

/// Action of the algebra on one family, with memoized transitions.
pub struct Engine<'a> {
    pub family: &'a FamilySpec,
    consts: Consts,
    mutation: Option<Mutation>,
    trans: DashMap<TransKey, TransResult>,
    weights: DashMap<State, Arc<LWeightPair>>,
    ids: DashMap<State, u32>,
    list: RwLock<Vec<State>>,
    step_cache: DashMap<(u32, Op, u8), StepResult>,
}

/// q, q₁, q₂, q₃ of a family, after its specialization.
#[derive(Clone, Copy, Debug)]
struct Consts {
    q: Monomial,
    q1: Monomial,
    q2: Monomial,
    q3: Monomial,
}

impl Consts {
    const GENERIC: Consts = Consts { q: Monomial::Q, q1: Monomial::Q1, q2: Monomial::Q2, q3: Monomial::Q3 };

    fn of(family: &FamilySpec) -> Self {
        let c = Self::GENERIC;
        Consts { q: family.param(c.q), q1: family.param(c.q1), q2: family.param(c.q2), q3: family.param(c.q3) }
    }

    fn g(&self, i: u8, j: u8, a: Monomial, b: Monomial) -> Factored {
        if i == j {
            Factored::binomial(a, self.q2 * b)
        } else {
            Factored::binomial(a, self.q1 * b).mul(&Factored::binomial(a, self.q3 * b))
        }
    }

    /// g_{i,j}(z, p) as a function of z.
    fn g_in_first(&self, i: u8, j: u8, p: Monomial) -> FactoredRatZ {
        if i == j {
            FactoredRatZ::new(1, Monomial::ONE, &[self.q2 * p], &[])
        } else {
            FactoredRatZ::new(1, Monomial::ONE, &[self.q1 * p, self.q3 * p], &[])
        }
    }

    /// g_{i,j}(p, z) as a function of z.
    fn g_in_second(&self, i: u8, j: u8, p: Monomial) -> FactoredRatZ {
        if i == j {
            FactoredRatZ::new(-1, self.q2, &[p / self.q2], &[])
        } else {
            FactoredRatZ::new(1, self.q1 * self.q3, &[p / self.q1, p / self.q3], &[])
        }
    }

    /// q − q⁻¹
    fn q_minus_qinv(&self) -> Factored {
        Factored::binomial(self.q, self.q.inv())
    }
}

/// g_{i,j}(a, b)
pub fn g_factor(i: u8, j: u8, a: Monomial, b: Monomial) -> Factored {
    Consts::GENERIC.g(i, j, a, b)
}

pub fn g_eval(i: u8, j: u8, a: Monomial, b: Monomial) -> FieldElement {
    g_factor(i, j, a, b).to_field()
}

fn parity_sign(i: u8, j: u8) -> i8 {
    if (i + j).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl<'a> Engine<'a> {
    pub fn new(family: &'a FamilySpec) -> Self {
        Engine {
            family,
            consts: Consts::of(family),
            mutation: None,
            trans: DashMap::new(),
            weights: DashMap::new(),
            ids: DashMap::new(),
            list: RwLock::new(Vec::new()),
            step_cache: DashMap::new(),
        }
    }

    pub fn with_mutation(family: &'a FamilySpec, m: Mutation) -> Self {
        Engine { mutation: Some(m), ..Self::new(family) }
    }

    pub fn lweight(&self, s: &State) -> Arc<LWeightPair> {
        if let Some(w) = self.weights.get(s) {
            return w.clone();
        }
        let w = Arc::new(self.family.lweight(s));
        self.weights.insert(s.clone(), w.clone());
        w
    }

    pub fn transitions(&self, s: &State, op: Op, color: u8) -> TransResult {
        let key = (s.clone(), op, color);
        if let Some(t) = self.trans.get(&key) {
            return t.clone();
        }
        let t = Arc::new(self.compute(s, op, color));
        self.trans.insert(key, t.clone());
        t
    }

    fn compute(&self, s: &State, op: Op, color: u8) -> Result<Vec<Transition>, Error> {
        let cc = self.family.concave_convex(s)?;
        let boxes = match op {
            Op::F => &cc.cc[color as usize],
            Op::E => &cc.cv[color as usize],
        };
        let mut out = Vec::with_capacity(boxes.len());
        for b in boxes {
            let p = self.family.position(b);
            let (before, after) = self.family.split(s, b)?;
            let scale = self.consts.q_minus_qinv().inv()?;
            // a residue at a regular point is zero; this happens only when a
            // specialization cancels the pole (a prohibited box)
            let res = |f: &FactoredRatZ| if f.is_regular_at(p) { Ok(Factored::zero()) } else { f.residue(p) };
            let coeff = match (op, b.is_positive()) {
                (Op::F, true) => after.comp(color).eval(p)?,
                (Op::F, false) => res(after.comp(color))?.mul(&scale).neg(),
                (Op::E, true) => res(before.comp(color))?.mul(&scale),
                (Op::E, false) => before.comp(color).eval(p)?,
            };
            let coeff = match &self.mutation {
                Some(m) if m.op == op && m.source == *s && m.block == *b => coeff.mul(&m.factor),
                _ => coeff,
            };
            let target = match op {
                Op::F => s.add(b),
                Op::E => s.remove(b),
            };
            out.push(Transition { target, block: *b, support: p, coeff });
        }
        Ok(out)
    }

    fn set(&self, s: &State, op: Op, color: u8) -> Result<TransitionSet, Error> {
        if !self.family.is_valid(s) {
            return Err(Error::InvalidState(s.to_string()));
        }
        let entries = (*self.transitions(s, op, color)).clone()?;
        Ok(TransitionSet { op, color, entries })
    }

    pub fn act_k(&self, s: &State) -> Result<LWeightPair, Error> {
        if !self.family.is_valid(s) {
            return Err(Error::InvalidState(s.to_string()));
        }
        Ok((*self.lweight(s)).clone())
    }

    pub fn act_e(&self, s: &State, color: u8) -> Result<TransitionSet, Error> {
        self.set(s, Op::E, color)
    }

    pub fn act_f(&self, s: &State, color: u8) -> Result<TransitionSet, Error> {
        self.set(s, Op::F, color)
    }

    /// All coefficients with source in `states`, for mutation sweeps.
    pub fn coefficient_sites(&self, states: &[State]) -> Vec<(Op, State, Block)> {
        let mut out = Vec::new();
        for s in states {
            for op in [Op::E, Op::F] {
                for c in 0..2 {
                    if let Ok(ts) = &*self.transitions(s, op, c) {
                        out.extend(ts.iter().map(|t| (op, s.clone(), t.block)));
                    }
                }
            }
        }
        out
    }
}

pub fn act_k(family: &FamilySpec, s: &State) -> Result<LWeightPair, Error> {
    Engine::new(family).act_k(s)
}

pub fn act_e(family: &FamilySpec, s: &State, color: u8) -> Result<TransitionSet, Error> {
    Engine::new(family).act_e(s, color)
}

pub fn act_f(family: &FamilySpec, s: &State, color: u8) -> Result<TransitionSet, Error> {
    Engine::new(family).act_f(s, color)
}

// ---------------------------------------------------------------- relations

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub relation: String,
    pub state: String,
    pub colors: Vec<u8>,
    pub supports: Vec<Monomial>,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RelationReport {
    /// relation name → (passed, failed)
    pub counts: BTreeMap<String, (usize, usize)>,
    pub failures: Vec<CheckEntry>,
    /// number of nonzero Serre terms per support configuration → how often
    pub serre_terms: BTreeMap<usize, usize>,
    pub states: usize,
}

impl RelationReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn checked(&self) -> usize {
        self.counts.values().map(|(p, f)| p + f).sum()
    }

    fn merge(&mut self, o: RelationReport) {
        for (k, (p, f)) in o.counts {
            let e = self.counts.entry(k).or_default();
            e.0 += p;
            e.1 += f;
        }
        self.failures.extend(o.failures);
        for (k, v) in o.serre_terms {
            *self.serre_terms.entry(k).or_default() += v;
        }
        self.states += o.states;
    }

    fn tally(&mut self, rel: &str, ok: bool) {
        let e = self.counts.entry(rel.to_string()).or_default();
        if ok {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub serre: bool,
    /// Stop collecting after this many failures per state (0 = no limit).
    pub max_failures: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { serre: true, max_failures: 0 }
    }
}

struct Word {
    coef: Factored,
    /// left to right; applied right to left
    ops: Vec<(Op, u8, usize)>,
}

/// One matrix coefficient between interned states.
#[derive(Clone, Debug)]
struct Step {
    target: u32,
    support: Monomial,
    coeff: Factored,
}

/// (target, support of each variable); unused variables stay at 1.
type Key = (u32, [Monomial; 4]);

/// Terms of a formal sum, grouped by delta support.
#[derive(Default)]
struct Accum {
    terms: Vec<Factored>,
    groups: HashMap<Key, Vec<u32>>,
}

impl Accum {
    fn push(&mut self, key: Key, term: Factored) {
        let i = self.terms.len() as u32;
        self.terms.push(term);
        self.groups.entry(key).or_default().push(i);
    }

    fn group(&self, idx: &[u32]) -> Vec<&Factored> {
        idx.iter().map(|i| &self.terms[*i as usize]).collect()
    }
}

impl Engine<'_> {
    fn id_of(&self, s: &State) -> u32 {
        if let Some(i) = self.ids.get(s) {
            return *i;
        }
        *self.ids.entry(s.clone()).or_insert_with(|| {
            let mut list = self.list.write().expect("state table poisoned");
            list.push(s.clone());
            (list.len() - 1) as u32
        })
    }

    fn state_of(&self, id: u32) -> State {
        self.list.read().expect("state table poisoned")[id as usize].clone()
    }

    fn steps(&self, id: u32, op: Op, color: u8) -> StepResult {
        if let Some(t) = self.step_cache.get(&(id, op, color)) {
            return t.clone();
        }
        let s = self.state_of(id);
        let out = match &*self.transitions(&s, op, color) {
            Ok(ts) => Ok(ts.iter().map(|t| Step { target: self.id_of(&t.target), support: t.support, coeff: t.coeff.clone() }).collect()),
            Err(e) => Err(e.clone()),
        };
        let out = Arc::new(out);
        self.step_cache.insert((id, op, color), out.clone());
        out
    }

    fn paths(&self, start: u32, w: &Word) -> Result<Vec<(Key, Factored)>, Error> {
        let mut cur: Vec<(Key, Factored)> = vec![((start, [Monomial::ONE; 4]), w.coef.clone())];
        for &(op, color, var) in w.ops.iter().rev() {
            let mut next = Vec::new();
            for ((s, sup), c) in &cur {
                let steps = self.steps(*s, op, color);
                let steps = match &*steps {
                    Ok(v) => v,
                    Err(e) => return Err(e.clone()),
                };
                for t in steps {
                    let mut sup = *sup;
                    sup[var] = t.support;
                    next.push(((t.target, sup), c.mul(&t.coeff)));
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Check every relation at every state of `states`, following
    /// transitions out of the set where the relation requires it.
    pub fn check_relations(&self, states: &[State], opts: CheckOptions) -> RelationReport {
        let parts: Vec<RelationReport> = states.par_iter().map(|s| self.check_state(s, opts)).collect();
        let mut out = RelationReport::default();
        for p in parts {
            out.merge(p);
        }
        out
    }

    fn entry(&self, rel: &str, s: &State, colors: Vec<u8>, supports: Vec<Monomial>, lhs: String, rhs: String) -> CheckEntry {
        CheckEntry { relation: rel.to_string(), state: self.family.label(s), colors, supports, lhs, rhs, pass: false, note: None }
    }

    fn fail_action(&self, rep: &mut RelationReport, rel: &str, s: &State, colors: Vec<u8>, e: &Error) {
        rep.tally(rel, false);
        let mut en = self.entry(rel, s, colors, vec![], String::new(), String::new());
        en.note = Some(format!("action undefined: {e}"));
        rep.failures.push(en);
    }

    pub fn check_state(&self, s: &State, opts: CheckOptions) -> RelationReport {
        let mut rep = RelationReport { states: 1, ..Default::default() };
        self.check_cartan(s, &mut rep);
        self.check_quadratic(s, &mut rep);
        self.check_ef(s, &mut rep);
        if opts.serre {
            self.check_serre(s, &mut rep);
        }
        if opts.max_failures > 0 {
            rep.failures.truncate(opts.max_failures);
        }
        rep
    }

    fn check_cartan(&self, s: &State, rep: &mut RelationReport) {
        let phi = self.lweight(s);
        for op in [Op::E, Op::F] {
            let rel = if op == Op::E { "KE" } else { "KF" };
            for j in 0..2u8 {
                let ts = self.transitions(s, op, j);
                let ts = match &*ts {
                    Ok(v) => v,
                    Err(e) => {
                        self.fail_action(rep, rel, s, vec![j], e);
                        continue;
                    }
                };
                let c = &self.consts;
                for t in ts {
                    let psi = self.lweight(&t.target);
                    for i in 0..2u8 {
                        let ratio = psi.comp(i).div(phi.comp(i));
                        let p = t.support;
                        let sign = FactoredRatZ::constant(-parity_sign(i, j), Monomial::ONE);
                        let expect = match op {
                            Op::E => sign.mul(&c.g_in_second(j, i, p)).div(&c.g_in_first(i, j, p)),
                            Op::F => sign.mul(&c.g_in_first(i, j, p)).div(&c.g_in_second(j, i, p)),
                        };
                        let ok = ratio == expect;
                        rep.tally(rel, ok);
                        if !ok {
                            rep.failures.push(self.entry(rel, s, vec![i, j], vec![p], ratio.to_string(), expect.to_string()));
                        }
                    }
                }
            }
        }
    }

    fn accumulate(&self, start: u32, words: &[Word], pre: &dyn Fn(usize, &[Monomial; 4]) -> Factored) -> Result<Accum, Error> {
        let mut acc = Accum::default();
        for (wi, w) in words.iter().enumerate() {
            for (key, c) in self.paths(start, w)? {
                let term = c.mul(&pre(wi, &key.1));
                acc.push(key, term);
            }
        }
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn check_zero_sums<'k>(
        &self,
        rel: &str,
        s: &State,
        colors: &[u8],
        nvars: usize,
        acc: &Accum,
        groups: impl Iterator<Item = (&'k Key, &'k Vec<u32>)>,
        rep: &mut RelationReport,
    ) {
        let mut failed = Vec::new();
        for (key, idx) in groups {
            let terms = acc.group(idx);
            let ok = Factored::sum_is_zero_refs(&terms);
            rep.tally(rel, ok);
            if !ok {
                let owned: Vec<Factored> = terms.into_iter().cloned().collect();
                let lhs = Factored::sum_to_field(&owned).to_string();
                failed.push(self.entry(rel, s, colors.to_vec(), key.1[..nvars].to_vec(), lhs, "0".into()));
            }
        }
        failed.sort_by(|a, b| a.supports.cmp(&b.supports));
        rep.failures.extend(failed);
    }

    fn check_quadratic(&self, s: &State, rep: &mut RelationReport) {
        let start = self.id_of(s);
        for op in [Op::E, Op::F] {
            let rel = if op == Op::E { "EE" } else { "FF" };
            for i in 0..2u8 {
                for j in 0..2u8 {
                    let words = [
                        Word { coef: Factored::signed_monomial(parity_sign(i, j), Monomial::ONE), ops: vec![(op, i, 0), (op, j, 1)] },
                        Word { coef: Factored::one(), ops: vec![(op, j, 1), (op, i, 0)] },
                    ];
                    // E: (-1)^{i+j} g_ij(z,w) E_i(z)E_j(w) + g_ji(w,z) E_j(w)E_i(z)
                    // F: (-1)^{i+j} g_ji(w,z) F_i(z)F_j(w) + g_ij(z,w) F_j(w)F_i(z)
                    let pre = |wi: usize, sup: &[Monomial; 4]| {
                        let first = (wi == 0) == (op == Op::E);
                        if first {
                            self.consts.g(i, j, sup[0], sup[1])
                        } else {
                            self.consts.g(j, i, sup[1], sup[0])
                        }
                    };
                    match self.accumulate(start, &words, &pre) {
                        Ok(acc) => self.check_zero_sums(rel, s, &[i, j], 2, &acc, acc.groups.iter(), rep),
                        Err(e) => self.fail_action(rep, rel, s, vec![i, j], &e),
                    }
                }
            }
        }
    }

    fn check_ef(&self, s: &State, rep: &mut RelationReport) {
        let start = self.id_of(s);
        let phi = self.lweight(s);
        for i in 0..2u8 {
            for j in 0..2u8 {
                let words = [
                    Word { coef: Factored::one(), ops: vec![(Op::E, i, 0), (Op::F, j, 1)] },
                    Word { coef: Factored::signed_monomial(-1, Monomial::ONE), ops: vec![(Op::F, j, 1), (Op::E, i, 0)] },
                ];
                let acc = match self.accumulate(start, &words, &|_, _| Factored::one()) {
                    Ok(a) => a,
                    Err(e) => {
                        self.fail_action(rep, "EF", s, vec![i, j], &e);
                        continue;
                    }
                };
                let is_diag = |k: &Key| i == j && k.0 == start && k.1[0] == k.1[1];
                self.check_zero_sums("EF", s, &[i, j], 2, &acc, acc.groups.iter().filter(|(k, _)| !is_diag(k)), rep);
                if i != j {
                    continue;
                }
                let mut diag: BTreeMap<Monomial, Vec<Factored>> = BTreeMap::new();
                for (k, idx) in acc.groups.iter().filter(|(k, _)| is_diag(k)) {
                    diag.entry(k.1[0]).or_default().extend(acc.group(idx).into_iter().cloned());
                }
                // diagonal: Σ a·b over concave − Σ b·a over convex = res φ dz/z /(q − q⁻¹)
                let f = phi.comp(i);
                let poles: BTreeSet<Monomial> = f.poles().map(|(p, _)| p).collect();
                let mut points: BTreeSet<Monomial> = diag.keys().copied().collect();
                points.extend(poles.iter().copied());
                for p in points {
                    let lhs = diag.remove(&p).unwrap_or_default();
                    let rhs = if poles.contains(&p) {
                        match f.residue(p).and_then(|r| r.div(&self.consts.q_minus_qinv())) {
                            Ok(r) => r,
                            Err(e) => {
                                rep.tally("EF-diagonal", false);
                                let mut en = self.entry(
                                    "EF-diagonal",
                                    s,
                                    vec![i, i],
                                    vec![p, p],
                                    Factored::sum_to_field(&lhs).to_string(),
                                    String::new(),
                                );
                                en.note = Some(e.to_string());
                                rep.failures.push(en);
                                continue;
                            }
                        }
                    } else {
                        Factored::zero()
                    };
                    let mut terms = lhs.clone();
                    terms.push(rhs.neg());
                    let ok = Factored::sum_is_zero(&terms);
                    rep.tally("EF-diagonal", ok);
                    if !ok {
                        let mut en = self.entry(
                            "EF-diagonal",
                            s,
                            vec![i, i],
                            vec![p, p],
                            Factored::sum_to_field(&lhs).to_string(),
                            rhs.to_field().to_string(),
                        );
                        if lhs.is_empty() {
                            en.note = Some("pole not hit by any concave or convex box".into());
                        }
                        rep.failures.push(en);
                    }
                }
            }
        }
    }

    fn check_serre(&self, s: &State, rep: &mut RelationReport) {
        let start = self.id_of(s);
        let words = serre_words(self.consts.q2);
        for op in [Op::E, Op::F] {
            let rel = if op == Op::E { "Serre-E" } else { "Serre-F" };
            for i in 0..2u8 {
                let concrete: Vec<Word> = words
                    .iter()
                    .map(|(c, vars)| Word {
                        coef: c.clone(),
                        ops: vars.iter().map(|v| (op, if *v == 3 { 1 - i } else { i }, *v)).collect(),
                    })
                    .collect();
                let mut acc = Accum::default();
                let mut failed = false;
                for w in &concrete {
                    match self.paths(start, w) {
                        Ok(ps) => {
                            for ((t, sup), c) in ps {
                                let idx = acc.terms.len() as u32;
                                acc.terms.push(c);
                                // symmetrize over z₁, z₂, z₃
                                for perm in PERMS3 {
                                    let mut actual = sup;
                                    for (slot, target) in perm.iter().enumerate() {
                                        actual[*target] = sup[slot];
                                    }
                                    acc.groups.entry((t, actual)).or_default().push(idx);
                                }
                            }
                        }
                        Err(e) => {
                            self.fail_action(rep, rel, s, vec![i, 1 - i], &e);
                            failed = true;
                            break;
                        }
                    }
                }
                if failed {
                    continue;
                }
                for idx in acc.groups.values() {
                    *rep.serre_terms.entry(idx.len()).or_default() += 1;
                }
                self.check_zero_sums(rel, s, &[i, 1 - i], 4, &acc, acc.groups.iter(), rep);
            }
        }
    }
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// [X(z₁),[X(z₂),[X(z₃),Y(w)]_{q²}]]_{q⁻²} expanded into words over the
/// variables z₁, z₂, z₃, w = 0, 1, 2, 3.
fn serre_words(q2: Monomial) -> Vec<(Factored, Vec<usize>)> {
    type Expr = Vec<(Factored, Vec<usize>)>;
    fn bracket(a: &Expr, b: &Expr, p: &Factored) -> Expr {
        let mut out = Vec::new();
        for (ca, wa) in a {
            for (cb, wb) in b {
                let c = ca.mul(cb);
                out.push((c.clone(), [wa.clone(), wb.clone()].concat()));
                out.push((c.mul(p).neg(), [wb.clone(), wa.clone()].concat()));
            }
        }
        out
    }
    let atom = |v: usize| -> Expr { vec![(Factored::one(), vec![v])] };
    let q2 = Factored::monomial(q2);
    let inner = bracket(&atom(2), &atom(3), &q2);
    let mid = bracket(&atom(1), &inner, &Factored::one());
    bracket(&atom(0), &mid, &q2.inv().expect("q² ≠ 0"))
}

pub fn check_relations(family: &FamilySpec, states: &[State]) -> RelationReport {
    Engine::new(family).check_relations(states, CheckOptions::default())
}

// -------------------------------------------------------------- assumptions

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub assumption: String,
    pub state: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AssumptionReport {
    /// A1..A5 → pass
    pub status: BTreeMap<String, bool>,
    pub witnesses: Vec<Witness>,
}

impl AssumptionReport {
    /// A1–A4 hold; A5 is informational.
    pub fn pass(&self) -> bool {
        ["A1", "A2", "A3", "A4"].iter().all(|a| self.status.get(*a).copied().unwrap_or(false))
    }

    pub fn all_pass(&self) -> bool {
        self.pass() && self.status.get("A5").copied().unwrap_or(false)
    }

    pub fn holds(&self, a: &str) -> bool {
        self.status.get(a).copied().unwrap_or(false)
    }
}

fn pole_multiset(f: &FactoredRatZ) -> BTreeMap<Monomial, i32> {
    f.poles().collect()
}

fn shifted_coords(b: &Block, offsets: &[(i64, i64, i64)]) -> Vec<(i64, i64, i64, i64, i64)> {
    offsets.iter().map(|(dx, dy, dz)| (b.x + dx, b.y.int + dy, b.y.mu, b.y.nu, b.z + dz)).collect()
}

fn coord_key(b: &Block) -> (i64, i64, i64, i64, i64) {
    (b.x, b.y.int, b.y.mu, b.y.nu, b.z)
}

pub fn check_assumptions(family: &FamilySpec, states: &[State]) -> AssumptionReport {
    let mut rep = AssumptionReport::default();
    for a in ["A1", "A2", "A3", "A4", "A5"] {
        rep.status.insert(a.to_string(), true);
    }
    let fail = |rep: &mut AssumptionReport, a: &str, s: &State, detail: String| {
        rep.status.insert(a.to_string(), false);
        if rep.witnesses.iter().filter(|w| w.assumption == a).count() < 20 {
            rep.witnesses.push(Witness { assumption: a.into(), state: family.label(s), detail });
        }
    };
    let per_state: Vec<(LWeightPair, Vec<(String, String)>)> = states
        .par_iter()
        .map(|s| {
            let phi = family.lweight(s);
            let mut issues = Vec::new();
            for i in 0..2u8 {
                let pr = phi.comp(i).properties();
                if !pr.balanced {
                    issues.push(("A2".into(), format!("component {i} not balanced: {}", phi.comp(i))));
                }
                if !pr.simple_poles_only {
                    let p = pr.poles.iter().find(|(_, e)| *e > 1).map(|(p, e)| format!("{p} (order {e})")).unwrap_or_default();
                    issues.push(("A2".into(), format!("component {i} has a multiple pole at {p}")));
                }
            }
            let cc = match family.concave_convex(s) {
                Ok(c) => c,
                Err(e) => {
                    issues.push(("A3".into(), e.to_string()));
                    return (phi, issues);
                }
            };
            for i in 0..2usize {
                let mut pos: BTreeMap<Monomial, i32> = BTreeMap::new();
                for b in cc.cc[i].iter().chain(cc.cv[i].iter()) {
                    *pos.entry(family.position(b)).or_default() += 1;
                }
                let poles = pole_multiset(phi.comp(i as u8));
                if pos != poles {
                    let boxes: Vec<String> = pos.iter().map(|(m, e)| format!("{m}×{e}")).collect();
                    let pl: Vec<String> = poles.iter().map(|(m, e)| format!("{m}×{e}")).collect();
                    issues.push(("A3".into(), format!("color {i}: box positions [{}] vs poles [{}]", boxes.join(", "), pl.join(", "))));
                }
                for b in cc.cc[i].iter().chain(cc.cv[i].iter()) {
                    let p = family.position(b);
                    match family.split(s, b) {
                        Ok((before, after)) => {
                            let part = if b.is_positive() { after.comp(i as u8) } else { before.comp(i as u8) };
                            if !part.is_regular_at(p) {
                                let side = if b.is_positive() { "after" } else { "before" };
                                issues.push(("A4".into(), format!("{side}-part of {b} has a pole at its position {p}")));
                            }
                        }
                        Err(e) => issues.push(("A4".into(), e.to_string())),
                    }
                }
            }
            // A5: effect of each concave addition on CC and CV
            let cc_keys: BTreeSet<_> = cc.cc.iter().flatten().map(coord_key).collect();
            let cv_keys: BTreeSet<_> = cc.cv.iter().flatten().map(coord_key).collect();
            for b in cc.cc.iter().flatten() {
                let next = s.add(b);
                let Ok(cc2) = family.concave_convex(&next) else { continue };
                let cc2_keys: BTreeSet<_> = cc2.cc.iter().flatten().map(coord_key).collect();
                let cv2_keys: BTreeSet<_> = cc2.cv.iter().flatten().map(coord_key).collect();
                let new_ok: BTreeSet<_> = shifted_coords(b, &[(0, 0, 1), (0, 1, 0), (1, 0, 0)]).into_iter().collect();
                let lost_ok: BTreeSet<_> = shifted_coords(b, &[(0, 0, 0), (0, 0, -1), (0, -1, 0), (-1, 0, 0)]).into_iter().collect();
                for k in cc2_keys.difference(&cc_keys) {
                    if !new_ok.contains(k) {
                        issues.push(("A5".into(), format!("adding {b} makes {k:?} concave")));
                    }
                }
                for k in cv_keys.difference(&cv2_keys) {
                    if !lost_ok.contains(k) {
                        issues.push(("A5".into(), format!("adding {b} makes {k:?} non-convex")));
                    }
                }
            }
            (phi, issues)
        })
        .collect();
    let mut seen: HashMap<&LWeightPair, &State> = HashMap::default();
    for (s, (phi, issues)) in states.iter().zip(per_state.iter()) {
        for (a, d) in issues {
            fail(&mut rep, a, s, d.clone());
        }
        if let Some(prev) = seen.insert(phi, s) {
            let d = format!("same ℓ-weight as {}", family.label(prev));
            fail(&mut rep, "A1", s, d);
        }
    }
    rep
}

// -------------------------------------------------------- Serre identity
//
// The identity is checked by exact rational evaluation: q, d and the
// spectral variables are drawn at random from small rationals.

#[derive(Clone, Debug, Serialize)]
pub struct SerreIdentityReport {
    pub trials: usize,
    pub singular_skipped: usize,
    pub generic_pass: bool,
    pub degenerate_trials: usize,
    pub degenerate_pass: bool,
}

impl SerreIdentityReport {
    pub fn pass(&self) -> bool {
        self.generic_pass && self.degenerate_pass
    }
}

/// Values of q₁, q₂, q₃ at a point (q, d).
#[derive(Clone, Debug)]
pub struct Point {
    pub q1: BigRational,
    pub q2: BigRational,
    pub q3: BigRational,
}

impl Point {
    pub fn new(q: &BigRational, d: &BigRational) -> Result<Self, Error> {
        if q.is_zero() || d.is_zero() {
            return Err(Error::SubstitutionSingular);
        }
        Ok(Point { q1: d / q, q2: q * q, q3: (q * d).recip() })
    }

    fn div(&self, a: BigRational, b: BigRational) -> Result<BigRational, Error> {
        if b.is_zero() {
            Err(Error::SubstitutionSingular)
        } else {
            Ok(a / b)
        }
    }

    /// h(a, b) = −(a − q₂b)/(b − q₂a)
    pub fn h(&self, a: &BigRational, b: &BigRational) -> Result<BigRational, Error> {
        self.div(-(a - &self.q2 * b), b - &self.q2 * a)
    }

    /// k(z, w) = (z − q₁w)(z − q₃w)/((w − q₁z)(w − q₃z))
    pub fn k(&self, z: &BigRational, w: &BigRational) -> Result<BigRational, Error> {
        let num = (z - &self.q1 * w) * (z - &self.q3 * w);
        let den = (w - &self.q1 * z) * (w - &self.q3 * z);
        self.div(num, den)
    }

    /// Σ_σ S(z_σ) ∏_{i<j, σᵢ>σⱼ} h(z_σᵢ, z_σⱼ), where
    /// S(a,b,c) = (1 − q₂/k(c,w))(1 − h(c,b)/k(b,w))(1 − h(b,a)h(c,a)/(q₂k(a,w))).
    pub fn serre_sum(&self, z: &[BigRational; 3], w: &BigRational) -> Result<BigRational, Error> {
        let one = BigRational::one();
        let s = |a: &BigRational, b: &BigRational, c: &BigRational| -> Result<BigRational, Error> {
            let f1 = &one - self.div(self.q2.clone(), self.k(c, w)?)?;
            let f2 = &one - self.div(self.h(c, b)?, self.k(b, w)?)?;
            let f3 = &one - self.div(self.h(b, a)? * self.h(c, a)?, &self.q2 * self.k(a, w)?)?;
            Ok(f1 * f2 * f3)
        };
        let mut total = BigRational::zero();
        for perm in PERMS3 {
            let mut t = s(&z[perm[0]], &z[perm[1]], &z[perm[2]])?;
            for i in 0..3 {
                for j in i + 1..3 {
                    if perm[i] > perm[j] {
                        t *= self.h(&z[perm[i]], &z[perm[j]])?;
                    }
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// 1 + h(p₃,p₁) − h(p₃,p₁)k(p₃,p₀) − h(p₃,p₁)k(p₃,p₀)h(p₃,p₂)
    /// at p₁ = q₁p₀, p₂ = q₁⁻¹p₀.
    pub fn degenerate_sum(&self, p0: &BigRational, p3: &BigRational) -> Result<BigRational, Error> {
        let p1 = &self.q1 * p0;
        let p2 = p0 / &self.q1;
        let h31 = self.h(p3, &p1)?;
        let k30 = self.k(p3, p0)?;
        let h32 = self.h(p3, &p2)?;
        Ok(BigRational::one() + &h31 - &h31 * &k30 - h31 * k30 * h32)
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let n: i64 = rng.gen_range(-40..=40);
        let d: i64 = rng.gen_range(1..=40);
        if n != 0 {
            return BigRational::new(BigInt::from(n), BigInt::from(d));
        }
    }
}

pub fn verify_serre_identity_seeded(trials: usize, seed: u64) -> SerreIdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut skipped = 0;
    let mut generic_pass = true;
    let mut done = 0;
    while done < trials {
        let r: Vec<BigRational> = (0..6).map(|_| random_rational(&mut rng)).collect();
        let res = Point::new(&r[0], &r[1]).and_then(|pt| pt.serre_sum(&[r[2].clone(), r[3].clone(), r[4].clone()], &r[5]));
        match res {
            Ok(v) => {
                generic_pass &= v.is_zero();
                done += 1;
            }
            Err(_) => skipped += 1,
        }
    }
    let mut degenerate_pass = true;
    let mut deg = 0;
    while deg < trials {
        let r: Vec<BigRational> = (0..4).map(|_| random_rational(&mut rng)).collect();
        match Point::new(&r[0], &r[1]).and_then(|pt| pt.degenerate_sum(&r[2], &r[3])) {
            Ok(v) => {
                degenerate_pass &= v.is_zero();
                deg += 1;
            }
            Err(_) => skipped += 1,
        }
    }
    SerreIdentityReport { trials, singular_skipped: skipped, generic_pass, degenerate_trials: deg, degenerate_pass }
}

pub fn verify_serre_identity(trials: usize) -> bool {
    verify_serre_identity_seeded(trials, 0).pass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;

    #[test]
    fn g_values() {
        let (a, b) = (Monomial::new(1, 2, 0, 0, 0), Monomial::new(0, -1, 1, 0, 0));
        assert_eq!(g_eval(0, 0, a, b), Factored::binomial(a, Monomial::q2() * b).to_field());
        assert!(g_eval(0, 1, Monomial::q1() * b, b).is_zero());
        let expect = Factored::binomial(a, Monomial::q1() * b).mul(&Factored::binomial(a, Monomial::q3() * b));
        assert_eq!(g_eval(1, 0, a, b), expect.to_field());
    }

    #[test]
    fn serre_words_shape() {
        let w = serre_words(Monomial::q2());
        assert_eq!(w.len(), 8);
        let distinct: BTreeSet<_> = w.iter().map(|(_, v)| v.clone()).collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn vector_reference_action() {
        let f = make_vector(0);
        let ts = act_f(&f, &State::empty(), 0).unwrap();
        assert_eq!(ts.entries.len(), 1);
        assert_eq!(ts.entries[0].coeff, Factored::one());
    }

    #[test]
    fn fock_one_box_removal() {
        let f = make_fock(0);
        let one = f.parse_state("1").unwrap();
        let e = act_e(&f, &one, 0).unwrap();
        let fa = act_f(&f, &State::empty(), 0).unwrap();
        assert_eq!(e.entries.len(), 1);
        let prod = fa.entries[0].coeff.mul(&e.entries[0].coeff);
        let expect = f.psi.comp0.residue(Monomial::ONE).unwrap().div(&crate::algebra::q_minus_qinv()).unwrap();
        assert_eq!(prod.to_field(), expect.to_field());
    }

    #[test]
    fn highest_weight() {
        for f in [make_fock(0), make_macmahon(0), make_eval_verma()] {
            for c in 0..2 {
                assert!(act_e(&f, &State::empty(), c).unwrap().entries.is_empty());
            }
        }
    }

    #[test]
    fn serre_identity_small() {
        assert!(verify_serre_identity(20));
        let one = BigRational::one();
        let pt = Point::new(&one, &one).unwrap();
        assert!(matches!(pt.h(&one, &one), Err(Error::SubstitutionSingular)));
    }

    #[test]
    fn fock_relations_small() {
        let f = make_fock(0);
        let states = f.enumerate_states(3);
        let rep = check_relations(&f, &states);
        assert!(rep.pass(), "{:#?}", rep.failures.first());
        assert!(check_assumptions(&f, &states).all_pass());
    }
}
