//! Bigraded characters: enumeration, closed forms, comparison, and the
//! staircase change of variables behind the slanted character.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::boxes::state_degree;
use crate::families::{FamilyKind, FamilySpec};
use crate::Error;

pub type Cell = (i64, i64);

/// Largest enumeration bound [`character`] picks on its own.
pub const AUTO_BOUND_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// z₀ = z₁ = z, total degree 0..=max
    Diagonal { max: i64 },
    /// deg₀ ∈ d0, deg₁ ∈ d1, inclusive
    Rect { d0: (i64, i64), d1: (i64, i64) },
}

impl Window {
    pub fn rect(d0: (i64, i64), d1: (i64, i64)) -> Self {
        Window::Rect { d0, d1 }
    }

    pub fn cells(&self) -> Vec<Cell> {
        match *self {
            Window::Diagonal { max } => (0..=max).flat_map(|n| (0..=n).map(move |a| (a, n - a))).collect(),
            Window::Rect { d0, d1 } => (d0.0..=d0.1).flat_map(|a| (d1.0..=d1.1).map(move |b| (a, b))).collect(),
        }
    }

    fn contains(&self, (a, b): Cell) -> bool {
        match *self {
            Window::Diagonal { max } => a >= 0 && b >= 0 && a + b <= max,
            Window::Rect { d0, d1 } => d0.0 <= a && a <= d0.1 && d1.0 <= b && b <= d1.1,
        }
    }

    /// `n` (diagonal) or `a0:a1,b0:b1` (rectangle).
    pub fn parse(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("window `{s}`: expected N or LO:HI,LO:HI"));
        let range = |r: &str| -> Result<(i64, i64), Error> {
            let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
            let (lo, hi) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
            if lo > hi {
                return Err(bad());
            }
            Ok((lo, hi))
        };
        match s.split_once(',') {
            None => {
                let max: i64 = s.trim().parse().map_err(|_| bad())?;
                if max < 0 {
                    return Err(bad());
                }
                Ok(Window::Diagonal { max })
            }
            Some((a, b)) => Ok(Window::Rect { d0: range(a)?, d1: range(b)? }),
        }
    }
}

/// Counts per bidegree inside a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharWindow {
    pub window: Window,
    /// enumeration bound (moves from the reference); None for closed forms
    pub bound: Option<usize>,
    pub cells: BTreeMap<Cell, u64>,
    /// cells whose every state lies within the bound
    pub complete: BTreeSet<Cell>,
}

impl CharWindow {
    pub fn count(&self, c: Cell) -> u64 {
        self.cells.get(&c).copied().unwrap_or(0)
    }

    /// Specialization z₀ = z₁ = z: total degree → count, complete degrees only.
    pub fn diagonal(&self) -> BTreeMap<i64, u64> {
        let mut out: BTreeMap<i64, u64> = BTreeMap::new();
        let mut broken = BTreeSet::new();
        for c in self.window.cells() {
            *out.entry(c.0 + c.1).or_default() += self.count(c);
            if !self.complete.contains(&c) {
                broken.insert(c.0 + c.1);
            }
        }
        out.retain(|n, _| !broken.contains(n));
        out
    }

    /// Counts along z₀^k t^{mk}·t^j for j = 0.., i.e. cells (j + k(m+1), j + km).
    pub fn line(&self, m: i64, k: i64) -> Vec<Option<u64>> {
        let mut out = Vec::new();
        for j in 0.. {
            let c = (j + k * (m + 1), j + k * m);
            if !self.window.contains(c) {
                break;
            }
            out.push(self.complete.contains(&c).then(|| self.count(c)));
        }
        out
    }

    /// Long-format CSV: deg0,deg1,count,complete
    pub fn to_csv(&self) -> String {
        let mut s = String::from("deg0,deg1,count,complete\n");
        for c in self.window.cells() {
            s.push_str(&format!("{},{},{},{}\n", c.0, c.1, self.count(c), self.complete.contains(&c)));
        }
        s
    }
}

/// Moves needed to reach every state of bidegree `c`.
///
/// Vertical partitions have deg₀ ≤ deg₁ (their top column is color 1),
/// and a tower of height k costs |k| moves; the worst case puts as many
/// boxes as possible into partitions and cancels them with the tower.
pub fn cell_bound(family: &FamilySpec, (d0, d1): Cell) -> Option<usize> {
    let (d0, d1) = if family.color == 1 { (d1, d0) } else { (d0, d1) };
    let n = match family.kind {
        FamilyKind::Vector => d0.abs() + d1.abs(),
        FamilyKind::Relaxed => d0 + d1 + 2 * (d1 - d0).max(0),
        FamilyKind::Slanted { m } => d0 + d1 + 2 * (2 * m + 1) * (d1 - d0).max(0),
        _ => {
            if d0 < 0 || d1 < 0 {
                return Some(0);
            }
            d0 + d1
        }
    };
    Some(n.max(0) as usize)
}

fn needed_bound(family: &FamilySpec, window: &Window) -> usize {
    window.cells().into_iter().filter_map(|c| cell_bound(family, c)).max().unwrap_or(0)
}

/// Character restricted to `window`, enumerating just far enough to make
/// every cell complete.
pub fn character(family: &FamilySpec, window: &Window) -> Result<CharWindow, Error> {
    let needed = needed_bound(family, window);
    if needed > AUTO_BOUND_LIMIT {
        return Err(Error::WindowTooLargeForBound { needed, bound: AUTO_BOUND_LIMIT });
    }
    Ok(character_with_bound(family, window, needed))
}

/// Character from the states within `bound` moves; cells that need more
/// are kept but not marked complete.
pub fn character_with_bound(family: &FamilySpec, window: &Window, bound: usize) -> CharWindow {
    let mut cells: BTreeMap<Cell, u64> = BTreeMap::new();
    for s in family.enumerate_states(bound) {
        let c = state_degree(&s);
        if window.contains(c) {
            *cells.entry(c).or_default() += 1;
        }
    }
    let complete = window.cells().into_iter().filter(|c| cell_bound(family, *c).is_some_and(|n| n <= bound)).collect();
    CharWindow { window: *window, bound: Some(bound), cells, complete }
}

// ------------------------------------------------------------ series oracle

/// Truncated power series in z₀, z₁ with nonnegative exponents.
#[derive(Clone, Debug)]
struct Series2 {
    max_total: i64,
    c: BTreeMap<Cell, i128>,
}

impl Series2 {
    fn one(max_total: i64) -> Self {
        Series2 { max_total, c: BTreeMap::from([((0, 0), 1)]) }
    }

    /// Multiply by 1/(1 − z₀^a z₁^b)^e, a + b ≥ 1.
    fn div_one_minus(&mut self, (a, b): Cell, e: i64) {
        assert!(a >= 0 && b >= 0 && a + b >= 1);
        for _ in 0..e {
            // in increasing total degree, f ← f + x·f
            let mut keys: Vec<Cell> = self.c.keys().copied().collect();
            keys.sort_by_key(|k| (k.0 + k.1, *k));
            let mut out = self.c.clone();
            let mut frontier: Vec<(Cell, i128)> = keys.iter().map(|k| (*k, self.c[k])).collect();
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for ((x, y), v) in frontier {
                    let t = (x + a, y + b);
                    if t.0 + t.1 <= self.max_total {
                        *out.entry(t).or_default() += v;
                        next.push((t, v));
                    }
                }
                frontier = next;
            }
            self.c = out;
        }
    }

    fn get(&self, c: Cell) -> i128 {
        self.c.get(&c).copied().unwrap_or(0)
    }
}

/// Coefficients of ∏ 1/(1 − t^j)^e up to t^n.
pub fn eta_power_series(e: i64, n: i64) -> Vec<u64> {
    let mut s = Series2::one(n);
    for j in 1..=n {
        s.div_one_minus((j, 0), e);
    }
    (0..=n).map(|k| s.get((k, 0)) as u64).collect()
}

/// 1/∏(1 − t^j)(1 − z_i t^{j−1}) for i = `top`, times a running series.
fn vertical_partition(s: &mut Series2, top: usize, power: i64) {
    for j in 1..=s.max_total {
        s.div_one_minus((j, j), power);
        let c = if top == 0 { (j, j - 1) } else { (j - 1, j) };
        s.div_one_minus(c, power);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    PartitionsDiagonal,
    PlanePartitionsDiagonal,
    MacmahonBicolor,
    Vector,
    Verma,
    /// p(t)·δ(z₀t^m); m = 0 is the relaxed module
    Delta(i64),
}

fn parse_kind(kind: &str) -> Result<(Form, bool), Error> {
    let (base, swapped) = match kind.strip_suffix("-swapped") {
        Some(b) => (b, true),
        None => (kind, false),
    };
    let form = match base {
        "fock-diagonal" | "partitions" => Form::PartitionsDiagonal,
        "macmahon-diagonal" | "plane-partitions" => Form::PlanePartitionsDiagonal,
        "macmahon-bicolor" | "macmahon" => Form::MacmahonBicolor,
        "vector" => Form::Vector,
        "verma" => Form::Verma,
        "relaxed" => Form::Delta(0),
        other => match other.strip_prefix("slanted-").and_then(|m| m.parse::<i64>().ok()) {
            Some(m) if m >= 1 => Form::Delta(m),
            _ => return Err(Error::UnknownKind(kind.to_string())),
        },
    };
    Ok((form, swapped))
}

pub const CLOSED_FORM_KINDS: &[&str] =
    &["fock-diagonal", "macmahon-diagonal", "macmahon-bicolor", "vector", "verma", "relaxed", "slanted-<m>"];

/// Closed form matching a family, if one is known.
pub fn default_kind(family: &FamilySpec) -> Option<String> {
    let base = match family.kind {
        FamilyKind::Vector => "vector".to_string(),
        FamilyKind::Fock => "fock-diagonal".into(),
        FamilyKind::Macmahon => "macmahon-bicolor".into(),
        FamilyKind::Verma => "verma".into(),
        FamilyKind::Relaxed => "relaxed".into(),
        FamilyKind::Slanted { m } => format!("slanted-{m}"),
        _ => return None,
    };
    Some(if family.color == 1 { format!("{base}-swapped") } else { base })
}

/// Expansion of a named closed form inside `window`.
///
/// Kinds: `fock-diagonal`, `macmahon-diagonal` (diagonal windows only),
/// `macmahon-bicolor`, `vector` ((1+z₀)δ(z₀z₁)), `verma` (χ̄₀χ̄₁),
/// `relaxed` (p(t)δ(z₀)), `slanted-m` (p(t)δ(z₀t^m)), where
/// p(t) = 1/∏(1−t^j)⁴. A `-swapped` suffix exchanges z₀ and z₁.
pub fn closed_form_coeffs(kind: &str, window: &Window) -> Result<CharWindow, Error> {
    let (form, swapped) = parse_kind(kind)?;
    let cells_in = window.cells();
    let max_total = cells_in.iter().map(|c| c.0.abs() + c.1.abs()).max().unwrap_or(0);
    let mut cells = BTreeMap::new();
    let mut put = |c: Cell, v: i128| {
        if v != 0 {
            cells.insert(c, v as u64);
        }
    };
    let diag_only = |n: &str| Error::InvalidWindow(format!("{n} is a diagonal formula; use a diagonal window"));
    match form {
        Form::PartitionsDiagonal | Form::PlanePartitionsDiagonal => {
            let Window::Diagonal { max } = *window else {
                return Err(diag_only(kind));
            };
            let mut s = Series2::one(max);
            for i in 1..=max {
                s.div_one_minus((i, 0), if form == Form::PartitionsDiagonal { 1 } else { i });
            }
            // diagonal totals are stored on the (n, 0) cells
            for n in 0..=max {
                put((n, 0), s.get((n, 0)));
            }
        }
        Form::MacmahonBicolor | Form::Verma => {
            let mut s = Series2::one(max_total);
            if form == Form::Verma {
                vertical_partition(&mut s, 0, 1);
                vertical_partition(&mut s, 1, 1);
            } else {
                for i in 1..=max_total {
                    s.div_one_minus((i, i), 2 * i);
                    s.div_one_minus((i, i - 1), i);
                    if i > 1 {
                        s.div_one_minus((i - 1, i), i - 1);
                    }
                }
            }
            for c in &cells_in {
                let c0 = if swapped { (c.1, c.0) } else { *c };
                put(*c, s.get(c0));
            }
        }
        Form::Vector => {
            for &c in &cells_in {
                let (a, b) = if swapped { (c.1, c.0) } else { c };
                put(c, i128::from(a - b == 0 || a - b == 1));
            }
        }
        Form::Delta(m) => {
            let p = eta_power_series(4, max_total.max(0) * (2 * m + 1) + 1);
            for &c in &cells_in {
                let (a, b) = if swapped { (c.1, c.0) } else { c };
                let j = b - m * (a - b);
                if j >= 0 {
                    put(c, p.get(j as usize).copied().map(i128::from).unwrap_or(0));
                }
            }
        }
    }
    let complete = if matches!(form, Form::PartitionsDiagonal | Form::PlanePartitionsDiagonal) {
        cells.keys().copied().chain((0..=max_total).map(|n| (n, 0))).collect()
    } else {
        cells_in.into_iter().collect()
    };
    Ok(CharWindow { window: *window, bound: None, cells, complete })
}

#[derive(Clone, Debug, Serialize)]
pub struct CellComparison {
    pub deg0: i64,
    pub deg1: i64,
    pub enumerated: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterReport {
    pub family: String,
    pub kind: String,
    pub window: Window,
    pub bound: Option<usize>,
    pub compared: usize,
    pub skipped_incomplete: usize,
    pub mismatches: Vec<CellComparison>,
    /// counts on the support line through the origin, for delta kinds
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_line: Option<Vec<Option<u64>>>,
    pub pass: bool,
}

fn compare_windows(family: &FamilySpec, kind: &str, got: &CharWindow) -> Result<CharacterReport, Error> {
    let (form, swapped) = parse_kind(kind)?;
    let expect = closed_form_coeffs(kind, &got.window)?;
    let mut mismatches = Vec::new();
    let mut compared = 0;
    let mut skipped = 0;
    if matches!(form, Form::PartitionsDiagonal | Form::PlanePartitionsDiagonal) {
        let diag = got.diagonal();
        let Window::Diagonal { max } = got.window else { unreachable!("closed form checked the window") };
        for n in 0..=max {
            match diag.get(&n) {
                Some(v) => {
                    compared += 1;
                    let e = expect.count((n, 0));
                    if *v != e {
                        mismatches.push(CellComparison { deg0: n, deg1: n, enumerated: *v, expected: e });
                    }
                }
                None => skipped += 1,
            }
        }
    } else {
        for c in got.window.cells() {
            if !got.complete.contains(&c) {
                skipped += 1;
                continue;
            }
            compared += 1;
            let (v, e) = (got.count(c), expect.count(c));
            if v != e {
                mismatches.push(CellComparison { deg0: c.0, deg1: c.1, enumerated: v, expected: e });
            }
        }
    }
    let support_line = match form {
        Form::Delta(m) if !swapped => Some(got.line(m, 0)),
        _ => None,
    };
    Ok(CharacterReport {
        family: family.name.clone(),
        kind: kind.to_string(),
        window: got.window,
        bound: got.bound,
        compared,
        skipped_incomplete: skipped,
        pass: mismatches.is_empty() && compared > 0,
        mismatches,
        support_line,
    })
}

/// Cell-by-cell comparison of the enumerated character with a closed form.
pub fn compare_character(family: &FamilySpec, kind: &str, window: &Window) -> Result<CharacterReport, Error> {
    parse_kind(kind)?;
    let got = character(family, window)?;
    compare_windows(family, kind, &got)
}

/// As [`compare_character`], enumerating to a fixed bound and comparing
/// only the cells that bound makes complete.
pub fn compare_character_with_bound(family: &FamilySpec, kind: &str, window: &Window, bound: usize) -> Result<CharacterReport, Error> {
    parse_kind(kind)?;
    let got = character_with_bound(family, window, bound);
    compare_windows(family, kind, &got)
}

// ------------------------------------------------------------- staircase

/// Tower heights of the slanted family: a₀..a_m on the white columns,
/// b₀..b_{m−1} on the black ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Tower {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

/// (ã₀, c, d) with c_i = b_i − a_i, d_i = b_i − a_{i+1}, ã₀ = a₀ − Σd.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StaircaseCoords {
    pub a0: i64,
    pub c: Vec<i64>,
    pub d: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// R_i, 1 ≤ i ≤ m
    R(usize),
    /// R̄_i, 1 ≤ i ≤ m
    RBar(usize),
    /// every column of the staircase
    Full,
}

fn check_shape(m: usize, t: &Tower) -> Result<(), Error> {
    if t.a.len() != m + 1 || t.b.len() != m {
        return Err(Error::ConstraintViolated(format!("expected {} a's and {m} b's", m + 1)));
    }
    Ok(())
}

pub fn staircase_bijection(m: usize, t: &Tower) -> Result<StaircaseCoords, Error> {
    check_shape(m, t)?;
    for i in 0..m {
        if t.b[i] < t.a[i] || t.b[i] < t.a[i + 1] {
            return Err(Error::ConstraintViolated(format!("b{i} = {} is below a{i} or a{}", t.b[i], i + 1)));
        }
    }
    let c: Vec<i64> = (0..m).map(|i| t.b[i] - t.a[i]).collect();
    let d: Vec<i64> = (0..m).map(|i| t.b[i] - t.a[i + 1]).collect();
    Ok(StaircaseCoords { a0: t.a[0] - d.iter().sum::<i64>(), c, d })
}

pub fn staircase_inverse(m: usize, s: &StaircaseCoords) -> Result<Tower, Error> {
    if s.c.len() != m || s.d.len() != m {
        return Err(Error::ConstraintViolated(format!("expected {m} c's and d's")));
    }
    if s.c.iter().chain(&s.d).any(|v| *v < 0) {
        return Err(Error::ConstraintViolated("c and d must be nonnegative".into()));
    }
    let mut a = vec![s.a0 + s.d.iter().sum::<i64>()];
    let mut b = Vec::with_capacity(m);
    for i in 0..m {
        b.push(a[i] + s.c[i]);
        a.push(b[i] - s.d[i]);
    }
    Ok(Tower { a, b })
}

/// Stack one shape onto the tower.
pub fn add_shape(m: usize, t: &Tower, shape: Shape) -> Result<Tower, Error> {
    check_shape(m, t)?;
    let mut out = t.clone();
    match shape {
        Shape::R(i) | Shape::RBar(i) if i == 0 || i > m => {
            return Err(Error::ConstraintViolated(format!("shape index {i} outside 1..={m}")));
        }
        Shape::R(i) => {
            for s in 0..i {
                out.a[s] += 1;
                out.b[s] += 1;
            }
        }
        Shape::RBar(i) => {
            for s in m - i..m {
                out.b[s] += 1;
                out.a[s + 1] += 1;
            }
        }
        Shape::Full => {
            out.a.iter_mut().chain(out.b.iter_mut()).for_each(|v| *v += 1);
        }
    }
    Ok(out)
}

/// If the tower satisfies the staircase condition and some a_j < 0, then
/// Σb − Σa > 0. Returns false only on a counterexample.
pub fn staircase_inequality(t: &Tower) -> bool {
    let valid = (0..t.b.len()).all(|i| t.b[i] >= t.a[i] && t.b[i] >= t.a[i + 1]);
    if !valid || t.a.iter().all(|a| *a >= 0) {
        return true;
    }
    t.b.iter().sum::<i64>() - t.a.iter().sum::<i64>() > 0
}
