//! Finite semigroups given by multiplication tables.
//!
//! Elements are indices `0..n`. Names are kept only for printing. The
//! adjoined unit of `S¹` is never materialized: preorders treat it as
//! "multiply or leave alone".

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemigroupError {
    #[error("semigroup has no elements")]
    Empty,
    #[error("table is not square over {0} elements")]
    NotSquare(usize),
    #[error("product of {0} and {1} is {2}, outside the carrier")]
    NonClosed(usize, usize, usize),
    #[error("({0}*{1})*{2} differs from {0}*({1}*{2})")]
    NonAssociative(usize, usize, usize),
    #[error("declared unit {0} is not neutral")]
    BadUnit(usize),
    #[error("declared zero {0} is not absorbing")]
    BadZero(usize),
    #[error("duplicate element name {0:?}")]
    DuplicateName(String),
    #[error("semigroup has no nonzero element")]
    NoNonZeroElement,
    #[error("subset is not an ideal")]
    NotAnIdeal,
    #[error("subset is not closed under multiplication")]
    NotClosedSubset,
    #[error("invalid semigroup json: {0}")]
    Json(String),
}

/// Wire format: `{"elements":[...],"table":[[...]],"unit":i?,"zero":j?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSemigroup {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSemigroup {
    names: Vec<String>,
    table: Vec<usize>,
    n: usize,
    unit: Option<usize>,
    zero: Option<usize>,
}

impl FiniteSemigroup {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn zero(&self) -> Option<usize> {
        self.zero
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn is_idempotent(&self, a: usize) -> bool {
        self.mul(a, a) == a
    }

    /// Product of a nonempty word of elements.
    pub fn product(&self, word: &[usize]) -> Option<usize> {
        let (&first, rest) = word.split_first()?;
        Some(rest.iter().fold(first, |acc, &x| self.mul(acc, x)))
    }

    pub fn to_raw(&self) -> RawSemigroup {
        RawSemigroup {
            elements: self.names.clone(),
            table: (0..self.n)
                .map(|i| self.table[i * self.n..(i + 1) * self.n].to_vec())
                .collect(),
            unit: self.unit,
            zero: self.zero,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SemigroupError> {
        let raw: RawSemigroup =
            serde_json::from_str(text).map_err(|e| SemigroupError::Json(e.to_string()))?;
        validate_semigroup(&raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("semigroup serializes")
    }

    /// Builds directly from a flat table, detecting unit and zero.
    pub fn from_fn(
        names: Vec<String>,
        mul: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, SemigroupError> {
        let n = names.len();
        let table = (0..n)
            .map(|i| (0..n).map(|j| mul(i, j)).collect())
            .collect();
        validate_semigroup(&RawSemigroup {
            elements: names,
            table,
            unit: None,
            zero: None,
        })
    }

    pub fn is_subsemigroup(&self, t: &[usize]) -> bool {
        let set: BTreeSet<usize> = t.iter().copied().collect();
        t.iter()
            .all(|&a| t.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    /// The subsemigroup on `t` (sorted), with the embedding from old to new indices.
    pub fn restrict(&self, t: &[usize]) -> Result<(FiniteSemigroup, Vec<Option<usize>>), SemigroupError> {
        let mut members: Vec<usize> = t.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(SemigroupError::Empty);
        }
        if !self.is_subsemigroup(&members) {
            return Err(SemigroupError::NotClosedSubset);
        }
        let mut embed = vec![None; self.n];
        for (k, &m) in members.iter().enumerate() {
            embed[m] = Some(k);
        }
        let names = members.iter().map(|&m| self.names[m].clone()).collect();
        let sub = FiniteSemigroup::from_fn(names, |i, j| {
            embed[self.mul(members[i], members[j])].expect("closed subset")
        })?;
        Ok((sub, embed))
    }
}

pub fn validate_semigroup(raw: &RawSemigroup) -> Result<FiniteSemigroup, SemigroupError> {
    let n = raw.elements.len();
    if n == 0 {
        return Err(SemigroupError::Empty);
    }
    let mut seen = BTreeSet::new();
    for name in &raw.elements {
        if !seen.insert(name) {
            return Err(SemigroupError::DuplicateName(name.clone()));
        }
    }
    if raw.table.len() != n || raw.table.iter().any(|row| row.len() != n) {
        return Err(SemigroupError::NotSquare(n));
    }
    let mut table = Vec::with_capacity(n * n);
    for (i, row) in raw.table.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p >= n {
                return Err(SemigroupError::NonClosed(i, j, p));
            }
            table.push(p);
        }
    }
    let m = |a: usize, b: usize| table[a * n + b];
    for a in 0..n {
        for b in 0..n {
            let ab = m(a, b);
            for c in 0..n {
                if m(ab, c) != m(a, m(b, c)) {
                    return Err(SemigroupError::NonAssociative(a, b, c));
                }
            }
        }
    }
    let is_unit = |u: usize| (0..n).all(|x| m(u, x) == x && m(x, u) == x);
    let is_zero = |z: usize| (0..n).all(|x| m(z, x) == z && m(x, z) == z);
    let unit = match raw.unit {
        Some(u) if u >= n || !is_unit(u) => return Err(SemigroupError::BadUnit(u)),
        Some(u) => Some(u),
        None => (0..n).find(|&u| is_unit(u)),
    };
    let zero = match raw.zero {
        Some(z) if z >= n || !is_zero(z) => return Err(SemigroupError::BadZero(z)),
        Some(z) => Some(z),
        None => (0..n).find(|&z| is_zero(z)),
    };
    Ok(FiniteSemigroup {
        names: raw.elements.clone(),
        table,
        n,
        unit,
        zero,
    })
}

/// All idempotents and the least uniform exponent `ω` with `x^ω` idempotent for every `x`.
pub fn idempotents_and_exponent(s: &FiniteSemigroup) -> (Vec<usize>, usize) {
    let idem: Vec<usize> = s.elements().filter(|&a| s.is_idempotent(a)).collect();
    let mut max_index = 1;
    let mut period_lcm = 1;
    for x in s.elements() {
        let mut powers = vec![x];
        loop {
            let next = s.mul(*powers.last().unwrap(), x);
            if let Some(pos) = powers.iter().position(|&p| p == next) {
                max_index = max_index.max(pos + 1);
                period_lcm = lcm(period_lcm, powers.len() - pos);
                break;
            }
            powers.push(next);
        }
    }
    let omega = max_index.div_ceil(period_lcm) * period_lcm;
    (idem, omega)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Green {
    J,
    L,
    R,
    H,
}

impl Green {
    pub const ALL: [Green; 4] = [Green::J, Green::L, Green::R, Green::H];

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug)]
pub struct GreenData {
    n: usize,
    leq: [Vec<bool>; 4],
    class_of: [Vec<usize>; 4],
    classes: [Vec<Vec<usize>>; 4],
}

impl GreenData {
    /// `u ≤_G v`.
    pub fn leq(&self, g: Green, u: usize, v: usize) -> bool {
        self.leq[g.slot()][u * self.n + v]
    }

    pub fn equiv(&self, g: Green, u: usize, v: usize) -> bool {
        self.class_of[g.slot()][u] == self.class_of[g.slot()][v]
    }

    pub fn class_id(&self, g: Green, u: usize) -> usize {
        self.class_of[g.slot()][u]
    }

    pub fn class(&self, g: Green, u: usize) -> &[usize] {
        &self.classes[g.slot()][self.class_of[g.slot()][u]]
    }

    pub fn classes(&self, g: Green) -> &[Vec<usize>] {
        &self.classes[g.slot()]
    }
}

pub fn green_classes(s: &FiniteSemigroup) -> GreenData {
    let n = s.len();
    let mut r = vec![false; n * n];
    let mut l = vec![false; n * n];
    for v in 0..n {
        r[v * n + v] = true;
        l[v * n + v] = true;
        for t in 0..n {
            r[s.mul(v, t) * n + v] = true;
            l[s.mul(t, v) * n + v] = true;
        }
    }
    let mut j = vec![false; n * n];
    for v in 0..n {
        for w in 0..n {
            if r[w * n + v] {
                for u in 0..n {
                    if l[u * n + w] {
                        j[u * n + v] = true;
                    }
                }
            }
        }
    }
    let h: Vec<bool> = (0..n * n).map(|k| l[k] && r[k]).collect();
    let leq = [j, l, r, h];
    let mut class_of: [Vec<usize>; 4] = Default::default();
    let mut classes: [Vec<Vec<usize>>; 4] = Default::default();
    for g in Green::ALL {
        let m = &leq[g.slot()];
        let mut ids = vec![usize::MAX; n];
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for u in 0..n {
            if ids[u] != usize::MAX {
                continue;
            }
            let id = parts.len();
            let part: Vec<usize> = (u..n)
                .filter(|&v| m[u * n + v] && m[v * n + u])
                .collect();
            for &v in &part {
                ids[v] = id;
            }
            parts.push(part);
        }
        class_of[g.slot()] = ids;
        classes[g.slot()] = parts;
    }
    GreenData {
        n,
        leq,
        class_of,
        classes,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    Group,
    Null,
    Simple,
    ZeroSimple,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupClass {
    pub tag: ClassTag,
    pub zero: Option<usize>,
    /// The J-classes, in order of their least element.
    pub j_classes: Vec<Vec<usize>>,
}

pub fn classify(s: &FiniteSemigroup) -> SemigroupClass {
    let g = green_classes(s);
    let j_classes = g.classes(Green::J).to_vec();
    let zero = s.zero();
    let tag = if g.classes(Green::H).len() == 1 {
        ClassTag::Group
    } else if zero.is_some_and(|z| s.elements().all(|a| s.elements().all(|b| s.mul(a, b) == z))) {
        ClassTag::Null
    } else if j_classes.len() == 1 {
        ClassTag::Simple
    } else if zero.is_some() && j_classes.len() == 2 {
        ClassTag::ZeroSimple
    } else {
        ClassTag::General
    };
    SemigroupClass {
        tag,
        zero,
        j_classes,
    }
}

/// `S¹aS¹`, sorted.
pub fn principal_ideal(s: &FiniteSemigroup, a: usize) -> Vec<usize> {
    let g = green_classes(s);
    s.elements().filter(|&u| g.leq(Green::J, u, a)).collect()
}

pub fn is_ideal(s: &FiniteSemigroup, ideal: &[usize]) -> bool {
    if ideal.is_empty() {
        return false;
    }
    let set: BTreeSet<usize> = ideal.iter().copied().collect();
    ideal.iter().all(|&i| {
        s.elements()
            .all(|t| set.contains(&s.mul(i, t)) && set.contains(&s.mul(t, i)))
    })
}

fn nonzero_j_minimal(s: &FiniteSemigroup, g: &GreenData) -> Vec<usize> {
    let nonzero: Vec<usize> = s.elements().filter(|&a| Some(a) != s.zero()).collect();
    nonzero
        .iter()
        .copied()
        .filter(|&a| {
            nonzero
                .iter()
                .all(|&b| !g.leq(Green::J, b, a) || g.leq(Green::J, a, b))
        })
        .collect()
}

/// Ideals whose only proper sub-ideal is `{0}` (or none, without a zero).
pub fn zero_minimal_ideals(s: &FiniteSemigroup) -> Vec<Vec<usize>> {
    let g = green_classes(s);
    let mut out: Vec<Vec<usize>> = Vec::new();
    for a in nonzero_j_minimal(s, &g) {
        let ideal: Vec<usize> = s.elements().filter(|&u| g.leq(Green::J, u, a)).collect();
        if !out.contains(&ideal) {
            out.push(ideal);
        }
    }
    out
}

/// Least-index `≤_J`-minimal element among the nonzero elements.
pub fn j_minimal_nonzero(s: &FiniteSemigroup) -> Result<usize, SemigroupError> {
    let g = green_classes(s);
    nonzero_j_minimal(s, &g)
        .first()
        .copied()
        .ok_or(SemigroupError::NoNonZeroElement)
}

/// The Rees quotient `S/I` and the quotient map. Elements outside `I` keep
/// their relative order; the class of `I` is appended last and is the zero.
pub fn rees_quotient(
    s: &FiniteSemigroup,
    ideal: &[usize],
) -> Result<(FiniteSemigroup, Vec<usize>), SemigroupError> {
    if !is_ideal(s, ideal) {
        return Err(SemigroupError::NotAnIdeal);
    }
    let inside: BTreeSet<usize> = ideal.iter().copied().collect();
    let outside: Vec<usize> = s.elements().filter(|a| !inside.contains(a)).collect();
    let z = outside.len();
    let mut quo = vec![z; s.len()];
    for (k, &a) in outside.iter().enumerate() {
        quo[a] = k;
    }
    let mut names: Vec<String> = outside.iter().map(|&a| s.name(a).to_string()).collect();
    let mut zname = if inside.len() == 1 {
        s.name(ideal[0]).to_string()
    } else {
        "0".to_string()
    };
    while names.contains(&zname) {
        zname.push('\'');
    }
    names.push(zname);
    let q = FiniteSemigroup::from_fn(names, |i, j| {
        if i == z || j == z {
            z
        } else {
            quo[s.mul(outside[i], outside[j])]
        }
    })?;
    Ok((q, quo))
}

/// Handy constructors used by tests, examples and bundled data.
pub mod examples {
    use super::*;

    pub fn cyclic_group(n: usize) -> FiniteSemigroup {
        FiniteSemigroup::from_fn((0..n).map(|i| i.to_string()).collect(), |a, b| (a + b) % n)
            .expect("cyclic group is a semigroup")
    }

    /// `{0, a}` with every product equal to `0`.
    pub fn null2() -> FiniteSemigroup {
        FiniteSemigroup::from_fn(vec!["0".into(), "a".into()], |_, _| 0).expect("null semigroup")
    }

    /// `p × q` rectangular band, element `(i,j)` at index `i*q+j`.
    pub fn rectangular_band(p: usize, q: usize) -> FiniteSemigroup {
        let names = (0..p)
            .flat_map(|i| (0..q).map(move |j| format!("r{i}c{j}")))
            .collect();
        FiniteSemigroup::from_fn(names, |a, b| (a / q) * q + b % q).expect("rectangular band")
    }

    /// Adjoins a fresh zero (named `0`, appended last).
    pub fn with_zero(s: &FiniteSemigroup) -> FiniteSemigroup {
        let n = s.len();
        let mut names = s.names().to_vec();
        names.push("0".into());
        FiniteSemigroup::from_fn(names, |a, b| if a == n || b == n { n } else { s.mul(a, b) })
            .expect("zero adjunction")
    }

    /// Adjoins a fresh unit (named `1`, appended last).
    pub fn with_unit(s: &FiniteSemigroup) -> FiniteSemigroup {
        let n = s.len();
        let mut names = s.names().to_vec();
        names.push("1".into());
        FiniteSemigroup::from_fn(names, |a, b| {
            if a == n {
                b
            } else if b == n {
                a
            } else {
                s.mul(a, b)
            }
        })
        .expect("unit adjunction")
    }
}
