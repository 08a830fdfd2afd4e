//! Finite forest algebras `⟨H, V⟩` with `V ⊆ H^H`, letter morphisms lifted
//! through unraveling, and valuations into a target semigroup.
//!
//! Composition convention: `act(u·v, h) = act(u, act(v, h))`, so the product
//! in `V` is function composition `u ∘ v`.

use crate::semigroup::{rees_quotient, validate_semigroup, FiniteSemigroup, RawSemigroup, SemigroupError};
use crate::terms::{Label, Term, Tree};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("act({0}·{1}, {2}) differs from act({0}, act({1}, {2}))")]
    NotAction(usize, usize, usize),
    #[error("context elements {0} and {1} act identically")]
    NotFaithful(usize, usize),
    #[error("insertion of forest element {0} misbehaves on {1}")]
    BadInsertion(usize, usize),
    #[error("the forest monoid has no unit")]
    NoUnit,
    #[error("function {0:?} is not a total map on H")]
    BadFunction(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("expected a forest")]
    NotAForest,
    #[error("expected a context")]
    NotAContext,
    #[error("target subset is not closed under multiplication")]
    TargetNotClosed,
    #[error("valuation is not a morphism at context elements {0} and {1}")]
    NotAMorphism(usize, usize),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("invalid algebra json: {0}")]
    Json(String),
}

/// Smallest composition-closed set of `H → H` maps containing `gens` and the
/// identity. The identity is element `0`; every other element is named by its
/// shortest generator word.
pub fn close_function_monoid(
    h_len: usize,
    gens: &[(String, Vec<usize>)],
) -> Result<(FiniteSemigroup, Vec<Vec<usize>>), AlgebraError> {
    for (name, g) in gens {
        if g.len() != h_len || g.iter().any(|&x| x >= h_len) {
            return Err(AlgebraError::BadFunction(name.clone()));
        }
    }
    let mut funcs: Vec<Vec<usize>> = vec![(0..h_len).collect()];
    let mut names = vec!["1".to_string()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(funcs[0].clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (gname, g) in gens {
            let f: Vec<usize> = g.iter().map(|&x| funcs[i][x]).collect();
            if index.contains_key(&f) {
                continue;
            }
            let name = if i == 0 {
                gname.clone()
            } else {
                format!("{}·{}", names[i], gname)
            };
            index.insert(f.clone(), funcs.len());
            queue.push_back(funcs.len());
            funcs.push(f);
            names.push(name);
        }
    }
    let table: Vec<Vec<usize>> = funcs
        .iter()
        .map(|u| {
            funcs
                .iter()
                .map(|v| index[&v.iter().map(|&x| u[x]).collect::<Vec<_>>()])
                .collect()
        })
        .collect();
    let monoid = FiniteSemigroup::from_fn(names, |i, j| table[i][j])?;
    Ok((monoid, funcs))
}

#[derive(Clone, Debug)]
pub struct FiniteForestAlgebra {
    h: FiniteSemigroup,
    v: FiniteSemigroup,
    funcs: Vec<Vec<usize>>,
    inl: Vec<usize>,
    inr: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl FiniteForestAlgebra {
    /// Checks every axiom exhaustively.
    pub fn from_parts(
        h: FiniteSemigroup,
        v: FiniteSemigroup,
        funcs: Vec<Vec<usize>>,
        inl: Vec<usize>,
        inr: Vec<usize>,
    ) -> Result<Self, AlgebraError> {
        let hz = h.unit().ok_or(AlgebraError::NoUnit)?;
        let vu = v.unit().ok_or(AlgebraError::NoUnit)?;
        let n = h.len();
        if funcs.len() != v.len() {
            return Err(AlgebraError::BadFunction("action table".into()));
        }
        for (u, f) in funcs.iter().enumerate() {
            if f.len() != n || f.iter().any(|&x| x >= n) {
                return Err(AlgebraError::BadFunction(v.name(u).to_string()));
            }
        }
        if (0..n).any(|x| funcs[vu][x] != x) {
            return Err(AlgebraError::NotAction(vu, vu, 0));
        }
        for a in v.elements() {
            for b in v.elements() {
                let ab = v.mul(a, b);
                if let Some(x) = (0..n).find(|&x| funcs[ab][x] != funcs[a][funcs[b][x]]) {
                    return Err(AlgebraError::NotAction(a, b, x));
                }
            }
        }
        let mut index = HashMap::new();
        for (u, f) in funcs.iter().enumerate() {
            if let Some(&w) = index.get(f) {
                return Err(AlgebraError::NotFaithful(w, u));
            }
            index.insert(f.clone(), u);
        }
        if inl.len() != n || inr.len() != n {
            return Err(AlgebraError::BadInsertion(hz, hz));
        }
        for g in 0..n {
            for x in 0..n {
                if inl[g] >= v.len() || inr[g] >= v.len() {
                    return Err(AlgebraError::BadInsertion(g, x));
                }
                if funcs[inl[g]][x] != h.mul(g, x) || funcs[inr[g]][x] != h.mul(x, g) {
                    return Err(AlgebraError::BadInsertion(g, x));
                }
            }
        }
        Ok(FiniteForestAlgebra {
            h,
            v,
            funcs,
            inl,
            inr,
            index,
        })
    }

    /// `V` generated by the letter functions and all insertions.
    pub fn generate(h: FiniteSemigroup, letters: &[(String, Vec<usize>)]) -> Result<Self, AlgebraError> {
        h.unit().ok_or(AlgebraError::NoUnit)?;
        let n = h.len();
        let mut gens = letters.to_vec();
        for g in 0..n {
            gens.push((format!("l[{}]", h.name(g)), (0..n).map(|x| h.mul(g, x)).collect()));
            gens.push((format!("r[{}]", h.name(g)), (0..n).map(|x| h.mul(x, g)).collect()));
        }
        let (v, funcs) = close_function_monoid(n, &gens)?;
        let index: HashMap<Vec<usize>, usize> =
            funcs.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        let inl = (0..n)
            .map(|g| index[&(0..n).map(|x| h.mul(g, x)).collect::<Vec<_>>()])
            .collect();
        let inr = (0..n)
            .map(|g| index[&(0..n).map(|x| h.mul(x, g)).collect::<Vec<_>>()])
            .collect();
        FiniteForestAlgebra::from_parts(h, v, funcs, inl, inr)
    }

    pub fn h(&self) -> &FiniteSemigroup {
        &self.h
    }

    pub fn v(&self) -> &FiniteSemigroup {
        &self.v
    }

    pub fn hzero(&self) -> usize {
        self.h.unit().expect("validated")
    }

    pub fn vunit(&self) -> usize {
        self.v.unit().expect("validated")
    }

    pub fn act(&self, u: usize, x: usize) -> usize {
        self.funcs[u][x]
    }

    pub fn function(&self, u: usize) -> &[usize] {
        &self.funcs[u]
    }

    pub fn index_of_function(&self, f: &[usize]) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn inl(&self, g: usize) -> usize {
        self.inl[g]
    }

    pub fn inr(&self, g: usize) -> usize {
        self.inr[g]
    }
}

/// A letter assignment `A → V` lifted to `α̃` on forests and `φ̃` on contexts,
/// both reading default holes through their payloads.
#[derive(Debug)]
pub struct LiftedMorphism {
    alg: Arc<FiniteForestAlgebra>,
    letters: BTreeMap<String, usize>,
    forest_memo: Mutex<HashMap<Term, usize>>,
    ctx_memo: Mutex<HashMap<Term, usize>>,
}

pub fn lift_letter_map(
    alg: Arc<FiniteForestAlgebra>,
    letters: BTreeMap<String, usize>,
) -> Result<LiftedMorphism, AlgebraError> {
    if let Some((name, _)) = letters.iter().find(|(_, &u)| u >= alg.v().len()) {
        return Err(AlgebraError::UnknownElement(name.clone()));
    }
    Ok(LiftedMorphism {
        alg,
        letters,
        forest_memo: Mutex::new(HashMap::new()),
        ctx_memo: Mutex::new(HashMap::new()),
    })
}

impl LiftedMorphism {
    pub fn algebra(&self) -> &Arc<FiniteForestAlgebra> {
        &self.alg
    }

    pub fn letters(&self) -> impl Iterator<Item = &str> {
        self.letters.keys().map(String::as_str)
    }

    pub fn letter_value(&self, name: &str) -> Result<usize, AlgebraError> {
        self.letters
            .get(name)
            .copied()
            .ok_or_else(|| AlgebraError::UnknownLetter(name.to_string()))
    }

    /// `α̃(f)`.
    pub fn alpha(&self, f: &Term) -> Result<usize, AlgebraError> {
        if let Some(&x) = self.forest_memo.lock().expect("memo").get(f) {
            return Ok(x);
        }
        let x = self.alpha_list(&f.roots)?;
        self.forest_memo.lock().expect("memo").insert(f.clone(), x);
        Ok(x)
    }

    /// `φ̃(C)`.
    pub fn beta(&self, c: &Term) -> Result<usize, AlgebraError> {
        if c.hole_count() != 1 {
            return Err(AlgebraError::NotAContext);
        }
        if let Some(&x) = self.ctx_memo.lock().expect("memo").get(c) {
            return Ok(x);
        }
        let x = self.beta_list(&c.roots)?;
        self.ctx_memo.lock().expect("memo").insert(c.clone(), x);
        Ok(x)
    }

    fn alpha_list(&self, trees: &[Tree]) -> Result<usize, AlgebraError> {
        let h = self.alg.h();
        trees.iter().try_fold(self.alg.hzero(), |acc, t| {
            let x = match &t.label {
                Label::Letter(a) => self.alg.act(self.letter_value(a)?, self.alpha_list(&t.children)?),
                Label::DefaultHole(p) => self.alpha_list(&p.roots)?,
                Label::Hole => return Err(AlgebraError::NotAForest),
            };
            Ok(h.mul(acc, x))
        })
    }

    fn beta_list(&self, trees: &[Tree]) -> Result<usize, AlgebraError> {
        let i = trees
            .iter()
            .position(|t| t.hole_count() > 0)
            .ok_or(AlgebraError::NotAContext)?;
        let v = self.alg.v();
        let left = self.alpha_list(&trees[..i])?;
        let right = self.alpha_list(&trees[i + 1..])?;
        let t = &trees[i];
        let inner = match &t.label {
            Label::Hole => self.alg.vunit(),
            Label::Letter(a) => v.mul(self.letter_value(a)?, self.beta_list(&t.children)?),
            Label::DefaultHole(_) => return Err(AlgebraError::NotAContext),
        };
        Ok(v.mul(v.mul(self.alg.inl(left), self.alg.inr(right)), inner))
    }
}

/// A partial morphism `V ⇀ S` whose domain is closed under products. The
/// contexts mapped into the domain form `Ṽ`.
#[derive(Debug, Clone)]
pub struct Valuation {
    morphism: Arc<LiftedMorphism>,
    target: Arc<FiniteSemigroup>,
    map: Vec<Option<usize>>,
}

impl Valuation {
    pub fn new(
        morphism: Arc<LiftedMorphism>,
        target: Arc<FiniteSemigroup>,
        map: Vec<Option<usize>>,
    ) -> Result<Self, AlgebraError> {
        let v = morphism.algebra().v();
        if map.len() != v.len() {
            return Err(AlgebraError::BadFunction("valuation map".into()));
        }
        if let Some(s) = map.iter().flatten().find(|&&s| s >= target.len()) {
            return Err(AlgebraError::UnknownElement(s.to_string()));
        }
        for a in v.elements() {
            for b in v.elements() {
                if let (Some(x), Some(y)) = (map[a], map[b]) {
                    if map[v.mul(a, b)] != Some(target.mul(x, y)) {
                        return Err(AlgebraError::NotAMorphism(a, b));
                    }
                }
            }
        }
        Ok(Valuation {
            morphism,
            target,
            map,
        })
    }

    /// `φ̃` itself, with `V` as the target.
    pub fn identity(morphism: Arc<LiftedMorphism>) -> Self {
        let v = morphism.algebra().v().clone();
        let map = v.elements().map(Some).collect();
        Valuation {
            morphism,
            target: Arc::new(v),
            map,
        }
    }

    pub fn morphism(&self) -> &Arc<LiftedMorphism> {
        &self.morphism
    }

    pub fn target(&self) -> &FiniteSemigroup {
        &self.target
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn value(&self, c: &Term) -> Result<Option<usize>, AlgebraError> {
        Ok(self.map[self.morphism.beta(c)?])
    }

    pub fn image(&self) -> BTreeSet<usize> {
        self.map.iter().flatten().copied().collect()
    }

    /// The restriction to `φ⁻¹[T]`, with `T` as the new target.
    pub fn restrict(&self, t: &[usize]) -> Result<Valuation, AlgebraError> {
        let (sub, embed) = self.target.restrict(t).map_err(|e| match e {
            SemigroupError::NotClosedSubset => AlgebraError::TargetNotClosed,
            e => e.into(),
        })?;
        let map = self.map.iter().map(|s| s.and_then(|s| embed[s])).collect();
        Ok(Valuation {
            morphism: self.morphism.clone(),
            target: Arc::new(sub),
            map,
        })
    }

    /// Composition with the Rees quotient by `ideal`; also returns the quotient map.
    pub fn quotient(&self, ideal: &[usize]) -> Result<(Valuation, Vec<usize>), AlgebraError> {
        let (q, quo) = rees_quotient(&self.target, ideal)?;
        let map = self.map.iter().map(|s| s.map(|s| quo[s])).collect();
        Ok((
            Valuation {
                morphism: self.morphism.clone(),
                target: Arc::new(q),
                map,
            },
            quo,
        ))
    }
}

/// Wire format for a forest algebra with its letter functions and an
/// optional valuation (defaults to the identity on `V`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawForestAlgebra {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub forests: RawSemigroup,
    pub letters: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<RawValuation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawValuation {
    pub target: RawSemigroup,
    /// Context elements given by their `H → H` table; unlisted ones are outside `Ṽ`.
    pub map: Vec<RawValuationEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawValuationEntry {
    pub function: Vec<usize>,
    pub value: String,
}

#[derive(Clone, Debug)]
pub struct AlgebraBundle {
    pub name: String,
    pub algebra: Arc<FiniteForestAlgebra>,
    pub morphism: Arc<LiftedMorphism>,
    pub valuation: Arc<Valuation>,
}

pub fn validate_algebra(raw: &RawForestAlgebra) -> Result<AlgebraBundle, AlgebraError> {
    let h = validate_semigroup(&raw.forests)?;
    let letters: Vec<(String, Vec<usize>)> =
        raw.letters.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let alg = Arc::new(FiniteForestAlgebra::generate(h, &letters)?);
    let letter_map = raw
        .letters
        .iter()
        .map(|(k, f)| (k.clone(), alg.index_of_function(f).expect("generator in closure")))
        .collect();
    let morphism = Arc::new(lift_letter_map(alg.clone(), letter_map)?);
    let valuation = match &raw.valuation {
        None => Valuation::identity(morphism.clone()),
        Some(rv) => {
            let target = Arc::new(validate_semigroup(&rv.target)?);
            let mut map = vec![None; alg.v().len()];
            for e in &rv.map {
                let u = alg
                    .index_of_function(&e.function)
                    .ok_or_else(|| AlgebraError::UnknownElement(format!("{:?}", e.function)))?;
                let s = target
                    .index_of(&e.value)
                    .ok_or_else(|| AlgebraError::UnknownElement(e.value.clone()))?;
                map[u] = Some(s);
            }
            Valuation::new(morphism.clone(), target, map)?
        }
    };
    Ok(AlgebraBundle {
        name: raw.name.clone().unwrap_or_default(),
        algebra: alg,
        morphism,
        valuation: Arc::new(valuation),
    })
}

pub fn load_algebra(text: &str) -> Result<AlgebraBundle, AlgebraError> {
    let raw: RawForestAlgebra =
        serde_json::from_str(text).map_err(|e| AlgebraError::Json(e.to_string()))?;
    validate_algebra(&raw)
}

/// Small algebras used throughout tests and by the command line.
pub mod examples {
    use super::*;
    use crate::semigroup::examples::{cyclic_group, null2, rectangular_band, with_unit, with_zero};

    pub const TBF_JSON: &str = include_str!("../data/tbf.json");
    pub const NULL_JSON: &str = include_str!("../data/null.json");
    pub const Z2_JSON: &str = include_str!("../data/z2.json");

    fn build(h: FiniteSemigroup, letters: &[(&str, Vec<usize>)]) -> Arc<LiftedMorphism> {
        let letters: Vec<(String, Vec<usize>)> =
            letters.iter().map(|(k, f)| (k.to_string(), f.clone())).collect();
        let alg = Arc::new(FiniteForestAlgebra::generate(h, &letters).expect("valid algebra"));
        let map = letters
            .iter()
            .map(|(k, f)| (k.clone(), alg.index_of_function(f).expect("generator")))
            .collect();
        Arc::new(lift_letter_map(alg, map).expect("letters in V"))
    }

    /// Node count modulo `n`, letters `a` and `b`; target `V ≅ Zₙ`.
    pub fn count_mod(n: usize) -> Arc<Valuation> {
        let inc: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
        let m = build(cyclic_group(n), &[("a", inc.clone()), ("b", inc)]);
        Arc::new(Valuation::identity(m))
    }

    /// Node count saturating at 2, valued in the null semigroup `{0, a}`:
    /// one node ↦ `a`, two or more ↦ `0`, the bare hole outside `Ṽ`.
    pub fn null_count() -> Arc<Valuation> {
        let h = FiniteSemigroup::from_fn(vec!["0".into(), "1".into(), "2+".into()], |x, y| (x + y).min(2))
            .expect("saturating monoid");
        let inc = vec![1, 2, 2];
        let m = build(h, &[("a", inc.clone()), ("b", inc)]);
        let target = Arc::new(null2());
        let map = (0..m.algebra().v().len())
            .map(|u| match m.algebra().act(u, 0) {
                0 => None,
                1 => Some(1),
                _ => Some(0),
            })
            .collect();
        Arc::new(Valuation::new(m, target, map).expect("morphism"))
    }

    /// Forests valued in the monoid `m` under `+`, each letter acting as a
    /// left translation. Contexts acting as a left translation by an element
    /// of `target` are valued by that element; the rest fall outside `Ṽ`.
    pub fn translations(m: FiniteSemigroup, letters: &[(&str, usize)], target: &[usize]) -> Arc<Valuation> {
        let n = m.len();
        let lambda = |x: usize| (0..n).map(|h| m.mul(x, h)).collect::<Vec<_>>();
        let gens: Vec<(&str, Vec<usize>)> = letters.iter().map(|(k, x)| (*k, lambda(*x))).collect();
        let mor = build(m.clone(), &gens);
        let alg = mor.algebra().clone();
        let map = alg
            .v()
            .elements()
            .map(|u| target.iter().copied().find(|&x| alg.function(u) == lambda(x).as_slice()))
            .collect();
        let val = Valuation::new(mor, Arc::new(m), map).expect("translations compose");
        Arc::new(val.restrict(target).expect("target is closed"))
    }

    /// Letters `a`, `b` translating by the corners `r0c0`, `r1c1` of the
    /// 2×2 rectangular band (with a unit adjoined for the empty forest).
    pub fn rect_band() -> Arc<Valuation> {
        translations(with_unit(&rectangular_band(2, 2)), &[("a", 0), ("b", 3)], &[0, 1, 2, 3])
    }

    /// Two left zeros with a unit and a zero adjoined: `a`, `b` translate by
    /// the left zeros, `c` by the unit, `z` by the zero.
    pub fn left_zero_chain() -> Arc<Valuation> {
        let m = with_zero(&with_unit(&rectangular_band(2, 1)));
        translations(m, &[("a", 0), ("b", 1), ("c", 2), ("z", 3)], &[0, 1, 2, 3])
    }

    pub fn tbf() -> AlgebraBundle {
        load_algebra(TBF_JSON).expect("bundled algebra")
    }
}
