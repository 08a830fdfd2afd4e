//! Brute-force decomposability and next-context oracles.
//!
//! A search [`State`] is a forest together with the addresses of its default
//! holes that carry references from above. Whether a leaf of a partial
//! decomposition can be completed depends only on its state, so `dec` is
//! memoized per state.

use crate::algebra::{AlgebraError, Valuation};
use crate::augmented::StableContextSet;
use crate::bindec::{child, depth_cap, BinaryDecomposition, BindecError, NodeAddr};
use crate::semigroup::{green_classes, Green};
use crate::terms::{enumerate_factorizations, lcrs_leq, lcrs_quotient, prefix_leq, spa, Address, Factorization, Label, Term, TermError, Tree};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search depth cap {0} exceeded")]
    DepthCapExceeded(usize),
    #[error("forest is not decomposable")]
    NotDecomposable,
    #[error("minimal extension left an inherited reference at {0}")]
    InheritedReference(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Bindec(#[from] BindecError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// `A ∪ {σ(□_h)} ∪ {□_{h₁}+□_{h₂}}`.
pub fn in_standard_basis(f: &Term) -> bool {
    match f.roots.as_slice() {
        [t] => match &t.label {
            Label::Letter(_) => {
                t.children.is_empty() || (t.children.len() == 1 && t.children[0].is_default_hole())
            }
            _ => false,
        },
        [a, b] => a.is_default_hole() && b.is_default_hole(),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Basis {
    Standard,
    /// Exact term equality.
    Explicit(BTreeSet<Term>),
}

impl Basis {
    pub fn contains(&self, f: &Term) -> bool {
        match self {
            Basis::Standard => in_standard_basis(f),
            Basis::Explicit(s) => s.contains(f),
        }
    }

    pub fn leaves_of(tau: &BinaryDecomposition) -> Basis {
        Basis::Explicit(tau.leaf_forests().into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub forest: Term,
    /// Sorted addresses of reference-bearing default holes.
    pub tracked: Vec<Address>,
}

impl State {
    pub fn plain(forest: Term) -> State {
        State {
            forest,
            tracked: Vec::new(),
        }
    }

    /// Residue and factor states after plucking `fz`.
    pub fn split(&self, fz: &Factorization) -> Result<(State, State), TermError> {
        let residue = fz
            .ctx
            .compose(&Term::single(Tree::default_hole(&fz.factor)?))?;
        let mut s = fz.parent.clone();
        s.push(fz.start);
        let tagged: Vec<(Address, ())> = self.tracked.iter().map(|u| (u.clone(), ())).collect();
        let (r0, r1) = route_addresses(&s, fz.len - 1, &tagged)?;
        let mut t0: Vec<Address> = std::iter::once(s).chain(r0.into_iter().map(|(u, _)| u)).collect();
        let mut t1: Vec<Address> = r1.into_iter().map(|(u, _)| u).collect();
        t0.sort();
        t1.sort();
        Ok((
            State {
                forest: residue,
                tracked: t0,
            },
            State {
                forest: fz.factor.clone(),
                tracked: t1,
            },
        ))
    }

    /// Linking contexts of the tracked holes.
    pub fn linking_contexts(&self) -> Result<Vec<Term>, TermError> {
        self.tracked.iter().map(|u| self.forest.hole_at(u)).collect()
    }
}

/// Routes tagged addresses of a forest to the residue and the factor of a
/// pluck at `s` of a factor with the given width. The new hole at `s` is not
/// included.
pub fn route_addresses<T: Clone>(
    s: &[usize],
    factor_width: usize,
    tracked: &[(Address, T)],
) -> Result<(Vec<(Address, T)>, Vec<(Address, T)>), TermError> {
    let shifted = spa(s, &[factor_width + 1])?;
    let s1 = spa(s, &[1])?;
    let (mut r0, mut r1) = (Vec::new(), Vec::new());
    for (u, tag) in tracked {
        if !lcrs_leq(s, u) {
            r0.push((u.clone(), tag.clone()));
        } else if lcrs_leq(&shifted, u) {
            r0.push((spa(&s1, &lcrs_quotient(&shifted, u).expect("leq"))?, tag.clone()));
        } else {
            r1.push((lcrs_quotient(s, u).expect("leq"), tag.clone()));
        }
    }
    Ok((r0, r1))
}

/// Recovers the factorization `forest = ctx·factor`.
pub fn factorization_of(ctx: &Term, factor: &Term) -> Result<Factorization, TermError> {
    let s = ctx.sq_pos().ok_or(TermError::NotAContext)?;
    let (&start, parent) = s.split_last().ok_or(TermError::EmptyAddress)?;
    Ok(Factorization {
        ctx: ctx.clone(),
        factor: factor.clone(),
        parent: parent.to_vec(),
        start,
        len: factor.roots.len(),
    })
}

/// A valid next step: the factorization with both child states.
#[derive(Clone, Debug)]
pub struct Step {
    pub fz: Factorization,
    pub residue: State,
    pub factor: State,
}

pub struct SearchScope {
    set: StableContextSet,
    basis: Basis,
    cap: Option<usize>,
    memo: Mutex<HashMap<State, bool>>,
    capped: Mutex<HashMap<(State, usize), bool>>,
    hit_cap: AtomicBool,
}

impl SearchScope {
    pub fn new(set: StableContextSet, basis: Basis) -> Self {
        SearchScope {
            set,
            basis,
            cap: None,
            memo: Mutex::new(HashMap::new()),
            capped: Mutex::new(HashMap::new()),
            hit_cap: AtomicBool::new(false),
        }
    }

    /// Bounds the depth of decompositions considered by [`Self::is_decomposable`].
    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.cap = cap;
        self
    }

    pub fn set(&self) -> &StableContextSet {
        &self.set
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn in_set(&self, c: &Term) -> Result<bool, SearchError> {
        Ok(self.set.contains(c)?)
    }

    pub fn node_stable(&self, s: &State) -> Result<bool, SearchError> {
        for c in s.linking_contexts()? {
            if !self.set.contains(&c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_decomposable(&self, f: &Term) -> Result<bool, SearchError> {
        let s = State::plain(f.clone());
        match self.cap {
            Some(cap) if cap < depth_cap(f) => {
                self.hit_cap.store(false, Ordering::Relaxed);
                let r = self.dec_capped(&s, cap)?;
                if !r && self.hit_cap.load(Ordering::Relaxed) {
                    return Err(SearchError::DepthCapExceeded(cap));
                }
                Ok(r)
            }
            _ => self.dec(&s),
        }
    }

    /// Whether a leaf in state `s` extends to a full stable decomposition.
    pub fn dec(&self, s: &State) -> Result<bool, SearchError> {
        if let Some(&r) = self.memo.lock().expect("memo").get(s) {
            return Ok(r);
        }
        let r = self.node_stable(s)? && (self.basis.contains(&s.forest) || self.first_step(s)?);
        self.memo.lock().expect("memo").insert(s.clone(), r);
        Ok(r)
    }

    fn first_step(&self, s: &State) -> Result<bool, SearchError> {
        for fz in enumerate_factorizations(&s.forest) {
            if !self.set.contains(&fz.ctx)? {
                continue;
            }
            let (s0, s1) = s.split(&fz)?;
            if self.dec(&s1)? && self.dec(&s0)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn dec_capped(&self, s: &State, budget: usize) -> Result<bool, SearchError> {
        if budget >= depth_cap(&s.forest) {
            return self.dec(s);
        }
        let key = (s.clone(), budget);
        if let Some(&r) = self.capped.lock().expect("memo").get(&key) {
            return Ok(r);
        }
        let mut r = false;
        if self.node_stable(s)? {
            if self.basis.contains(&s.forest) {
                r = true;
            } else if budget == 0 {
                if !enumerate_factorizations(&s.forest).is_empty() {
                    self.hit_cap.store(true, Ordering::Relaxed);
                }
            } else {
                for fz in enumerate_factorizations(&s.forest) {
                    if !self.set.contains(&fz.ctx)? {
                        continue;
                    }
                    let (s0, s1) = s.split(&fz)?;
                    if self.dec_capped(&s1, budget - 1)? && self.dec_capped(&s0, budget - 1)? {
                        r = true;
                        break;
                    }
                }
            }
        }
        self.capped.lock().expect("memo").insert(key, r);
        Ok(r)
    }

    /// Every factorization usable at a leaf in state `s`, in enumeration order.
    pub fn steps(&self, s: &State) -> Result<Vec<Step>, SearchError> {
        let mut out = Vec::new();
        if !self.node_stable(s)? {
            return Ok(out);
        }
        for fz in enumerate_factorizations(&s.forest) {
            if !self.set.contains(&fz.ctx)? {
                continue;
            }
            let (residue, factor) = s.split(&fz)?;
            if self.dec(&factor)? && self.dec(&residue)? {
                out.push(Step { fz, residue, factor });
            }
        }
        Ok(out)
    }

    /// `NxtCtx`, as printed-sorted contexts.
    pub fn nxt_ctx(&self, s: &State) -> Result<Vec<Term>, SearchError> {
        let mut v: Vec<Term> = self.steps(s)?.into_iter().map(|st| st.fz.ctx).collect();
        sort_printed(&mut v);
        Ok(v)
    }

    /// Pairs `(C₁, C₂)` of consecutive right-child contexts.
    pub fn nxt_two_ctx(&self, s: &State) -> Result<Vec<(Term, Term)>, SearchError> {
        let mut out = Vec::new();
        for st in self.steps(s)? {
            for st2 in self.steps(&st.factor)? {
                out.push((st.fz.ctx.clone(), st2.fz.ctx));
            }
        }
        out.sort_by_key(|(a, b)| (a.to_string(), b.to_string()));
        Ok(out)
    }

    /// `{([φ(C₁)]_L, [φ(C₂)]_R)}`, as pairs of sorted class member lists.
    pub fn lr_set(&self, s: &State, val: &Valuation) -> Result<BTreeSet<(Vec<usize>, Vec<usize>)>, SearchError> {
        let g = green_classes(val.target());
        let mut out = BTreeSet::new();
        for (c1, c2) in self.nxt_two_ctx(s)? {
            if let (Some(a), Some(b)) = (val.value(&c1)?, val.value(&c2)?) {
                out.insert((g.class(Green::L, a).to_vec(), g.class(Green::R, b).to_vec()));
            }
        }
        Ok(out)
    }

    /// Index of a `≼`-minimal step, ties broken by least printed context.
    pub fn pick_minimal(steps: &[Step]) -> Option<usize> {
        let mut best: Option<(String, usize)> = None;
        for (i, st) in steps.iter().enumerate() {
            let dominated = steps
                .iter()
                .any(|o| o.fz.ctx != st.fz.ctx && prefix_leq(&o.fz.ctx, &st.fz.ctx).is_some());
            if dominated {
                continue;
            }
            let key = st.fz.ctx.to_string();
            if best.as_ref().map_or(true, |(k, _)| key < *k) {
                best = Some((key, i));
            }
        }
        best.map(|(_, i)| i)
    }
}

pub fn sort_printed(v: &mut [Term]) {
    v.sort_by_cached_key(Term::to_string);
}

/// A binary region under construction, with the search state of every node.
#[derive(Clone, Debug)]
pub struct Region {
    pub tau: BinaryDecomposition,
    pub states: BTreeMap<NodeAddr, State>,
}

impl Region {
    pub fn new(s: State) -> Region {
        Region {
            tau: BinaryDecomposition::singleton(s.forest.clone()),
            states: BTreeMap::from([(Vec::new(), s)]),
        }
    }

    pub fn expand(&mut self, x: &[u8], st: &Step) -> Result<(), SearchError> {
        self.tau = self.tau.expand(x, &st.fz.ctx, &st.fz.factor)?;
        self.states.insert(child(x, 0), st.residue.clone());
        self.states.insert(child(x, 1), st.factor.clone());
        Ok(())
    }

    pub fn state(&self, x: &[u8]) -> &State {
        &self.states[x]
    }

    pub fn leaf_states(&self) -> Vec<(NodeAddr, State)> {
        self.tau
            .leaves()
            .into_iter()
            .map(|x| {
                let s = self.states[&x].clone();
                (x, s)
            })
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.tau.len() == 1
    }
}

/// Step filter used by restricted extensions.
pub type StepFilter<'a> = dyn Fn(&Step) -> Result<bool, SearchError> + 'a;

/// Greedily extends every leaf below `x` with `≼`-minimal steps accepted by
/// `filter`, until no leaf admits one.
pub fn minimal_extend(scope: &SearchScope, region: &mut Region, x: &[u8], filter: &StepFilter) -> Result<(), SearchError> {
    let mut pending = vec![x.to_vec()];
    while let Some(y) = pending.pop() {
        let mut steps = scope.steps(region.state(&y))?;
        let mut keep = Vec::with_capacity(steps.len());
        for st in steps.drain(..) {
            if filter(&st)? {
                keep.push(st);
            }
        }
        if let Some(i) = SearchScope::pick_minimal(&keep) {
            region.expand(&y, &keep[i])?;
            pending.push(child(&y, 1));
            pending.push(child(&y, 0));
        }
    }
    Ok(())
}

/// Like [`minimal_extend`] but only along the down path from `x`.
pub fn minimal_centipede(scope: &SearchScope, region: &mut Region, x: &[u8], filter: &StepFilter) -> Result<NodeAddr, SearchError> {
    let mut y = x.to_vec();
    loop {
        let steps = scope.steps(region.state(&y))?;
        let mut keep = Vec::with_capacity(steps.len());
        for st in steps {
            if filter(&st)? {
                keep.push(st);
            }
        }
        match SearchScope::pick_minimal(&keep) {
            Some(i) => {
                region.expand(&y, &keep[i])?;
                y = child(&y, 0);
            }
            None => return Ok(y),
        }
    }
}

/// Minimal full extension of `Υ(f)`.
pub fn minimal_full_decomposition(scope: &SearchScope, f: &Term) -> Result<BinaryDecomposition, SearchError> {
    let s = State::plain(f.clone());
    if !scope.dec(&s)? {
        return Err(SearchError::NotDecomposable);
    }
    let mut region = Region::new(s);
    minimal_extend(scope, &mut region, &[], &|_| Ok(true))?;
    Ok(region.tau)
}

/// `NxtCtx(Υ(f), ε)` straight from the definition: try each first pluck,
/// then search explicit decomposition trees for a full stable completion.
pub fn nxt_ctx_definitional(set: &StableContextSet, basis: &Basis, f: &Term) -> Result<Vec<Term>, SearchError> {
    fn complete(set: &StableContextSet, basis: &Basis, tau: &BinaryDecomposition) -> Result<bool, SearchError> {
        if tau.check_stable(set)?.is_some() {
            return Ok(false);
        }
        let Some(x) = tau.leaves().into_iter().find(|x| !basis.contains(tau.forest(x))) else {
            return Ok(true);
        };
        for fz in enumerate_factorizations(tau.forest(&x)) {
            if !set.contains(&fz.ctx)? {
                continue;
            }
            if complete(set, basis, &tau.expand(&x, &fz.ctx, &fz.factor)?)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
    let root = BinaryDecomposition::singleton(f.clone());
    let mut out = Vec::new();
    for fz in enumerate_factorizations(f) {
        if !set.contains(&fz.ctx)? {
            continue;
        }
        if complete(set, basis, &root.expand(&[], &fz.ctx, &fz.factor)?)? {
            out.push(fz.ctx);
        }
    }
    sort_printed(&mut out);
    Ok(out)
}
