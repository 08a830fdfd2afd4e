//! ℛ-alignment checks and the bounded-depth constructions over groups,
//! null, simple and 0-simple targets, and arbitrary aligned targets.
//!
//! Every constructor works on search states, so a leaf handed to a
//! recursive call still respects the references that reach it from above.
//! Steps whose correctness depends on alignment are re-checked at run time
//! and reported as [`BoundsError::AlignmentRequired`].

use crate::algebra::{AlgebraError, Valuation};
use crate::augmented::{unravel, StableContextSet};
use crate::gendec::{fmt_gen, fold_centipede, fold_idempotent_region, is_centipede, GenError, GenKind, GeneralDecomposition};
use crate::search::{minimal_centipede, minimal_extend, Basis, Region, SearchError, SearchScope, State, Step};
use crate::semigroup::{classify, green_classes, j_minimal_nonzero, principal_ideal, ClassTag, Green, SemigroupError};
use crate::terms::{enumerate_factorizations, Term, TermError, Tree};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("target is not a group")]
    NotAGroup,
    #[error("target is neither simple nor 0-simple")]
    NotSimple,
    #[error("target is not null")]
    NotNull,
    #[error("forest is not decomposable")]
    NotDecomposable,
    #[error("alignment-dependent step failed: {0}")]
    AlignmentRequired(String),
    #[error("no inner decomposition for node {0} valued {1}")]
    InnerNotDecomposable(String, usize),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Term(#[from] TermError),
}

type Res<T> = Result<T, BoundsError>;
type Gd = GeneralDecomposition;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Non-conclusive: no violation among the forests enumerated.
    AlignedUpTo(usize),
    Violation { forest: Term, c1: Term, c2: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentReport {
    pub verdict: Verdict,
    pub max_nodes: usize,
    pub hole_pool: Vec<Term>,
    pub forests_checked: usize,
}

#[derive(Serialize)]
struct RawReport {
    verdict: &'static str,
    size: Option<usize>,
    forest: Option<String>,
    c1: Option<String>,
    c2: Option<String>,
    max_nodes: usize,
    hole_pool: Vec<String>,
    forests_checked: usize,
}

impl AlignmentReport {
    pub fn is_violation(&self) -> bool {
        matches!(self.verdict, Verdict::Violation { .. })
    }

    pub fn to_json(&self) -> String {
        let (verdict, size, forest, c1, c2) = match &self.verdict {
            Verdict::AlignedUpTo(n) => ("aligned_up_to", Some(*n), None, None, None),
            Verdict::Violation { forest, c1, c2 } => (
                "violation",
                Some(forest.node_count()),
                Some(forest.to_string()),
                Some(c1.to_string()),
                Some(c2.to_string()),
            ),
        };
        serde_json::to_string_pretty(&RawReport {
            verdict,
            size,
            forest,
            c1,
            c2,
            max_nodes: self.max_nodes,
            hole_pool: self.hole_pool.iter().map(Term::to_string).collect(),
            forests_checked: self.forests_checked,
        })
        .expect("plain struct")
    }
}

/// First offending pair `(C₁, C₂)` of `f`, if any.
pub fn alignment_violation(f: &Term, val: &Valuation) -> Res<Option<(Term, Term)>> {
    Ok(violating_pairs(f, val, true)?.into_iter().next())
}

/// Every ordered pair of contexts of `f` breaking alignment.
pub fn alignment_violations(f: &Term, val: &Valuation) -> Res<Vec<(Term, Term)>> {
    violating_pairs(f, val, false)
}

fn violating_pairs(f: &Term, val: &Valuation, first_only: bool) -> Res<Vec<(Term, Term)>> {
    let s = val.target();
    let g = green_classes(s);
    let mut fzs = Vec::new();
    for fz in enumerate_factorizations(f) {
        if let Some(v) = val.value(&fz.ctx)? {
            fzs.push((fz.ctx, v));
        }
    }
    let mut out = Vec::new();
    for (c1, v1) in &fzs {
        for (c2, v2) in &fzs {
            if c1 == c2 || !g.equiv(Green::J, *v1, *v2) {
                continue;
            }
            let witnessed = s.elements().any(|r| g.equiv(Green::J, r, *v1) && s.mul(*v1, r) == *v2);
            if !witnessed {
                out.push((c1.clone(), c2.clone()));
                if first_only {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

pub fn check_r_aligned_forest(f: &Term, val: &Valuation) -> Res<AlignmentReport> {
    let verdict = match alignment_violation(f, val)? {
        Some((c1, c2)) => Verdict::Violation {
            forest: f.clone(),
            c1,
            c2,
        },
        None => Verdict::AlignedUpTo(f.node_count()),
    };
    Ok(AlignmentReport {
        verdict,
        max_nodes: f.node_count(),
        hole_pool: Vec::new(),
        forests_checked: 1,
    })
}

/// All forests with `1..=max_nodes` nodes over `letters`, with default holes
/// carrying the `payloads`; each default hole counts as one node. Sorted by
/// size, then by enumeration order.
pub fn enumerate_forests(letters: &[String], payloads: &[Term], max_nodes: usize) -> Res<Vec<Term>> {
    let mut trees: Vec<Vec<Tree>> = vec![Vec::new(); max_nodes + 1];
    let mut forests: Vec<Vec<Vec<Tree>>> = vec![Vec::new(); max_nodes + 1];
    forests[0].push(Vec::new());
    for n in 1..=max_nodes {
        if n == 1 {
            trees[1].extend(letters.iter().map(|a| Tree::leaf(a)));
            for p in payloads {
                trees[1].push(Tree::default_hole(p)?);
            }
        } else {
            let mut next = Vec::new();
            for a in letters {
                for f in &forests[n - 1] {
                    next.push(Tree::node(a, Term::from_trees(f.clone())));
                }
            }
            trees[n] = next;
        }
        let mut out = Vec::new();
        for k in 1..=n {
            for t in &trees[k] {
                for rest in &forests[n - k] {
                    let mut f = Vec::with_capacity(rest.len() + 1);
                    f.push(t.clone());
                    f.extend(rest.iter().cloned());
                    out.push(f);
                }
            }
        }
        forests[n] = out;
    }
    Ok(forests
        .into_iter()
        .skip(1)
        .flatten()
        .map(Term::from_trees)
        .collect())
}

/// Bounded surrogate for alignment of the whole morphism.
pub fn check_r_aligned_bounded(val: &Valuation, max_nodes: usize, hole_pool: &[Term]) -> Res<AlignmentReport> {
    let letters: Vec<String> = val.morphism().letters().map(str::to_string).collect();
    let forests = enumerate_forests(&letters, hole_pool, max_nodes)?;
    let mut checked = 0;
    for f in forests {
        checked += 1;
        if let Some((c1, c2)) = alignment_violation(&f, val)? {
            return Ok(AlignmentReport {
                verdict: Verdict::Violation { forest: f, c1, c2 },
                max_nodes,
                hole_pool: hole_pool.to_vec(),
                forests_checked: checked,
            });
        }
    }
    Ok(AlignmentReport {
        verdict: Verdict::AlignedUpTo(max_nodes),
        max_nodes,
        hole_pool: hole_pool.to_vec(),
        forests_checked: checked,
    })
}

/// The depth bound proved for a target of the given class and size.
pub fn depth_bound(tag: ClassTag, size: usize) -> usize {
    match tag {
        ClassTag::Group => 2 * size - 1,
        ClassTag::Null => 2,
        ClassTag::Simple | ClassTag::ZeroSimple => 2 * size + 1,
        ClassTag::General => 4 * size - 3,
    }
}

/// `Ṽ` over the whole target, with the standard basis.
pub fn default_scope(val: &Arc<Valuation>) -> SearchScope {
    SearchScope::new(StableContextSet::domain_of(val.clone()), Basis::Standard)
}

fn leaf_of(scope: &SearchScope, s: &State) -> Res<Gd> {
    if scope.basis().contains(&s.forest) && scope.node_stable(s)? {
        Ok(Gd::leaf(s.forest.clone()))
    } else {
        Err(BoundsError::NotDecomposable)
    }
}

fn value_is(val: &Valuation, st: &Step, v: usize) -> Result<bool, SearchError> {
    Ok(val.value(&st.fz.ctx)? == Some(v))
}

/// Replaces every leaf by `plug(forest)`, keeping the leaf's context.
fn plug_leaves(g: &Gd, plug: &mut dyn FnMut(&Term) -> Res<Gd>) -> Res<Gd> {
    if g.kind == GenKind::Leaf {
        let mut out = plug(&g.forest)?;
        out.ctx = g.ctx.clone();
        return Ok(out);
    }
    let children = g
        .children
        .iter()
        .map(|c| plug_leaves(c, plug))
        .collect::<Res<Vec<_>>>()?;
    Ok(Gd { children, ..g.clone() })
}

fn entry(f: &Term, scope: &SearchScope) -> Res<State> {
    if !scope.is_decomposable(f)? {
        return Err(BoundsError::NotDecomposable);
    }
    Ok(State::plain(f.clone()))
}

fn finish(g: Gd, val: &Arc<Valuation>, scope: &SearchScope) -> Res<Gd> {
    g.validate(scope.set(), Some(val), Some(scope.basis()))?;
    Ok(g)
}

// ---------------------------------------------------------------- groups

pub fn decompose_group(f: &Term, val: &Arc<Valuation>, scope: &SearchScope) -> Res<Gd> {
    if classify(val.target()).tag != ClassTag::Group {
        return Err(BoundsError::NotAGroup);
    }
    let s = entry(f, scope)?;
    finish(group_state(val, scope, &s)?, val, scope)
}

/// Group construction from a leaf state of a partial decomposition.
pub fn group_state(val: &Arc<Valuation>, scope: &SearchScope, s: &State) -> Res<Gd> {
    let unit = val.target().unit().ok_or(BoundsError::NotAGroup)?;
    let steps = scope.steps(s)?;
    if steps.is_empty() {
        return leaf_of(scope, s);
    }
    let mut region = Region::new(s.clone());
    let mut has_unit = false;
    for st in &steps {
        has_unit |= value_is(val, st, unit)?;
    }
    if has_unit {
        minimal_extend(scope, &mut region, &[], &|st| value_is(val, st, unit))?;
        let kids = region
            .leaf_states()
            .iter()
            .map(|(_, st)| group_state(val, scope, st))
            .collect::<Res<Vec<_>>>()?;
        Ok(fold_idempotent_region(&region.tau, unit, val, kids)?)
    } else {
        minimal_centipede(scope, &mut region, &[], &|_| Ok(true))?;
        let kids = region
            .leaf_states()
            .iter()
            .map(|(_, st)| group_state(val, scope, st))
            .collect::<Res<Vec<_>>>()?;
        Ok(fold_centipede(&region.tau, kids)?)
    }
}

// ------------------------------------------------------------------ null

pub fn decompose_null(f: &Term, val: &Arc<Valuation>, scope: &SearchScope) -> Res<Gd> {
    if classify(val.target()).tag != ClassTag::Null {
        return Err(BoundsError::NotNull);
    }
    let s = entry(f, scope)?;
    finish(null_state(val, scope, &s)?, val, scope)
}

pub fn null_state(val: &Arc<Valuation>, scope: &SearchScope, s: &State) -> Res<Gd> {
    let zero = val.target().zero().ok_or(BoundsError::NotNull)?;
    let mut region = Region::new(s.clone());
    minimal_extend(scope, &mut region, &[], &|st| value_is(val, st, zero))?;
    if region.is_trivial() {
        return null_leg(scope, s);
    }
    let kids = region
        .leaf_states()
        .iter()
        .map(|(_, st)| null_leg(scope, st))
        .collect::<Res<Vec<_>>>()?;
    Ok(fold_idempotent_region(&region.tau, zero, val, kids)?)
}

fn null_leg(scope: &SearchScope, s: &State) -> Res<Gd> {
    let mut region = Region::new(s.clone());
    minimal_extend(scope, &mut region, &[], &|_| Ok(true))?;
    if region.is_trivial() {
        return leaf_of(scope, s);
    }
    if !is_centipede(&region.tau) {
        return Err(BoundsError::AlignmentRequired(format!(
            "minimal decomposition of {} is not a centipede",
            s.forest
        )));
    }
    let kids = region
        .leaf_states()
        .iter()
        .map(|(_, st)| leaf_of(scope, st))
        .collect::<Res<Vec<_>>>()?;
    Ok(fold_centipede(&region.tau, kids)?)
}

// ------------------------------------------------------- simple, 0-simple

pub fn decompose_simple(f: &Term, val: &Arc<Valuation>, scope: &SearchScope) -> Res<Gd> {
    match classify(val.target()).tag {
        ClassTag::Simple | ClassTag::ZeroSimple | ClassTag::Group => {}
        _ => return Err(BoundsError::NotSimple),
    }
    let s = entry(f, scope)?;
    finish(simple_state(val, scope, &s)?, val, scope)
}

type Lr = BTreeSet<(Vec<usize>, Vec<usize>)>;

pub fn simple_state(val: &Arc<Valuation>, scope: &SearchScope, s: &State) -> Res<Gd> {
    let Some(zero) = val.target().zero() else {
        return SimpleRun { val, scope }.by_lr(s);
    };
    let mut region = Region::new(s.clone());
    minimal_extend(scope, &mut region, &[], &|st| value_is(val, st, zero))?;
    let run = SimpleRun { val, scope };
    if region.is_trivial() {
        return run.by_lr(s);
    }
    let kids = region
        .leaf_states()
        .iter()
        .map(|(_, st)| run.by_lr(st))
        .collect::<Res<Vec<_>>>()?;
    Ok(fold_idempotent_region(&region.tau, zero, val, kids)?)
}

struct SimpleRun<'a> {
    val: &'a Arc<Valuation>,
    scope: &'a SearchScope,
}

impl SimpleRun<'_> {
    fn lr(&self, s: &State) -> Res<Lr> {
        Ok(self.scope.lr_set(s, self.val)?)
    }

    fn image_of_nxt(&self, s: &State) -> Result<BTreeSet<usize>, SearchError> {
        let mut out = BTreeSet::new();
        for st in self.scope.steps(s)? {
            if let Some(v) = self.val.value(&st.fz.ctx)? {
                out.insert(v);
            }
        }
        Ok(out)
    }

    /// Induction on the size of the LR set of `s`.
    fn by_lr(&self, s: &State) -> Res<Gd> {
        let lr = self.lr(s)?;
        let Some((al, ar)) = lr.iter().next().cloned() else {
            return self.lr_base(s);
        };
        let zero = self.val.target().zero();
        let mut region = Region::new(s.clone());
        let bottom = minimal_centipede(self.scope, &mut region, &[], &|st| {
            let Some(v) = self.val.value(&st.fz.ctx)? else {
                return Ok(false);
            };
            Ok(al.contains(&v) && self.image_of_nxt(&st.factor)?.iter().any(|u| ar.contains(u)))
        })?;
        if region.is_trivial() {
            return Err(BoundsError::AlignmentRequired(format!("no L-step at {}", s.forest)));
        }
        let g: Vec<usize> = al.iter().copied().filter(|a| ar.contains(a)).collect();
        let t = self.val.target();
        let closed = !g.is_empty() && g.iter().all(|&a| g.iter().all(|&b| g.contains(&t.mul(a, b))));
        if !closed {
            return Err(BoundsError::AlignmentRequired(format!("L∩R class {g:?} is not closed")));
        }
        let mut kids = Vec::new();
        for (x, st) in region.leaf_states() {
            if x == bottom {
                kids.push(self.smaller(&lr, &(al.clone(), ar.clone()), &st)?);
            } else {
                kids.push(self.leg(&lr, &al, &ar, &g, zero, &st)?);
            }
        }
        Ok(fold_centipede(&region.tau, kids)?)
    }

    fn lr_base(&self, s: &State) -> Res<Gd> {
        let mut region = Region::new(s.clone());
        minimal_centipede(self.scope, &mut region, &[], &|_| Ok(true))?;
        if region.is_trivial() {
            return leaf_of(self.scope, s);
        }
        let kids = region
            .leaf_states()
            .iter()
            .map(|(_, st)| {
                leaf_of(self.scope, st).map_err(|_| {
                    BoundsError::AlignmentRequired(format!("centipede leaf {} is not in the basis", st.forest))
                })
            })
            .collect::<Res<Vec<_>>>()?;
        Ok(fold_centipede(&region.tau, kids)?)
    }

    /// Recurses on a state whose LR set must shrink and lose `pair`.
    fn smaller(&self, lr: &Lr, pair: &(Vec<usize>, Vec<usize>), s: &State) -> Res<Gd> {
        let sub = self.lr(s)?;
        if sub.contains(pair) || sub.len() >= lr.len() {
            return Err(BoundsError::AlignmentRequired(format!("LR set does not shrink at {}", s.forest)));
        }
        self.by_lr(s)
    }

    /// Every nonzero value of a context of `f₁` lies in `A_R`.
    fn factor_ok(&self, f1: &Term, ar: &[usize], zero: Option<usize>) -> Result<bool, SearchError> {
        for fz in enumerate_factorizations(&unravel(f1)) {
            if let Some(v) = self.val.value(&fz.ctx)? {
                if Some(v) != zero && !ar.contains(&v) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn leg(&self, lr: &Lr, al: &[usize], ar: &[usize], g: &[usize], zero: Option<usize>, z: &State) -> Res<Gd> {
        let mut region = Region::new(z.clone());
        minimal_extend(self.scope, &mut region, &[], &|st| {
            let Some(v) = self.val.value(&st.fz.ctx)? else {
                return Ok(false);
            };
            Ok(g.contains(&v) && self.factor_ok(&st.factor.forest, ar, zero)?)
        })?;
        let pair = (al.to_vec(), ar.to_vec());
        let leaves = region.leaf_states();
        let mut by_forest: HashMap<Term, State> = HashMap::new();
        for (_, w) in &leaves {
            let sub = self.lr(w)?;
            if sub.contains(&pair) || sub.len() >= lr.len() {
                return Err(BoundsError::AlignmentRequired(format!("LR set does not shrink at {}", w.forest)));
            }
            by_forest.entry(w.forest.clone()).or_insert_with(|| w.clone());
        }
        let basis = Basis::Explicit(leaves.iter().map(|(_, w)| w.forest.clone()).collect());
        let gval = Arc::new(self.val.restrict(g)?);
        let gscope = SearchScope::new(StableContextSet::preimage(self.val.clone(), g.iter().copied(), false)?, basis);
        let start = State::plain(z.forest.clone());
        if !gscope.dec(&start)? {
            return Err(BoundsError::AlignmentRequired(format!("leg {} has no group decomposition", z.forest)));
        }
        let inner = group_state(&gval, &gscope, &start)?.map_values(&|k| g[k]);
        plug_leaves(&inner, &mut |f| {
            let w = by_forest
                .get(f)
                .ok_or_else(|| BoundsError::AlignmentRequired(format!("unexpected leaf {f}")))?;
            self.by_lr(w)
        })
    }
}

// ------------------------------------------------------------------ main

pub fn decompose_main(f: &Term, val: &Arc<Valuation>, scope: &SearchScope) -> Res<Gd> {
    let s = entry(f, scope)?;
    finish(main_state(val, scope, &s)?, val, scope)
}

/// Dispatches on the class of the target; `General` targets recurse over the
/// Rees quotient by the ideal of a `J`-minimal nonzero element.
pub fn main_state(val: &Arc<Valuation>, scope: &SearchScope, s: &State) -> Res<Gd> {
    let t = val.target();
    match classify(t).tag {
        ClassTag::Group => return group_state(val, scope, s),
        ClassTag::Null => return null_state(val, scope, s),
        ClassTag::Simple | ClassTag::ZeroSimple => return simple_state(val, scope, s),
        ClassTag::General => {}
    }
    let a = j_minimal_nonzero(t)?;
    let ideal = principal_ideal(t, a);
    let (qval, quo) = val.quotient(&ideal)?;
    let qval = Arc::new(qval);
    let qzero = qval.target().len() - 1;
    let mut back = vec![usize::MAX; qzero];
    for (x, &k) in quo.iter().enumerate() {
        if k != qzero {
            back[k] = x;
        }
    }
    let upper = main_state(&qval, scope, s)?;
    let mval = Arc::new(val.restrict(&ideal)?);
    let inner_set = StableContextSet::preimage(val.clone(), ideal.iter().copied(), false)?;
    expand_zero(&upper, &mut |g| {
        let scope = SearchScope::new(inner_set.clone(), Basis::Explicit(g.children.iter().map(|c| c.forest.clone()).collect()));
        let start = State::plain(g.forest.clone());
        let inner = match classify(mval.target()).tag {
            ClassTag::Group => group_state(&mval, &scope, &start)?,
            ClassTag::Null => null_state(&mval, &scope, &start)?,
            ClassTag::Simple | ClassTag::ZeroSimple => simple_state(&mval, &scope, &start)?,
            ClassTag::General => return Err(BoundsError::NotSimple),
        };
        Ok(inner.map_values(&|k| ideal[k]))
    }, qzero, &|k| back[k])
}

/// Maps ℑ values through `back`, replacing nodes valued `zero` by
/// `inner(node)` with the (already expanded) children plugged in.
fn expand_zero(
    g: &Gd,
    inner: &mut dyn FnMut(&Gd) -> Res<Gd>,
    zero: usize,
    back: &dyn Fn(usize) -> usize,
) -> Res<Gd> {
    let children = g
        .children
        .iter()
        .map(|c| expand_zero(c, inner, zero, back))
        .collect::<Res<Vec<_>>>()?;
    match &g.kind {
        GenKind::Idempotent { value, .. } if *value == zero => {
            let sub = inner(g)?;
            let mut out = plug_leaves(&sub, &mut |f| {
                children
                    .iter()
                    .find(|c| &c.forest == f)
                    .cloned()
                    .ok_or_else(|| BoundsError::AlignmentRequired(format!("unexpected leaf {f}")))
            })?;
            out.ctx = g.ctx.clone();
            Ok(out)
        }
        GenKind::Idempotent { value, witness } => Ok(Gd {
            kind: GenKind::Idempotent {
                value: back(*value),
                witness: witness.clone(),
            },
            children,
            ..g.clone()
        }),
        _ => Ok(Gd { children, ..g.clone() }),
    }
}

/// Picks the construction matching the class of the target.
pub fn decompose_auto(f: &Term, val: &Arc<Valuation>, scope: &SearchScope) -> Res<Gd> {
    match classify(val.target()).tag {
        ClassTag::Group => decompose_group(f, val, scope),
        ClassTag::Null => decompose_null(f, val, scope),
        ClassTag::Simple | ClassTag::ZeroSimple => decompose_simple(f, val, scope),
        ClassTag::General => decompose_main(f, val, scope),
    }
}

// ------------------------------------------------------------- reduction

/// Turns `tau2`, valued through `phi ∘ beta`, into a decomposition valued
/// by `beta`: each ℑ node valued `v` is re-decomposed over `phi⁻¹[v]`.
pub fn reduce_t21(tau2: &Gd, beta: &Arc<Valuation>, phi: &[usize]) -> Res<Gd> {
    fn go(g: &Gd, addr: &mut Vec<usize>, beta: &Arc<Valuation>, phi: &[usize]) -> Res<Gd> {
        let mut children = Vec::with_capacity(g.children.len());
        for (i, c) in g.children.iter().enumerate() {
            addr.push(i);
            children.push(go(c, addr, beta, phi)?);
            addr.pop();
        }
        let GenKind::Idempotent { value, .. } = &g.kind else {
            return Ok(Gd { children, ..g.clone() });
        };
        let v = *value;
        let here = fmt_gen(addr);
        let fail = |_| BoundsError::InnerNotDecomposable(here.clone(), v);
        let pre: Vec<usize> = (0..phi.len()).filter(|&u| phi[u] == v).collect();
        let inner_val = Arc::new(beta.restrict(&pre).map_err(|e| fail(BoundsError::from(e)))?);
        let set = StableContextSet::preimage(beta.clone(), pre.iter().copied(), false).map_err(|e| fail(e.into()))?;
        let scope = SearchScope::new(set, Basis::Explicit(children.iter().map(|c| c.forest.clone()).collect()));
        let start = State::plain(g.forest.clone());
        if !scope.dec(&start)? {
            return Err(BoundsError::InnerNotDecomposable(here, v));
        }
        let inner = main_state(&inner_val, &scope, &start).map_err(fail)?.map_values(&|k| pre[k]);
        let mut out = plug_leaves(&inner, &mut |f| {
            children
                .iter()
                .find(|c| &c.forest == f)
                .cloned()
                .ok_or_else(|| BoundsError::InnerNotDecomposable(here.clone(), v))
        })?;
        out.ctx = g.ctx.clone();
        Ok(out)
    }
    go(tau2, &mut Vec::new(), beta, phi)
}
