//! A forest algebra over binary `a`/`b` trees with `ℓ`-leaves that admits
//! no uniform bound on decomposition depth, with the tools to observe it:
//! the idempotent audit, the `f_n` family, and the complete-binary-subtree
//! metric.

use crate::algebra::{validate_algebra, AlgebraBundle, AlgebraError, RawForestAlgebra};
use crate::augmented::StableContextSet;
use crate::gendec::GeneralDecomposition;
use crate::search::{in_standard_basis, SearchError, SearchScope, State};
use crate::semigroup::{FiniteSemigroup, RawSemigroup};
use crate::terms::{enumerate_factorizations, Term, TermError, Tree};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CxError {
    #[error("audit mismatch: {0}")]
    AuditMismatch(String),
    #[error("address {0} is not in the domain")]
    AddressOutOfDomain(String),
    #[error("no decomposition of depth at most {0}")]
    SearchCapExceeded(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Term(#[from] TermError),
}

pub const CX_JSON: &str = include_str!("../data/cx.json");

/// Leaves, one-root, two-root and special elements, the unit last.
pub const H_NAMES: [&str; 22] = [
    "la", "lb", "l", //
    "a.la.T", "b.la.T", "a.la.F", "b.la.F", "a.lb.T", "b.lb.T", "a.lb.F", "b.lb.F", "a.l.T", "b.l.T", //
    "la2T", "la2F", "lb2T", "lb2F", //
    "T1", "T2", "l2", "bot", "eps",
];

fn hx(name: &str) -> usize {
    H_NAMES.iter().position(|n| *n == name).expect("known element")
}

fn add(x: usize, y: usize) -> usize {
    let eps = hx("eps");
    if x == eps {
        return y;
    }
    if y == eps {
        return x;
    }
    let (x, y) = (H_NAMES[x], H_NAMES[y]);
    let a_la = matches!(x, "a.la.T" | "a.la.F");
    let a_lb = matches!(x, "a.lb.T" | "a.lb.F");
    let b_la = matches!(y, "b.la.T" | "b.la.F");
    let b_lb = matches!(y, "b.lb.T" | "b.lb.F");
    let name = if x == "a.l.T" && y == "b.l.T" {
        "l2"
    } else if a_la && b_lb {
        "T2"
    } else if x == "a.l.T" && b_lb {
        "lb2T"
    } else if a_la && y == "b.l.T" {
        "la2T"
    } else if (x == "a.l.T" || a_la) && b_la {
        "la2F"
    } else if a_lb && (y == "b.l.T" || b_lb) {
        "lb2F"
    } else {
        "bot"
    };
    hx(name)
}

fn table_fn(rows: &[(&str, &str)]) -> Vec<usize> {
    let mut f = vec![hx("bot"); H_NAMES.len()];
    for (from, to) in rows {
        f[hx(from)] = hx(to);
    }
    f
}

pub fn cx_h() -> FiniteSemigroup {
    FiniteSemigroup::from_fn(H_NAMES.iter().map(|s| s.to_string()).collect(), add).expect("associative")
}

/// Letter functions `a`, `b`, `la`, `lb`, `l`.
pub fn cx_letters() -> BTreeMap<String, Vec<usize>> {
    let fa = table_fn(&[
        ("la", "a.la.T"),
        ("lb", "a.lb.F"),
        ("l", "a.l.T"),
        ("l2", "a.l.T"),
        ("la2F", "a.la.F"),
        ("la2T", "a.la.T"),
        ("lb2F", "a.lb.F"),
        ("lb2T", "a.lb.T"),
        ("T2", "T1"),
    ]);
    let fb = table_fn(&[
        ("la", "b.la.F"),
        ("lb", "b.lb.T"),
        ("l", "b.l.T"),
        ("l2", "b.l.T"),
        ("la2F", "b.la.F"),
        ("la2T", "b.la.T"),
        ("lb2F", "b.lb.F"),
        ("lb2T", "b.lb.T"),
        ("T2", "T2"),
    ]);
    BTreeMap::from([
        ("a".to_string(), fa),
        ("b".to_string(), fb),
        ("la".to_string(), table_fn(&[("eps", "la")])),
        ("lb".to_string(), table_fn(&[("eps", "lb")])),
        ("l".to_string(), table_fn(&[("eps", "l")])),
    ])
}

pub fn raw_cx() -> RawForestAlgebra {
    let h = cx_h().to_raw();
    RawForestAlgebra {
        name: Some("cx".into()),
        forests: RawSemigroup { zero: None, ..h },
        letters: cx_letters(),
        valuation: None,
    }
}

/// The algebra with handles on the context elements used by the audit.
pub struct CxAlgebra {
    pub bundle: AlgebraBundle,
}

impl CxAlgebra {
    fn v(&self) -> &FiniteSemigroup {
        self.bundle.algebra.v()
    }

    fn of_fn(&self, f: &[usize]) -> usize {
        self.bundle.algebra.index_of_function(f).expect("function in V")
    }

    /// `h + □`.
    pub fn l(&self, h: &str) -> usize {
        self.bundle.algebra.inl(hx(h))
    }

    /// `□ + h`.
    pub fn r(&self, h: &str) -> usize {
        self.bundle.algebra.inr(hx(h))
    }

    pub fn letter(&self, a: &str) -> usize {
        self.bundle.morphism.letter_value(a).expect("letter")
    }

    /// Left-to-right product, i.e. composition with the first factor outermost.
    pub fn word(&self, us: &[usize]) -> usize {
        self.v().product(us).expect("nonempty word")
    }

    pub fn f_bot(&self) -> usize {
        self.of_fn(&vec![hx("bot"); H_NAMES.len()])
    }

    pub fn a_plus(&self) -> usize {
        self.l("a.l.T")
    }

    pub fn plus_b(&self) -> usize {
        self.r("b.l.T")
    }

    /// The six idempotents listed for prefix contexts of unmarked forests,
    /// with the address each one never plucks below.
    pub fn listed_idempotents(&self) -> Vec<(String, usize, Vec<usize>)> {
        let (ap, pb, fa, fb) = (self.a_plus(), self.plus_b(), self.letter("a"), self.letter("b"));
        vec![
            ("(a+)f_b".into(), self.word(&[ap, fb]), vec![0]),
            ("(+b)f_a".into(), self.word(&[pb, fa]), vec![1]),
            ("f_a(+b)".into(), self.word(&[fa, pb]), vec![0, 1]),
            ("f_b(a+)".into(), self.word(&[fb, ap]), vec![0, 0]),
            ("f_a(a+)f_b(+b)".into(), self.word(&[fa, ap, fb, pb]), vec![0, 0]),
            ("f_b(+b)f_a(a+)".into(), self.word(&[fb, pb, fa, ap]), vec![0, 1]),
        ]
    }

    /// The subsemigroup generated by `a+`, `+b`, `f_a`, `f_b`, `f_ℓ`.
    pub fn v_l(&self) -> BTreeSet<usize> {
        let gens = [self.a_plus(), self.plus_b(), self.letter("a"), self.letter("b"), self.letter("l")];
        let mut out: BTreeSet<usize> = gens.iter().copied().collect();
        let mut frontier: Vec<usize> = out.iter().copied().collect();
        while let Some(u) = frontier.pop() {
            for &g in &gens {
                let w = self.v().mul(u, g);
                if out.insert(w) {
                    frontier.push(w);
                }
            }
        }
        out
    }
}

pub fn build_cx_algebra() -> CxAlgebra {
    CxAlgebra {
        bundle: validate_algebra(&raw_cx()).expect("well-formed tables"),
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct IdempotentAudit {
    pub h_size: usize,
    pub v_size: usize,
    pub v_l_size: usize,
    pub listed: Vec<String>,
    /// Nonzero idempotents of the span, by generator word.
    pub computed: Vec<String>,
    pub unlisted: Vec<String>,
    pub missing: Vec<String>,
    /// Idempotent values of prefix contexts of unmarked language forests.
    pub realized: Vec<String>,
    pub f_bot_is_a_plus_cubed: bool,
    pub left_absorbing: bool,
    pub prefix_rules: [bool; 4],
}

impl IdempotentAudit {
    pub fn passes(&self) -> bool {
        self.unlisted.is_empty()
            && self.missing.is_empty()
            && self.f_bot_is_a_plus_cubed
            && self.left_absorbing
            && self.prefix_rules.iter().all(|&b| b)
    }
}

/// Idempotents reached as `φ(C)` for `C ≠ □` factoring an unmarked
/// language forest with at most `max_nodes` nodes.
pub fn realized_idempotents(alg: &CxAlgebra, max_nodes: usize) -> Result<BTreeSet<usize>, CxError> {
    let v = alg.v();
    let mut out = BTreeSet::new();
    for f in unmarked_language(max_nodes) {
        for fz in enumerate_factorizations(&f) {
            let e = alg.bundle.morphism.beta(&fz.ctx)?;
            if v.is_idempotent(e) {
                out.insert(e);
            }
        }
    }
    Ok(out)
}

/// Computes the report; [`check_audit`] turns a failed one into an error.
pub fn idempotent_audit(alg: &CxAlgebra) -> Result<IdempotentAudit, CxError> {
    let v = alg.v();
    let bot = alg.f_bot();
    let listed = alg.listed_idempotents();
    let listed_set: BTreeSet<usize> = listed.iter().map(|(_, e, _)| *e).collect();
    let computed: BTreeSet<usize> = alg
        .v_l()
        .into_iter()
        .filter(|&e| v.is_idempotent(e) && e != bot)
        .collect();
    let names = |it: &mut dyn Iterator<Item = usize>| it.map(|u| v.name(u).to_string()).collect::<Vec<_>>();
    let ap = alg.a_plus();
    let left_absorbing = listed_set.iter().all(|&e| {
        v.elements()
            .all(|w| !listed_set.contains(&v.mul(e, w)) || v.mul(e, w) == e)
    });
    let (pb, fa, fb) = (alg.plus_b(), alg.letter("a"), alg.letter("b"));
    let rules = [
        (ap, listed[0].1),
        (alg.word(&[fa, ap]), listed[4].1),
        (pb, listed[1].1),
        (alg.word(&[fb, pb]), listed[5].1),
    ];
    let prefix_rules = rules.map(|(p, e)| {
        v.elements().all(|w| {
            let x = v.mul(p, w);
            !listed_set.contains(&x) || x == e
        })
    });
    let realized: BTreeSet<usize> = realized_idempotents(alg, 9)?.into_iter().filter(|&e| e != bot).collect();
    Ok(IdempotentAudit {
        h_size: alg.bundle.algebra.h().len(),
        v_size: v.len(),
        v_l_size: alg.v_l().len(),
        listed: listed.iter().map(|(n, _, _)| n.clone()).collect(),
        computed: names(&mut computed.iter().copied()),
        unlisted: names(&mut computed.difference(&listed_set).copied()),
        missing: names(&mut listed_set.difference(&computed).copied()),
        realized: names(&mut realized.iter().copied()),
        f_bot_is_a_plus_cubed: alg.word(&[ap, ap, ap]) == bot && v.is_idempotent(bot),
        left_absorbing,
        prefix_rules,
    })
}

pub fn check_audit(audit: &IdempotentAudit) -> Result<(), CxError> {
    if audit.passes() {
        Ok(())
    } else {
        Err(CxError::AuditMismatch(format!(
            "unlisted {:?}, missing {:?}, absorbing {}, prefix rules {:?}",
            audit.unlisted, audit.missing, audit.left_absorbing, audit.prefix_rules
        )))
    }
}

/// Complete binary tree of depth `n`, left children `a`, right children
/// `b`, root `a`, with an `ℓ` under every node at depth `n`.
pub fn gen_family(n: usize) -> Term {
    fn node(label: &str, depth: usize, n: usize) -> Tree {
        if depth == n {
            Tree::node(label, Term::letter("l"))
        } else {
            Tree::node(
                label,
                Term::from_trees(vec![node("a", depth + 1, n), node("b", depth + 1, n)]),
            )
        }
    }
    Term::single(node("a", 0, n))
}

/// `V(f,u)`: one plus the distance from `u` to its nearest leaf.
pub fn metric_at(f: &Term, u: &[usize]) -> Result<usize, CxError> {
    fn nearest(t: &Tree) -> usize {
        t.children.iter().map(nearest).min().map_or(1, |d| d + 1)
    }
    f.get(u)
        .map(nearest)
        .ok_or_else(|| CxError::AddressOutOfDomain(format!("{u:?}")))
}

/// `V(f,ε)`: the least value over the roots.
pub fn metric_roots(f: &Term) -> usize {
    (0..f.roots.len())
        .map(|i| metric_at(f, &[i]).expect("root"))
        .min()
        .unwrap_or(0)
}

/// `V(f)`: the largest value over all addresses.
pub fn metric(f: &Term) -> usize {
    f.domain()
        .iter()
        .map(|u| metric_at(f, u).expect("in domain"))
        .max()
        .unwrap_or(0)
}

/// Every inner node has a child keeping at least half of its metric.
pub fn verify_halving(g: &GeneralDecomposition) -> bool {
    g.walk().iter().all(|(_, n)| {
        n.children.is_empty() || {
            let m = metric(&n.forest);
            n.children.iter().any(|c| 2 * metric(&c.forest) >= m)
        }
    })
}

/// Exhaustive search over general decompositions into the standard basis.
struct MinDepth<'a> {
    alg: &'a CxAlgebra,
    idempotents: Vec<usize>,
    zones: Vec<SearchScope>,
    can: HashMap<(Term, usize), bool>,
    region: HashMap<(usize, State, usize), bool>,
    spine: HashMap<(State, usize), bool>,
}

impl<'a> MinDepth<'a> {
    fn new(alg: &'a CxAlgebra) -> Self {
        let v = alg.v();
        let idempotents: Vec<usize> = v.elements().filter(|&e| v.is_idempotent(e)).collect();
        let zones = idempotents
            .iter()
            .map(|&e| {
                let set = StableContextSet::preimage(alg.bundle.valuation.clone(), [e], true).expect("idempotent");
                SearchScope::new(set, crate::search::Basis::Standard)
            })
            .collect();
        MinDepth {
            alg,
            idempotents,
            zones,
            can: HashMap::new(),
            region: HashMap::new(),
            spine: HashMap::new(),
        }
    }

    fn value(&self, c: &Term) -> Result<usize, CxError> {
        Ok(self.alg.bundle.morphism.beta(c)?)
    }

    /// Some general decomposition of `f` has depth at most `d`.
    fn can(&mut self, f: &Term, d: usize) -> Result<bool, CxError> {
        if in_standard_basis(f) {
            return Ok(true);
        }
        if d == 0 {
            return Ok(false);
        }
        let key = (f.clone(), d);
        if let Some(&r) = self.can.get(&key) {
            return Ok(r);
        }
        let s = State::plain(f.clone());
        let mut r = false;
        'outer: for fz in enumerate_factorizations(f) {
            let (res, fac) = s.split(&fz)?;
            if self.can(&fac.forest, d - 1)? && self.spine(&res, d)? {
                r = true;
                break;
            }
            let e = self.value(&fz.ctx)?;
            if let Some(i) = self.idempotents.iter().position(|&x| x == e) {
                if self.in_region(i, &res, d)? && self.in_region(i, &fac, d)? {
                    r = true;
                    break 'outer;
                }
            }
        }
        self.can.insert(key, r);
        Ok(r)
    }

    /// The down path from `s` continues a centipede whose legs and index
    /// leaf all have depth at most `d − 1`. Covers binary nodes as well.
    fn spine(&mut self, s: &State, d: usize) -> Result<bool, CxError> {
        if self.can(&s.forest, d - 1)? {
            return Ok(true);
        }
        let key = (s.clone(), d);
        if let Some(&r) = self.spine.get(&key) {
            return Ok(r);
        }
        let mut r = false;
        for fz in enumerate_factorizations(&s.forest) {
            let (res, fac) = s.split(&fz)?;
            if fac.tracked.is_empty() && self.can(&fac.forest, d - 1)? && self.spine(&res, d)? {
                r = true;
                break;
            }
        }
        self.spine.insert(key, r);
        Ok(r)
    }

    /// `s` extends to a stable region over the `i`-th idempotent whose
    /// leaves all have depth at most `d − 1`.
    fn in_region(&mut self, i: usize, s: &State, d: usize) -> Result<bool, CxError> {
        if !self.zones[i].node_stable(s)? {
            return Ok(false);
        }
        if self.can(&s.forest, d - 1)? {
            return Ok(true);
        }
        let key = (i, s.clone(), d);
        if let Some(&r) = self.region.get(&key) {
            return Ok(r);
        }
        let e = self.idempotents[i];
        let mut r = false;
        for fz in enumerate_factorizations(&s.forest) {
            if self.value(&fz.ctx)? != e {
                continue;
            }
            let (res, fac) = s.split(&fz)?;
            if self.in_region(i, &res, d)? && self.in_region(i, &fac, d)? {
                r = true;
                break;
            }
        }
        self.region.insert(key, r);
        Ok(r)
    }
}

/// Least depth of a general decomposition of `f` into the standard basis,
/// searching every depth up to `cap`.
pub fn brute_force_min_depth(alg: &CxAlgebra, f: &Term, cap: usize) -> Result<usize, CxError> {
    let mut search = MinDepth::new(alg);
    for d in 0..=cap {
        if search.can(f, d)? {
            return Ok(d);
        }
    }
    Err(CxError::SearchCapExceeded(cap))
}

/// Unmarked trees in the language with at most `max_nodes` nodes, and the
/// two-rooted forests `t₁+t₂` built from them.
pub fn unmarked_language(max_nodes: usize) -> Vec<Term> {
    let mut by_size: Vec<Vec<(Tree, Tree)>> = vec![Vec::new(); max_nodes + 1];
    for n in 2..=max_nodes {
        let mut here = Vec::new();
        if n == 2 {
            here.push((Tree::node("a", Term::letter("l")), Tree::node("b", Term::letter("l"))));
        }
        for k in 2..n.saturating_sub(2) + 1 {
            let rest = n - 1 - k;
            if rest < 2 {
                continue;
            }
            for (la, _) in by_size[k].clone() {
                for (_, rb) in by_size[rest].clone() {
                    let kids = Term::from_trees(vec![la.clone(), rb.clone()]);
                    here.push((Tree::node("a", kids.clone()), Tree::node("b", kids)));
                }
            }
        }
        by_size[n] = here;
    }
    let mut out = Vec::new();
    for n in 2..=max_nodes {
        for (ta, tb) in &by_size[n] {
            out.push(Term::single(ta.clone()));
            out.push(Term::single(tb.clone()));
        }
    }
    for k in 2..=max_nodes {
        for m in 2..=max_nodes.saturating_sub(k) {
            for (ta, _) in &by_size[k] {
                for (_, tb) in &by_size[m] {
                    out.push(Term::from_trees(vec![ta.clone(), tb.clone()]));
                }
            }
        }
    }
    out
}

/// Checks that each listed idempotent leaves its address untouched on every
/// unmarked language forest with at most `max_nodes` nodes.
pub fn side_audit(alg: &CxAlgebra, max_nodes: usize) -> Result<usize, CxError> {
    let listed = alg.listed_idempotents();
    let mut checked = 0;
    for f in unmarked_language(max_nodes) {
        for fz in enumerate_factorizations(&f) {
            let e = alg.bundle.morphism.beta(&fz.ctx)?;
            let Some((name, _, u)) = listed.iter().find(|(_, x, _)| *x == e) else {
                continue;
            };
            let f0 = fz.ctx.compose(&Term::single(Tree::default_hole(&fz.factor)?))?;
            let same = match (f.get(u), f0.get(u)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            };
            if !same {
                return Err(CxError::AuditMismatch(format!("{name} plucks below {u:?} in {f} via {}", fz.ctx)));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
