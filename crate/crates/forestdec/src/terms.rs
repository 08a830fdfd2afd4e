//! Forests and contexts over an alphabet extended with default holes.
//!
//! A [`Term`] is an ordered list of root trees. Additions are always
//! flattened and the empty forest contributes no roots, so structural
//! equality coincides with equality of labeled address domains. A context is
//! a term with exactly one [`Label::Hole`]; a forest has none.
//!
//! Addresses are 0-indexed: `[i]` is the `i`-th root, `[i, j]` its `j`-th child.

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Address = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("term has more than one hole")]
    MultipleHoles,
    #[error("a default hole payload may not contain a hole")]
    NestedDefaultHole,
    #[error("address {0:?} is not in the domain")]
    AddressOutOfDomain(Address),
    #[error("empty address")]
    EmptyAddress,
    #[error("expected a context with exactly one hole")]
    NotAContext,
    #[error("expected a forest without holes")]
    NotAForest,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Label {
    Letter(Arc<str>),
    /// `□_h`; the payload is stored unraveled.
    DefaultHole(Term),
    /// `□`.
    Hole,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Tree {
    pub label: Label,
    pub children: Vec<Tree>,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Term {
    pub roots: Vec<Tree>,
}

pub type ForestTerm = Term;
pub type ContextTerm = Term;

impl Tree {
    pub fn leaf(name: &str) -> Tree {
        Tree {
            label: Label::Letter(Arc::from(name)),
            children: Vec::new(),
        }
    }

    pub fn node(name: &str, children: Term) -> Tree {
        Tree {
            label: Label::Letter(Arc::from(name)),
            children: children.roots,
        }
    }

    pub fn hole() -> Tree {
        Tree {
            label: Label::Hole,
            children: Vec::new(),
        }
    }

    /// `□_h`, normalizing nested default holes away.
    pub fn default_hole(payload: &Term) -> Result<Tree, TermError> {
        if payload.hole_count() > 0 {
            return Err(TermError::NestedDefaultHole);
        }
        Ok(Tree {
            label: Label::DefaultHole(crate::augmented::unravel(payload)),
            children: Vec::new(),
        })
    }

    pub fn is_default_hole(&self) -> bool {
        matches!(self.label, Label::DefaultHole(_))
    }

    pub fn is_hole(&self) -> bool {
        matches!(self.label, Label::Hole)
    }

    pub fn letter(&self) -> Option<&str> {
        match &self.label {
            Label::Letter(a) => Some(a),
            _ => None,
        }
    }

    pub fn hole_count(&self) -> usize {
        usize::from(self.is_hole()) + self.children.iter().map(Tree::hole_count).sum::<usize>()
    }

    fn node_count(&self) -> usize {
        1 + self.children.iter().map(Tree::node_count).sum::<usize>()
    }

    fn dhole_count(&self) -> usize {
        usize::from(self.is_default_hole())
            + self.children.iter().map(Tree::dhole_count).sum::<usize>()
    }
}

impl Term {
    pub fn empty() -> Term {
        Term::default()
    }

    pub fn from_trees(roots: Vec<Tree>) -> Term {
        Term { roots }
    }

    pub fn single(tree: Tree) -> Term {
        Term { roots: vec![tree] }
    }

    /// The bare context `□`.
    pub fn hole() -> Term {
        Term::single(Tree::hole())
    }

    pub fn letter(name: &str) -> Term {
        Term::single(Tree::leaf(name))
    }

    pub fn parse(text: &str) -> Result<Term, TermError> {
        Parser::new(text).parse_top()
    }

    pub fn parse_forest(text: &str) -> Result<Term, TermError> {
        let t = Term::parse(text)?;
        if t.hole_count() != 0 {
            return Err(TermError::NotAForest);
        }
        Ok(t)
    }

    pub fn parse_context(text: &str) -> Result<Term, TermError> {
        let t = Term::parse(text)?;
        if t.hole_count() != 1 {
            return Err(TermError::NotAContext);
        }
        Ok(t)
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn hole_count(&self) -> usize {
        self.roots.iter().map(Tree::hole_count).sum()
    }

    pub fn is_forest(&self) -> bool {
        self.hole_count() == 0
    }

    pub fn is_context(&self) -> bool {
        self.hole_count() == 1
    }

    pub fn is_bare_hole(&self) -> bool {
        self.roots.len() == 1 && self.roots[0].is_hole()
    }

    /// Number of nodes in the domain, default holes and the hole included.
    pub fn node_count(&self) -> usize {
        self.roots.iter().map(Tree::node_count).sum()
    }

    pub fn dhole_count(&self) -> usize {
        self.roots.iter().map(Tree::dhole_count).sum()
    }

    /// Largest root index; `0` for the empty term.
    pub fn width(&self) -> usize {
        self.roots.len().saturating_sub(1)
    }

    pub fn get(&self, addr: &[usize]) -> Option<&Tree> {
        let (&first, rest) = addr.split_first()?;
        let mut t = self.roots.get(first)?;
        for &i in rest {
            t = t.children.get(i)?;
        }
        Some(t)
    }

    /// Sibling list under `parent` (`[]` for the roots).
    pub fn siblings(&self, parent: &[usize]) -> Option<&Vec<Tree>> {
        if parent.is_empty() {
            Some(&self.roots)
        } else {
            self.get(parent).map(|t| &t.children)
        }
    }

    fn siblings_mut(&mut self, parent: &[usize]) -> Option<&mut Vec<Tree>> {
        let mut list = &mut self.roots;
        for &i in parent {
            list = &mut list.get_mut(i)?.children;
        }
        Some(list)
    }

    pub fn label_at(&self, addr: &[usize]) -> Option<&Label> {
        self.get(addr).map(|t| &t.label)
    }

    /// Domain in preorder.
    pub fn domain(&self) -> Vec<Address> {
        fn walk(trees: &[Tree], prefix: &mut Address, out: &mut Vec<Address>) {
            for (i, t) in trees.iter().enumerate() {
                prefix.push(i);
                out.push(prefix.clone());
                walk(&t.children, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.roots, &mut Vec::new(), &mut out);
        out
    }

    pub fn sq_pos(&self) -> Option<Address> {
        fn find(trees: &[Tree], prefix: &mut Address) -> bool {
            for (i, t) in trees.iter().enumerate() {
                prefix.push(i);
                if t.is_hole() || find(&t.children, prefix) {
                    return true;
                }
                prefix.pop();
            }
            false
        }
        let mut p = Vec::new();
        find(&self.roots, &mut p).then_some(p)
    }

    /// Addresses of all default holes, in preorder.
    pub fn dhole_positions(&self) -> Vec<Address> {
        self.domain()
            .into_iter()
            .filter(|a| self.get(a).is_some_and(Tree::is_default_hole))
            .collect()
    }

    /// The single tree at `addr`, as a term.
    pub fn subterm(&self, addr: &[usize]) -> Result<Term, TermError> {
        self.get(addr)
            .cloned()
            .map(Term::single)
            .ok_or_else(|| TermError::AddressOutOfDomain(addr.to_vec()))
    }

    /// Replaces `len` siblings starting at `start` under `parent` by `with`.
    pub fn splice(
        &self,
        parent: &[usize],
        start: usize,
        len: usize,
        with: Vec<Tree>,
    ) -> Result<Term, TermError> {
        let mut out = self.clone();
        let list = out
            .siblings_mut(parent)
            .filter(|l| start + len <= l.len())
            .ok_or_else(|| {
                let mut a = parent.to_vec();
                a.push(start);
                TermError::AddressOutOfDomain(a)
            })?;
        list.splice(start..start + len, with);
        if out.hole_count() > 1 {
            return Err(TermError::MultipleHoles);
        }
        Ok(out)
    }

    /// Replaces the node at `addr` by the roots of `g`, shifting later siblings.
    pub fn substitute(&self, addr: &[usize], g: &Term) -> Result<Term, TermError> {
        let (&last, parent) = addr
            .split_last()
            .ok_or_else(|| TermError::AddressOutOfDomain(Vec::new()))?;
        if self.get(addr).is_none() {
            return Err(TermError::AddressOutOfDomain(addr.to_vec()));
        }
        self.splice(parent, last, 1, g.roots.clone())
    }

    /// `C·h`: the roots of `h` replace the hole of `C`.
    pub fn compose(&self, h: &Term) -> Result<Term, TermError> {
        if self.hole_count() != 1 {
            return Err(TermError::NotAContext);
        }
        let p = self.sq_pos().expect("context has a hole");
        self.substitute(&p, h)
    }

    /// `f[u ↦ □]`.
    pub fn hole_at(&self, u: &[usize]) -> Result<Term, TermError> {
        self.substitute(u, &Term::hole())
    }

    pub fn letters(&self) -> Vec<Arc<str>> {
        fn walk(trees: &[Tree], out: &mut Vec<Arc<str>>) {
            for t in trees {
                match &t.label {
                    Label::Letter(a) => out.push(a.clone()),
                    Label::DefaultHole(p) => walk(&p.roots, out),
                    Label::Hole => {}
                }
                walk(&t.children, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.roots, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Label::Hole => write!(f, "_"),
            Label::DefaultHole(p) => write!(f, "[{p}]"),
            Label::Letter(a) if self.children.is_empty() => write!(f, "{a}"),
            Label::Letter(a) => {
                write!(f, "{a}(")?;
                write_list(f, &self.children)?;
                write!(f, ")")
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, trees: &[Tree]) -> fmt::Result {
    for (i, t) in trees.iter().enumerate() {
        if i > 0 {
            write!(f, "+")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.roots.is_empty() {
            write!(f, "0")
        } else {
            write_list(f, &self.roots)
        }
    }
}

impl std::str::FromStr for Term {
    type Err = TermError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Term::parse(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T, TermError> {
        Err(TermError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
    }

    fn parse_top(&mut self) -> Result<Term, TermError> {
        let t = self.parse_forest()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        if t.hole_count() > 1 {
            return Err(TermError::MultipleHoles);
        }
        Ok(t)
    }

    fn parse_forest(&mut self) -> Result<Term, TermError> {
        let mut roots = Vec::new();
        loop {
            roots.extend(self.parse_tree()?);
            if self.peek() == Some('+') {
                self.bump('+');
            } else {
                break;
            }
        }
        Ok(Term { roots })
    }

    /// `None` for the neutral `0`.
    fn parse_tree(&mut self) -> Result<Option<Tree>, TermError> {
        match self.peek() {
            Some('_') => {
                self.bump('_');
                Ok(Some(Tree::hole()))
            }
            Some('[') => {
                self.bump('[');
                let payload = self.parse_forest()?;
                if self.peek() != Some(']') {
                    return self.err("expected ']'");
                }
                self.bump(']');
                if payload.is_empty() {
                    return self.err("empty default hole");
                }
                Tree::default_hole(&payload).map(Some)
            }
            Some(c) if c.is_alphanumeric() => {
                let start = self.pos;
                while let Some(c) = self.src[self.pos..].chars().next() {
                    if c.is_alphanumeric() {
                        self.bump(c);
                    } else {
                        break;
                    }
                }
                let name = &self.src[start..self.pos];
                if name == "0" {
                    return Ok(None);
                }
                let name = name.to_string();
                if self.peek() == Some('(') {
                    self.bump('(');
                    let children = self.parse_forest()?;
                    if self.peek() != Some(')') {
                        return self.err("expected ')'");
                    }
                    self.bump(')');
                    Ok(Some(Tree::node(&name, children)))
                } else {
                    Ok(Some(Tree::leaf(&name)))
                }
            }
            _ => self.err("expected a tree"),
        }
    }
}

/// `x ⊛ y`: with `x = x'·σx` and `y = σy·y'`, returns `x'·(σx+σy)·y'`.
pub fn spa(x: &[usize], y: &[usize]) -> Result<Address, TermError> {
    let (&sx, xp) = x.split_last().ok_or(TermError::EmptyAddress)?;
    let (&sy, yp) = y.split_first().ok_or(TermError::EmptyAddress)?;
    let mut out = Vec::with_capacity(x.len() + y.len() - 1);
    out.extend_from_slice(xp);
    out.push(sx + sy);
    out.extend_from_slice(yp);
    Ok(out)
}

/// Left-child right-sibling order: `x ≤ y` iff `y = x ⊛ u` for some `u`.
pub fn lcrs_leq(x: &[usize], y: &[usize]) -> bool {
    if x.is_empty() || y.len() < x.len() {
        return false;
    }
    let k = x.len() - 1;
    y[..k] == x[..k] && y[k] >= x[k]
}

/// The unique `u` with `x ⊛ u = y`.
pub fn lcrs_quotient(x: &[usize], y: &[usize]) -> Option<Address> {
    if !lcrs_leq(x, y) {
        return None;
    }
    let k = x.len() - 1;
    let mut u = vec![y[k] - x[k]];
    u.extend_from_slice(&y[k + 1..]);
    Some(u)
}

/// A split `f = C·f₁` with a nonempty contiguous sibling interval plucked.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factorization {
    pub ctx: Term,
    pub factor: Term,
    /// Sibling list under which the interval was plucked.
    pub parent: Address,
    pub start: usize,
    pub len: usize,
}

/// Every `(C, f₁)` with `C·f₁ = f`, except the whole-forest pluck and plucking
/// a single default hole (whose residue would equal `f`).
pub fn enumerate_factorizations(f: &Term) -> Vec<Factorization> {
    let mut parents: Vec<Address> = vec![Vec::new()];
    parents.extend(
        f.domain()
            .into_iter()
            .filter(|a| f.get(a).is_some_and(|t| !t.children.is_empty())),
    );
    let mut out = Vec::new();
    for parent in parents {
        let list = f.siblings(&parent).expect("parent in domain");
        let n = list.len();
        for start in 0..n {
            for end in start + 1..=n {
                if parent.is_empty() && start == 0 && end == n {
                    continue;
                }
                if end == start + 1 && list[start].is_default_hole() {
                    continue;
                }
                let factor = Term::from_trees(list[start..end].to_vec());
                let ctx = f
                    .splice(&parent, start, end - start, vec![Tree::hole()])
                    .expect("interval in range");
                out.push(Factorization {
                    ctx,
                    factor,
                    parent: parent.clone(),
                    start,
                    len: end - start,
                });
            }
        }
    }
    out
}

/// Decides `C₁ ≼ C₂` (some `C` has `C₁·C = C₂`) and returns that `C`.
pub fn prefix_leq(c1: &Term, c2: &Term) -> Option<Term> {
    let p = c1.sq_pos()?;
    if c2.hole_count() != 1 {
        return None;
    }
    let (&k, parent) = p.split_last()?;
    let n1 = c1.siblings(parent)?.len();
    let s2 = c2.siblings(parent)?;
    if s2.len() < n1 {
        return None;
    }
    let m = s2.len() - n1 + 1;
    if k + m > s2.len() {
        return None;
    }
    let witness = Term::from_trees(s2[k..k + m].to_vec());
    if witness.hole_count() != 1 {
        return None;
    }
    let candidate = c2.splice(parent, k, m, vec![Tree::hole()]).ok()?;
    (candidate == *c1).then_some(witness)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    #[test]
    fn parse_domain_of_example_forest() {
        let f = t("b(a+a)+a(b+a(a+b))");
        assert_eq!(f.label_at(&[0]), Some(&Label::Letter("b".into())));
        assert_eq!(f.label_at(&[1]), Some(&Label::Letter("a".into())));
        let dom = f.domain();
        for a in [
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
            vec![1, 1, 0],
            vec![1, 1, 1],
        ] {
            assert!(dom.contains(&a));
        }
        assert_eq!(dom.len(), 8);
        assert_eq!(f.to_string(), "b(a+a)+a(b+a(a+b))");
    }

    #[test]
    fn parse_context_with_default_hole() {
        let c = t("a(_)+[b(a)]");
        assert_eq!(c.sq_pos(), Some(vec![0, 0]));
        assert_eq!(c.label_at(&[1]), Some(&Label::DefaultHole(t("b(a)"))));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Term::parse("_ + _"), Err(TermError::MultipleHoles));
        assert_eq!(Term::parse("[a(_)]"), Err(TermError::NestedDefaultHole));
        assert!(matches!(Term::parse("a(b"), Err(TermError::Parse { .. })));
        assert!(matches!(Term::parse("a b"), Err(TermError::Parse { .. })));
    }

    #[test]
    fn canonical_form_drops_zero_and_flattens() {
        assert_eq!(t(" a + 0 + b ( 0 ) ").to_string(), "a+b");
        assert_eq!(t("0").to_string(), "0");
        assert_eq!(t("[[a]+b]").to_string(), "[a+b]");
    }

    #[test]
    fn spa_examples() {
        assert_eq!(spa(&[0, 1], &[2, 3]).unwrap(), vec![0, 3, 3]);
        assert_eq!(spa(&[0], &[4, 2]).unwrap(), vec![4, 2]);
        assert_eq!(spa(&[], &[1]), Err(TermError::EmptyAddress));
    }

    #[test]
    fn lcrs_examples() {
        assert!(lcrs_leq(&[1], &[1, 2]));
        assert!(lcrs_leq(&[1, 2], &[1, 3]));
        assert!(!lcrs_leq(&[1, 3], &[2]));
        assert_eq!(lcrs_quotient(&[3, 1], &[3, 1]), Some(vec![0]));
        let u = lcrs_quotient(&[1], &[1, 2]).unwrap();
        assert_eq!(spa(&[1], &u).unwrap(), vec![1, 2]);
    }

    #[test]
    fn compose_examples() {
        assert_eq!(t("a(_)").compose(&t("a+b")).unwrap(), t("a(a+b)"));
        assert_eq!(
            t("b(a+a)+a(_)").compose(&t("b+a(a+b)")).unwrap(),
            t("b(a+a)+a(b+a(a+b))")
        );
        assert_eq!(t("a+_").compose(&t("_+c")).unwrap(), t("a+_+c"));
    }

    #[test]
    fn width_of_root_level_composition() {
        let h = t("b+c");
        let root = t("a+_");
        assert_eq!(root.compose(&h).unwrap().width(), root.width() + h.width());
        let inner = t("a(_)");
        assert_eq!(inner.compose(&h).unwrap().width(), inner.width());
    }

    #[test]
    fn factorizations_of_small_forests() {
        let pairs = |s: &str| {
            let mut v: Vec<(String, String)> = enumerate_factorizations(&t(s))
                .into_iter()
                .map(|fz| (fz.ctx.to_string(), fz.factor.to_string()))
                .collect();
            v.sort();
            v
        };
        assert_eq!(
            pairs("a+b"),
            vec![("_+b".into(), "a".into()), ("a+_".into(), "b".into())]
        );
        assert_eq!(pairs("b(a)"), vec![("b(_)".into(), "a".into())]);
        assert!(pairs("a").is_empty());
        assert!(pairs("[a]").is_empty());
        assert_eq!(pairs("[a]+b"), vec![("[a]+_".into(), "b".into())]);
    }

    #[test]
    fn prefix_order_examples() {
        let c1 = t("a(_+b)");
        assert_eq!(prefix_leq(&c1, &t("a(b(a+_)+b)")), Some(t("b(a+_)")));
        assert_eq!(prefix_leq(&c1, &t("a(_+b(a+b))")), None);
        assert_eq!(prefix_leq(&c1, &c1), Some(Term::hole()));
        assert_eq!(prefix_leq(&t("a+_"), &t("a+b+_+c")), Some(t("b+_+c")));
    }

    pub(crate) fn arb_address() -> impl Strategy<Value = Address> {
        proptest::collection::vec(0usize..4, 1..5)
    }

    fn arb_tree(letters: &'static [&'static str]) -> impl Strategy<Value = Tree> {
        let leaf = proptest::sample::select(letters).prop_map(Tree::leaf);
        leaf.prop_recursive(3, 10, 3, move |inner| {
            (
                proptest::sample::select(letters),
                proptest::collection::vec(inner, 1..3),
            )
                .prop_map(|(a, ch)| Tree::node(a, Term::from_trees(ch)))
        })
    }

    pub(crate) fn arb_forest() -> impl Strategy<Value = Term> {
        proptest::collection::vec(arb_tree(&["a", "b"]), 1..3).prop_map(Term::from_trees)
    }

    /// A context built by replacing a random node of a random forest by `□`.
    pub(crate) fn arb_context() -> impl Strategy<Value = Term> {
        (arb_forest(), any::<proptest::sample::Index>()).prop_map(|(f, ix)| {
            let dom = f.domain();
            let a = ix.get(&dom).clone();
            f.hole_at(&a).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn spa_is_a_monoid(x in arb_address(), y in arb_address(), z in arb_address()) {
            let l = spa(&spa(&x, &y).unwrap(), &z).unwrap();
            let r = spa(&x, &spa(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            prop_assert_eq!(spa(&[0], &x).unwrap(), x.clone());
            prop_assert_eq!(spa(&x, &[0]).unwrap(), x);
        }

        #[test]
        fn lcrs_quotient_inverts_spa(x in arb_address(), u in arb_address()) {
            let y = spa(&x, &u).unwrap();
            prop_assert!(lcrs_leq(&x, &y));
            prop_assert_eq!(lcrs_quotient(&x, &y), Some(u));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn sq_pos_is_a_morphism(c1 in arb_context(), c2 in arb_context()) {
            let c = c1.compose(&c2).unwrap();
            let expect = spa(&c1.sq_pos().unwrap(), &c2.sq_pos().unwrap()).unwrap();
            prop_assert_eq!(c.sq_pos().unwrap(), expect);
        }

        #[test]
        fn factorizations_recompose(f in arb_forest()) {
            for fz in enumerate_factorizations(&f) {
                prop_assert_eq!(fz.ctx.compose(&fz.factor).unwrap(), f.clone());
                let residue = fz.ctx.compose(&Term::single(Tree::default_hole(&fz.factor).unwrap())).unwrap();
                prop_assert_ne!(residue, f.clone());
            }
        }

        #[test]
        fn prefix_order_is_transitive(c1 in arb_context(), c2 in arb_context(), c3 in arb_context()) {
            let c12 = c1.compose(&c2).unwrap();
            let c123 = c12.compose(&c3).unwrap();
            prop_assert!(prefix_leq(&c1, &c12).is_some());
            prop_assert!(prefix_leq(&c12, &c123).is_some());
            let w = prefix_leq(&c1, &c123);
            prop_assert!(w.is_some());
            prop_assert_eq!(c1.compose(&w.unwrap()).unwrap(), c123);
        }

        #[test]
        fn print_parse_round_trip(c in arb_context()) {
            prop_assert_eq!(Term::parse(&c.to_string()).unwrap(), c);
        }

        #[test]
        fn domains_are_lcrs_interval_closed(f in arb_forest()) {
            let dom = f.domain();
            for y in &dom {
                for x in &dom {
                    if lcrs_leq(x, y) {
                        let k = x.len() - 1;
                        for i in x[k]..=y[k] {
                            let mut z = x[..k].to_vec();
                            z.push(i);
                            prop_assert!(f.get(&z).is_some());
                        }
                    }
                }
            }
        }
    }
}
