//! Binary decomposition trees.
//!
//! Node addresses are words over `{0,1}`: `x0` is the residue (down child),
//! `x1` the plucked factor (right child). References are derived top-down and
//! kept per node; expanding a leaf only adds references for the two new nodes.

use crate::algebra::AlgebraError;
use crate::augmented::{unravel, StableContextSet};
use crate::terms::{lcrs_leq, lcrs_quotient, spa, Address, Label, Term, TermError, Tree};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub type NodeAddr = Vec<u8>;

pub fn fmt_node(x: &[u8]) -> String {
    if x.is_empty() {
        "ε".to_string()
    } else {
        x.iter().map(|&b| char::from(b'0' + b)).collect()
    }
}

pub fn parse_node(s: &str) -> Option<NodeAddr> {
    if s.is_empty() || s == "ε" {
        return Some(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

pub fn child(x: &[u8], b: u8) -> NodeAddr {
    let mut y = x.to_vec();
    y.push(b);
    y
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BindecError {
    #[error("node {0} is not full binary")]
    NotFullBinary(String),
    #[error("node {0} has a malformed context")]
    BadContext(String),
    #[error("node {0} plucks a trivial forest")]
    TrivialPluck(String),
    #[error("forests at node {0} do not recompose")]
    CompositionMismatch(String),
    #[error("no reference from {0} to {1}")]
    NoSuchReference(String, String),
    #[error("{1} is not an ancestor of {0}")]
    NotAncestor(String, String),
    #[error("no node {0}")]
    NoSuchNode(String),
    #[error("node {0} is not a leaf")]
    NotALeaf(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid decomposition json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "B")]
    Branch,
    #[serde(rename = "L")]
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub forest: Term,
    pub ctx: Term,
    pub kind: Kind,
}

/// `from@at → to`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reference {
    pub from: NodeAddr,
    pub at: Address,
    pub to: NodeAddr,
}

impl Reference {
    pub fn is_inherited(&self) -> bool {
        self.from.last() == Some(&1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryDecomposition {
    nodes: BTreeMap<NodeAddr, Node>,
    refs: BTreeMap<NodeAddr, Vec<(Address, NodeAddr)>>,
}

/// References of `x0` and `x1` derived from those of `x`.
fn child_refs(
    x: &[u8],
    ctx1: &Term,
    forest1: &Term,
    parent: &[(Address, NodeAddr)],
) -> (Vec<(Address, NodeAddr)>, Vec<(Address, NodeAddr)>) {
    let s = ctx1.sq_pos().expect("context");
    let m = forest1.width();
    let shifted = spa(&s, &[m + 1]).expect("nonempty");
    let s1 = spa(&s, &[1]).expect("nonempty");
    let mut r0 = vec![(s.clone(), child(x, 1))];
    let mut r1 = Vec::new();
    for (u, y) in parent {
        if !lcrs_leq(&s, u) {
            r0.push((u.clone(), y.clone()));
        } else if lcrs_leq(&shifted, u) {
            let v = lcrs_quotient(&shifted, u).expect("leq");
            r0.push((spa(&s1, &v).expect("nonempty"), y.clone()));
        } else {
            r1.push((lcrs_quotient(&s, u).expect("leq"), y.clone()));
        }
    }
    (r0, r1)
}

impl BinaryDecomposition {
    /// `Υ(f)`.
    pub fn singleton(f: Term) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            Vec::new(),
            Node {
                forest: f,
                ctx: Term::hole(),
                kind: Kind::Leaf,
            },
        );
        let refs = BTreeMap::from([(Vec::new(), Vec::new())]);
        BinaryDecomposition { nodes, refs }
    }

    /// Checks the six structural conditions and derives references.
    pub fn from_nodes(nodes: BTreeMap<NodeAddr, Node>) -> Result<Self, BindecError> {
        if !nodes.contains_key(&Vec::new()) {
            return Err(BindecError::NoSuchNode("ε".into()));
        }
        for (x, n) in &nodes {
            if let Some((_, parent)) = x.split_last() {
                if nodes.get(parent).map(|p| p.kind) != Some(Kind::Branch) {
                    return Err(BindecError::NotFullBinary(fmt_node(parent)));
                }
            }
            let has0 = nodes.contains_key(&child(x, 0));
            let has1 = nodes.contains_key(&child(x, 1));
            match n.kind {
                Kind::Branch if !(has0 && has1) => return Err(BindecError::NotFullBinary(fmt_node(x))),
                Kind::Leaf if has0 || has1 => return Err(BindecError::NotFullBinary(fmt_node(x))),
                _ => {}
            }
            if n.forest.hole_count() != 0 {
                return Err(BindecError::BadContext(fmt_node(x)));
            }
            if x.last() != Some(&1) && !n.ctx.is_bare_hole() {
                return Err(BindecError::BadContext(fmt_node(x)));
            }
            if !n.ctx.is_context() {
                return Err(BindecError::BadContext(fmt_node(x)));
            }
        }
        for (x, n) in &nodes {
            if n.kind != Kind::Branch {
                continue;
            }
            let n0 = &nodes[&child(x, 0)];
            let n1 = &nodes[&child(x, 1)];
            if n1.ctx.is_bare_hole() || n0.forest == n.forest || n1.forest == n.forest || n1.forest.is_empty() {
                return Err(BindecError::TrivialPluck(fmt_node(x)));
            }
            let residue = n1.ctx.compose(&Term::single(Tree::default_hole(&n1.forest)?))?;
            if n1.ctx.compose(&n1.forest)? != n.forest || residue != n0.forest {
                return Err(BindecError::CompositionMismatch(fmt_node(x)));
            }
        }
        let mut out = BinaryDecomposition {
            nodes,
            refs: BTreeMap::new(),
        };
        out.refs = out.derive_references();
        Ok(out)
    }

    fn derive_references(&self) -> BTreeMap<NodeAddr, Vec<(Address, NodeAddr)>> {
        let mut refs: BTreeMap<NodeAddr, Vec<(Address, NodeAddr)>> = BTreeMap::new();
        refs.insert(Vec::new(), Vec::new());
        for (x, n) in &self.nodes {
            if n.kind != Kind::Branch {
                continue;
            }
            let n1 = &self.nodes[&child(x, 1)];
            let (r0, r1) = child_refs(x, &n1.ctx, &n1.forest, &refs[x]);
            refs.insert(child(x, 0), r0);
            refs.insert(child(x, 1), r1);
        }
        refs
    }

    pub fn get(&self, x: &[u8]) -> Option<&Node> {
        self.nodes.get(x)
    }

    fn node(&self, x: &[u8]) -> Result<&Node, BindecError> {
        self.nodes.get(x).ok_or_else(|| BindecError::NoSuchNode(fmt_node(x)))
    }

    pub fn forest(&self, x: &[u8]) -> &Term {
        &self.nodes[x].forest
    }

    pub fn ctx(&self, x: &[u8]) -> &Term {
        &self.nodes[x].ctx
    }

    pub fn root_forest(&self) -> &Term {
        self.forest(&[])
    }

    pub fn is_leaf(&self, x: &[u8]) -> bool {
        self.nodes.get(x).is_some_and(|n| n.kind == Kind::Leaf)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeAddr, &Node)> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> Vec<NodeAddr> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.kind == Kind::Leaf)
            .map(|(x, _)| x.clone())
            .collect()
    }

    pub fn leaf_forests(&self) -> Vec<Term> {
        self.leaves().iter().map(|x| self.forest(x).clone()).collect()
    }

    pub fn depth(&self) -> usize {
        self.nodes.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Splits leaf `x` as `forest(x) = C·f₁`.
    pub fn expand(&self, x: &[u8], ctx: &Term, factor: &Term) -> Result<Self, BindecError> {
        let n = self.node(x)?;
        if n.kind != Kind::Leaf {
            return Err(BindecError::NotALeaf(fmt_node(x)));
        }
        if !ctx.is_context() {
            return Err(BindecError::BadContext(fmt_node(&child(x, 1))));
        }
        if ctx.compose(factor)? != n.forest {
            return Err(BindecError::CompositionMismatch(fmt_node(x)));
        }
        let residue = ctx.compose(&Term::single(Tree::default_hole(factor)?))?;
        if ctx.is_bare_hole() || residue == n.forest || factor.is_empty() {
            return Err(BindecError::TrivialPluck(fmt_node(x)));
        }
        let mut out = self.clone();
        out.nodes.get_mut(x).expect("present").kind = Kind::Branch;
        out.nodes.insert(
            child(x, 0),
            Node {
                forest: residue,
                ctx: Term::hole(),
                kind: Kind::Leaf,
            },
        );
        out.nodes.insert(
            child(x, 1),
            Node {
                forest: factor.clone(),
                ctx: ctx.clone(),
                kind: Kind::Leaf,
            },
        );
        let (r0, r1) = child_refs(x, ctx, factor, &self.refs[x]);
        out.refs.insert(child(x, 0), r0);
        out.refs.insert(child(x, 1), r1);
        Ok(out)
    }

    /// `τ[x]`, re-rooted at `ε`.
    pub fn subtree(&self, x: &[u8]) -> Result<Self, BindecError> {
        self.node(x)?;
        let nodes: BTreeMap<NodeAddr, Node> = self
            .nodes
            .range(x.to_vec()..)
            .take_while(|(y, _)| y.starts_with(x))
            .map(|(y, n)| {
                let mut n = n.clone();
                if y.len() == x.len() {
                    n.ctx = Term::hole();
                }
                (y[x.len()..].to_vec(), n)
            })
            .collect();
        let mut out = BinaryDecomposition {
            nodes,
            refs: BTreeMap::new(),
        };
        out.refs = out.derive_references();
        Ok(out)
    }

    /// Replaces `τ[x]` by `sub`, whose root forest must equal `forest(x)`.
    pub fn graft(&self, x: &[u8], sub: &BinaryDecomposition) -> Result<Self, BindecError> {
        let n = self.node(x)?;
        if sub.root_forest() != &n.forest {
            return Err(BindecError::CompositionMismatch(fmt_node(x)));
        }
        let ctx = n.ctx.clone();
        let mut nodes: BTreeMap<NodeAddr, Node> = self
            .nodes
            .iter()
            .filter(|(y, _)| !y.starts_with(x))
            .map(|(y, n)| (y.clone(), n.clone()))
            .collect();
        for (y, m) in &sub.nodes {
            let mut z = x.to_vec();
            z.extend_from_slice(y);
            let mut m = m.clone();
            if y.is_empty() {
                m.ctx = ctx.clone();
            }
            nodes.insert(z, m);
        }
        let mut out = BinaryDecomposition {
            nodes,
            refs: BTreeMap::new(),
        };
        out.refs = out.derive_references();
        Ok(out)
    }

    pub fn references(&self) -> Vec<Reference> {
        let mut out: Vec<Reference> = self
            .refs
            .iter()
            .flat_map(|(x, rs)| {
                rs.iter().map(move |(u, y)| Reference {
                    from: x.clone(),
                    at: u.clone(),
                    to: y.clone(),
                })
            })
            .collect();
        out.sort();
        out
    }

    /// References of node `x` as `(u, y)` pairs.
    pub fn refs_of(&self, x: &[u8]) -> &[(Address, NodeAddr)] {
        self.refs.get(x).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_inherited_references(&self) -> bool {
        self.refs
            .iter()
            .any(|(x, rs)| x.last() == Some(&1) && !rs.is_empty())
    }

    pub fn linking_context(&self, x: &[u8], y: &[u8]) -> Result<Term, BindecError> {
        let (u, _) = self
            .refs_of(x)
            .iter()
            .find(|(_, z)| z == y)
            .ok_or_else(|| BindecError::NoSuchReference(fmt_node(x), fmt_node(y)))?;
        Ok(self.forest(x).hole_at(u)?)
    }

    /// `AncEmb(τ, y, x)(u)`.
    pub fn ancestor_embedding(&self, y: &[u8], x: &[u8], u: &[usize]) -> Result<Address, BindecError> {
        if !y.starts_with(x) {
            return Err(BindecError::NotAncestor(fmt_node(y), fmt_node(x)));
        }
        self.node(y)?;
        let mut u = u.to_vec();
        for k in (x.len()..y.len()).rev() {
            let z = &y[..k];
            let z1 = child(z, 1);
            let uz = self.ctx(&z1).sq_pos().expect("context");
            if y[k] == 1 {
                u = spa(&uz, &u)?;
            } else if u != uz && lcrs_leq(&uz, &u) {
                let v = lcrs_quotient(&uz, &u).expect("leq");
                let mz = self.forest(&z1).width();
                u = spa(&spa(&uz, &[mz])?, &v)?;
            }
        }
        Ok(u)
    }

    /// The whole map `Domain(forest(y)) → Domain(forest(x))`.
    pub fn ancestor_embedding_map(&self, y: &[u8], x: &[u8]) -> Result<BTreeMap<Address, Address>, BindecError> {
        self.node(y)?
            .forest
            .domain()
            .into_iter()
            .map(|u| Ok((u.clone(), self.ancestor_embedding(y, x, &u)?)))
            .collect()
    }

    /// First reference whose linking context lies outside `v`, if any.
    pub fn check_stable(&self, v: &StableContextSet) -> Result<Option<Reference>, BindecError> {
        for r in self.references() {
            let c = self.forest(&r.from).hole_at(&r.at)?;
            if !v.contains(&c)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    pub fn to_raw(&self) -> Vec<RawBinaryNode> {
        self.nodes
            .iter()
            .map(|(x, n)| RawBinaryNode {
                addr: fmt_node(x),
                kind: n.kind,
                forest: n.forest.to_string(),
                ctx: n.ctx.to_string(),
            })
            .collect()
    }

    pub fn from_raw(raw: &[RawBinaryNode]) -> Result<Self, BindecError> {
        let mut nodes = BTreeMap::new();
        for r in raw {
            let x = parse_node(&r.addr).ok_or_else(|| BindecError::Json(format!("bad address {}", r.addr)))?;
            nodes.insert(
                x,
                Node {
                    forest: Term::parse(&r.forest)?,
                    ctx: Term::parse(&r.ctx)?,
                    kind: r.kind,
                },
            );
        }
        BinaryDecomposition::from_nodes(nodes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, BindecError> {
        let raw: Vec<RawBinaryNode> = serde_json::from_str(text).map_err(|e| BindecError::Json(e.to_string()))?;
        BinaryDecomposition::from_raw(&raw)
    }

    /// Graphviz text; references are dashed edges.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bindec {\n  node [shape=box, fontname=\"monospace\"];\n");
        let id = |x: &[u8]| format!("n{}", fmt_node(x).replace('ε', "r"));
        for (x, n) in &self.nodes {
            let mut label = format!("{}: {}", fmt_node(x), n.forest);
            if x.last() == Some(&1) {
                let _ = write!(label, "\\nctx {}", n.ctx);
            }
            let shape = if n.kind == Kind::Leaf { "plain" } else { "box" };
            let _ = writeln!(s, "  {} [label=\"{}\", shape={}];", id(x), dot_escape(&label), shape);
        }
        for x in self.nodes.keys() {
            if let Some((_, p)) = x.split_last() {
                let _ = writeln!(s, "  {} -> {};", id(p), id(x));
            }
        }
        for r in self.references() {
            let _ = writeln!(
                s,
                "  {} -> {} [style=dashed, label=\"{}\"];",
                id(&r.from),
                id(&r.to),
                r.at.iter().map(usize::to_string).collect::<String>()
            );
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace("\\\\n", "\\n")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawBinaryNode {
    pub addr: String,
    pub kind: Kind,
    pub forest: String,
    pub ctx: String,
}

/// Number of nodes not labeled by a default hole.
pub fn max_depth_bound(f: &Term) -> usize {
    f.node_count() - f.dhole_count()
}

/// A bound that every binary decomposition of `f` respects: each split lowers
/// `2·(nodes − default holes) + default holes` by at least one, and a forest
/// that can still be split has weight at least 3.
pub fn depth_cap(f: &Term) -> usize {
    (2 * max_depth_bound(f) + f.dhole_count()).saturating_sub(2)
}

/// Largest depth over all binary decompositions of `f`.
pub fn max_decomposition_depth(f: &Term) -> usize {
    fn go(f: &Term, memo: &mut std::collections::HashMap<Term, usize>) -> usize {
        if let Some(&d) = memo.get(f) {
            return d;
        }
        let mut best = 0;
        for fz in crate::terms::enumerate_factorizations(f) {
            let residue = fz
                .ctx
                .compose(&Term::single(Tree::default_hole(&fz.factor).expect("forest")))
                .expect("context");
            best = best.max(1 + go(&residue, memo).max(go(&fz.factor, memo)));
        }
        memo.insert(f.clone(), best);
        best
    }
    go(f, &mut std::collections::HashMap::new())
}

/// All binary decompositions of `f`, for small `f`.
pub fn all_decompositions(f: &Term) -> Vec<BinaryDecomposition> {
    fn expand_all(t: BinaryDecomposition, pending: &[NodeAddr], out: &mut Vec<BinaryDecomposition>) {
        let Some((x, rest)) = pending.split_first() else {
            out.push(t);
            return;
        };
        expand_all(t.clone(), rest, out);
        for fz in crate::terms::enumerate_factorizations(t.forest(x)) {
            let t2 = t.expand(x, &fz.ctx, &fz.factor).expect("factorization");
            let mut more = vec![child(x, 0), child(x, 1)];
            more.extend_from_slice(rest);
            expand_all(t2, &more, out);
        }
    }
    let mut out = Vec::new();
    expand_all(BinaryDecomposition::singleton(f.clone()), &[Vec::new()], &mut out);
    out
}

/// `true` when every default hole payload is tracked by the references.
pub fn holes_match_references(t: &BinaryDecomposition) -> bool {
    t.references().iter().all(|r| match t.forest(&r.from).label_at(&r.at) {
        Some(Label::DefaultHole(p)) => *p == unravel(t.forest(&r.to)),
        _ => false,
    })
}
