//! General decomposition trees: binary nodes plus idempotent (ℑ) and
//! centipede (ℭ) nodes that store the binary region they summarize.

use crate::algebra::{AlgebraError, Valuation};
use crate::augmented::StableContextSet;
use crate::bindec::{child, BinaryDecomposition, BindecError, Kind, Node, NodeAddr, RawBinaryNode};
use crate::search::{factorization_of, route_addresses, Basis, SearchError};
use crate::terms::{Address, Label, Term, TermError, Tree};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("bad witness at {0}: {1}")]
    BadWitness(String, String),
    #[error("value of idempotent node {0} is not idempotent")]
    NonIdempotentValue(String),
    #[error("witness leaves do not match the children of {0}")]
    LeafMismatch(String),
    #[error("binary node {0}: {1}")]
    BadBinary(String, String),
    #[error("leaf {0} is not in the basis")]
    NotFull(String),
    #[error("region is not stable over the idempotent's preimage")]
    RegionNotStable,
    #[error("region is not a centipede without inherited references")]
    NotACentipede,
    #[error("leaf {0} is not of a standard basis shape")]
    BasisNotStandard(String),
    #[error("empty forest")]
    EmptyForest,
    #[error("forest contains holes")]
    NotPlain,
    #[error("idempotent nodes need a valuation")]
    MissingValuation,
    #[error("malformed node list: {0}")]
    Malformed(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Bindec(#[from] BindecError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenKind {
    Leaf,
    Binary,
    Idempotent { value: usize, witness: BinaryDecomposition },
    Centipede { witness: BinaryDecomposition },
}

impl GenKind {
    pub fn symbol(&self) -> &'static str {
        match self {
            GenKind::Leaf => "L",
            GenKind::Binary => "B",
            GenKind::Idempotent { .. } => "I",
            GenKind::Centipede { .. } => "C",
        }
    }
}

/// One node and its subtree. Children of ℑ and ℭ nodes follow the witness
/// leaves in order; a binary node has the residue first and the factor second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralDecomposition {
    pub forest: Term,
    pub ctx: Term,
    pub kind: GenKind,
    pub children: Vec<GeneralDecomposition>,
}

pub fn fmt_gen(addr: &[usize]) -> String {
    if addr.is_empty() {
        "ε".to_string()
    } else {
        addr.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
    }
}

pub fn parse_gen(s: &str) -> Option<Address> {
    if s == "ε" || s.is_empty() {
        return Some(Vec::new());
    }
    s.split('.').map(|p| p.parse().ok()).collect()
}

fn residue_of(ctx: &Term, factor: &Term) -> Result<Term, TermError> {
    ctx.compose(&Term::single(Tree::default_hole(factor)?))
}

impl GeneralDecomposition {
    pub fn leaf(forest: Term) -> Self {
        GeneralDecomposition {
            forest,
            ctx: Term::hole(),
            kind: GenKind::Leaf,
            children: Vec::new(),
        }
    }

    /// Binary node `forest = ctx·upper.forest` with residue `lower`.
    pub fn binary(forest: Term, mut lower: Self, ctx: Term, mut upper: Self) -> Self {
        lower.ctx = Term::hole();
        upper.ctx = ctx;
        GeneralDecomposition {
            forest,
            ctx: Term::hole(),
            kind: GenKind::Binary,
            children: vec![lower, upper],
        }
    }

    fn with_witness(kind: GenKind, forest: Term, mut children: Vec<Self>) -> Self {
        for c in &mut children {
            c.ctx = Term::hole();
        }
        GeneralDecomposition {
            forest,
            ctx: Term::hole(),
            kind,
            children,
        }
    }

    /// 𝔅/𝔏 tree mirroring `tau`.
    pub fn from_binary(tau: &BinaryDecomposition) -> Self {
        Self::from_binary_with(tau, &mut |_, f| Ok::<_, GenError>(Self::leaf(f.clone()))).expect("infallible")
    }

    /// 𝔅 tree mirroring `tau`, with `leaf(x, forest)` supplying each leaf subtree.
    pub fn from_binary_with<E>(
        tau: &BinaryDecomposition,
        leaf: &mut dyn FnMut(&NodeAddr, &Term) -> Result<Self, E>,
    ) -> Result<Self, E> {
        fn go<E>(
            tau: &BinaryDecomposition,
            x: &NodeAddr,
            leaf: &mut dyn FnMut(&NodeAddr, &Term) -> Result<GeneralDecomposition, E>,
        ) -> Result<GeneralDecomposition, E> {
            if tau.is_leaf(x) {
                return leaf(x, tau.forest(x));
            }
            let x0 = child(x, 0);
            let x1 = child(x, 1);
            let lower = go(tau, &x0, leaf)?;
            let upper = go(tau, &x1, leaf)?;
            Ok(GeneralDecomposition::binary(
                tau.forest(x).clone(),
                lower,
                tau.ctx(&x1).clone(),
                upper,
            ))
        }
        go(tau, &Vec::new(), leaf)
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Self::node_count).sum::<usize>()
    }

    /// Preorder walk with addresses.
    pub fn walk(&self) -> Vec<(Address, &GeneralDecomposition)> {
        fn go<'a>(n: &'a GeneralDecomposition, addr: &mut Address, out: &mut Vec<(Address, &'a GeneralDecomposition)>) {
            out.push((addr.clone(), n));
            for (i, c) in n.children.iter().enumerate() {
                addr.push(i);
                go(c, addr, out);
                addr.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn count_kind(&self, symbol: &str) -> usize {
        self.walk().iter().filter(|(_, n)| n.kind.symbol() == symbol).count()
    }

    pub fn leaf_forests(&self) -> Vec<Term> {
        self.walk()
            .into_iter()
            .filter(|(_, n)| n.kind == GenKind::Leaf)
            .map(|(_, n)| n.forest.clone())
            .collect()
    }

    /// Rewrites every ℑ value.
    pub fn map_values(&self, f: &dyn Fn(usize) -> usize) -> Self {
        let mut out = self.clone();
        if let GenKind::Idempotent { value, .. } = &mut out.kind {
            *value = f(*value);
        }
        out.children = self.children.iter().map(|c| c.map_values(f)).collect();
        out
    }

    /// Node-local conditions, and basis membership of every leaf when
    /// `basis` is given.
    pub fn validate(
        &self,
        set: &StableContextSet,
        valuation: Option<&Arc<Valuation>>,
        basis: Option<&Basis>,
    ) -> Result<(), GenError> {
        self.validate_at(&mut Vec::new(), set, valuation, basis)
    }

    fn validate_at(
        &self,
        addr: &mut Address,
        set: &StableContextSet,
        valuation: Option<&Arc<Valuation>>,
        basis: Option<&Basis>,
    ) -> Result<(), GenError> {
        let here = fmt_gen(addr);
        match &self.kind {
            GenKind::Leaf => {
                if !self.children.is_empty() {
                    return Err(GenError::BadBinary(here, "leaf with children".into()));
                }
                if basis.is_some_and(|b| !b.contains(&self.forest)) {
                    return Err(GenError::NotFull(here));
                }
            }
            GenKind::Binary => {
                let [lower, upper] = self.children.as_slice() else {
                    return Err(GenError::BadBinary(here, "needs two children".into()));
                };
                let c = &upper.ctx;
                if !c.is_context() || c.is_bare_hole() {
                    return Err(GenError::BadBinary(here, "trivial or malformed context".into()));
                }
                if !lower.ctx.is_bare_hole() {
                    return Err(GenError::BadBinary(here, "residue context must be the hole".into()));
                }
                if !set.contains(c)? {
                    return Err(GenError::BadBinary(here, format!("context {c} outside the context set")));
                }
                if upper.forest.is_empty() || c.compose(&upper.forest)? != self.forest {
                    return Err(GenError::BadBinary(here, "composition mismatch".into()));
                }
                let r = residue_of(c, &upper.forest)?;
                if r != lower.forest || r == self.forest {
                    return Err(GenError::BadBinary(here, "residue mismatch".into()));
                }
            }
            GenKind::Idempotent { value, witness } => {
                let val = valuation.ok_or(GenError::MissingValuation)?;
                if *value >= val.target().len() || !val.target().is_idempotent(*value) {
                    return Err(GenError::NonIdempotentValue(here));
                }
                let zone = StableContextSet::preimage(val.clone(), [*value], true)?;
                self.check_witness(&here, witness)?;
                for (y, n) in witness.nodes() {
                    if y.last() == Some(&1) && !zone.contains(&n.ctx)? {
                        return Err(GenError::BadWitness(here, format!("context {} not valued {}", n.ctx, val.target().name(*value))));
                    }
                }
                if let Some(r) = witness.check_stable(&zone)? {
                    return Err(GenError::BadWitness(here, format!("unstable reference {r:?}")));
                }
            }
            GenKind::Centipede { witness } => {
                self.check_witness(&here, witness)?;
                if !is_centipede(witness) {
                    return Err(GenError::BadWitness(here, "not a centipede".into()));
                }
                for (y, n) in witness.nodes() {
                    if y.last() == Some(&1) && !set.contains(&n.ctx)? {
                        return Err(GenError::BadWitness(here, format!("context {} outside the context set", n.ctx)));
                    }
                }
            }
        }
        for (i, c) in self.children.iter().enumerate() {
            addr.push(i);
            c.validate_at(addr, set, valuation, basis)?;
            addr.pop();
        }
        Ok(())
    }

    fn check_witness(&self, here: &str, witness: &BinaryDecomposition) -> Result<(), GenError> {
        if witness.root_forest() != &self.forest {
            return Err(GenError::BadWitness(here.to_string(), "root forest differs".into()));
        }
        let leaves = witness.leaf_forests();
        if leaves.len() != self.children.len() || leaves.iter().zip(&self.children).any(|(f, c)| f != &c.forest) {
            return Err(GenError::LeafMismatch(here.to_string()));
        }
        if self.children.iter().any(|c| !c.ctx.is_bare_hole()) {
            return Err(GenError::BadWitness(here.to_string(), "children must carry the hole context".into()));
        }
        Ok(())
    }

    /// Replaces every ℭ node by the decomposition of its index child, with
    /// the centipede legs plugged in where their holes end up.
    pub fn eliminate_c_nodes(&self) -> Result<Self, GenError> {
        let kids = self
            .children
            .iter()
            .map(Self::eliminate_c_nodes)
            .collect::<Result<Vec<_>, _>>()?;
        let GenKind::Centipede { witness } = &self.kind else {
            return Ok(GeneralDecomposition {
                children: kids,
                ..self.clone()
            });
        };
        let leaves = witness.leaves();
        let index = &leaves[0];
        let legs: Vec<Term> = kids.iter().map(|k| k.forest.clone()).collect();
        let tracked: Tagged = witness
            .refs_of(index)
            .iter()
            .map(|(u, y)| (u.clone(), leaves.iter().position(|l| l == y).expect("leg is a leaf")))
            .collect();
        let mut out = substitute_general(&kids[0], &tracked, &legs, &kids)?;
        out.ctx = self.ctx.clone();
        debug_assert_eq!(out.forest, self.forest);
        Ok(out)
    }

    pub fn to_raw(&self) -> Vec<RawGenNode> {
        self.walk()
            .into_iter()
            .map(|(a, n)| RawGenNode {
                addr: fmt_gen(&a),
                kind: n.kind.symbol().to_string(),
                forest: n.forest.to_string(),
                ctx: n.ctx.to_string(),
                value: match &n.kind {
                    GenKind::Idempotent { value, .. } => Some(*value),
                    _ => None,
                },
                witness: match &n.kind {
                    GenKind::Idempotent { witness, .. } | GenKind::Centipede { witness } => Some(witness.to_raw()),
                    _ => None,
                },
            })
            .collect()
    }

    pub fn from_raw(raw: &[RawGenNode]) -> Result<Self, GenError> {
        let mut by_addr: BTreeMap<Address, &RawGenNode> = BTreeMap::new();
        for r in raw {
            let a = parse_gen(&r.addr).ok_or_else(|| GenError::Malformed(r.addr.clone()))?;
            if by_addr.insert(a, r).is_some() {
                return Err(GenError::Malformed(format!("duplicate node {}", r.addr)));
            }
        }
        if by_addr.len() != raw.len() || !by_addr.contains_key(&Vec::new()) {
            return Err(GenError::Malformed("missing root".into()));
        }
        fn build(a: &mut Address, m: &BTreeMap<Address, &RawGenNode>) -> Result<GeneralDecomposition, GenError> {
            let r = m[a];
            let forest = Term::parse(&r.forest)?;
            let ctx = Term::parse(&r.ctx)?;
            let kind = match (r.kind.as_str(), r.value, &r.witness) {
                ("L", None, None) => GenKind::Leaf,
                ("B", None, None) => GenKind::Binary,
                ("I", Some(value), Some(w)) => GenKind::Idempotent {
                    value,
                    witness: BinaryDecomposition::from_raw(w)?,
                },
                ("C", None, Some(w)) => GenKind::Centipede {
                    witness: BinaryDecomposition::from_raw(w)?,
                },
                _ => return Err(GenError::Malformed(format!("node {} has kind {} with wrong payload", r.addr, r.kind))),
            };
            let mut children = Vec::new();
            loop {
                a.push(children.len());
                if !m.contains_key(a) {
                    a.pop();
                    break;
                }
                children.push(build(a, m)?);
                a.pop();
            }
            Ok(GeneralDecomposition {
                forest,
                ctx,
                kind,
                children,
            })
        }
        let out = build(&mut Vec::new(), &by_addr)?;
        if out.node_count() != raw.len() {
            return Err(GenError::Malformed("unreachable nodes".into()));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, GenError> {
        let raw: Vec<RawGenNode> = serde_json::from_str(text).map_err(|e| GenError::Json(e.to_string()))?;
        Self::from_raw(&raw)
    }

    /// Graphviz: box 𝔅, ellipse ℑ, hexagon ℭ, plain 𝔏.
    pub fn to_dot(&self, valuation: Option<&Valuation>) -> String {
        let mut s = String::from("digraph general {\n  node [fontname=\"monospace\"];\n");
        let walk = self.walk();
        let id = |a: &[usize]| format!("n_{}", a.iter().map(usize::to_string).collect::<Vec<_>>().join("_"));
        for (a, n) in &walk {
            let shape = match n.kind {
                GenKind::Leaf => "plain",
                GenKind::Binary => "box",
                GenKind::Idempotent { .. } => "ellipse",
                GenKind::Centipede { .. } => "hexagon",
            };
            let mut label = n.forest.to_string();
            if let GenKind::Idempotent { value, .. } = n.kind {
                let name = valuation.map_or_else(|| value.to_string(), |v| v.target().name(value).to_string());
                let _ = write!(label, "\\nval={name}");
            }
            let _ = writeln!(s, "  {} [shape={shape}, label=\"{}\"];", id(a), label.replace('"', "\\\""));
        }
        for (a, n) in &walk {
            for (i, c) in n.children.iter().enumerate() {
                let mut b = a.clone();
                b.push(i);
                if c.ctx.is_bare_hole() {
                    let _ = writeln!(s, "  {} -> {};", id(a), id(&b));
                } else {
                    let _ = writeln!(s, "  {} -> {} [label=\"{}\"];", id(a), id(&b), c.ctx);
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGenNode {
    pub addr: String,
    pub kind: String,
    pub forest: String,
    pub ctx: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<RawBinaryNode>>,
}

/// Nodes within `0*(ε+1)` and no inherited references.
pub fn is_centipede(tau: &BinaryDecomposition) -> bool {
    tau.nodes().all(|(y, _)| y.iter().rev().skip(1).all(|&b| b == 0)) && !tau.has_inherited_references()
}

pub fn fold_idempotent_region(
    tau: &BinaryDecomposition,
    value: usize,
    valuation: &Arc<Valuation>,
    children: Vec<GeneralDecomposition>,
) -> Result<GeneralDecomposition, GenError> {
    if !valuation.target().is_idempotent(value) {
        return Err(GenError::NonIdempotentValue("ε".into()));
    }
    let zone = StableContextSet::preimage(valuation.clone(), [value], true)?;
    for (y, n) in tau.nodes() {
        if y.last() == Some(&1) && !zone.contains(&n.ctx)? {
            return Err(GenError::RegionNotStable);
        }
    }
    if tau.check_stable(&zone)?.is_some() {
        return Err(GenError::RegionNotStable);
    }
    let node = GeneralDecomposition::with_witness(
        GenKind::Idempotent {
            value,
            witness: tau.clone(),
        },
        tau.root_forest().clone(),
        children,
    );
    node.check_witness("ε", &witness_of(&node))?;
    Ok(node)
}

pub fn fold_centipede(tau: &BinaryDecomposition, children: Vec<GeneralDecomposition>) -> Result<GeneralDecomposition, GenError> {
    if !is_centipede(tau) {
        return Err(GenError::NotACentipede);
    }
    let node = GeneralDecomposition::with_witness(
        GenKind::Centipede { witness: tau.clone() },
        tau.root_forest().clone(),
        children,
    );
    node.check_witness("ε", &witness_of(&node))?;
    Ok(node)
}

fn witness_of(n: &GeneralDecomposition) -> BinaryDecomposition {
    match &n.kind {
        GenKind::Idempotent { witness, .. } | GenKind::Centipede { witness } => witness.clone(),
        _ => unreachable!("witness-bearing node"),
    }
}

/// Binary decomposition into the standard basis following the structure of
/// `f`: `σ(f′)` plucks `f′`, and `f₁+t` plucks `t` then `f₁`.
pub fn decompose_to_standard_basis(f: &Term) -> Result<GeneralDecomposition, GenError> {
    if f.is_empty() {
        return Err(GenError::EmptyForest);
    }
    if f.hole_count() > 0 || f.dhole_count() > 0 {
        return Err(GenError::NotPlain);
    }
    standard(f)
}

fn standard(f: &Term) -> Result<GeneralDecomposition, GenError> {
    if let [t] = f.roots.as_slice() {
        let Label::Letter(name) = &t.label else {
            return Err(GenError::NotPlain);
        };
        if t.children.is_empty() {
            return Ok(GeneralDecomposition::leaf(f.clone()));
        }
        let inner = Term::from_trees(t.children.clone());
        let ctx = Term::single(Tree::node(name, Term::hole()));
        let lower = GeneralDecomposition::leaf(residue_of(&ctx, &inner)?);
        return Ok(GeneralDecomposition::binary(f.clone(), lower, ctx, standard(&inner)?));
    }
    let (last, init) = f.roots.split_last().ok_or(GenError::EmptyForest)?;
    let f1 = Term::from_trees(init.to_vec());
    let f2 = Term::single(last.clone());
    let ctx1 = Term::from_trees(init.iter().cloned().chain([Tree::hole()]).collect());
    let residue = residue_of(&ctx1, &f2)?;
    let ctx01 = Term::from_trees(vec![Tree::hole(), Tree::default_hole(&f2)?]);
    let lower = GeneralDecomposition::binary(
        residue,
        GeneralDecomposition::leaf(residue_of(&ctx01, &f1)?),
        ctx01,
        standard(&f1)?,
    );
    Ok(GeneralDecomposition::binary(f.clone(), lower, ctx1, standard(&f2)?))
}

/// Default-hole addresses tagged with the index of the centipede leg they stand for.
type Tagged = Vec<(Address, usize)>;

fn subst_forest(f: &Term, tracked: &Tagged, legs: &[Term]) -> Result<Term, TermError> {
    let mut order = tracked.clone();
    order.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out = f.clone();
    for (u, i) in order {
        out = out.substitute(&u, &legs[i])?;
    }
    Ok(out)
}

/// Where `u` lands after the substitutions of `tracked`.
fn shift(u: &[usize], tracked: &Tagged, legs: &[Term]) -> Address {
    let mut out = u.to_vec();
    for (v, i) in tracked {
        let d = v.len() - 1;
        if u.len() > d && u[..d] == v[..d] && u[d] > v[d] {
            out[d] += legs[*i].roots.len() - 1;
        }
    }
    out
}

fn substitute_general(
    node: &GeneralDecomposition,
    tracked: &Tagged,
    legs: &[Term],
    leg_decs: &[GeneralDecomposition],
) -> Result<GeneralDecomposition, GenError> {
    if tracked.is_empty() {
        return Ok(node.clone());
    }
    let forest = subst_forest(&node.forest, tracked, legs)?;
    let mut out = match &node.kind {
        GenKind::Leaf => expand_leaf(&node.forest, forest, tracked, legs, leg_decs)?,
        GenKind::Binary => {
            let (lower, upper) = (&node.children[0], &node.children[1]);
            let fz = factorization_of(&upper.ctx, &upper.forest)?;
            let mut s = fz.parent.clone();
            s.push(fz.start);
            let (t0, t1) = route_addresses(&s, upper.forest.width(), tracked)?;
            let lower2 = substitute_general(lower, &t0, legs, leg_decs)?;
            let upper2 = substitute_general(upper, &t1, legs, leg_decs)?;
            let ctx = lower2.forest.hole_at(&shift(&s, &t0, legs))?;
            GeneralDecomposition::binary(forest, lower2, ctx, upper2)
        }
        GenKind::Idempotent { witness, .. } | GenKind::Centipede { witness } => {
            let (w2, leaf_tracked) = substitute_witness(witness, tracked, legs)?;
            let children = witness
                .leaves()
                .iter()
                .zip(&node.children)
                .map(|(y, c)| substitute_general(c, &leaf_tracked[y], legs, leg_decs))
                .collect::<Result<Vec<_>, _>>()?;
            let kind = match &node.kind {
                GenKind::Idempotent { value, .. } => GenKind::Idempotent { value: *value, witness: w2 },
                _ => GenKind::Centipede { witness: w2 },
            };
            GeneralDecomposition::with_witness(kind, forest, children)
        }
    };
    out.ctx = node.ctx.clone();
    Ok(out)
}

fn substitute_witness(
    tau: &BinaryDecomposition,
    tracked: &Tagged,
    legs: &[Term],
) -> Result<(BinaryDecomposition, BTreeMap<NodeAddr, Tagged>), GenError> {
    let mut tr: BTreeMap<NodeAddr, Tagged> = BTreeMap::from([(Vec::new(), tracked.clone())]);
    let mut ctxs: BTreeMap<NodeAddr, Term> = BTreeMap::new();
    let mut nodes = BTreeMap::new();
    for (y, n) in tau.nodes() {
        let t = tr[y].clone();
        if n.kind == Kind::Branch {
            let (y0, y1) = (child(y, 0), child(y, 1));
            let fz = factorization_of(tau.ctx(&y1), tau.forest(&y1))?;
            let mut s = fz.parent.clone();
            s.push(fz.start);
            let (t0, t1) = route_addresses(&s, tau.forest(&y1).width(), &t)?;
            let f0 = subst_forest(tau.forest(&y0), &t0, legs)?;
            ctxs.insert(y1.clone(), f0.hole_at(&shift(&s, &t0, legs))?);
            tr.insert(y0, t0);
            tr.insert(y1, t1);
        }
        nodes.insert(
            y.clone(),
            Node {
                forest: subst_forest(&n.forest, &t, legs)?,
                ctx: ctxs.get(y).cloned().unwrap_or_else(|| n.ctx.clone()),
                kind: n.kind,
            },
        );
    }
    let leaves = tau.leaves().into_iter().map(|y| {
        let t = tr[&y].clone();
        (y, t)
    });
    Ok((BinaryDecomposition::from_nodes(nodes)?, leaves.collect()))
}

/// Case split on the standard basis shape of the original leaf `orig`.
fn expand_leaf(
    orig: &Term,
    forest: Term,
    tracked: &Tagged,
    legs: &[Term],
    leg_decs: &[GeneralDecomposition],
) -> Result<GeneralDecomposition, GenError> {
    let bad = || GenError::BasisNotStandard(orig.to_string());
    let leaf = GeneralDecomposition::leaf(orig.clone());
    let at = |a: &[usize]| tracked.iter().find(|(u, _)| u == a).map(|(_, i)| *i);
    match orig.roots.as_slice() {
        [t] if t.letter().is_some() && t.children.len() == 1 && t.children[0].is_default_hole() => {
            let i = at(&[0, 0]).ok_or_else(bad)?;
            let ctx = orig.hole_at(&[0, 0])?;
            Ok(GeneralDecomposition::binary(forest, leaf, ctx, leg_decs[i].clone()))
        }
        [a, b] if a.is_default_hole() && b.is_default_hole() => match (at(&[0]), at(&[1])) {
            (Some(i), None) => Ok(GeneralDecomposition::binary(forest, leaf, orig.hole_at(&[0])?, leg_decs[i].clone())),
            (None, Some(j)) => Ok(GeneralDecomposition::binary(forest, leaf, orig.hole_at(&[1])?, leg_decs[j].clone())),
            (Some(i), Some(j)) => {
                let ctx1 = Term::from_trees(std::iter::once(Tree::hole()).chain(legs[j].roots.iter().cloned()).collect());
                let residue = residue_of(&ctx1, &legs[i])?;
                let lower = GeneralDecomposition::binary(residue, leaf, orig.hole_at(&[1])?, leg_decs[j].clone());
                Ok(GeneralDecomposition::binary(forest, lower, ctx1, leg_decs[i].clone()))
            }
            (None, None) => Err(bad()),
        },
        _ => Err(bad()),
    }
}

/// One row per forest: depth of the constructed decomposition against `bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub forest: String,
    pub depth: usize,
    pub bound: usize,
}

pub fn dec_bound_report<E>(
    forests: &[Term],
    bound: usize,
    build: impl Fn(&Term) -> Result<GeneralDecomposition, E>,
) -> Result<Vec<BoundRow>, E> {
    forests
        .iter()
        .map(|f| {
            Ok(BoundRow {
                forest: f.to_string(),
                depth: build(f)?.depth(),
                bound,
            })
        })
        .collect()
}

pub mod examples {
    use super::*;
    use crate::search::{minimal_full_decomposition, SearchScope};

    /// `and(and(and(and(T+T)+not(T))+not(T))+not(T))`.
    pub const TBF_FOREST: &str = "and(and(and(and(T+T)+not(T))+not(T))+not(T))";

    /// Binary region whose contexts all evaluate to the idempotent of
    /// `and(_+not(T))`, with leaves `00, 010, 0110, 0111, 1`.
    pub fn tbf_region() -> Result<BinaryDecomposition, GenError> {
        let p = |s: &str| Term::parse(s);
        let mut tau = BinaryDecomposition::singleton(p(TBF_FOREST)?);
        tau = tau.expand(&[], &p("and(and(and(and(T+T)+not(T))+not(T))+_)")?, &p("not(T)")?)?;
        tau = tau.expand(&[0], &p("and(_+[not(T)])")?, &p("and(and(and(T+T)+not(T))+not(T))")?)?;
        tau = tau.expand(&[0, 1], &p("and(_+not(T))")?, &p("and(and(T+T)+not(T))")?)?;
        tau = tau.expand(&[0, 1, 1], &p("and(_+not(T))")?, &p("and(T+T)")?)?;
        Ok(tau)
    }

    /// The region folded to an idempotent root, each leaf then split into the
    /// standard basis.
    pub fn tbf_general() -> Result<GeneralDecomposition, GenError> {
        let b = crate::algebra::examples::tbf();
        let tau = tbf_region()?;
        let e = b.valuation.value(&Term::parse("and(_+not(T))")?)?.ok_or(GenError::MissingValuation)?;
        let scope = SearchScope::new(StableContextSet::Universal, Basis::Standard);
        let kids = tau
            .leaf_forests()
            .iter()
            .map(|l| Ok(GeneralDecomposition::from_binary(&minimal_full_decomposition(&scope, l)?)))
            .collect::<Result<Vec<_>, GenError>>()?;
        fold_idempotent_region(&tau, e, &b.valuation, kids)
    }
}
