//! Local rotations of binary decompositions.
//!
//! Each rotation rewrites the five nodes at `x`, moves three subtrees
//! unchanged, and re-validates the result.

use crate::bindec::{child, fmt_node, BinaryDecomposition, BindecError, Kind, Node, NodeAddr};
use crate::terms::{Term, TermError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RotateError {
    #[error("rotation pattern does not match at node {0}")]
    PatternMismatch(String),
    #[error(transparent)]
    Bindec(#[from] BindecError),
    #[error(transparent)]
    Term(#[from] TermError),
}

fn at(x: &[u8], suffix: &[u8]) -> NodeAddr {
    let mut y = x.to_vec();
    y.extend_from_slice(suffix);
    y
}

fn require(t: &BinaryDecomposition, x: &[u8], suffixes: &[&[u8]]) -> Result<(), RotateError> {
    for s in suffixes {
        if t.get(&at(x, s)).is_none() {
            return Err(RotateError::PatternMismatch(fmt_node(x)));
        }
    }
    Ok(())
}

/// Copies `τ[from]` to `to`, giving the moved root the context `ctx`.
fn move_subtree(t: &BinaryDecomposition, from: &[u8], to: &[u8], ctx: Term, out: &mut BTreeMap<NodeAddr, Node>) {
    for (y, n) in t.nodes().filter(|(y, _)| y.starts_with(from)) {
        let mut n = n.clone();
        if y.len() == from.len() {
            n.ctx = ctx.clone();
        }
        out.insert(at(to, &y[from.len()..]), n);
    }
}

fn outside(t: &BinaryDecomposition, x: &[u8]) -> BTreeMap<NodeAddr, Node> {
    t.nodes()
        .filter(|(y, _)| !y.starts_with(x) || y.len() == x.len())
        .map(|(y, n)| (y.clone(), n.clone()))
        .collect()
}

fn branch(forest: Term, ctx: Term) -> Node {
    Node {
        forest,
        ctx,
        kind: Kind::Branch,
    }
}

/// `x01@u → x1` becomes a top-down split: the larger piece is plucked first.
pub fn rotate_bt_tb(t: &BinaryDecomposition, x: &[u8]) -> Result<BinaryDecomposition, RotateError> {
    require(t, x, &[&[0], &[1], &[0, 0], &[0, 1]])?;
    let x1 = child(x, 1);
    let x01 = at(x, &[0, 1]);
    let link = t
        .linking_context(&x01, &x1)
        .map_err(|_| RotateError::PatternMismatch(fmt_node(x)))?;
    let composed = t.ctx(&x01).compose(&link)?;
    if &composed != t.ctx(&x1) {
        return Err(RotateError::PatternMismatch(fmt_node(x)));
    }
    let mut nodes = outside(t, x);
    move_subtree(t, &at(x, &[0, 0]), &child(x, 0), Term::hole(), &mut nodes);
    nodes.insert(x1.clone(), branch(link.compose(t.forest(&x1))?, t.ctx(&x01).clone()));
    move_subtree(t, &x01, &at(x, &[1, 0]), Term::hole(), &mut nodes);
    move_subtree(t, &x1, &at(x, &[1, 1]), link, &mut nodes);
    Ok(BinaryDecomposition::from_nodes(nodes)?)
}

/// Inverse shape of [`rotate_bt_tb`].
pub fn rotate_tb_bt(t: &BinaryDecomposition, x: &[u8]) -> Result<BinaryDecomposition, RotateError> {
    require(t, x, &[&[0], &[1], &[1, 0], &[1, 1]])?;
    let x1 = child(x, 1);
    let x11 = at(x, &[1, 1]);
    let c = t.ctx(&x1).compose(t.ctx(&x11))?;
    let residue = c.compose(&Term::single(crate::terms::Tree::default_hole(t.forest(&x11))?))?;
    let mut nodes = outside(t, x);
    nodes.insert(child(x, 0), branch(residue, Term::hole()));
    move_subtree(t, &child(x, 0), &at(x, &[0, 0]), Term::hole(), &mut nodes);
    move_subtree(t, &at(x, &[1, 0]), &at(x, &[0, 1]), t.ctx(&x1).clone(), &mut nodes);
    move_subtree(t, &x11, &x1, c, &mut nodes);
    Ok(BinaryDecomposition::from_nodes(nodes)?)
}

/// Two parallel plucks swap order: `x00@u₁ → x1` becomes a pluck of
/// `forest(x01)` first.
pub fn rotate_lr_rl(t: &BinaryDecomposition, x: &[u8]) -> Result<BinaryDecomposition, RotateError> {
    require(t, x, &[&[0], &[1], &[0, 0], &[0, 1]])?;
    let x1 = child(x, 1);
    let x00 = at(x, &[0, 0]);
    let x01 = at(x, &[0, 1]);
    let u1 = t
        .refs_of(&x00)
        .iter()
        .find(|(_, y)| *y == x1)
        .map(|(u, _)| u.clone())
        .ok_or_else(|| RotateError::PatternMismatch(fmt_node(x)))?;
    let new_ctx1 = t.ctx(&x01).substitute(&u1, t.forest(&x1))?;
    let link = t.linking_context(&x00, &x1)?;
    let residue = new_ctx1.compose(&Term::single(crate::terms::Tree::default_hole(t.forest(&x01))?))?;
    let mut nodes = outside(t, x);
    nodes.insert(child(x, 0), branch(residue, Term::hole()));
    move_subtree(t, &x00, &x00, Term::hole(), &mut nodes);
    move_subtree(t, &x1, &x01, link, &mut nodes);
    move_subtree(t, &x01, &x1, new_ctx1, &mut nodes);
    Ok(BinaryDecomposition::from_nodes(nodes)?)
}
