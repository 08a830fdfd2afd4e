//! Default holes: unraveling, unravel-equivalence and stable context sets.

use crate::algebra::{AlgebraError, Valuation};
use crate::terms::{Label, Term, Tree};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Replaces every default hole by its payload.
pub fn unravel(t: &Term) -> Term {
    fn go(trees: &[Tree], out: &mut Vec<Tree>) {
        for t in trees {
            match &t.label {
                Label::DefaultHole(p) => go(&p.roots, out),
                _ => {
                    let mut children = Vec::with_capacity(t.children.len());
                    go(&t.children, &mut children);
                    out.push(Tree {
                        label: t.label.clone(),
                        children,
                    });
                }
            }
        }
    }
    let mut roots = Vec::with_capacity(t.roots.len());
    go(&t.roots, &mut roots);
    Term { roots }
}

pub fn unravel_equiv(t1: &Term, t2: &Term) -> bool {
    unravel(t1) == unravel(t2)
}

/// A context set closed under composition and unravel-equivalence, given as
/// the whole of `Ṽ_A` or as an inverse image `φ⁻¹[T]` (optionally with `□`).
#[derive(Clone)]
pub enum StableContextSet {
    Universal,
    Preimage {
        valuation: Arc<Valuation>,
        target: BTreeSet<usize>,
        include_identity: bool,
    },
}

impl StableContextSet {
    pub fn preimage(
        valuation: Arc<Valuation>,
        target: impl IntoIterator<Item = usize>,
        include_identity: bool,
    ) -> Result<Self, AlgebraError> {
        let target: BTreeSet<usize> = target.into_iter().collect();
        let s = valuation.target();
        if let Some(&bad) = target.iter().find(|&&t| t >= s.len()) {
            return Err(AlgebraError::UnknownElement(bad.to_string()));
        }
        let members: Vec<usize> = target.iter().copied().collect();
        if !s.is_subsemigroup(&members) {
            return Err(AlgebraError::TargetNotClosed);
        }
        Ok(StableContextSet::Preimage {
            valuation,
            target,
            include_identity,
        })
    }

    /// `φ⁻¹[S]` for the whole target.
    pub fn domain_of(valuation: Arc<Valuation>) -> Self {
        let all = valuation.target().elements();
        StableContextSet::preimage(valuation, all, false).expect("whole target is closed")
    }

    pub fn contains(&self, c: &Term) -> Result<bool, AlgebraError> {
        if !c.is_context() {
            return Err(AlgebraError::NotAContext);
        }
        match self {
            StableContextSet::Universal => Ok(true),
            StableContextSet::Preimage {
                valuation,
                target,
                include_identity,
            } => {
                if *include_identity && c.is_bare_hole() {
                    return Ok(true);
                }
                Ok(valuation.value(c)?.is_some_and(|s| target.contains(&s)))
            }
        }
    }

    pub fn valuation(&self) -> Option<&Arc<Valuation>> {
        match self {
            StableContextSet::Universal => None,
            StableContextSet::Preimage { valuation, .. } => Some(valuation),
        }
    }
}

impl fmt::Debug for StableContextSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StableContextSet::Universal => write!(f, "Universal"),
            StableContextSet::Preimage {
                valuation,
                target,
                include_identity,
            } => {
                let names: Vec<&str> = target.iter().map(|&t| valuation.target().name(t)).collect();
                write!(f, "Preimage({names:?}, identity={include_identity})")
            }
        }
    }
}
