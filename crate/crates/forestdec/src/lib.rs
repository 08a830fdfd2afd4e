//! Forest algebras with default holes, decomposition trees, and bounded-depth
//! decomposition constructions over finite semigroups.

pub mod algebra;
pub mod augmented;
pub mod bindec;
pub mod bounds;
pub mod counterexample;
pub mod gendec;
pub mod rotate;
pub mod search;
pub mod semigroup;
pub mod terms;
