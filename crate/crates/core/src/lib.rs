//! Pointed-tree complexes for symmetric automorphisms of free products of
//! finite groups: words, bases, Whitehead moves, fixed subcomplexes and the
//! topology needed to certify them.

pub mod auto;
pub mod basis;
pub mod complex;
pub mod error;
pub mod fixed;
pub mod group;
pub mod spec_format;
pub mod topology;
pub mod tree;
pub mod verify;

pub use auto::{AutPair, Automorphism};
pub use complex::{AutElement, Complex, Move, NormKind, VertexType, WhiteheadAuto};
pub use basis::{canonicalize_basis, Basis, ElementOrder, Frame, NormOrdering, NormVector};
pub use error::{Error, Result};
pub use fixed::{FSubgroup, FixedContext, TreeIndices};
pub use group::{FactorAuto, FactorGroup, FactorSource, FreeProduct, Letter, Word};
pub use spec_format::{load_group_spec, write_group_spec};
pub use tree::{enumerate_pointed_trees, poset_leq, BasedPartition, PointedTree};
pub use topology::{
    certify_contractible, homology, order_complex, poset_join, HomologyProfile, Poset,
    SimplicialComplex, Verdict,
};
