//! Computational topology for dynamical systems and control: degrees of
//! Gauss maps, indices of equilibria, simplicial homology, and the
//! topological conditions built on them.

pub mod expr;
pub mod linalg;
pub mod mesh;
pub mod homology;
pub mod degree;
pub mod catalog;
pub mod conditions;
