//! Executable checks for linear propagation of logical edits.
//!
//! The crate is organised bottom-up:
//!
//! * [`relalg`]: finite binary relations with negation, converse and composition.
//! * [`queryspace`]: query triples, the logical group, entity renamings and
//!   logical families.
//! * [`featspace`]: linearized feature maps, kernels, equivariance and SLP
//!   checks, and lifted renaming operators.
//! * [`factorize`]: constructive tensor-factorized maps, negation and
//!   isotypic splits, parity decompositions and Hom-dimension checks.
//! * [`conjunction`]: compound queries, kernel stability, bilinear conjunction
//!   fitting and the collapse certificate.
//! * [`gradlab`]: a small scorer trained on a synthetic knowledge base for
//!   gradient-alignment and edit-propagation experiments.

pub mod conjunction;
pub mod error;
pub mod factorize;
pub mod featspace;
pub mod gradlab;
pub mod laws;
pub mod linalg;
pub mod queryspace;
pub mod relalg;
pub mod report;

pub use error::{Error, Result};
pub use queryspace::{Families, GroupElementH, LogicalFamily, LogicalOp, Permutation, Query, QuerySpace, Sign};
pub use relalg::{EntitySet, Relation, RelationAlgebra, RelationFile};
pub use report::{Detail, Report};
