//! Induced representations of finite groupoids.
//!
//! Finite groupoids are stored as dense lookup tables, representations as one
//! dense complex matrix per arrow. On top of that the crate builds the
//! induced representation `ind_H^G(σ, μ)` of a wide subgroupoid `H ⊆ G` and
//! checks the standard structural results about it by direct computation:
//! induction in stages, the outer tensor product identity, compatibility with
//! direct sums and conjugation, and Frobenius reciprocity on transitive
//! groupoids.
//!
//! Module map:
//!
//! * [`groupoid`]: groupoids, wide subgroupoids, coset spaces `G/H`.
//! * [`measure`]: Haar systems, equivariant measure systems on `G/H`.
//! * [`rep`]: unitary representations on finite-dimensional bundles.
//! * [`induction`]: the induced representation and its companion maps.
//! * [`intertwiner`]: `Mor(π, π′)`, unitary equivalence, Frobenius reciprocity.
//! * [`io`] and [`catalog`]: the JSON document format and built-in fixtures.

pub mod catalog;
pub mod groupoid;
pub mod induction;
pub mod intertwiner;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod rep;
pub mod report;
pub mod tolerance;

pub use groupoid::{CosetSpace, FiniteGroupoid, GroupoidError, WideSubgroupoid};
pub use induction::{EquivariantFunction, InducedRep, InductionError};
pub use intertwiner::IntertwinerError;
pub use measure::{EquivariantSystem, HaarSystem, MeasureError};
pub use rep::{BundleMap, RepError, Representation};
pub use report::ValidationReport;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
