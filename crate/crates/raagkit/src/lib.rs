//! Computational toolkit for right-angled Artin groups.
//!
//! Given a finite simple graph, the right-angled Artin group on it has
//! one generator per vertex and one commuting relation per edge.  This
//! crate implements the word calculus of these groups (geodesic
//! reduction and ShortLex normal forms), the combinatorics of
//! hyperplanes in their canonical cube complexes, translation axes and
//! standard forms for cyclic subgroups, and certificates showing that a
//! two-generator subgroup is quasi-isometrically embedded.  A
//! brute-force breadth-first oracle cross-checks the structural
//! algorithms on small balls, and a separate module builds the classical
//! distorted examples that live outside the two-generator setting.

pub mod axes;
pub mod distortion;
pub mod element;
pub mod error;
pub mod fword;
pub mod geometry;
pub mod graph;
pub mod oracle;
pub mod qi;
pub mod word;

pub use distortion::{DistortionSample, FreeAutomorphism, NonembedReport, NonembedVerdict};
pub use element::GroupElement;
pub use error::{Error, Result};
pub use fword::FreeWord;
pub use geometry::Hyperplane;
pub use graph::{DefiningGraph, GraphSpec};
pub use qi::{Classification, QICertificate};
pub use word::{Letter, Sign, Word};
