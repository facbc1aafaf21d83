//! Group elements in canonical form.
//!
//! A [`GroupElement`] pairs a defining graph with the ShortLex normal
//! form of a word, so equality, hashing, and ordering are plain word
//! comparisons.  All binary operations require both operands to share
//! the same graph and fail with [`Error::GraphMismatch`] otherwise.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::DefiningGraph;
use crate::word::{canonical, reduce, Letter, Word};

#[derive(Clone)]
pub struct GroupElement {
    graph: Arc<DefiningGraph>,
    word: Word,
}

impl GroupElement {
    /// Identity element of the group defined by `graph`.
    pub fn identity(graph: &Arc<DefiningGraph>) -> Self {
        GroupElement { graph: Arc::clone(graph), word: Word::identity() }
    }

    /// Element represented by the given letters, canonicalized.
    pub fn from_letters(graph: &Arc<DefiningGraph>, letters: &[Letter]) -> Result<Self> {
        crate::word::check_letters(graph, letters)?;
        Ok(GroupElement { graph: Arc::clone(graph), word: Word(canonical(graph, letters)) })
    }

    /// Parses a word string and canonicalizes it.
    pub fn parse(graph: &Arc<DefiningGraph>, text: &str) -> Result<Self> {
        let word = Word::parse(graph, text)?;
        Ok(GroupElement { graph: Arc::clone(graph), word: Word(canonical(graph, &word.0)) })
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    /// Canonical (ShortLex-least geodesic) word of the element.
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn letters(&self) -> &[Letter] {
        self.word.letters()
    }

    /// Geodesic length.
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    fn same_graph(&self, other: &GroupElement) -> Result<()> {
        if Arc::ptr_eq(&self.graph, &other.graph) || self.graph.same_graph(&other.graph) {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        self.same_graph(other)?;
        let letters = self.word.concat(&other.word);
        Ok(GroupElement {
            graph: Arc::clone(&self.graph),
            word: Word(canonical(&self.graph, &letters.0)),
        })
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            graph: Arc::clone(&self.graph),
            word: Word(canonical(&self.graph, &self.word.inverse().0)),
        }
    }

    /// Integer power by repeated multiplication of the canonical word.
    pub fn pow(&self, n: i64) -> GroupElement {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Vec::new();
        for _ in 0..n.unsigned_abs() {
            acc.extend_from_slice(base.word.letters());
        }
        GroupElement {
            graph: Arc::clone(&self.graph),
            word: Word(canonical(&self.graph, &acc)),
        }
    }

    /// `other^-1 * self * other`.
    pub fn conjugate_by(&self, other: &GroupElement) -> Result<GroupElement> {
        self.same_graph(other)?;
        let mut letters = other.word.inverse().0;
        letters.extend_from_slice(self.word.letters());
        letters.extend_from_slice(other.word.letters());
        Ok(GroupElement {
            graph: Arc::clone(&self.graph),
            word: Word(canonical(&self.graph, &letters)),
        })
    }

    /// `self * other * self^-1 * other^-1`.
    pub fn commutator(&self, other: &GroupElement) -> Result<GroupElement> {
        self.same_graph(other)?;
        let mut letters = self.word.0.clone();
        letters.extend_from_slice(other.word.letters());
        letters.extend(self.word.inverse().0);
        letters.extend(other.word.inverse().0);
        Ok(GroupElement {
            graph: Arc::clone(&self.graph),
            word: Word(canonical(&self.graph, &letters)),
        })
    }

    pub fn commutes_with(&self, other: &GroupElement) -> Result<bool> {
        Ok(self.commutator(other)?.is_identity())
    }

    /// Vertices whose letters occur in the canonical word, as a bitmask.
    /// Geodesic words of one element all share this set.
    pub fn support_mask(&self) -> u64 {
        self.word.support_mask()
    }

    /// Support as sorted vertex names.
    pub fn support_names(&self) -> Vec<String> {
        crate::graph::mask_to_vec(self.support_mask())
            .into_iter()
            .map(|v| self.graph.vertex_name(v).to_owned())
            .collect()
    }

    /// Geodesic length of `self * other` without materializing the product.
    pub fn distance_to(&self, other: &GroupElement) -> Result<usize> {
        self.same_graph(other)?;
        let mut letters = self.word.inverse().0;
        letters.extend_from_slice(other.word.letters());
        Ok(reduce(&self.graph, &letters).len())
    }

    pub fn to_text(&self) -> String {
        self.word.to_text(&self.graph)
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.graph, &other.graph) || self.graph.same_graph(&other.graph))
            && self.word == other.word
    }
}

impl Eq for GroupElement {}

impl std::hash::Hash for GroupElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.word.hash(state);
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", self.to_text())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
