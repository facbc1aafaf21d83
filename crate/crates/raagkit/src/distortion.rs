//! Fiber distortion in free-by-cyclic mapping tori.
//!
//! An automorphism φ of a free group F presents the mapping torus
//! F ⋊_φ ℤ = ⟨F, t | t g t⁻¹ = φ(g)⟩.  The conjugate tⁿ a t⁻ⁿ has length
//! 2n+1 in the ambient group but equals φⁿ(a) inside the fiber, so the
//! growth of |φⁿ(a)| measures how badly F is distorted.  When that
//! growth is exponential the fiber cannot be quasi-isometrically
//! embedded, and neither can any group containing it undistorted; the
//! checks here gather exact numerical evidence for that obstruction
//! over a sampled range of exponents.
//!
//! Free-group words reuse the general word calculus over an edgeless
//! defining graph, so reduction here is plain free cancellation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::DefiningGraph;
use crate::word::{self, Letter, Sign, Word};

/// Letter budget for any materialized fiber word.
const MATERIALIZE_LIMIT: usize = 4_000_000;

/// Default image-length ceiling when searching for an inverse map.
const INVERSE_SEARCH_LIMIT: usize = 8;

/// Candidate budget for the inverse search across all lengths.
const INVERSE_SEARCH_BUDGET: usize = 1_000_000;

/// An automorphism of a finitely generated free group, stored as the
/// images of the generators together with a verified inverse.
///
/// Every constructor checks invertibility: either a supplied inverse is
/// verified to compose to the identity on the generators, or one is
/// found by a bounded search.  A one-sided inverse suffices because a
/// surjective endomorphism of a free group is an automorphism, but both
/// compositions are checked anyway.
#[derive(Debug, Clone)]
pub struct FreeAutomorphism {
    graph: Arc<DefiningGraph>,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
    name: Option<String>,
}

/// Generator names for the edgeless graph: single letters `a`..`z`.
fn free_names(rank: usize) -> Result<Vec<String>> {
    if rank == 0 {
        return Err(Error::precondition("free_automorphism", "rank must be positive"));
    }
    if rank > 26 {
        return Err(Error::precondition(
            "free_automorphism",
            format!("rank {rank} exceeds the 26 single-letter generator names"),
        ));
    }
    Ok((0..rank).map(|i| ((b'a' + i as u8) as char).to_string()).collect())
}

/// Applies the map given by `images` to `w` and freely reduces.
fn apply_images(graph: &DefiningGraph, images: &[Word], w: &Word) -> Result<Word> {
    word::check_letters(graph, w.letters())?;
    let mut out: Vec<Letter> = Vec::new();
    for l in w.letters() {
        let image = &images[l.vertex];
        match l.sign {
            Sign::Plus => out.extend_from_slice(image.letters()),
            Sign::Minus => out.extend(image.letters().iter().rev().map(|x| x.inverse())),
        }
        if out.len() > MATERIALIZE_LIMIT {
            return Err(Error::ResourceLimit {
                detail: format!("substituted word exceeds {MATERIALIZE_LIMIT} letters"),
            });
        }
    }
    Ok(Word(word::reduce(graph, &out)))
}

/// True when `images` maps every generator of `graph` back to itself.
fn composes_to_identity(graph: &DefiningGraph, images: &[Word], other: &[Word]) -> Result<bool> {
    for v in 0..graph.vertex_count() {
        let other_image = apply_images(graph, images, &other[v])?;
        if other_image.letters() != [Letter::positive(v)] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Finds, for each generator, the ShortLex-first word the map sends to
/// that generator, searching reduced words up to length `max_len`.
fn search_inverse(
    graph: &DefiningGraph,
    images: &[Word],
    max_len: usize,
) -> Result<Option<Vec<Word>>> {
    let rank = graph.vertex_count();
    let mut found: Vec<Option<Word>> = vec![None; rank];
    let mut frontier: Vec<Word> = vec![Word::identity()];
    let mut budget = INVERSE_SEARCH_BUDGET;
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for vertex in 0..rank {
                for sign in [Sign::Plus, Sign::Minus] {
                    let l = Letter::new(vertex, sign);
                    if w.letters().last() == Some(&l.inverse()) {
                        continue;
                    }
                    budget = budget.checked_sub(1).ok_or_else(|| Error::ResourceLimit {
                        detail: "inverse search candidate budget exhausted".into(),
                    })?;
                    let mut letters = w.letters().to_vec();
                    letters.push(l);
                    let cand = Word(letters);
                    let image = apply_images(graph, images, &cand)?;
                    if image.len() == 1 {
                        let target = image.letters()[0];
                        if target.sign == Sign::Plus && found[target.vertex].is_none() {
                            found[target.vertex] = Some(cand.clone());
                        }
                    }
                    next.push(cand);
                }
            }
        }
        if found.iter().all(|f| f.is_some()) {
            return Ok(Some(found.into_iter().map(|f| f.unwrap()).collect()));
        }
        frontier = next;
    }
    Ok(None)
}

impl FreeAutomorphism {
    fn assemble(
        graph: Arc<DefiningGraph>,
        images: Vec<Word>,
        inverse_images: Vec<Word>,
    ) -> Result<Self> {
        let rank = graph.vertex_count();
        if images.len() != rank || inverse_images.len() != rank {
            return Err(Error::precondition(
                "free_automorphism",
                format!("expected {rank} images, got {} and {} inverses", images.len(), inverse_images.len()),
            ));
        }
        for w in images.iter().chain(inverse_images.iter()) {
            word::check_letters(&graph, w.letters())?;
        }
        let images: Vec<Word> = images.iter().map(|w| Word(word::reduce(&graph, w.letters()))).collect();
        let inverse_images: Vec<Word> =
            inverse_images.iter().map(|w| Word(word::reduce(&graph, w.letters()))).collect();
        if !composes_to_identity(&graph, &images, &inverse_images)?
            || !composes_to_identity(&graph, &inverse_images, &images)?
        {
            return Err(Error::precondition(
                "free_automorphism",
                "supplied inverse does not invert the map",
            ));
        }
        Ok(FreeAutomorphism { graph, images, inverse_images, name: None })
    }

    /// Builds the map from image words, verifying the supplied inverse.
    pub fn with_inverse(
        rank: usize,
        image_texts: &[&str],
        inverse_texts: &[&str],
    ) -> Result<Self> {
        let names = free_names(rank)?;
        let graph = DefiningGraph::free(&names)?;
        let images = image_texts
            .iter()
            .map(|t| Word::parse(&graph, t))
            .collect::<Result<Vec<_>>>()?;
        let inverse_images = inverse_texts
            .iter()
            .map(|t| Word::parse(&graph, t))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(graph, images, inverse_images)
    }

    /// Builds the map from image words alone, finding an inverse by
    /// bounded search over image lengths up to `search_limit`.
    pub fn from_images_searched(
        rank: usize,
        image_texts: &[&str],
        search_limit: usize,
    ) -> Result<Self> {
        let names = free_names(rank)?;
        let graph = DefiningGraph::free(&names)?;
        let images = image_texts
            .iter()
            .map(|t| Word::parse(&graph, t))
            .collect::<Result<Vec<_>>>()?;
        if images.len() != rank {
            return Err(Error::precondition(
                "free_automorphism",
                format!("expected {rank} images, got {}", images.len()),
            ));
        }
        let inverse_images = search_inverse(&graph, &images, search_limit)?.ok_or_else(|| {
            Error::precondition(
                "free_automorphism",
                format!("no inverse found with image length <= {search_limit}; the map may not be invertible"),
            )
        })?;
        Self::assemble(graph, images, inverse_images)
    }

    /// Builds the map from image words with the default search depth.
    pub fn from_images(rank: usize, image_texts: &[&str]) -> Result<Self> {
        Self::from_images_searched(rank, image_texts, INVERSE_SEARCH_LIMIT)
    }

    /// The punctured-torus bundle monodromy a ↦ ab, b ↦ bab, whose
    /// mapping torus is the figure-eight knot group.
    pub fn figure_eight() -> Self {
        FreeAutomorphism::with_inverse(2, &["a b", "b a b"], &["a a b^-1", "b a^-1"])
            .expect("the monodromy preset is invertible")
            .with_name("figure8")
    }

    /// Attaches a display name, as carried by preset files.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.graph.vertex_count()
    }

    /// The edgeless defining graph whose words this map acts on.
    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[Word] {
        &self.inverse_images
    }

    /// Applies the map once and freely reduces.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        apply_images(&self.graph, &self.images, w)
    }

    /// The inverse automorphism; its inverse is this map again.
    pub fn inverse(&self) -> Self {
        FreeAutomorphism {
            graph: self.graph.clone(),
            images: self.inverse_images.clone(),
            inverse_images: self.images.clone(),
            name: None,
        }
    }

    /// The composition self ∘ other; inverses compose in reverse order.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(Error::GraphMismatch);
        }
        let images = other
            .images
            .iter()
            .map(|w| apply_images(&self.graph, &self.images, w))
            .collect::<Result<Vec<_>>>()?;
        let inverse_images = self
            .inverse_images
            .iter()
            .map(|w| apply_images(&self.graph, &other.inverse_images, w))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(self.graph.clone(), images, inverse_images)
    }

    /// True when every image letter is positive, so substitution into a
    /// positive word can never cancel.
    pub fn is_positive(&self) -> bool {
        self.images.iter().all(|w| w.letters().iter().all(|l| l.sign == Sign::Plus))
    }

    /// Serializes as `{"rank", "images", "inverse", "name"?}`.
    pub fn to_json(&self) -> serde_json::Value {
        let texts: Vec<String> = self.images.iter().map(|w| w.to_text(&self.graph)).collect();
        let inverse: Vec<String> =
            self.inverse_images.iter().map(|w| w.to_text(&self.graph)).collect();
        let mut value = serde_json::json!({
            "rank": self.rank(),
            "images": texts,
            "inverse": inverse,
        });
        if let Some(name) = &self.name {
            value["name"] = serde_json::Value::String(name.clone());
        }
        value
    }

    /// Reads a preset object; a missing `"inverse"` field triggers the
    /// bounded inverse search.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse { detail: format!("automorphism JSON: {e}") })?;
        let field_err =
            |field: &str| Error::Parse { detail: format!("automorphism JSON is missing `{field}`") };
        let rank = value
            .get("rank")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| field_err("rank"))? as usize;
        let image_values = value
            .get("images")
            .and_then(|v| v.as_array())
            .ok_or_else(|| field_err("images"))?;
        let images: Vec<String> = image_values
            .iter()
            .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| field_err("images")))
            .collect::<Result<Vec<_>>>()?;
        let image_refs: Vec<&str> = images.iter().map(String::as_str).collect();
        let aut = match value.get("inverse").and_then(|v| v.as_array()) {
            Some(inverse_values) => {
                let inverse: Vec<String> = inverse_values
                    .iter()
                    .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| field_err("inverse")))
                    .collect::<Result<Vec<_>>>()?;
                let inverse_refs: Vec<&str> = inverse.iter().map(String::as_str).collect();
                FreeAutomorphism::with_inverse(rank, &image_refs, &inverse_refs)?
            }
            None => FreeAutomorphism::from_images(rank, &image_refs)?,
        };
        Ok(match value.get("name").and_then(|v| v.as_str()) {
            Some(name) => aut.with_name(name),
            None => aut,
        })
    }
}

/// One sampled exponent: tⁿ a t⁻ⁿ has length `2n+1` in the mapping
/// torus and length `fiber_length` inside the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistortionSample {
    pub n: u64,
    pub outer_length: u64,
    pub fiber_length: u128,
}

impl DistortionSample {
    /// Serializes the fiber length as a string since it can exceed the
    /// integer range JSON numbers preserve.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "outer_length": self.outer_length,
            "fiber_length": self.fiber_length.to_string(),
        })
    }
}

/// Applies the map to `w` exactly `n` times, materializing each word.
pub fn apply_power(aut: &FreeAutomorphism, w: &Word, n: u64) -> Result<Word> {
    word::check_letters(aut.graph(), w.letters())?;
    let mut cur = Word(word::reduce(aut.graph(), w.letters()));
    for _ in 0..n {
        cur = aut.apply(&cur)?;
    }
    Ok(cur)
}

/// Per-generator occurrence counts of a positive word.
fn positive_counts(seed: &Word, rank: usize) -> Vec<u128> {
    let mut counts = vec![0u128; rank];
    for l in seed.letters() {
        counts[l.vertex] += 1;
    }
    counts
}

/// One substitution step on occurrence counts.  Valid only for positive
/// images acting on positive words, where no cancellation can occur.
fn positive_counts_step(aut: &FreeAutomorphism, counts: &[u128]) -> Result<Vec<u128>> {
    let overflow =
        || Error::ResourceLimit { detail: "fiber letter count exceeds u128".into() };
    let mut next = vec![0u128; counts.len()];
    for (vertex, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        for l in aut.images()[vertex].letters() {
            next[l.vertex] = next[l.vertex].checked_add(count).ok_or_else(overflow)?;
        }
    }
    Ok(next)
}

fn counts_total(counts: &[u128]) -> Result<u128> {
    counts.iter().try_fold(0u128, |acc, &c| {
        acc.checked_add(c)
            .ok_or_else(|| Error::ResourceLimit { detail: "fiber length exceeds u128".into() })
    })
}

/// Shared engine: samples fiber lengths of φ^(stride·k)(seed) for
/// k = 0..=n_max.  Positive maps on positive seeds never cancel, so
/// their lengths follow the exact occurrence-count recurrence and no
/// word is materialized; all other inputs are materialized under the
/// letter budget.
fn sample_sequence(
    aut: &FreeAutomorphism,
    seed: &Word,
    n_max: u64,
    stride: u64,
) -> Result<Vec<DistortionSample>> {
    word::check_letters(aut.graph(), seed.letters())?;
    let seed = Word(word::reduce(aut.graph(), seed.letters()));
    if seed.is_empty() {
        return Err(Error::precondition("distortion_sequence", "seed word is trivial"));
    }
    let sample = |k: u64, fiber: u128| -> Result<DistortionSample> {
        let n = k.checked_mul(stride).and_then(|n| n.checked_mul(2).map(|d| (n, d)));
        let (n, doubled) = n.ok_or_else(|| Error::ResourceLimit {
            detail: "sample exponent exceeds u64".into(),
        })?;
        Ok(DistortionSample { n, outer_length: doubled + 1, fiber_length: fiber })
    };
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let positive =
        aut.is_positive() && seed.letters().iter().all(|l| l.sign == Sign::Plus);
    if positive {
        let mut counts = positive_counts(&seed, aut.rank());
        for k in 0..=n_max {
            out.push(sample(k, counts_total(&counts)?)?);
            if k < n_max {
                for _ in 0..stride {
                    counts = positive_counts_step(aut, &counts)?;
                }
            }
        }
    } else {
        let mut w = seed;
        for k in 0..=n_max {
            out.push(sample(k, w.len() as u128)?);
            if k < n_max {
                for _ in 0..stride {
                    w = aut.apply(&w)?;
                }
            }
        }
    }
    Ok(out)
}

/// Samples fiber lengths of φⁿ(seed) for n = 0..=n_max.
pub fn distortion_sequence(
    aut: &FreeAutomorphism,
    seed: &Word,
    n_max: u64,
) -> Result<Vec<DistortionSample>> {
    sample_sequence(aut, seed, n_max, 1)
}

/// Samples only the exponents divisible by `index`: a subgroup
/// containing tᵐ instead of t still sees the conjugates t^{mk} a t^{-mk},
/// so its distortion is witnessed along the strided subsequence.
pub fn finite_index_sequence(
    aut: &FreeAutomorphism,
    seed: &Word,
    index: u64,
    n_max: u64,
) -> Result<Vec<DistortionSample>> {
    if index == 0 {
        return Err(Error::precondition("finite_index_sequence", "index must be positive"));
    }
    sample_sequence(aut, seed, n_max, index)
}

/// Outcome of the logarithmic-bound check over a sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonembedVerdict {
    /// Every sample satisfied the bound.  Evidence over the sampled
    /// range only; the obstruction itself needs the bound for all n.
    NonembeddableEvidence,
    /// Some sample violated the bound; no obstruction is exhibited.
    NotEstablished { failing_n: u64 },
}

impl fmt::Display for NonembedVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonembedVerdict::NonembeddableEvidence => {
                write!(f, "nonembeddable-evidence (sampled range only, not a proof)")
            }
            NonembedVerdict::NotEstablished { failing_n } => {
                write!(f, "not-established (bound fails at n = {failing_n})")
            }
        }
    }
}

/// Result of [`check_nonembeddable`] with the measured growth exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct NonembedReport {
    pub verdict: NonembedVerdict,
    /// Samples with fiber length at least 2, the ones the bound tests.
    pub samples_checked: usize,
    pub max_n: u64,
    /// Smallest log₂(fiber_length)/n over the checked samples; at least
    /// 1 exactly when every checked sample passes.
    pub growth_exponent: f64,
}

impl NonembedReport {
    pub fn to_json(&self) -> serde_json::Value {
        let (verdict, failing): (&str, serde_json::Value) = match self.verdict {
            NonembedVerdict::NonembeddableEvidence => {
                ("nonembeddable-evidence", serde_json::Value::Null)
            }
            NonembedVerdict::NotEstablished { failing_n } => {
                ("not-established", serde_json::json!(failing_n))
            }
        };
        serde_json::json!({
            "verdict": verdict,
            "failing_n": failing,
            "samples_checked": self.samples_checked,
            "max_n": self.max_n,
            "growth_exponent": self.growth_exponent,
        })
    }
}

/// Checks outer_length ≤ 2·log₂(fiber_length) + 1 on every sample with
/// fiber_length ≥ 2.  With outer_length = 2n+1 this is the exact
/// integer condition 2ⁿ ≤ fiber_length.  Exponential fiber growth makes
/// the ambient length logarithmic in the fiber length, which is the
/// distortion no undistorted free subgroup can show.
pub fn check_nonembeddable(samples: &[DistortionSample]) -> Result<NonembedReport> {
    if samples.len() < 3 {
        return Err(Error::precondition(
            "check_nonembeddable",
            format!("need at least 3 samples, got {}", samples.len()),
        ));
    }
    for s in samples {
        if s.fiber_length == 0 || s.outer_length != 2 * s.n + 1 {
            return Err(Error::precondition(
                "check_nonembeddable",
                format!("sample at n = {} violates the sample invariants", s.n),
            ));
        }
    }
    let mut failing = None;
    let mut checked = 0usize;
    let mut exponent = f64::INFINITY;
    for s in samples {
        if s.fiber_length < 2 {
            continue;
        }
        checked += 1;
        let passes = s.n < 128 && (1u128 << s.n) <= s.fiber_length;
        if !passes && failing.is_none() {
            failing = Some(s.n);
        }
        if s.n >= 1 {
            exponent = exponent.min((s.fiber_length as f64).log2() / s.n as f64);
        }
    }
    if checked == 0 {
        return Err(Error::precondition(
            "check_nonembeddable",
            "every sample has fiber length below 2; nothing to check",
        ));
    }
    let verdict = match failing {
        None => NonembedVerdict::NonembeddableEvidence,
        Some(failing_n) => NonembedVerdict::NotEstablished { failing_n },
    };
    Ok(NonembedReport {
        verdict,
        samples_checked: checked,
        max_n: samples.iter().map(|s| s.n).max().unwrap_or(0),
        growth_exponent: exponent,
    })
}
