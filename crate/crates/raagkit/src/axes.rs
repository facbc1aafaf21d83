//! Cyclic reduction, translation lengths, minimal-displacement basepoints,
//! and the standard-form decomposition of a group element into a conjugator
//! leg, a core segment on an axis, and the translated conjugator leg.
//!
//! The standard form of w is validated on construction: the concatenated
//! path 1 → a → w·a → w must be geodesic (so 2|𝐚| + |𝐰| = |w|) and must
//! cross pairwise-distinct walls. A failure of either check is an internal
//! error, never a caller error.

use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::geometry;
use crate::word::{Letter, Sign, Word};

/// Factorization w = conjugator · core · conjugator⁻¹ with the core
/// cyclically reduced: no one-letter conjugation shortens it, equivalently
/// |core²| = 2|core|.
#[derive(Debug, Clone)]
pub struct CyclicDecomposition {
    conjugator: GroupElement,
    core: GroupElement,
}

impl CyclicDecomposition {
    pub fn conjugator(&self) -> &GroupElement {
        &self.conjugator
    }

    pub fn core(&self) -> &GroupElement {
        &self.core
    }

    /// Reassembles the original element conjugator · core · conjugator⁻¹.
    pub fn element(&self) -> GroupElement {
        self.conjugator
            .mul(&self.core)
            .and_then(|g| g.mul(&self.conjugator.inverse()))
            .expect("decomposition parts share one graph")
    }
}

/// Strips conjugating letters from w until the remaining core is cyclically
/// reduced. Letters are tried in vertex order, positive sign first, so the
/// decomposition is deterministic.
pub fn cyclically_reduce(w: &GroupElement) -> CyclicDecomposition {
    let graph = w.graph().clone();
    let mut conjugator = GroupElement::identity(&graph);
    let mut core = w.clone();
    'strip: while core.len() >= 2 {
        for vertex in 0..graph.vertex_count() {
            for sign in [Sign::Plus, Sign::Minus] {
                let step = GroupElement::from_letters(&graph, &[Letter::new(vertex, sign)])
                    .expect("vertex index in range");
                let stripped = step
                    .inverse()
                    .mul(&core)
                    .and_then(|g| g.mul(&step))
                    .expect("same graph");
                if stripped.len() + 2 == core.len() {
                    conjugator = conjugator.mul(&step).expect("same graph");
                    core = stripped;
                    continue 'strip;
                }
            }
        }
        break;
    }
    let squared = core.mul(&core).expect("same graph");
    debug_assert_eq!(squared.len(), 2 * core.len());
    CyclicDecomposition { conjugator, core }
}

/// Length of the cyclically reduced core: the minimal displacement
/// d(x, w·x) over all vertices, and 0 exactly for the identity.
pub fn translation_length(w: &GroupElement) -> usize {
    cyclically_reduce(w).core().len()
}

/// The vertex a_w closest to 1 among those realizing the minimal
/// displacement ℓ(w). Starts from the cyclic-reduction conjugator and
/// descends toward 1 one letter at a time; ties break ShortLex.
pub fn min_displacement_vertex(w: &GroupElement) -> Result<GroupElement> {
    if w.is_identity() {
        return Err(Error::IdentityInput { op: "min_displacement_vertex" });
    }
    let graph = w.graph().clone();
    let ell = translation_length(w);
    let mut a = cyclically_reduce(w).conjugator().clone();
    loop {
        let mut best: Option<GroupElement> = None;
        for vertex in 0..graph.vertex_count() {
            for sign in [Sign::Plus, Sign::Minus] {
                let step = GroupElement::from_letters(&graph, &[Letter::new(vertex, sign)])?;
                let candidate = a.mul(&step)?;
                if candidate.len() + 1 != a.len() {
                    continue;
                }
                let displaced = candidate.inverse().mul(w)?.mul(&candidate)?;
                if displaced.len() != ell {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => candidate.word().shortlex_cmp(b.word()).is_lt(),
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        match best {
            Some(b) => a = b,
            None => return Ok(a),
        }
    }
}

/// The standard form of w: the geodesic 𝐚 from 1 to the axis vertex a_w,
/// the core segment 𝐰 from a_w to w·a_w, and (implicitly) the translated
/// leg w𝐚 back to w.
#[derive(Debug, Clone)]
pub struct StandardForm {
    basepoint_path: Word,
    axis_vertex: GroupElement,
    axis_segment: Word,
}

impl StandardForm {
    /// The geodesic word 𝐚 from 1 to the axis vertex.
    pub fn basepoint_path(&self) -> &Word {
        &self.basepoint_path
    }

    /// The vertex a_w where the decomposition meets an axis of w.
    pub fn axis_vertex(&self) -> &GroupElement {
        &self.axis_vertex
    }

    /// The core segment 𝐰 from a_w to w·a_w; its translates tile the axis.
    pub fn axis_segment(&self) -> &Word {
        &self.axis_segment
    }

    pub fn translation_length(&self) -> usize {
        self.axis_segment.len()
    }

    /// Reconstructs w = a · core · a⁻¹.
    pub fn element(&self) -> GroupElement {
        let graph = self.axis_vertex.graph();
        let core = GroupElement::from_letters(graph, self.axis_segment.letters())
            .expect("validated on construction");
        self.axis_vertex
            .mul(&core)
            .and_then(|g| g.mul(&self.axis_vertex.inverse()))
            .expect("same graph")
    }

    /// The axis vertex translated i steps: wⁱ · a_w.
    pub fn axis_point(&self, i: i64) -> GroupElement {
        self.element()
            .pow(i)
            .mul(&self.axis_vertex)
            .expect("same graph")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let graph = self.axis_vertex.graph();
        serde_json::json!({
            "a": self.basepoint_path.to_text(graph),
            "w_core": self.axis_segment.to_text(graph),
        })
    }
}

/// Builds and validates the standard form of w ≠ 1.
pub fn standard_form(w: &GroupElement) -> Result<StandardForm> {
    if w.is_identity() {
        return Err(Error::IdentityInput { op: "standard_form" });
    }
    let graph = w.graph().clone();
    let a = min_displacement_vertex(w)?;
    let core = a.inverse().mul(w)?.mul(&a)?;
    if 2 * a.len() + core.len() != w.len() {
        return Err(Error::internal(format!(
            "standard form of {} is not geodesic: 2*{} + {} != {}",
            w.to_text(),
            a.len(),
            core.len(),
            w.len()
        )));
    }

    // The full path 1 → a → w·a → w, with the last leg traversing 𝐚 backwards.
    let mut full = a.letters().to_vec();
    full.extend_from_slice(core.letters());
    full.extend_from_slice(a.word().inverse().letters());
    if !crate::word::is_reduced(&graph, &full) {
        return Err(Error::internal(
            "standard form concatenation is not reduced".to_owned(),
        ));
    }
    let records = geometry::crossing_sequence(&GroupElement::identity(&graph), &Word(full))?;
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            if records[i].hyperplane == records[j].hyperplane {
                return Err(Error::internal(format!(
                    "standard form of {} crosses wall {} twice",
                    w.to_text(),
                    records[i].hyperplane
                )));
            }
        }
    }

    Ok(StandardForm {
        basepoint_path: a.word().clone(),
        axis_vertex: a,
        axis_segment: core.word().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DefiningGraph;
    use crate::oracle::build_ball;

    fn pentagon() -> std::sync::Arc<DefiningGraph> {
        DefiningGraph::cycle(&["v1", "v2", "v3", "v4", "v5"]).unwrap()
    }

    fn elt(graph: &std::sync::Arc<DefiningGraph>, text: &str) -> GroupElement {
        GroupElement::parse(graph, text).unwrap()
    }

    #[test]
    fn cyclic_reduction_strips_conjugating_letters() {
        let free = DefiningGraph::free(&["a", "b"]).unwrap();
        let d = cyclically_reduce(&elt(&free, "a b a^-1"));
        assert_eq!(d.conjugator().to_text(), "a");
        assert_eq!(d.core().to_text(), "b");
        assert_eq!(d.element(), elt(&free, "a b a^-1"));

        let reduced = elt(&free, "a b");
        let d = cyclically_reduce(&reduced);
        assert!(d.conjugator().is_identity());
        assert_eq!(d.core(), &reduced);

        let graph = pentagon();
        let d = cyclically_reduce(&elt(&graph, "v5 v1 v3 v5^-1"));
        assert_eq!(d.conjugator().to_text(), "v5");
        assert_eq!(d.core().to_text(), "v1 v3");
        let squared = d.core().mul(d.core()).unwrap();
        assert_eq!(squared.len(), 4);
        assert_eq!(d.element(), elt(&graph, "v5 v1 v3 v5^-1"));
    }

    #[test]
    fn translation_lengths_match_power_growth() {
        let graph = pentagon();
        assert_eq!(translation_length(&GroupElement::identity(&graph)), 0);

        let square = DefiningGraph::complete(&["a", "b"]).unwrap();
        let w = elt(&square, "a b");
        assert_eq!(translation_length(&w), 2);
        assert_eq!(w.pow(5).len(), 10);

        let w = elt(&graph, "v1 v3");
        assert_eq!(translation_length(&w), 2);
        for n in 1..=6 {
            assert_eq!(w.pow(n).len(), 2 * n as usize);
        }
        // Conjugating does not change the translation length.
        let conj = elt(&graph, "v2 v4^-1");
        let g = conj.mul(&w).unwrap().mul(&conj.inverse()).unwrap();
        assert_eq!(translation_length(&g), 2);
    }

    #[test]
    fn min_displacement_vertex_matches_exhaustive_search() {
        let graph = pentagon();
        let w = elt(&graph, "v5 v1 v3 v5^-1");
        let a = min_displacement_vertex(&w).unwrap();
        assert_eq!(a.to_text(), "v5");

        // Referee: scan every |g| <= 2 for displacement; nothing shorter than
        // |a| = 1 may reach the minimum, and the minimum must equal l(w).
        let ball = build_ball(&graph, 2).unwrap();
        let ell = translation_length(&w);
        let mut seen_min = usize::MAX;
        for id in 0..ball.vertex_count() {
            let g = ball.element_at(id);
            let displaced = g.inverse().mul(&w).unwrap().mul(&g).unwrap().len();
            seen_min = seen_min.min(displaced);
            if g.is_identity() {
                assert!(displaced > ell, "w should not be cyclically reduced here");
            }
        }
        assert_eq!(seen_min, ell);

        let reduced = elt(&graph, "v1 v3");
        assert!(min_displacement_vertex(&reduced).unwrap().is_identity());

        let free = DefiningGraph::free(&["a", "b"]).unwrap();
        assert_eq!(
            min_displacement_vertex(&elt(&free, "a b a^-1")).unwrap().to_text(),
            "a"
        );

        assert!(matches!(
            min_displacement_vertex(&GroupElement::identity(&graph)),
            Err(Error::IdentityInput { .. })
        ));
    }

    #[test]
    fn standard_form_decomposes_geodesically() {
        let free = DefiningGraph::free(&["a", "b"]).unwrap();
        let form = standard_form(&elt(&free, "a b a^-1")).unwrap();
        assert_eq!(form.basepoint_path().to_text(&free), "a");
        assert_eq!(form.axis_segment().to_text(&free), "b");
        assert_eq!(form.translation_length(), 1);
        assert_eq!(form.element(), elt(&free, "a b a^-1"));

        let graph = pentagon();
        let w = elt(&graph, "v1 v3");
        let form = standard_form(&w).unwrap();
        assert!(form.basepoint_path().is_empty());
        assert_eq!(form.axis_segment().to_text(&graph), "v1 v3");
        assert_eq!(form.axis_point(2), w.pow(2));
        assert_eq!(form.axis_point(-1), w.pow(-1));

        assert!(matches!(
            standard_form(&GroupElement::identity(&graph)),
            Err(Error::IdentityInput { .. })
        ));
    }

    #[test]
    fn standard_form_length_identity_on_random_elements() {
        // Deterministic pseudo-random sweep across graph families.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let graphs = [
            DefiningGraph::complete(&["a", "b"]).unwrap(),
            DefiningGraph::path(&["a", "b", "c"]).unwrap(),
            pentagon(),
            DefiningGraph::free(&["a", "b"]).unwrap(),
        ];
        for graph in &graphs {
            for _ in 0..200 {
                let len = rng.gen_range(1..12);
                let letters: Vec<Letter> = (0..len)
                    .map(|_| {
                        Letter::new(
                            rng.gen_range(0..graph.vertex_count()),
                            if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus },
                        )
                    })
                    .collect();
                let w = GroupElement::from_letters(graph, &letters).unwrap();
                if w.is_identity() {
                    continue;
                }
                let form = standard_form(&w).unwrap();
                assert_eq!(
                    2 * form.basepoint_path().len() + form.axis_segment().len(),
                    w.len()
                );
                assert_eq!(
                    translation_length(&w.pow(4)),
                    4 * form.translation_length()
                );
            }
        }
    }
}
