//! Symbolic hyperplanes (walls) of the universal cover of the Salvetti
//! complex.
//!
//! A wall is determined by its type s (the generator whose edges it is dual
//! to) and the coset base·⟨lk(s)⟩ of vertices on its near side; the stored
//! base is the unique shortest (hence ShortLex-least) vertex of that coset.
//! Every predicate reduces to word calculus: parabolic support tests for
//! equality and stabilizers, a greedy double-coset factorization for
//! crossings, and crossing parity along geodesics for separation. The axis
//! test walks one core segment plus one connecting segment per ray, which
//! decides membership exactly; no search window is involved.

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::axes::{self, StandardForm};
use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::graph::DefiningGraph;
use crate::word::{self, Letter, Sign, Word};

/// Relation between the projections of two walls in the Salvetti complex:
/// transverse types are `Perp`, disjoint-or-identical types are `Parallel`.
/// `Perp` does not imply that the walls actually intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallRelation {
    Perp,
    Parallel,
}

/// A wall of the universal cover, identified by type and near-side coset.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    vertex: usize,
    base: GroupElement,
}

impl Hyperplane {
    /// Builds the wall dual to the edge [base, base·s]; the stored base is
    /// canonicalized to the shortest vertex of base·⟨lk(s)⟩.
    pub fn new(base: &GroupElement, vertex: usize) -> Result<Hyperplane> {
        let graph = base.graph().clone();
        if vertex >= graph.vertex_count() {
            return Err(Error::LetterOutOfRange { index: vertex, vertex_count: graph.vertex_count() });
        }
        let link = graph.link_mask(vertex);
        let (residue, _suffix) = extract_suffix(&graph, base.letters(), link);
        let base = GroupElement::from_letters(&graph, &residue)?;
        Ok(Hyperplane { vertex, base })
    }

    pub fn parse(graph: &std::sync::Arc<DefiningGraph>, base_text: &str, type_name: &str) -> Result<Hyperplane> {
        let vertex = graph.vertex_index(type_name).ok_or_else(|| Error::UnknownGenerator {
            token: type_name.to_owned(),
            position: 0,
        })?;
        Hyperplane::new(&GroupElement::parse(graph, base_text)?, vertex)
    }

    pub fn graph(&self) -> &std::sync::Arc<DefiningGraph> {
        self.base.graph()
    }

    /// The wall's type: index of the generator whose edges it crosses.
    pub fn vertex(&self) -> usize {
        self.vertex
    }

    pub fn vertex_name(&self) -> &str {
        self.graph().vertex_name(self.vertex)
    }

    /// Canonical near-side vertex of the wall.
    pub fn base(&self) -> &GroupElement {
        &self.base
    }

    /// The canonical dual edge (base, base·s).
    pub fn dual_edge(&self) -> (GroupElement, GroupElement) {
        let step = GroupElement::from_letters(self.graph(), &[Letter::positive(self.vertex)])
            .expect("vertex in range");
        let far = self.base.mul(&step).expect("same graph");
        (self.base.clone(), far)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "type": self.vertex_name(),
            "base": self.base.to_text(),
        })
    }

    pub fn from_json(graph: &std::sync::Arc<DefiningGraph>, value: &serde_json::Value) -> Result<Hyperplane> {
        let type_name = value
            .get("type")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Parse { detail: "hyperplane JSON needs a string `type`".into() })?;
        let base_text = value
            .get("base")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Parse { detail: "hyperplane JSON needs a string `base`".into() })?;
        Hyperplane::parse(graph, base_text, type_name)
    }
}

impl PartialEq for Hyperplane {
    fn eq(&self, other: &Self) -> bool {
        self.vertex == other.vertex && self.base == other.base
    }
}

impl Eq for Hyperplane {}

impl Hash for Hyperplane {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vertex.hash(state);
        self.base.word().hash(state);
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H({}, {})", self.base.to_text(), self.vertex_name())
    }
}

/// One wall crossing of a geodesic, at the edge starting after `position`
/// letters.
#[derive(Debug, Clone)]
pub struct CrossingRecord {
    pub position: usize,
    pub hyperplane: Hyperplane,
}

/// Greedily splits a reduced word as prefix · residue, where the prefix is
/// a maximal subword supported in `mask` whose letters can all commute to
/// the front. Maximality makes the residue length the distance from the
/// word to the parabolic coset ⟨mask⟩, and the prefix the gate.
pub(crate) fn extract_prefix(
    graph: &DefiningGraph,
    letters: &[Letter],
    mask: u64,
) -> (Vec<Letter>, Vec<Letter>) {
    let mut residue: Vec<Letter> = letters.to_vec();
    let mut prefix = Vec::new();
    loop {
        let mut pick = None;
        'scan: for (i, l) in residue.iter().enumerate() {
            if (1u64 << l.vertex) & mask == 0 {
                continue;
            }
            for earlier in &residue[..i] {
                if earlier.vertex == l.vertex || !graph.adjacent(earlier.vertex, l.vertex) {
                    continue 'scan;
                }
            }
            pick = Some(i);
            break;
        }
        match pick {
            Some(i) => prefix.push(residue.remove(i)),
            None => break,
        }
    }
    (prefix, residue)
}

/// Mirror of [`extract_prefix`]: splits as residue · suffix with the suffix
/// maximal in `mask`. Movability to the back in the original order is
/// movability to the front in reversed order.
pub(crate) fn extract_suffix(
    graph: &DefiningGraph,
    letters: &[Letter],
    mask: u64,
) -> (Vec<Letter>, Vec<Letter>) {
    let reversed: Vec<Letter> = letters.iter().rev().copied().collect();
    let (p, r) = extract_prefix(graph, &reversed, mask);
    let suffix: Vec<Letter> = p.into_iter().rev().collect();
    let residue: Vec<Letter> = r.into_iter().rev().collect();
    (residue, suffix)
}

fn single(graph: &std::sync::Arc<DefiningGraph>, l: Letter) -> Result<GroupElement> {
    GroupElement::from_letters(graph, &[l])
}

fn ensure_same_graph(g1: &DefiningGraph, g2: &DefiningGraph) -> Result<()> {
    if g1.same_graph(g2) {
        Ok(())
    } else {
        Err(Error::GraphMismatch)
    }
}

/// The wall dual to the edge from g to g·s. For a negative letter this is
/// the wall dual to [g·s, g], the same unoriented wall.
pub fn hyperplane_of_edge(g: &GroupElement, s: Letter) -> Result<Hyperplane> {
    let graph = g.graph().clone();
    if s.vertex >= graph.vertex_count() {
        return Err(Error::LetterOutOfRange { index: s.vertex, vertex_count: graph.vertex_count() });
    }
    let anchor = match s.sign {
        Sign::Plus => g.clone(),
        Sign::Minus => g.mul(&single(&graph, s)?)?,
    };
    Hyperplane::new(&anchor, s.vertex)
}

pub fn hyperplanes_equal(h1: &Hyperplane, h2: &Hyperplane) -> Result<bool> {
    ensure_same_graph(h1.graph(), h2.graph())?;
    Ok(h1 == h2)
}

/// The image g·h of a wall under the isometry g; preserves type.
pub fn translate(g: &GroupElement, h: &Hyperplane) -> Result<Hyperplane> {
    Hyperplane::new(&g.mul(h.base())?, h.vertex())
}

/// True iff g·h = h, decided by base⁻¹·g·base ∈ ⟨lk(type)⟩.
pub fn stabilizes(g: &GroupElement, h: &Hyperplane) -> Result<bool> {
    ensure_same_graph(g.graph(), h.graph())?;
    let graph = g.graph();
    let offset = h.base().inverse().mul(g)?.mul(h.base())?;
    Ok(graph.mask_within(offset.support_mask(), graph.link_mask(h.vertex())))
}

/// Walls crossed by the geodesic spelled by `geodesic` starting at `base`,
/// in crossing order. All records are pairwise distinct because a geodesic
/// crosses no wall twice.
pub fn crossing_sequence(base: &GroupElement, geodesic: &Word) -> Result<Vec<CrossingRecord>> {
    let graph = base.graph().clone();
    word::check_letters(&graph, geodesic.letters())?;
    if !word::is_reduced(&graph, geodesic.letters()) {
        return Err(Error::precondition("crossing_sequence", "word is not geodesic"));
    }
    let mut current = base.clone();
    let mut records = Vec::with_capacity(geodesic.len());
    for (position, &l) in geodesic.letters().iter().enumerate() {
        records.push(CrossingRecord { position, hyperplane: hyperplane_of_edge(&current, l)? });
        current = current.mul(&single(&graph, l)?)?;
    }
    Ok(records)
}

/// Number of times the geodesic spelled by `geodesic` from `start` crosses
/// the wall h. Runs one incremental parabolic support test per letter
/// instead of canonicalizing a wall per edge.
pub fn crossings_with(h: &Hyperplane, start: &GroupElement, geodesic: &Word) -> Result<usize> {
    ensure_same_graph(h.graph(), start.graph())?;
    let graph = start.graph().clone();
    word::check_letters(&graph, geodesic.letters())?;
    if !word::is_reduced(&graph, geodesic.letters()) {
        return Err(Error::precondition("crossings_with", "word is not geodesic"));
    }
    let s = h.vertex();
    let link = graph.link_mask(s);
    let support = |letters: &[Letter]| letters.iter().fold(0u64, |m, l| m | (1 << l.vertex));
    let mut rel = h.base().inverse().mul(start)?.letters().to_vec();
    let mut count = 0;
    for &l in geodesic.letters() {
        let candidate = l.vertex == s;
        let before =
            candidate && l.sign == Sign::Plus && graph.mask_within(support(&rel), link);
        rel.push(l);
        rel = word::reduce(&graph, &rel);
        let hit = if !candidate {
            false
        } else if l.sign == Sign::Plus {
            before
        } else {
            graph.mask_within(support(&rel), link)
        };
        if hit {
            count += 1;
        }
    }
    Ok(count)
}

/// True iff p and q lie on opposite sides of h: crossing parity along any
/// path between them, computed on a geodesic.
pub fn separates(h: &Hyperplane, p: &GroupElement, q: &GroupElement) -> Result<bool> {
    ensure_same_graph(p.graph(), q.graph())?;
    let diff = p.inverse().mul(q)?;
    Ok(crossings_with(h, p, diff.word())? % 2 == 1)
}

fn double_coset_masks(graph: &DefiningGraph, letters: &[Letter], left: u64, right: u64) -> bool {
    let (_, residue) = extract_prefix(graph, letters, left);
    let residue_support = residue.iter().fold(0u64, |m, l| m | (1 << l.vertex));
    graph.mask_within(residue_support, right)
}

/// Greedy membership test for g ∈ ⟨left⟩·⟨right⟩, the product of the two
/// parabolic subgroups on the given vertex sets. Extracts a maximal
/// front-movable ⟨left⟩-prefix; the factorization exists iff the residue is
/// supported in `right`.
pub fn in_double_coset(g: &GroupElement, left: &[usize], right: &[usize]) -> Result<bool> {
    let graph = g.graph().clone();
    let mask_of = |set: &[usize]| -> Result<u64> {
        let mut mask = 0u64;
        for &v in set {
            if v >= graph.vertex_count() {
                return Err(Error::LetterOutOfRange { index: v, vertex_count: graph.vertex_count() });
            }
            mask |= 1 << v;
        }
        Ok(mask)
    };
    let left_mask = mask_of(left)?;
    let right_mask = mask_of(right)?;
    Ok(double_coset_masks(&graph, g.letters(), left_mask, right_mask))
}

/// True iff the walls intersect: their types must be adjacent in the graph
/// and some vertex must be adjacent to both, which reduces to the
/// double-coset test base1⁻¹·base2 ∈ ⟨lk(s1)⟩·⟨lk(s2)⟩.
pub fn hyperplanes_cross(h1: &Hyperplane, h2: &Hyperplane) -> Result<bool> {
    ensure_same_graph(h1.graph(), h2.graph())?;
    let graph = h1.graph().clone();
    if !graph.adjacent(h1.vertex(), h2.vertex()) {
        return Ok(false);
    }
    let offset = h1.base().inverse().mul(h2.base())?;
    Ok(double_coset_masks(
        &graph,
        offset.letters(),
        graph.link_mask(h1.vertex()),
        graph.link_mask(h2.vertex()),
    ))
}

/// The type-level relation: Perp for adjacent types, Parallel otherwise
/// (including equal types). Parallel distinct walls never intersect.
pub fn relation(h1: &Hyperplane, h2: &Hyperplane) -> Result<WallRelation> {
    ensure_same_graph(h1.graph(), h2.graph())?;
    if h1.graph().adjacent(h1.vertex(), h2.vertex()) {
        Ok(WallRelation::Perp)
    } else {
        Ok(WallRelation::Parallel)
    }
}

/// True iff h crosses the bi-infinite axis ⋃ wⁱ𝐰 of w described by `axis`.
///
/// Exact three-segment decision: a stabilized wall never crosses (it would
/// have to cross infinitely often), a wall crossing the core segment
/// [a, wa] is found directly, and by the slope of walls along translated
/// segments the wall crosses the ray beyond w·a iff it crosses [w·a, w·b],
/// and the ray before a iff it crosses [a, w⁻¹·b], where b is the wall's
/// base vertex.
pub fn meets_axis(h: &Hyperplane, w: &GroupElement, axis: &StandardForm) -> Result<bool> {
    ensure_same_graph(h.graph(), w.graph())?;
    if w.is_identity() {
        return Err(Error::IdentityInput { op: "meets_axis" });
    }
    if axis.element() != *w {
        return Err(Error::precondition("meets_axis", "axis is not a standard form of w"));
    }
    if stabilizes(w, h)? {
        return Ok(false);
    }
    let a = axis.axis_vertex();
    if crossings_with(h, a, axis.axis_segment())? > 0 {
        return Ok(true);
    }
    let connector = a.inverse().mul(h.base())?;
    let forward = w.mul(a)?;
    if crossings_with(h, &forward, connector.word())? > 0 {
        return Ok(true);
    }
    let back_connector = a.inverse().mul(&w.inverse())?.mul(h.base())?;
    Ok(crossings_with(h, a, back_connector.word())? > 0)
}

/// Distance from the vertex x to the carrier of h, together with the gate
/// (nearest carrier vertex) and the gate's partner across the wall.
pub(crate) fn carrier_gate(
    h: &Hyperplane,
    x: &GroupElement,
) -> Result<(usize, GroupElement, GroupElement)> {
    let graph = x.graph().clone();
    let link = graph.link_mask(h.vertex());
    let step = single(&graph, Letter::positive(h.vertex()))?;
    let near = h.base();
    let far = near.mul(&step)?;

    let y_near = near.inverse().mul(x)?;
    let (p_near, r_near) = extract_prefix(&graph, y_near.letters(), link);
    let y_far = far.inverse().mul(x)?;
    let (p_far, r_far) = extract_prefix(&graph, y_far.letters(), link);

    // x lies strictly on one side, so the two coset distances differ by one.
    debug_assert_eq!((r_near.len() as i64 - r_far.len() as i64).abs(), 1);
    if r_near.len() <= r_far.len() {
        let q = near.mul(&GroupElement::from_letters(&graph, &p_near)?)?;
        let partner = q.mul(&step)?;
        Ok((r_near.len(), q, partner))
    } else {
        let q = far.mul(&GroupElement::from_letters(&graph, &p_far)?)?;
        let partner = q.mul(&step.inverse())?;
        Ok((r_far.len(), q, partner))
    }
}

/// Translates wⁱ·h for i in [-window, window], indexed as offset+i.
fn translate_orbit(w: &GroupElement, h: &Hyperplane, window: usize) -> Result<Vec<Hyperplane>> {
    let mut forward = Vec::with_capacity(window);
    let mut current = h.clone();
    for _ in 0..window {
        current = translate(w, &current)?;
        forward.push(current.clone());
    }
    let w_inv = w.inverse();
    let mut orbit = Vec::with_capacity(2 * window + 1);
    let mut current = h.clone();
    let mut backward = Vec::with_capacity(window);
    for _ in 0..window {
        current = translate(&w_inv, &current)?;
        backward.push(current.clone());
    }
    backward.reverse();
    orbit.extend(backward);
    orbit.push(h.clone());
    orbit.extend(forward);
    Ok(orbit)
}

/// Finds a wall parallel to h that separates h from w·h and crosses no
/// translate wⁱ·h.
///
/// Preconditions: h meets no axis of w and is not stabilized by w. The
/// construction walks candidate carrier vertices q nearest the axis in
/// increasing distance, scans the geodesic [q, wq] for its first
/// parallel-to-h crossing, and verifies the conclusion before returning;
/// a candidate whose scan meets the ⟨w⟩-orbit of h or yields no parallel
/// wall is skipped, because only the distance-minimizing candidate carries
/// the existence guarantee.
pub fn separating_hyperplane(w: &GroupElement, h: &Hyperplane) -> Result<Hyperplane> {
    ensure_same_graph(w.graph(), h.graph())?;
    if w.is_identity() {
        return Err(Error::IdentityInput { op: "separating_hyperplane" });
    }
    let graph = w.graph().clone();
    let std_form = axes::standard_form(w)?;
    if meets_axis(h, w, &std_form)? {
        return Err(Error::precondition("separating_hyperplane", "hyperplane meets an axis of w"));
    }
    if stabilizes(w, h)? {
        return Err(Error::precondition("separating_hyperplane", "w stabilizes the hyperplane"));
    }

    let ell = std_form.translation_length();
    let core = std_form.axis_segment().letters().to_vec();
    let a = std_form.axis_vertex().clone();
    let (f0, _, _) = carrier_gate(h, &a)?;

    // Candidate carrier vertices, nearest axis feet first. The walk covers
    // enough axis vertices that the distance-minimizing foot appears unless
    // walls crossing h shadow the axis far longer than their bases allow.
    let reach = (2 * (f0 + ell + h.base().len() + 8)).min(240);
    let mut candidates: Vec<(usize, GroupElement)> = Vec::new();
    let push_foot = |x: &GroupElement, out: &mut Vec<(usize, GroupElement)>| -> Result<()> {
        let (d, q, partner) = carrier_gate(h, x)?;
        out.push((d, q));
        out.push((d + 1, partner));
        Ok(())
    };
    push_foot(&a, &mut candidates)?;
    let mut x = a.clone();
    for t in 0..reach {
        x = x.mul(&single(&graph, core[t % ell])?)?;
        push_foot(&x, &mut candidates)?;
    }
    let mut x = a.clone();
    for t in 0..reach {
        x = x.mul(&single(&graph, core[ell - 1 - (t % ell)].inverse())?)?;
        push_foot(&x, &mut candidates)?;
    }
    candidates.sort_by(|(d1, q1), (d2, q2)| d1.cmp(d2).then_with(|| q1.word().shortlex_cmp(q2.word())));
    candidates.dedup_by(|(_, q1), (_, q2)| q1 == q2);
    candidates.truncate(48);

    let wb = w.mul(h.base())?;
    for (_, q) in &candidates {
        let walk = q.inverse().mul(w)?.mul(q)?;
        let records = crossing_sequence(q, walk.word())?;
        let window = 5 + (walk.len() + 2 * h.base().len()) / ell + 1;
        let orbit = translate_orbit(w, h, window)?;
        if records.iter().any(|r| orbit.iter().any(|t| *t == r.hyperplane)) {
            continue;
        }
        for rec in &records {
            if relation(&rec.hyperplane, h)? != WallRelation::Parallel {
                continue;
            }
            let separator = rec.hyperplane.clone();
            if !separates(&separator, h.base(), &wb)? {
                return Err(Error::internal(format!(
                    "candidate separator {separator} fails the parity check"
                )));
            }
            for translated in orbit.iter() {
                if hyperplanes_cross(&separator, translated)? {
                    return Err(Error::internal(format!(
                        "candidate separator {separator} crosses a translate of the input wall"
                    )));
                }
            }
            return Ok(separator);
        }
    }
    Err(Error::internal(
        "no separating wall found within the search window".to_owned(),
    ))
}

/// Iterates [`separating_hyperplane`] until the produced wall meets the
/// axis of w. Each step moves past at least one of the finitely many walls
/// crossing the basepoint leg, so the loop terminates.
pub fn separating_to_axis(w: &GroupElement, h0: &Hyperplane) -> Result<Hyperplane> {
    ensure_same_graph(w.graph(), h0.graph())?;
    if w.is_identity() {
        return Err(Error::IdentityInput { op: "separating_to_axis" });
    }
    let std_form = axes::standard_form(w)?;
    let cap = 64 + std_form.basepoint_path().len() + w.len();
    let mut current = h0.clone();
    for _ in 0..cap {
        let next = separating_hyperplane(w, &current)?;
        if meets_axis(&next, w, &std_form)? {
            return Ok(next);
        }
        if stabilizes(w, &next)? {
            return Err(Error::internal("separator is stabilized by w".to_owned()));
        }
        current = next;
    }
    Err(Error::internal(
        "separating_to_axis exceeded its iteration budget".to_owned(),
    ))
}
