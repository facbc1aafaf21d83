//! Quasi-isometry certificates for two-generator subgroups.
//!
//! A non-commuting pair (u, v) generates a free group of rank two, and the
//! embedding into the ambient group distorts lengths by at most a linear
//! factor. This module makes that quantitative: it rewrites the pair into a
//! normalized generating pair, locates one essential wall per generator
//! (a wall whose preimage in the Bass-Serre tree of the subgroup is a single
//! point), and packages the result as a certificate. A reduced word of
//! length n in the working generators then crosses n pairwise-distinct
//! walls, so n <= |phi(w)| <= lambda * n with epsilon = 0.
//!
//! The normalization tracks the basis change as free-group words, so the
//! certificate also bounds distortion for the original generators.
//!
//! All hyperplanes and working generators in this module live in basepoint
//! coordinates: the configuration's basepoint is translated to the origin,
//! so the working u is cyclically reduced and its axis passes through 1.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::Rng;

use crate::axes::{self, StandardForm};
use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::fword::FreeWord;
use crate::geometry::{
    carrier_gate, crossing_sequence, crossings_with, meets_axis,
    separating_hyperplane, separating_to_axis, stabilizes, translate, Hyperplane,
};
use crate::graph::DefiningGraph;
use crate::word::Word;

/// Vertex type tracked by the whole pipeline: the first letter of the
/// cyclically reduced commutator of the pair.
pub fn commutator_type(u: &GroupElement, v: &GroupElement) -> Result<usize> {
    let c = u.commutator(v)?;
    if c.is_identity() {
        return Err(Error::Precondition {
            op: "commutator_type",
            detail: "generators commute, so the subgroup is abelian".into(),
        });
    }
    let core = axes::cyclically_reduce(&c);
    Ok(core.core().letters()[0].vertex)
}

/// A generating pair with a basepoint on an axis of `u` and the tracked
/// vertex type. Shifted copies of the generators (conjugated so the
/// basepoint becomes the origin) are cached because every geometric test
/// runs in basepoint coordinates.
#[derive(Debug, Clone)]
pub struct PairConfig {
    u: GroupElement,
    v: GroupElement,
    basepoint: GroupElement,
    vertex: usize,
    shifted_u: GroupElement,
    shifted_v: GroupElement,
}

impl PairConfig {
    pub fn new(
        u: GroupElement,
        v: GroupElement,
        basepoint: GroupElement,
        vertex: usize,
    ) -> Result<PairConfig> {
        if u.commutes_with(&v)? {
            return Err(Error::Precondition {
                op: "pair_config",
                detail: "generators commute".into(),
            });
        }
        let graph = u.graph();
        if vertex >= graph.vertex_count() {
            return Err(Error::LetterOutOfRange { index: vertex, vertex_count: graph.vertex_count() });
        }
        let shifted_u = u.conjugate_by(&basepoint)?;
        if shifted_u.len() != axes::translation_length(&u) {
            return Err(Error::Precondition {
                op: "pair_config",
                detail: "basepoint is not on an axis of u".into(),
            });
        }
        let shifted_v = v.conjugate_by(&basepoint)?;
        Ok(PairConfig { u, v, basepoint, vertex, shifted_u, shifted_v })
    }

    pub fn u(&self) -> &GroupElement {
        &self.u
    }

    pub fn v(&self) -> &GroupElement {
        &self.v
    }

    pub fn basepoint(&self) -> &GroupElement {
        &self.basepoint
    }

    pub fn vertex(&self) -> usize {
        self.vertex
    }

    /// u in basepoint coordinates; cyclically reduced by the axis condition.
    pub fn shifted_u(&self) -> &GroupElement {
        &self.shifted_u
    }

    /// v in basepoint coordinates.
    pub fn shifted_v(&self) -> &GroupElement {
        &self.shifted_v
    }

    fn graph(&self) -> &Arc<DefiningGraph> {
        self.u.graph()
    }
}

/// Wall counts of the tracked type: on the core segment of u, on the path
/// [1, v], and on the core segment of v, all in basepoint coordinates.
/// Ordered lexicographically; derive matches field order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub on_u: usize,
    pub on_v_path: usize,
    pub on_v_core: usize,
}

fn count_type(word: &Word, vertex: usize) -> usize {
    word.letters().iter().filter(|l| l.vertex == vertex).count()
}

/// Letters of one vertex type cross pairwise-distinct walls, and their
/// count is shared by all geodesics of an element, so these are wall counts.
pub fn triple(cfg: &PairConfig) -> Triple {
    let s = cfg.vertex;
    let core_v = axes::cyclically_reduce(cfg.shifted_v());
    Triple {
        on_u: count_type(cfg.shifted_u().word(), s),
        on_v_path: count_type(cfg.shifted_v().word(), s),
        on_v_core: count_type(core_v.core().word(), s),
    }
}

struct MoveCandidate {
    cfg: PairConfig,
    new_in_old: [FreeWord; 2],
    old_in_new: [FreeWord; 2],
}

fn config_order(a: &PairConfig, b: &PairConfig) -> Ordering {
    a.v
        .word()
        .shortlex_cmp(b.v.word())
        .then_with(|| a.u.word().shortlex_cmp(b.u.word()))
        .then_with(|| a.basepoint.word().shortlex_cmp(b.basepoint.word()))
}

fn v_power(v: &GroupElement, e: i64) -> GroupElement {
    if e < 0 { v.inverse() } else { v.clone() }
}

fn candidate_moves(cfg: &PairConfig) -> Result<Vec<MoveCandidate>> {
    let gen_u = FreeWord::generator(0);
    let gen_v = FreeWord::generator(1);
    let mut out = Vec::new();

    // Swapping the roles of u and v moves the basepoint onto an axis of v.
    if let Ok(a_v) = axes::min_displacement_vertex(cfg.shifted_v()) {
        let bp = cfg.basepoint.mul(&a_v)?;
        if let Ok(swapped) = PairConfig::new(cfg.v.clone(), cfg.u.clone(), bp, cfg.vertex) {
            out.push(MoveCandidate {
                cfg: swapped,
                new_in_old: [gen_v.clone(), gen_u.clone()],
                old_in_new: [gen_v.clone(), gen_u.clone()],
            });
        }
    }

    // v -> u^m v^e u^n. Small two-sided window plus long one-sided
    // straightening powers; e = -1 folds inversion into the same shape.
    let ell = cfg.shifted_u().len().max(1);
    let straighten = (cfg.shifted_v().len() / ell + 2) as i64;
    let mut shapes: Vec<(i64, i64, i64)> = Vec::new();
    for e in [1i64, -1] {
        for m in -2..=2i64 {
            for n in -2..=2i64 {
                if e == 1 && m == 0 && n == 0 {
                    continue;
                }
                shapes.push((m, n, e));
            }
        }
    }
    for n in 3..=straighten {
        shapes.push((0, n, 1));
        shapes.push((0, -n, 1));
        shapes.push((n, 0, 1));
        shapes.push((-n, 0, 1));
    }
    let push_vmove = |out: &mut Vec<MoveCandidate>,
                          basepoint: GroupElement,
                          (m, n, e): (i64, i64, i64)|
     -> Result<()> {
        let v_new = cfg.u.pow(m).mul(&v_power(&cfg.v, e))?.mul(&cfg.u.pow(n))?;
        if let Ok(moved) = PairConfig::new(cfg.u.clone(), v_new, basepoint, cfg.vertex) {
            let image = gen_u.pow(m).concat(&gen_v.pow(e)).concat(&gen_u.pow(n));
            let back = gen_u.pow(-m).concat(&gen_v).concat(&gen_u.pow(-n)).pow(e);
            out.push(MoveCandidate {
                cfg: moved,
                new_in_old: [gen_u.clone(), image],
                old_in_new: [gen_u.clone(), back],
            });
        }
        Ok(())
    };
    for &shape in &shapes {
        push_vmove(&mut out, cfg.basepoint.clone(), shape)?;
    }

    // Basepoint slides along the u-axis, alone or combined with a short
    // v-move. Prefixes of the cyclically reduced u enumerate the axis
    // vertices between integer powers.
    let u_bar = cfg.shifted_u();
    let combos = [(0i64, 0i64, 1i64), (0, 0, -1), (1, 0, 1), (1, 0, -1), (-1, 0, -1), (0, -1, 1)];
    for k in -1..=1i64 {
        for j in 0..u_bar.len() {
            if k == 0 && j == 0 {
                continue;
            }
            let prefix = GroupElement::from_letters(cfg.graph(), &u_bar.letters()[..j])?;
            let slide = cfg.basepoint.mul(&u_bar.pow(k))?.mul(&prefix)?;
            if let Ok(slid) =
                PairConfig::new(cfg.u.clone(), cfg.v.clone(), slide.clone(), cfg.vertex)
            {
                out.push(MoveCandidate {
                    cfg: slid,
                    new_in_old: [gen_u.clone(), gen_v.clone()],
                    old_in_new: [gen_u.clone(), gen_v.clone()],
                });
            }
            for &shape in &combos {
                if shape == (0, 0, 1) {
                    continue;
                }
                push_vmove(&mut out, slide.clone(), shape)?;
            }
        }
    }
    Ok(out)
}

pub(crate) fn minimize_with_record(
    u0: &GroupElement,
    v0: &GroupElement,
) -> Result<(PairConfig, [FreeWord; 2], [FreeWord; 2])> {
    let vertex = commutator_type(u0, v0)?;
    let basepoint = axes::min_displacement_vertex(u0)?;
    let mut cfg = PairConfig::new(u0.clone(), v0.clone(), basepoint, vertex)?;
    let mut fwd = [FreeWord::generator(0), FreeWord::generator(1)];
    let mut bwd = fwd.clone();
    let mut current = triple(&cfg);

    let budget = 64 + 4 * (u0.len() + v0.len());
    for _ in 0..budget {
        let mut best: Option<(Triple, MoveCandidate)> = None;
        for cand in candidate_moves(&cfg)? {
            let t = triple(&cand.cfg);
            if t >= current {
                continue;
            }
            let improves = match &best {
                None => true,
                Some((bt, bc)) => {
                    t < *bt || (t == *bt && config_order(&cand.cfg, &bc.cfg) == Ordering::Less)
                }
            };
            if improves {
                best = Some((t, cand));
            }
        }
        match best {
            None => return Ok((cfg, fwd, bwd)),
            Some((t, mv)) => {
                fwd = [mv.new_in_old[0].substitute(&fwd)?, mv.new_in_old[1].substitute(&fwd)?];
                bwd = [bwd[0].substitute(&mv.old_in_new)?, bwd[1].substitute(&mv.old_in_new)?];
                cfg = mv.cfg;
                current = t;
            }
        }
    }
    Err(Error::internal("triple minimization exceeded its step budget"))
}

/// Greedy descent to a configuration where no candidate move lowers the
/// wall-count triple lexicographically. Each accepted move strictly lowers
/// the triple, so the descent terminates.
pub fn minimize_triple(u0: &GroupElement, v0: &GroupElement) -> Result<PairConfig> {
    minimize_with_record(u0, v0).map(|(cfg, _, _)| cfg)
}

/// Where a wall is expected to be essential: crossing [1, v], crossing the
/// core segment of u, or crossing a u-translate of that core segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EssentialSituation {
    OnV,
    OnU,
    OnUAxisTranslate,
}

/// Distance from the axis of u (through the origin) to the carrier of h:
/// minimum gate distance over axis vertices u^n, found by valley descent.
/// Distance to a convex carrier has no strict local maximum along the axis,
/// so the walk stops at the first strict increase on each side.
fn axis_distance(h: &Hyperplane, u: &GroupElement) -> Result<usize> {
    let start = carrier_gate(h, &GroupElement::identity(u.graph()))?.0;
    let mut best = start;
    let plateau_cap = 8 + 2 * (h.base().len() + u.len());
    for dir in [1i64, -1] {
        let mut last = start;
        let mut plateau = 0usize;
        let mut n = dir;
        loop {
            let d = carrier_gate(h, &u.pow(n))?.0;
            best = best.min(d);
            if d == 0 {
                return Ok(0);
            }
            if d > last {
                break;
            }
            if d == last {
                plateau += 1;
                if plateau > plateau_cap {
                    break;
                }
            } else {
                plateau = 0;
            }
            last = d;
            n += dir;
        }
    }
    Ok(best)
}

/// All n with d(u^n, carrier(h)) <= bound, certified complete by the scan
/// reaching strictly larger distances at both ends of the window.
fn axis_window_below(h: &Hyperplane, u: &GroupElement, bound: usize) -> Result<Vec<i64>> {
    let origin = carrier_gate(h, &GroupElement::identity(u.graph()))?.0;
    let cap = (bound + origin + h.base().len() + u.len() + 16) as i64;
    let mut out = Vec::new();
    for n in -cap..=cap {
        let d = carrier_gate(h, &u.pow(n))?.0;
        if d <= bound {
            if n == -cap || n == cap {
                return Err(Error::internal(
                    "axis window scan hit its cap while still inside the bound",
                ));
            }
            out.push(n);
        }
    }
    Ok(out)
}

/// Index of the axis segment [u^n, u^{n+1}] crossed by h, scanning outward
/// from the origin. The caller guarantees h meets the axis.
fn locate_axis_crossing(h: &Hyperplane, u: &GroupElement) -> Result<i64> {
    let cap = 4 * (h.base().len() + 2 * u.len() + 16) as i64;
    for offset in 0..=cap {
        for n in [offset, -offset] {
            if crossings_with(h, &u.pow(n), u.word())? == 1 {
                return Ok(n);
            }
            if offset == 0 {
                break;
            }
        }
    }
    Err(Error::internal("no axis segment crossing found within the scan cap"))
}

/// Finite essentiality checks for a wall against a pair configuration, in
/// basepoint coordinates. Walls whose subgroup-tree preimage is a single
/// point pass; the checks rule out every other crossing region, using
/// stabilizer tests where a parallel-axis argument dismisses an infinite
/// family at once.
pub fn is_essential(
    h: &Hyperplane,
    cfg: &PairConfig,
    situation: EssentialSituation,
) -> Result<bool> {
    if !Arc::ptr_eq(h.graph(), cfg.graph()) && !h.graph().same_graph(cfg.graph()) {
        return Err(Error::GraphMismatch);
    }
    let u_bar = cfg.shifted_u();
    let v_bar = cfg.shifted_v();
    let origin = GroupElement::identity(cfg.graph());
    match situation {
        EssentialSituation::OnV => {
            if crossings_with(h, &origin, v_bar.word())? != 1 {
                return Ok(false);
            }
            // Nearby u-paths at both endpoints of the v-edge.
            if crossings_with(h, &origin, u_bar.word())? != 0
                || crossings_with(h, &origin, u_bar.inverse().word())? != 0
                || crossings_with(h, v_bar, u_bar.word())? != 0
                || crossings_with(h, v_bar, u_bar.inverse().word())? != 0
            {
                return Ok(false);
            }
            if stabilizes(u_bar, h)? {
                return Ok(false);
            }
            let pulled = translate(&v_bar.inverse(), h)?;
            if stabilizes(u_bar, &pulled)? {
                return Ok(false);
            }
            // The u-axes at 1 and at v; a wall missing them and unstabilized
            // misses every u-translate of the nearby paths as well.
            let u_form = axes::standard_form(u_bar)?;
            if meets_axis(h, u_bar, &u_form)? || meets_axis(&pulled, u_bar, &u_form)? {
                return Ok(false);
            }
            Ok(true)
        }
        EssentialSituation::OnU => {
            if crossings_with(h, &origin, u_bar.word())? != 1 {
                return Ok(false);
            }
            let u_form = axes::standard_form(u_bar)?;
            if !meets_axis(h, u_bar, &u_form)? {
                return Ok(false);
            }
            // Nearby v-paths at both endpoints of the u-edge.
            if crossings_with(h, &origin, v_bar.word())? != 0
                || crossings_with(h, &origin, v_bar.inverse().word())? != 0
                || crossings_with(h, u_bar, v_bar.word())? != 0
                || crossings_with(h, u_bar, v_bar.inverse().word())? != 0
            {
                return Ok(false);
            }
            // Far v-branches hang off u^n; only axis vertices within |v| of
            // the carrier can reach it, and that window is certified.
            let bound = v_bar.len();
            for n in axis_window_below(h, u_bar, bound)? {
                if n == 0 || n == 1 {
                    continue;
                }
                let anchor = u_bar.pow(n);
                if crossings_with(h, &anchor, v_bar.word())? != 0
                    || crossings_with(h, &anchor, v_bar.inverse().word())? != 0
                {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        EssentialSituation::OnUAxisTranslate => {
            if stabilizes(u_bar, h)? {
                return Ok(false);
            }
            let u_form = axes::standard_form(u_bar)?;
            if !meets_axis(h, u_bar, &u_form)? {
                return Ok(false);
            }
            let m = locate_axis_crossing(h, u_bar)?;
            let back = translate(&u_bar.pow(-m), h)?;
            is_essential(&back, cfg, EssentialSituation::OnU)
        }
    }
}

/// Tracked-type crossing records on [1, v] in basepoint coordinates.
fn tracked_records(cfg: &PairConfig, v_bar: &GroupElement) -> Result<Vec<(usize, Hyperplane)>> {
    let origin = GroupElement::identity(cfg.graph());
    let records = crossing_sequence(&origin, v_bar.word())?;
    Ok(records
        .into_iter()
        .filter(|r| r.hyperplane.vertex() == cfg.vertex)
        .map(|r| (r.position, r.hyperplane))
        .collect())
}

/// An essential wall of the tracked type crossing [1, v], for a
/// triple-minimized configuration.
///
/// When walls of the tracked type cross the core segment of u, the middle
/// walls of [1, v] are checked first; otherwise candidates crossing the
/// commutator axis segment [c^-1 a_c, a_c] take priority. Every candidate
/// passes through `is_essential`, and the remaining records are scanned as
/// a fallback before giving up.
pub fn find_essential_on_v(cfg: &PairConfig) -> Result<Hyperplane> {
    let v_bar = cfg.shifted_v().clone();
    let records = tracked_records(cfg, &v_bar)?;
    if records.is_empty() {
        return Err(Error::Precondition {
            op: "find_essential_on_v",
            detail: "no tracked-type wall crosses [1, v]; configuration is not minimized".into(),
        });
    }
    let on_u = count_type(cfg.shifted_u().word(), cfg.vertex);
    let mut order: Vec<usize> = (0..records.len()).collect();
    if on_u > 0 {
        let mid_lo = (records.len() - 1) / 2;
        let mid_hi = records.len() / 2;
        order.sort_by_key(|&i| {
            let d = (i as i64 - mid_lo as i64).abs().min((i as i64 - mid_hi as i64).abs());
            (d, i)
        });
    } else {
        let c = cfg.shifted_u().commutator(&v_bar)?;
        let c_form = axes::standard_form(&c)?;
        let start = c.inverse().mul(c_form.axis_vertex())?;
        let mut markers = HashSet::new();
        for record in crossing_sequence(&start, c_form.axis_segment())? {
            if record.hyperplane.vertex() == cfg.vertex {
                markers.insert(record.hyperplane);
            }
        }
        order.sort_by_key(|&i| (!markers.contains(&records[i].1), i));
    }
    for i in order {
        let h = &records[i].1;
        if is_essential(h, cfg, EssentialSituation::OnV)? {
            return Ok(h.clone());
        }
    }
    Err(Error::internal(
        "no essential wall found on [1, v]; the configuration may not be triple-minimal",
    ))
}

/// Shift exponent turning translate index k (relative to the axis crossing
/// at m) into a generator adjustment; None means no translate was hit.
pub fn sigma(m: i64, k: Option<i64>) -> i64 {
    match k {
        None => 0,
        Some(k) if k <= m => k - m - 1,
        Some(k) => k - m,
    }
}

/// Certificate that <u, v> is free of rank two and quasi-isometrically
/// embedded. The working generators and both walls are stored in basepoint
/// coordinates; conjugating by the basepoint recovers absolute elements.
#[derive(Debug, Clone)]
pub struct QICertificate {
    graph: Arc<DefiningGraph>,
    original_u: GroupElement,
    original_v: GroupElement,
    basepoint: GroupElement,
    working_u: GroupElement,
    working_v: GroupElement,
    working_in_original: [FreeWord; 2],
    original_in_working: [FreeWord; 2],
    h_u: Hyperplane,
    h_v: Hyperplane,
    lambda: u64,
    epsilon: u64,
    lambda_original: u64,
}

impl QICertificate {
    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn original_generators(&self) -> (&GroupElement, &GroupElement) {
        (&self.original_u, &self.original_v)
    }

    pub fn basepoint(&self) -> &GroupElement {
        &self.basepoint
    }

    /// Working generators in basepoint coordinates.
    pub fn working_generators(&self) -> (&GroupElement, &GroupElement) {
        (&self.working_u, &self.working_v)
    }

    /// Expressions of the working generators as free words in the originals.
    pub fn working_in_original(&self) -> &[FreeWord; 2] {
        &self.working_in_original
    }

    /// Expressions of the original generators as free words in the working pair.
    pub fn original_in_working(&self) -> &[FreeWord; 2] {
        &self.original_in_working
    }

    pub fn essential_walls(&self) -> (&Hyperplane, &Hyperplane) {
        (&self.h_u, &self.h_v)
    }

    /// Multiplicative constant for the working generators (epsilon is 0).
    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn epsilon(&self) -> u64 {
        self.epsilon
    }

    /// Multiplicative constant valid for the original generating pair.
    pub fn lambda_original(&self) -> u64 {
        self.lambda_original
    }

    pub fn to_json(&self) -> serde_json::Value {
        let fw_names = ["u", "v"];
        serde_json::json!({
            "graph": self.graph.to_spec(),
            "original": { "u": self.original_u.to_text(), "v": self.original_v.to_text() },
            "basepoint": self.basepoint.to_text(),
            "frame": "basepoint",
            "working": { "u": self.working_u.to_text(), "v": self.working_v.to_text() },
            "working_in_original": [
                self.working_in_original[0].to_text(&fw_names),
                self.working_in_original[1].to_text(&fw_names),
            ],
            "original_in_working": [
                self.original_in_working[0].to_text(&fw_names),
                self.original_in_working[1].to_text(&fw_names),
            ],
            "h_u": self.h_u.to_json(),
            "h_v": self.h_v.to_json(),
            "lambda": self.lambda,
            "epsilon": self.epsilon,
            "lambda_original": self.lambda_original,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<QICertificate> {
        let parse_err = |what: &str| Error::Parse { detail: format!("certificate field `{what}` is missing or malformed") };
        let graph = DefiningGraph::from_json(&value.get("graph").ok_or_else(|| parse_err("graph"))?.to_string())?;
        let text = |key: &str, sub: &str| -> Result<String> {
            value
                .get(key)
                .and_then(|o| o.get(sub))
                .and_then(|t| t.as_str())
                .map(str::to_owned)
                .ok_or_else(|| parse_err(key))
        };
        let fw_names = ["u", "v"];
        let fw_pair = |key: &str| -> Result<[FreeWord; 2]> {
            let arr = value.get(key).and_then(|a| a.as_array()).ok_or_else(|| parse_err(key))?;
            if arr.len() != 2 {
                return Err(parse_err(key));
            }
            let first = FreeWord::parse(arr[0].as_str().ok_or_else(|| parse_err(key))?, &fw_names)?;
            let second = FreeWord::parse(arr[1].as_str().ok_or_else(|| parse_err(key))?, &fw_names)?;
            Ok([first, second])
        };
        let number = |key: &str| -> Result<u64> {
            value.get(key).and_then(|n| n.as_u64()).ok_or_else(|| parse_err(key))
        };
        let basepoint_text = value
            .get("basepoint")
            .and_then(|t| t.as_str())
            .ok_or_else(|| parse_err("basepoint"))?;
        Ok(QICertificate {
            original_u: GroupElement::parse(&graph, &text("original", "u")?)?,
            original_v: GroupElement::parse(&graph, &text("original", "v")?)?,
            basepoint: GroupElement::parse(&graph, basepoint_text)?,
            working_u: GroupElement::parse(&graph, &text("working", "u")?)?,
            working_v: GroupElement::parse(&graph, &text("working", "v")?)?,
            working_in_original: fw_pair("working_in_original")?,
            original_in_working: fw_pair("original_in_working")?,
            h_u: Hyperplane::from_json(&graph, value.get("h_u").ok_or_else(|| parse_err("h_u"))?)?,
            h_v: Hyperplane::from_json(&graph, value.get("h_v").ok_or_else(|| parse_err("h_v"))?)?,
            lambda: number("lambda")?,
            epsilon: number("epsilon")?,
            lambda_original: number("lambda_original")?,
            graph,
        })
    }
}

/// Candidate from the generator-window scan: an essential wall on
/// [1, u^{n1} v u^{n2}] together with its crossing position and its
/// distance to the u-axis.
struct EssentialChoice {
    dist: usize,
    h: Hyperplane,
    n1: i64,
    n2: i64,
    pos: usize,
    v_cand: GroupElement,
}

fn scan_essential(
    cfg: &PairConfig,
    dist_cache: &mut HashMap<Hyperplane, usize>,
    below: Option<usize>,
) -> Result<Option<EssentialChoice>> {
    let u_bar = cfg.shifted_u().clone();
    let origin = GroupElement::identity(cfg.graph());
    let window = cfg.shifted_v().len() as i64 + 1;
    let mut candidates: Vec<(usize, Hyperplane, i64, i64, usize, GroupElement)> = Vec::new();
    let mut scanned = 0usize;
    for n1 in -window..=window {
        for n2 in -window..=window {
            let v_cand = u_bar.pow(n1).mul(cfg.shifted_v())?.mul(&u_bar.pow(n2))?;
            // Walls of every type compete; only the existence guarantee is
            // tied to the tracked type.
            for record in crossing_sequence(&origin, v_cand.word())? {
                let (pos, h) = (record.position, record.hyperplane);
                scanned += 1;
                if stabilizes(&u_bar, &h)? {
                    continue;
                }
                let dist = match dist_cache.get(&h) {
                    Some(&d) => d,
                    None => {
                        let d = axis_distance(&h, &u_bar)?;
                        dist_cache.insert(h.clone(), d);
                        d
                    }
                };
                if let Some(limit) = below {
                    if dist >= limit {
                        continue;
                    }
                }
                candidates.push((dist, h, n1, n2, pos, v_cand.clone()));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.base().word().shortlex_cmp(b.1.base().word()))
            .then_with(|| (a.2, a.3, a.4).cmp(&(b.2, b.3, b.4)))
    });
    for (dist, h, n1, n2, pos, v_cand) in candidates {
        let v_abs = cfg.u().pow(n1).mul(cfg.v())?.mul(&cfg.u().pow(n2))?;
        let cand_cfg =
            PairConfig::new(cfg.u().clone(), v_abs, cfg.basepoint().clone(), cfg.vertex())?;
        if is_essential(&h, &cand_cfg, EssentialSituation::OnV)? {
            return Ok(Some(EssentialChoice { dist, h, n1, n2, pos, v_cand }));
        }
    }
    if below.is_none() && scanned == 0 {
        return Err(Error::internal(format!(
            "generator window |n1|,|n2| <= {window} produced no wall on any [1, u^n1 v u^n2]"
        )));
    }
    Ok(None)
}

/// Translate indices k where h crosses u^k [1, p], with p given by the path
/// word; returns the index farthest from m. Crossing translates form a
/// contiguous run ending at the axis crossing, so the far end is the
/// extreme of the certified window.
fn farthest_crossing_index(
    h: &Hyperplane,
    u: &GroupElement,
    path: &Word,
    m: i64,
) -> Result<Option<i64>> {
    if path.is_empty() {
        return Ok(None);
    }
    let mut hits = Vec::new();
    for k in axis_window_below(h, u, path.len())? {
        if crossings_with(h, &u.pow(k), path)? > 0 {
            hits.push(k);
        }
    }
    Ok(hits.into_iter().max_by_key(|&k| ((k - m).abs(), -k)))
}

/// Translates h along the axis of w so it crosses the core segment
/// [a, w a] exactly once, assuming h meets the axis.
fn pull_to_core(h: &Hyperplane, w: &GroupElement, form: &StandardForm) -> Result<Hyperplane> {
    let cap = 4 * (h.base().len() + 2 * w.len() + 16) as i64;
    for offset in 0..=cap {
        for j in [offset, -offset] {
            let start = w.pow(j).mul(form.axis_vertex())?;
            if crossings_with(h, &start, form.axis_segment())? == 1 {
                return Ok(translate(&w.pow(-j), h)?);
            }
            if offset == 0 {
                break;
            }
        }
    }
    Err(Error::internal("wall meets the axis but no core-segment translate was found"))
}

/// Builds a quasi-isometry certificate for the subgroup generated by a
/// non-commuting pair.
///
/// The pipeline minimizes the wall-count triple, scans the generator window
/// for the essential wall closest to the u-axis, separates it from its
/// u-translate, and adjusts v by the shift exponents so that both walls are
/// essential for the final pair. Every constructed wall is re-checked; a
/// failed check is an internal error, never a silently weaker certificate.
pub fn build_certificate(u0: &GroupElement, v0: &GroupElement) -> Result<QICertificate> {
    let (cfg, fwd, bwd) = minimize_with_record(u0, v0)?;
    let u_bar = cfg.shifted_u().clone();
    let u_form = axes::standard_form(&u_bar)?;

    let mut dist_cache = HashMap::new();
    let mut choice = scan_essential(&cfg, &mut dist_cache, None)?
        .ok_or_else(|| Error::internal("no essential wall in the generator window"))?;

    // A separating wall that misses the u-axis contradicts the choice of h:
    // an essential wall strictly closer to the axis must exist, so rescan.
    let h_prime = loop {
        let candidate = separating_hyperplane(&u_bar, &choice.h)?;
        if meets_axis(&candidate, &u_bar, &u_form)? {
            break candidate;
        }
        choice = scan_essential(&cfg, &mut dist_cache, Some(choice.dist))?.ok_or_else(|| {
            Error::internal("separating wall missed the u-axis and no closer essential wall exists")
        })?;
    };

    let m = locate_axis_crossing(&h_prime, &u_bar)?;
    let letters = choice.v_cand.letters().to_vec();
    let prefix = Word(letters[..choice.pos].to_vec());
    let suffix = Word(letters[choice.pos + 1..].to_vec()).inverse();
    let k1 = farthest_crossing_index(&h_prime, &u_bar, &prefix, m)?;
    let k2 = farthest_crossing_index(&h_prime, &u_bar, &suffix, m)?;
    let s1 = sigma(m, k1);
    let s2 = sigma(m, k2);

    let exp1 = choice.n1 + s1;
    let exp2 = choice.n2 - s2;
    let v_final_bar = u_bar.pow(s1).mul(&choice.v_cand)?.mul(&u_bar.pow(-s2))?;
    let v_final_abs = cfg.u().pow(exp1).mul(cfg.v())?.mul(&cfg.u().pow(exp2))?;
    let final_cfg =
        PairConfig::new(cfg.u().clone(), v_final_abs, cfg.basepoint().clone(), cfg.vertex())?;

    let h_u = translate(&u_bar.pow(-m), &h_prime)?;
    let vf_form = axes::standard_form(&v_final_bar)?;
    let shifted = translate(&u_bar.pow(s1), &choice.h)?;
    let h_v = if meets_axis(&shifted, &v_final_bar, &vf_form)? {
        pull_to_core(&shifted, &v_final_bar, &vf_form)?
    } else {
        let reached = separating_to_axis(&v_final_bar, &shifted)?;
        pull_to_core(&reached, &v_final_bar, &vf_form)?
    };

    if !is_essential(&h_u, &final_cfg, EssentialSituation::OnU)? {
        return Err(Error::internal("constructed u-wall failed the essentiality checks"));
    }
    if !is_essential(&h_v, &final_cfg, EssentialSituation::OnV)? {
        return Err(Error::internal("constructed v-wall failed the essentiality checks"));
    }

    // Fold the final generator adjustment v -> u^exp1 v u^exp2 into the
    // basis-change records.
    let gen_u = FreeWord::generator(0);
    let gen_v = FreeWord::generator(1);
    let image = gen_u.pow(exp1).concat(&gen_v).concat(&gen_u.pow(exp2));
    let back = gen_u.pow(-exp1).concat(&gen_v).concat(&gen_u.pow(-exp2));
    let fwd = [fwd[0].clone(), image.substitute(&fwd)?];
    let bwd = [bwd[0].substitute(&[gen_u.clone(), back.clone()])?, bwd[1].substitute(&[gen_u, back])?];

    let lambda = u_bar.len().max(v_final_bar.len()) as u64;
    let expansion = bwd[0].len().max(bwd[1].len()).max(1) as u64;
    Ok(QICertificate {
        graph: cfg.graph().clone(),
        original_u: u0.clone(),
        original_v: v0.clone(),
        basepoint: final_cfg.basepoint().clone(),
        working_u: u_bar,
        working_v: v_final_bar,
        working_in_original: fwd,
        original_in_working: bwd,
        h_u,
        h_v,
        lambda,
        epsilon: 0,
        lambda_original: expansion * lambda,
    })
}

/// Evaluates a free word at group-element images; letter ±k maps to
/// images[k-1]^(±1).
pub fn evaluate_free_word(w: &FreeWord, images: &[GroupElement]) -> Result<GroupElement> {
    let graph = images
        .first()
        .map(|g| g.graph().clone())
        .ok_or_else(|| Error::Precondition { op: "evaluate_free_word", detail: "no images".into() })?;
    let mut out = GroupElement::identity(&graph);
    for &l in w.letters() {
        let idx = l.unsigned_abs() as usize - 1;
        let image = images.get(idx).ok_or_else(|| Error::Precondition {
            op: "evaluate_free_word",
            detail: format!("letter {l} has no image among {} generators", images.len()),
        })?;
        let piece = if l > 0 { image.clone() } else { image.inverse() };
        out = out.mul(&piece)?;
    }
    Ok(out)
}

/// Outcome of re-checking a certificate against sample words.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub words_checked: usize,
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks a certificate on reduced words in the working generators:
/// the length sandwich n <= |phi(w)| <= lambda n, and that the n designated
/// orbit walls (one per letter, translated along the prefix path) are
/// pairwise distinct and all separate 1 from phi(w). Since both walls are
/// essential, these are exactly the subgroup-orbit walls the geodesic
/// crosses, each exactly once.
pub fn verify_certificate(cert: &QICertificate, words: &[FreeWord]) -> Result<VerifyReport> {
    let wu = &cert.working_u;
    let wv = &cert.working_v;
    let origin = GroupElement::identity(&cert.graph);
    let names = ["u", "v"];
    let mut violations = Vec::new();
    for w in words {
        if let Some(top) = w.max_generator() {
            if top > 1 {
                return Err(Error::Precondition {
                    op: "verify_certificate",
                    detail: "words must use exactly two generators".into(),
                });
            }
        }
        let n = w.len();
        let image = evaluate_free_word(w, &[wu.clone(), wv.clone()])?;
        let len = image.len();
        if !(n <= len && (len as u64) <= cert.lambda * n as u64 + cert.epsilon) {
            violations.push(format!(
                "length sandwich failed for `{}`: n = {n}, |phi(w)| = {len}, lambda = {}",
                w.to_text(&names),
                cert.lambda
            ));
            continue;
        }
        let mut walls: Vec<Hyperplane> = Vec::with_capacity(n);
        let mut cur = origin.clone();
        for &l in w.letters() {
            match l {
                1 => {
                    walls.push(translate(&cur, &cert.h_u)?);
                    cur = cur.mul(wu)?;
                }
                -1 => {
                    cur = cur.mul(&wu.inverse())?;
                    walls.push(translate(&cur, &cert.h_u)?);
                }
                2 => {
                    walls.push(translate(&cur, &cert.h_v)?);
                    cur = cur.mul(wv)?;
                }
                _ => {
                    cur = cur.mul(&wv.inverse())?;
                    walls.push(translate(&cur, &cert.h_v)?);
                }
            }
        }
        let distinct: HashSet<&Hyperplane> = walls.iter().collect();
        if distinct.len() != n {
            violations.push(format!(
                "designated walls collide for `{}`: {} distinct of {n}",
                w.to_text(&names),
                distinct.len()
            ));
            continue;
        }
        // A geodesic crosses a wall exactly when that wall separates its
        // endpoints, so one crossing walk answers all n separation queries.
        let crossed: HashSet<Hyperplane> = crossing_sequence(&origin, image.word())?
            .into_iter()
            .map(|r| r.hyperplane)
            .collect();
        for wall in &walls {
            if !crossed.contains(wall) {
                violations.push(format!(
                    "designated wall {wall} does not separate 1 from phi(`{}`)",
                    w.to_text(&names)
                ));
                break;
            }
        }
    }
    Ok(VerifyReport { words_checked: words.len(), violations })
}

/// Uniformly random reduced words in a rank-2 free group, lengths 1..=max_len.
pub fn random_reduced_words<R: Rng>(rng: &mut R, count: usize, max_len: usize) -> Vec<FreeWord> {
    let alphabet = [1i32, -1, 2, -2];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.gen_range(1..=max_len.max(1));
        let mut letters: Vec<i32> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = alphabet[rng.gen_range(0..4)];
            if letters.last() == Some(&-l) {
                continue;
            }
            letters.push(l);
        }
        out.push(FreeWord::from_letters(&letters).expect("letters are nonzero"));
    }
    out
}

/// Distinct elements realized by length-`depth` prefixes of geodesics of g.
fn prefix_elements(g: &GroupElement, depth: usize, budget: &mut usize) -> Result<Vec<GroupElement>> {
    let graph = g.graph();
    let mut level = vec![GroupElement::identity(graph)];
    for _ in 0..depth {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for p in &level {
            let rest = p.inverse().mul(g)?;
            let letters = rest.letters();
            for (i, l) in letters.iter().enumerate() {
                let movable = letters[..i].iter().all(|e| {
                    e.vertex != l.vertex && graph.adjacent(e.vertex, l.vertex)
                });
                if !movable {
                    continue;
                }
                if *budget == 0 {
                    return Err(Error::ResourceLimit {
                        detail: "prefix enumeration budget exhausted".into(),
                    });
                }
                *budget -= 1;
                let mut extended = p.letters().to_vec();
                extended.push(*l);
                let q = GroupElement::from_letters(graph, &extended)?;
                if seen.insert(q.word().clone()) {
                    next.push(q);
                }
            }
        }
        level = next;
    }
    Ok(level)
}

/// The unique r and maximal k with r^k = g. Roots of the cyclically reduced
/// core are geodesic-prefix elements whose length divides the core length,
/// so divisors are tried in increasing order and the first match wins.
pub fn primitive_root(g: &GroupElement) -> Result<(GroupElement, u32)> {
    if g.is_identity() {
        return Err(Error::IdentityInput { op: "primitive_root" });
    }
    let dec = axes::cyclically_reduce(g);
    let core = dec.core();
    let conj = dec.conjugator();
    let n = core.len();
    for d in 1..n {
        if n % d != 0 {
            continue;
        }
        let mut budget = 200_000usize;
        let mut candidates = prefix_elements(core, d, &mut budget)?;
        candidates.sort_by(|a, b| a.word().shortlex_cmp(b.word()));
        for p in candidates {
            if p.pow((n / d) as i64) == *core {
                let root = conj.mul(&p)?.mul(&conj.inverse())?;
                return Ok((root, (n / d) as u32));
            }
        }
    }
    Ok((g.clone(), 1))
}

/// Isomorphism type of the subgroup generated by two elements, with a
/// witness: the common root for Z, independent roots for Z^2, and a full
/// certificate for F2.
#[derive(Debug, Clone)]
pub enum Classification {
    Trivial,
    Z { root: GroupElement },
    Z2 { first_root: GroupElement, second_root: GroupElement },
    F2 { certificate: Box<QICertificate> },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Trivial => "trivial",
            Classification::Z { .. } => "Z",
            Classification::Z2 { .. } => "Z^2",
            Classification::F2 { .. } => "F2",
        }
    }
}

/// Two commuting elements of a right-angled Artin group generate Z exactly
/// when they share a primitive root; otherwise they generate Z^2. A
/// non-commuting pair generates F2, certified quasi-isometric.
pub fn classify_subgroup(g1: &GroupElement, g2: &GroupElement) -> Result<Classification> {
    match (g1.is_identity(), g2.is_identity()) {
        (true, true) => return Ok(Classification::Trivial),
        (true, false) => return Ok(Classification::Z { root: primitive_root(g2)?.0 }),
        (false, true) => return Ok(Classification::Z { root: primitive_root(g1)?.0 }),
        (false, false) => {}
    }
    if g1.commutes_with(g2)? {
        let (r1, _) = primitive_root(g1)?;
        let (r2, _) = primitive_root(g2)?;
        if r1 == r2 || r1 == r2.inverse() {
            return Ok(Classification::Z { root: r1 });
        }
        return Ok(Classification::Z2 { first_root: r1, second_root: r2 });
    }
    Ok(Classification::F2 { certificate: Box::new(build_certificate(g1, g2)?) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edgeless2() -> Arc<DefiningGraph> {
        DefiningGraph::free(&["a", "b"]).unwrap()
    }

    fn pentagon() -> Arc<DefiningGraph> {
        DefiningGraph::cycle(&["v1", "v2", "v3", "v4", "v5"]).unwrap()
    }

    fn elt(graph: &Arc<DefiningGraph>, text: &str) -> GroupElement {
        GroupElement::parse(graph, text).unwrap()
    }

    #[test]
    fn commutator_types_follow_the_core() {
        let free = edgeless2();
        assert_eq!(commutator_type(&elt(&free, "a"), &elt(&free, "b")).unwrap(), 0);

        let pent = pentagon();
        assert_eq!(commutator_type(&elt(&pent, "v1"), &elt(&pent, "v3")).unwrap(), 0);

        // On the path a-b-c the commutator of ab and c collapses to the
        // commutator of a and c, whose core starts with a.
        let path = DefiningGraph::path(&["a", "b", "c"]).unwrap();
        assert_eq!(commutator_type(&elt(&path, "a b"), &elt(&path, "c")).unwrap(), 0);

        let err = commutator_type(&elt(&pent, "v1"), &elt(&pent, "v1 v1")).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn triples_count_tracked_walls() {
        let free = edgeless2();
        let one = GroupElement::identity(&free);
        let cfg = PairConfig::new(elt(&free, "a"), elt(&free, "b"), one.clone(), 0).unwrap();
        assert_eq!(triple(&cfg), Triple { on_u: 1, on_v_path: 0, on_v_core: 0 });

        let cfg = PairConfig::new(elt(&free, "a"), elt(&free, "a b"), one, 0).unwrap();
        assert_eq!(triple(&cfg), Triple { on_u: 1, on_v_path: 1, on_v_core: 1 });

        let pent = pentagon();
        let one = GroupElement::identity(&pent);
        let cfg = PairConfig::new(elt(&pent, "v1"), elt(&pent, "v3"), one, 0).unwrap();
        assert_eq!(triple(&cfg), Triple { on_u: 1, on_v_path: 0, on_v_core: 0 });
    }

    #[test]
    fn pair_config_rejects_bad_input() {
        let pent = pentagon();
        let one = GroupElement::identity(&pent);
        // Adjacent generators commute.
        let err =
            PairConfig::new(elt(&pent, "v1"), elt(&pent, "v2"), one.clone(), 0).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
        // v3 is not on an axis of v1.
        let err = PairConfig::new(elt(&pent, "v1"), elt(&pent, "v3"), elt(&pent, "v3"), 0)
            .unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
        let err = PairConfig::new(elt(&pent, "v1"), elt(&pent, "v3"), one, 9).unwrap_err();
        assert!(matches!(err, Error::LetterOutOfRange { .. }));
    }

    #[test]
    fn minimization_reaches_the_lex_minimum() {
        // Swapping roles empties the u-count: (1,0,0) -> (0,1,1).
        let free = edgeless2();
        let cfg = minimize_triple(&elt(&free, "a"), &elt(&free, "b")).unwrap();
        assert_eq!(triple(&cfg), Triple { on_u: 0, on_v_path: 1, on_v_core: 1 });
        assert_eq!(cfg.u().to_text(), "b");
        assert_eq!(cfg.v().to_text(), "a");

        let cfg = minimize_triple(&elt(&free, "a"), &elt(&free, "a b")).unwrap();
        assert_eq!(triple(&cfg), Triple { on_u: 0, on_v_path: 1, on_v_core: 1 });

        let pent = pentagon();
        let cfg = minimize_triple(&elt(&pent, "v1"), &elt(&pent, "v1 v3")).unwrap();
        assert_eq!(triple(&cfg), Triple { on_u: 0, on_v_path: 1, on_v_core: 1 });
        assert_eq!(cfg.u().to_text(), "v3");
        assert_eq!(cfg.v().to_text(), "v1");
    }

    #[test]
    fn minimization_records_invert_each_other() {
        let pent = pentagon();
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let gens = ["v1", "v2", "v3", "v4", "v5"];
        let mut checked = 0;
        while checked < 25 {
            let mut random_elt = || {
                let len = rng.gen_range(1..=3);
                let mut text = String::new();
                for i in 0..len {
                    if i > 0 {
                        text.push(' ');
                    }
                    text.push_str(gens[rng.gen_range(0..5)]);
                    if rng.gen_bool(0.3) {
                        text.push_str("^-1");
                    }
                }
                elt(&pent, &text)
            };
            let u0 = random_elt();
            let v0 = random_elt();
            if u0.is_identity() || v0.is_identity() || u0.commutes_with(&v0).unwrap() {
                continue;
            }
            let (cfg, fwd, bwd) = minimize_with_record(&u0, &v0).unwrap();
            let originals = [u0.clone(), v0.clone()];
            let working = [cfg.u().clone(), cfg.v().clone()];
            assert_eq!(evaluate_free_word(&fwd[0], &originals).unwrap(), *cfg.u());
            assert_eq!(evaluate_free_word(&fwd[1], &originals).unwrap(), *cfg.v());
            assert_eq!(evaluate_free_word(&bwd[0], &working).unwrap(), u0);
            assert_eq!(evaluate_free_word(&bwd[1], &working).unwrap(), v0);
            checked += 1;
        }
    }

    #[test]
    fn essential_walls_found_on_minimized_pairs() {
        let free = edgeless2();
        let cfg = minimize_triple(&elt(&free, "a"), &elt(&free, "b")).unwrap();
        let h = find_essential_on_v(&cfg).unwrap();
        assert_eq!(h, Hyperplane::parse(&free, "1", "a").unwrap());

        let pent = pentagon();
        let cfg = minimize_triple(&elt(&pent, "v1"), &elt(&pent, "v3")).unwrap();
        let h = find_essential_on_v(&cfg).unwrap();
        assert_eq!(h, Hyperplane::parse(&pent, "1", "v1").unwrap());

        // A wall the subgroup tree never crosses fails the point check.
        let stray = Hyperplane::parse(&pent, "1", "v2").unwrap();
        assert!(!is_essential(&stray, &cfg, EssentialSituation::OnV).unwrap());
    }

    #[test]
    fn sigma_matches_the_case_formula() {
        assert_eq!(sigma(2, Some(1)), -2);
        assert_eq!(sigma(2, Some(3)), 1);
        assert_eq!(sigma(5, None), 0);
        for m in -10..=10i64 {
            for k in -10..=10i64 {
                let expected = if k <= m { k - m - 1 } else { k - m };
                assert_eq!(sigma(m, Some(k)), expected);
                assert_ne!(sigma(m, Some(k)), 0);
            }
            assert_eq!(sigma(m, None), 0);
        }
    }

    #[test]
    fn certificates_on_the_free_group() {
        let free = edgeless2();
        let cert = build_certificate(&elt(&free, "a"), &elt(&free, "b")).unwrap();
        assert_eq!(cert.lambda(), 1);
        assert_eq!(cert.epsilon(), 0);
        assert_eq!(cert.lambda_original(), 1);
        let (wu, wv) = cert.working_generators();
        assert_eq!(wu.to_text(), "b");
        assert_eq!(wv.to_text(), "a");
        let (hu, hv) = cert.essential_walls();
        assert_eq!(*hu, Hyperplane::parse(&free, "1", "b").unwrap());
        assert_eq!(*hv, Hyperplane::parse(&free, "1", "a").unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut words = random_reduced_words(&mut rng, 60, 14);
        words.push(FreeWord::identity());
        let report = verify_certificate(&cert, &words).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_eq!(report.words_checked, 61);
    }

    #[test]
    fn certificates_on_the_pentagon() {
        let pent = pentagon();
        let cert = build_certificate(&elt(&pent, "v1"), &elt(&pent, "v3")).unwrap();
        assert_eq!(cert.lambda(), 1);
        let (hu, hv) = cert.essential_walls();
        assert_eq!(*hu, Hyperplane::parse(&pent, "1", "v3").unwrap());
        assert_eq!(*hv, Hyperplane::parse(&pent, "1", "v1").unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let words = random_reduced_words(&mut rng, 40, 12);
        assert!(verify_certificate(&cert, &words).unwrap().passed());

        // Commuting letters inside the generators stretch the sandwich.
        let cert = build_certificate(&elt(&pent, "v1 v2"), &elt(&pent, "v3 v4")).unwrap();
        assert_eq!(cert.lambda(), 2);
        assert_eq!(cert.epsilon(), 0);
        let words = random_reduced_words(&mut rng, 40, 10);
        let report = verify_certificate(&cert, &words).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn certificate_json_round_trips_and_detects_tampering() {
        let pent = pentagon();
        let cert = build_certificate(&elt(&pent, "v1"), &elt(&pent, "v3")).unwrap();
        let json = cert.to_json();
        let back = QICertificate::from_json(&json).unwrap();
        assert_eq!(back.lambda(), cert.lambda());
        assert_eq!(back.working_generators().0, cert.working_generators().0);
        assert_eq!(back.essential_walls().1, cert.essential_walls().1);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let words = random_reduced_words(&mut rng, 25, 10);
        assert!(verify_certificate(&back, &words).unwrap().passed());

        // Swap the u-wall for one of the wrong type; designated walls for
        // u-letters then stop separating.
        let mut tampered = json.clone();
        tampered["h_u"] = serde_json::json!({"type": "v2", "base": "1"});
        let bad = QICertificate::from_json(&tampered).unwrap();
        let probe = vec![FreeWord::generator(0)];
        let report = verify_certificate(&bad, &probe).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn primitive_roots_divide_out_powers() {
        let pent = pentagon();
        let g = elt(&pent, "v1");
        let (root, k) = primitive_root(&g.pow(3)).unwrap();
        assert_eq!((root.to_text(), k), ("v1".to_owned(), 3));

        let (root, k) = primitive_root(&elt(&pent, "v1 v3").pow(2)).unwrap();
        assert_eq!((root.to_text(), k), ("v1 v3".to_owned(), 2));

        // In the commuting pair a^2 b^2 the root is not a canonical prefix.
        let square = DefiningGraph::complete(&["a", "b"]).unwrap();
        let (root, k) = primitive_root(&elt(&square, "a a b b")).unwrap();
        assert_eq!((root.to_text(), k), ("a b".to_owned(), 2));

        let (root, k) = primitive_root(&elt(&square, "a b")).unwrap();
        assert_eq!((root.to_text(), k), ("a b".to_owned(), 1));

        // Conjugate powers keep conjugate roots; v3 does not commute with
        // v1, so the conjugator survives.
        let g = elt(&pent, "v3 v1 v1 v3^-1");
        let (root, k) = primitive_root(&g).unwrap();
        assert_eq!((root.to_text(), k), ("v3 v1 v3^-1".to_owned(), 2));
        assert_eq!(root.pow(2), g);

        assert!(matches!(
            primitive_root(&GroupElement::identity(&pent)).unwrap_err(),
            Error::IdentityInput { .. }
        ));
    }

    #[test]
    fn classification_covers_all_types() {
        let square = DefiningGraph::complete(&["a", "b"]).unwrap();
        let pent = pentagon();
        let free = edgeless2();

        let one = GroupElement::identity(&pent);
        assert_eq!(classify_subgroup(&one, &one).unwrap().name(), "trivial");

        let g = elt(&pent, "v1 v3");
        let c = classify_subgroup(&one, &g.pow(2)).unwrap();
        match c {
            Classification::Z { ref root } => assert_eq!(*root, g),
            ref other => panic!("expected Z, got {}", other.name()),
        }

        let c = classify_subgroup(&g, &g.pow(3)).unwrap();
        match c {
            Classification::Z { ref root } => assert_eq!(*root, g),
            ref other => panic!("expected Z, got {}", other.name()),
        }

        let c = classify_subgroup(&elt(&square, "a"), &elt(&square, "b")).unwrap();
        assert_eq!(c.name(), "Z^2");

        let c = classify_subgroup(&elt(&free, "a"), &elt(&free, "b")).unwrap();
        match c {
            Classification::F2 { ref certificate } => assert_eq!(certificate.lambda(), 1),
            ref other => panic!("expected F2, got {}", other.name()),
        }

        // The tag is symmetric and conjugation-invariant.
        let u = elt(&pent, "v1 v2");
        let v = elt(&pent, "v3");
        let t = elt(&pent, "v5 v4");
        let base = classify_subgroup(&u, &v).unwrap().name();
        assert_eq!(classify_subgroup(&v, &u).unwrap().name(), base);
        assert_eq!(
            classify_subgroup(&u.conjugate_by(&t).unwrap(), &v.conjugate_by(&t).unwrap())
                .unwrap()
                .name(),
            base
        );
    }

    #[test]
    fn random_pentagon_pairs_certify_and_verify() {
        let pent = pentagon();
        let gens = ["v1", "v2", "v3", "v4", "v5"];
        let mut rng = ChaCha8Rng::seed_from_u64(909);
        let mut built = 0;
        while built < 6 {
            let mut random_elt = || {
                let len = rng.gen_range(1..=3);
                let mut text = String::new();
                for i in 0..len {
                    if i > 0 {
                        text.push(' ');
                    }
                    text.push_str(gens[rng.gen_range(0..5)]);
                    if rng.gen_bool(0.4) {
                        text.push_str("^-1");
                    }
                }
                elt(&pent, &text)
            };
            let u0 = random_elt();
            let v0 = random_elt();
            if u0.is_identity() || v0.is_identity() || u0.commutes_with(&v0).unwrap() {
                continue;
            }
            let cert = build_certificate(&u0, &v0).unwrap();
            assert!(cert.lambda() >= 1);
            let words = random_reduced_words(&mut rng, 30, 10);
            let report = verify_certificate(&cert, &words).unwrap();
            assert!(
                report.passed(),
                "pair ({}, {}): {:?}",
                u0.to_text(),
                v0.to_text(),
                report.violations
            );
            built += 1;
        }
    }
}
