//! Cross-validates the certificate pipeline against the brute-force oracle:
//! walls the pipeline declares essential must meet the subgroup tree in a
//! single point, and classified pairs must agree with an exhaustive
//! relation search.

use std::sync::Arc;

use anyhow::{ensure, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raagkit::axes;
use raagkit::oracle::{self, WallRef};
use raagkit::qi::{
    self, build_certificate, classify_subgroup, find_essential_on_v, minimize_triple,
    Classification, EssentialSituation, QICertificate,
};
use raagkit::{DefiningGraph, GroupElement, Hyperplane};

fn pentagon() -> Arc<DefiningGraph> {
    DefiningGraph::cycle(&["v1", "v2", "v3", "v4", "v5"]).unwrap()
}

fn elt(graph: &Arc<DefiningGraph>, text: &str) -> GroupElement {
    GroupElement::parse(graph, text).unwrap()
}

fn random_element(rng: &mut ChaCha8Rng, graph: &Arc<DefiningGraph>, max_len: usize) -> GroupElement {
    let n = graph.vertex_count();
    let len = rng.gen_range(1..=max_len);
    let mut text = String::new();
    for i in 0..len {
        if i > 0 {
            text.push(' ');
        }
        text.push_str(graph.vertex_name(rng.gen_range(0..n)));
        if rng.gen_bool(0.4) {
            text.push_str("^-1");
        }
    }
    elt(graph, &text)
}

/// Exhaustive tree-crossing count for a wall, in the same basepoint
/// coordinates the certificate uses.
fn tree_crossings(cert: &QICertificate, h: &Hyperplane, bound: usize) -> Result<usize> {
    let (wu, wv) = cert.working_generators();
    let v_form = axes::standard_form(wv)?;
    let wall = WallRef::new(h.base().clone(), h.vertex())?;
    Ok(oracle::essential_crossing_count(wu, wv, v_form.axis_vertex(), &wall, bound)?)
}

#[test]
fn pipeline_essential_walls_are_tree_singletons() -> Result<()> {
    let free = DefiningGraph::free(&["a", "b"])?;
    let pent = pentagon();

    let mut pairs: Vec<(Arc<DefiningGraph>, GroupElement, GroupElement)> = vec![
        (free.clone(), elt(&free, "a"), elt(&free, "b")),
        (free.clone(), elt(&free, "a b"), elt(&free, "b a")),
        (pent.clone(), elt(&pent, "v1"), elt(&pent, "v3")),
        (pent.clone(), elt(&pent, "v1 v2"), elt(&pent, "v3 v4")),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7101);
    while pairs.len() < 12 {
        let u = random_element(&mut rng, &pent, 3);
        let v = random_element(&mut rng, &pent, 3);
        if u.is_identity() || v.is_identity() || u.commutes_with(&v)? {
            continue;
        }
        pairs.push((pent.clone(), u, v));
    }

    for (graph, u, v) in pairs {
        let cert = build_certificate(&u, &v)?;
        let (h_u, h_v) = cert.essential_walls();
        let cu = tree_crossings(&cert, h_u, 5)?;
        let cv = tree_crossings(&cert, h_v, 5)?;
        ensure!(
            cu == 1 && cv == 1,
            "pair ({}, {}) on {:?}: tree crossings h_u = {cu}, h_v = {cv}",
            u.to_text(),
            v.to_text(),
            graph.vertex_names()
        );
    }
    Ok(())
}

#[test]
fn found_essential_walls_agree_with_the_oracle_count() -> Result<()> {
    let pent = pentagon();
    let mut rng = ChaCha8Rng::seed_from_u64(7202);
    let mut checked = 0;
    while checked < 10 {
        let u = random_element(&mut rng, &pent, 3);
        let v = random_element(&mut rng, &pent, 3);
        if u.is_identity() || v.is_identity() || u.commutes_with(&v)? {
            continue;
        }
        let cfg = minimize_triple(&u, &v)?;
        let h = find_essential_on_v(&cfg)?;
        assert!(qi::is_essential(&h, &cfg, EssentialSituation::OnV)?);

        // Count in basepoint coordinates with the minimized pair.
        let v_form = axes::standard_form(cfg.shifted_v())?;
        let wall = WallRef::new(h.base().clone(), h.vertex())?;
        let count = oracle::essential_crossing_count(
            cfg.shifted_u(),
            cfg.shifted_v(),
            v_form.axis_vertex(),
            &wall,
            5,
        )?;
        ensure!(
            count == 1,
            "pair ({}, {}): essential wall {h} crosses the tree {count} times",
            u.to_text(),
            v.to_text()
        );
        checked += 1;
    }
    Ok(())
}

#[test]
fn classification_agrees_with_relation_search() -> Result<()> {
    let square = DefiningGraph::complete(&["a", "b"])?;
    let a = elt(&square, "a");
    let b = elt(&square, "b");
    match classify_subgroup(&a, &b)? {
        Classification::Z2 { .. } => {}
        other => panic!("expected Z^2, got {}", other.name()),
    }
    // The oracle confirms the commuting relation for the abelian pair.
    let relation = oracle::search_relation(&square, &[a.clone(), b.clone()], 4)?;
    ensure!(relation.is_some(), "no relation found for commuting generators");

    let pent = pentagon();
    let g = elt(&pent, "v1 v3");
    match classify_subgroup(&g, &g.pow(3))? {
        Classification::Z { root } => ensure!(root == g),
        other => panic!("expected Z, got {}", other.name()),
    }

    // Certified free pairs admit no short relation.
    let mut rng = ChaCha8Rng::seed_from_u64(7303);
    let mut checked = 0;
    while checked < 5 {
        let u = random_element(&mut rng, &pent, 2);
        let v = random_element(&mut rng, &pent, 2);
        if u.is_identity() || v.is_identity() || u.commutes_with(&v)? {
            continue;
        }
        let classified = classify_subgroup(&u, &v)?;
        match classified {
            Classification::F2 { certificate } => {
                ensure!(certificate.lambda() >= 1);
                let relation = oracle::search_relation(&pent, &[u.clone(), v.clone()], 6)?;
                ensure!(
                    relation.is_none(),
                    "certified pair ({}, {}) has relation {relation:?}",
                    u.to_text(),
                    v.to_text()
                );
            }
            other => panic!(
                "non-commuting pair ({}, {}) classified {}",
                u.to_text(),
                v.to_text(),
                other.name()
            ),
        }
        checked += 1;
    }
    Ok(())
}

#[test]
fn certificates_bound_distortion_against_ball_distances() -> Result<()> {
    // Independent length check: oracle distances inside a radius-6 ball
    // agree with the certified sandwich for short subgroup words.
    let pent = pentagon();
    let cert = build_certificate(&elt(&pent, "v1"), &elt(&pent, "v3"))?;
    let (wu, wv) = cert.working_generators();
    let ball = oracle::build_ball(&pent, 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7404);
    let words = qi::random_reduced_words(&mut rng, 40, 6);
    for w in &words {
        let image = qi::evaluate_free_word(w, &[wu.clone(), wv.clone()])?;
        if let Some(dist) =
            ball.distance(&GroupElement::identity(&pent), &image)?
        {
            let n = w.len() as u64;
            ensure!(n <= dist as u64 && dist as u64 <= cert.lambda() * n);
        }
    }
    Ok(())
}
