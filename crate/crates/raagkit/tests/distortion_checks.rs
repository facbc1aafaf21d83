//! Structural properties of free-group automorphisms and fiber growth.
//! The count recurrence used for long sequences is validated against
//! fully materialized words deep enough to catch any cancellation the
//! positivity argument would have missed.

use anyhow::{ensure, Result};
use proptest::prelude::*;
use raagkit::distortion::{apply_power, distortion_sequence, FreeAutomorphism};
use raagkit::word::{Letter, Sign, Word};

#[test]
fn positive_monodromy_never_cancels_through_depth_fifteen() -> Result<()> {
    let aut = FreeAutomorphism::figure_eight();
    let a = Word::parse(aut.graph(), "a")?;
    let samples = distortion_sequence(&aut, &a, 15)?;

    let mut w = a.clone();
    for sample in &samples {
        ensure!(
            w.len() as u128 == sample.fiber_length,
            "materialized length {} disagrees with counted length {} at n = {}",
            w.len(),
            sample.fiber_length,
            sample.n
        );
        ensure!(
            w.letters().iter().all(|l| l.sign == Sign::Plus),
            "a negative letter appeared at n = {}",
            sample.n
        );
        // Substitution length with no cancellation: each letter
        // contributes exactly its image's length.
        let substituted: usize = w.letters().iter().map(|l| aut.images()[l.vertex].len()).sum();
        let next = aut.apply(&w)?;
        ensure!(
            next.len() == substituted,
            "free reduction removed letters from a positive substitution at n = {}",
            sample.n
        );
        w = next;
    }
    Ok(())
}

/// Elementary Nielsen maps over rank 2 with their exact inverses.
fn nielsen_pool() -> Vec<FreeAutomorphism> {
    vec![
        FreeAutomorphism::with_inverse(2, &["b", "a"], &["b", "a"]).unwrap(),
        FreeAutomorphism::with_inverse(2, &["a^-1", "b"], &["a^-1", "b"]).unwrap(),
        FreeAutomorphism::with_inverse(2, &["a b", "b"], &["a b^-1", "b"]).unwrap(),
        FreeAutomorphism::with_inverse(2, &["a", "b a"], &["a", "b a^-1"]).unwrap(),
    ]
}

fn compose_moves(moves: &[usize]) -> FreeAutomorphism {
    let pool = nielsen_pool();
    let mut aut = FreeAutomorphism::with_inverse(2, &["a", "b"], &["a", "b"]).unwrap();
    for &i in moves {
        aut = aut.compose(&pool[i]).unwrap();
    }
    aut
}

fn word_from(raw: &[(usize, bool)]) -> Word {
    Word(
        raw.iter()
            .map(|&(v, plus)| Letter::new(v % 2, if plus { Sign::Plus } else { Sign::Minus }))
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn powers_compose_and_substitution_only_shrinks(
        moves in proptest::collection::vec(0usize..4, 0..=3),
        raw in proptest::collection::vec((0usize..2, any::<bool>()), 0..=6),
        m in 0u64..=2,
        n in 0u64..=2,
    ) {
        let aut = compose_moves(&moves);
        let w = word_from(&raw);

        let stepped = apply_power(&aut, &apply_power(&aut, &w, m).unwrap(), n).unwrap();
        let direct = apply_power(&aut, &w, m + n).unwrap();
        prop_assert_eq!(stepped, direct);

        let image = aut.apply(&w).unwrap();
        let substituted: usize =
            w.letters().iter().map(|l| aut.images()[l.vertex].len()).sum();
        prop_assert!(image.len() <= substituted);

        let back = aut.inverse().apply(&image).unwrap();
        let reduced = apply_power(&aut, &w, 0).unwrap();
        prop_assert_eq!(back, reduced);
    }

    #[test]
    fn sequences_agree_with_materialized_powers(
        moves in proptest::collection::vec(0usize..4, 1..=3),
        raw in proptest::collection::vec((0usize..2, any::<bool>()), 1..=4),
        n_max in 1u64..=4,
    ) {
        let aut = compose_moves(&moves);
        let seed = word_from(&raw);
        prop_assume!(!apply_power(&aut, &seed, 0).unwrap().is_empty());

        let samples = distortion_sequence(&aut, &seed, n_max).unwrap();
        for sample in &samples {
            let w = apply_power(&aut, &seed, sample.n).unwrap();
            prop_assert_eq!(w.len() as u128, sample.fiber_length);
            prop_assert_eq!(sample.outer_length, 2 * sample.n + 1);
        }
    }
}
