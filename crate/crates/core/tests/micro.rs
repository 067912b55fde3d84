//! Randomized small instances checked against brute-force enumeration.

mod common;

use common::props;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lookup_space_is_sound_and_complete((cat, state, pick,) in props::lookup_space_is_sound_and_complete_inputs()) {
        props::lookup_space_is_sound_and_complete(cat, state, pick)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn lookup_intersection_matches_membership((cat, s1, s2, pick, seed,) in props::lookup_intersection_matches_membership_inputs()) {
        props::lookup_intersection_matches_membership(cat, s1, s2, pick, seed)?;
    }

    #[test]
    fn syntactic_intersection_matches_consistency((v1, v2, w, cut, seed,) in props::syntactic_intersection_matches_consistency_inputs()) {
        props::syntactic_intersection_matches_consistency(v1, v2, w, cut, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn combined_space_is_sound_and_complete_for_a_restricted_grammar((t, state, picks,) in props::combined_space_is_sound_and_complete_for_a_restricted_grammar_inputs()) {
        props::combined_space_is_sound_and_complete_for_a_restricted_grammar(t, state, picks)?;
    }

    #[test]
    fn combined_intersection_matches_membership((t, s1, s2, pick, seed,) in props::combined_intersection_matches_membership_inputs()) {
        props::combined_intersection_matches_membership(t, s1, s2, pick, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn extraction_finds_the_best_lookup((cat, state, pick,) in props::extraction_finds_the_best_lookup_inputs()) {
        props::extraction_finds_the_best_lookup(cat, state, pick)?;
    }

    #[test]
    fn extraction_finds_the_best_syntactic_program((v, w,) in props::extraction_finds_the_best_syntactic_program_inputs()) {
        props::extraction_finds_the_best_syntactic_program(v, w)?;
    }

    #[test]
    fn extraction_finds_the_best_intersected_program((v1, v2, seed,) in props::extraction_finds_the_best_intersected_program_inputs()) {
        props::extraction_finds_the_best_intersected_program(v1, v2, seed)?;
    }

    #[test]
    fn extraction_finds_the_best_combined_program((t, state, pick,) in props::extraction_finds_the_best_combined_program_inputs()) {
        props::extraction_finds_the_best_combined_program(t, state, pick)?;
    }
}
