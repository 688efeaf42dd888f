from property_suites import (
    canonicalize_suite, quasi_associativity_suite, skew_symmetry_suite, susy_square_suite,
)


def test_skew_symmetry_on_all_builtin_generator_pairs():
    assert skew_symmetry_suite() == []


def test_susy_squares_to_translation_on_word_suite():
    assert susy_square_suite() == []


def test_quasi_associativity_on_generator_triples():
    assert quasi_associativity_suite() == []


def test_canonicalize_idempotent_on_word_suite():
    assert canonicalize_suite() == []
