import itertools

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from radialgram.embedding import (
    PAIR_CASES,
    EmbeddingVector,
    classify_pair,
    embed,
    pairwise_sq_distances,
    sq_distance,
)
from radialgram.words import FreeWord, left_quotient, lp_length_pow, parse_word

from oracles import naive_quotient_sq_length

free_words = st.lists(st.tuples(st.integers(1, 4), st.integers(-4, 4).filter(bool)), max_size=7).map(FreeWord)


def small_words():
    out = [FreeWord()]
    exps = [k for k in range(-3, 4) if k]
    for b in range(1, 4):
        for gens in itertools.product(range(1, 4), repeat=b):
            if any(gens[i] == gens[i + 1] for i in range(b - 1)):
                continue
            for ks in itertools.product(exps, repeat=b):
                out.append(FreeWord._raw(tuple(zip(gens, ks))))
    return out


def test_embed_examples():
    assert len(embed(FreeWord())) == 0
    v = embed(parse_word("g1^2 g2^-1"))
    assert v.coeffs == {"g1": 2, "g1^2 g2": -1}
    assert embed(parse_word("g1^3")).sq_norm == 9


def test_sq_distance_examples():
    u, v = embed(parse_word("g1^2 g2^-1")), embed(parse_word("g1"))
    assert sq_distance(u, u) == 0
    assert sq_distance(u, v) == 2
    assert lp_length_pow(left_quotient(parse_word("g1"), parse_word("g1^2 g2^-1")), 2) == 2
    g = parse_word("g2^-3 g1 g3^2")
    assert sq_distance(embed(g), EmbeddingVector()) == 14


def test_classify_examples():
    assert classify_pair(parse_word("g1^2"), parse_word("g1^2 g2")) == "prefix"
    assert classify_pair(parse_word("g1^-1"), parse_word("g1^2")) == "opposite-sign"
    assert classify_pair(parse_word("g2"), parse_word("g1")) == "new-generator"
    assert classify_pair(parse_word("g1 g2"), parse_word("g1^3")) == "interior-split"


@given(free_words, free_words)
def test_isometry_against_letter_oracle(f, g):
    d = sq_distance(embed(f), embed(g))
    assert d == naive_quotient_sq_length(f.blocks, g.blocks)
    assert classify_pair(f, g) in PAIR_CASES


@given(free_words)
def test_norm_is_squared_length(g):
    assert embed(g).sq_norm == lp_length_pow(g, 2)


def test_exhaustive_count_and_injective():
    words = small_words()
    # 1 + 3*6 + (3*2)*6^2 + (3*2*2)*6^3 reduced words
    assert len(words) == 2827
    vecs = [embed(w) for w in words]
    assert len(set(vecs)) == len(words)


def test_pairwise_matrix_matches_scalar():
    rng = np.random.default_rng(5)
    words = small_words()
    pick = [words[i] for i in rng.choice(len(words), 60, replace=False)]
    D = pairwise_sq_distances([embed(w) for w in pick])
    for i, f in enumerate(pick):
        for j, g in enumerate(pick):
            assert D[i, j] == sq_distance(embed(f), embed(g)) == naive_quotient_sq_length(f.blocks, g.blocks)


def test_json_roundtrip():
    v = embed(parse_word("g1^2 g2^-1"))
    assert v.to_json() == {"coeffs": [{"key": "g1", "c": 2}, {"key": "g1^2 g2", "c": -1}]}
    assert EmbeddingVector.from_json(v.to_json()) == v
