"""Explicit Hilbert-space embedding of F_r realizing the squared l^2 length.

For ``g = a1^k1 a2^k2 ... an^kn`` the embedding puts coefficient ``k_j`` on
the basis vector indexed by the prefix word ``a1^k1 ... a_{j-1}^k_{j-1} a_j``.
Squared distances between embedded words are then exactly ``||f^-1 g||_2^2``.
Coefficients are Python integers, so every identity here is checked exactly.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .words import FreeWord, format_word

__all__ = [
    "EmbeddingVector",
    "embed",
    "sq_distance",
    "pairwise_sq_distances",
    "classify_pair",
    "PAIR_CASES",
]

PAIR_CASES = ("prefix", "opposite-sign", "new-generator", "interior-split")


class EmbeddingVector:
    """Finitely supported integer vector keyed by canonical prefix-word strings."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | Iterable[tuple] = ()):
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        clean = {}
        for key, c in items:
            c = int(c)
            if c:
                clean[str(key)] = c
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("EmbeddingVector is immutable")

    def __eq__(self, other):
        return isinstance(other, EmbeddingVector) and other.coeffs == self.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, key: str) -> int:
        return self.coeffs.get(key, 0)

    def __repr__(self):
        return f"EmbeddingVector({self.coeffs!r})"

    @property
    def sq_norm(self) -> int:
        return sum(c * c for c in self.coeffs.values())

    def to_json(self) -> dict:
        return {"coeffs": [{"key": k, "c": c} for k, c in self.coeffs.items()]}

    @classmethod
    def from_json(cls, obj: dict) -> "EmbeddingVector":
        return cls((item["key"], item["c"]) for item in obj["coeffs"])


def embed(g: FreeWord) -> EmbeddingVector:
    if not isinstance(g, FreeWord):
        raise TypeError("embed is defined on FreeWord only")
    coeffs = {}
    blocks = g.blocks
    for j, (a, k) in enumerate(blocks):
        key = FreeWord._raw(blocks[:j] + ((a, 1),))
        coeffs[format_word(key)] = k
    return EmbeddingVector(coeffs)


def sq_distance(u: EmbeddingVector, v: EmbeddingVector) -> int:
    total = 0
    for key, c in u.coeffs.items():
        d = c - v.coeffs.get(key, 0)
        total += d * d
    for key, c in v.coeffs.items():
        if key not in u.coeffs:
            total += c * c
    return total


def pairwise_sq_distances(vectors: Sequence[EmbeddingVector]) -> np.ndarray:
    """All squared distances at once as an int64 matrix (exact while entries fit).

    Uses ``|u|^2 + |v|^2 - 2<u, v>`` on a dense integer design matrix; meant
    for exhaustive campaigns over small words.
    """
    index: dict[str, int] = {}
    for vec in vectors:
        for key in vec.coeffs:
            index.setdefault(key, len(index))
    X = np.zeros((len(vectors), max(len(index), 1)), dtype=np.int64)
    for i, vec in enumerate(vectors):
        for key, c in vec.coeffs.items():
            X[i, index[key]] = c
    if np.abs(X).max(initial=0) > 2**20:
        raise OverflowError("coefficients too large for exact int64 Gram products")
    G = X @ X.T
    sq = np.diag(G)
    return sq[:, None] + sq[None, :] - 2 * G


def _is_prefix_subword(f: tuple, g: tuple) -> bool:
    # f = a1^k1 ... a_{m-1}^k_{m-1} a_m^l with |l| <= |k_m|, same sign
    m = len(f)
    if m == 0:
        return True
    if m > len(g) or f[: m - 1] != g[: m - 1]:
        return False
    (b, l), (a, k) = f[-1], g[m - 1]
    return a == b and (l > 0) == (k > 0) and abs(l) <= abs(k)


def classify_pair(f: FreeWord, g: FreeWord) -> str:
    """Which of the four relative positions of `f` and `g` the pair falls into.

    ``prefix``: one word is a prefix subword of the other (possibly ending
    inside a block).  Otherwise the words first differ at some block, where
    the generators change (``new-generator``), the exponents have opposite
    signs (``opposite-sign``), or the same direction is cut short in the
    interior of a block while the shorter word continues (``interior-split``).
    """
    fb, gb = f.blocks, g.blocks
    if (len(fb), sum(abs(k) for _, k in fb)) > (len(gb), sum(abs(k) for _, k in gb)):
        fb, gb = gb, fb
    if _is_prefix_subword(fb, gb) or _is_prefix_subword(gb, fb):
        return "prefix"
    i = 0
    while fb[i] == gb[i]:
        i += 1
    (b, j), (a, k) = fb[i], gb[i]
    if a != b:
        return "new-generator"
    if (j > 0) != (k > 0):
        return "opposite-sign"
    return "interior-split"
