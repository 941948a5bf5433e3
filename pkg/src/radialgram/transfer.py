"""Witness families that transfer group positive definiteness to the length semigroup.

A length functional theta is a morphism on arbitrarily large subsets when,
for every N and targets s_1..s_M, there are elements g_{n,k} with
``theta(g_{n,j}^-1 g_{m,k}) = s_j + s_k`` for n != m.  This module builds
those elements for the three spaces, checks the defining identity, and
re-derives numerically the averaging inequality that turns a positive
definite radial function on the group into a positive definite function on
the semigroup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .gram import group_gram
from .words import (
    CoordVector,
    FreeWord,
    RealFreeWord,
    identity,
    left_quotient,
    lp_length_pow,
)

__all__ = [
    "FamilySpec",
    "WitnessFamily",
    "FamilyError",
    "RadialityError",
    "pair_index",
    "build_family",
    "build_family_f",
    "build_family_r",
    "build_family_d",
    "BoundCheck",
    "transfer_bound_check",
    "transfer_sweep",
    "SemigroupFunction",
    "radial_to_semigroup",
    "default_probes",
]

FAMILY_SPACES = ("free-int", "free-real", "direct-sum")


class FamilyError(ValueError):
    """A constructed family violates the defining length identity."""


class RadialityError(ValueError):
    """A function takes different values on two words of equal length."""

    def __init__(self, msg: str, witness: tuple):
        super().__init__(msg)
        self.witness = witness


def pair_index(n: int, j: int) -> int:
    """Cantor-style bijection from pairs of positive integers to positive integers."""
    if n < 1 or j < 1:
        raise ValueError("pair_index is defined on positive integers")
    d = n + j - 2
    return d * (d + 1) // 2 + n


@dataclass(frozen=True)
class FamilySpec:
    space: str
    N: int
    targets: tuple
    p: float = 2.0

    def __post_init__(self):
        if self.space not in FAMILY_SPACES:
            raise ValueError(f"unknown space {self.space!r}")
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not self.targets:
            raise ValueError("at least one target is required")
        targets = []
        for s in self.targets:
            if self.space == "free-int":
                if int(s) != s or s < 1:
                    raise ValueError("free-int targets must be positive integers")
                s = int(s)
            else:
                s = float(s)
                if not (math.isfinite(s) and s >= 0):
                    raise ValueError("targets must be nonnegative")
            if s not in targets:  # repeated targets would give coincident elements
                targets.append(s)
        p = 2.0 if self.space == "free-int" else float(self.p)
        if not (0 < p <= 2):
            raise ValueError("p must lie in (0, 2]")
        object.__setattr__(self, "targets", tuple(targets))
        object.__setattr__(self, "p", p)

    @property
    def M(self) -> int:
        return len(self.targets)

    def to_json(self) -> dict:
        return {"space": self.space, "p": self.p, "N": self.N, "targets": list(self.targets)}

    @classmethod
    def from_json(cls, obj: dict) -> "FamilySpec":
        return cls(obj["space"], int(obj["N"]), tuple(obj["targets"]), float(obj.get("p", 2.0)))


@dataclass(frozen=True)
class WitnessFamily:
    spec: FamilySpec
    elements: Mapping  # (n, k) -> word, 1-based

    def ordered(self, N: int | None = None) -> list:
        """Elements in copy-major order; the first N*M entries form the family for N."""
        N = self.spec.N if N is None else N
        return [self.elements[(n, k)] for n in range(1, N + 1) for k in range(1, self.spec.M + 1)]

    def theta(self, w) -> float:
        return lp_length_pow(w, self.spec.p)

    def expected(self, a: tuple, b: tuple):
        return 0 if a == b else self.spec.targets[a[1] - 1] + self.spec.targets[b[1] - 1]

    def observed(self, a: tuple, b: tuple):
        return self.theta(left_quotient(self.elements[a], self.elements[b]))

    def verify(self, tol: float = 1e-12, pairs: Iterable[tuple] | None = None) -> int:
        """Check the length identity on `pairs` (default: all), return how many were checked.

        The identity is exact for free-int; for real spaces the relative
        error must stay below `tol`.
        """
        keys = list(self.elements)
        if pairs is None:
            pairs = ((a, b) for a in keys for b in keys)
        exact = self.spec.space == "free-int"
        count = 0
        for a, b in pairs:
            got, want = self.observed(a, b), self.expected(a, b)
            ok = got == want if exact else abs(got - want) <= tol * max(1.0, abs(want))
            if not ok:
                raise FamilyError(f"theta(g{a}^-1 g{b}) = {got}, expected {want}")
            count += 1
        return count


def build_family_f(spec: FamilySpec) -> WitnessFamily:
    """Copy n, target j: the word ``g_{n,j} g_{n,j-1} ... g_{n,1}`` of squared length j."""
    if spec.space != "free-int":
        raise ValueError("build_family_f needs a free-int spec")
    el = {}
    for n in range(1, spec.N + 1):
        for k, j in enumerate(spec.targets, start=1):
            el[(n, k)] = FreeWord._raw(tuple((pair_index(n, i), 1) for i in range(j, 0, -1)))
    return WitnessFamily(spec, el)


def _lambdas(spec: FamilySpec) -> list[float]:
    return [r ** (1.0 / spec.p) for r in spec.targets]


def build_family_r(spec: FamilySpec) -> WitnessFamily:
    """Copy n, target r_j: the single block ``g_{j,n}^{lambda_j}`` with ``lambda_j^p = r_j``."""
    if spec.space != "free-real":
        raise ValueError("build_family_r needs a free-real spec")
    el = {}
    for n in range(1, spec.N + 1):
        for k, lam in enumerate(_lambdas(spec), start=1):
            el[(n, k)] = RealFreeWord([(pair_index(k, n), lam)]) if lam else identity("free-real")
    return WitnessFamily(spec, el)


def build_family_d(spec: FamilySpec) -> WitnessFamily:
    """Copy n, target r_j: ``lambda_j`` times the coordinate vector e_{j,n}."""
    if spec.space != "direct-sum":
        raise ValueError("build_family_d needs a direct-sum spec")
    el = {}
    for n in range(1, spec.N + 1):
        for k, lam in enumerate(_lambdas(spec), start=1):
            el[(n, k)] = CoordVector({pair_index(k, n): lam})
    return WitnessFamily(spec, el)


def build_family(spec: FamilySpec) -> WitnessFamily:
    return {"free-int": build_family_f, "free-real": build_family_r, "direct-sum": build_family_d}[spec.space](spec)


@dataclass(frozen=True)
class BoundCheck:
    N: int
    quad: float        # averaged cross terms = sum c_k c_j phidot(s_j + s_k)
    bound: float       # -(sum |c|)^2 phi(e) / (N - 1)
    total: float       # full replicated quadratic form on the group, >= 0 for PD phi
    diagonal: float    # within-copy part of `total`
    holds: bool

    def to_json(self) -> dict:
        return {"N": self.N, "quad": self.quad, "bound": self.bound, "total": self.total,
                "diagonal": self.diagonal, "holds": self.holds}


def _bound_from_gram(G: np.ndarray, N: int, c: np.ndarray, phi_e: float, tol: float) -> BoundCheck:
    M = len(c)
    n = N * M
    G = G[:n, :n]
    d = np.tile(c, N)
    total = float(d @ G @ d)
    diagonal = 0.0
    for b in range(N):
        blk = G[b * M:(b + 1) * M, b * M:(b + 1) * M]
        diagonal += float(c @ blk @ c)
    quad = (total - diagonal) / (N * (N - 1))
    l1 = float(np.sum(np.abs(c)))
    bound = -(l1 ** 2) * phi_e / (N - 1)
    scale = tol * max(1.0, l1 ** 2 * abs(phi_e))
    return BoundCheck(N, quad, bound, total, diagonal, quad >= bound - scale)


def transfer_bound_check(phi: Callable, spec: FamilySpec, c: Sequence[float], tol: float = 1e-9,
                         family: WitnessFamily | None = None) -> BoundCheck:
    """Evaluate the replicated group quadratic form and the averaging bound at N = spec.N.

    Coefficients are replicated across the N copies; the within-copy blocks
    are bounded by ``(sum |c|)^2 phi(e)`` per copy and the remaining cross
    blocks average to the semigroup form, which therefore cannot fall below
    ``-(sum |c|)^2 phi(e) / (N - 1)`` when phi is positive definite.
    """
    return transfer_sweep(phi, spec, c, [spec.N], tol=tol, family=family)[0]


def transfer_sweep(phi: Callable, spec: FamilySpec, c: Sequence[float], Ns: Sequence[int],
                   tol: float = 1e-9, family: WitnessFamily | None = None,
                   verify_pairs: int = 2000, seed: int = 0) -> list[BoundCheck]:
    """``transfer_bound_check`` for several N, sharing one family built at max(Ns)."""
    c = np.asarray(c, dtype=float)
    if len(c) != spec.M:
        raise ValueError(f"need {spec.M} coefficients, got {len(c)}")
    Nmax = max(Ns)
    if min(Ns) < 2:
        raise ValueError("N must be at least 2")
    if family is None:
        full = FamilySpec(spec.space, Nmax, spec.targets, spec.p)
        family = build_family(full)
    _spot_verify(family, verify_pairs, seed)
    words = family.ordered(Nmax)
    G = group_gram(words, phi)
    phi_e = float(phi(identity(spec.space)))
    return [_bound_from_gram(G, N, c, phi_e, tol) for N in Ns]


def _spot_verify(family: WitnessFamily, count: int, seed: int):
    keys = list(family.elements)
    if len(keys) ** 2 <= count:
        family.verify()
        return
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(keys), size=(count, 2))
    family.verify(pairs=((keys[i], keys[j]) for i, j in idx))


class SemigroupFunction:
    """Values of a radial function read off on probe words, indexed by length."""

    def __init__(self, values: Mapping[float, float]):
        self.values = dict(values)

    def __call__(self, s: float) -> float:
        if s in self.values:
            return self.values[s]
        for key, v in self.values.items():
            if abs(key - s) <= 1e-12 * max(1.0, abs(s)):
                return v
        raise KeyError(f"no probe for semigroup point {s}")

    def points(self) -> list:
        return sorted(self.values)


def default_probes(points: Iterable[float], space: str = "free-int", p: float = 2.0) -> dict:
    """Two words of each requested length, starting with different generators."""
    probes = {}
    for s in points:
        if space == "free-int":
            n = int(s)
            if n != s or n < 0:
                raise ValueError("free-int points must be nonnegative integers")
            a = FreeWord._raw(tuple((1 + i % 2, 1) for i in range(n)))
            b = FreeWord._raw(tuple((3 + i % 2, -1 if i % 2 == 0 else 1) for i in range(n)))
        else:
            s = float(s)
            full, half = s ** (1.0 / p), (s / 2.0) ** (1.0 / p)
            if space == "free-real":
                a = RealFreeWord([(1, full)]) if full else RealFreeWord()
                b = RealFreeWord([(2, -half), (3, half)]) if half else RealFreeWord()
            else:
                a = CoordVector({1: full})
                b = CoordVector({2: -half, 3: half})
        probes[s] = [a] if a == b else [a, b]
    return probes


def radial_to_semigroup(phi: Callable, probe_words: Mapping[float, Sequence], p: float = 2.0,
                        tol: float = 1e-12) -> SemigroupFunction:
    """Read ``phidot(s) = phi(g)`` off probe words with ``||g||_p^p = s``.

    Raises ``RadialityError`` with the offending pair when two probes of the
    same length disagree by more than `tol`.
    """
    values = {}
    for s, words in probe_words.items():
        words = list(words)
        if not words:
            raise ValueError(f"no probe words for point {s}")
        vals = []
        for w in words:
            length = lp_length_pow(w, p)
            if abs(length - s) > 1e-12 * max(1.0, abs(s)):
                raise ValueError(f"probe {w} has length {length}, not {s}")
            vals.append(float(phi(w)))
        for w, v in zip(words[1:], vals[1:]):
            if abs(v - vals[0]) > tol * max(1.0, abs(vals[0])):
                raise RadialityError(
                    f"phi is not radial: phi({words[0]}) = {vals[0]} but phi({w}) = {v}",
                    (words[0], w, vals[0], v),
                )
        values[s] = vals[0]
    return SemigroupFunction(values)
