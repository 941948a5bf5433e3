"""Radial profiles synthesized from representing measures.

Four profile kinds, each a function on the semigroup of lengths:

``pd-z``       n -> integral of s^n dmu(s), mu on [-1, 1]
``cnd-z``      n -> integral of (1 - s^n) / (1 - s) dnu(s), nu on [-1, 1]
``pd-rplus``   s -> integral of e^{-a s} dmu(a) + b * [s == 0]
``cnd-rplus``  s -> psi0 + c s + b * [s > 0] + integral of (1 - e^{-a s}) dnu(a)

``Radial`` composes a profile with the length functional ``||.||_p^p`` to
get a function on words.  Measures are finite lists of atoms; continuous
densities are approximated with ``gauss_legendre_measure``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import stats

from .gram import theta_matrix
from .words import lp_length_pow

__all__ = [
    "DiscreteMeasure",
    "RadialProfileZ",
    "CndProfileZ",
    "RPlusPdProfile",
    "RPlusCndProfile",
    "Radial",
    "eval_pd_z",
    "eval_cnd_z",
    "eval_pd_rplus",
    "eval_cnd_rplus",
    "geometric_sum",
    "schoenberg_transform",
    "schoenberg_measure",
    "nu_t_from_mu_t",
    "gauss_legendre_measure",
    "profile_from_json",
    "profile_to_json",
    "PROFILE_KINDS",
]

PROFILE_KINDS = ("pd-z", "cnd-z", "pd-rplus", "cnd-rplus")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms ``(loc, w)`` with ``w > 0`` plus a nonnegative weight `b` at infinity."""

    locs: tuple = ()
    weights: tuple = ()
    b: float = 0.0

    def __post_init__(self):
        locs = tuple(float(x) for x in self.locs)
        weights = tuple(float(w) for w in self.weights)
        if len(locs) != len(weights):
            raise ValueError("locs and weights differ in length")
        if not all(math.isfinite(x) for x in locs):
            raise ValueError("atom locations must be finite")
        if not all(math.isfinite(w) and w > 0 for w in weights):
            raise ValueError("atom weights must be positive and finite")
        b = float(self.b)
        if not (math.isfinite(b) and b >= 0):
            raise ValueError("b must be a nonnegative finite number")
        object.__setattr__(self, "locs", locs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple], b: float = 0.0) -> "DiscreteMeasure":
        atoms = list(atoms)
        return cls(tuple(a for a, _ in atoms), tuple(w for _, w in atoms), b)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locs, self.weights))

    @property
    def mass(self) -> float:
        return math.fsum(self.weights) + self.b

    def __len__(self):
        return len(self.locs)

    def sorted(self) -> "DiscreteMeasure":
        order = sorted(range(len(self.locs)), key=lambda i: self.locs[i])
        return DiscreteMeasure(tuple(self.locs[i] for i in order), tuple(self.weights[i] for i in order), self.b)

    def to_json(self) -> dict:
        return {"atoms": [{"loc": x, "w": w} for x, w in self.atoms], "b": self.b}

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteMeasure":
        return cls.from_atoms(((a["loc"], a["w"]) for a in obj.get("atoms", [])), obj.get("b", 0.0))


def _arr(x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    return a, a.ndim == 0


def _check_support(mu: DiscreteMeasure, lo: float, hi: float, what: str, open_lo: bool = False):
    for x in mu.locs:
        if x > hi or x < lo or (open_lo and x == lo):
            raise ValueError(f"{what}: atom at {x} outside the allowed support")


class _Profile:
    kind: str = ""

    def __call__(self, x):
        raise NotImplementedError

    def radial(self, p: float = 2.0) -> "Radial":
        return Radial(self, p)


class RadialProfileZ(_Profile):
    """``n -> sum_i w_i s_i^n`` with ``0^0 = 1``."""

    kind = "pd-z"

    def __init__(self, mu: DiscreteMeasure, strict: bool = True):
        if mu.b:
            raise ValueError("pd-z profiles carry no weight at infinity")
        if strict:
            _check_support(mu, -1.0, 1.0, "pd-z")
        self.mu = mu
        self._s = np.array(mu.locs)
        self._w = np.array(mu.weights)

    @property
    def in_domain(self) -> bool:
        return all(-1.0 <= x <= 1.0 for x in self.mu.locs)

    def __call__(self, n):
        n, scalar = _arr(n)
        if np.any(n < 0):
            raise ValueError("semigroup point must be nonnegative")
        if not self._s.size:
            out = np.zeros_like(n)
        else:
            out = np.tensordot(self._w, np.power.outer(self._s, n), axes=1)
        return float(out) if scalar else out


def geometric_sum(s: float, n):
    """``G(s, n) = sum_{k<n} s^k``; equals (1 - s^n)/(1 - s) off s = 1, and n at s = 1."""
    n, scalar = _arr(n)
    if np.any(n < 0) or np.any(n != np.floor(n)):
        raise ValueError("geometric_sum needs nonnegative integer n")
    nmax = int(n.max()) if n.size else 0
    table = np.concatenate(([0.0], np.cumsum(np.power(float(s), np.arange(nmax)))))
    out = table[n.astype(np.int64)]
    return float(out) if scalar else out


class CndProfileZ(_Profile):
    """``n -> sum_i w_i G(s_i, n)``; vanishes at n = 0."""

    kind = "cnd-z"

    def __init__(self, nu: DiscreteMeasure, strict: bool = True):
        if nu.b:
            raise ValueError("cnd-z profiles carry no weight at infinity")
        if strict:
            _check_support(nu, -1.0, 1.0, "cnd-z")
        self.nu = nu

    def __call__(self, n):
        n, scalar = _arr(n)
        out = np.zeros_like(n)
        for s, w in self.nu.atoms:
            out = out + w * geometric_sum(s, n)
        return float(out) if scalar else out


class RPlusPdProfile(_Profile):
    """``s -> sum_i w_i exp(-a_i s) + b [s == 0]`` on the half line."""

    kind = "pd-rplus"

    def __init__(self, mu: DiscreteMeasure, b: float | None = None, strict: bool = True):
        if strict:
            _check_support(mu, 0.0, math.inf, "pd-rplus")
        self.mu = DiscreteMeasure(mu.locs, mu.weights, 0.0)
        self.b = float(mu.b if b is None else b)
        if self.b < 0:
            raise ValueError("b must be nonnegative")
        self._a = np.array(mu.locs)
        self._w = np.array(mu.weights)

    @property
    def mass(self) -> float:
        return self.mu.mass + self.b

    def __call__(self, s):
        s, scalar = _arr(s)
        if np.any(s < 0):
            raise ValueError("semigroup point must be nonnegative")
        out = np.zeros_like(s)
        if self._a.size:
            out = np.tensordot(self._w, np.exp(-np.multiply.outer(self._a, s)), axes=1)
        # exact equality: the point at infinity is the indicator of {0}
        out = out + self.b * (s == 0.0)
        return float(out) if scalar else out


class RPlusCndProfile(_Profile):
    """``s -> psi0 + c s + b [s > 0] + sum_i w_i (1 - exp(-a_i s))``.

    Only finite truncations of the Levy measure are representable.
    """

    kind = "cnd-rplus"

    def __init__(self, psi0: float = 0.0, c: float = 0.0, b: float = 0.0,
                 nu: DiscreteMeasure | None = None, strict: bool = True):
        if c < 0 or b < 0:
            raise ValueError("c and b must be nonnegative")
        nu = nu if nu is not None else DiscreteMeasure()
        if strict:
            _check_support(nu, 0.0, math.inf, "cnd-rplus", open_lo=True)
        self.psi0, self.c, self.b = float(psi0), float(c), float(b)
        self.nu = DiscreteMeasure(nu.locs, nu.weights, 0.0)
        self._a = np.array(self.nu.locs)
        self._w = np.array(self.nu.weights)

    def __call__(self, s):
        s, scalar = _arr(s)
        if np.any(s < 0):
            raise ValueError("semigroup point must be nonnegative")
        out = self.psi0 + self.c * s + self.b * (s > 0.0)
        if self._a.size:
            out = out + np.tensordot(self._w, -np.expm1(-np.multiply.outer(self._a, s)), axes=1)
        out = np.asarray(out, dtype=float)
        return float(out) if scalar else out


def eval_pd_z(profile: RadialProfileZ, n):
    return profile(n)


def eval_cnd_z(profile: CndProfileZ, n):
    return profile(n)


def eval_pd_rplus(profile: RPlusPdProfile, s):
    return profile(s)


def eval_cnd_rplus(profile: RPlusCndProfile, s):
    return profile(s)


@dataclass(frozen=True)
class Radial:
    """Word function ``g -> profile(||g||_p^p)``."""

    profile: Callable
    p: float = 2.0

    def __call__(self, g) -> float:
        return float(self.profile(lp_length_pow(g, self.p)))

    def gram(self, words) -> np.ndarray:
        return np.asarray(self.profile(theta_matrix(words, self.p)), dtype=float)


class _ExpProfile:
    kind = "schoenberg"

    def __init__(self, inner: Callable, t: float):
        self.inner = inner
        self.t = float(t)

    def __call__(self, x):
        v = np.exp(-self.t * np.asarray(self.inner(x), dtype=float))
        return float(v) if v.ndim == 0 else v


def schoenberg_transform(psi: Callable, t: float) -> Callable:
    """Pointwise ``g -> exp(-t psi(g))``; radial inputs stay radial."""
    if not t > 0:
        raise ValueError("t must be positive")
    if isinstance(psi, Radial):
        return Radial(_ExpProfile(psi.profile, float(t)), psi.p)
    if isinstance(psi, (_Profile, _ExpProfile)):
        return _ExpProfile(psi, float(t))
    return lambda g: math.exp(-t * psi(g))


def nu_t_from_mu_t(mu_t: DiscreteMeasure, t: float) -> DiscreteMeasure:
    """Reweight each atom by ``(1 - s)/t``; atoms at s = 1 receive no mass and are dropped."""
    if not t > 0:
        raise ValueError("t must be positive")
    atoms = [(s, w * (1.0 - s) / t) for s, w in mu_t.atoms if s != 1.0]
    return DiscreteMeasure.from_atoms([(s, w) for s, w in atoms if w > 0])


def schoenberg_measure(profile: CndProfileZ, t: float, tail: float = 1e-17) -> DiscreteMeasure:
    """Atomic measure mu_t on [-1, 1] with ``integral s^n dmu_t = exp(-t psi(n))``.

    An atom (s, w) of nu with s < 1 contributes the factor ``exp(-a (1 - s^n))``
    with ``a = t w / (1 - s)``, which is the law of ``s^K`` for K ~ Poisson(a);
    an atom at s = 1 contributes ``exp(-t w)^n``, a deterministic scaling.  The
    result is the pushforward of the product law, with each Poisson factor
    truncated where its upper tail drops below `tail`.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    scale = 1.0
    locs = np.array([1.0])
    weights = np.array([1.0])
    for s, w in profile.nu.atoms:
        if s == 1.0:
            scale *= math.exp(-t * w)
            continue
        a = t * w / (1.0 - s)
        ks = np.arange(int(a + 20.0 * math.sqrt(a) + 40))
        kmax = int(np.argmax(stats.poisson.sf(ks, a) < tail))
        ks = ks[: kmax + 1]
        pk = stats.poisson.pmf(ks, a)
        pk[-1] += stats.poisson.sf(kmax, a)
        locs = np.multiply.outer(locs, np.power(s, ks)).ravel()
        weights = np.multiply.outer(weights, pk).ravel()
        locs, weights = _prune(*_merge(locs, weights), tail)
    locs = locs * scale
    return DiscreteMeasure(tuple(locs), tuple(weights))


def _prune(locs: np.ndarray, weights: np.ndarray, tail: float):
    # drop the lightest atoms up to total mass `tail`, moving it to the heaviest;
    # every moment moves by at most 2 * tail since |s^n| <= 1
    order = np.argsort(weights)
    cut = int(np.searchsorted(np.cumsum(weights[order]), tail, side="right"))
    if cut == 0:
        return locs, weights
    dropped = float(np.sum(weights[order[:cut]]))
    keep = np.sort(order[cut:])
    locs, weights = locs[keep], weights[keep].copy()
    weights[np.argmax(weights)] += dropped
    return locs, weights


def _merge(locs: np.ndarray, weights: np.ndarray):
    uniq, inv = np.unique(locs, return_inverse=True)
    return uniq, np.bincount(inv, weights=weights)


def gauss_legendre_measure(density: Callable[[np.ndarray], np.ndarray], n: int,
                           lo: float = -1.0, hi: float = 1.0) -> DiscreteMeasure:
    """n-point Gauss-Legendre discretization of ``density(x) dx`` on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w * np.asarray(density(x), dtype=float)
    keep = w > 0
    return DiscreteMeasure(tuple(x[keep]), tuple(w[keep]))


def profile_to_json(profile) -> dict:
    if isinstance(profile, RadialProfileZ):
        return {"kind": "pd-z", "mu": profile.mu.to_json()}
    if isinstance(profile, CndProfileZ):
        return {"kind": "cnd-z", "nu": profile.nu.to_json()}
    if isinstance(profile, RPlusPdProfile):
        return {"kind": "pd-rplus", "mu": profile.mu.to_json(), "b": profile.b}
    if isinstance(profile, RPlusCndProfile):
        return {"kind": "cnd-rplus", "psi0": profile.psi0, "c": profile.c, "b": profile.b,
                "nu": profile.nu.to_json()}
    raise TypeError(f"cannot serialize {type(profile).__name__}")


def profile_from_json(obj: dict, strict: bool = True):
    kind = obj.get("kind")
    if kind == "pd-z":
        return RadialProfileZ(DiscreteMeasure.from_json(obj["mu"]), strict=strict)
    if kind == "cnd-z":
        return CndProfileZ(DiscreteMeasure.from_json(obj["nu"]), strict=strict)
    if kind == "pd-rplus":
        mu = DiscreteMeasure.from_json(obj["mu"])
        return RPlusPdProfile(mu, obj.get("b", mu.b), strict=strict)
    if kind == "cnd-rplus":
        nu = DiscreteMeasure.from_json(obj.get("nu", {"atoms": []}))
        return RPlusCndProfile(obj.get("psi0", 0.0), obj.get("c", 0.0), obj.get("b", 0.0), nu, strict=strict)
    raise ValueError(f"unknown profile kind {kind!r}; expected one of {PROFILE_KINDS}")
