"""Truncated moment problems on [-1, 1] and finite Laplace inversion on [0, inf).

Feasibility: a sequence m_0..m_L is a moment sequence of a positive measure
on [-1, 1] iff a fixed family of Hankel matrices is positive semidefinite.
For L = 2d these are ``[m_{i+j}]`` and the localized ``[m_{i+j} - m_{i+j+2}]``;
for odd L the localizers by ``1 + x`` and ``1 - x`` are added, which is what
rejects e.g. ``(1, 2)`` where no even-order matrix sees the first moment.

Recovery: the atoms of a k-atomic measure are the eigenvalues of the
symmetric-definite pencil ``([m_{i+j+1}], [m_{i+j}])``, reduced to a
symmetric matrix by Cholesky and diagonalized with the Jacobi solver; the
weights come from nonnegative least squares on the Vandermonde system and
a few Newton steps on the square moment system polish both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .gram import GramReport, check_psd, jacobi_eigenvalues
from .profiles import DiscreteMeasure

__all__ = [
    "MomentSequence",
    "RecoveryResult",
    "FeasibilityResult",
    "RecoveryError",
    "moments_of",
    "hankel",
    "hankel_feasible",
    "recover_measure",
    "recover_laplace",
    "uniqueness_gap",
    "transport_distance",
]


class RecoveryError(ValueError):
    """No admissible measure with the requested number of atoms."""


@dataclass(frozen=True)
class MomentSequence:
    m: tuple

    def __post_init__(self):
        m = tuple(float(x) for x in self.m)
        if not m:
            raise ValueError("a moment sequence needs at least m_0")
        if not all(math.isfinite(x) for x in m):
            raise ValueError("moments must be finite")
        object.__setattr__(self, "m", m)

    @property
    def L(self) -> int:
        return len(self.m) - 1

    def __len__(self):
        return len(self.m)

    def scaled(self, lam: float) -> "MomentSequence":
        return MomentSequence(tuple(lam * x for x in self.m))

    def to_json(self) -> dict:
        return {"m": list(self.m)}

    @classmethod
    def from_json(cls, obj: dict) -> "MomentSequence":
        return cls(tuple(obj["m"]))


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witnesses: dict = field(repr=False)

    @property
    def failing(self) -> list[str]:
        return [name for name, rep in self.witnesses.items() if not rep.accepted]

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "witnesses": {name: rep.to_json() for name, rep in self.witnesses.items()},
        }


@dataclass(frozen=True)
class RecoveryResult:
    measure: DiscreteMeasure
    residual: float
    atoms_found: int
    k_requested: int = 0
    dropped: int = 0

    def to_json(self) -> dict:
        return {
            "measure": self.measure.to_json(),
            "residual": self.residual,
            "atoms_found": self.atoms_found,
            "k_requested": self.k_requested,
            "dropped_atoms": self.dropped,
        }


def moments_of(mu: DiscreteMeasure, L: int) -> MomentSequence:
    s = np.array(mu.locs)
    w = np.array(mu.weights)
    if not s.size:
        return MomentSequence((0.0,) * (L + 1))
    return MomentSequence(tuple(np.power.outer(s, np.arange(L + 1)).T @ w))


def hankel(seq: Sequence[float], size: int, offset: int = 0) -> np.ndarray:
    m = np.asarray(seq, dtype=float)
    i = np.arange(size)
    return m[i[:, None] + i[None, :] + offset]


def hankel_feasible(ms: MomentSequence, tol: float | None = None) -> FeasibilityResult:
    """Decide whether `ms` is a truncated moment sequence of a measure on [-1, 1]."""
    m = np.array(ms.m)
    L = ms.L
    witnesses: dict[str, GramReport] = {}
    d = L // 2
    witnesses["hankel"] = check_psd(hankel(m, d + 1), tol)
    if L >= 2:
        loc = m[:-2] - m[2:]
        witnesses["localized"] = check_psd(hankel(loc, (L - 2) // 2 + 1), tol)
    if L % 2 == 1:
        # degree-(2d+1) localizers by 1 + x and 1 - x
        witnesses["plus"] = check_psd(hankel(m[:-1] + m[1:], d + 1), tol)
        witnesses["minus"] = check_psd(hankel(m[:-1] - m[1:], d + 1), tol)
    return FeasibilityResult(all(r.accepted for r in witnesses.values()), witnesses)


def _pencil_nodes(m: np.ndarray, k: int) -> np.ndarray:
    H0 = hankel(m, k)
    H1 = hankel(m, k, offset=1)
    C = np.linalg.cholesky(H0)
    Ci = np.linalg.inv(C)
    S = Ci @ H1 @ Ci.T
    return jacobi_eigenvalues(0.5 * (S + S.T))


def _nonneg_weights(m: np.ndarray, nodes: np.ndarray, order: np.ndarray | None = None) -> np.ndarray:
    V = np.power.outer(nodes, np.arange(len(m))).T
    scale = 1.0 / np.sqrt(np.sum(V * V, axis=1))
    A, b = V * scale[:, None], m * scale
    if order is not None:
        A, b = A[order], b[order]
    w, _ = nnls(A, b)
    return w


def _newton_polish(m: np.ndarray, nodes: np.ndarray, weights: np.ndarray, iters: int = 8):
    # square system sum_i w_i s_i^n = m_n, n < 2k
    k = len(nodes)
    n = np.arange(2 * k)
    s, w = nodes.copy(), weights.copy()
    best = (np.max(np.abs(np.power.outer(s, n).T @ w - m[: 2 * k])), s, w)
    for _ in range(iters):
        P = np.power.outer(s, n).T
        F = P @ w - m[: 2 * k]
        dP = np.zeros_like(P)
        dP[1:] = n[1:, None] * np.power.outer(s, n[1:] - 1).T
        J = np.hstack([P, dP * w[None, :]])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        w_new, s_new = w + step[:k], s + step[k:]
        if np.any(w_new <= 0) or np.any(np.abs(s_new) > 1.0 + 1e-12):
            break
        res = np.max(np.abs(np.power.outer(s_new, n).T @ w_new - m[: 2 * k]))
        s, w = s_new, w_new
        if res < best[0]:
            best = (res, s, w)
        else:
            break
    return best[1], best[2]


def _residual(m: np.ndarray, mu: DiscreteMeasure) -> float:
    if not len(mu):
        return float(np.max(np.abs(m)))
    return float(np.max(np.abs(np.asarray(moments_of(mu, len(m) - 1).m) - m)))


def _recover(m: np.ndarray, k: int, *, rank_rtol: float, root_tol: float, weight_floor: float,
             lo: float = -1.0, hi: float = 1.0, order=None, polish: bool = True):
    L = len(m) - 1
    if 2 * k - 1 > L:
        raise ValueError(f"need moments up to index {2 * k - 1} for k={k}, have L={L}")
    # shrink k while the Hankel matrix is numerically singular
    while k > 0:
        eig = jacobi_eigenvalues(hankel(m, k))
        if eig[0] > rank_rtol * max(eig[-1], 0.0):
            break
        k -= 1
    if k == 0:
        return np.zeros(0), np.zeros(0), 0
    nodes = _pencil_nodes(m, k)
    if nodes[0] < lo - root_tol or nodes[-1] > hi + root_tol:
        raise RecoveryError(f"recovered atom outside [{lo}, {hi}] at k={k}: {nodes}")
    nodes = np.clip(nodes, lo, hi)
    weights = _nonneg_weights(m, nodes, order)
    if polish and lo == -1.0 and hi == 1.0 and np.all(weights > 0):
        nodes, weights = _newton_polish(m, nodes, weights)
    dropped = int(np.sum(weights <= weight_floor * max(m[0], 0.0)))
    keep = weights > weight_floor * max(m[0], 0.0)
    return nodes[keep], weights[keep], dropped


def recover_measure(ms: MomentSequence, k: int, *, rank_rtol: float = 1e-13, root_tol: float = 1e-8,
                    weight_floor: float = 1e-10) -> RecoveryResult:
    """Recover a k-atomic measure on [-1, 1] from the moments m_0..m_{2k-1} (or more).

    If the k x k Hankel matrix is numerically singular, k is reduced until it
    is not; atoms whose weight falls below ``weight_floor * m_0`` are dropped
    and counted in ``RecoveryResult.dropped``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    m = np.array(ms.m)
    if not np.any(m):
        return RecoveryResult(DiscreteMeasure(), 0.0, 0, k, 0)
    if m[0] <= 0:
        raise RecoveryError("m_0 must be positive for a nonzero measure")
    nodes, weights, dropped = _recover(m, k, rank_rtol=rank_rtol, root_tol=root_tol, weight_floor=weight_floor)
    mu = DiscreteMeasure(tuple(nodes), tuple(weights))
    return RecoveryResult(mu, _residual(m, mu), len(mu), k, dropped)


def transport_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """``sum |dw| + sum w |ds|`` after pairing atoms in sorted order; unmatched mass counts fully."""
    a, b = a.sorted(), b.sorted()
    n = min(len(a), len(b))
    d = 0.0
    for (sa, wa), (sb, wb) in zip(a.atoms[:n], b.atoms[:n]):
        d += abs(wa - wb) + min(wa, wb) * abs(sa - sb)
    d += sum(a.weights[n:]) + sum(b.weights[n:]) + abs(a.b - b.b)
    return d


def _shift_moments(m: np.ndarray, c: float) -> np.ndarray:
    # moments of the pushforward under x -> x - c
    L = len(m) - 1
    out = np.zeros(L + 1)
    for n in range(L + 1):
        out[n] = sum(math.comb(n, j) * (-c) ** (n - j) * m[j] for j in range(n + 1))
    return out


def uniqueness_gap(ms: MomentSequence, k: int, trials: int = 8, seed: int = 0, **kwargs) -> float:
    """Largest pairwise transport distance between recoveries under pipeline perturbations.

    Each trial recovers from a reflected and/or shifted copy of the moment
    sequence with a permuted weight system, maps the atoms back, and cleans
    degenerate atoms.  A small gap is numerical evidence that the recovered
    measure does not depend on incidental choices of the pipeline.
    """
    base = recover_measure(ms, k, **kwargs).measure
    rng = np.random.default_rng(seed)
    m = np.array(ms.m)
    rank_rtol = kwargs.get("rank_rtol", 1e-13)
    root_tol = kwargs.get("root_tol", 1e-8)
    floor = kwargs.get("weight_floor", 1e-10)
    found = [base]
    for t in range(trials):
        sign = -1.0 if t % 2 else 1.0
        c = float(rng.uniform(-0.1, 0.1))
        mt = m * sign ** np.arange(len(m))
        mt = _shift_moments(mt, c)
        order = rng.permutation(len(m))
        nodes, weights, _ = _recover(mt, k, rank_rtol=rank_rtol, root_tol=root_tol,
                                     weight_floor=floor, lo=-1.0 - c, hi=1.0 - c, order=order,
                                     polish=False)
        nodes = sign * (nodes + c)
        if weights.size and np.all(np.abs(nodes) <= 1.0 + root_tol):
            nodes = np.clip(nodes, -1.0, 1.0)
            nodes, weights = _newton_polish(m, nodes, weights)
            keep = weights > floor * m[0]
            nodes, weights = nodes[keep], weights[keep]
        found.append(DiscreteMeasure(tuple(nodes), tuple(weights)))
    gap = 0.0
    for i in range(len(found)):
        for j in range(i + 1, len(found)):
            gap = max(gap, transport_distance(found[i], found[j]))
    return gap


def recover_laplace(values: Sequence[tuple[float, float]], k: int, h: float | None = None, *,
                    x_tol: float = 1e-8, **kwargs) -> RecoveryResult:
    """Recover ``phi(s) = sum w_i exp(-a_i s) + b [s == 0]`` from grid samples.

    Samples must include s = 0 and the grid s = h, 2h, ..., 2k h.  With
    ``x_i = exp(-a_i h)`` the samples ``phi(j h) = sum (w_i x_i) x_i^{j-1}``,
    j = 1..2k, are power moments of a measure on (0, 1]; the atom at infinity
    is ``b = phi(0) - sum w_i``.
    """
    table = {float(s): float(v) for s, v in values}
    if 0.0 not in table:
        raise ValueError("samples must include s = 0")
    phi0 = table[0.0]
    if k == 0:
        if phi0 < 0:
            raise RecoveryError("phi(0) < 0")
        mu = DiscreteMeasure((), (), phi0)
        res = max((abs(v) for s, v in table.items() if s > 0), default=0.0)
        return RecoveryResult(mu, res, 0, 0, 0)
    pos = sorted(s for s in table if s > 0)
    if h is None:
        if not pos:
            raise ValueError("no positive sample points")
        h = pos[0]
    grid = []
    for j in range(1, 2 * k + 1):
        s = _lookup(table, j * h)
        grid.append(table[s])
    m = np.array(grid)
    if not np.any(m):
        mu = DiscreteMeasure((), (), max(phi0, 0.0))
        return RecoveryResult(mu, 0.0, 0, k, 0)
    nodes, weights, dropped = _recover(m, k, rank_rtol=kwargs.get("rank_rtol", 1e-13),
                                       root_tol=x_tol, weight_floor=kwargs.get("weight_floor", 1e-10))
    if nodes.size and (nodes[0] <= 0.0 or nodes[-1] > 1.0 + x_tol):
        raise RecoveryError(f"recovered x outside (0, 1]: {nodes}")
    nodes = np.minimum(nodes, 1.0)
    a = -np.log(nodes) / h
    a = np.where(a < 0, 0.0, a) + 0.0
    w = weights / nodes
    b = phi0 - float(np.sum(w))
    if b < -x_tol * max(1.0, abs(phi0)):
        raise RecoveryError(f"negative weight at infinity b={b}")
    b = max(b, 0.0)
    order = np.argsort(a)
    mu = DiscreteMeasure(tuple(a[order]), tuple(w[order]), b)
    res = 0.0
    for s, v in table.items():
        pred = float(np.sum(mu.weights * np.exp(-np.array(mu.locs) * s))) + (b if s == 0.0 else 0.0)
        res = max(res, abs(pred - v))
    return RecoveryResult(mu, res, len(mu), k, dropped)


def _lookup(table: dict, s: float) -> float:
    for key in table:
        if abs(key - s) <= 1e-12 * max(1.0, s):
            return key
    raise ValueError(f"missing sample at s = {s}")
