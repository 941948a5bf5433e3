"""Finite-sample certificates for positive and conditionally negative definiteness.

Group side: Toeplitz-type matrices ``[phi(x_i^-1 x_j)]``.  Semigroup side:
Hankel-type matrices ``[phidot(s_i + s_j)]``.  Decisions come from the full
spectrum, computed by a cyclic Jacobi eigensolver implemented here.

Only real symmetric kernels are handled: every radial function in this
package is real and invariant under inversion, and for such kernels the
complex quadratic forms reduce to the real symmetric case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .words import FreeWord, left_quotient, lp_length_pow, multiply, inverse

__all__ = [
    "GramReport",
    "jacobi_eigenvalues",
    "default_tol",
    "group_gram",
    "semigroup_gram",
    "check_psd",
    "check_cnd",
    "parity_identity_check",
    "theta_matrix",
]


@dataclass(frozen=True)
class GramReport:
    matrix: np.ndarray = field(repr=False)
    min_eig: float
    max_eig: float
    tol: float
    mode: str
    verdict: str

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
            "tol": self.tol,
            "verdict": self.verdict,
        }


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # n-1 rounds of n/2 disjoint pairs covering every (p, q) once (n even)
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        p = np.array(players[: n // 2])
        q = np.array(players[n // 2 :][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues(A: np.ndarray, rtol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in round-robin order, one round of disjoint pairs
    at a time, until the off-diagonal Frobenius norm drops below
    ``rtol * ||A||_F``.  Returns the eigenvalues in ascending order.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix expected")
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    A = 0.5 * (A + A.T)
    if n == 1:
        return A.diagonal().copy()
    m = n + (n % 2)
    if m != n:
        # pad with a decoupled zero row/column; its eigenvalue is removed below
        B = np.zeros((m, m))
        B[:n, :n] = A
        A = B
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n)
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        # direct norm: the difference ||A||^2 - ||diag||^2 cancels tiny entries
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off < rtol * norm:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            active = apq != 0.0
            if not active.any():
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            with np.errstate(over="ignore", divide="ignore"):
                tau = (A[Q, Q] - A[P, P]) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            rp, rq = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * rp - s[:, None] * rq
            A[Q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = cp * c[None, :] - cq * s[None, :]
            A[:, Q] = cp * s[None, :] + cq * c[None, :]
            A[P, Q] = 0.0
            A[Q, P] = 0.0
    eig = A.diagonal().copy()
    if m != n:
        # the padding index n-th row stayed decoupled, drop its diagonal entry
        eig = np.delete(eig, n)
    return np.sort(eig)


def default_tol(M: np.ndarray) -> float:
    n = M.shape[0]
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    return max(1e-9 * n * scale, np.finfo(float).tiny)


def _as_symmetric(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("square matrix expected")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def check_psd(M, tol: float | None = None) -> GramReport:
    """Accept iff the smallest eigenvalue is at least ``-tol``."""
    M = _as_symmetric(M)
    if tol is None:
        tol = default_tol(M)
    if tol <= 0:
        raise ValueError("tol must be positive")
    eig = jacobi_eigenvalues(M)
    lo = float(eig[0]) if eig.size else 0.0
    hi = float(eig[-1]) if eig.size else 0.0
    return GramReport(M, lo, hi, float(tol), "pd", "accept" if lo >= -tol else "reject")


def check_cnd(M, tol: float | None = None) -> GramReport:
    """Accept iff ``P M P`` has no eigenvalue above `tol`, P the centering projector.

    The range of P is exactly the set of coefficient vectors summing to zero.
    """
    M = _as_symmetric(M)
    if tol is None:
        tol = default_tol(M)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = M.shape[0]
    P = np.eye(n) - np.full((n, n), 1.0 / n) if n else np.zeros((0, 0))
    C = P @ M @ P
    eig = jacobi_eigenvalues(0.5 * (C + C.T))
    lo = float(eig[0]) if eig.size else 0.0
    hi = float(eig[-1]) if eig.size else 0.0
    return GramReport(M, lo, hi, float(tol), "cnd", "accept" if hi <= tol else "reject")


def theta_matrix(words: Sequence, p: float = 2.0, symmetric: bool = True) -> np.ndarray:
    """Matrix of ``||x_i^-1 x_j||_p^p``, computed from the actual group products."""
    n = len(words)
    T = np.zeros((n, n))
    for i in range(n):
        xi = words[i]
        for j in range(i if symmetric else 0, n):
            T[i, j] = lp_length_pow(left_quotient(xi, words[j]), p)
    if symmetric:
        T = np.triu(T) + np.triu(T, 1).T
    return T


def group_gram(words: Sequence, phi: Callable) -> np.ndarray:
    """``M[i, j] = phi(x_i^-1 x_j)``, symmetrized by averaging.

    When `phi` is a radial function (it exposes ``gram(words)``, see
    ``profiles.Radial``) the lengths are computed once and the profile is
    applied to the whole matrix.
    """
    fast = getattr(phi, "gram", None)
    if fast is not None:
        M = np.asarray(fast(words), dtype=float)
    else:
        n = len(words)
        M = np.empty((n, n))
        for i, x in enumerate(words):
            for j, y in enumerate(words):
                M[i, j] = phi(left_quotient(x, y))
    return 0.5 * (M + M.T)


def semigroup_gram(points: Sequence[float], phidot: Callable) -> np.ndarray:
    """``M[i, j] = phidot(s_i + s_j)``."""
    pts = list(points)
    if any(s < 0 for s in pts):
        raise ValueError("semigroup points must be nonnegative")
    n = len(pts)
    M = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            M[i, j] = M[j, i] = phidot(pts[i] + pts[j])
    return M


def parity_identity_check(words: Sequence[FreeWord], c: Sequence[float]) -> tuple[float, float]:
    """Both sides of the parity expansion for the kernel ``(-1)^{||g||_2^2}``.

    lhs is the quadratic form ``sum c_i c_j (-1)^{||g_i g_j^-1||_2^2}``; rhs is
    ``(sum_{even} c_i - sum_{odd} c_j)^2`` split by the parity of ``||g_i||_2^2``.
    """
    if len(words) != len(c):
        raise ValueError("words and c must have equal length")
    c = [float(x) for x in c]
    lhs = 0.0
    for i, gi in enumerate(words):
        for j, gj in enumerate(words):
            sign = -1.0 if lp_length_pow(multiply(gi, inverse(gj)), 2) % 2 else 1.0
            lhs += c[i] * c[j] * sign
    even = sum(ci for ci, g in zip(c, words) if lp_length_pow(g, 2) % 2 == 0)
    odd = sum(ci for ci, g in zip(c, words) if lp_length_pow(g, 2) % 2 == 1)
    return lhs, (even - odd) ** 2
