"""Derivative-free minimization over orthonormal frames.

Objectives live on the set of n x q matrices with orthonormal columns.
The search is Givens-rotation coordinate descent: for every coordinate
plane we line-search the rotation angle (coarse scan plus golden
section), sweeping until a full sweep no longer improves the value.
Restarts draw Haar-random starting frames from both orientation
components (reflections are not reachable by rotations, and some
objectives are orientation-sensitive).

Dimensions here are tiny (n <= 8), objectives are cheap, and no
gradients are required, which is why coordinate descent is preferred
over Riemannian gradient schemes.  Minima are not certified global;
restarts mitigate local traps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "FrameProblem",
    "FrameResult",
    "haar_frame",
    "givens_descent",
    "minimize_over_frames",
    "min_eigenpair",
]

_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class FrameProblem:
    n: int
    q: int
    objective: Callable[[np.ndarray], float]
    restarts: int = 16
    seed: int = 0
    tol: float = 1e-10
    max_sweeps: int = 60

    def __post_init__(self):
        if not (1 <= self.q <= self.n):
            raise ValueError("need 1 <= q <= n")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class FrameResult:
    frame: np.ndarray       # (n, q) orthonormal columns
    value: float
    converged: bool
    sweeps: int
    full_frame: np.ndarray  # the (n, n) orthogonal matrix carrying it


def haar_frame(rng: np.random.Generator, n: int,
               det_sign: Optional[int] = None) -> np.ndarray:
    """Haar-random orthogonal matrix; optionally force the determinant sign."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    Q = Q * s
    if det_sign is not None and np.linalg.det(Q) * det_sign < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def _reorthonormalize(Q: np.ndarray) -> np.ndarray:
    U, R = np.linalg.qr(Q)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return U * s


def _rotate_cols(Q: np.ndarray, i: int, j: int, theta: float) -> np.ndarray:
    out = Q.copy()
    c, s = np.cos(theta), np.sin(theta)
    out[:, i] = c * Q[:, i] + s * Q[:, j]
    out[:, j] = -s * Q[:, i] + c * Q[:, j]
    return out


def givens_descent(Q0: np.ndarray, objective, q: int, tol: float = 1e-10,
                   max_sweeps: int = 60, coarse: int = 17):
    """Coordinate descent over rotation planes starting from Q0 (n x n).

    Minimizes objective(Q[:, :q]).  Planes lying entirely in the
    discarded columns are skipped.  Returns (Q, value, converged, sweeps).
    """
    n = Q0.shape[0]
    planes = [(i, j) for i in range(n) for j in range(i + 1, n) if i < q]
    Q = Q0.copy()
    value = float(objective(Q[:, :q]))
    converged = False
    sweeps = 0
    thetas = np.linspace(-np.pi, np.pi, coarse, endpoint=False)
    for sweeps in range(1, max_sweeps + 1):
        start_value = value
        for (i, j) in planes:
            def phi(theta):
                return float(objective(_rotate_cols(Q, i, j, theta)[:, :q]))

            vals = [phi(t) for t in thetas]
            k = int(np.argmin(vals))
            if vals[k] > value:
                # keep the current angle as the incumbent
                best_t, best_v = 0.0, value
            else:
                best_t, best_v = float(thetas[k]), vals[k]
            step = thetas[1] - thetas[0]
            lo, hi = best_t - step, best_t + step
            # golden-section refinement inside the bracket
            m1 = hi - _GOLDEN * (hi - lo)
            m2 = lo + _GOLDEN * (hi - lo)
            f1, f2 = phi(m1), phi(m2)
            for _ in range(48):
                if f1 <= f2:
                    hi, m2, f2 = m2, m1, f1
                    m1 = hi - _GOLDEN * (hi - lo)
                    f1 = phi(m1)
                else:
                    lo, m1, f1 = m1, m2, f2
                    m2 = lo + _GOLDEN * (hi - lo)
                    f2 = phi(m2)
            cands = [(best_v, best_t), (f1, m1), (f2, m2)]
            cand_v, cand_t = min(cands, key=lambda t: t[0])
            if cand_v < value:
                Q = _rotate_cols(Q, i, j, cand_t)
                value = cand_v
        Q = _reorthonormalize(Q)
        value = float(objective(Q[:, :q]))
        if start_value - value < tol * (1.0 + abs(value)):
            converged = True
            break
    return Q, value, converged, sweeps


def minimize_over_frames(prob: FrameProblem) -> FrameResult:
    """Best frame over Haar-random restarts (alternating orientations)."""
    rng = np.random.default_rng(prob.seed)
    best = None
    for r in range(max(prob.restarts, 1)):
        Q0 = haar_frame(rng, prob.n, det_sign=1 if r % 2 == 0 else -1)
        Q, value, converged, sweeps = givens_descent(
            Q0, prob.objective, prob.q, prob.tol, prob.max_sweeps)
        if best is None or value < best[0]:
            best = (value, Q, converged, sweeps)
    value, Q, converged, sweeps = best
    return FrameResult(frame=Q[:, :prob.q], value=value, converged=converged,
                       sweeps=sweeps, full_frame=Q)


def min_eigenpair(M: np.ndarray):
    """Smallest eigenvalue and a unit eigenvector of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    scale = 1.0 + float(np.abs(M).max())
    if np.abs(M - M.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return float(w[0]), V[:, 0]
