"""Immersions as order-2 jet providers and their first-order invariants.

A chart hands back, at each parameter point u in R^n, the position of
the immersion together with all first and second partial derivatives
(a :class:`Jet2`).  From that we build an orthonormal tangent/normal
frame and read off the second fundamental form by projecting second
derivatives onto the normal space; the projection kills the tangential
(Christoffel) part automatically.

The ambient is either Euclidean R^N or the radius-R sphere S^N realized
inside R^{N+1}.  The spherical case is handled extrinsically: positions
carry N+1 coordinates, the radial direction is excluded from the normal
frame, and the radial component of the second derivatives (which is the
umbilical part of the sphere inclusion) is discarded after an umbilicity
check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MJet",
    "AmbientSpace",
    "Axis",
    "Domain",
    "Chart",
    "Jet2",
    "FramedPoint",
    "SFF",
    "Invariants",
    "RankError",
    "frames_at",
    "second_fundamental_form",
    "sff_at",
    "invariants",
    "shape_operator",
    "conjugate_sff",
    "first_normal_rank",
    "fd_jet",
    "jet_from_mjets",
]

RANK_RTOL = 1e-8          # immersion fails below this relative singular value
NULLITY_RTOL = 1e-8       # relative threshold for the kernel of alpha
RADIAL_UMBILIC_TOL = 1e-6 # hard failure bound on the discarded radial part
_EPS_CBRT = 7.401486830834377e-06


class RankError(ValueError):
    """The differential does not have full rank at the sampled point."""


# ---------------------------------------------------------------------------
# multivariate order-2 jets (value, gradient, Hessian), used by the catalog
# to assemble closed-form jets of model immersions via exact chain rules.

class MJet:
    """Truncated Taylor data of a scalar function of n variables."""

    __slots__ = ("n", "val", "g", "h")

    def __init__(self, n, val, g=None, h=None):
        self.n = n
        self.val = val
        self.g = np.zeros(n) if g is None else g
        self.h = np.zeros((n, n)) if h is None else h

    @staticmethod
    def var(i, x, n):
        g = np.zeros(n)
        g[i] = 1.0
        return MJet(n, float(x), g, np.zeros((n, n)))

    @staticmethod
    def const(v, n):
        return MJet(n, v, np.zeros(n), np.zeros((n, n)))

    def _coerce(self, other):
        if isinstance(other, MJet):
            return other
        return MJet.const(other, self.n)

    def __add__(self, other):
        o = self._coerce(other)
        return MJet(self.n, self.val + o.val, self.g + o.g, self.h + o.h)

    __radd__ = __add__

    def __neg__(self):
        return MJet(self.n, -self.val, -self.g, -self.h)

    def __sub__(self, other):
        o = self._coerce(other)
        return MJet(self.n, self.val - o.val, self.g - o.g, self.h - o.h)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        h = self.h * o.val + o.h * self.val + np.outer(self.g, o.g) + np.outer(o.g, self.g)
        return MJet(self.n, self.val * o.val, self.g * o.val + o.g * self.val, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self._reciprocal()

    def _reciprocal(self):
        w = 1.0 / self.val
        g = -w * w * self.g
        h = -w * w * self.h + 2.0 * w * w * w * np.outer(self.g, self.g)
        return MJet(self.n, w, g, h)

    def _chain(self, f0, f1, f2):
        return MJet(self.n, f0, f1 * self.g,
                    f1 * self.h + f2 * np.outer(self.g, self.g))

    def sin(self):
        return self._chain(np.sin(self.val), np.cos(self.val), -np.sin(self.val))

    def cos(self):
        return self._chain(np.cos(self.val), -np.sin(self.val), -np.cos(self.val))

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def sqrt(self):
        r = np.sqrt(self.val)
        return self._chain(r, 0.5 / r, -0.25 / (r * self.val))

    def conj(self):
        return MJet(self.n, np.conj(self.val), np.conj(self.g), np.conj(self.h))

    @property
    def real(self):
        return MJet(self.n, np.real(self.val), np.real(self.g), np.real(self.h))

    @property
    def imag(self):
        return MJet(self.n, np.imag(self.val), np.imag(self.g), np.imag(self.h))


def jet_from_mjets(coords: Sequence[MJet]) -> "Jet2":
    """Pack D scalar jets (each in n variables) into one Jet2."""
    n = coords[0].n
    D = len(coords)
    pos = np.array([c.val for c in coords], dtype=float)
    d1 = np.empty((n, D))
    d2 = np.empty((n, n, D))
    for a, c in enumerate(coords):
        d1[:, a] = c.g
        d2[:, :, a] = 0.5 * (c.h + c.h.T)
    return Jet2(pos, d1, d2)


# ---------------------------------------------------------------------------
# ambient, domains, charts

@dataclass(frozen=True)
class AmbientSpace:
    """Euclidean R^N (c=0) or the radius-R sphere S^N in R^{N+1} (c=1)."""

    dim: int                 # manifold dimension N of the ambient
    curvature_flag: int = 0  # 0 Euclidean, 1 sphere
    radius: float = 1.0

    def __post_init__(self):
        if self.curvature_flag not in (0, 1):
            raise ValueError("curvature flag must be 0 or 1")
        if self.curvature_flag == 1 and not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    @property
    def curvature(self) -> float:
        """Sectional curvature of the ambient (1/R^2 on the sphere)."""
        return 0.0 if self.curvature_flag == 0 else 1.0 / self.radius**2

    @property
    def embed_dim(self) -> int:
        return self.dim if self.curvature_flag == 0 else self.dim + 1


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    periodic: bool = False  # periodic axes are sampled on [lo, hi)


@dataclass(frozen=True)
class Domain:
    """Product of intervals and circles describing the parameter box."""

    axes: tuple[Axis, ...]

    @staticmethod
    def box(*bounds) -> "Domain":
        return Domain(tuple(Axis(lo, hi) for lo, hi in bounds))

    @staticmethod
    def circles(k: int) -> "Domain":
        return Domain(tuple(Axis(0.0, 2.0 * np.pi, periodic=True) for _ in range(k)))

    def __add__(self, other: "Domain") -> "Domain":
        return Domain(self.axes + other.axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        lo = np.array([a.lo for a in self.axes])
        hi = np.array([a.hi for a in self.axes])
        return lo + (hi - lo) * rng.random((count, self.dim))

    def grid(self, per_axis: int) -> np.ndarray:
        lines = []
        for a in self.axes:
            if a.periodic:
                lines.append(np.linspace(a.lo, a.hi, per_axis, endpoint=False))
            else:
                lines.append(np.linspace(a.lo, a.hi, per_axis))
        mesh = np.meshgrid(*lines, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class Jet2:
    """Position with all first and second partials at one parameter point."""

    pos: np.ndarray   # (D,)
    d1: np.ndarray    # (n, D) rows are df/du_i
    d2: np.ndarray    # (n, n, D) symmetric in the first two slots

    def __post_init__(self):
        if not np.array_equal(self.d2, self.d2.swapaxes(0, 1)):
            raise ValueError("second derivative array must be symmetric")


@dataclass(frozen=True)
class Chart:
    """Immersed piece of a manifold given by a jet provider.

    ``n = 1`` is allowed for curve factors; the submanifold analyses
    require n >= 2.
    """

    n: int
    ambient: AmbientSpace
    jet_at: Callable[[np.ndarray], Jet2]
    domain: Domain
    name: str = "chart"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("chart dimension must be at least 1")
        if self.domain.dim != self.n:
            raise ValueError("domain dimension does not match chart dimension")

    def position(self, u: np.ndarray) -> np.ndarray:
        return self.jet_at(np.asarray(u, dtype=float)).pos

    @property
    def codim(self) -> int:
        return self.ambient.dim - self.n


@dataclass(frozen=True)
class FramedPoint:
    """Orthonormal tangent/normal frame at one sampled point."""

    u: np.ndarray
    jet: Jet2
    tangent: np.ndarray        # (D, n) columns e_1..e_n
    normal: np.ndarray         # (D, m) columns xi_1..xi_m
    coords: np.ndarray         # (n, n): e_i = sum_p coords[p, i] * d1[p]
    ambient: AmbientSpace

    @property
    def m(self) -> int:
        return self.normal.shape[1]

    def gram_residual(self) -> float:
        F = np.hstack([self.tangent, self.normal])
        return float(np.abs(F.T @ F - np.eye(F.shape[1])).max())


@dataclass(frozen=True)
class SFF:
    """Second fundamental form alpha_{ij}^a in an orthonormal frame.

    ``c`` is the ambient sectional curvature value (0 for Euclidean,
    1/R^2 for the radius-R sphere), which is what the Gauss equation
    consumes.
    """

    alpha: np.ndarray  # (n, n, m), exactly symmetric in (i, j)
    c: float
    radial_residual: float = 0.0

    def __post_init__(self):
        if not np.array_equal(self.alpha, self.alpha.swapaxes(0, 1)):
            raise ValueError("alpha must be symmetric in its tangent slots")
        if self.c < 0:
            raise ValueError("ambient curvature must be nonnegative")

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def m(self) -> int:
        return self.alpha.shape[2]


@dataclass(frozen=True)
class Invariants:
    n: int
    m: int
    S: float
    H: float
    mean_vector: np.ndarray
    traceless_sq: float
    nullity_dim: int


def _symmetrize_pairs(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.swapaxes(0, 1))


def frames_at(chart: Chart, u) -> FramedPoint:
    """Orthonormal tangent frame by Gram-Schmidt on the first derivatives,
    completed to a normal frame (excluding the radial direction on spheres)."""
    u = np.asarray(u, dtype=float)
    jet = chart.jet_at(u)
    n = chart.n
    D = jet.pos.shape[0]
    A = jet.d1.T  # (D, n), columns are coordinate velocities

    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise RankError(
            f"immersion condition fails at u={u.tolist()}: "
            f"singular values {sv.tolist()}")

    Q, R = np.linalg.qr(A)
    # fix signs so the frame depends continuously on the jet
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    Q = Q * signs
    R = R * signs[:, None]
    coords = np.linalg.solve(R.T, np.eye(n)).T  # R^{-1}

    amb = chart.ambient
    if amb.curvature_flag == 1:
        Rad = amb.radius
        if abs(np.linalg.norm(jet.pos) - Rad) > 1e-8 * (1.0 + Rad):
            raise ValueError("jet position is off the ambient sphere")
        radial = jet.pos / np.linalg.norm(jet.pos)
        if np.abs(jet.d1 @ radial).max() > 1e-8 * (1.0 + np.abs(jet.d1).max()):
            raise ValueError("jet velocities are not tangent to the ambient sphere")
        span = np.hstack([Q, radial[:, None]])
    else:
        span = Q

    m = amb.dim - n
    if m < 0:
        raise ValueError("chart dimension exceeds ambient dimension")
    # the orthogonal complement of the spanned columns, via full SVD
    U, _, _ = np.linalg.svd(span, full_matrices=True)
    normal = U[:, span.shape[1]:]
    if normal.shape[1] != m:
        raise ValueError("normal space dimension mismatch")

    return FramedPoint(u=u, jet=jet, tangent=Q, normal=normal,
                       coords=coords, ambient=amb)


def second_fundamental_form(fp: FramedPoint) -> SFF:
    """Project frame-direction second derivatives onto the normal frame."""
    jet, amb = fp.jet, fp.ambient
    C = fp.coords
    d2f = np.einsum("pi,qj,pqd->ijd", C, C, jet.d2)  # second derivs along e_i, e_j
    alpha = _symmetrize_pairs(np.einsum("ijd,dm->ijm", d2f, fp.normal))

    radial_residual = 0.0
    if amb.curvature_flag == 1:
        Rad = amb.radius
        radial = jet.pos / np.linalg.norm(jet.pos)
        rad_comp = np.einsum("ijd,d->ij", d2f, radial)
        target = -np.eye(fp.tangent.shape[1]) / Rad
        scale = 1.0 + np.abs(alpha).max() + 1.0 / Rad
        radial_residual = float(np.abs(rad_comp - target).max() / scale)
        if radial_residual > RADIAL_UMBILIC_TOL:
            raise ValueError(
                f"radial part of the second derivatives is not umbilical "
                f"(residual {radial_residual:.2e}); jet data inconsistent "
                f"with the sphere ambient")

    return SFF(alpha=alpha, c=amb.curvature, radial_residual=radial_residual)


def sff_at(chart: Chart, u) -> SFF:
    return second_fundamental_form(frames_at(chart, u))


def invariants(sff: SFF) -> Invariants:
    """Squared norm, mean curvature, traceless part and relative nullity."""
    n, m = sff.n, sff.m
    S = float(np.sum(sff.alpha * sff.alpha))
    mean = np.einsum("iia->a", sff.alpha) / n
    H = float(np.linalg.norm(mean))
    traceless_sq = S - n * H * H
    flat = sff.alpha.reshape(n, n * m)
    sv = np.linalg.svd(flat, compute_uv=False)
    if sv[0] < 1e-13:
        nullity = n
    else:
        nullity = int(np.sum(sv <= NULLITY_RTOL * sv[0]))
    return Invariants(n=n, m=m, S=S, H=H, mean_vector=mean,
                      traceless_sq=traceless_sq, nullity_dim=nullity)


def shape_operator(sff: SFF, xi) -> np.ndarray:
    """Matrix of A_xi, (A_xi)_{ij} = sum_a xi_a alpha_{ij}^a, for unit xi."""
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-10:
        raise ValueError("normal direction must be a unit vector")
    return np.einsum("ija,a->ij", sff.alpha, xi)


def conjugate_sff(sff: SFF, Q: np.ndarray | None = None,
                  P: np.ndarray | None = None) -> SFF:
    """Re-express alpha in rotated tangent (Q) and normal (P) frames.

    New frame vectors are the columns: e'_i = sum_k Q[k, i] e_k.
    """
    a = sff.alpha
    if Q is not None:
        a = np.einsum("ki,lj,kla->ija", Q, Q, a)
    if P is not None:
        a = np.einsum("ija,ab->ijb", a, P)
    return SFF(alpha=_symmetrize_pairs(a), c=sff.c,
               radial_residual=sff.radial_residual)


def first_normal_rank(sff: SFF, rtol: float = 1e-8) -> int:
    """Dimension of the span of all alpha(X, Y) (the first normal space)."""
    n, m = sff.n, sff.m
    rows = sff.alpha.reshape(n * n, m)
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv.size == 0 or sv[0] < 1e-13:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


# ---------------------------------------------------------------------------
# finite-difference jets of the position map (cross-check oracle)

def fd_jet(position: Callable[[np.ndarray], np.ndarray], u,
           richardson: bool = False) -> Jet2:
    """Second-order central differences of the position map.

    Step per coordinate h_i = cbrt(eps)*(1+|u_i|).
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    f0 = position(u)
    D = f0.shape[0]

    def stencil(scale):
        h = scale * _EPS_CBRT * (1.0 + np.abs(u))
        d1 = np.empty((n, D))
        d2 = np.empty((n, n, D))
        fp = np.empty((n, D))
        fm = np.empty((n, D))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h[i]
            fp[i] = position(u + e)
            fm[i] = position(u - e)
            d1[i] = (fp[i] - fm[i]) / (2.0 * h[i])
            d2[i, i] = (fp[i] - 2.0 * f0 + fm[i]) / (h[i] * h[i])
        for i in range(n):
            for j in range(i + 1, n):
                ei = np.zeros(n); ei[i] = h[i]
                ej = np.zeros(n); ej[j] = h[j]
                fpp = position(u + ei + ej)
                fpm = position(u + ei - ej)
                fmp = position(u - ei + ej)
                fmm = position(u - ei - ej)
                d2[i, j] = d2[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
        return d1, d2

    d1, d2 = stencil(1.0)
    if richardson:
        d1h, d2h = stencil(0.5)
        d1 = (4.0 * d1h - d1) / 3.0
        d2 = (4.0 * d2h - d2) / 3.0
    return Jet2(pos=f0, d1=d1, d2=_symmetrize_pairs(d2))
