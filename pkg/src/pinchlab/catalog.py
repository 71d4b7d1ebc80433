"""Model immersions with closed-form order-2 jets.

Each constructor returns a :class:`~pinchlab.jets.Chart` whose jet
provider is assembled from exact jet arithmetic (no finite differences),
so positions and derivatives are correct to roundoff.  Angle charts of
spheres keep a safety margin away from their polar degeneracies; the
azimuthal angle is periodic.

Available models:

- ``round_sphere``       S^n(R) in R^{n+1}
- ``clifford_torus``     S^k(r) x S^{n-k}(sqrt(1-r^2)) in the unit S^{n+1}
- ``sphere_product``     S^k(r) x S^k(sqrt(R^2-r^2)) in R^{2k+2} (c=0) or
                         inside the unit S^{2k+2} through the slice sphere
                         of radius R <= 1 (c=1)
- ``cp2_veronese``       complex projective plane as rank-one projections,
                         minimally embedded in S^7(r) inside the
                         8-dimensional space of traceless Hermitian forms
- ``ellipsoid``          sum x_i^2 / a_i^2 = 1 in R^{n+1}
- ``rotational``         profile-curve revolution hypersurface in R^{n+1}
- ``curve``              closed parametrized curve in R^m
- ``product_with_curve`` extrinsic product of a closed curve with another
                         model
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import expr
from .jets import (
    AmbientSpace,
    Axis,
    Chart,
    Domain,
    Jet2,
    MJet,
    invariants,
    jet_from_mjets,
    sff_at,
)
from .pinching import pinch_bound

__all__ = [
    "ModelSpec",
    "ProductReport",
    "RotationalCheck",
    "MODEL_INFO",
    "build_model",
    "round_sphere",
    "clifford_torus",
    "sphere_product",
    "cp2_veronese",
    "ellipsoid",
    "rotational",
    "curve_from_components",
    "product_with_curve",
    "curve_curvature",
    "ovaloid_margin",
    "rotational_strict_check",
]

POLAR_MARGIN = 0.2  # angle charts stay this far from their degenerate poles


@dataclass(frozen=True)
class ModelSpec:
    """Identifier plus parameter record, the JSON-facing model handle."""

    id: str
    params: dict

    @staticmethod
    def from_json(obj: dict) -> "ModelSpec":
        if not isinstance(obj, dict) or "id" not in obj:
            raise ValueError("model spec must be an object with an 'id' field")
        params = {k: v for k, v in obj.items() if k != "id"}
        inner = params.pop("params", None)
        if isinstance(inner, dict):
            params.update(inner)
        return ModelSpec(id=obj["id"], params=params)


MODEL_INFO = {
    "round_sphere": {
        "params": {"n": "dimension >= 2 (default 4)", "radius": "R > 0 (default 1)"},
        "what": "round n-sphere of radius R in R^{n+1}",
    },
    "clifford_torus": {
        "params": {"n": "dimension >= 2 (default 4)", "k": "1 <= k <= n-1",
                   "r": "0 < r < 1"},
        "what": "S^k(r) x S^{n-k}(sqrt(1-r^2)) inside the unit (n+1)-sphere",
    },
    "sphere_product": {
        "params": {"k": "factor dimension >= 1 (default 2)", "r": "0 < r < R",
                   "R": "outer radius (R <= 1 when c = 1)", "c": "ambient flag 0|1"},
        "what": "S^k(r) x S^k(sqrt(R^2-r^2)) in R^{2k+2}, or in the unit "
                "(2k+2)-sphere through the radius-R slice sphere",
    },
    "cp2_veronese": {
        "params": {"r": "sphere radius > 0 (default 1)", "chart": "0 or 1"},
        "what": "complex projective plane, minimal in S^7(r) inside the "
                "traceless Hermitian 3x3 forms",
    },
    "ellipsoid": {
        "params": {"semi_axes": "0 < a_1 <= ... <= a_{n+1}"},
        "what": "ellipsoid hypersurface in R^{n+1}",
    },
    "rotational": {
        "params": {"profile": "expression u(x), positive on the range",
                   "n": "dimension >= 2 (default 4)",
                   "x_range": "[lo, hi] profile parameter range"},
        "what": "revolution of the graph of u around the axis, in R^{n+1}",
    },
    "curve": {
        "params": {"components": "list of expressions in one parameter on [0, 2pi)"},
        "what": "closed parametrized curve in R^m",
    },
    "product_with_curve": {
        "params": {"curve": "model spec with id 'curve'",
                   "inner": "model spec for the second factor (Euclidean ambient)",
                   "ell": "2 <= ell <= n-2 for the combined dimension n"},
        "what": "extrinsic product of a closed curve with another model",
    },
}


# ---------------------------------------------------------------------------
# angle-chart helpers

def _sphere_coords(thetas: Sequence[MJet], nvars: int) -> list:
    """Unit-sphere coordinates from nested polar angles (d angles -> d+1)."""
    coords = []
    running = MJet.const(1.0, nvars)
    for t in thetas:
        coords.append(running * t.cos())
        running = running * t.sin()
    coords.append(running)
    return coords


def _sphere_domain(d: int, margin: float = POLAR_MARGIN) -> Domain:
    axes = [Axis(margin, math.pi - margin) for _ in range(d - 1)]
    axes.append(Axis(0.0, 2.0 * math.pi, periodic=True))
    return Domain(tuple(axes))


def _angles_to_mjets(u: np.ndarray, offset: int, count: int, nvars: int):
    return [MJet.var(offset + i, u[offset + i], nvars) for i in range(count)]


# ---------------------------------------------------------------------------
# models

def round_sphere(n: int = 4, radius: float = 1.0) -> Chart:
    if n < 2:
        raise ValueError("round_sphere needs n >= 2")
    if not radius > 0:
        raise ValueError("round_sphere needs radius > 0")

    def jet_at(u: np.ndarray) -> Jet2:
        th = _angles_to_mjets(u, 0, n, n)
        coords = [radius * w for w in _sphere_coords(th, n)]
        return jet_from_mjets(coords)

    return Chart(n=n, ambient=AmbientSpace(dim=n + 1), jet_at=jet_at,
                 domain=_sphere_domain(n), name=f"round_sphere(n={n}, R={radius})",
                 meta={"model": "round_sphere", "n": n, "radius": radius})


def clifford_torus(n: int = 4, k: int = 2, r: float = math.sqrt(0.5)) -> Chart:
    if n < 2 or not (1 <= k <= n - 1):
        raise ValueError("clifford_torus needs n >= 2 and 1 <= k <= n-1")
    if not (0.0 < r < 1.0):
        raise ValueError("clifford_torus needs 0 < r < 1")
    rho = math.sqrt(1.0 - r * r)

    def jet_at(u: np.ndarray) -> Jet2:
        th1 = _angles_to_mjets(u, 0, k, n)
        th2 = _angles_to_mjets(u, k, n - k, n)
        coords = [r * w for w in _sphere_coords(th1, n)]
        coords += [rho * w for w in _sphere_coords(th2, n)]
        return jet_from_mjets(coords)

    dom = Domain(_sphere_domain(k).axes + _sphere_domain(n - k).axes)
    return Chart(n=n, ambient=AmbientSpace(dim=n + 1, curvature_flag=1, radius=1.0),
                 jet_at=jet_at, domain=dom,
                 name=f"clifford_torus(n={n}, k={k}, r={r:g})",
                 meta={"model": "clifford_torus", "n": n, "k": k, "r": r})


def sphere_product(k: int = 2, r: float = 0.6, R: float = 1.0,
                   c: int = 0) -> Chart:
    if k < 1:
        raise ValueError("sphere_product needs k >= 1")
    if not (0.0 < r < R):
        raise ValueError("sphere_product needs 0 < r < R")
    if c not in (0, 1):
        raise ValueError("ambient flag c must be 0 or 1")
    if c == 1 and R > 1.0 + 1e-12:
        raise ValueError("sphere_product inside the unit sphere needs R <= 1")
    rho = math.sqrt(R * R - r * r)
    n = 2 * k
    height = math.sqrt(max(1.0 - R * R, 0.0)) if c == 1 else None

    def jet_at(u: np.ndarray) -> Jet2:
        th1 = _angles_to_mjets(u, 0, k, n)
        th2 = _angles_to_mjets(u, k, k, n)
        coords = [r * w for w in _sphere_coords(th1, n)]
        coords += [rho * w for w in _sphere_coords(th2, n)]
        if c == 1:
            coords.append(MJet.const(height, n))
        return jet_from_mjets(coords)

    dom = Domain(_sphere_domain(k).axes + _sphere_domain(k).axes)
    if c == 0:
        amb = AmbientSpace(dim=2 * k + 2)
    else:
        amb = AmbientSpace(dim=2 * k + 2, curvature_flag=1, radius=1.0)
    return Chart(n=n, ambient=amb, jet_at=jet_at, domain=dom,
                 name=f"sphere_product(k={k}, r={r:g}, R={R:g}, c={c})",
                 meta={"model": "sphere_product", "k": k, "r": r, "R": R, "c": c})


_CP2_SCALE = math.sqrt(1.5)


def cp2_veronese(r: float = 1.0, chart: int = 0) -> Chart:
    """Rank-one Hermitian projections, centered and scaled into S^7(r).

    Coordinates are taken in an orthonormal basis of the traceless
    Hermitian 3x3 forms, so the flat metric of R^8 restricts correctly.
    The normalization |X| = r is validated numerically at build time.
    """
    if not r > 0:
        raise ValueError("cp2_veronese needs r > 0")
    if chart not in (0, 1):
        raise ValueError("cp2_veronese chart must be 0 or 1")
    s = r * _CP2_SCALE
    sq2, sq6 = math.sqrt(2.0), math.sqrt(6.0)

    def jet_at(u: np.ndarray) -> Jet2:
        n = 4
        z1 = MJet(n, complex(u[0], u[1]),
                  np.array([1.0, 1j, 0.0, 0.0]), np.zeros((n, n), dtype=complex))
        z2 = MJet(n, complex(u[2], u[3]),
                  np.array([0.0, 0.0, 1.0, 1j]), np.zeros((n, n), dtype=complex))
        one = MJet.const(complex(1.0, 0.0), n)
        z = [one, z1, z2] if chart == 0 else [z1, one, z2]
        D = (z[0] * z[0].conj() + z[1] * z[1].conj() + z[2] * z[2].conj()).real
        inv = 1.0 / D

        def P(j, k2):
            return z[j] * z[k2].conj() * inv

        # X = s * (P - I/3); only six independent entries are needed
        X11 = (P(0, 0).real - (1.0 / 3.0)) * s
        X22 = (P(1, 1).real - (1.0 / 3.0)) * s
        X33 = (P(2, 2).real - (1.0 / 3.0)) * s
        X12 = P(0, 1) * s
        X13 = P(0, 2) * s
        X23 = P(1, 2) * s
        coords = [
            sq2 * X12.real, sq2 * X12.imag,
            (X11 - X22) * (1.0 / sq2),
            sq2 * X13.real, sq2 * X13.imag,
            sq2 * X23.real, sq2 * X23.imag,
            (X11 + X22 - 2.0 * X33) * (1.0 / sq6),
        ]
        return jet_from_mjets(coords)

    dom = Domain.box(*[(-1.5, 1.5)] * 4)
    chart_obj = Chart(n=4, ambient=AmbientSpace(dim=7, curvature_flag=1, radius=r),
                      jet_at=jet_at, domain=dom,
                      name=f"cp2_veronese(r={r:g}, chart={chart})",
                      meta={"model": "cp2_veronese", "r": r, "chart": chart})
    # validate the normalization instead of trusting the derivation
    for probe in (np.array([0.0, 0.0, 0.0, 0.0]),
                  np.array([0.3, -0.7, 1.1, 0.4]),
                  np.array([-1.2, 0.5, -0.1, 0.9])):
        norm = float(np.linalg.norm(chart_obj.position(probe)))
        if abs(norm - r) > 1e-12 * (1.0 + r):
            raise AssertionError(
                f"projective-plane normalization failed: |X| = {norm!r} != {r!r}")
    return chart_obj


def ellipsoid(semi_axes: Sequence[float]) -> Chart:
    axes = [float(a) for a in semi_axes]
    n = len(axes) - 1
    if n < 2:
        raise ValueError("ellipsoid needs at least three semi-axes")
    if not all(a > 0 for a in axes):
        raise ValueError("semi-axes must be positive")
    if any(axes[i] > axes[i + 1] + 1e-15 for i in range(n)):
        raise ValueError("semi-axes must be sorted increasingly")

    def jet_at(u: np.ndarray) -> Jet2:
        th = _angles_to_mjets(u, 0, n, n)
        coords = [a * w for a, w in zip(axes, _sphere_coords(th, n))]
        return jet_from_mjets(coords)

    return Chart(n=n, ambient=AmbientSpace(dim=n + 1), jet_at=jet_at,
                 domain=_sphere_domain(n),
                 name=f"ellipsoid(a={tuple(round(a, 6) for a in axes)})",
                 meta={"model": "ellipsoid", "semi_axes": axes})


def rotational(profile, n: int = 4, x_range=(-0.5, 0.5),
               validation_points: int = 64) -> Chart:
    """Revolution of the graph of a positive profile u(x) around the axis."""
    if n < 2:
        raise ValueError("rotational needs n >= 2")
    ast = expr.parse(profile) if isinstance(profile, str) else profile
    lo, hi = float(x_range[0]), float(x_range[1])
    if not lo < hi:
        raise ValueError("empty profile range")
    for x in np.linspace(lo, hi, validation_points):
        if expr.eval_value(ast, float(x)) <= 0.0:
            raise ValueError(f"profile is not positive at x = {x:g}")

    def jet_at(u: np.ndarray) -> Jet2:
        t = u[0]
        j = expr.eval_jet2(ast, float(t))
        g = np.zeros(n); g[0] = 1.0
        t_jet = MJet(n, float(t), g, np.zeros((n, n)))
        gu = np.zeros(n); gu[0] = j.d1
        hu = np.zeros((n, n)); hu[0, 0] = j.d2
        u_jet = MJet(n, j.value, gu, hu)
        th = _angles_to_mjets(u, 1, n - 1, n)
        coords = [t_jet] + [u_jet * w for w in _sphere_coords(th, n)]
        return jet_from_mjets(coords)

    dom = Domain((Axis(lo, hi),) + _sphere_domain(n - 1).axes)
    return Chart(n=n, ambient=AmbientSpace(dim=n + 1), jet_at=jet_at, domain=dom,
                 name=f"rotational(u={expr.to_source(ast)!r}, n={n})",
                 meta={"model": "rotational", "profile": expr.to_source(ast),
                       "n": n, "x_range": [lo, hi]})


def curve_from_components(components: Sequence, name: str = "curve") -> Chart:
    asts = [expr.parse(c) if isinstance(c, str) else c for c in components]
    if len(asts) < 2:
        raise ValueError("a curve needs at least two components")

    def jet_at(u: np.ndarray) -> Jet2:
        t = float(u[0])
        pos = np.empty(len(asts))
        d1 = np.empty((1, len(asts)))
        d2 = np.empty((1, 1, len(asts)))
        for i, ast in enumerate(asts):
            j = expr.eval_jet2(ast, t)
            pos[i], d1[0, i], d2[0, 0, i] = j.value, j.d1, j.d2
        return Jet2(pos, d1, d2)

    return Chart(n=1, ambient=AmbientSpace(dim=len(asts)), jet_at=jet_at,
                 domain=Domain.circles(1), name=name,
                 meta={"model": "curve",
                       "components": [expr.to_source(a) for a in asts]})


# ---------------------------------------------------------------------------
# curve geometry and products

def curve_curvature(curve: Chart, t: float) -> float:
    """First curvature of a regular curve, parametrization invariant."""
    jet = curve.jet_at(np.array([t]))
    v = jet.d1[0]
    acc = jet.d2[0, 0]
    speed2 = float(np.dot(v, v))
    if speed2 <= 1e-16:
        raise ValueError(f"vanishing curve speed at t = {t:g}")
    perp = acc - np.dot(acc, v) / speed2 * v
    return float(np.linalg.norm(perp) / speed2)


@dataclass(frozen=True)
class ProductReport:
    n: int
    ell: int
    max_kappa1_sq: float
    kappa_bound: float
    min_gap: float          # min over the factor grid of (bound - S_g)
    feasible: bool


def product_with_curve(curve: Chart, inner: Chart, ell: int,
                       curve_samples: int = 256, inner_samples: int = 200,
                       seed: int = 0):
    """Extrinsic product of a closed curve with a Euclidean-ambient model.

    The factor must satisfy the pinching inequality strictly (for the
    shifted index ell-1) on its sample grid, and the curve's squared
    first curvature is compared against the feasibility bound computed
    from the worst factor point.  Returns (chart, report).
    """
    if curve.n != 1:
        raise ValueError("first factor must be a curve chart")
    if curve.ambient.curvature_flag != 0 or inner.ambient.curvature_flag != 0:
        raise ValueError("the product construction lives in Euclidean ambient")
    n = inner.n + 1
    if not (2 <= ell <= n - 2):
        raise ValueError("need 2 <= ell <= n-2")

    lo, hi = curve.domain.axes[0].lo, curve.domain.axes[0].hi
    j_lo, j_hi = curve.jet_at(np.array([lo])), curve.jet_at(np.array([hi]))
    scale = 1.0 + float(np.abs(j_lo.pos).max())
    if (np.linalg.norm(j_lo.pos - j_hi.pos) > 1e-8 * scale
            or np.linalg.norm(j_lo.d1 - j_hi.d1) > 1e-6 * scale):
        raise ValueError("open curve: endpoint jets do not match")

    rng = np.random.default_rng(seed)
    max_k2 = 0.0
    for t in np.linspace(lo, hi, curve_samples, endpoint=False):
        max_k2 = max(max_k2, curve_curvature(curve, float(t)) ** 2)

    min_gap = math.inf
    for u in inner.domain.sample(inner_samples, rng):
        inv = invariants(sff_at(inner, u))
        gap = pinch_bound(inner.n, ell - 1, inv.H, 0.0) - inv.S
        min_gap = min(min_gap, gap)
    if min_gap <= 0.0:
        raise ValueError(
            f"hypothesis fails: the factor does not satisfy the strict "
            f"pinching inequality (worst gap {min_gap:.3e})")

    kappa_bound = (n - ell) / (n - ell - 1) * min_gap
    feasible = max_k2 <= kappa_bound * (1.0 + 1e-9) + 1e-12
    report = ProductReport(n=n, ell=ell, max_kappa1_sq=max_k2,
                           kappa_bound=kappa_bound, min_gap=min_gap,
                           feasible=feasible)

    m2 = curve.ambient.dim
    m1 = inner.ambient.dim
    inner_chart = inner

    def jet_at(u: np.ndarray) -> Jet2:
        jc = curve.jet_at(u[:1])
        jg = inner_chart.jet_at(u[1:])
        D = m2 + m1
        pos = np.concatenate([jc.pos, jg.pos])
        d1 = np.zeros((n, D))
        d1[0, :m2] = jc.d1[0]
        d1[1:, m2:] = jg.d1
        d2 = np.zeros((n, n, D))
        d2[0, 0, :m2] = jc.d2[0, 0]
        d2[1:, 1:, m2:] = jg.d2
        return Jet2(pos, d1, d2)

    dom = Domain(curve.domain.axes + inner.domain.axes)
    chart = Chart(n=n, ambient=AmbientSpace(dim=m2 + m1), jet_at=jet_at,
                  domain=dom, name=f"product({curve.name}, {inner.name})",
                  meta={"model": "product_with_curve", "ell": ell})
    return chart, report


# ---------------------------------------------------------------------------
# hypersurface verdicts

def ovaloid_margin(chart: Chart, k: int, grid_per_axis: int = 9,
                   random_points: int = 100, seed: int = 0) -> float:
    """min(lambda_1) * sqrt(n/(n-k)) - max(lambda_n) over the sampled grid.

    Nonnegative margin certifies the pinching inequality for a convex
    hypersurface whose principal curvature spread is controlled.
    """
    n = chart.n
    if chart.ambient.dim - n != 1 or chart.ambient.curvature_flag != 0:
        raise ValueError("ovaloid check requires a Euclidean hypersurface")
    if not (1 <= k <= n - 1):
        raise ValueError("need 1 <= k <= n-1")
    rng = np.random.default_rng(seed)
    pts = np.vstack([chart.domain.grid(grid_per_axis),
                     chart.domain.sample(random_points, rng)])
    lo, hi = math.inf, -math.inf
    for u in pts:
        sff = sff_at(chart, u)
        lam = np.linalg.eigvalsh(sff.alpha[:, :, 0])
        if lam.sum() < 0:
            lam = -lam[::-1]
        if lam[0] <= 0.0:
            raise ValueError(
                f"nonpositive principal curvature at u={u.tolist()}; "
                f"not an ovaloid sample")
        lo = min(lo, float(lam[0]))
        hi = max(hi, float(lam[-1]))
    return lo * math.sqrt(n / (n - k)) - hi


@dataclass(frozen=True)
class RotationalCheck:
    strict: bool
    curvature_form_margin: float   # (n-1) l^2 + 2(n-1) l m - (n-3) m^2
    profile_form_margin: float     # distance of u u'' to (-a_n w, b_n w)
    lam: float
    mu: float
    a_n: float
    b_n: float


def rotational_constants(n: int):
    """Interval endpoints for u u'' / (1 + u'^2) in the strictness test."""
    if n < 4:
        raise ValueError("the profile-form constants need n >= 4")
    root = math.sqrt(2.0 * (n - 1) * (n - 2))
    return (root + (n - 1)) / (n - 3), (root - (n - 1)) / (n - 3)


def rotational_strict_check(profile, x: float, n: int = 4) -> RotationalCheck:
    """Evaluate both equivalent strictness criteria for a revolution
    hypersurface and assert that their verdicts agree."""
    ast = expr.parse(profile) if isinstance(profile, str) else profile
    j = expr.eval_jet2(ast, float(x))
    if j.value <= 0.0:
        raise ValueError(f"profile must be positive, got u({x:g}) = {j.value:g}")
    a_n, b_n = rotational_constants(n)
    w = 1.0 + j.d1 * j.d1
    lam = 1.0 / (j.value * math.sqrt(w))
    mu = -j.d2 / w ** 1.5
    curv_margin = (n - 1) * lam * lam + 2.0 * (n - 1) * lam * mu - (n - 3) * mu * mu
    uupp = j.value * j.d2
    prof_margin = min(uupp + a_n * w, b_n * w - uupp)
    scale = (1.0 + abs(uupp) + w) * 1e-10
    if abs(prof_margin) > scale and abs(curv_margin) > scale * lam * lam:
        if (curv_margin > 0.0) != (prof_margin > 0.0):
            raise AssertionError(
                f"criteria disagree at x={x:g}: curvature form {curv_margin:g}, "
                f"profile form {prof_margin:g}")
    return RotationalCheck(strict=bool(prof_margin > 0.0),
                           curvature_form_margin=float(curv_margin),
                           profile_form_margin=float(prof_margin),
                           lam=float(lam), mu=float(mu), a_n=a_n, b_n=b_n)


# ---------------------------------------------------------------------------
# dispatch

def build_model(spec: ModelSpec) -> Chart:
    """Construct the chart described by a model spec; see MODEL_INFO."""
    p = dict(spec.params)
    try:
        if spec.id == "round_sphere":
            return round_sphere(int(p.pop("n", 4)), float(p.pop("radius", 1.0)))
        if spec.id == "clifford_torus":
            return clifford_torus(int(p.pop("n", 4)), int(p.pop("k", 2)),
                                  float(p.pop("r", math.sqrt(0.5))))
        if spec.id == "sphere_product":
            return sphere_product(int(p.pop("k", 2)), float(p.pop("r", 0.6)),
                                  float(p.pop("R", 1.0)), int(p.pop("c", 0)))
        if spec.id == "cp2_veronese":
            return cp2_veronese(float(p.pop("r", 1.0)), int(p.pop("chart", 0)))
        if spec.id == "ellipsoid":
            return ellipsoid(p.pop("semi_axes"))
        if spec.id == "rotational":
            return rotational(p.pop("profile"), int(p.pop("n", 4)),
                              tuple(p.pop("x_range", (-0.5, 0.5))))
        if spec.id == "curve":
            return curve_from_components(p.pop("components"))
        if spec.id == "product_with_curve":
            curve = build_model(ModelSpec.from_json(p.pop("curve")))
            inner = build_model(ModelSpec.from_json(p.pop("inner")))
            chart, _ = product_with_curve(curve, inner, int(p.pop("ell")))
            return chart
    except KeyError as exc:
        raise ValueError(f"model {spec.id!r} is missing parameter {exc}") from None
    raise ValueError(f"unknown model id {spec.id!r}; "
                     f"known: {', '.join(sorted(MODEL_INFO))}")
