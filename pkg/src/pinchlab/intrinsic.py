"""Intrinsic curvature from the induced metric, independent of the
Gauss equation.

Used as a cross-check oracle: the induced metric and its first
derivatives come exactly from the order-2 jets,

    g_pq = <df_p, df_q>,     dg_pq/du_r = <d2f_rp, df_q> + <df_p, d2f_rq>,

so the Christoffel symbols are exact at every point; their derivatives
(the only ingredient the jets cannot supply) are taken by second-order
central differences.  Nothing here touches the second fundamental form
or the ambient curvature.
"""

from __future__ import annotations

import numpy as np

from .jets import Chart, Jet2

__all__ = ["christoffel", "coordinate_curvature", "sectional_curvature"]

_EPS_CBRT = 7.401486830834377e-06


def _metric(jet: Jet2) -> np.ndarray:
    return jet.d1 @ jet.d1.T


def christoffel(jet: Jet2) -> np.ndarray:
    """Second-kind Christoffel symbols Gamma^s_{pq}, exact from one jet."""
    g = _metric(jet)
    dg = (np.einsum("rpd,qd->rpq", jet.d2, jet.d1)
          + np.einsum("pd,rqd->rpq", jet.d1, jet.d2))  # dg[r,p,q] = d_r g_pq
    # first[r, p, q] = (d_p g_rq + d_q g_rp - d_r g_pq) / 2
    first = 0.5 * (np.einsum("prq->rpq", dg) + np.einsum("qrp->rpq", dg) - dg)
    return np.einsum("sr,rpq->spq", np.linalg.inv(g), first)


def coordinate_curvature(chart: Chart, u) -> np.ndarray:
    """R_{pqrl} = <R(d_p, d_q) d_r, d_l> in coordinate components.

    Christoffel derivatives by central differences with step
    h = cbrt(eps)*(1+|u_i|) per coordinate.
    """
    u = np.asarray(u, dtype=float)
    n = chart.n
    jet = chart.jet_at(u)
    g = _metric(jet)
    G = christoffel(jet)
    dG = np.empty((n, n, n, n))  # dG[p, s, q, r] = d_p Gamma^s_{qr}
    for p in range(n):
        h = _EPS_CBRT * (1.0 + abs(u[p]))
        e = np.zeros(n)
        e[p] = h
        Gp = christoffel(chart.jet_at(u + e))
        Gm = christoffel(chart.jet_at(u - e))
        dG[p] = (Gp - Gm) / (2.0 * h)
    # R(d_p, d_q) d_r = (d_p G^s_qr - d_q G^s_pr + G^t_qr G^s_pt - G^t_pr G^s_qt) d_s
    Rud = (np.einsum("psqr->pqrs", dG) - np.einsum("qspr->pqrs", dG)
           + np.einsum("tqr,spt->pqrs", G, G) - np.einsum("tpr,sqt->pqrs", G, G))
    return np.einsum("pqrs,sl->pqrl", Rud, g)


def sectional_curvature(chart: Chart, u, X, Y) -> float:
    """Sectional curvature of the plane spanned by coordinate vectors X, Y."""
    u = np.asarray(u, dtype=float)
    R = coordinate_curvature(chart, u)
    g = _metric(chart.jet_at(u))
    num = float(np.einsum("pqrl,p,q,r,l->", R, X, Y, Y, X))
    gXX = float(X @ g @ X)
    gYY = float(Y @ g @ Y)
    gXY = float(X @ g @ Y)
    den = gXX * gYY - gXY * gXY
    return num / den
