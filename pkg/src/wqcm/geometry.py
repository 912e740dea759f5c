"""Pointwise Riemannian machinery on a coordinate chart.

Everything is computed from jet evaluations of the metric components, so
Christoffel symbols carry exact first derivatives of g and the curvature
tensor carries exact second derivatives; no nested numerical
differentiation appears anywhere.

Conventions used throughout (they matter, the check suites depend on them):

  * curvature  R_{X,Y} Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
    components R^l_{kij} = d_i Gamma^l_jk - d_j Gamma^l_ik
                           + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
  * the exterior derivative of a 1-form carries a 1/2 factor:
    d eta(X,Y) = (1/2)(X eta(Y) - Y eta(X) - eta([X,Y]))
  * the exterior derivative of a 2-form carries a 1/3 factor.

With these, the sectional curvature of every plane containing the Reeb
field of the built-in Sasakian example equals +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprdsl import Expr, eval_jet
from .linalg import gram_schmidt


class SingularMetricError(ValueError):
    pass


class DegeneratePlaneError(ValueError):
    pass


@dataclass(frozen=True)
class MetricEval:
    """Metric with first and second coordinate derivatives at one point.

    Index layout: dg[k, i, j] = d_k g_ij,  ddg[k, l, i, j] = d_k d_l g_ij.
    """

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray

    @classmethod
    def from_exprs(cls, metric: tuple[tuple[Expr, ...], ...], point: np.ndarray) -> "MetricEval":
        point = np.asarray(point, dtype=float)
        d = point.shape[0]
        g = np.zeros((d, d))
        dg = np.zeros((d, d, d))
        ddg = np.zeros((d, d, d, d))
        for i in range(d):
            for j in range(i, d):
                jt = eval_jet(metric[i][j], point)
                g[i, j] = g[j, i] = jt.value
                dg[:, i, j] = dg[:, j, i] = jt.grad
                hm = jt.hess_matrix()
                ddg[:, :, i, j] = ddg[:, :, j, i] = hm
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise SingularMetricError(
                f"metric is not positive definite at {point.tolist()}"
            ) from exc
        return cls(point=point, g=g, g_inv=np.linalg.inv(g), dg=dg, ddg=ddg)


def _dg_bracket(dg: np.ndarray) -> np.ndarray:
    """bracket[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij."""
    return dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg


def christoffel(m: MetricEval) -> np.ndarray:
    """Levi-Civita coefficients, Gamma[k, i, j] = Gamma^k_ij."""
    # Gamma^k_ij = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    return 0.5 * np.einsum("kl,lij->kij", m.g_inv, _dg_bracket(m.dg))


def christoffel_derivative(m: MetricEval) -> np.ndarray:
    """dGamma[m, k, i, j] = d_m Gamma^k_ij, from exact second derivatives of g."""
    d_ginv = -np.einsum("ka,mab,bl->mkl", m.g_inv, m.dg, m.g_inv)
    bracket = _dg_bracket(m.dg)
    # dbracket[m, l, i, j] = d_m (d_i g_jl + d_j g_il - d_l g_ij)
    dbracket = m.ddg.transpose(0, 3, 1, 2) + m.ddg.transpose(0, 3, 2, 1) - m.ddg
    return 0.5 * (
        np.einsum("mkl,lij->mkij", d_ginv, bracket)
        + np.einsum("kl,mlij->mkij", m.g_inv, dbracket)
    )


def riemann(m: MetricEval) -> np.ndarray:
    """Curvature components R[l, k, i, j] = R^l_{kij}; (R_{X,Y}Z)^l = R^l_{kij} X^i Y^j Z^k."""
    gamma = christoffel(m)
    dgamma = christoffel_derivative(m)
    r = (
        dgamma.transpose(1, 3, 0, 2)  # d_i Gamma^l_jk -> [l,k,i,j]
        - dgamma.transpose(1, 3, 2, 0)  # d_j Gamma^l_ik
        + np.einsum("lim,mjk->lkij", gamma, gamma)
        - np.einsum("ljm,mik->lkij", gamma, gamma)
    )
    return r


def curvature(m: MetricEval, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """R_{X,Y} Z as a vector at the point."""
    return np.einsum("lkij,i,j,k->l", riemann(m), x, y, z)


def sectional(m: MetricEval, x: np.ndarray, y: np.ndarray) -> float:
    """Sectional curvature of the plane spanned by x, y."""
    gx = m.g @ x
    gy = m.g @ y
    den = (x @ gx) * (y @ gy) - (x @ gy) ** 2
    if den < 1e-12:
        raise DegeneratePlaneError("plane is degenerate (vectors nearly dependent)")
    return float((curvature(m, x, y, y) @ gx) / den)


def orthonormal_frame(g: np.ndarray, seed_vectors: np.ndarray | None = None) -> np.ndarray:
    """Deterministic g-orthonormal frame (columns), built from the coordinate
    frame by modified Gram-Schmidt (pivot tolerance 1e-12)."""
    d = g.shape[0]
    base = np.eye(d) if seed_vectors is None else seed_vectors
    frame = gram_schmidt(base, g)
    if frame.shape[1] != d:
        raise SingularMetricError("could not build a full orthonormal frame")
    return frame


def ricci(m: MetricEval, x: np.ndarray, y: np.ndarray) -> float:
    """Ric(X, Y) = sum_a g(R_{E_a, X} Y, E_a) over a g-orthonormal frame."""
    frame = orthonormal_frame(m.g)
    r = riemann(m)
    total = 0.0
    for a in range(frame.shape[1]):
        e = frame[:, a]
        total += float(np.einsum("lkij,i,j,k->l", r, e, x, y) @ (m.g @ e))
    return total


# -- covariant derivatives (component level) -----------------------------------


def cov_vector(gamma: np.ndarray, v: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """nabla v for a vector field: out[k, i] = d_k v^i + Gamma^i_km v^m."""
    return dv + np.einsum("ikm,m->ki", gamma, v)


def cov_oneform(gamma: np.ndarray, w: np.ndarray, dw: np.ndarray) -> np.ndarray:
    """nabla w for a 1-form: out[k, j] = d_k w_j - Gamma^m_kj w_m."""
    return dw - np.einsum("mkj,m->kj", gamma, w)


def cov_tensor11(gamma: np.ndarray, t: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """nabla T for a (1,1)-tensor: out[k, i, j] = d_k T^i_j + Gamma^i_km T^m_j - Gamma^m_kj T^i_m."""
    return dt + np.einsum("ikm,mj->kij", gamma, t) - np.einsum("mkj,im->kij", gamma, t)


def lie_bracket(xv: np.ndarray, xd: np.ndarray, yv: np.ndarray, yd: np.ndarray) -> np.ndarray:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i, with xd[k, i] = d_k X^i."""
    return np.einsum("j,ji->i", xv, yd) - np.einsum("j,ji->i", yv, xd)


def lie_derivative_tensor11(
    zv: np.ndarray, zd: np.ndarray, t: np.ndarray, dt: np.ndarray
) -> np.ndarray:
    """(L_Z T)^i_j = Z^k d_k T^i_j - T^k_j d_k Z^i + T^i_k d_j Z^k."""
    return (
        np.einsum("k,kij->ij", zv, dt)
        - np.einsum("kj,ki->ij", t, zd)
        + np.einsum("ik,jk->ij", t, zd)
    )


def lie_derivative_metric(
    gamma: np.ndarray, g: np.ndarray, xv: np.ndarray, xd: np.ndarray
) -> np.ndarray:
    """(L_X g)(Y, Z) = g(nabla_Y X, Z) + g(nabla_Z X, Y), as a symmetric matrix."""
    nx = cov_vector(gamma, xv, xd)  # [k, i] = (nabla_k X)^i
    m = np.einsum("im,mj->ij", nx, g)  # g(nabla_i X, partial_j)
    return m + m.T


def d_oneform(dw: np.ndarray) -> np.ndarray:
    """Exterior derivative of a 1-form with the 1/2 normalization:
    (d w)_ij = (1/2)(d_i w_j - d_j w_i), given dw[k, i] = d_k w_i."""
    return 0.5 * (dw - dw.T)


def d_twoform(dphi: np.ndarray) -> np.ndarray:
    """Exterior derivative of a 2-form with the 1/3 normalization, on the
    coordinate frame: out[i, j, k] = (1/3)(d_i phi_jk + d_j phi_ki + d_k phi_ij),
    given dphi[k, i, j] = d_k phi_ij."""
    return (dphi + dphi.transpose(1, 2, 0) + dphi.transpose(2, 0, 1)) / 3.0
