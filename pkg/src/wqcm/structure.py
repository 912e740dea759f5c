"""Weak almost-contact metric structures and their derived tensors.

The structure file supplies g, f and the Reeb field xi; everything else is
derived here:

    eta = g(xi, .)          Q = -f^2 + eta (x) xi       Qt = Q - id
    Phi(X, Y) = g(X, fY)    h = (1/2) L_xi f

A `PointState` bundles all component arrays (values plus the derivatives
the identities need) at a single chart point; it is immutable and cached
per point on the owning `WeakACM`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import geometry
from .exprdsl import StructureDef, eval_jet
from .geometry import MetricEval


class StructureError(ValueError):
    pass


def _eval_matrix_field(exprs, point):
    """Evaluate a matrix of expressions -> (values, d, dd) arrays.

    d[k, i, j] = d_k T^i_j and dd[k, l, i, j] = d_k d_l T^i_j."""
    d = len(point)
    t = np.zeros((d, d))
    dt = np.zeros((d, d, d))
    ddt = np.zeros((d, d, d, d))
    for i in range(d):
        for j in range(d):
            jt = eval_jet(exprs[i][j], point)
            t[i, j] = jt.value
            dt[:, i, j] = jt.grad
            ddt[:, :, i, j] = jt.hess_matrix()
    return t, dt, ddt


def _eval_vector_field(exprs, point):
    d = len(point)
    v = np.zeros(d)
    dv = np.zeros((d, d))
    ddv = np.zeros((d, d, d))
    for i in range(d):
        jt = eval_jet(exprs[i], point)
        v[i] = jt.value
        dv[:, i] = jt.grad
        ddv[:, :, i] = jt.hess_matrix()
    return v, dv, ddv


class PointState:
    """All tensor data of a weak a.c.m. structure at one chart point."""

    def __init__(self, sdef: StructureDef, point: np.ndarray):
        self.sdef = sdef
        self.point = np.asarray(point, dtype=float)
        self.dim = sdef.dim
        self.n = sdef.n

    # -- raw fields ---------------------------------------------------------

    @cached_property
    def metric(self) -> MetricEval:
        return MetricEval.from_exprs(self.sdef.metric, self.point)

    @cached_property
    def g(self):
        return self.metric.g

    @cached_property
    def g_inv(self):
        return self.metric.g_inv

    @cached_property
    def _f_jets(self):
        return _eval_matrix_field(self.sdef.f, self.point)

    @property
    def f(self):
        return self._f_jets[0]

    @property
    def df(self):
        return self._f_jets[1]

    @property
    def ddf(self):
        return self._f_jets[2]

    @cached_property
    def _xi_jets(self):
        return _eval_vector_field(self.sdef.xi, self.point)

    @property
    def xi(self):
        return self._xi_jets[0]

    @property
    def dxi(self):
        return self._xi_jets[1]

    @property
    def ddxi(self):
        return self._xi_jets[2]

    @cached_property
    def q_explicit(self):
        """Explicit Q from the file, if any (cross-check only)."""
        if self.sdef.q is None:
            return None
        return _eval_matrix_field(self.sdef.q, self.point)[0]

    # -- derived fields -----------------------------------------------------

    @cached_property
    def eta(self):
        return self.g @ self.xi

    @cached_property
    def deta(self):
        """deta[k, i] = d_k eta_i."""
        return np.einsum("kij,j->ki", self.metric.dg, self.xi) + np.einsum(
            "ij,kj->ki", self.g, self.dxi
        )

    @cached_property
    def ddeta(self):
        """ddeta[k, l, i] = d_k d_l eta_i."""
        m = self.metric
        return (
            np.einsum("klij,j->kli", m.ddg, self.xi)
            + np.einsum("kij,lj->kli", m.dg, self.dxi)
            + np.einsum("lij,kj->kli", m.dg, self.dxi)
            + np.einsum("ij,klj->kli", self.g, self.ddxi)
        )

    @cached_property
    def Q(self):
        return -self.f @ self.f + np.outer(self.xi, self.eta)

    @cached_property
    def dQ(self):
        """dQ[k, i, j] = d_k Q^i_j."""
        return (
            -np.einsum("kim,mj->kij", self.df, self.f)
            - np.einsum("im,kmj->kij", self.f, self.df)
            + np.einsum("ki,j->kij", self.dxi, self.eta)
            + np.einsum("i,kj->kij", self.xi, self.deta)
        )

    @cached_property
    def Qt(self):
        return self.Q - np.eye(self.dim)

    @cached_property
    def Q_inv(self):
        return np.linalg.inv(self.Q)

    @cached_property
    def Phi(self):
        """Fundamental 2-form, Phi_ij = g(partial_i, f partial_j) = g_im f^m_j."""
        return self.g @ self.f

    @cached_property
    def dPhi(self):
        return np.einsum("kim,mj->kij", self.metric.dg, self.f) + np.einsum(
            "im,kmj->kij", self.g, self.df
        )

    @cached_property
    def deta_form(self):
        """d eta as an antisymmetric matrix, with the 1/2 normalization."""
        return geometry.d_oneform(self.deta)

    @cached_property
    def d_deta_form(self):
        """d(d eta) as a 3-form array (should vanish identically)."""
        d_deta = 0.5 * (self.ddeta - self.ddeta.transpose(0, 2, 1))  # d_k (deta)_ij
        return geometry.d_twoform(d_deta)

    @cached_property
    def dPhi_form(self):
        """d Phi as a 3-form array, with the 1/3 normalization."""
        return geometry.d_twoform(self.dPhi)

    @cached_property
    def h(self):
        """h = (1/2) L_xi f."""
        return 0.5 * geometry.lie_derivative_tensor11(self.xi, self.dxi, self.f, self.df)

    @cached_property
    def dh(self):
        """dh[l, i, j] = d_l h^i_j (uses second derivatives of f and xi)."""
        return 0.5 * (
            np.einsum("lk,kij->lij", self.dxi, self.df)
            + np.einsum("k,lkij->lij", self.xi, self.ddf)
            - np.einsum("lkj,ki->lij", self.df, self.dxi)
            - np.einsum("kj,lki->lij", self.f, self.ddxi)
            + np.einsum("lik,jk->lij", self.df, self.dxi)
            + np.einsum("ik,ljk->lij", self.f, self.ddxi)
        )

    @cached_property
    def h_star(self):
        """g-adjoint of h: g(h* X, Y) = g(X, h Y)."""
        return self.g_inv @ self.h.T @ self.g

    # -- connection and curvature -------------------------------------------

    @cached_property
    def gamma(self):
        return geometry.christoffel(self.metric)

    @cached_property
    def riem(self):
        return geometry.riemann(self.metric)

    @cached_property
    def nabla_xi(self):
        """(nabla xi)^i_j so that (nabla_X xi)^i = (nabla xi)^i_j X^j."""
        return self.dxi.T + np.einsum("ijm,m->ij", self.gamma, self.xi)

    @cached_property
    def nabla_eta(self):
        """nabla_eta[k, j] = (nabla_k eta)_j."""
        return geometry.cov_oneform(self.gamma, self.eta, self.deta)

    @cached_property
    def nabla_f(self):
        return geometry.cov_tensor11(self.gamma, self.f, self.df)

    @cached_property
    def nabla_Q(self):
        return geometry.cov_tensor11(self.gamma, self.Q, self.dQ)

    @cached_property
    def nabla_h(self):
        return geometry.cov_tensor11(self.gamma, self.h, self.dh)

    @cached_property
    def lie_xi_g(self):
        return geometry.lie_derivative_metric(self.gamma, self.g, self.xi, self.dxi)

    @cached_property
    def lie_xi_Q(self):
        return geometry.lie_derivative_tensor11(self.xi, self.dxi, self.Q, self.dQ)

    def curvature_op(self, x, y, z):
        """R_{X,Y} Z."""
        return np.einsum("lkij,i,j,k->l", self.riem, x, y, z)

    def ell(self, x):
        """The curvature operator used by the suites: ell X = R_{xi, X} xi."""
        return self.curvature_op(self.xi, x, self.xi)

    def sectional(self, x, y) -> float:
        return geometry.sectional(self.metric, x, y)

    def ricci(self, x, y) -> float:
        return geometry.ricci(self.metric, x, y)

    # -- inner products -------------------------------------------------------

    def gdot(self, x, y) -> float:
        return float(x @ self.g @ y)

    def gnorm(self, x) -> float:
        return math.sqrt(max(self.gdot(x, x), 0.0))

    def g_normalize(self, x):
        nrm = self.gnorm(x)
        if nrm < 1e-14:
            raise StructureError("cannot normalize a (near) zero vector")
        return x / nrm

    def project_ker_eta(self, x):
        """g-orthogonal projection onto ker eta = xi-perp."""
        return x - self.gdot(self.xi, x) * self.xi

    # -- N-tensors ------------------------------------------------------------

    def n1(self, x, y):
        return self._nijenhuis(x, y) + 2.0 * self.deta2(x, y) * self.xi

    def _nijenhuis(self, x, y):
        """[f,f]^i_{jk} x^j y^k = (f^m_j d_m f^i_k - f^m_k d_m f^i_j
                                   + f^i_m d_k f^m_j - f^i_m d_j f^m_k) x^j y^k."""
        f, df = self.f, self.df
        t1 = np.einsum("mj,j,mik,k->i", f, x, df, y)
        t2 = np.einsum("mk,k,mij,j->i", f, y, df, x)
        t3 = np.einsum("im,kmj,j,k->i", f, df, x, y)
        t4 = np.einsum("im,jmk,k,j->i", f, df, y, x)
        return t1 - t2 + t3 - t4

    def deta2(self, x, y) -> float:
        """d eta(X, Y) with the 1/2 normalization."""
        return float(x @ self.deta_form @ y)

    def n2(self, x, y) -> float:
        return 2.0 * self.deta2(self.f @ x, y) - 2.0 * self.deta2(self.f @ y, x)

    def n3(self, x):
        """N^(3)(X) = (L_xi f) X = 2 h X."""
        return 2.0 * self.h @ x

    def n4(self, x) -> float:
        return 2.0 * self.deta2(self.xi, x)


class WeakACM:
    """A structure definition together with per-point evaluation cache."""

    def __init__(self, sdef: StructureDef):
        self.sdef = sdef
        self._cache: dict[tuple, PointState] = {}

    @property
    def name(self) -> str:
        return self.sdef.name

    @property
    def n(self) -> int:
        return self.sdef.n

    @property
    def dim(self) -> int:
        return self.sdef.dim

    def at(self, point) -> PointState:
        key = tuple(float(x) for x in point)
        st = self._cache.get(key)
        if st is None:
            st = PointState(self.sdef, np.asarray(point, dtype=float))
            self._cache[key] = st
        return st


def derive_components(sdef: StructureDef) -> WeakACM:
    """Wrap a definition; eta, Q, Qt and Phi are derived pointwise from g, f, xi."""
    return WeakACM(sdef)


def h_tensor(s: WeakACM, point) -> dict:
    """h = (1/2) L_xi f with its g-adjoint and symmetric/skew parts."""
    st = s.at(point)
    h = st.h
    h_star = st.h_star
    return {
        "h": h,
        "h_adjoint": h_star,
        "sym": 0.5 * (h + h_star),
        "skew": 0.5 * (h - h_star),
        "h_xi": h @ st.xi,
    }


def n_tensors(s: WeakACM, x, y, point) -> dict:
    st = s.at(point)
    return {
        "n1": st.n1(x, y),
        "n2": st.n2(x, y),
        "n3": st.n3(x),
        "n4": st.n4(x),
        "nijenhuis": st._nijenhuis(x, y),
    }


@dataclass(frozen=True)
class ConeEval:
    """Pointwise almost-Hermitian data on the product with a line."""

    j: np.ndarray
    p: np.ndarray
    gbar: np.ndarray
    j2_plus_p_residual: float


def build_cone(s: WeakACM, point, t: float) -> ConeEval:
    """Assemble J, P and the warped metric at ((point), t); J^2 = -P must hold."""
    st = s.at(point)
    d = st.dim
    j = np.zeros((d + 1, d + 1))
    j[:d, :d] = st.f
    j[d, :d] = -st.eta
    j[:d, d] = st.xi
    p = np.zeros((d + 1, d + 1))
    p[:d, :d] = st.Q
    p[d, d] = 1.0
    gbar = np.zeros((d + 1, d + 1))
    gbar[:d, :d] = math.exp(-2.0 * t) * st.g
    gbar[d, d] = math.exp(-2.0 * t)
    residual = float(np.max(np.abs(j @ j + p)))
    return ConeEval(j=j, p=p, gbar=gbar, j2_plus_p_residual=residual)
