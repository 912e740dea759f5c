"""Small dense linear algebra: deterministic Jacobi eigensolver and
modified Gram-Schmidt with respect to an arbitrary inner product.

Dimensions here are tiny (at most 10), so robustness and determinism
matter more than speed.
"""

from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(a: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Deterministic:
    fixed sweep order, convergence on off-diagonal Frobenius norm <= tol.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n and np.max(np.abs(a - a.T)) > 1e-10 * (1.0 + np.max(np.abs(a))):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n) for j in range(i + 1, n)) * 2.0)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals, kind="stable")
    return eigvals[order], v[:, order]


def gram_schmidt(vectors: np.ndarray, gram: np.ndarray, pivot_tol: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt of the columns of `vectors` under the inner
    product <u, v> = u^T gram v.  Columns with norm below pivot_tol after
    projection are dropped.  Returns orthonormal columns."""
    out = []
    for k in range(vectors.shape[1]):
        w = vectors[:, k].astype(float).copy()
        for u in out:
            w -= (u @ gram @ w) * u
        # second pass for numerical orthogonality
        for u in out:
            w -= (u @ gram @ w) * u
        norm = math.sqrt(max(w @ gram @ w, 0.0))
        if norm > pivot_tol:
            out.append(w / norm)
    return np.array(out).T if out else np.zeros((vectors.shape[0], 0))
