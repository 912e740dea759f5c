"""Second-order forward-mode jets.

A jet carries the value, gradient and Hessian of a scalar function of the
chart coordinates at one point.  All derivative information downstream
(Christoffel symbols, curvature, Lie and exterior derivatives) is obtained
by evaluating coordinate expressions over this arithmetic, so every
derivative is exact up to rounding.

The Hessian is stored as the packed upper triangle, which makes symmetry
a structural property rather than something to maintain numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(dim: int) -> tuple[np.ndarray, np.ndarray]:
    if dim not in _TRIU_CACHE:
        _TRIU_CACHE[dim] = np.triu_indices(dim)
    return _TRIU_CACHE[dim]


def pack_symmetric(m: np.ndarray) -> np.ndarray:
    """Packed upper triangle (row-major) of a symmetric matrix."""
    rows, cols = _triu(m.shape[0])
    return np.ascontiguousarray(m[rows, cols])


def unpack_symmetric(packed: np.ndarray, dim: int) -> np.ndarray:
    rows, cols = _triu(dim)
    m = np.zeros((dim, dim))
    m[rows, cols] = packed
    m[cols, rows] = packed
    return m


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Jet2:
    """Truncated second-order Taylor data of a scalar at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray  # packed upper triangle, length dim*(dim+1)//2

    def __post_init__(self):
        d = self.grad.shape[0]
        if self.hess.shape != (d * (d + 1) // 2,):
            raise ValueError(
                f"packed Hessian length {self.hess.shape} does not match dimension {d}"
            )
        _freeze(self.grad)
        _freeze(self.hess)

    @property
    def dim(self) -> int:
        return self.grad.shape[0]

    def hess_matrix(self) -> np.ndarray:
        return unpack_symmetric(self.hess, self.dim)

    # -- construction ------------------------------------------------------

    @staticmethod
    def constant(c: float, dim: int) -> "Jet2":
        return Jet2(float(c), np.zeros(dim), np.zeros(dim * (dim + 1) // 2))

    @staticmethod
    def coordinate(point: np.ndarray, index: int) -> "Jet2":
        point = np.asarray(point, dtype=float)
        dim = point.shape[0]
        if not 0 <= index < dim:
            raise IndexError(f"coordinate index {index} out of range for dimension {dim}")
        g = np.zeros(dim)
        g[index] = 1.0
        return Jet2(float(point[index]), g, np.zeros(dim * (dim + 1) // 2))

    # -- helpers -----------------------------------------------------------

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            if other.dim != self.dim:
                raise ValueError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return Jet2.constant(float(other), self.dim)

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Compose with a scalar function given its value and derivatives."""
        gg = pack_symmetric(np.outer(self.grad, self.grad))
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * gg)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "Jet2":
        o = self._coerce(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        o = self._coerce(other)
        return Jet2(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other) -> "Jet2":
        return self._coerce(other) - self

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other) -> "Jet2":
        o = self._coerce(other)
        cross = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + pack_symmetric(cross + cross.T),
        )

    __rmul__ = __mul__

    def _reciprocal(self) -> "Jet2":
        if self.value == 0.0:
            raise ZeroDivisionError("jet division by zero value")
        v = self.value
        return self._chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other) -> "Jet2":
        return self * self._coerce(other)._reciprocal()

    def __rtruediv__(self, other) -> "Jet2":
        return self._coerce(other) * self._reciprocal()


# -- elementary functions ----------------------------------------------------


def sin(a: Jet2) -> Jet2:
    s, c = math.sin(a.value), math.cos(a.value)
    return a._chain(s, c, -s)


def cos(a: Jet2) -> Jet2:
    s, c = math.sin(a.value), math.cos(a.value)
    return a._chain(c, -s, -c)


def exp(a: Jet2) -> Jet2:
    e = math.exp(a.value)
    return a._chain(e, e, e)


def sqrt(a: Jet2) -> Jet2:
    if a.value <= 0.0:
        raise ValueError(f"sqrt of non-positive jet value {a.value}")
    r = math.sqrt(a.value)
    return a._chain(r, 0.5 / r, -0.25 / (r * a.value))


def powi(a: Jet2, k: int) -> Jet2:
    """Integer power; negative exponents require a nonzero value."""
    if not isinstance(k, int):
        raise TypeError(f"powi exponent must be an integer, got {k!r}")
    if k == 0:
        return Jet2.constant(1.0, a.dim)
    if k < 0 and a.value == 0.0:
        raise ZeroDivisionError("negative power of zero jet value")
    v = a.value
    f2 = 0.0 if k == 1 else k * (k - 1) * v ** (k - 2)
    return a._chain(v**k, k * v ** (k - 1), f2)
