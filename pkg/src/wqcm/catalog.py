"""Built-in catalog of structure definitions.

Three families:

  * "sasakian-r{2n+1}" -- the standard Sasakian structure on R^{2n+1} with
    eta = (1/2)(dz - sum_i y_i dx_i), xi = 2 d/dz and the associated metric.
    The sign of f is pinned at build time by requiring d eta = Phi.
  * "scaled" (parameters n, s) -- same chart, metric and xi, with f scaled
    by s.  A genuine weak structure with Q = s^2 id + (1 - s^2) eta (x) xi.
  * "flat-const" -- Euclidean R^3 with a constant f; fails the contact
    condition (d eta = 0) while satisfying the weak axioms.
"""

from __future__ import annotations

import numpy as np

from .exprdsl import StructureDef, load_structure_def
from .structure import WeakACM

DEFAULT_DOMAIN_HALF_WIDTH = 1.0
MAX_N = 3  # dimension 7; keeps full suite runs fast


class UnknownCatalogKey(KeyError):
    pass


def keys() -> list[str]:
    return ["sasakian-r3", "sasakian-r5", "sasakian-r7", "scaled", "flat-const"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _sasakian_doc(n: int, f_sign: float, s: float = 1.0, name: str | None = None) -> dict:
    """Sasakian chart document on R^{2n+1}; f scaled by s and flipped by f_sign."""
    dim = 2 * n + 1
    xs = [f"x{i + 1}" for i in range(n)]
    ys = [f"y{i + 1}" for i in range(n)]
    coords = xs + ys + ["z"]
    zero = "0"
    metric = [[zero] * dim for _ in range(dim)]
    # g = eta (x) eta + (1/4) sum_i (dx_i^2 + dy_i^2), eta = (1/2)(dz - sum y_i dx_i)
    for i in range(n):
        for j in range(n):
            a, b = min(i, j), max(i, j)  # keep the text symmetric
            cross = f"{ys[a]}*{ys[b]}/4"
            metric[i][j] = f"{cross} + 1/4" if i == j else cross
        metric[i][dim - 1] = f"-{ys[i]}/4"
        metric[dim - 1][i] = f"-{ys[i]}/4"
        metric[n + i][n + i] = "1/4"
    metric[dim - 1][dim - 1] = "1/4"

    c = f_sign * s
    f = [[zero] * dim for _ in range(dim)]
    for i in range(n):
        # f(d/dx_i) = -d/dy_i ;  f(d/dy_i) = d/dx_i + y_i d/dz  (up to f_sign, times s)
        f[n + i][i] = _fmt(-c)
        f[i][n + i] = _fmt(c)
        f[dim - 1][n + i] = f"({_fmt(c)})*{ys[i]}"

    xi = [zero] * dim
    xi[dim - 1] = "2"
    w = DEFAULT_DOMAIN_HALF_WIDTH
    return {
        "name": name or f"sasakian-r{dim}",
        "n": n,
        "coords": coords,
        "domain": [[-w, w]] * dim,
        "metric": metric,
        "f": f,
        "xi": xi,
    }


def _contact_metric_residual(sdef: StructureDef) -> float:
    """max |d eta - Phi| over a few interior points (sign oracle for f)."""
    acm = WeakACM(sdef)
    res = 0.0
    for frac in (0.15, 0.45, 0.8):
        point = np.array([lo + frac * (hi - lo) for lo, hi in sdef.domain])
        st = acm.at(point)
        res = max(res, float(np.max(np.abs(st.deta_form - st.Phi))))
    return res


def _sasakian(n: int, s: float = 1.0, name: str | None = None) -> StructureDef:
    # The literature is split on the sign of f; keep the sign that satisfies
    # the contact-metric condition d eta = Phi for the unscaled structure.
    best = None
    for sign in (1.0, -1.0):
        sdef = load_structure_def(_sasakian_doc(n, sign, s=s, name=name))
        probe = sdef if s == 1.0 else load_structure_def(_sasakian_doc(n, sign, s=1.0, name=name))
        if _contact_metric_residual(probe) < 1e-10:
            best = sdef
            break
    if best is None:
        raise RuntimeError("neither f sign satisfies the contact-metric condition")
    return best


def _flat_const_doc() -> dict:
    w = DEFAULT_DOMAIN_HALF_WIDTH
    return {
        "name": "flat-const",
        "n": 1,
        "coords": ["x", "y", "z"],
        "domain": [[-w, w]] * 3,
        "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "f": [["0", "1", "0"], ["-1", "0", "0"], ["0", "0", "0"]],
        "xi": ["0", "0", "1"],
    }


def catalog(key: str, n: int = 1, s: float | None = None) -> StructureDef:
    """Return a built-in structure definition by key."""
    if key.startswith("sasakian-r"):
        dim = int(key.removeprefix("sasakian-r"))
        if dim % 2 == 0 or dim < 3:
            raise UnknownCatalogKey(key)
        nn = (dim - 1) // 2
        if nn > MAX_N:
            raise ValueError(f"n={nn} exceeds the catalog cap of {MAX_N}")
        return _sasakian(nn)
    if key == "scaled":
        if s is None:
            raise ValueError("catalog key 'scaled' requires parameter s")
        if s <= 0:
            raise ValueError("scale parameter s must be positive")
        if not 1 <= n <= MAX_N:
            raise ValueError(f"n must be between 1 and {MAX_N}")
        return _sasakian(n, s=s, name=f"scaled-n{n}-s{_fmt(s)}")
    if key == "flat-const":
        return load_structure_def(_flat_const_doc())
    raise UnknownCatalogKey(key)
