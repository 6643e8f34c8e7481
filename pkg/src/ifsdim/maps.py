"""Parametric map families with analytic derivatives and chord-slope bounds.

Families are closed parametric sets (no arbitrary callables) so that
derivative norms and Lipschitz-type log bounds are exact, not sampled.
All maps are immutable after construction.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AtBreakpoint, NonFinitePoint, UnsupportedFamily


def _check_finite(x) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFinitePoint(f"non-finite coordinate in {x!r}")


class Affine1D:
    """h(x) = slope * x + intercept on the real line."""

    family = "affine_1d"
    dim = 1

    def __init__(self, slope: float, intercept: float):
        self.slope = float(slope)
        self.intercept = float(intercept)

    def __repr__(self):
        return f"Affine1D({self.slope}, {self.intercept})"

    def apply(self, x):
        return self.slope * x + self.intercept

    def deriv_norm(self, x, side=None) -> float:
        return abs(self.slope)

    def deriv_norm_many(self, xs):
        return np.full(np.shape(xs), abs(self.slope))

    def chord_log_bound(self, y) -> float:
        # chord ratio is |slope| for every pair, so the bound is exact
        if self.slope == 0.0:
            return -math.inf
        return math.log(abs(self.slope))

    @property
    def breakpoints(self):
        return np.empty(0)


class PiecewiseAffine1D:
    """Piecewise-affine map on contiguous pieces split at `breakpoints`.

    Piece j applies on [breakpoints[j-1], breakpoints[j]); the value at a
    breakpoint comes from the piece on its right (right-continuous
    convention).  `homeomorphic=True` additionally validates continuity and
    strict monotonicity so the map is a bijection of the line.
    """

    family = "piecewise_affine_1d"
    dim = 1

    def __init__(self, breakpoints, slopes, intercepts, homeomorphic: bool = False):
        bp = np.asarray(breakpoints, dtype=float)
        a = np.asarray(slopes, dtype=float)
        c = np.asarray(intercepts, dtype=float)
        if bp.ndim != 1 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if len(a) != len(bp) + 1 or len(c) != len(bp) + 1:
            raise ValueError("need len(breakpoints)+1 slopes and intercepts")
        _check_finite(bp)
        _check_finite(a)
        _check_finite(c)
        self.bp = bp
        self.a = a
        self.c = c
        self.homeomorphic = bool(homeomorphic)
        if homeomorphic:
            left = self.a[:-1] * bp + self.c[:-1]
            right = self.a[1:] * bp + self.c[1:]
            scale = np.maximum(1.0, np.abs(left))
            if np.any(np.abs(left - right) > 1e-9 * scale):
                raise ValueError("homeomorphic map must be continuous at breakpoints")
            if not (np.all(self.a > 0) or np.all(self.a < 0)):
                raise ValueError("homeomorphic map must be strictly monotone")

    def __repr__(self):
        return f"PiecewiseAffine1D(pieces={len(self.a)})"

    def piece_index(self, x, side="right"):
        """Index of the piece governing x; vectorized over arrays."""
        return np.searchsorted(self.bp, x, side="right" if side == "right" else "left")

    def apply(self, x):
        idx = np.searchsorted(self.bp, x, side="right")
        return self.a[idx] * x + self.c[idx]

    def apply_scalar(self, x: float) -> float:
        idx = int(np.searchsorted(self.bp, x, side="right"))
        return self.a[idx] * x + self.c[idx]

    def deriv_norm(self, x, side=None) -> float:
        x = float(x)
        at_break = bool(np.any(self.bp == x))
        if at_break and side is None:
            raise AtBreakpoint(f"x={x} is a breakpoint; pass side='left' or 'right'")
        idx = int(np.searchsorted(self.bp, x, side="left" if side == "left" else "right"))
        return abs(float(self.a[idx]))

    def deriv_norm_many(self, xs):
        # right-side convention at breakpoints (matches apply)
        idx = np.searchsorted(self.bp, xs, side="right")
        return np.abs(self.a[idx])

    def value_candidates(self, b: float):
        """One-sided values (left, right) at breakpoint b."""
        j = int(np.searchsorted(self.bp, b, side="left"))
        return self.a[j] * b + self.c[j], self.a[j + 1] * b + self.c[j + 1]

    def chord_log_bound(self, y) -> float:
        """sup over z of log(|h(y)-h(z)| / |y-z|), exact for this family.

        On each affine piece the chord ratio is monotone between its zero
        and the piece ends, so the supremum is attained either at a piece
        slope or at a one-sided breakpoint value.
        """
        y = float(y)
        hy = self.apply_scalar(y)
        best = float(np.max(np.abs(self.a)))
        for j, b in enumerate(self.bp):
            if b == y:
                continue
            left, right = self.value_candidates(float(b))
            gap = abs(b - y)
            best = max(best, abs(left - hy) / gap, abs(right - hy) / gap)
        if best == 0.0:
            return -math.inf
        return math.log(best)

    @property
    def breakpoints(self):
        return self.bp


class AffineND:
    """h(x) = A x + c on R^d."""

    family = "affine_nd"

    def __init__(self, matrix, offset):
        self.matrix = np.asarray(matrix, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("matrix must be square")
        if self.offset.shape != (self.matrix.shape[0],):
            raise ValueError("offset length must match matrix size")
        _check_finite(self.matrix)
        _check_finite(self.offset)
        self.dim = self.matrix.shape[0]
        self._opnorm = float(np.linalg.norm(self.matrix, 2))

    def __repr__(self):
        return f"AffineND(d={self.dim})"

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.matrix @ x + self.offset
        return x @ self.matrix.T + self.offset

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if abs(np.linalg.det(self.matrix)) == 0:
            raise ValueError("map is singular; no inverse")
        if y.ndim == 1:
            return np.linalg.solve(self.matrix, y - self.offset)
        return np.linalg.solve(self.matrix, (y - self.offset).T).T

    def deriv_norm(self, x, side=None) -> float:
        return self._opnorm

    def deriv_norm_many(self, xs):
        n = np.shape(xs)[0]
        return np.full(n, self._opnorm)

    def chord_log_bound(self, y) -> float:
        if self._opnorm == 0.0:
            return -math.inf
        return math.log(self._opnorm)

    @property
    def breakpoints(self):
        return np.empty(0)


class Moebius2D:
    """z -> (a z + b) / (c z + d) on R^2 read as the complex plane.

    Requires a d - b c != 0.  The derivative norm is the conformal scale
    |ad - bc| / |c z + d|^2; it is unbounded near the pole, so no global
    chord bound exists.
    """

    family = "moebius_2d"
    dim = 2

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = (complex(a), complex(b), complex(c), complex(d))
        self.det = self.a * self.d - self.b * self.c
        if self.det == 0:
            raise ValueError("a*d - b*c must be nonzero")

    def __repr__(self):
        return f"Moebius2D({self.a}, {self.b}, {self.c}, {self.d})"

    def _to_complex(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return complex(x[0], x[1])
        return x[:, 0] + 1j * x[:, 1]

    def _from_complex(self, z):
        if np.ndim(z) == 0:
            return np.array([z.real, z.imag])
        return np.column_stack([np.real(z), np.imag(z)])

    def apply(self, x):
        z = self._to_complex(x)
        den = self.c * z + self.d
        if np.any(den == 0):
            raise NonFinitePoint("point maps to infinity (Moebius pole)")
        return self._from_complex((self.a * z + self.b) / den)

    def deriv_norm(self, x, side=None) -> float:
        z = self._to_complex(np.asarray(x, dtype=float))
        den = abs(self.c * z + self.d)
        if den == 0:
            raise NonFinitePoint("derivative at Moebius pole")
        return abs(self.det) / den ** 2

    def deriv_norm_many(self, xs):
        z = self._to_complex(np.asarray(xs, dtype=float))
        den = np.abs(self.c * z + self.d)
        return abs(self.det) / den ** 2

    def inverse(self, y):
        w = self._to_complex(y)
        den = self.a - self.c * w
        if np.any(den == 0):
            raise NonFinitePoint("inverse pole")
        return self._from_complex((self.d * w - self.b) / den)

    def chord_log_bound(self, y) -> float:
        raise UnsupportedFamily("moebius_2d has no closed-form chord bound")

    @property
    def breakpoints(self):
        return np.empty(0)


class ScalarConformalND:
    """h(x) = scale * R x + t with R orthogonal: a similarity of R^d."""

    family = "scalar_conformal_nd"

    def __init__(self, scale: float, rotation, translation):
        self.scale = float(scale)
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        self.rotation = np.asarray(rotation, dtype=float)
        self.translation = np.asarray(translation, dtype=float)
        d = self.rotation.shape[0]
        if self.rotation.shape != (d, d):
            raise ValueError("rotation must be square")
        if not np.allclose(self.rotation @ self.rotation.T, np.eye(d), atol=1e-9):
            raise ValueError("rotation must be orthogonal")
        if self.translation.shape != (d,):
            raise ValueError("translation length must match rotation size")
        self.dim = d

    def __repr__(self):
        return f"ScalarConformalND(scale={self.scale}, d={self.dim})"

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.scale * (self.rotation @ x) + self.translation
        return self.scale * (x @ self.rotation.T) + self.translation

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            return (self.rotation.T @ (y - self.translation)) / self.scale
        return ((y - self.translation) @ self.rotation) / self.scale

    def deriv_norm(self, x, side=None) -> float:
        return self.scale

    def deriv_norm_many(self, xs):
        n = np.shape(xs)[0]
        return np.full(n, self.scale)

    def chord_log_bound(self, y) -> float:
        return math.log(self.scale)

    @property
    def breakpoints(self):
        return np.empty(0)


def finite_diff_deriv_norm(mapping, x, rel_step: float = 1e-6) -> float:
    """Central finite-difference estimate of ||Dh(x)||.

    Cross-check for the analytic derivative norms; agrees within ~1e-6
    relative error away from breakpoints.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.shape[0]
    if getattr(mapping, "dim", d) == 1 and d == 1:
        h = rel_step * max(1.0, abs(float(x[0])))
        lo = mapping.apply(float(x[0]) - h)
        hi = mapping.apply(float(x[0]) + h)
        return abs(float(hi) - float(lo)) / (2 * h)
    jac = np.empty((d, d))
    for j in range(d):
        h = rel_step * max(1.0, abs(float(x[j])))
        e = np.zeros(d)
        e[j] = h
        jac[:, j] = (np.asarray(mapping.apply(x + e)) - np.asarray(mapping.apply(x - e))) / (2 * h)
    return float(np.linalg.norm(jac, 2))
