"""Quaternion scalar arithmetic and quaternion-valued grid signals.

Conventions used throughout the package:

* A quaternion q = q_r + i q_i + j q_j + k q_k is stored as four float64
  components in (r, i, j, k) order.  Arrays of quaternions carry the four
  components in a trailing axis of length 4.
* A ``QSignal`` samples a quaternion-valued function on a uniform grid over
  R^(2n).  Axis ``p`` has ``shape[p]`` nodes at ``origin[p] + m*spacing[p]``.
  The default origin places node ``shape[p]//2`` at physical coordinate 0,
  so every default grid contains the origin.
* All integrals are midpoint Riemann sums weighted by the cell volume
  ``prod(spacing)``.  Norm and inner-product reductions rely on numpy's
  pairwise summation, which keeps them deterministic and well-conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class QShearError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(QShearError):
    """An argument is outside the documented domain."""


class IncompatibleGridsError(QShearError):
    """Two signals do not share the grid layout an operation requires."""


# ---------------------------------------------------------------------------
# scalar quaternions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    """One element of the quaternion algebra H."""

    r: float = 0.0
    i: float = 0.0
    j: float = 0.0
    k: float = 0.0

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.r + other.r, self.i + other.i,
                          self.j + other.j, self.k + other.k)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.r - other.r, self.i - other.i,
                          self.j - other.j, self.k - other.k)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.r, -self.i, -self.j, -self.k)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if isinstance(other, (int, float)):
            return Quaternion(self.r * other, self.i * other,
                              self.j * other, self.k * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.r * other, self.i * other,
                              self.j * other, self.k * other)
        return NotImplemented

    def __abs__(self) -> float:
        return math.sqrt(self.r * self.r + self.i * self.i
                         + self.j * self.j + self.k * self.k)

    def conj(self) -> "Quaternion":
        return Quaternion(self.r, -self.i, -self.j, -self.k)

    def sc(self) -> float:
        """Real scalar part."""
        return self.r

    def to_array(self) -> np.ndarray:
        return np.array([self.r, self.i, self.j, self.k], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Quaternion":
        a = np.asarray(a, dtype=np.float64)
        if a.shape != (4,):
            raise InvalidParameterError(f"expected 4 components, got shape {a.shape}")
        return Quaternion(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def isclose(self, other: "Quaternion", rel: float = 1e-12, abs_tol: float = 0.0) -> bool:
        d = abs(self - other)
        scale = max(abs(self), abs(other))
        return d <= abs_tol + rel * scale


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product p*q (ij = k, ji = -k)."""
    return Quaternion(
        p.r * q.r - p.i * q.i - p.j * q.j - p.k * q.k,
        p.r * q.i + p.i * q.r + p.j * q.k - p.k * q.j,
        p.r * q.j - p.i * q.k + p.j * q.r + p.k * q.i,
        p.r * q.k + p.i * q.j - p.j * q.i + p.k * q.r,
    )


def quat_conj(q: Quaternion) -> Quaternion:
    return q.conj()


def quat_abs(q: Quaternion) -> float:
    return abs(q)


def quat_sc(q: Quaternion) -> float:
    return q.sc()


# ---------------------------------------------------------------------------
# quaternion component arrays, trailing axis (r, i, j, k)
# ---------------------------------------------------------------------------

def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion component arrays, broadcasting."""
    pr, pi, pj, pk = (p[..., m] for m in range(4))
    qr, qi, qj, qk = (q[..., m] for m in range(4))
    out = np.empty(np.broadcast(pr, qr).shape + (4,), dtype=np.float64)
    out[..., 0] = pr * qr - pi * qi - pj * qj - pk * qk
    out[..., 1] = pr * qi + pi * qr + pj * qk - pk * qj
    out[..., 2] = pr * qj - pi * qk + pj * qr + pk * qi
    out[..., 3] = pr * qk + pi * qj - pj * qi + pk * qr
    return out


def qconj(q: np.ndarray) -> np.ndarray:
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def qabs2(q: np.ndarray) -> np.ndarray:
    """Squared modulus per node."""
    return np.einsum("...m,...m->...", q, q)


def qabs(q: np.ndarray) -> np.ndarray:
    return np.sqrt(qabs2(q))


# ---------------------------------------------------------------------------
# gridded signals
# ---------------------------------------------------------------------------

def centered_origin(shape, spacing) -> tuple:
    """Origin placing node ``N//2`` at coordinate 0 along each axis."""
    return tuple(-(int(N) // 2) * float(d) for N, d in zip(shape, spacing))


@dataclass
class QSignal:
    """Quaternion-valued function sampled on a uniform grid over R^(2n).

    ``data`` has shape ``(*shape, 4)`` with components (r, i, j, k) in the
    trailing axis; the array is frozen after construction so instances can be
    shared freely between threads.
    """

    n: int
    shape: tuple
    spacing: tuple
    origin: tuple
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.shape = tuple(int(N) for N in self.shape)
        self.spacing = tuple(float(d) for d in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if self.n < 1:
            raise InvalidParameterError("n must be >= 1")
        if len(self.shape) != 2 * self.n:
            raise InvalidParameterError(
                f"expected {2 * self.n} axes for n={self.n}, got {len(self.shape)}")
        if len(self.spacing) != 2 * self.n or len(self.origin) != 2 * self.n:
            raise InvalidParameterError("spacing/origin length must equal 2n")
        if any(N < 2 for N in self.shape):
            raise InvalidParameterError("every axis needs at least 2 nodes")
        if any(d <= 0.0 for d in self.spacing):
            raise InvalidParameterError("spacing entries must be positive")
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.shape != self.shape + (4,):
            raise InvalidParameterError(
                f"data shape {data.shape} does not match grid {self.shape + (4,)}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # -- grid geometry ------------------------------------------------------

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coords(self, axis: int) -> np.ndarray:
        N = self.shape[axis]
        return self.origin[axis] + self.spacing[axis] * np.arange(N)

    def coords(self) -> np.ndarray:
        """Physical node coordinates, shape ``(*shape, 2n)``."""
        axes = np.meshgrid(*[self.axis_coords(p) for p in range(2 * self.n)],
                           indexing="ij")
        return np.stack(axes, axis=-1)

    def plane(self, idx: int) -> np.ndarray:
        """Read-only view of one real component plane."""
        return self.data[..., idx]

    def same_grid(self, other: "QSignal", include_origin: bool = True) -> bool:
        ok = (self.n == other.n and self.shape == other.shape
              and np.allclose(self.spacing, other.spacing, rtol=0, atol=0))
        if include_origin:
            ok = ok and np.allclose(self.origin, other.origin, rtol=0, atol=0)
        return ok

    def with_data(self, data: np.ndarray) -> "QSignal":
        return QSignal(self.n, self.shape, self.spacing, self.origin, data)

    def origin_index(self) -> tuple:
        """Grid index of the physical origin; error if 0 is not a node."""
        idx = []
        for p in range(2 * self.n):
            m = -self.origin[p] / self.spacing[p]
            mi = int(round(m))
            if abs(m - mi) > 1e-9 or not (0 <= mi < self.shape[p]):
                raise InvalidParameterError(
                    "grid does not contain the origin as a node")
            idx.append(mi)
        return tuple(idx)


def qsignal(n, shape, spacing, data, origin=None) -> QSignal:
    """Build a QSignal; origin defaults to the centered convention."""
    if origin is None:
        origin = centered_origin(shape, spacing)
    return QSignal(n, tuple(shape), tuple(spacing), tuple(origin), data)


def zero_signal(n, shape, spacing, origin=None) -> QSignal:
    return qsignal(n, shape, spacing,
                   np.zeros(tuple(shape) + (4,), dtype=np.float64), origin)


def signal_from_planes(n, shape, spacing, planes, origin=None) -> QSignal:
    """Assemble a signal from up to four real component planes.

    ``planes`` maps component index (0..3) to an array; missing planes are
    zero.
    """
    data = np.zeros(tuple(shape) + (4,), dtype=np.float64)
    for idx, arr in planes.items():
        data[..., idx] = arr
    return qsignal(n, shape, spacing, data, origin)


# ---------------------------------------------------------------------------
# norms and inner products
# ---------------------------------------------------------------------------

def lp_norm(f: QSignal, p) -> float:
    """L^p norm as a Riemann sum; p = inf gives the grid maximum of |f|."""
    if p == np.inf or p == math.inf:
        return float(np.sqrt(np.max(qabs2(f.data))))
    p = float(p)
    if p < 1.0:
        raise InvalidParameterError(f"p must be >= 1 or inf, got {p}")
    mod2 = qabs2(f.data)
    if p == 2.0:
        return float(math.sqrt(np.sum(mod2) * f.cell_volume))
    return float((np.sum(mod2 ** (p / 2.0)) * f.cell_volume) ** (1.0 / p))


def _check_compatible(f: QSignal, g: QSignal):
    if f.n != g.n or f.shape != g.shape or f.spacing != g.spacing:
        raise IncompatibleGridsError(
            f"grids differ: ({f.n},{f.shape},{f.spacing}) vs "
            f"({g.n},{g.shape},{g.spacing})")


def inner_q(f: QSignal, g: QSignal) -> Quaternion:
    """Quaternion-valued inner product  sum f(x) conj(g(x)) * cell volume."""
    _check_compatible(f, g)
    prod = qmul(f.data, qconj(g.data))
    comps = prod.reshape(-1, 4).sum(axis=0) * f.cell_volume
    return Quaternion.from_array(comps)


def inner_sc(f: QSignal, g: QSignal) -> float:
    """Symmetric real inner product, the scalar part of ``inner_q``."""
    _check_compatible(f, g)
    return float(np.sum(f.data * g.data) * f.cell_volume)
