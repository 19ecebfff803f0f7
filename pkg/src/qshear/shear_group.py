"""Full shearlet group on R^(2n): parabolic scaling, shears, Haar weights.

A group element is a triple (a, s, t) with nonzero scale a, shear vector
s in R^(2n-1) and translation t in R^(2n).  The scaling matrix is
A_a = diag(a, sg(a)|a|^(1/2n) I) and the shear S_s is unitriangular with
first row (1, s^T).  Composition, inversion and the transposed action
A_a^T S_s^T on frequency vectors follow the closed forms below; the
matrices themselves are only materialized for tests.

The left Haar measure da ds dt / |a|^(2n+1) is discretized by a log-spaced
midpoint rule in the scale and a linear midpoint rule in each shear
coordinate (``make_param_grid``); translations are handled by the signal
grid, so ``ParamGrid`` weights carry only the (a, s) part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat_core import InvalidParameterError


@dataclass(frozen=True)
class GroupPoint:
    """One shearlet-group element (a, s, t)."""

    a: float
    s: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        if self.a == 0.0:
            raise InvalidParameterError("scale a must be nonzero")
        object.__setattr__(self, "s", np.atleast_1d(np.asarray(self.s, dtype=np.float64)))
        object.__setattr__(self, "t", np.atleast_1d(np.asarray(self.t, dtype=np.float64)))
        if self.t.shape[0] != self.s.shape[0] + 1:
            raise InvalidParameterError(
                f"t must have one more entry than s; got {self.t.shape[0]} vs {self.s.shape[0]}")

    @property
    def n(self) -> int:
        return (self.s.shape[0] + 1) // 2


def identity(n: int) -> GroupPoint:
    return GroupPoint(1.0, np.zeros(2 * n - 1), np.zeros(2 * n))


def _sg(a: float) -> float:
    return 1.0 if a > 0 else -1.0


def mat_A(a: float, n: int) -> np.ndarray:
    """Parabolic scaling matrix diag(a, sg(a)|a|^(1/2n) I_(2n-1))."""
    if a == 0.0:
        raise InvalidParameterError("scale a must be nonzero")
    d = 2 * n
    out = np.eye(d) * (_sg(a) * abs(a) ** (1.0 / (2 * n)))
    out[0, 0] = a
    return out


def mat_S(s, n: int) -> np.ndarray:
    """Shear matrix: identity with first row (1, s^T)."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (2 * n - 1,):
        raise InvalidParameterError(f"shear must have {2 * n - 1} entries")
    out = np.eye(2 * n)
    out[0, 1:] = s
    return out


def compose(g: GroupPoint, h: GroupPoint) -> GroupPoint:
    """Group law (a,s,t) o (a',s',t') = (aa', s + |a|^(1-1/2n) s', t + S_s A_a t')."""
    n = g.n
    a = g.a * h.a
    s = g.s + abs(g.a) ** (1.0 - 1.0 / (2 * n)) * h.s
    scaled = np.empty_like(h.t)
    scaled[0] = g.a * h.t[0]
    scaled[1:] = _sg(g.a) * abs(g.a) ** (1.0 / (2 * n)) * h.t[1:]
    t = g.t + np.concatenate([[scaled[0] + g.s @ scaled[1:]], scaled[1:]])
    return GroupPoint(a, s, t)


def invert(g: GroupPoint) -> GroupPoint:
    """Inverse (a^-1, -|a|^(1/2n - 1) s, -A_a^-1 S_s^-1 t)."""
    n = g.n
    s_inv = -abs(g.a) ** (1.0 / (2 * n) - 1.0) * g.s
    t_inv = -apply_inv_SA(g.a, g.s, g.t)
    return GroupPoint(1.0 / g.a, s_inv, t_inv)


def apply_AtSt(a: float, s, lam: np.ndarray) -> np.ndarray:
    """A_a^T S_s^T applied to frequency vectors, vectorized.

    ``lam`` has the 2n frequency components in its trailing axis.  Returns
    (a l_1, sg(a)|a|^(1/2n) (s_p l_1 + l_{p+1}), ...) without building the
    matrices.
    """
    if a == 0.0:
        raise InvalidParameterError("scale a must be nonzero")
    lam = np.asarray(lam, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    n2 = lam.shape[-1]
    if s.shape != (n2 - 1,):
        raise InvalidParameterError("shear length must be 2n-1")
    out = np.empty_like(lam)
    l1 = lam[..., 0]
    out[..., 0] = a * l1
    root = _sg(a) * abs(a) ** (1.0 / n2)
    out[..., 1:] = root * (s * l1[..., None] + lam[..., 1:])
    return out


def apply_inv_SA(a: float, s, x: np.ndarray) -> np.ndarray:
    """A_a^-1 S_s^-1 applied to point vectors, vectorized over leading axes."""
    if a == 0.0:
        raise InvalidParameterError("scale a must be nonzero")
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    n2 = x.shape[-1]
    out = np.empty_like(x)
    tail = x[..., 1:]
    out[..., 0] = (x[..., 0] - tail @ s) / a
    out[..., 1:] = tail / (_sg(a) * abs(a) ** (1.0 / n2))
    return out


# ---------------------------------------------------------------------------
# discretized (a, s) parameter set with Haar quadrature weights
# ---------------------------------------------------------------------------

@dataclass
class ParamGrid:
    """Midpoint discretization of the (a, s) marginal of the left Haar measure.

    ``a_nodes`` are log-midpoints covering +-[a_min, a_max]; ``da`` holds
    the matching da cell measures (log cell width times |a|).  ``s_nodes``
    is the tensor midpoint grid over [-s_max, s_max]^(2n-1) with uniform
    cell measure ``ds``.  ``weights[ia, is]`` = da * ds / |a|^(2n+1).
    """

    n: int
    a_nodes: np.ndarray
    da: np.ndarray
    s_nodes: np.ndarray
    ds: float
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.a_nodes = np.asarray(self.a_nodes, dtype=np.float64)
        self.da = np.asarray(self.da, dtype=np.float64)
        self.s_nodes = np.atleast_2d(np.asarray(self.s_nodes, dtype=np.float64))
        if np.any(self.a_nodes == 0.0):
            raise InvalidParameterError("a nodes must exclude zero")
        if np.any(self.da <= 0.0) or self.ds <= 0.0:
            raise InvalidParameterError("cell measures must be positive")
        if self.s_nodes.shape[1] != 2 * self.n - 1:
            raise InvalidParameterError("shear nodes must have 2n-1 columns")
        if self.weights is None:
            haar = self.da / np.abs(self.a_nodes) ** (2 * self.n + 1)
            self.weights = np.repeat((haar * self.ds)[:, None],
                                     self.s_nodes.shape[0], axis=1)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.a_nodes.shape[0], self.s_nodes.shape[0]):
            raise InvalidParameterError("weights shape must be (n_a, n_s)")
        if np.any(self.weights <= 0.0):
            raise InvalidParameterError("weights must be positive")

    @property
    def num_a(self) -> int:
        return self.a_nodes.shape[0]

    @property
    def num_s(self) -> int:
        return self.s_nodes.shape[0]

    def admissibility_weights(self) -> np.ndarray:
        """Cell measures for da ds / |a|^((4n^2-2n+1)/2n), shape (n_a, n_s)."""
        expo = (4 * self.n * self.n - 2 * self.n + 1) / (2.0 * self.n)
        col = self.da / np.abs(self.a_nodes) ** expo * self.ds
        return np.repeat(col[:, None], self.num_s, axis=1)

    def total_weight(self) -> float:
        return float(np.sum(self.weights))


def make_param_grid(a_min: float, a_max: float, n_a: int, s_max: float,
                    n_s: int, n: int, include_negative: bool = True) -> ParamGrid:
    """Log-midpoint scale nodes and linear-midpoint shear nodes.

    ``n_a`` counts scale cells per sign (both signs included by default)
    and ``n_s`` counts shear cells per shear coordinate.
    """
    if not (0.0 < a_min < a_max):
        raise InvalidParameterError("need 0 < a_min < a_max")
    if n_a < 1 or n_s < 1 or s_max <= 0.0:
        raise InvalidParameterError("need n_a, n_s >= 1 and s_max > 0")
    du = (np.log(a_max) - np.log(a_min)) / n_a
    mids = np.exp(np.log(a_min) + (np.arange(n_a) + 0.5) * du)
    if include_negative:
        a_nodes = np.concatenate([-mids[::-1], mids])
    else:
        a_nodes = mids
    da = du * np.abs(a_nodes)

    dim_s = 2 * n - 1
    dsx = 2.0 * s_max / n_s
    axis = -s_max + (np.arange(n_s) + 0.5) * dsx
    mesh = np.meshgrid(*([axis] * dim_s), indexing="ij")
    s_nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    return ParamGrid(n, a_nodes, da, s_nodes, float(dsx ** dim_s))
