"""Uncertainty-principle certification on coefficient stacks.

Every check produces a ``VerdictReport`` holding both sides of its
inequality, the signed slack, the tolerance and the constants that went
into it.  Pass/fail never asserts tightness: the slack is reported, not
bounded above.

All group-domain bounds are stated against the grid admissibility
constant stored in the stack (the group-side quadrature over the very
scale/shear box the stack was computed on), so each verdict is a
statement about the discretization actually computed rather than about
an un-truncated ideal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quat_core import InvalidParameterError, QSignal, lp_norm, qabs2
from .qft import qft_forward
from .transform import CoeffStack, energy_mu

# digamma asymptotic tail: -sum B_2k / (2k x^2k)
_DIGAMMA_TAIL = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma by ascending recurrence onto x >= 8 plus asymptotic series.

    Absolute error below 1e-12 on the positive axis.
    """
    x = float(x)
    if x <= 0.0:
        raise InvalidParameterError("digamma implemented for x > 0 only")
    acc = 0.0
    while x < 8.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coeff in _DIGAMMA_TAIL:
        series += coeff * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x + series


def log_constant(n: int) -> float:
    """Logarithmic-inequality constant digamma(n/2) + ln 2, as published."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return digamma(n / 2.0) + math.log(2.0)


LOG_CONSTANT_PROVENANCE = (
    "digamma(n/2) + ln 2 with n the half-dimension parameter, implemented "
    "exactly as published; no independent derivation of the argument")


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass
class VerdictReport:
    """Outcome of one inequality check.

    ``sense`` records the asserted direction (lhs >= rhs or lhs <= rhs);
    ``slack`` is always lhs - rhs and the check passes when the slack has
    the required sign up to ``tolerance``.
    """

    name: str
    lhs: float
    rhs: float
    slack: float
    sense: str
    tolerance: float
    passed: bool
    constants: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "sense": self.sense,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "constants": self.constants,
            "grid": self.grid,
            "notes": self.notes,
        }


def _verdict(name, lhs, rhs, sense, tol_abs, tol_rel, constants, grid, notes=""):
    tolerance = tol_abs + tol_rel * abs(rhs)
    slack = lhs - rhs
    margin = slack if sense == "ge" else -slack
    return VerdictReport(name, float(lhs), float(rhs), float(slack), sense,
                         float(tolerance), bool(margin >= -tolerance),
                         constants, grid, notes)


def _grid_info(c: CoeffStack) -> dict:
    return {
        "shape": list(c.shape),
        "spacing": list(c.spacing),
        "num_a": c.pg.num_a,
        "num_s": c.pg.num_s,
        "generator": c.generator_name,
    }


# ---------------------------------------------------------------------------
# concentration sets
# ---------------------------------------------------------------------------

@dataclass
class ConcentrationSet:
    """Cells carrying all but a xi-fraction (in energy norm) of a stack."""

    mask: np.ndarray
    measure: float
    xi: float


def _cell_energies(c: CoeffStack) -> np.ndarray:
    mod2 = qabs2(c.data)
    w = c.pg.weights[(...,) + (None,) * (2 * c.n)]
    return mod2 * w * c.t_cell_volume


def essential_support(c: CoeffStack, xi: float) -> ConcentrationSet:
    """Greedy superlevel set: include cells by decreasing |SH|^2 * weight

    until the excluded energy is at most xi^2 of the total.
    """
    if not (0.0 <= xi <= 1.0):
        raise InvalidParameterError("xi must lie in [0, 1]")
    energies = _cell_energies(c)
    total = float(energies.sum())
    if total <= 0.0:
        raise InvalidParameterError("cannot concentrate a zero stack")
    flat = energies.ravel()
    order = np.argsort(flat)[::-1]
    cum = np.cumsum(flat[order])
    target = (1.0 - xi * xi) * total
    if target <= 0.0:
        count = 0
    else:
        count = int(np.searchsorted(cum, target * (1.0 - 1e-12))) + 1
        # never include zero-energy cells
        count = min(count, int(np.count_nonzero(flat)))
    mask = np.zeros(flat.shape, dtype=bool)
    mask[order[:count]] = True
    mask = mask.reshape(energies.shape)

    cellmeas = np.broadcast_to(
        c.pg.weights[(...,) + (None,) * (2 * c.n)] * c.t_cell_volume,
        energies.shape)
    measure = float(cellmeas[mask].sum())
    excluded = max(total - float(flat[order[:count]].sum()), 0.0)
    return ConcentrationSet(mask, measure, math.sqrt(excluded / total))


def donoho_stark_check(c: CoeffStack, xi: float, psi_l2: float,
                       tol_abs: float = 1e-9, tol_rel: float = 5e-2,
                       label: str = "") -> VerdictReport:
    """Haar measure of a xi-concentration set is at least (1-xi^2) C/||psi||^2."""
    cs = essential_support(c, xi)
    rhs = (1.0 - xi * xi) * c.c_grid / psi_l2 ** 2
    constants = {"c_grid": c.c_grid, "psi_l2": psi_l2, "xi": xi,
                 "achieved_xi": cs.xi, "measure": cs.measure}
    return _verdict(f"donoho-stark[xi={xi}]{label}", cs.measure, rhs, "ge",
                    tol_abs, tol_rel, constants, _grid_info(c))


def lieb_norm(c1: CoeffStack, c2: CoeffStack, p: float) -> float:
    """||SH_phi f * SH_psi g||_{p, mu} of the pointwise coefficient product."""
    if p < 1.0:
        raise InvalidParameterError("p must be >= 1")
    if not c1.same_layout(c2):
        raise InvalidParameterError("stacks live on different layouts")
    prod = np.sqrt(qabs2(c1.data) * qabs2(c2.data))
    w = c1.pg.weights[(...,) + (None,) * (2 * c1.n)]
    total = float(np.sum(prod ** p * w) * c1.t_cell_volume)
    return total ** (1.0 / p)


def lieb_check(c_f: CoeffStack, c_g: CoeffStack, p: float,
               f_l2: float, g_l2: float, phi_l2: float, psi_l2: float,
               tol_abs: float = 1e-9, tol_rel: float = 5e-2,
               label: str = "") -> VerdictReport:
    """Mixed-norm product bound

    ||SH_phi f * SH_psi g||_{p,mu}
        <= (sqrt(C_phi C_psi))^(1/p) ||f|| ||g|| (||phi|| ||psi||)^(1-1/p).
    """
    lhs = lieb_norm(c_f, c_g, p)
    c_phi = c_f.c_grid
    c_psi = c_g.c_grid
    rhs = (math.sqrt(c_phi * c_psi) ** (1.0 / p) * f_l2 * g_l2
           * (phi_l2 * psi_l2) ** (1.0 - 1.0 / p))
    constants = {"p": p, "c_phi_grid": c_phi, "c_psi_grid": c_psi,
                 "f_l2": f_l2, "g_l2": g_l2,
                 "phi_l2": phi_l2, "psi_l2": psi_l2}
    return _verdict(f"lieb[p={p}]{label}", lhs, rhs, "le",
                    tol_abs, tol_rel, constants, _grid_info(c_f))


def lieb_concentration_check(c: CoeffStack, xi: float, p: float, psi_l2: float,
                             tol_abs: float = 1e-9, tol_rel: float = 5e-2,
                             label: str = "") -> VerdictReport:
    """Sharper concentration bound  mu(S) >= (1-xi^2)^(p/(p-2)) C/||psi||^2."""
    if p <= 2.0:
        raise InvalidParameterError("concentration bound needs p > 2")
    cs = essential_support(c, xi)
    rhs = (1.0 - xi * xi) ** (p / (p - 2.0)) * c.c_grid / psi_l2 ** 2
    constants = {"c_grid": c.c_grid, "psi_l2": psi_l2, "xi": xi, "p": p,
                 "achieved_xi": cs.xi, "measure": cs.measure}
    return _verdict(f"lieb-concentration[p={p},xi={xi}]{label}", cs.measure,
                    rhs, "ge", tol_abs, tol_rel, constants, _grid_info(c))


# ---------------------------------------------------------------------------
# logarithmic inequality
# ---------------------------------------------------------------------------

def _ln_norm_box_mean(half, depth: int = 24) -> float:
    """Mean of ln|t| over an origin-centered box, by 5-per-axis subdivision.

    The singular central subcell recurses on a 5x smaller box; remaining
    subcells use their center value.  The integrand is integrable, so the
    recursion converges geometrically.
    """
    half = np.asarray(half, dtype=np.float64)
    if depth == 0:
        return math.log(float(np.linalg.norm(half)) / 2.0)
    offs = np.array([-0.4, -0.2, 0.0, 0.2, 0.4])
    mesh = np.meshgrid(*[offs * 2.0 * h for h in half], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    norms = np.linalg.norm(pts, axis=-1)
    center = norms == 0.0
    cells = pts.shape[0]
    outer = float(np.sum(np.log(norms[~center])))
    inner = _ln_norm_box_mean(half / 5.0, depth - 1)
    return (outer + inner) / cells


def _log_abs_grid(coords: np.ndarray, spacing) -> np.ndarray:
    """ln|t| at grid nodes, with the origin cell replaced by its box mean."""
    norms = np.linalg.norm(coords, axis=-1)
    out = np.empty(norms.shape)
    zero = norms == 0.0
    out[~zero] = np.log(norms[~zero])
    if np.any(zero):
        out[zero] = _ln_norm_box_mean([0.5 * d for d in spacing])
    return out


def log_up_check(f: QSignal, c: CoeffStack, mode: str = "t-only",
                 tol_abs: float = 1e-9, tol_rel: float = 5e-2,
                 label: str = "") -> VerdictReport:
    """Logarithmic uncertainty bound on the coefficient and frequency sides.

    t-only mode:   sum ln|t| |SH|^2 dmu + C sum ln|w| |F(f)|^2 dw
                       >= D * C * ||f||^2
    full mode replaces ln|t| by ln|(a,s,t)| >= ln|t|, a weaker (larger)
    left side.  Meaningful for rapidly decaying inputs whose group orbit
    the parameter box covers; reports carry the constant's provenance.
    """
    if mode not in ("t-only", "full-(a,s,t)", "full"):
        raise InvalidParameterError(f"unknown mode {mode!r}")
    n = c.n
    tpl = c.slice_signal(0, 0)
    tcoords = tpl.coords()
    lnt = _log_abs_grid(tcoords, c.spacing)

    if mode != "t-only":
        t2 = np.sum(tcoords * tcoords, axis=-1)
        a2 = (c.pg.a_nodes ** 2)[:, None]
        s2 = np.sum(c.pg.s_nodes ** 2, axis=-1)[None, :]
        base = (a2 + s2)[(...,) + (None,) * (2 * n)]
        lnt = 0.5 * np.log(base + t2)
    mod2 = qabs2(c.data)
    w = c.pg.weights[(...,) + (None,) * (2 * n)]
    term_t = float(np.sum(lnt * mod2 * w) * c.t_cell_volume)

    F = qft_forward(f)
    lnw = _log_abs_grid(F.freq_coords(), F.spacing)
    term_w = c.c_grid * float(np.sum(lnw * qabs2(F.data)) * F.cell_volume)

    d_const = log_constant(n)
    f2 = lp_norm(f, 2.0) ** 2
    lhs = term_t + term_w
    rhs = d_const * c.c_grid * f2
    constants = {"c_grid": c.c_grid, "f_l2sq": f2, "D": d_const,
                 "D_provenance": LOG_CONSTANT_PROVENANCE,
                 "term_t": term_t, "term_w": term_w}
    notes = ("discretized check on a rapidly-decaying surrogate, not a "
             "proof-faithful Schwartz-class statement")
    return _verdict(f"log-up[{mode}]{label}", lhs, rhs, "ge",
                    tol_abs, tol_rel, constants, _grid_info(c), notes)


# ---------------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------------

def entropy(c: CoeffStack) -> float:
    """Shannon-type entropy  -sum |SH|^2 ln(|SH|^2) dmu  with 0 ln 0 = 0."""
    mod2 = qabs2(c.data)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(mod2 > 0.0, mod2 * np.log(mod2), 0.0)
    w = c.pg.weights[(...,) + (None,) * (2 * c.n)]
    return -float(np.sum(term * w) * c.t_cell_volume)


def entropy_check(f: QSignal, c: CoeffStack, psi_l2: float,
                  tol_abs: float = 1e-9, tol_rel: float = 5e-2,
                  label: str = "") -> VerdictReport:
    """Entropy bound  E(|SH f|^2) >= C ||f||^2 ln(1/(||f||^2 ||psi||^2))."""
    f2 = lp_norm(f, 2.0) ** 2
    if f2 == 0.0:
        raise InvalidParameterError("entropy bound needs a nonzero signal")
    lhs = entropy(c)
    rhs = c.c_grid * f2 * math.log(1.0 / (f2 * psi_l2 ** 2))
    constants = {"c_grid": c.c_grid, "psi_l2": psi_l2, "f_l2sq": f2}
    return _verdict(f"entropy{label}", lhs, rhs, "ge",
                    tol_abs, tol_rel, constants, _grid_info(c))
