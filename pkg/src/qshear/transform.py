"""Forward shearlet transform, group-domain energy, reconstruction, kernel.

The transform of f against a window psi is, per scale/shear cell (a, s),
the quaternion inner product of f with every translated atom.  That family
of inner products is exactly a linear convolution of f with the reflected
conjugate atom, so the fast path evaluates it with padded FFTs on the four
real component planes:

* analytic-sample windows: the kernel psi*_{a,s,0} is sampled analytically
  on the difference grid of the signal, making the fast path equal to the
  direct inner-product transform up to float rounding;
* fourier-multiplier windows (real, reflection-symmetric in space): each
  component plane is multiplied in the ordinary Fourier domain by the real
  symbol |a|^(1 - 1/4n) M(A_a^T S_s^T xi), which is the exact ordinary
  Fourier transform of the sheared window.

The formal two-sided product form F(f) * multiplier is also provided
(``multiplier_slice_spectrum``) for inspection; right-multiplying the
two-sided spectrum is only faithful for unsheared or commuting windows,
because shearing mixes frequencies across the two kernel halves of the
transform.  The convolution path above does not suffer from this and is
what all identity checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as _fft

from .quat_core import (
    IncompatibleGridsError,
    InvalidParameterError,
    QSignal,
    Quaternion,
    inner_q,
    qabs2,
    qmul,
    qsignal,
)
from .qft import QSpectrum, qft_forward
from .shear_group import GroupPoint, ParamGrid, apply_AtSt, apply_inv_SA
from .atoms import (
    ANALYTIC_SAMPLE,
    FOURIER_MULTIPLIER,
    CommutationError,
    ShearletGenerator,
    admissibility_group,
    atom_star_kernel,
    check_commutation,
    make_atom,
)


@dataclass
class CoeffStack:
    """Shearlet coefficients: one t-grid signal per (a, s) cell.

    ``data`` has shape (num_a, num_s, *t_shape, 4).  ``c_grid`` is the
    truncation-consistent admissibility constant (the group-side estimator
    evaluated on this very parameter grid); all identity checks in the
    package use it rather than the full-domain constant.  ``border_width``
    flags how many nodes near the t-grid boundary are influenced by the
    finite atom support.
    """

    pg: ParamGrid
    n: int
    shape: tuple
    spacing: tuple
    origin: tuple
    data: np.ndarray = field(repr=False)
    c_grid: float = 0.0
    generator_name: str = ""
    generator_params: dict = field(default_factory=dict)
    border_width: int = 0

    def __post_init__(self):
        self.shape = tuple(int(N) for N in self.shape)
        self.spacing = tuple(float(d) for d in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        want = (self.pg.num_a, self.pg.num_s) + self.shape + (4,)
        if self.data.shape != want:
            raise InvalidParameterError(
                f"stack data shape {self.data.shape} does not match {want}")
        if self.c_grid <= 0.0:
            raise InvalidParameterError("stored admissibility constant must be positive")

    @property
    def t_cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def slice_signal(self, ia: int, isx: int) -> QSignal:
        return qsignal(self.n, self.shape, self.spacing,
                       self.data[ia, isx], origin=self.origin)

    def same_layout(self, other: "CoeffStack") -> bool:
        return (self.n == other.n and self.shape == other.shape
                and self.spacing == other.spacing
                and self.pg.num_a == other.pg.num_a
                and self.pg.num_s == other.pg.num_s
                and np.array_equal(self.pg.a_nodes, other.pg.a_nodes)
                and np.array_equal(self.pg.s_nodes, other.pg.s_nodes))


# ---------------------------------------------------------------------------
# symbols and kernels
# ---------------------------------------------------------------------------

def _real_symbol(gen: ShearletGenerator, a: float, s, freqs: np.ndarray,
                 n: int) -> np.ndarray:
    """|a|^(1-1/4n) M(A_a^T S_s^T xi) for a real multiplier M."""
    lam = apply_AtSt(a, s, freqs)
    vals = gen.multiplier(lam)
    imag = np.max(np.abs(vals[..., 1:])) if vals.size else 0.0
    scale = np.max(np.abs(vals[..., 0])) if vals.size else 0.0
    if imag > 1e-10 * max(scale, 1e-300):
        raise InvalidParameterError(
            f"generator {gen.name!r} has a non-real multiplier; the per-plane "
            f"fast path requires a real symbol")
    return abs(a) ** (1.0 - 1.0 / (4 * n)) * vals[..., 0]


def _padded_freqs(pshape, spacing, half_last: bool = True) -> np.ndarray:
    axes = [_fft.fftfreq(P, d=dx) for P, dx in zip(pshape, spacing)]
    if half_last:
        axes[-1] = _fft.rfftfreq(pshape[-1], d=spacing[-1])
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def _kernel_border_width(kernel2: np.ndarray, shape, tail: float = 1e-3) -> int:
    """Nodes from the boundary influenced by the kernel, from its energy decay."""
    total = float(np.sum(kernel2))
    if total == 0.0:
        return 0
    centers = [(sz - 1) // 2 for sz in kernel2.shape]
    grids = np.meshgrid(*[np.abs(np.arange(sz) - c) for sz, c in
                          zip(kernel2.shape, centers)], indexing="ij")
    radius = np.maximum.reduce(grids)
    order = np.argsort(radius, axis=None)
    cum = np.cumsum(kernel2.ravel()[order])
    cut = np.searchsorted(cum, (1.0 - tail) * total)
    cut = min(cut, cum.size - 1)
    r = int(radius.ravel()[order][cut])
    return min(r, min(shape) // 2)


# ---------------------------------------------------------------------------
# forward transform
# ---------------------------------------------------------------------------

def sh_forward(f: QSignal, gen: ShearletGenerator, pg: ParamGrid,
               lam0: Optional[np.ndarray] = None,
               commutation_check: bool = True) -> CoeffStack:
    """Shearlet transform of f over all (a, s) cells of the parameter grid.

    Refuses windows that fail the convolution-theorem commutation check;
    the returned stack stores the grid admissibility constant computed
    from the same parameter grid.
    """
    gen.expects(f.n)
    if f.n != pg.n:
        raise IncompatibleGridsError("signal and parameter grid disagree on n")
    if commutation_check:
        rep = check_commutation(gen)
        if not rep.passed:
            raise CommutationError(
                f"generator {gen.name!r} violates the quaternion convolution-"
                f"theorem commutation condition (relative violation "
                f"{rep.max_violation:.2e}); the fast transform path is not "
                f"justified for it")
    if lam0 is None:
        # probe at the geometric center of the scale coverage, where the
        # truncated box sees the window's whole orbit
        lam0 = np.zeros(2 * f.n)
        lam0[0] = 1.0 / math.sqrt(np.min(np.abs(pg.a_nodes))
                                  * np.max(np.abs(pg.a_nodes)))
    c_grid = admissibility_group(gen, pg, lam0)
    n = f.n
    shape = f.shape
    pshape = tuple(_fft.next_fast_len(3 * N - 2) for N in shape)
    axes = tuple(range(2 * n))
    fhat = [_fft.rfftn(f.plane(m), pshape, axes=axes) for m in range(4)]

    out = np.empty((pg.num_a, pg.num_s) + shape + (4,), dtype=np.float64)
    crop_sample = tuple(slice(N - 1, 2 * N - 1) for N in shape)
    crop_symbol = tuple(slice(0, N) for N in shape)
    border = 0

    if gen.kind == FOURIER_MULTIPLIER:
        freqs = _padded_freqs(pshape, f.spacing)
        for ia, a in enumerate(pg.a_nodes):
            for isx in range(pg.num_s):
                sym = _real_symbol(gen, float(a), pg.s_nodes[isx], freqs, n)
                for m in range(4):
                    out[ia, isx, ..., m] = _fft.irfftn(
                        fhat[m] * sym, pshape, axes=axes)[crop_symbol]
        ia_wide = int(np.argmax(np.abs(pg.a_nodes)))
        sym = _real_symbol(gen, float(pg.a_nodes[ia_wide]),
                           pg.s_nodes[pg.num_s // 2], freqs, n)
        ker = _fft.fftshift(_fft.irfftn(sym, pshape, axes=axes))
        border = _kernel_border_width(ker * ker, shape)
    else:
        for ia, a in enumerate(pg.a_nodes):
            for isx in range(pg.num_s):
                ker = atom_star_kernel(gen, float(a), pg.s_nodes[isx], f)
                khat = [_fft.rfftn(ker[..., m], pshape, axes=axes) for m in range(4)]
                hr = fhat[0] * khat[0] - fhat[1] * khat[1] - fhat[2] * khat[2] - fhat[3] * khat[3]
                hi = fhat[0] * khat[1] + fhat[1] * khat[0] + fhat[2] * khat[3] - fhat[3] * khat[2]
                hj = fhat[0] * khat[2] - fhat[1] * khat[3] + fhat[2] * khat[0] + fhat[3] * khat[1]
                hk = fhat[0] * khat[3] + fhat[1] * khat[2] - fhat[2] * khat[1] + fhat[3] * khat[0]
                for m, h in enumerate((hr, hi, hj, hk)):
                    out[ia, isx, ..., m] = _fft.irfftn(h, pshape, axes=axes)[crop_sample]
                if ia == int(np.argmax(np.abs(pg.a_nodes))) and isx == pg.num_s // 2:
                    border = _kernel_border_width(qabs2(ker), shape)
        out *= f.cell_volume

    return CoeffStack(pg, n, shape, f.spacing, f.origin, out,
                      c_grid=c_grid, generator_name=gen.name,
                      generator_params=dict(gen.params), border_width=border)


def sh_direct(f: QSignal, gen: ShearletGenerator, g: GroupPoint) -> Quaternion:
    """Quadratic-time oracle: the inner product of f with one atom."""
    return inner_q(f, make_atom(gen, g, f))


def multiplier_slice_spectrum(F: QSpectrum, gen: ShearletGenerator,
                              a: float, s) -> np.ndarray:
    """Formal product form of a slice spectrum.

    Right-multiplies the two-sided spectrum of f by
    |a|^(1-1/4n) M(A_a^T S_s^T w) in exactly that order.  Faithful to the
    transform only when the sheared window commutes with the right
    translation kernel (s = 0 or scalar/j-valued even symbols); exposed for
    closed-form comparisons.
    """
    if gen.multiplier is None:
        raise InvalidParameterError(
            f"generator {gen.name!r} provides no closed-form spectrum")
    n = F.n
    lam = apply_AtSt(a, s, F.freq_coords())
    mult = gen.multiplier(lam)
    return abs(a) ** (1.0 - 1.0 / (4 * n)) * qmul(F.data, mult)


# ---------------------------------------------------------------------------
# group-domain energy and Fourier-side oracle
# ---------------------------------------------------------------------------

def energy_mu(c: CoeffStack) -> float:
    """Haar-weighted coefficient energy  sum w(a,s) ||slice||_2^2."""
    per_slice = np.sum(qabs2(c.data), axis=tuple(range(2, 2 + 2 * c.n)))
    return float(np.sum(per_slice * c.pg.weights) * c.t_cell_volume)


def mu_inner_sc(c1: CoeffStack, c2: CoeffStack) -> float:
    """Scalar inner product on the discretized group domain."""
    if not c1.same_layout(c2):
        raise IncompatibleGridsError("stacks live on different layouts")
    per = np.sum(c1.data * c2.data, axis=tuple(range(2, 3 + 2 * c1.n)))
    return float(np.sum(per * c1.pg.weights) * c1.t_cell_volume)


def mu_inner_q(c1: CoeffStack, c2: CoeffStack) -> Quaternion:
    """Quaternion-valued pairing  sum w dV  c1 conj(c2)."""
    if not c1.same_layout(c2):
        raise IncompatibleGridsError("stacks live on different layouts")
    prod = qmul(c1.data, _neg_imag(c2.data))
    per = np.sum(prod, axis=tuple(range(2, 2 + 2 * c1.n)))
    comps = np.einsum("asm,as->m", per, c1.pg.weights) * c1.t_cell_volume
    return Quaternion.from_array(comps)


def _neg_imag(q: np.ndarray) -> np.ndarray:
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def group_symbol(pg: ParamGrid, gen: ShearletGenerator,
                 freqs: np.ndarray) -> np.ndarray:
    """Grid coverage profile  sum w(a,s) |a|^(2-1/2n) |M(A^T S^T w)|^2.

    For full coverage this is flat and equals the admissibility constant;
    its deviation from the stored grid constant measures truncation and
    quadrature error of the parameter box at each frequency.
    """
    n = pg.n
    out = np.zeros(freqs.shape[:-1])
    for ia, a in enumerate(pg.a_nodes):
        fac = abs(a) ** (2.0 - 1.0 / (2 * n))
        for isx in range(pg.num_s):
            lam = apply_AtSt(float(a), pg.s_nodes[isx], freqs)
            out += pg.weights[ia, isx] * fac * qabs2(gen.multiplier(lam))
    return out


def energy_fourier_oracle(f: QSignal, gen: ShearletGenerator,
                          pg: ParamGrid, pad: bool = True) -> float:
    """Fourier-side prediction of ``energy_mu`` from the coverage profile.

    With ``pad`` the two-sided spectrum is taken on the zero-extended grid
    the transform itself pads to, which resolves the coefficient
    correlation exactly; without it the quadrature aliases correlation
    lags beyond the grid.
    """
    if pad:
        pshape = tuple(_fft.next_fast_len(3 * N - 2) for N in f.shape)
        data = np.zeros(pshape + (4,))
        data[tuple(slice(0, N) for N in f.shape)] = f.data
        f = QSignal(f.n, pshape, f.spacing, f.origin, data)
    F = qft_forward(f)
    sym = group_symbol(pg, gen, F.freq_coords())
    return float(np.sum(qabs2(F.data) * sym) * F.cell_volume)


# ---------------------------------------------------------------------------
# reconstruction and reproducing kernel
# ---------------------------------------------------------------------------

def sh_reconstruct(c: CoeffStack, gen: ShearletGenerator) -> QSignal:
    """Adjoint synthesis  (1/C) sum w(a,s) (slice * atom_{a,s,0})(x).

    Per cell the coefficient slice is convolved against the unreflected
    atom; coefficients multiply atoms from the left, matching the
    inversion formula.
    """
    if c.c_grid <= 0.0:
        raise InvalidParameterError("stack carries no valid admissibility constant")
    gen.expects(c.n)
    n = c.n
    shape = c.shape
    pshape = tuple(_fft.next_fast_len(3 * N - 2) for N in shape)
    axes = tuple(range(2 * n))
    acc = [np.zeros([P // 2 + 1 if i == 2 * n - 1 else P
                     for i, P in enumerate(pshape)], dtype=np.complex128)
           for _ in range(4)]

    if gen.kind == FOURIER_MULTIPLIER:
        freqs = _padded_freqs(pshape, c.spacing)
        for ia, a in enumerate(c.pg.a_nodes):
            for isx in range(c.pg.num_s):
                sym = _real_symbol(gen, float(a), c.pg.s_nodes[isx], freqs, n)
                w = c.pg.weights[ia, isx]
                for m in range(4):
                    shat = _fft.rfftn(c.data[ia, isx, ..., m], pshape, axes=axes)
                    acc[m] += w * shat * sym
        crop = tuple(slice(0, N) for N in shape)
        dv_extra = 1.0
    else:
        diff_axes = [(np.arange(2 * N - 1) - (N - 1)) * d
                     for N, d in zip(shape, c.spacing)]
        mesh = np.meshgrid(*diff_axes, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        for ia, a in enumerate(c.pg.a_nodes):
            for isx in range(c.pg.num_s):
                z = apply_inv_SA(float(a), c.pg.s_nodes[isx], pts)
                ker = abs(float(a)) ** (1.0 / (4 * n) - 1.0) * gen.spatial(z)
                khat = [_fft.rfftn(ker[..., m], pshape, axes=axes) for m in range(4)]
                shat = [_fft.rfftn(c.data[ia, isx, ..., m], pshape, axes=axes)
                        for m in range(4)]
                w = c.pg.weights[ia, isx]
                acc[0] += w * (shat[0] * khat[0] - shat[1] * khat[1]
                               - shat[2] * khat[2] - shat[3] * khat[3])
                acc[1] += w * (shat[0] * khat[1] + shat[1] * khat[0]
                               + shat[2] * khat[3] - shat[3] * khat[2])
                acc[2] += w * (shat[0] * khat[2] - shat[1] * khat[3]
                               + shat[2] * khat[0] + shat[3] * khat[1])
                acc[3] += w * (shat[0] * khat[3] + shat[1] * khat[2]
                               - shat[2] * khat[1] + shat[3] * khat[0])
        crop = tuple(slice(N - 1, 2 * N - 1) for N in shape)
        dv_extra = c.t_cell_volume

    planes = [_fft.irfftn(h, pshape, axes=axes)[crop] * (dv_extra / c.c_grid)
              for h in acc]
    return qsignal(n, shape, c.spacing, np.stack(planes, axis=-1),
                   origin=c.origin)


def atom_signal(gen: ShearletGenerator, g: GroupPoint, like: QSignal) -> QSignal:
    """Materialize one atom on a signal grid, whatever the generator kind.

    Sample windows evaluate analytically; multiplier windows synthesize the
    (real) atom from its ordinary Fourier symbol on the grid frequencies,
    which periodizes the atom over the grid box.
    """
    if gen.kind == ANALYTIC_SAMPLE:
        return make_atom(gen, g, like)
    n = like.n
    shape = like.shape
    axes = tuple(range(2 * n))
    freqs = _padded_freqs(shape, like.spacing)
    sym = _real_symbol(gen, g.a, g.s, freqs, n)
    shift = np.asarray(g.t) - np.asarray(like.origin)
    phase = np.exp(-2j * np.pi * (freqs @ shift))
    plane = _fft.irfftn(sym * phase, shape, axes=axes) / like.cell_volume
    data = np.zeros(shape + (4,))
    data[..., 0] = plane
    return like.with_data(data)


def kernel(gen: ShearletGenerator, g1: GroupPoint, g2: GroupPoint,
           like: QSignal, c_grid: float) -> Quaternion:
    """Reproducing kernel value  (1/C) <atom_g1, atom_g2>."""
    if c_grid <= 0.0:
        raise InvalidParameterError("admissibility constant must be positive")
    a1 = atom_signal(gen, g1, like)
    a2 = atom_signal(gen, g2, like)
    return (1.0 / c_grid) * inner_q(a1, a2)
