"""Standard verification battery: inputs, stacks and the full check run.

The battery pairs the bundled wedge window with a fixed family of test
signals (Gaussians of several widths, a shifted Gaussian, a single atom,
band-limited noise) and runs every inequality check at the published
tolerances.  The logarithmic checks use carrier-modulated Gaussian
envelopes: the bound compares coefficient-domain spread against the grid
admissibility constant, so its inputs must live inside the frequency band
the scale/shear box covers, as the check's contract requires of its
rapidly-decaying surrogates.

Everything is deterministic given the seed; reports are sorted by name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quat_core import QSignal, lp_norm, qsignal
from .shear_group import GroupPoint, ParamGrid, make_param_grid
from .transform import CoeffStack, atom_signal, sh_forward
from .signal_io import make_generator
from .uncertainty import (
    VerdictReport,
    donoho_stark_check,
    entropy_check,
    lieb_check,
    lieb_concentration_check,
    log_up_check,
)


@dataclass
class BatteryConfig:
    """Grid, parameter-box and tolerance settings for one battery run."""

    shape: tuple = (64, 64)
    spacing: tuple = (0.16, 0.16)
    a_min: float = 0.27
    a_max: float = 1.6
    n_a: int = 8
    s_max: float = 1.5
    n_s: int = 9
    seed: int = 1234
    tol_abs: float = 1e-9
    tol_rel: float = 5e-2
    generator: str = "wedge"
    generator_params: dict = field(default_factory=dict)
    band: tuple = (1.30, 1.75)
    band_ratio: float = 0.22
    envelope_sigma: float = 0.8
    xis: tuple = (0.0, 0.3, 0.5)
    lieb_ps: tuple = (1.0, 2.5, 3.0, 4.0, 16.0)
    conc_ps: tuple = (3.0, 4.0)
    conc_xis: tuple = (0.0, 0.5)
    gammas: tuple = (0.5, 1.0, 2.0)

    def param_grid(self) -> ParamGrid:
        return make_param_grid(self.a_min, self.a_max, self.n_a,
                               self.s_max, self.n_s, n=1)


def band_limited_noise(shape, spacing, seed, band=(1.30, 1.75),
                       band_ratio=0.22, sigma=0.8, modes=48) -> QSignal:
    """Random quaternion signal with spectrum in a double frequency band.

    A fixed number of quaternion-amplitude carriers with first-axis
    frequencies drawn from +-[band] is enveloped by a Gaussian; the result
    is normalized to unit energy.  The mode table depends only on the
    seed, so refining the grid resamples the same underlying function.
    """
    rng = np.random.default_rng(seed)
    n2 = len(shape)
    table = []
    for _ in range(modes):
        w = np.empty(n2)
        w[0] = rng.choice([-1.0, 1.0]) * rng.uniform(*band)
        w[1:] = rng.uniform(-band_ratio, band_ratio, size=n2 - 1) * w[0]
        table.append((w, rng.standard_normal(4), rng.standard_normal(4)))
    base = qsignal(n2 // 2, shape, spacing, np.zeros(tuple(shape) + (4,)))
    coords = base.coords()
    r2 = np.sum(coords * coords, axis=-1)
    env = np.exp(-r2 / (2.0 * sigma ** 2))
    data = np.zeros(tuple(shape) + (4,))
    for w, qc, qs in table:
        phase = 2.0 * np.pi * (coords @ w)
        data += (qc * np.cos(phase)[..., None] + qs * np.sin(phase)[..., None])
    data *= env[..., None]
    f = base.with_data(data)
    return f.with_data(f.data / lp_norm(f, 2.0))


def modulated_gaussian(shape, spacing, gamma, carrier, shift=None) -> QSignal:
    """Gaussian envelope of width gamma riding a quaternion carrier wave."""
    base = qsignal(len(shape) // 2, shape, spacing,
                   np.zeros(tuple(shape) + (4,)))
    coords = base.coords()
    if shift is not None:
        coords = coords - np.asarray(shift, dtype=np.float64)
    r2 = np.sum(coords * coords, axis=-1)
    env = np.exp(-r2 / gamma ** 2)
    phase = 2.0 * np.pi * (coords @ np.asarray(carrier, dtype=np.float64))
    qc = np.array([1.0, 0.0, 0.5, 0.0])
    qs = np.array([0.0, 0.7, 0.0, 0.3])
    data = (qc * np.cos(phase)[..., None] + qs * np.sin(phase)[..., None])
    data *= env[..., None]
    f = base.with_data(data)
    return f.with_data(f.data / lp_norm(f, 2.0))


def _gaussian_signal(shape, spacing, gamma, shift=None) -> QSignal:
    gen = make_generator("paper-gaussian-f", {"gamma": gamma})
    base = qsignal(len(shape) // 2, shape, spacing,
                   np.zeros(tuple(shape) + (4,)))
    coords = base.coords()
    if shift is not None:
        coords = coords - np.asarray(shift, dtype=np.float64)
    f = base.with_data(gen.spatial(coords))
    return f.with_data(f.data / lp_norm(f, 2.0))


def battery_inputs(cfg: BatteryConfig, gen) -> dict:
    """The standard input family, all unit-energy on the battery grid."""
    shape, spacing = cfg.shape, cfg.spacing
    pg = cfg.param_grid()
    mid_a = float(np.abs(pg.a_nodes[3 * pg.num_a // 4]))
    g0 = GroupPoint(mid_a, np.zeros(1), np.zeros(2))
    base = qsignal(1, shape, spacing, np.zeros(tuple(shape) + (4,)))
    atom = atom_signal(gen, g0, base)
    atom = atom.with_data(atom.data / lp_norm(atom, 2.0))
    out = {}
    for gamma in cfg.gammas:
        out[f"gaussian[{gamma:g}]"] = _gaussian_signal(shape, spacing, gamma)
    out["shifted-gaussian"] = _gaussian_signal(shape, spacing, 1.0,
                                               shift=(1.2, -0.9))
    out["atom"] = atom
    out["band-noise"] = band_limited_noise(shape, spacing, cfg.seed,
                                           cfg.band, cfg.band_ratio,
                                           cfg.envelope_sigma)
    return out


def log_up_inputs(cfg: BatteryConfig) -> dict:
    """Carrier-modulated Gaussian family for the logarithmic checks."""
    shape, spacing = cfg.shape, cfg.spacing
    carrier = (0.5 * (cfg.band[0] + cfg.band[1]), 0.0)
    out = {}
    for gamma in cfg.gammas:
        out[f"mod-gaussian[{gamma:g}]"] = modulated_gaussian(
            shape, spacing, gamma, carrier)
    out["shifted-mod-gaussian"] = modulated_gaussian(
        shape, spacing, 1.0, carrier, shift=(1.6, 1.2))
    return out


def standard_battery(cfg: BatteryConfig | None = None) -> list:
    """Run every check of the verification battery; returns sorted reports."""
    cfg = cfg or BatteryConfig()
    gen = make_generator(cfg.generator, cfg.generator_params)
    pg = cfg.param_grid()
    psi_l2 = gen.norm_l2(like=qsignal(1, cfg.shape, cfg.spacing,
                                      np.zeros(tuple(cfg.shape) + (4,))))
    inputs = battery_inputs(cfg, gen)
    stacks = {name: sh_forward(f, gen, pg) for name, f in inputs.items()}
    ta, tr = cfg.tol_abs, cfg.tol_rel

    reports: list[VerdictReport] = []
    for name, f in inputs.items():
        c = stacks[name]
        label = f" @{name}"
        for xi in cfg.xis:
            reports.append(donoho_stark_check(c, xi, psi_l2, ta, tr, label))
        f2 = lp_norm(f, 2.0)
        for p in cfg.lieb_ps:
            reports.append(lieb_check(c, c, p, f2, f2, psi_l2, psi_l2,
                                      ta, tr, label))
        for p in cfg.conc_ps:
            for xi in cfg.conc_xis:
                reports.append(lieb_concentration_check(c, xi, p, psi_l2,
                                                        ta, tr, label))
        # entropy: normalized so ||f|| ||psi|| = 1, and a rescaled variant
        f_ent = f.with_data(f.data / (f2 * psi_l2))
        c_ent = _scaled_stack(c, 1.0 / (f2 * psi_l2))
        reports.append(entropy_check(f_ent, c_ent, psi_l2, ta, tr,
                                     label + "/normalized"))
        f_big = f_ent.with_data(3.0 * f_ent.data)
        c_big = _scaled_stack(c_ent, 3.0)
        reports.append(entropy_check(f_big, c_big, psi_l2, ta, tr,
                                     label + "/rescaled"))

    for name, f in log_up_inputs(cfg).items():
        c = sh_forward(f, gen, pg)
        label = f" @{name}"
        for mode in ("t-only", "full-(a,s,t)"):
            reports.append(log_up_check(f, c, mode, ta, tr, label))

    reports.sort(key=lambda r: r.name)
    return reports


def _scaled_stack(c: CoeffStack, scale: float) -> CoeffStack:
    """Stack of the rescaled signal; the transform is real-linear."""
    return CoeffStack(c.pg, c.n, c.shape, c.spacing, c.origin,
                      c.data * scale, c_grid=c.c_grid,
                      generator_name=c.generator_name,
                      generator_params=c.generator_params,
                      border_width=c.border_width)
