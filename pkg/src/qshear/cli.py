"""Batch command-line interface.

Subcommands: ``transform``, ``reconstruct``, ``admissibility``, ``verify``
and ``qft``.  All reports are single JSON documents on stdout with a
pinned ``schema_version``; runs are deterministic given config, inputs
and seed.

Exit codes: 0 success / all verdicts pass, 1 I/O failure, 2 invalid
configuration, 3 mathematical precondition refused (commutation check,
non-admissible window), 4 verdict failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .quat_core import InvalidParameterError, QShearError, lp_norm, qsignal
from .shear_group import make_param_grid
from .qft import qft_forward, qft_inverse
from .atoms import (CommutationError, NonAdmissibleError,
                    admissibility_direct, admissibility_group)
from .transform import energy_mu, sh_forward, sh_reconstruct
from .signal_io import (FileFormatError, make_generator, read_qsig,
                        read_stack, write_qsig, write_stack)
from .battery import BatteryConfig, standard_battery

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_REFUSED = 3
EXIT_VERDICT = 4


@dataclasses.dataclass
class RunConfig:
    """Validated CLI configuration (generator, parameter box, grid)."""

    generator: str = "wedge"
    generator_params: dict = dataclasses.field(default_factory=dict)
    a_min: float = 0.27
    a_max: float = 1.6
    n_a: int = 8
    s_max: float = 1.5
    n_s: int = 9
    n: int = 1
    shape: tuple = (64, 64)
    spacing: tuple = (0.16, 0.16)
    seed: int = 1234
    tol_abs: float = 1e-9
    tol_rel: float = 5e-2

    @staticmethod
    def from_file(path, overrides=None) -> "RunConfig":
        raw = {}
        if path is not None:
            with open(path) as fh:
                raw = json.load(fh)
        cfg = RunConfig()
        gen = raw.get("generator", {})
        if isinstance(gen, str):
            cfg.generator = gen
        elif gen:
            cfg.generator = gen.get("name", cfg.generator)
            cfg.generator_params = dict(gen.get("params", {}))
        pgrid = raw.get("param_grid", {})
        cfg.a_min = float(pgrid.get("a_min", cfg.a_min))
        cfg.a_max = float(pgrid.get("a_max", cfg.a_max))
        cfg.n_a = int(pgrid.get("n_a", cfg.n_a))
        cfg.s_max = float(pgrid.get("s_max", cfg.s_max))
        cfg.n_s = int(pgrid.get("n_s", cfg.n_s))
        grid = raw.get("grid", {})
        cfg.n = int(grid.get("n", cfg.n))
        cfg.shape = tuple(grid.get("shape", cfg.shape))
        cfg.spacing = tuple(grid.get("spacing", cfg.spacing))
        tol = raw.get("tolerance", {})
        cfg.tol_abs = float(tol.get("abs", cfg.tol_abs))
        cfg.tol_rel = float(tol.get("rel", cfg.tol_rel))
        cfg.seed = int(raw.get("seed", cfg.seed))
        for key, value in (overrides or {}).items():
            if value is not None:
                setattr(cfg, key, value)
        cfg.validate()
        return cfg

    def validate(self):
        if not (0.0 < self.a_min < self.a_max):
            raise InvalidParameterError("need 0 < a_min < a_max")
        if self.n_a < 1 or self.n_s < 1 or self.s_max <= 0.0:
            raise InvalidParameterError("need n_a, n_s >= 1 and s_max > 0")
        if self.n < 1:
            raise InvalidParameterError("n must be >= 1")
        if len(self.shape) != 2 * self.n or len(self.spacing) != 2 * self.n:
            raise InvalidParameterError("grid shape/spacing must have 2n entries")
        if any(int(N) < 2 for N in self.shape):
            raise InvalidParameterError("grid extents must be >= 2")
        if any(float(d) <= 0.0 for d in self.spacing):
            raise InvalidParameterError("grid spacing must be positive")
        if self.tol_abs < 0.0 or self.tol_rel < 0.0:
            raise InvalidParameterError("tolerances must be nonnegative")

    def param_grid(self):
        return make_param_grid(self.a_min, self.a_max, self.n_a,
                               self.s_max, self.n_s, self.n)


def _emit(doc: dict):
    doc = dict(doc)
    doc["schema_version"] = SCHEMA_VERSION
    json.dump(doc, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def _cmd_transform(args) -> int:
    cfg = RunConfig.from_file(args.config, {"seed": args.seed})
    gen = make_generator(cfg.generator, cfg.generator_params)
    f = read_qsig(args.input)
    c = sh_forward(f, gen, cfg.param_grid())
    write_stack(args.output, c)
    _emit({
        "command": "transform",
        "c_psi_grid": c.c_grid,
        "energy_mu": energy_mu(c),
        "slices": c.pg.num_a * c.pg.num_s,
        "border_width": c.border_width,
        "generator": c.generator_name,
        "grid": {"n": f.n, "shape": list(f.shape), "spacing": list(f.spacing)},
        "output": str(args.output),
    })
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    c = read_stack(args.input)
    gen = make_generator(c.generator_name, c.generator_params)
    rec = sh_reconstruct(c, gen)
    write_qsig(args.output, rec)
    error = None
    if args.reference:
        ref = read_qsig(args.reference)
        num = lp_norm(ref.with_data(rec.data - ref.data), 2.0)
        den = lp_norm(ref, 2.0)
        error = num / den if den > 0 else None
    _emit({
        "command": "reconstruct",
        "relative_l2_error": error,
        "c_psi_grid": c.c_grid,
        "output": str(args.output),
    })
    return EXIT_OK


def _cmd_admissibility(args) -> int:
    cfg = RunConfig.from_file(args.config, {"seed": args.seed})
    gen = make_generator(cfg.generator, cfg.generator_params)
    pg = make_param_grid(cfg.a_min, cfg.a_max, max(cfg.n_a, 48),
                         cfg.s_max, max(cfg.n_s, 48), cfg.n)
    doc = {"command": "admissibility", "generator": cfg.generator}
    try:
        c_direct = admissibility_direct(gen, cfg.n, cfg.shape, cfg.spacing)
        c_group = admissibility_group(gen, pg)
        doc.update({
            "status": "admissible",
            "c_direct": c_direct,
            "c_group": c_group,
            "gap": abs(c_direct - c_group) / max(c_direct, c_group),
        })
    except NonAdmissibleError as exc:
        doc.update({"status": "non-admissible-or-unresolved",
                    "detail": str(exc)})
    _emit(doc)
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = RunConfig.from_file(args.config, {"seed": args.seed})
    tol_rel = cfg.tol_rel if args.tolerance is None else float(args.tolerance)
    bat = BatteryConfig(
        shape=cfg.shape, spacing=cfg.spacing,
        a_min=cfg.a_min, a_max=cfg.a_max, n_a=cfg.n_a,
        s_max=cfg.s_max, n_s=cfg.n_s, seed=cfg.seed,
        tol_abs=cfg.tol_abs if args.tolerance is None else 0.0,
        tol_rel=tol_rel,
        generator=cfg.generator, generator_params=cfg.generator_params,
    )
    reports = standard_battery(bat)
    _emit({
        "command": "verify",
        "reports": [r.to_dict() for r in reports],
        "passed": all(r.passed for r in reports),
        "checks": len(reports),
    })
    failing = [r for r in reports if not r.passed]
    if failing:
        print(f"verdict failure: {failing[0].name}", file=sys.stderr)
        return EXIT_VERDICT
    return EXIT_OK


def _cmd_qft(args) -> int:
    f = read_qsig(args.input)
    if args.inverse:
        if not args.like:
            raise InvalidParameterError(
                "--inverse needs --like with the spatial grid template")
        tpl = read_qsig(args.like)
        from .qft import QSpectrum
        freq_spacing = tuple(1.0 / (N * d)
                             for N, d in zip(tpl.shape, tpl.spacing))
        freq_origin = tuple(-(N // 2) * dw
                            for N, dw in zip(tpl.shape, freq_spacing))
        spec = QSpectrum(f.n, f.shape, f.spacing, f.origin, f.data,
                         src_spacing=tpl.spacing, src_origin=tpl.origin)
        if not np.allclose(spec.spacing, freq_spacing, rtol=1e-12, atol=0):
            raise InvalidParameterError(
                "spectrum grid is not the frequency grid of --like")
        out = qft_inverse(spec)
        write_qsig(args.output, out)
        _emit({"command": "qft", "direction": "inverse",
               "output": str(args.output)})
        return EXIT_OK
    F = qft_forward(f)
    write_qsig(args.output, F.as_signal())
    n_in = lp_norm(f, 2.0)
    _emit({
        "command": "qft",
        "direction": "forward",
        "norm_in": n_in,
        "norm_out": F.norm_l2(),
        "plancherel_defect": abs(F.norm_l2() - n_in) / n_in if n_in else 0.0,
        "output": str(args.output),
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qshear",
        description="Quaternion shearlet transform and verification suite")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="signal file to coefficient stack")
    p.add_argument("--config", default=None)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("reconstruct", help="coefficient stack to signal file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--reference", default=None,
                   help="original signal for the error metric")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("admissibility",
                       help="direct and group-side admissibility estimates")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_admissibility)

    p = sub.add_parser("verify", help="run the inequality battery")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None,
                   help="override the relative tolerance (abs set to 0)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("qft", help="two-sided quaternion Fourier transform")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--like", default=None,
                   help="spatial-grid template for --inverse")
    p.set_defaults(func=_cmd_qft)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (CommutationError, NonAdmissibleError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except InvalidParameterError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QShearError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
