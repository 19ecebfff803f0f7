"""Binary persistence, PPM ingestion and the bundled window generators.

File formats (all little-endian, versioned):

``QSH1`` signal files
    magic ``QSH1``, u32 version, u32 n, 2n x u32 shape, 2n x f64 spacing,
    2n x f64 origin, then one f64 quadruple (r, i, j, k) per node in
    row-major node order.

``QSTK`` coefficient stacks
    magic ``QSTK``, u32 version, u32 n, u32 num_a, u32 num_s, the scale
    nodes and their cell measures, the shear nodes and their cell measure,
    the Haar weights, the grid admissibility constant, the border flag
    width, generator name and JSON parameters, the t-grid header, then one
    signal payload per (a, s) cell in scale-major order.

Both formats round-trip bit-exactly.
"""

from __future__ import annotations

import json
import math
import struct

import numpy as np

from .quat_core import InvalidParameterError, QShearError, QSignal, qsignal
from .shear_group import ParamGrid
from .transform import CoeffStack
from .atoms import ANALYTIC_SAMPLE, FOURIER_MULTIPLIER, ShearletGenerator


class FileFormatError(QShearError):
    """A file does not conform to the expected binary layout."""


class BadMagicError(FileFormatError):
    pass


class TruncatedFileError(FileFormatError):
    def __init__(self, expected: int, actual: int, what: str):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"truncated {what}: expected {expected} bytes, got {actual}")


SIGNAL_MAGIC = b"QSH1"
STACK_MAGIC = b"QSTK"
FORMAT_VERSION = 1
MAX_NODES = 1 << 26


def _read_exact(fh, count: int, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise TruncatedFileError(count, len(buf), what)
    return buf


def _read_f64(fh, count: int, what: str) -> np.ndarray:
    return np.frombuffer(_read_exact(fh, 8 * count, what), dtype="<f8").copy()


def _read_u32(fh, count: int, what: str) -> np.ndarray:
    return np.frombuffer(_read_exact(fh, 4 * count, what), dtype="<u4").copy()


# ---------------------------------------------------------------------------
# signal files
# ---------------------------------------------------------------------------

def write_qsig(path, sig: QSignal):
    with open(path, "wb") as fh:
        fh.write(SIGNAL_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, sig.n))
        fh.write(np.asarray(sig.shape, dtype="<u4").tobytes())
        fh.write(np.asarray(sig.spacing, dtype="<f8").tobytes())
        fh.write(np.asarray(sig.origin, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(sig.data, dtype="<f8").tobytes())


def read_qsig(path) -> QSignal:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "signal header")
        if magic != SIGNAL_MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {SIGNAL_MAGIC!r}")
        version, n = struct.unpack("<II", _read_exact(fh, 8, "signal header"))
        if version != FORMAT_VERSION:
            raise FileFormatError(f"unsupported signal format version {version}")
        if not (1 <= n <= 8):
            raise FileFormatError(f"implausible dimension parameter n={n}")
        shape = tuple(int(v) for v in _read_u32(fh, 2 * n, "signal header"))
        total = math.prod(shape)
        if total <= 0 or total > MAX_NODES:
            raise FileFormatError(f"shape {shape} overflows the node limit")
        spacing = tuple(_read_f64(fh, 2 * n, "signal header"))
        origin = tuple(_read_f64(fh, 2 * n, "signal header"))
        payload = _read_f64(fh, total * 4, "signal payload")
        extra = fh.read(1)
        if extra:
            raise FileFormatError("trailing bytes after signal payload")
    return QSignal(n, shape, spacing, origin, payload.reshape(shape + (4,)))


# ---------------------------------------------------------------------------
# stack files
# ---------------------------------------------------------------------------

def write_stack(path, c: CoeffStack):
    name = c.generator_name.encode("utf-8")
    params = json.dumps(c.generator_params, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(STACK_MAGIC)
        fh.write(struct.pack("<IIII", FORMAT_VERSION, c.n, c.pg.num_a, c.pg.num_s))
        fh.write(np.ascontiguousarray(c.pg.a_nodes, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(c.pg.da, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(c.pg.s_nodes, dtype="<f8").tobytes())
        fh.write(struct.pack("<d", c.pg.ds))
        fh.write(np.ascontiguousarray(c.pg.weights, dtype="<f8").tobytes())
        fh.write(struct.pack("<dI", c.c_grid, c.border_width))
        fh.write(struct.pack("<H", len(name)))
        fh.write(name)
        fh.write(struct.pack("<I", len(params)))
        fh.write(params)
        fh.write(np.asarray(c.shape, dtype="<u4").tobytes())
        fh.write(np.asarray(c.spacing, dtype="<f8").tobytes())
        fh.write(np.asarray(c.origin, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(c.data, dtype="<f8").tobytes())


def read_stack(path) -> CoeffStack:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "stack header")
        if magic != STACK_MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {STACK_MAGIC!r}")
        version, n, num_a, num_s = struct.unpack(
            "<IIII", _read_exact(fh, 16, "stack header"))
        if version != FORMAT_VERSION:
            raise FileFormatError(f"unsupported stack format version {version}")
        if not (1 <= n <= 8) or num_a < 1 or num_s < 1:
            raise FileFormatError("implausible stack header")
        a_nodes = _read_f64(fh, num_a, "stack header")
        da = _read_f64(fh, num_a, "stack header")
        s_nodes = _read_f64(fh, num_s * (2 * n - 1), "stack header").reshape(
            num_s, 2 * n - 1)
        (ds,) = struct.unpack("<d", _read_exact(fh, 8, "stack header"))
        weights = _read_f64(fh, num_a * num_s, "stack header").reshape(num_a, num_s)
        c_grid, border = struct.unpack("<dI", _read_exact(fh, 12, "stack header"))
        (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "stack header"))
        name = _read_exact(fh, name_len, "stack header").decode("utf-8")
        (par_len,) = struct.unpack("<I", _read_exact(fh, 4, "stack header"))
        params = json.loads(_read_exact(fh, par_len, "stack header").decode("utf-8"))
        shape = tuple(int(v) for v in _read_u32(fh, 2 * n, "stack header"))
        total = math.prod(shape)
        if total <= 0 or total * num_a * num_s > MAX_NODES * 16:
            raise FileFormatError(f"stack shape {shape} overflows the node limit")
        spacing = tuple(_read_f64(fh, 2 * n, "stack header"))
        origin = tuple(_read_f64(fh, 2 * n, "stack header"))
        payload = _read_f64(fh, num_a * num_s * total * 4, "stack payload")
        if fh.read(1):
            raise FileFormatError("trailing bytes after stack payload")
    pg = ParamGrid(n, a_nodes, da, s_nodes, float(ds), weights)
    data = payload.reshape((num_a, num_s) + shape + (4,))
    return CoeffStack(pg, n, shape, spacing, origin, data, c_grid=c_grid,
                      generator_name=name, generator_params=params,
                      border_width=border)


# ---------------------------------------------------------------------------
# PPM (P6) ingestion
# ---------------------------------------------------------------------------

def read_ppm(path) -> np.ndarray:
    """Binary PPM (P6, maxval 255) to an (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(b"P6"):
        raise BadMagicError("not a binary PPM (P6) file")
    # header: P6 <width> <height> <maxval> followed by one whitespace byte
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        tokens.append(blob[start:pos])
    pos += 1
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FileFormatError(f"bad PPM header fields {tokens}") from exc
    if maxval != 255:
        raise FileFormatError(f"only maxval 255 PPM supported, got {maxval}")
    need = width * height * 3
    data = blob[pos:pos + need]
    if len(data) != need:
        raise TruncatedFileError(need, len(data), "PPM payload")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy()


def ingest_rgb(image: np.ndarray, spacing=(1.0, 1.0)) -> QSignal:
    """Encode an 8-bit RGB image as a pure-quaternion signal over R^2.

    Channel values map to the i, j, k planes divided by 255; the scalar
    plane stays zero (reserved for alpha, ignored here).  The grid is
    origin-centered.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise InvalidParameterError("expected an (H, W, 3) uint8 RGB array")
    if image.shape[0] < 2 or image.shape[1] < 2:
        raise InvalidParameterError("image must be at least 2 x 2")
    h, w = image.shape[:2]
    data = np.zeros((h, w, 4))
    data[..., 1:] = image.astype(np.float64) / 255.0
    return qsignal(1, (h, w), spacing, data)


# ---------------------------------------------------------------------------
# bundled generators
# ---------------------------------------------------------------------------

def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity transition: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return a / (a + b)


def _bump(x: np.ndarray, lo: float, rise: float, fall: float, hi: float) -> np.ndarray:
    """Smooth plateau bump: 0 outside [lo, hi], 1 on [rise, fall]."""
    up = _smooth_step((x - lo) / (rise - lo))
    down = _smooth_step((hi - x) / (hi - fall))
    return up * down


def _exponential_spatial(pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    inside = np.all(pts >= 0.0, axis=-1)
    vals = np.where(inside, np.exp(-np.sum(pts, axis=-1)), 0.0)
    out = np.zeros(pts.shape[:-1] + (4,))
    out[..., 0] = vals
    return out


def _exponential_multiplier(lam: np.ndarray) -> np.ndarray:
    """Closed-form spectrum of the reflected exponential window, n = 1."""
    lam = np.asarray(lam, dtype=np.float64)
    l1, l2 = lam[..., 0], lam[..., 1]
    a = 1.0 / (1.0 + 4.0 * np.pi ** 2 * l1 ** 2)
    ai = 2.0 * np.pi * l1 * a
    b = 1.0 / (1.0 + 4.0 * np.pi ** 2 * l2 ** 2)
    bj = 2.0 * np.pi * l2 * b
    out = np.empty(lam.shape[:-1] + (4,))
    out[..., 0] = a * b
    out[..., 1] = ai * b
    out[..., 2] = a * bj
    out[..., 3] = ai * bj
    return out


def _gaussian_spatial(gamma: float):
    def evaluate(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        r2 = np.sum(pts * pts, axis=-1)
        out = np.zeros(pts.shape[:-1] + (4,))
        out[..., 0] = np.exp(-r2 / gamma ** 2)
        out[..., 2] = np.exp(-r2)
        return out
    return evaluate


def _gaussian_multiplier(gamma: float):
    def evaluate(lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        n = lam.shape[-1] // 2
        w2 = np.sum(lam * lam, axis=-1)
        out = np.zeros(lam.shape[:-1] + (4,))
        out[..., 0] = (np.pi ** n * gamma ** (2 * n)
                       * np.exp(-np.pi ** 2 * gamma ** 2 * w2))
        out[..., 2] = -np.pi ** n * np.exp(-np.pi ** 2 * w2)
        return out
    return evaluate


def _wedge_multiplier(lo, rise, fall, hi, ratio_flat, ratio_max):
    def evaluate(lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        l1 = lam[..., 0]
        vals = _bump(np.abs(l1), lo, rise, fall, hi)
        safe = np.where(np.abs(l1) > 0.0, l1, 1.0)
        for p in range(1, lam.shape[-1]):
            ratio = np.abs(lam[..., p] / safe)
            vals = vals * _bump(ratio, -1.0, 0.0, ratio_flat, ratio_max)
        out = np.zeros(lam.shape[:-1] + (4,))
        out[..., 0] = vals
        return out
    return evaluate


def make_generator(name: str, params: dict | None = None) -> ShearletGenerator:
    """Build one of the bundled windows.

    ``paper-exponential``
        Separable decaying exponential on the positive orthant; its
        reflected spectrum has the closed product form (available for
        n = 1).  Not a valid convolution window: it fails the commutation
        condition, which the transform detects and refuses.
    ``paper-gaussian-f``
        The quaternion Gaussian  exp(-|x|^2/gamma^2) + j exp(-|x|^2);
        structurally of the commuting g1 + j g2 form.
    ``wedge``
        Real, even, smooth frequency bump supported on the double wedge
        1/2 <= |l_1| <= 2, |l_p / l_1| <= 1.  Admissible, commuting, and
        compact enough in frequency that a moderate scale/shear box covers
        its group orbit almost exhaustively.
    """
    params = dict(params or {})
    if name == "paper-exponential":
        n = int(params.get("n", 1))
        return ShearletGenerator(
            name=name, kind=ANALYTIC_SAMPLE, n=n,
            spatial=_exponential_spatial,
            multiplier=_exponential_multiplier if n == 1 else None,
            structural_even=False, params={"n": n})
    if name == "paper-gaussian-f":
        gamma = float(params.get("gamma", 1.0))
        if gamma <= 0.0:
            raise InvalidParameterError("gamma must be positive")
        return ShearletGenerator(
            name=name, kind=ANALYTIC_SAMPLE, n=None,
            spatial=_gaussian_spatial(gamma),
            multiplier=_gaussian_multiplier(gamma),
            structural_even=True, params={"gamma": gamma})
    if name == "wedge":
        # wide transition regions keep the scale/shear quadrature of the
        # coverage profile smooth at moderate node counts
        lo = float(params.get("lo", 0.5))
        rise = float(params.get("rise", 0.95))
        fall = float(params.get("fall", 1.25))
        hi = float(params.get("hi", 2.0))
        ratio_flat = float(params.get("ratio_flat", 0.05))
        ratio_max = float(params.get("ratio_max", 1.0))
        if not (0.0 < lo < rise <= fall < hi):
            raise InvalidParameterError("wedge profile edges must be ordered")
        return ShearletGenerator(
            name=name, kind=FOURIER_MULTIPLIER, n=None,
            multiplier=_wedge_multiplier(lo, rise, fall, hi, ratio_flat, ratio_max),
            structural_even=True,
            params={"lo": lo, "rise": rise, "fall": fall, "hi": hi,
                    "ratio_flat": ratio_flat, "ratio_max": ratio_max,
                    "support_radius": hi * 1.1})
    raise InvalidParameterError(f"unknown generator name {name!r}")
