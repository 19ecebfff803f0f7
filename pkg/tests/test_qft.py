import numpy as np
import pytest

from qshear.quat_core import (
    Quaternion,
    IncompatibleGridsError,
    inner_sc,
    lp_norm,
    qabs2,
    qmul,
    qsignal,
    signal_from_planes,
    zero_signal,
)
from qshear.qft import (
    GridTooLargeError,
    QSpectrum,
    convolve,
    qft_forward,
    qft_inverse,
    qft_reference,
)


def random_signal(rng, shape, spacing):
    n = len(shape) // 2
    return qsignal(n, shape, spacing, rng.standard_normal(tuple(shape) + (4,)))


def rel_l2(a, b):
    return np.sqrt(np.sum((a - b) ** 2) / np.sum(b ** 2))


GRIDS = [
    ((8, 6), (0.3, 0.45)),
    ((5, 7), (0.2, 0.11)),
    ((16, 16), (0.25, 0.25)),
    ((64, 64), (0.1, 0.1)),
    ((4, 3, 2, 5), (0.3, 0.2, 0.25, 0.4)),
    ((8, 8, 8, 8), (0.3, 0.3, 0.3, 0.3)),
]


class TestForwardInverse:
    @pytest.mark.parametrize("shape,spacing", GRIDS)
    def test_forward_matches_reference(self, shape, spacing):
        rng = np.random.default_rng(hash(shape) % 2 ** 31)
        f = random_signal(rng, shape, spacing)
        F = qft_forward(f)
        R = qft_reference(f)
        assert np.max(np.abs(F.data - R.data)) < 1e-10

    def test_reference_node_cap(self):
        f = zero_signal(1, (65, 64), (0.1, 0.1))
        with pytest.raises(GridTooLargeError):
            qft_reference(f)

    def test_frequency_grid_duality(self):
        f = zero_signal(1, (12, 9), (0.7, 0.31))
        F = qft_forward(f)
        for ax in range(2):
            assert F.spacing[ax] * f.spacing[ax] * f.shape[ax] == pytest.approx(
                1.0, abs=1e-15)
            # DC sits at the middle index
            assert F.axis_freqs(ax)[f.shape[ax] // 2] == pytest.approx(0.0, abs=0.0)

    def test_roundtrip(self):
        rng = np.random.default_rng(21)
        for shape, spacing in [((16, 12), (0.3, 0.2)), ((9, 7), (0.5, 0.4))]:
            f = random_signal(rng, shape, spacing)
            back = qft_inverse(qft_forward(f))
            assert rel_l2(back.data, f.data) < 1e-10

    def test_delta_spectrum_is_flat(self):
        N, dx = 16, 0.25
        data = np.zeros((N, N, 4))
        data[N // 2, N // 2, 0] = 1.0 / dx ** 2
        f = qsignal(1, (N, N), (dx, dx), data)
        F = qft_forward(f)
        mods = np.sqrt(qabs2(F.data))
        assert np.allclose(mods, 1.0, atol=1e-12)
        # at DC the value is exactly the quaternion 1
        assert np.allclose(F.data[N // 2, N // 2], [1, 0, 0, 0], atol=1e-12)

    def test_gaussian_golden_vector(self):
        # f = e^(-|x|^2/g^2) + j e^(-|x|^2) has spectrum
        # pi g^2 e^(-pi^2 g^2 |w|^2) + j pi e^(-pi^2 |w|^2)
        gamma = 1.0
        N, dx = 64, 0.18
        xs = (np.arange(N) - N // 2) * dx
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        r2 = X ** 2 + Y ** 2
        f = signal_from_planes(1, (N, N), (dx, dx),
                               {0: np.exp(-r2 / gamma ** 2), 2: np.exp(-r2)})
        F = qft_forward(f)
        W = F.freq_coords()
        w2 = np.sum(W * W, axis=-1)
        ref = np.zeros(F.data.shape)
        ref[..., 0] = np.pi * gamma ** 2 * np.exp(-np.pi ** 2 * gamma ** 2 * w2)
        ref[..., 2] = np.pi * np.exp(-np.pi ** 2 * w2)
        assert np.max(np.abs(F.data - ref)) / np.max(np.abs(ref)) < 1e-6

    def test_gaussian_reference_closed_form(self):
        N, dx = 32, 0.35
        xs = (np.arange(N) - N // 2) * dx
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        r2 = X ** 2 + Y ** 2
        f = signal_from_planes(1, (N, N), (dx, dx),
                               {0: np.exp(-r2), 2: np.exp(-r2)})
        R = qft_reference(f)
        W = R.freq_coords()
        w2 = np.sum(W * W, axis=-1)
        ref = np.zeros(R.data.shape)
        ref[..., 0] = np.pi * np.exp(-np.pi ** 2 * w2)
        ref[..., 2] = np.pi * np.exp(-np.pi ** 2 * w2)
        assert np.max(np.abs(R.data - ref)) / np.max(np.abs(ref)) < 1e-6

    def test_inverse_of_closed_form_spectrum(self):
        # sampling the continuous spectrum and inverting recovers the signal
        N, dx = 48, 0.25
        dw = 1.0 / (N * dx)
        ws = (np.arange(N) - N // 2) * dw
        U, V = np.meshgrid(ws, ws, indexing="ij")
        w2 = U ** 2 + V ** 2
        spec = np.zeros((N, N, 4))
        spec[..., 0] = np.pi * np.exp(-np.pi ** 2 * w2)
        spec[..., 2] = np.pi * np.exp(-np.pi ** 2 * w2)
        F = QSpectrum(1, (N, N), (dw, dw), (ws[0], ws[0]), spec,
                      src_spacing=(dx, dx),
                      src_origin=(-(N // 2) * dx, -(N // 2) * dx))
        f = qft_inverse(F)
        xs = (np.arange(N) - N // 2) * dx
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        ref = np.zeros((N, N, 4))
        ref[..., 0] = np.exp(-(X ** 2 + Y ** 2))
        ref[..., 2] = np.exp(-(X ** 2 + Y ** 2))
        assert np.max(np.abs(f.data - ref)) / np.max(np.abs(ref)) < 1e-6

    def test_inverse_is_forward_at_reflected_argument(self):
        # on a self-dual grid (N dx^2 = 1) the node sets coincide and
        # inverse(h)(x) = forward(h)(-x)
        N = 16
        dx = 1.0 / np.sqrt(N)
        rng = np.random.default_rng(5)
        h = random_signal(rng, (N, N), (dx, dx))
        fwd = qft_forward(h)
        spec = QSpectrum(1, h.shape, h.spacing, h.origin, h.data,
                         src_spacing=h.spacing, src_origin=h.origin)
        inv = qft_inverse(spec)
        refl = inv.data
        for ax in range(2):
            refl = np.roll(np.flip(refl, axis=ax), 1, axis=ax)
        assert np.max(np.abs(fwd.data - refl)) < 1e-10


class TestPlancherelParseval:
    def test_plancherel_random(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            f = random_signal(rng, (16, 16), (0.2, 0.3))
            F = qft_forward(f)
            nf = lp_norm(f, 2.0)
            assert abs(F.norm_l2() - nf) / nf < 1e-10

    def test_parseval_random(self):
        rng = np.random.default_rng(37)
        for _ in range(25):
            f = random_signal(rng, (12, 10), (0.4, 0.3))
            g = random_signal(rng, (12, 10), (0.4, 0.3))
            a = inner_sc(f, g)
            Fx, Gx = qft_forward(f), qft_forward(g)
            b = float(np.sum(Fx.data * Gx.data) * Fx.cell_volume)
            assert abs(a - b) <= 1e-10 * max(abs(a), 1.0)

    def test_real_and_icomplex_left_linearity(self):
        rng = np.random.default_rng(41)
        f = random_signal(rng, (10, 8), (0.3, 0.3))
        for alpha in (Quaternion(1.7, 0, 0, 0), Quaternion(0.4, -1.1, 0, 0)):
            scaled = f.with_data(qmul(alpha.to_array(), f.data))
            lhs = qft_forward(scaled).data
            rhs = qmul(alpha.to_array(), qft_forward(f).data)
            assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(np.max(np.abs(rhs)), 1.0)

    def test_j_scalar_breaks_left_linearity(self):
        rng = np.random.default_rng(43)
        f = random_signal(rng, (10, 8), (0.3, 0.3))
        alpha = np.array([0.0, 0.0, 1.0, 0.0])
        scaled = f.with_data(qmul(alpha, f.data))
        lhs = qft_forward(scaled).data
        rhs = qmul(alpha, qft_forward(f).data)
        assert np.max(np.abs(lhs - rhs)) > 1e-3 * np.max(np.abs(rhs))


class TestConvolution:
    def test_delta_identity(self):
        rng = np.random.default_rng(51)
        N, dx = 16, 0.25
        f = random_signal(rng, (N, N), (dx, dx))
        delta = np.zeros((N, N, 4))
        delta[N // 2, N // 2, 0] = 1.0 / dx ** 2
        d = qsignal(1, (N, N), (dx, dx), delta)
        out = convolve(f, d)
        assert np.max(np.abs(out.data - f.data)) < 1e-12

    def test_grid_mismatch(self):
        rng = np.random.default_rng(53)
        f = random_signal(rng, (8, 8), (0.3, 0.3))
        g = random_signal(rng, (8, 8), (0.3, 0.31))
        with pytest.raises(IncompatibleGridsError):
            convolve(f, g)

    def _gaussian_pair(self, N=48, dx=0.3):
        # envelopes chosen so the linear convolution decays below the
        # comparison tolerance before the crop boundary
        xs = (np.arange(N) - N // 2) * dx
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        r2 = X ** 2 + Y ** 2
        rng = np.random.default_rng(57)
        fdata = rng.standard_normal((N, N, 4)) * np.exp(-r2)[..., None]
        f = qsignal(1, (N, N), (dx, dx), fdata)
        g = signal_from_planes(1, (N, N), (dx, dx),
                               {0: np.exp(-1.3 * r2) * (1.0 + X ** 2)})
        return f, g

    def test_spectrum_product_identity_for_commuting_window(self):
        # g real and even in every coordinate satisfies the commutation
        # condition, so the transform of f*g is the spectrum product
        f, g = self._gaussian_pair()
        conv = convolve(f, g)
        lhs = qft_forward(conv).data
        rhs = qmul(qft_forward(f).data, qft_forward(g).data)
        assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)) < 1e-8

    def test_energy_identity_for_commuting_window(self):
        f, g = self._gaussian_pair()
        conv = convolve(f, g)
        lhs = lp_norm(conv, 2.0) ** 2
        Fx, Gx = qft_forward(f), qft_forward(g)
        rhs = float(np.sum(qabs2(Fx.data) * qabs2(Gx.data)) * Fx.cell_volume)
        assert abs(lhs - rhs) / rhs < 1e-6
