import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.integrate import quad

from mfbmwave.wavelets import (
    HermiteWavelet,
    gaussian_derivative,
    wavelet_autocorrelation,
    cwt,
    valid_shift_range,
    TRUNCATION_RADIUS,
)

SQRT_2PI = math.sqrt(2.0 * math.pi)


def quad_moment(wavelet, m):
    re, _ = quad(lambda t: t ** m * np.real(wavelet.eval(t)),
                 -TRUNCATION_RADIUS, TRUNCATION_RADIUS, limit=200)
    im, _ = quad(lambda t: t ** m * np.imag(wavelet.eval(t)),
                 -TRUNCATION_RADIUS, TRUNCATION_RADIUS, limit=200)
    return complex(re, im)


class TestGaussianDerivative:
    def test_order_bounds(self):
        with pytest.raises(ValueError):
            gaussian_derivative(0)
        with pytest.raises(ValueError):
            gaussian_derivative(13)

    def test_first_order_shape_and_moment(self):
        w = gaussian_derivative(1)
        ts = np.linspace(-4, 4, 41)
        np.testing.assert_allclose(w.eval(ts), ts * np.exp(-0.5 * ts ** 2),
                                   rtol=1e-14, atol=1e-15)
        assert complex(w.moment) == pytest.approx(SQRT_2PI, rel=1e-14)
        assert abs(w.moment - 2.5066282746310002) < 1e-12
        assert quad_moment(w, 1) == pytest.approx(SQRT_2PI, rel=1e-10)

    def test_vanishing_moments_by_quadrature(self):
        for M in (1, 2, 3, 5):
            w = gaussian_derivative(M)
            for m in range(M):
                assert abs(quad_moment(w, m)) < 1e-10
            assert quad_moment(w, M) == pytest.approx(
                math.factorial(M) * SQRT_2PI, rel=1e-9)

    def test_ft_zero_at_origin(self):
        for M in (1, 2, 4):
            assert gaussian_derivative(M).eval_ft(0.0) == 0.0

    def test_ft_matches_quadrature(self):
        # psi_hat(w) = int psi(t) exp(-i w t) dt on a frequency grid
        for M in (1, 2, 3):
            w = gaussian_derivative(M)
            for omega in (0.0, 0.35, 1.0, 2.5, -1.7):
                re, _ = quad(lambda t: np.real(w.eval(t)) * math.cos(omega * t),
                             -TRUNCATION_RADIUS, TRUNCATION_RADIUS, limit=200)
                im, _ = quad(lambda t: -np.real(w.eval(t)) * math.sin(omega * t),
                             -TRUNCATION_RADIUS, TRUNCATION_RADIUS, limit=200)
                assert complex(re, im) == pytest.approx(complex(w.eval_ft(omega)),
                                                        abs=1e-8)


class TestHermiteCombination:
    def test_complex_combination_contract(self):
        w = HermiteWavelet([(1.0, 1), (0.5j, 2)])
        assert w.vanishing_moments == 1
        assert not w.is_real
        assert complex(w.moment) == pytest.approx(SQRT_2PI, rel=1e-12)
        assert quad_moment(w, 0) == pytest.approx(0.0, abs=1e-10)
        got = quad_moment(w, 2)
        expected = 0.5j * 2 * SQRT_2PI
        assert got == pytest.approx(expected, rel=1e-9)

    def test_duplicate_orders_rejected(self):
        with pytest.raises(ValueError):
            HermiteWavelet([(1.0, 1), (2.0, 1)])

    def test_pair_correlation_matches_quadrature(self):
        w = HermiteWavelet([(1.0, 1), (0.5j, 3)])
        D_closed = w.pair_correlation(1.5, 2.0)
        D_quad = super(HermiteWavelet, w).pair_correlation(1.5, 2.0)
        for tau in (-2.0, 0.0, 0.7, 3.1):
            assert complex(D_closed(tau)) == pytest.approx(complex(D_quad(tau)),
                                                           abs=1e-9)


class TestAutocorrelation:
    def test_energy_at_zero(self):
        # a1 = a2 = 1, h = 0, M = 1, v = 0 gives int |psi_1|^2 = sqrt(pi)/2
        g = wavelet_autocorrelation(gaussian_derivative(1), 1.0, 1.0, 0.0)
        assert complex(g(0.0)) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)
        assert abs(complex(g(0.0)) - 0.886226925452758) < 1e-12

    def test_hermitian_symmetry(self):
        w = HermiteWavelet([(1.0, 2), (0.3j, 3)])
        g = wavelet_autocorrelation(w, 1.3, 1.3, 0.0)
        for v in (0.4, 1.1, 2.7):
            assert complex(g(-v)) == pytest.approx(np.conj(complex(g(v))), rel=1e-12)

    def test_zero_total_mass(self):
        g = wavelet_autocorrelation(gaussian_derivative(1), 1.0, 2.0, 0.5)
        total, _ = quad(lambda v: np.real(g(v)), -40, 40, limit=400)
        assert abs(total) < 1e-10

    def test_matches_direct_quadrature(self):
        w = gaussian_derivative(2)
        a1, a2, h = 1.0, 2.0, 0.7
        g = wavelet_autocorrelation(w, a1, a2, h)

        def direct(v):
            f = lambda u: (w.eval((u - h) / a1) / math.sqrt(a1)
                           * np.conj(w.eval((u + v) / a2)) / math.sqrt(a2))
            val, _ = quad(lambda u: np.real(f(u)), -30, 30, limit=400)
            return val

        for v in (-1.0, 0.0, 2.3):
            assert complex(g(v)) == pytest.approx(direct(v), abs=1e-10)

    def test_rejects_bad_scales(self):
        with pytest.raises(ValueError):
            wavelet_autocorrelation(gaussian_derivative(1), 0.0, 1.0, 0.0)


def make_path(values, dt):
    values = np.atleast_2d(values)
    return SimpleNamespace(values=values, dt=dt, n=values.shape[1], seed=None)


class TestCwt:
    def test_constant_path_annihilated(self):
        path = make_path(3.0 * np.ones(512), dt=0.25)
        field = cwt(path, gaussian_derivative(1), scales=[2.0])
        assert np.max(np.abs(field.coeffs)) < 1e-10 * 3.0

    def test_linear_path_annihilated_m2(self):
        t = np.arange(512) * 0.25
        field = cwt(make_path(t, 0.25), gaussian_derivative(2), scales=[2.0])
        assert np.max(np.abs(field.coeffs)) < 1e-9

    def test_linearity(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(400)
        y = rng.standard_normal(400)
        dt = 0.5
        w = gaussian_derivative(1)
        fa = cwt(make_path(x, dt), w, scales=[4.0])
        fb = cwt(make_path(y, dt), w, scales=[4.0])
        fc = cwt(make_path(2.5 * x - 1.25 * y, dt), w, scales=[4.0])
        np.testing.assert_allclose(fc.coeffs, 2.5 * fa.coeffs - 1.25 * fb.coeffs,
                                   rtol=1e-12, atol=1e-12)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(300)
        dt, a = 0.5, 3.0
        w = gaussian_derivative(2)
        field = cwt(make_path(x, dt), w, scales=[a])
        t = np.arange(300) * dt
        for b_idx in (60, 150, 220):
            b = t[b_idx]
            direct = np.sum(x * np.conj(w.eval((t - b) / a))) * dt / math.sqrt(a)
            pos = np.where(np.isclose(field.shifts, b))[0]
            assert pos.size == 1
            assert complex(field.coeffs[0, 0, pos[0]]) == pytest.approx(direct, rel=1e-10)

    def test_scale_below_resolution_rejected(self):
        path = make_path(np.zeros(256), dt=1.0)
        with pytest.raises(ValueError):
            cwt(path, gaussian_derivative(1), scales=[2.0])

    def test_boundary_shift_rejected(self):
        path = make_path(np.zeros(256), dt=1.0)
        with pytest.raises(ValueError):
            cwt(path, gaussian_derivative(1), scales=[4.0], shifts=[1.0])

    def test_off_grid_shift_rejected(self):
        path = make_path(np.zeros(256), dt=1.0)
        with pytest.raises(ValueError):
            cwt(path, gaussian_derivative(1), scales=[4.0], shifts=[100.5])

    def test_valid_range(self):
        lo, hi = valid_shift_range(256, 1.0, 4.0)
        assert lo == 40 and hi == 215
        with pytest.raises(ValueError):
            valid_shift_range(64, 1.0, 4.0)
