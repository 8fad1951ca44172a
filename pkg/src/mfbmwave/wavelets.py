"""Analyzing wavelets and the continuous wavelet transform of sampled paths.

The default family is built from Gaussian-derivative atoms
psi_m(t) = He_m(t) exp(-t^2 / 2) (probabilists' Hermite polynomial times a
Gaussian).  Atoms of order m have exactly m vanishing moments, rapid decay
(all polynomial moments integrable), and closed-form Fourier transforms and
pair correlations, which makes exact reference values available for every
derived quantity.  Complex linear combinations of atoms are supported so the
machinery stays valid for complex analyzing wavelets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite_e
from scipy.signal import fftconvolve

from .quadrature import quad_complex

# Standardized truncation radius: wavelet support is treated as |t| <= 10,
# where the Gaussian-derivative mass is < 1e-20, far below EDGE_TOL.
TRUNCATION_RADIUS = 10.0

# Smallest resolvable scale, in units of the sampling step.
MIN_SCALE_FACTOR = 4.0

# Maximal fraction of wavelet L1 mass allowed to fall outside the sampled path.
EDGE_TOL = 1e-8

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class InsufficientDecayError(ValueError):
    """A computation requires more certified moment decay than the wavelet has."""


def _hermite(n: int, x):
    c = np.zeros(n + 1)
    c[n] = 1.0
    return hermite_e.hermeval(x, c)


class Wavelet:
    """Analyzing wavelet contract.

    Subclasses provide ``eval`` (time domain), ``eval_ft`` (frequency domain,
    convention psi_hat(w) = int psi(t) exp(-i w t) dt), the vanishing-moment
    order ``vanishing_moments`` and a decay certificate ``decay_certificate``
    = the largest K for which t^m psi(t) is integrable for all m <= K.
    Pair correlations default to quadrature; families with closed forms
    override ``pair_correlation``.
    """

    vanishing_moments: int = 0
    decay_certificate: float = 0.0
    is_real: bool = False

    def eval(self, t):
        raise NotImplementedError

    def eval_ft(self, omega):
        raise NotImplementedError

    @property
    def moment(self) -> complex:
        """int t^M psi(t) dt at M = vanishing_moments, by quadrature."""
        M = self.vanishing_moments
        return quad_complex(lambda t: t ** M * self.eval(t),
                            -TRUNCATION_RADIUS, TRUNCATION_RADIUS)

    @property
    def ft_leading_coeff(self) -> complex:
        """Leading Taylor coefficient of psi_hat at 0: psi_hat^(M)(0) / M!."""
        M = self.vanishing_moments
        return (-1j) ** M * self.moment / math.factorial(M)

    def require_certificate(self, k: float, context: str) -> None:
        if self.decay_certificate < k:
            raise InsufficientDecayError(
                f"{context} needs moment decay up to order {k}, "
                f"wavelet is certified to {self.decay_certificate}")

    def pair_correlation(self, a1: float, a2: float):
        """Return D(tau) = int conj(psi(t/a1)) psi((t+tau)/a2) dt as a callable."""
        R = TRUNCATION_RADIUS * a1

        def D(tau):
            tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
            out = np.array([
                quad_complex(lambda t: np.conj(self.eval(t / a1))
                             * self.eval((t + v) / a2), -R, R)
                for v in tau_arr])
            return out[0] if np.ndim(tau) == 0 else out

        return D


class HermiteWavelet(Wavelet):
    """Linear combination of Gaussian-derivative atoms.

    ``terms`` is a sequence of (coefficient, order) pairs with distinct
    orders; the vanishing-moment order of the combination is the smallest
    atom order present.
    """

    decay_certificate = math.inf

    def __init__(self, terms):
        terms = [(complex(c), int(m)) for c, m in terms]
        if not terms:
            raise ValueError("at least one atom required")
        orders = [m for _, m in terms]
        if len(set(orders)) != len(orders):
            raise ValueError("atom orders must be distinct")
        if min(orders) < 1:
            raise ValueError("atom orders must be >= 1 (zero-mean requirement)")
        if max(orders) > 12:
            raise ValueError("atom orders above 12 are rejected "
                             "(Hermite recurrence conditioning)")
        if any(c == 0 for c, _ in terms):
            raise ValueError("zero coefficients are not allowed")
        self.terms = sorted(terms, key=lambda cm: cm[1])
        self.vanishing_moments = self.terms[0][1]
        self.is_real = all(c.imag == 0.0 for c, _ in self.terms)

    def __repr__(self):
        body = " + ".join(f"({c:g})*psi_{m}" for c, m in self.terms)
        return f"HermiteWavelet({body})"

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        g = np.exp(-0.5 * t * t)
        out = sum(c * _hermite(m, t) for c, m in self.terms) * g
        return out if not self.is_real else np.real(out)

    def eval_ft(self, omega):
        w = np.asarray(omega, dtype=float)
        g = _SQRT_2PI * np.exp(-0.5 * w * w)
        return sum(c * (-1j) ** m * w ** m for c, m in self.terms) * g

    @property
    def moment(self) -> complex:
        # atoms of higher order are orthogonal to t^M, so only the lowest
        # order contributes: int t^M He_M(t) exp(-t^2/2) dt = M! sqrt(2 pi)
        c0, M = self.terms[0]
        value = c0 * math.factorial(M) * _SQRT_2PI
        return value.real if self.is_real else value

    def pair_correlation(self, a1: float, a2: float):
        terms = self.terms

        def D(tau):
            tau_arr = np.asarray(tau, dtype=float)
            out = np.zeros(np.shape(tau_arr), dtype=complex)
            for c1, m1 in terms:
                for c2, m2 in terms:
                    out = out + np.conj(c1) * c2 * _atom_pair_correlation(
                        m1, a1, m2, a2, tau_arr)
            return out if not self.is_real else np.real(out)

        return D


def _atom_pair_correlation(m1: int, a1: float, m2: int, a2: float, tau):
    """int psi_m1(t/a1) psi_m2((t+tau)/a2) dt in closed form.

    Obtained in the frequency domain: the product of atom transforms is a
    polynomial times a Gaussian of variance s^2 = a1^2 + a2^2, whose inverse
    transform is a Hermite function of tau/s.
    """
    K = m1 + m2
    s = math.hypot(a1, a2)
    tau = np.asarray(tau, dtype=float)
    x = tau / s
    return ((-1.0) ** m1 * _SQRT_2PI * a1 ** (m1 + 1) * a2 ** (m2 + 1)
            * s ** (-1 - K) * _hermite(K, x) * np.exp(-0.5 * x * x))


def gaussian_derivative(M: int) -> HermiteWavelet:
    """M-th Gaussian-derivative wavelet psi_M(t) = He_M(t) exp(-t^2/2).

    Has exactly M vanishing moments with int t^M psi_M dt = M! sqrt(2 pi),
    and psi_hat(w) = (-i)^M sqrt(2 pi) w^M exp(-w^2/2).
    """
    if M < 1:
        raise ValueError("vanishing-moment order must be >= 1")
    if M > 12:
        raise ValueError("orders above 12 are rejected (Hermite recurrence conditioning)")
    return HermiteWavelet([(1.0, M)])


def wavelet_autocorrelation(wavelet: Wavelet, a1: float, a2: float, h: float):
    """Correlation between the dilated-shifted wavelets at scales a1, a2, lag h.

    Returns an evaluator for
    Gamma(v) = int psi_{a1,b+h}(u) conj(psi_{a2,b}(u+v)) du,
    which is independent of the base point b.
    """
    if a1 <= 0.0 or a2 <= 0.0:
        raise ValueError("scales must be positive")
    D = wavelet.pair_correlation(a1, a2)
    norm = 1.0 / math.sqrt(a1 * a2)

    def gamma(v):
        return norm * np.conj(D(np.asarray(v, dtype=float) + h))

    return gamma


@dataclass(frozen=True)
class WaveletField:
    """Wavelet coefficients d[j, scale, shift] of a sampled multivariate path."""

    coeffs: np.ndarray          # complex, shape (p, n_scales, n_shifts)
    scales: np.ndarray          # strictly positive, sorted ascending
    shifts: np.ndarray          # shift times b, uniform grid
    dt: float                   # sampling step of the source path
    n: int                      # source path length
    seed: int | None = None     # source path seed, if any

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        scales = np.asarray(self.scales, dtype=float)
        shifts = np.asarray(self.shifts, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[1] != scales.size \
                or coeffs.shape[2] != shifts.size:
            raise ValueError("coefficient array inconsistent with scale/shift grids")
        if np.any(scales <= 0.0) or np.any(np.diff(scales) <= 0.0):
            raise ValueError("scales must be strictly positive and sorted")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "shifts", shifts)

    @property
    def p(self) -> int:
        return self.coeffs.shape[0]

    def scale_index(self, a: float) -> int:
        idx = int(np.argmin(np.abs(self.scales - a)))
        if not math.isclose(self.scales[idx], a, rel_tol=1e-9, abs_tol=1e-12):
            raise KeyError(f"scale {a} not present in field")
        return idx


def shift_margin(scale: float, dt: float) -> int:
    """Number of grid points the wavelet support extends past a shift."""
    return int(math.ceil(TRUNCATION_RADIUS * scale / dt))


def valid_shift_range(n: int, dt: float, scale: float) -> tuple[int, int]:
    """Inclusive index range [lo, hi] of admissible shifts for one scale."""
    L = shift_margin(scale, dt)
    lo, hi = L, n - 1 - L
    if lo > hi:
        raise ValueError(f"path too short for scale {scale}: no admissible shifts")
    return lo, hi


def cwt(path, wavelet: Wavelet, scales, shifts=None) -> WaveletField:
    """Continuous wavelet transform of a sampled path.

    d[j, a, b] = a^(-1/2) sum_i x_j(t_i) conj(psi((t_i - b) / a)) dt,
    evaluated by FFT convolution per scale.  Scales below
    MIN_SCALE_FACTOR * dt are refused; shifts whose wavelet support sticks
    out of the sampled window (beyond EDGE_TOL of L1 mass) are refused.

    ``shifts`` defaults to every grid time admissible at the largest scale.
    """
    values = np.asarray(path.values)
    dt = float(path.dt)
    p, n = values.shape
    scales = np.sort(np.atleast_1d(np.asarray(scales, dtype=float)))
    for a in scales:
        if a < MIN_SCALE_FACTOR * dt:
            raise ValueError(f"scale {a} below resolution threshold "
                             f"{MIN_SCALE_FACTOR} * dt = {MIN_SCALE_FACTOR * dt}")
    lo, hi = valid_shift_range(n, dt, scales[-1])
    if shifts is None:
        shift_idx = np.arange(lo, hi + 1)
    else:
        shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
        shift_idx = np.rint(shifts / dt).astype(int)
        if not np.allclose(shift_idx * dt, shifts, rtol=0.0, atol=1e-9 * dt):
            raise ValueError("shifts must lie on the sampling grid")
        if shift_idx.min() < lo or shift_idx.max() > hi:
            raise ValueError(
                f"shift too close to path boundary for scale {scales[-1]}: "
                f"admissible index range is [{lo}, {hi}]")

    complex_kernel = not wavelet.is_real
    out = np.empty((p, scales.size, shift_idx.size), dtype=complex)
    for ia, a in enumerate(scales):
        L = shift_margin(a, dt)
        m = np.arange(-L, L + 1)
        kernel = np.conj(wavelet.eval(m * dt / a)) * (dt / math.sqrt(a))
        if not complex_kernel:
            kernel = np.real(kernel)
        g = kernel[::-1]
        for j in range(p):
            full = fftconvolve(values[j], g)
            out[j, ia, :] = full[shift_idx + L]
    return WaveletField(coeffs=out, scales=scales, shifts=shift_idx * dt,
                        dt=dt, n=n, seed=getattr(path, "seed", None))
