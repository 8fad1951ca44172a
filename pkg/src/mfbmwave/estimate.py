"""Empirical second-order statistics of simulated wavelet fields.

Estimators close the loop against the exact theory: sample cross-covariance
across replicates (and along shifts, exploiting stationarity), a tapered
cross-periodogram, and the shared log-log regression used for every power-law
exponent check.  Standard errors come from a replicate-level jackknife only;
coefficients along one path are correlated, so within-path averaging is used
for variance reduction but not for inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wavelets import WaveletField
from .wavstats import WaveletCovQuery

MIN_REPLICATES = 30


@dataclass(frozen=True)
class FitReport:
    """Result of an ordinary least-squares fit of log|y| on log x."""

    slope: float
    intercept: float
    slope_se: float
    fit_range: tuple
    n_used: int
    n_excluded: int
    residuals: np.ndarray

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0


def fit_power_law(xs, ys, fit_range=None) -> FitReport:
    """OLS of log|y| on log x; returns slope, intercept and slope standard error.

    Points with non-positive x, vanishing or non-finite |y|, or outside
    ``fit_range`` are excluded and counted in the report.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.abs(np.asarray(ys))
    mask = np.isfinite(xs) & np.isfinite(ys) & (xs > 0.0) & (ys > 1e-290)
    if fit_range is not None:
        lo, hi = fit_range
        mask &= (xs >= lo) & (xs <= hi)
    n_excluded = int(xs.size - mask.sum())
    x = np.log(xs[mask])
    y = np.log(ys[mask])
    n = x.size
    if n < 2:
        raise ValueError(f"power-law fit needs >= 2 usable points, got {n} "
                         f"({n_excluded} excluded)")
    sxx = np.sum((x - x.mean()) ** 2)
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = max(n - 2, 1)
    slope_se = float(math.sqrt(np.sum(resid ** 2) / dof / sxx))
    rng = (float(xs[mask].min()), float(xs[mask].max()))
    return FitReport(slope=slope, intercept=intercept, slope_se=slope_se,
                     fit_range=rng, n_used=n, n_excluded=n_excluded,
                     residuals=resid)


def jackknife_se(values: np.ndarray) -> float:
    """Delete-one jackknife standard error of the mean of real values."""
    values = np.asarray(values, dtype=float)
    r = values.size
    total = values.sum()
    loo = (total - values) / (r - 1)
    return float(math.sqrt((r - 1) / r * np.sum((loo - loo.mean()) ** 2)))


@dataclass(frozen=True)
class EmpiricalCov:
    """Replicate-averaged wavelet cross-covariance estimates per lag."""

    query: WaveletCovQuery
    lags: np.ndarray            # integer shift lags
    mean: np.ndarray            # complex estimates per lag
    se_real: np.ndarray
    se_imag: np.ndarray
    replicates: int
    shift_spacing: float

    def __post_init__(self):
        if 0 not in np.asarray(self.lags):
            raise ValueError("lag grid must contain lag 0")
        if np.any(np.asarray(self.se_real) < 0) or np.any(np.asarray(self.se_imag) < 0):
            raise ValueError("standard errors must be nonnegative")


def _replicate_cov(field: WaveletField, ia1: int, ia2: int, j: int, k: int,
                   lag: int) -> complex:
    dj = field.coeffs[j, ia1, :]
    dk = field.coeffs[k, ia2, :]
    nb = dj.size
    if abs(lag) >= nb:
        raise ValueError(f"lag {lag} exceeds available shifts ({nb})")
    if lag >= 0:
        prod = dj[lag:] * np.conj(dk[:nb - lag])
    else:
        prod = dj[:nb + lag] * np.conj(dk[-lag:])
    return complex(prod.mean())


def empirical_wavelet_cov(fields, query: WaveletCovQuery, lags) -> EmpiricalCov:
    """Estimate E[d^j_{a1, b+h} conj(d^k_{a2, b})] at integer shift lags.

    Averages along shifts within each replicate, then across replicates;
    standard errors are delete-one jackknife over replicates.
    """
    fields = list(fields)
    if len(fields) < MIN_REPLICATES:
        raise ValueError(f"need >= {MIN_REPLICATES} replicates, got {len(fields)}")
    lags = np.asarray(lags, dtype=int)
    f0 = fields[0]
    ia1 = f0.scale_index(query.a1)
    ia2 = f0.scale_index(query.a2)
    spacing = float(f0.shifts[1] - f0.shifts[0]) if f0.shifts.size > 1 else f0.dt

    per_rep = np.empty((len(fields), lags.size), dtype=complex)
    for r, field in enumerate(fields):
        for il, lag in enumerate(lags):
            per_rep[r, il] = _replicate_cov(field, ia1, ia2,
                                            query.j, query.k, int(lag))
    mean = per_rep.mean(axis=0)
    se_re = np.array([jackknife_se(per_rep[:, il].real) for il in range(lags.size)])
    se_im = np.array([jackknife_se(per_rep[:, il].imag) for il in range(lags.size)])
    return EmpiricalCov(query=query, lags=lags, mean=mean, se_real=se_re,
                        se_imag=se_im, replicates=len(fields),
                        shift_spacing=spacing)


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Tapered cross-periodogram averaged over replicates, with scatter bands."""

    query: WaveletCovQuery
    omegas: np.ndarray
    mean: np.ndarray            # complex
    se_real: np.ndarray
    se_imag: np.ndarray
    replicates: int


def empirical_cross_spectrum(fields, query: WaveletCovQuery,
                             omegas) -> EmpiricalSpectrum:
    """Hann-tapered cross-periodogram of the coefficient sequences along shifts.

    Normalized so that the expectation matches the continuous-parameter
    cross-spectral density of the wavelet field sampled at the shift spacing.
    """
    fields = list(fields)
    if len(fields) < MIN_REPLICATES:
        raise ValueError(f"need >= {MIN_REPLICATES} replicates, got {len(fields)}")
    omegas = np.asarray(omegas, dtype=float)
    f0 = fields[0]
    ia1 = f0.scale_index(query.a1)
    ia2 = f0.scale_index(query.a2)
    shifts = f0.shifts
    if shifts.size < 8:
        raise ValueError("too few shifts for a periodogram")
    spacing = np.diff(shifts)
    if not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
        raise ValueError("shift grid must be uniform")
    delta = float(spacing[0])
    taper = np.hanning(shifts.size)
    norm = delta * float(np.sum(taper ** 2))
    t = shifts - shifts[0]
    phase = np.exp(-1j * np.outer(t, omegas))   # (n_shifts, n_omega)

    per_rep = np.empty((len(fields), omegas.size), dtype=complex)
    for r, field in enumerate(fields):
        xj = delta * ((taper * field.coeffs[query.j, ia1, :]) @ phase)
        xk = delta * ((taper * field.coeffs[query.k, ia2, :]) @ phase)
        per_rep[r] = xj * np.conj(xk) / norm
    mean = per_rep.mean(axis=0)
    r = len(fields)
    se_re = per_rep.real.std(axis=0, ddof=1) / math.sqrt(r)
    se_im = per_rep.imag.std(axis=0, ddof=1) / math.sqrt(r)
    return EmpiricalSpectrum(query=query, omegas=omegas, mean=mean,
                             se_real=se_re, se_imag=se_im, replicates=r)
