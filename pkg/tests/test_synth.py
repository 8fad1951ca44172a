import numpy as np
import pytest

from mfbmwave.model import (
    MfbmParams,
    InvalidParamsError,
    cross_covariance,
    increment_cross_covariance,
)
from mfbmwave.synth import (
    build_embedding,
    derive_seed,
    embedding_report,
    simulate,
    replicate_ensemble,
)


def stacked_values(paths):
    return np.stack([p.values for p in paths])  # (reps, p, n)


class TestBasics:
    def test_rejects_inadmissible(self):
        bad = MfbmParams.bivariate(0.1, 0.8, rho=0.7)
        with pytest.raises(InvalidParamsError):
            simulate(bad, 64, 1.0, seed=1)

    def test_deterministic(self):
        params = MfbmParams.bivariate(0.4, 0.7, rho=0.5, eta=0.1)
        p1, r1 = simulate(params, 128, 0.5, seed=42)
        p2, r2 = simulate(params, 128, 0.5, seed=42)
        np.testing.assert_array_equal(p1.values, p2.values)
        assert r1.correction == "none"
        p3, _ = simulate(params, 128, 0.5, seed=43)
        assert not np.array_equal(p1.values, p3.values)

    def test_starts_at_zero(self):
        params = MfbmParams.bivariate(0.3, 0.6, rho=0.2)
        path, _ = simulate(params, 64, 1.0, seed=7)
        np.testing.assert_array_equal(path.values[:, 0], 0.0)

    def test_embedding_size(self):
        params = MfbmParams.univariate(0.7)
        fac = build_embedding(params, 64, 1.0)
        assert fac.m == 128
        assert fac.report.correction == "none"
        rep = embedding_report(params, 64, 1.0)
        assert rep.circulant_size == 128

    def test_ensemble_determinism_and_derivation(self):
        params = MfbmParams.bivariate(0.4, 0.7, rho=0.5, eta=0.1)
        e1 = replicate_ensemble(params, 64, 1.0, seed=5, count=3)
        e2 = replicate_ensemble(params, 64, 1.0, seed=5, count=3)
        for a, b in zip(e1, e2):
            np.testing.assert_array_equal(a.values, b.values)
        single, _ = simulate(params, 64, 1.0, seed=derive_seed(5, 0))
        np.testing.assert_array_equal(e1[0].values, single.values)

    def test_threaded_ensemble_matches_serial(self):
        params = MfbmParams.bivariate(0.4, 0.7, rho=0.5)
        serial = replicate_ensemble(params, 64, 1.0, seed=9, count=6)
        threaded = replicate_ensemble(params, 64, 1.0, seed=9, count=6, threads=3)
        for a, b in zip(serial, threaded):
            np.testing.assert_array_equal(a.values, b.values)


class TestLaw:
    def test_brownian_increments_iid(self):
        # H = 0.5: increments are white with variance dt
        params = MfbmParams.univariate(0.5)
        n = 2 ** 16
        path, _ = simulate(params, n, 0.25, seed=11)
        inc = path.increments()[0]
        assert inc.var() == pytest.approx(0.25, rel=0.02)
        lag1 = np.corrcoef(inc[1:], inc[:-1])[0, 1]
        assert abs(lag1) < 4.0 / np.sqrt(n)

    def test_instantaneous_correlation(self):
        # sample Corr(x_1(1), x_2(1)) near rho over replicates
        rho = 0.3
        params = MfbmParams.bivariate(0.4, 0.8, rho=rho)
        n, dt, reps = 65, 1.0 / 64.0, 10_000
        paths = replicate_ensemble(params, n, dt, seed=21, count=reps)
        ends = stacked_values(paths)[:, :, -1]         # (reps, 2) values at t=1
        corr = np.corrcoef(ends[:, 0], ends[:, 1])[0, 1]
        se = (1.0 - rho ** 2) / np.sqrt(reps)
        assert abs(corr - rho) < 3.0 * se

    def test_increment_covariance_matches_model(self):
        params = MfbmParams.bivariate(0.4, 0.7, rho=0.5, eta=0.1)
        n, dt, reps = 256, 1.0, 400
        paths = replicate_ensemble(params, n, dt, seed=33, count=reps)
        incs = np.diff(stacked_values(paths), axis=2)   # (reps, 2, n-1)
        for (j, k) in ((0, 0), (0, 1), (1, 1)):
            for lag in range(0, 9):
                a = incs[:, j, lag:]
                b = incs[:, k, :incs.shape[2] - lag]
                per_rep = np.mean(a * b, axis=1)
                est = per_rep.mean()
                se = per_rep.std(ddof=1) / np.sqrt(reps)
                want = increment_cross_covariance(params, j, k, lag, dt=dt)
                assert abs(est - want) < 3.5 * se + 1e-12, (j, k, lag)

    def test_small_n_exactness(self):
        # reduced version of the full covariance closure
        params = MfbmParams.bivariate(0.4, 0.7, rho=0.5, eta=0.1)
        n, reps = 16, 20_000
        paths = replicate_ensemble(params, n, 1.0, seed=55, count=reps)
        x = stacked_values(paths).reshape(reps, -1)     # (reps, 2n)
        emp = x.T @ x / reps
        pn = 2 * n
        theory = np.empty((pn, pn))
        grid = np.arange(n) * 1.0
        for j in range(2):
            for k in range(2):
                theory[j * n:(j + 1) * n, k * n:(k + 1) * n] = cross_covariance(
                    params, j, k, grid[:, None], grid[None, :])
        se = np.sqrt(np.maximum(
            np.outer(np.diag(theory), np.diag(theory)) + theory ** 2, 0.0) / reps)
        ok = np.abs(emp - theory) <= 4.0 * se + 1e-12
        assert ok.mean() > 0.99

    def test_self_similar_variance_growth(self):
        # sample variance of x(t) grows like t^(2H)
        reps, n, dt = 200, 2 ** 12, 1.0
        for hurst in (0.35, 0.7):
            params = MfbmParams.univariate(hurst)
            paths = replicate_ensemble(params, n, dt, seed=77, count=reps)
            x = stacked_values(paths)[:, 0, :]
            idx = np.unique(np.geomspace(8, n - 1, 24).astype(int))
            var = x[:, idx].var(axis=0, ddof=1)
            slope = np.polyfit(np.log(idx * dt), np.log(var), 1)[0]
            assert slope == pytest.approx(2.0 * hurst, abs=0.05)

    def test_stationary_increments_windows(self):
        # lag-0 increment covariance agrees across two disjoint windows
        params = MfbmParams.bivariate(0.4, 0.7, rho=0.5, eta=0.1)
        reps, n = 600, 512
        paths = replicate_ensemble(params, n, 1.0, seed=91, count=reps)
        incs = np.diff(stacked_values(paths), axis=2)
        first = incs[:, 0, 10:110] * incs[:, 1, 10:110]
        second = incs[:, 0, 300:400] * incs[:, 1, 300:400]
        m1 = first.mean(axis=1)
        m2 = second.mean(axis=1)
        diff = m1.mean() - m2.mean()
        se = np.sqrt(m1.var(ddof=1) / reps + m2.var(ddof=1) / reps)
        assert abs(diff) < 3.5 * se

    def test_ensemble_mean_zero(self):
        params = MfbmParams.bivariate(0.4, 0.6, rho=0.3)
        reps = 2000
        paths = replicate_ensemble(params, 64, 1.0, seed=13, count=reps)
        x = stacked_values(paths)
        mean = x.mean(axis=0)
        sd = x.std(axis=0, ddof=1) / np.sqrt(reps)
        ok = np.abs(mean[:, 1:]) <= 4.0 * sd[:, 1:]
        assert ok.mean() > 0.98
