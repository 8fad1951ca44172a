"""Multivariate fractional Brownian motion: parameterization and covariance kernel.

The process is a p-component zero-mean Gaussian process with stationary
increments whose components are jointly self-similar with Hurst exponents
H_1, ..., H_p.  Its full second-order structure is determined by the
amplitudes sigma_j, the symmetric instantaneous correlations rho_jk and the
antisymmetric time-asymmetry parameters eta_jk.  This module holds the
parameter container, the two-branch kernel w_jk, the cross-covariance, the
increment covariance, and the admissibility (existence) test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tolerance on |H_j + H_k - 1| selecting the logarithmic kernel branch.
BRANCH_TOL = 1e-12

# Absolute tolerance on the smallest eigenvalue in the admissibility test;
# absorbs floating-point noise on structurally PSD matrices.
EIG_TOL = 1e-10


class InvalidParamsError(ValueError):
    """Raised when a parameter set violates the structural constraints."""


class ParamsFormatError(InvalidParamsError):
    """Raised by the text parser; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MfbmParams:
    """Parameter set (H, sigma, rho, eta) of a p-component process.

    H      : Hurst exponents, each in the open interval (0, 1).
    sigma  : positive amplitudes; sigma_j^2 is Var(x_j(1)).
    rho    : symmetric correlation matrix with unit diagonal, entries in [-1, 1].
    eta    : antisymmetric matrix with zero diagonal.

    Construction checks only the structural constraints above.  Whether the
    parameters define a valid process is a separate spectral condition, see
    :func:`check_existence`; simulation refuses inadmissible parameters.
    """

    H: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        H = _as_readonly(np.atleast_1d(self.H))
        sigma = _as_readonly(np.atleast_1d(self.sigma))
        rho = _as_readonly(np.atleast_2d(self.rho))
        eta = _as_readonly(np.atleast_2d(self.eta))
        p = H.shape[0]
        if H.ndim != 1 or p < 1:
            raise InvalidParamsError("H must be a non-empty vector")
        if np.any(H <= 0.0) or np.any(H >= 1.0):
            raise InvalidParamsError("every Hurst exponent must lie in (0, 1)")
        if sigma.shape != (p,) or np.any(sigma <= 0.0):
            raise InvalidParamsError("sigma must be a length-p vector of positive amplitudes")
        if rho.shape != (p, p) or eta.shape != (p, p):
            raise InvalidParamsError("rho and eta must be p x p matrices")
        if not np.allclose(rho, rho.T, atol=1e-12, rtol=0.0):
            raise InvalidParamsError("rho must be symmetric")
        if not np.allclose(np.diag(rho), 1.0, atol=1e-12, rtol=0.0):
            raise InvalidParamsError("rho must have unit diagonal")
        if np.any(np.abs(rho) > 1.0 + 1e-12):
            raise InvalidParamsError("rho entries must lie in [-1, 1]")
        if not np.allclose(eta, -eta.T, atol=1e-12, rtol=0.0):
            raise InvalidParamsError("eta must be antisymmetric")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "eta", eta)

    @property
    def p(self) -> int:
        return self.H.shape[0]

    def alpha(self, j: int, k: int) -> float:
        """Combined exponent H_j + H_k of the (j, k) kernel."""
        return float(self.H[j] + self.H[k])

    def is_log_branch(self, j: int, k: int) -> bool:
        return abs(self.alpha(j, k) - 1.0) <= BRANCH_TOL

    def fingerprint(self) -> tuple:
        """Hashable identity used for caching derived objects."""
        return (
            tuple(self.H.tolist()),
            tuple(self.sigma.tolist()),
            tuple(self.rho.ravel().tolist()),
            tuple(self.eta.ravel().tolist()),
        )

    @classmethod
    def bivariate(cls, h1: float, h2: float, rho: float = 0.0, eta: float = 0.0,
                  sigma1: float = 1.0, sigma2: float = 1.0) -> "MfbmParams":
        """Convenience constructor for the p = 2 case."""
        return cls(
            H=np.array([h1, h2]),
            sigma=np.array([sigma1, sigma2]),
            rho=np.array([[1.0, rho], [rho, 1.0]]),
            eta=np.array([[0.0, eta], [-eta, 0.0]]),
        )

    @classmethod
    def univariate(cls, h: float, sigma: float = 1.0) -> "MfbmParams":
        return cls(H=np.array([h]), sigma=np.array([sigma]),
                   rho=np.eye(1), eta=np.zeros((1, 1)))


def _check_index(params: MfbmParams, j: int, k: int) -> None:
    if not (0 <= j < params.p and 0 <= k < params.p):
        raise IndexError(f"component indices ({j}, {k}) out of range for p={params.p}")


def kernel_w(params: MfbmParams, j: int, k: int, h):
    """Two-branch kernel w_jk(h) of the cross-covariance.

    Equals (rho_jk - eta_jk sign(h)) |h|^(H_j+H_k) off the critical exponent,
    and rho_jk |h| + eta_jk h log|h| when H_j + H_k = 1 (within BRANCH_TOL).
    Returns 0 at h = 0 in both branches (removable singularity).
    """
    _check_index(params, j, k)
    h_arr = np.asarray(h, dtype=float)
    scalar = h_arr.ndim == 0
    h_arr = np.atleast_1d(h_arr)
    rho = params.rho[j, k]
    eta = params.eta[j, k]
    alpha = params.alpha(j, k)
    out = np.zeros_like(h_arr)
    nz = h_arr != 0.0
    ah = np.abs(h_arr[nz])
    if abs(alpha - 1.0) <= BRANCH_TOL:
        out[nz] = rho * ah + eta * h_arr[nz] * np.log(ah)
    else:
        out[nz] = (rho - eta * np.sign(h_arr[nz])) * ah ** alpha
    return float(out[0]) if scalar else out


def cross_covariance(params: MfbmParams, j: int, k: int, s, t):
    """E[x_j(s) x_k(t)] = (sigma_j sigma_k / 2) {w_jk(-s) + w_jk(t) - w_jk(t-s)}."""
    _check_index(params, j, k)
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    c = 0.5 * params.sigma[j] * params.sigma[k]
    out = c * (kernel_w(params, j, k, -s_arr)
               + kernel_w(params, j, k, t_arr)
               - kernel_w(params, j, k, t_arr - s_arr))
    return out


def increment_cross_covariance(params: MfbmParams, j: int, k: int, h, dt: float = 1.0):
    """Covariance of the step-dt increment processes at integer lag h.

    gamma_jk(h) = E[(x_j((i+h+1)dt) - x_j((i+h)dt)) (x_k((i+1)dt) - x_k(i dt))].
    Evaluating the kernel at the physical lags dt*(1-h), dt*(-1-h), dt*(-h) is
    exact in both branches; for H_j + H_k != 1 it coincides with the
    self-similar scaling dt^(H_j+H_k) gamma_jk(h at unit step).
    """
    _check_index(params, j, k)
    h_arr = np.asarray(h, dtype=float)
    c = 0.5 * params.sigma[j] * params.sigma[k]
    return c * (kernel_w(params, j, k, dt * (1.0 - h_arr))
                + kernel_w(params, j, k, dt * (-1.0 - h_arr))
                - 2.0 * kernel_w(params, j, k, dt * (-h_arr)))


def existence_matrix(params: MfbmParams) -> np.ndarray:
    """Hermitian matrix whose positive semidefiniteness characterizes existence.

    Entry (j, k) is Gamma(H_j+H_k+1) * xi_jk with
    xi_jk = rho_jk sin(pi a/2) - i eta_jk cos(pi a/2)   for a = H_j+H_k != 1,
    xi_jk = rho_jk - i (pi/2) eta_jk                    for a = 1.
    The diagonal reduces to Gamma(2 H_j + 1) sin(pi H_j).
    """
    p = params.p
    G = np.empty((p, p), dtype=complex)
    for j in range(p):
        for k in range(p):
            a = params.alpha(j, k)
            if abs(a - 1.0) <= BRANCH_TOL:
                xi = params.rho[j, k] - 1j * (math.pi / 2.0) * params.eta[j, k]
            else:
                xi = (params.rho[j, k] * math.sin(math.pi * a / 2.0)
                      - 1j * params.eta[j, k] * math.cos(math.pi * a / 2.0))
            G[j, k] = math.gamma(a + 1.0) * xi
    return G


@dataclass(frozen=True)
class ExistenceResult:
    admissible: bool
    min_eigenvalue: float

    def __bool__(self) -> bool:
        return self.admissible


def check_existence(params: MfbmParams, eig_tol: float = EIG_TOL) -> ExistenceResult:
    """Admissibility test: smallest eigenvalue of the existence matrix >= -eig_tol."""
    evals = np.linalg.eigvalsh(existence_matrix(params))
    lam_min = float(evals[0])
    return ExistenceResult(admissible=lam_min >= -eig_tol, min_eigenvalue=lam_min)


def max_admissible_rho(h1: float, h2: float, resolution: float = 1e-4) -> float:
    """Supremum of admissible rho_12 for a bivariate process with eta = 0.

    Bisection of the admissibility test over rho in [0, 1], resolved to
    ``resolution``.  Returns 1.0 when no constraint binds (e.g. h1 = h2).
    """
    if not (0.0 < h1 < 1.0 and 0.0 < h2 < 1.0):
        raise InvalidParamsError("Hurst exponents must lie in (0, 1)")

    def ok(rho: float) -> bool:
        return check_existence(MfbmParams.bivariate(h1, h2, rho=rho)).admissible

    if ok(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Text serialization
#
# Line-oriented "key: values" document with keys p, H, sigma, rho, eta.
# rho holds the row-major lower triangle including the (unit) diagonal,
# eta the row-major strict lower triangle.  '#' starts a comment.
# ---------------------------------------------------------------------------

_PARAM_KEYS = ("p", "H", "sigma", "rho", "eta")


def params_to_text(params: MfbmParams) -> str:
    p = params.p
    rho_low = [params.rho[i, j] for i in range(p) for j in range(i + 1)]
    eta_low = [params.eta[i, j] for i in range(p) for j in range(i)]
    lines = [
        f"p: {p}",
        "H: " + " ".join(f"{v:.17g}" for v in params.H),
        "sigma: " + " ".join(f"{v:.17g}" for v in params.sigma),
        "rho: " + " ".join(f"{v:.17g}" for v in rho_low),
        "eta: " + " ".join(f"{v:.17g}" for v in eta_low),
    ]
    return "\n".join(lines) + "\n"


def params_from_text(text: str) -> MfbmParams:
    """Parse the text document, reporting violations with their line number."""
    seen: dict[str, tuple[int, list[float]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParamsFormatError(lineno, f"expected 'key: values', got {raw!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        if key not in _PARAM_KEYS:
            raise ParamsFormatError(lineno, f"unknown key {key!r} (expected one of {_PARAM_KEYS})")
        if key in seen:
            raise ParamsFormatError(lineno, f"duplicate key {key!r}")
        try:
            values = [float(tok) for tok in rest.split()]
        except ValueError:
            raise ParamsFormatError(lineno, f"non-numeric value in {key!r} entry") from None
        seen[key] = (lineno, values)

    for key in _PARAM_KEYS:
        if key not in seen:
            raise ParamsFormatError(len(text.splitlines()) or 1, f"missing key {key!r}")

    lineno_p, pv = seen["p"]
    if len(pv) != 1 or pv[0] != int(pv[0]) or int(pv[0]) < 1:
        raise ParamsFormatError(lineno_p, "p must be a single positive integer")
    p = int(pv[0])

    def expect(key: str, count: int) -> tuple[int, list[float]]:
        lineno, values = seen[key]
        if len(values) != count:
            raise ParamsFormatError(lineno, f"{key} must hold {count} value(s), got {len(values)}")
        return lineno, values

    ln_h, hv = expect("H", p)
    for v in hv:
        if not (0.0 < v < 1.0):
            raise ParamsFormatError(ln_h, f"Hurst exponent {v} outside (0, 1)")
    ln_s, sv = expect("sigma", p)
    for v in sv:
        if v <= 0.0:
            raise ParamsFormatError(ln_s, f"sigma entry {v} must be positive")
    ln_r, rv = expect("rho", p * (p + 1) // 2)
    ln_e, ev = expect("eta", p * (p - 1) // 2)

    rho = np.eye(p)
    it = iter(rv)
    for i in range(p):
        for j in range(i + 1):
            v = next(it)
            if i == j:
                if abs(v - 1.0) > 1e-12:
                    raise ParamsFormatError(ln_r, f"rho diagonal entry must be 1, got {v}")
            else:
                if abs(v) > 1.0:
                    raise ParamsFormatError(ln_r, f"rho entry {v} outside [-1, 1]")
                rho[i, j] = rho[j, i] = v
    eta = np.zeros((p, p))
    it = iter(ev)
    for i in range(p):
        for j in range(i):
            v = next(it)
            eta[i, j] = v
            eta[j, i] = -v

    try:
        return MfbmParams(H=np.array(hv), sigma=np.array(sv), rho=rho, eta=eta)
    except InvalidParamsError as exc:
        raise ParamsFormatError(ln_h, str(exc)) from exc


def save_params(params: MfbmParams, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(params_to_text(params))


def load_params(path) -> MfbmParams:
    with open(path, "r", encoding="utf-8") as f:
        return params_from_text(f.read())
