"""Probability kernels: error function, log-normal, and the generalized
Pareto distribution in both its threshold-dependent and threshold-free
parameterizations, plus maximum-likelihood fitting of the tail.

All functions accept scalars or numpy arrays and compute in float64.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, DomainError, InsufficientDataError, ParameterError

_SQRT_PI = np.sqrt(np.pi)
_XI_EPS = 1e-8  # below this |shape| the exponential branch is used


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GpThresholdParams:
    """Generalized Pareto parameters tied to a particular threshold.

    `exceed_prob` is the probability that an observation exceeds
    `threshold`, so the CDF below refers to the conditional law of
    exceedances.
    """

    shape: float
    scale: float
    exceed_prob: float
    threshold: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")
        if not 0 < self.exceed_prob <= 1:
            raise ParameterError(f"exceed_prob must lie in (0, 1], got {self.exceed_prob}")
        if self.threshold < 0:
            raise ParameterError(f"threshold must be >= 0, got {self.threshold}")
        if self.shape < 0:
            endpoint = self.threshold - self.scale / self.shape
            if not np.isfinite(endpoint) or endpoint <= self.threshold:
                raise ParameterError("negative shape implies an invalid upper endpoint")


@dataclass(frozen=True)
class GpInvariantParams:
    """Threshold-free GP parameterization (shape, scale0, zeta0).

    `zeta0` is a parameter, not a probability: it may exceed 1 because the
    tail branch is only ever evaluated above the fitted threshold.
    """

    shape: float
    scale0: float
    zeta0: float

    def __post_init__(self):
        if not self.scale0 > 0:
            raise ParameterError(f"scale0 must be positive, got {self.scale0}")
        if not self.zeta0 > 0:
            raise ParameterError(f"zeta0 must be positive, got {self.zeta0}")


@dataclass(frozen=True)
class LogNormalParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")


# ---------------------------------------------------------------------------
# error function
# ---------------------------------------------------------------------------

def erf(x):
    """Error function, accurate to better than 1e-12 absolute.

    Uses the all-positive-term Maclaurin-type series for |x| <= 3 and the
    classical continued fraction for the complement beyond that.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    a = np.abs(x)
    out = np.empty_like(a)

    small = a <= 3.0
    if np.any(small):
        z = a[small]
        z2 = 2.0 * z * z
        term = z.copy()
        total = z.copy()
        # term_{n} = term_{n-1} * 2 z^2 / (2n + 1); all terms positive
        for n in range(1, 140):
            term = term * z2 / (2 * n + 1)
            total += term
            if np.all(term <= 1e-18 * total):
                break
        out[small] = (2.0 / _SQRT_PI) * np.exp(-z * z) * total

    large = ~small
    if np.any(large):
        z = a[large]
        # erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        f = z.copy()
        for k in range(60, 0, -1):
            f = z + (k / 2.0) / f
        out[large] = 1.0 - np.exp(-z * z) / (_SQRT_PI * f)

    out = np.sign(x) * out
    return float(out[0]) if scalar else out


def erf_inv(p):
    """Inverse error function via Newton iteration with bisection fallback."""
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if np.any(np.abs(p) >= 1.0):
        raise DomainError("erf_inv requires |p| < 1")

    # Winitzki-style starting point, then Newton on erf
    a = 0.147
    ln1p2 = np.log1p(-p * p)
    t = 2.0 / (np.pi * a) + ln1p2 / 2.0
    x = np.sign(p) * np.sqrt(np.maximum(np.sqrt(t * t - ln1p2 / a) - t, 0.0))

    converged = np.zeros(p.shape, dtype=bool)
    for _ in range(60):
        r = erf(x) - p
        step = r * _SQRT_PI / 2.0 * np.exp(np.minimum(x * x, 700.0))
        x = x - step
        converged = np.abs(r) < 1e-15
        if np.all(converged):
            break

    # bisection for any element Newton failed to settle
    if not np.all(converged):
        for idx in np.flatnonzero(~converged):
            lo, hi = -10.0, 10.0
            target = p[idx]
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if erf(mid) < target:
                    lo = mid
                else:
                    hi = mid
            x[idx] = 0.5 * (lo + hi)

    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# log-normal
# ---------------------------------------------------------------------------

def lognormal_cdf(y, p: LogNormalParams):
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("lognormal_cdf requires y > 0")
    out = 0.5 * (1.0 + erf((np.log(y) - p.mu) / (p.sigma * np.sqrt(2.0))))
    return out


def lognormal_pdf(y, p: LogNormalParams):
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("lognormal_pdf requires y > 0")
    z = (np.log(y) - p.mu) / p.sigma
    return np.exp(-0.5 * z * z) / (y * p.sigma * np.sqrt(2.0 * np.pi))


# ---------------------------------------------------------------------------
# generalized Pareto
# ---------------------------------------------------------------------------

def gp_cdf_threshold(y, p: GpThresholdParams):
    """CDF of exceedances over `p.threshold` in the threshold-tied form."""
    y = np.asarray(y, dtype=float)
    if np.any(y < p.threshold):
        raise DomainError("gp_cdf_threshold requires y >= threshold")
    z = (y - p.threshold) / p.scale
    if abs(p.shape) < _XI_EPS:
        return 1.0 - np.exp(-z)
    arg = 1.0 + p.shape * z
    if np.any(arg <= 0):
        raise DomainError("y outside the support of the fitted GP tail")
    return 1.0 - arg ** (-1.0 / p.shape)


def gp_cdf_invariant(y, p: GpInvariantParams):
    """Threshold-free GP CDF, valid for y >= 0."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("gp_cdf_invariant requires y >= 0")
    if abs(p.shape) < _XI_EPS:
        return 1.0 - p.zeta0 * np.exp(-y / p.scale0)
    arg = 1.0 + p.shape * y / p.scale0
    if np.any(arg <= 0):
        raise DomainError("y outside the support of the GP tail")
    return 1.0 - p.zeta0 * arg ** (-1.0 / p.shape)


def gp_quantile_invariant(q, p: GpInvariantParams):
    """Analytic inverse of `gp_cdf_invariant`."""
    q = np.asarray(q, dtype=float)
    if np.any(q >= 1.0):
        raise DomainError("gp_quantile_invariant requires q < 1")
    tail = (1.0 - q) / p.zeta0
    if np.any(tail > 1.0):
        raise DomainError("q below the range covered by the tail branch")
    if abs(p.shape) < _XI_EPS:
        return -p.scale0 * np.log(tail)
    return (p.scale0 / p.shape) * (tail ** (-p.shape) - 1.0)


def convert_to_invariant(p: GpThresholdParams) -> GpInvariantParams:
    """Reparameterize threshold-tied GP parameters into the threshold-free
    form.  The shape is unchanged; scale0 = scale - shape * threshold."""
    scale0 = p.scale - p.shape * p.threshold
    if scale0 <= 0:
        raise ParameterError(
            f"scale - shape*threshold must be positive, got {scale0}")
    if abs(p.shape) < _XI_EPS:
        zeta0 = p.exceed_prob * np.exp(p.threshold / scale0)
    else:
        zeta0 = p.exceed_prob * (1.0 + p.shape * p.threshold / scale0) ** (1.0 / p.shape)
    return GpInvariantParams(shape=p.shape, scale0=scale0, zeta0=float(zeta0))


def zeta_at(p: GpInvariantParams, u: float) -> float:
    """Implied exceedance parameter at level u: the survival prefactor of
    the threshold-free CDF evaluated at u."""
    if u < 0:
        raise DomainError("u must be >= 0")
    if abs(p.shape) < _XI_EPS:
        return float(p.zeta0 * np.exp(-u / p.scale0))
    arg = 1.0 + p.shape * u / p.scale0
    if arg <= 0:
        raise DomainError("u outside the support of the GP tail")
    return float(p.zeta0 * arg ** (-1.0 / p.shape))


# ---------------------------------------------------------------------------
# maximum-likelihood fitting
# ---------------------------------------------------------------------------

def _gp_negloglik(xi, sigma, z):
    if sigma <= 0:
        return np.inf
    if abs(xi) < _XI_EPS:
        return len(z) * np.log(sigma) + np.sum(z) / sigma
    arg = 1.0 + xi * z / sigma
    if np.any(arg <= 1e-12):
        return np.inf
    return len(z) * np.log(sigma) + (1.0 + 1.0 / xi) * np.sum(np.log(arg))


def _pwm_init(z):
    """Probability-weighted-moment starting point for (shape, scale)."""
    zs = np.sort(z)
    n = len(zs)
    b0 = zs.mean()
    w = (n - np.arange(1, n + 1)) / (n - 1.0)
    b1 = np.mean(zs * w)  # estimates E[Z * (1 - F(Z))]
    denom = b0 - 2.0 * b1
    if b1 <= 0 or denom <= 0:
        return 0.0, b0
    xi0 = float(np.clip(2.0 - b0 / denom, -0.9, 0.9))
    sigma0 = 2.0 * b0 * b1 / denom
    if sigma0 <= 0:
        xi0, sigma0 = 0.0, b0
    return xi0, sigma0


def gp_fit_mle(exceedances, min_samples=30):
    """Fit (shape, scale) of a GP law to positive exceedances by maximum
    likelihood.

    Nelder-Mead on (shape, log scale), started from probability-weighted
    moments.  Returns (shape, scale, loglik).
    """
    z = np.asarray(exceedances, dtype=float)
    if z.ndim != 1 or len(z) < min_samples:
        raise InsufficientDataError(
            f"need at least {min_samples} exceedances, got {len(z)}")
    if not np.all(np.isfinite(z)) or np.any(z <= 0):
        raise DomainError("exceedances must be finite and > 0")

    xi0, sigma0 = _pwm_init(z)

    def objective(theta):
        xi, log_sigma = theta
        nll = _gp_negloglik(xi, np.exp(log_sigma), z)
        return nll if np.isfinite(nll) else 1e30

    starts = [(xi0, np.log(sigma0)), (0.1, np.log(z.mean())),
              (0.0, np.log(z.mean()))]
    best = None
    for start in starts:
        if objective(np.asarray(start)) >= 1e30:
            continue
        res = minimize(objective, np.asarray(start), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun) or best.fun >= 1e30:
        raise ConvergenceError("GP MLE found no feasible optimum")
    if not best.success:
        raise ConvergenceError(
            f"GP MLE failed to converge after {best.nit} iterations",
            iterations=best.nit)

    xi, sigma = float(best.x[0]), float(np.exp(best.x[1]))
    return xi, sigma, float(-_gp_negloglik(xi, sigma, z))
