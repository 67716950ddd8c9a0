"""Zero-inflated mixture model: an atom at zero, a truncated log-normal
body below the extracted threshold, and a GP tail above it.  The CDF is
continuous at the threshold by construction.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .distributions import (GpInvariantParams, LogNormalParams, _XI_EPS,
                            erf_inv, gp_cdf_invariant, gp_quantile_invariant,
                            lognormal_cdf, lognormal_pdf, zeta_at)
from .errors import (ConvergenceError, DomainError, InconsistentComponentsError,
                     InsufficientDataError, ParameterError)
from .threshold import ScanResult

FORMAT_VERSION = 1


@dataclass(frozen=True)
class MixtureParams:
    """Full parameter set (p0; p1, mu, s; shape, zeta0, scale0; u_star)."""

    p0: float
    p1: float
    lognormal: LogNormalParams
    gp: GpInvariantParams
    u_star: float

    def __post_init__(self):
        if not 0 <= self.p0 < 1:
            raise ParameterError(f"p0 must lie in [0, 1), got {self.p0}")
        if not 0 < self.p1 < 1:
            raise ParameterError(f"p1 must lie in (0, 1), got {self.p1}")
        if not self.u_star > 0:
            raise ParameterError(f"u_star must be positive, got {self.u_star}")
        zu = zeta_at(self.gp, self.u_star)
        if not 0 < zu <= 1:
            raise ParameterError(f"tail mass at u_star must lie in (0, 1], got {zu}")
        if abs(self.p0 + self.p1 + zu - 1.0) > 1e-12:
            raise ParameterError(
                f"p0 + p1 + tail mass must equal 1, got {self.p0 + self.p1 + zu}")

    @property
    def tail_mass(self) -> float:
        """Probability of exceeding u_star."""
        return zeta_at(self.gp, self.u_star)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "p0": self.p0,
            "p1": self.p1,
            "lognormal": {"mu": self.lognormal.mu, "sigma": self.lognormal.sigma},
            "gp": {"shape": self.gp.shape, "scale0": self.gp.scale0,
                   "zeta0": self.gp.zeta0},
            "u_star": self.u_star,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureParams":
        if d.get("format_version") != FORMAT_VERSION:
            raise ParameterError(f"unsupported format_version {d.get('format_version')}")
        return cls(p0=d["p0"], p1=d["p1"],
                   lognormal=LogNormalParams(d["lognormal"]["mu"],
                                             d["lognormal"]["sigma"]),
                   gp=GpInvariantParams(d["gp"]["shape"], d["gp"]["scale0"],
                                        d["gp"]["zeta0"]),
                   u_star=d["u_star"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MixtureParams":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _truncated_lognormal_mle(body, u_star):
    """MLE of (mu, sigma) for a log-normal truncated to (0, u_star).

    Nelder-Mead on (mu, log sigma) started from the untruncated closed form
    (mean and standard deviation of the logs).
    """
    logs = np.log(body)
    mu0 = float(logs.mean())
    s0 = float(logs.std())
    if s0 <= 0:
        s0 = 1e-3

    def negloglik(theta):
        mu, log_s = theta
        s = np.exp(log_s)
        p = LogNormalParams(mu, s)
        ll = np.sum(np.log(lognormal_pdf(body, p))) - len(body) * np.log(
            lognormal_cdf(u_star, p))
        return -ll if np.isfinite(ll) else 1e30

    res = minimize(negloglik, np.array([mu0, np.log(s0)]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 4000})
    if not res.success and not np.isfinite(res.fun):
        raise ConvergenceError(
            f"truncated log-normal MLE failed after {res.nit} iterations",
            iterations=res.nit)
    return LogNormalParams(float(res.x[0]), float(np.exp(res.x[1])))


def fit_mixture(data, scan: ScanResult) -> MixtureParams:
    """Assemble the full mixture from data and a threshold scan.

    p0 is the empirical zero fraction, the GP tail comes from the scan, the
    body is a truncated log-normal MLE on values in (0, u_star), and p1 is
    forced by continuity of the CDF at u_star.
    """
    data = np.asarray(data, dtype=float)
    if len(data) == 0:
        raise InsufficientDataError("empty dataset")
    u_star = scan.u_star
    gp = scan.params

    p0 = float(np.mean(data == 0))
    zu = zeta_at(gp, u_star)
    p1 = 1.0 - p0 - zu
    if p1 <= 0:
        raise InconsistentComponentsError(
            f"no probability mass left for the body: p0={p0}, tail={zu}")

    body = data[(data > 0) & (data < u_star)]
    if len(body) == 0:
        raise InsufficientDataError("no observations in (0, u_star)")
    lognormal = _truncated_lognormal_mle(body, u_star)

    return MixtureParams(p0=p0, p1=p1, lognormal=lognormal, gp=gp, u_star=u_star)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def mixture_cdf(y, theta: MixtureParams):
    """Piecewise CDF: atom at zero, scaled log-normal body, GP tail."""
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    out = np.zeros_like(y)

    fl_u = lognormal_cdf(theta.u_star, theta.lognormal)
    zero = y == 0
    body = (y > 0) & (y < theta.u_star)
    tail = y >= theta.u_star
    out[zero] = theta.p0
    if np.any(body):
        out[body] = theta.p0 + theta.p1 * lognormal_cdf(y[body], theta.lognormal) / fl_u
    if np.any(tail):
        out[tail] = gp_cdf_invariant(y[tail], theta.gp)
    return float(out[0]) if scalar else out


def mixture_quantile(q, theta: MixtureParams):
    """Exact inverse of `mixture_cdf`; the zero atom maps [0, p0] to 0."""
    q = np.asarray(q, dtype=float)
    scalar = q.ndim == 0
    q = np.atleast_1d(q)
    if np.any((q < 0) | (q >= 1)):
        raise DomainError("quantile level must lie in [0, 1)")
    out = np.zeros_like(q)

    fl_u = lognormal_cdf(theta.u_star, theta.lognormal)
    split = theta.p0 + theta.p1
    body = (q > theta.p0) & (q < split)
    tail = q >= split
    if np.any(body):
        v = (q[body] - theta.p0) * fl_u / theta.p1
        out[body] = np.exp(theta.lognormal.mu
                           + theta.lognormal.sigma * np.sqrt(2.0) * erf_inv(2.0 * v - 1.0))
    if np.any(tail):
        out[tail] = gp_quantile_invariant(q[tail], theta.gp)
    return float(out[0]) if scalar else out


def mixture_density(y, theta: MixtureParams):
    """Density of the continuous part (the zero atom is excluded)."""
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    if np.any(y <= 0):
        raise DomainError("mixture_density requires y > 0")
    out = np.zeros_like(y)

    fl_u = lognormal_cdf(theta.u_star, theta.lognormal)
    body = y < theta.u_star
    tail = ~body
    if np.any(body):
        out[body] = theta.p1 * lognormal_pdf(y[body], theta.lognormal) / fl_u
    if np.any(tail):
        gp = theta.gp
        if abs(gp.shape) < _XI_EPS:
            out[tail] = gp.zeta0 / gp.scale0 * np.exp(-y[tail] / gp.scale0)
        else:
            arg = 1.0 + gp.shape * y[tail] / gp.scale0
            out[tail] = gp.zeta0 / gp.scale0 * arg ** (-1.0 / gp.shape - 1.0)
    return float(out[0]) if scalar else out


def sample_mixture(theta: MixtureParams, n: int, seed: int):
    """Inverse-transform sampling; reproducible for a fixed seed."""
    if n <= 0:
        raise ParameterError("n must be positive")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    return mixture_quantile(u, theta)
