"""Shared fixtures: a canonical mixture parameter set and cached samples."""

import numpy as np
import pytest

from tailcast import GpInvariantParams, LogNormalParams, MixtureParams, sample_mixture


def make_theta_star() -> MixtureParams:
    """Canonical ground-truth mixture used across the suite.

    Tail mass at u_star is 3.2 * (1 + 0.2*15/3)**(-5) = 0.1, so the
    component masses are (p0, p1, tail) = (0.4, 0.5, 0.1).
    """
    return MixtureParams(
        p0=0.4,
        p1=0.5,
        lognormal=LogNormalParams(mu=1.0, sigma=0.5),
        gp=GpInvariantParams(shape=0.2, scale0=3.0, zeta0=3.2),
        u_star=15.0,
    )


@pytest.fixture(scope="session")
def theta_star():
    return make_theta_star()


@pytest.fixture(scope="session")
def mixture_sample_100k(theta_star):
    """10^5 draws from theta_star, shared by the threshold-scan tests."""
    return sample_mixture(theta_star, 100_000, seed=42)


@pytest.fixture(scope="session")
def scan_100k(mixture_sample_100k):
    from tailcast import scan_thresholds
    return scan_thresholds(mixture_sample_100k)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
