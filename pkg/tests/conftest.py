"""Shared fixtures and deterministic hypothesis configuration."""
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "deterministic",
    derandomize=True,
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


def worker_count() -> int:
    """Parallelism for the heavier tests, capped to keep scheduling cheap."""
    return max(1, min(4, os.cpu_count() or 1))


@pytest.fixture(scope="session")
def workers() -> int:
    return worker_count()


@pytest.fixture(scope="session")
def gg2_model():
    """A two-dimensional gamma-gaussian model with nontrivial cross terms."""
    from regenlab.models import GammaGaussianModel
    return GammaGaussianModel(
        tau_shape=2.0, tau_scale=1.0,
        beta=np.array([0.3, -0.2]), kappa=np.array([0.1, 0.2]),
        noise_cov=np.array([[1.0, 0.3], [0.3, 0.8]]), dim=2)


@pytest.fixture(scope="session")
def gg1_model():
    """A one-dimensional gamma-gaussian model."""
    from regenlab.models import GammaGaussianModel
    return GammaGaussianModel(
        tau_shape=2.0, tau_scale=1.0, beta=np.array([0.4]),
        kappa=np.array([0.25]), noise_cov=np.array([[0.9]]), dim=1)
