"""Shared builders for the experiment geometries used across the suite."""

import numpy as np
import pytest

from scdp.analytics import default_spec
from scdp.geometry import LAMBDA0, NetworkConfig, PolarPoint, make_linear_network


def paper_default_net(lambda_e: float = LAMBDA0, k: int = 3, d: float = 1.0, x_u: float = 1.0):
    """Line-of-SBSs defaults: alpha=4, rho=10 dB, D=1 d0, user mid-row."""
    return make_linear_network(k, d, x_u, alpha=4.0, rho=10.0, lambda_e=lambda_e)


def wide_spacing_net(lambda_e: float = 3 * LAMBDA0):
    """The widely spaced collusion-benchmark layout: K=3, D=6 d0."""
    return make_linear_network(3, 6.0, 0.0, alpha=4.0, rho=10.0, lambda_e=lambda_e)


def random_geometry(rng: np.random.Generator, k: int | None = None, lambda_e=LAMBDA0):
    """Random SBS ring layout with distances in [0.3, 5] d0."""
    if k is None:
        k = int(rng.integers(1, 6))
    pts = tuple(
        PolarPoint(float(rng.uniform(0.3, 5.0)), float(rng.uniform(0, 2 * np.pi)))
        for _ in range(k)
    )
    return NetworkConfig(pts, alpha=4.0, rho=10.0, lambda_e=lambda_e)


@pytest.fixture
def fast_spec():
    """Reduced-panel integration spec for quick module tests."""

    def build(net, **overrides):
        params = dict(n_r=128, n_theta=64)
        params.update(overrides)
        return default_spec(net, **params)

    return build
