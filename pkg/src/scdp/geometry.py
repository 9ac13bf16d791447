"""Network geometry: SBS layout, physical constants, and distance kernels.

All distances are dimensionless in units of the reference distance
d0 = 100 m, so densities are in nodes per d0^2 (the reference density
1e-6 nodes/m^2 equals 0.01 nodes/d0^2).  SNR values are stored as linear
ratios; dB conversion happens exactly once at config parse time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

D0_METERS = 100.0
#: reference eavesdropper density (1e-6 nodes/m^2) in nodes per d0^2
LAMBDA0 = 0.01

TWO_PI = 2.0 * math.pi


def db_to_linear(value_db: float) -> float:
    """Convert a dB power ratio to a linear ratio."""
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class PolarPoint:
    """Point in polar coordinates around the user at the origin.

    ``r`` is in d0 units; ``theta`` is stored normalized to [0, 2*pi).
    """

    r: float
    theta: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"polar radius must be >= 0, got {self.r}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)

    def to_xy(self) -> tuple[float, float]:
        return (self.r * math.cos(self.theta), self.r * math.sin(self.theta))

    @staticmethod
    def from_xy(x: float, y: float) -> "PolarPoint":
        return PolarPoint(math.hypot(x, y), math.atan2(y, x))


@dataclass(frozen=True)
class NetworkConfig:
    """Deterministic network state: SBS positions and channel parameters.

    Parameters
    ----------
    sbs_polar : tuple of PolarPoint
        SBS positions relative to the user at the origin; every radius
        must be strictly positive.
    alpha : float
        Path-loss exponent, at least 2.  Aggregate-power transforms need
        alpha strictly above 2 for finite tails and enforce that at the
        call site; alpha = 2 is admitted for its dedicated closed form.
    rho : float
        Normalized SNR P/(W*N0) as a linear ratio.
    lambda_e : float
        Eavesdropper density in nodes per d0^2.
    """

    sbs_polar: tuple[PolarPoint, ...]
    alpha: float
    rho: float
    lambda_e: float
    _r_b: np.ndarray = field(init=False, repr=False, compare=False)
    _theta_b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sbs = tuple(
            p if isinstance(p, PolarPoint) else PolarPoint(p[0], p[1]) for p in self.sbs_polar
        )
        object.__setattr__(self, "sbs_polar", sbs)
        if len(sbs) < 1:
            raise ValueError("need at least one SBS")
        if any(p.r <= 0 for p in sbs):
            raise ValueError("all SBS-user distances must be strictly positive")
        if not self.alpha >= 2:
            raise ValueError(f"path-loss exponent must be >= 2, got {self.alpha}")
        if not self.rho > 0:
            raise ValueError(f"normalized SNR must be positive, got {self.rho}")
        if self.lambda_e < 0:
            raise ValueError(f"eavesdropper density must be >= 0, got {self.lambda_e}")
        xy = [p.to_xy() for p in sbs]
        for i in range(len(xy)):
            for j in range(i + 1, len(xy)):
                if math.hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1]) < 1e-12:
                    warnings.warn(
                        f"SBS {i} and SBS {j} are co-located; treating them as "
                        "co-located transmitters",
                        stacklevel=2,
                    )
        object.__setattr__(self, "_r_b", np.array([p.r for p in sbs]))
        object.__setattr__(self, "_theta_b", np.array([p.theta for p in sbs]))

    @property
    def k(self) -> int:
        """Number of cooperating SBSs."""
        return len(self.sbs_polar)

    @property
    def r_b(self) -> np.ndarray:
        """SBS-user distances, shape (K,)."""
        return self._r_b

    @property
    def theta_b(self) -> np.ndarray:
        """SBS angles, shape (K,)."""
        return self._theta_b

    def max_sbs_distance(self) -> float:
        return float(self._r_b.max())

    def sum_rb_neg_alpha(self) -> float:
        """sum_k r_{b,k}^(-alpha), the mean combined main-channel gain."""
        return float(np.sum(self._r_b ** (-self.alpha)))

    def sbs_distances(self, r, theta) -> np.ndarray:
        """Distances from every SBS to the polar point(s) (r, theta).

        ``r`` and ``theta`` may be scalars or broadcastable arrays; the
        result has shape (K,) + broadcast(r, theta).shape.  Uses the law
        of cosines, so it is symmetric in the sign of the angle offset.
        """
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        rb = self._r_b.reshape((-1,) + (1,) * max(r.ndim, theta.ndim))
        tb = self._theta_b.reshape(rb.shape)
        sq = rb**2 + r**2 - 2.0 * rb * r * np.cos(tb - theta)
        # clip tiny negative round-off for coincident points
        return np.sqrt(np.maximum(sq, 0.0))


def sbs_to_point_distance(cfg: NetworkConfig, k: int, p: PolarPoint) -> float:
    """Law-of-cosines distance between SBS ``k`` and the point ``p``."""
    if not 0 <= k < cfg.k:
        raise IndexError(f"SBS index {k} out of range for K={cfg.k}")
    return float(cfg.sbs_distances(p.r, p.theta)[k])


def layout_linear(k: int, d: float, x_u: float) -> tuple[PolarPoint, ...]:
    """SBS positions for the line-of-SBSs experiment layout.

    SBS ``i`` (0-based) sits at Cartesian (i*d, 0) and the user at
    (x_u, 0.5) in d0 units; translating the user to the origin puts SBS
    ``i`` at (i*d - x_u, -0.5).
    """
    if k < 1:
        raise ValueError("need at least one SBS")
    if d <= 0:
        raise ValueError("SBS spacing must be positive")
    return tuple(PolarPoint.from_xy(i * d - x_u, -0.5) for i in range(k))


def make_linear_network(
    k: int,
    d: float,
    x_u: float,
    alpha: float = 4.0,
    rho: float = 10.0,
    lambda_e: float = LAMBDA0,
) -> NetworkConfig:
    """NetworkConfig for the linear layout (``rho`` is linear, not dB)."""
    return NetworkConfig(layout_linear(k, d, x_u), alpha=alpha, rho=rho, lambda_e=lambda_e)
