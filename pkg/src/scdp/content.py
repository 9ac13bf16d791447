"""Zipf popularity, the hybrid popular/subfile cache split, and the
probability that a request is served by each delivery scheme."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

#: below this |gamma - 1| the head-sum approximation switches to its log limit
_GAMMA_ONE_EPS = 1e-6


@dataclass(frozen=True)
class ContentConfig:
    """Content library and cache-split parameters.

    ``phi`` is the fraction of each cache devoted to full copies of the
    most popular files; the rest holds disjoint subfiles of the next
    tier.  ``delta`` (> 1) inflates the secrecy rate on a cache miss to
    account for backhaul delay.
    """

    n_files: int
    cache_size: int
    gamma: float
    phi: float
    delta: float

    def __post_init__(self):
        if self.n_files < 2:
            raise ValueError(f"library size must be >= 2, got {self.n_files}")
        if self.cache_size < 1:
            raise ValueError(f"cache size must be >= 1, got {self.cache_size}")
        if self.gamma < 0:
            raise ValueError(f"Zipf skewness must be >= 0, got {self.gamma}")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"caching proportion must lie in [0,1], got {self.phi}")
        if not self.delta > 1.0:
            raise ValueError(f"backhaul penalty must be > 1, got {self.delta}")

    def validate_capacity(self, k: int) -> None:
        """Enforce the finite-capacity assumption K*L < N."""
        if k * self.cache_size >= self.n_files:
            raise ValueError(
                f"total cache capacity K*L={k * self.cache_size} must be smaller "
                f"than the library size N={self.n_files}"
            )

    def mpf_count(self) -> int:
        """Number of ranks cached as full copies, floor(phi*L)."""
        return math.floor(self.phi * self.cache_size)

    def dsf_boundary(self, k: int) -> int:
        """Last rank covered by subfile caching, floor(phi*L) + K*(L - floor(phi*L))."""
        m = self.mpf_count()
        return m + k * (self.cache_size - m)


def zipf_norm(cfg: ContentConfig) -> float:
    """Normalizer sum_{n=1..N} n^(-gamma)."""
    ranks = np.arange(1, cfg.n_files + 1, dtype=float)
    return float(np.sum(ranks**-cfg.gamma))


def zipf_pmf(cfg: ContentConfig, m: int) -> float:
    """Request probability of the m-th most popular file."""
    if not 1 <= m <= cfg.n_files:
        raise ValueError(f"rank {m} outside 1..{cfg.n_files}")
    return float(m**-cfg.gamma) / zipf_norm(cfg)


def zipf_pmf_vector(cfg: ContentConfig) -> np.ndarray:
    """Full popularity pmf over ranks 1..N."""
    ranks = np.arange(1, cfg.n_files + 1, dtype=float)
    w = ranks**-cfg.gamma
    return w / w.sum()


def _head_fraction_power_law(m: float, n: int, gamma: float) -> float:
    """(m^(1-gamma) - 1) / (n^(1-gamma) - 1), with the log limit at gamma=1."""
    if m <= 0.0:
        return 0.0
    if abs(gamma - 1.0) < _GAMMA_ONE_EPS:
        return math.log(m) / math.log(n)
    e = 1.0 - gamma
    return (m**e - 1.0) / (n**e - 1.0)


def zipf_head_sum(cfg: ContentConfig, m: float, mode: str = "exact", clamp: bool = True) -> float:
    """Probability mass of the ``m`` most popular ranks.

    ``exact`` sums the pmf (``m`` is truncated to an integer); ``approx``
    uses the power-law fraction (m^(1-gamma)-1)/(N^(1-gamma)-1), which
    accepts fractional ``m`` and is clamped to [0,1] unless ``clamp`` is
    False (the raw value is what the continuous cache-split objective
    differentiates).
    """
    if not 0 <= m <= cfg.n_files:
        raise ValueError(f"head count {m} outside 0..{cfg.n_files}")
    if mode == "exact":
        mi = int(m)
        if mi == 0:
            return 0.0
        ranks = np.arange(1, mi + 1, dtype=float)
        return float(np.sum(ranks**-cfg.gamma)) / zipf_norm(cfg)
    if mode == "approx":
        v = _head_fraction_power_law(float(m), cfg.n_files, cfg.gamma)
        return min(max(v, 0.0), 1.0) if clamp else v
    raise ValueError(f"unknown head-sum mode {mode!r}")


def scheme_probabilities(
    cfg: ContentConfig,
    k: int,
    mode: str = "exact",
    phi: float | None = None,
) -> tuple[float, float, float]:
    """Probabilities that a request is served by (JT, OT, CM).

    A request for a fully cached popular file is served by joint
    transmission, one for a subfile-cached rank by orthogonal
    transmission, and everything else is a cache miss.  ``exact`` uses
    the integer split floor(phi*L); ``approx`` relaxes it to the
    continuous phi*L with power-law head sums.
    """
    cfg.validate_capacity(k)
    if phi is None:
        phi = cfg.phi
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"caching proportion must lie in [0,1], got {phi}")
    length = cfg.cache_size
    if mode == "exact":
        m1 = math.floor(phi * length)
        m2 = m1 + k * (length - m1)
    elif mode == "approx":
        m1 = phi * length
        m2 = m1 + k * (length - m1)
    else:
        raise ValueError(f"unknown scheme-probability mode {mode!r}")
    if m2 > cfg.n_files:
        warnings.warn(
            f"subfile boundary {m2} exceeds library size {cfg.n_files}; clamping",
            stacklevel=2,
        )
        m2 = cfg.n_files
    head1 = zipf_head_sum(cfg, m1, mode)
    head2 = zipf_head_sum(cfg, m2, mode)
    p_jt = head1
    p_ot = head2 - head1
    p_cm = 1.0 - head2
    return (p_jt, p_ot, p_cm)


def scheme_probabilities_from_split(
    cfg: ContentConfig, k: int, m_full: int
) -> tuple[float, float, float]:
    """Exact scheme probabilities for an explicit integer split.

    ``m_full`` ranks get full copies and the next k*(L - m_full) ranks
    get subfiles; avoids the floating floor of phi*L when iterating over
    every feasible split.
    """
    cfg.validate_capacity(k)
    if not 0 <= m_full <= cfg.cache_size:
        raise ValueError(f"split {m_full} outside 0..{cfg.cache_size}")
    m2 = m_full + k * (cfg.cache_size - m_full)
    head1 = zipf_head_sum(cfg, m_full, "exact")
    head2 = zipf_head_sum(cfg, m2, "exact")
    return (head1, head2 - head1, 1.0 - head2)
