"""Optimal cache-split design.

Composes per-scheme optimal SCDPs into the overall delivery objective
(request-probability-weighted), and computes the closed-form optimal
proportion of cache devoted to fully replicated popular files, with
grid-search validation hooks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from scdp.analytics import rate_from_beta
from scdp.content import ContentConfig, scheme_probabilities, scheme_probabilities_from_split
from scdp.geometry import NetworkConfig
from scdp.numerics import PolarIntegrationSpec
from scdp.rates import (
    AoResult,
    AoSettings,
    RateSolution,
    ao_solve_ot_rates,
    make_jt_problem,
    make_ot_problem,
    solve_cm_rate,
    solve_jt_rate,
    scdp_ot,
)

_GAMMA_ONE_EPS = 1e-6
_GAMMA_ZERO_EPS = 1e-12


@dataclass(frozen=True)
class ScdpTriple:
    """Scheme-optimal SCDPs, each at its own optimal redundant rates.

    Full replication beats a cache miss whenever the optimizers did
    their job (the miss pays the backhaul rate penalty with everything
    else equal); a violation is reported as a numerical diagnostic
    rather than silently accepted.
    """

    p_jt: float
    p_ot: float
    p_cm: float

    def __post_init__(self):
        if self.p_jt <= self.p_cm - 1e-9:
            warnings.warn(
                f"cache-hit SCDP {self.p_jt} below cache-miss SCDP {self.p_cm}; "
                "suspect solver or quadrature tolerances",
                stacklevel=2,
            )

    @property
    def diff_jo(self) -> float:
        return self.p_jt - self.p_ot

    @property
    def diff_oc(self) -> float:
        return self.p_ot - self.p_cm

    @property
    def diff_jc(self) -> float:
        return self.p_jt - self.p_cm


def _head_fraction_raw(m: np.ndarray, n: int, gamma: float) -> np.ndarray:
    """Unclamped power-law head fraction, log form near gamma = 1."""
    with np.errstate(divide="ignore"):
        if abs(gamma - 1.0) < _GAMMA_ONE_EPS:
            return np.log(m) / math.log(n)
        e = 1.0 - gamma
        with np.errstate(invalid="ignore"):
            return (m**e - 1.0) / (n**e - 1.0)


def scdp_overall_curve(
    triple: ScdpTriple, content: ContentConfig, k: int, phis
) -> np.ndarray:
    """Continuous-relaxation overall SCDP on a grid of split proportions.

    This is the raw objective whose stationary point the closed-form
    optimum solves; head fractions are not clamped, so values near
    phi = 0 can be off the probability scale for gamma >= 1 (they only
    matter for locating the maximum).
    """
    content.validate_capacity(k)
    phis = np.asarray(phis, dtype=float)
    length = content.cache_size
    m1 = phis * length
    m2 = m1 + k * (length - m1)
    h1 = _head_fraction_raw(m1, content.n_files, content.gamma)
    h2 = _head_fraction_raw(m2, content.n_files, content.gamma)
    with np.errstate(invalid="ignore"):
        # a zero SCDP difference kills its term even where the raw head
        # fraction blows up at phi = 0
        t1 = np.where(triple.diff_jo == 0.0, 0.0, triple.diff_jo * h1)
        t2 = np.where(triple.diff_oc == 0.0, 0.0, triple.diff_oc * h2)
    return t1 + t2 + triple.p_cm


def scdp_overall(
    triple: ScdpTriple,
    content: ContentConfig,
    k: int,
    mode: str = "exact",
    phi: float | None = None,
) -> float:
    """Overall SCDP: scheme probabilities weighting the scheme optima.

    ``exact`` uses the integer cache split; ``approx`` the continuous
    relaxation (clamped into the probability scale).
    """
    p_jt, p_ot, p_cm = scheme_probabilities(content, k, mode, phi)
    value = p_jt * triple.p_jt + p_ot * triple.p_ot + p_cm * triple.p_cm
    return min(max(value, 0.0), 1.0)


def optimal_phi(triple: ScdpTriple, content: ContentConfig, k: int) -> float:
    """Closed-form optimal proportion of cache given to full replicas.

    Three regimes: fully replicate when the JT-over-OT gain dominates
    (K-1 times the OT-over-miss gain), cache subfiles only when OT beats
    JT outright, and otherwise the interior stationary point of the
    continuous relaxation.  Uniform popularity (gamma = 0) makes the
    relaxation affine, so the split goes to whichever endpoint the slope
    favors.
    """
    d_jo = triple.diff_jo
    d_oc = triple.diff_oc
    gamma = content.gamma
    if gamma < _GAMMA_ZERO_EPS:
        return 1.0 if d_jo >= (k - 1) * d_oc else 0.0
    if d_jo < 0:
        return 0.0
    if d_jo >= (k - 1) * d_oc:
        return 1.0
    if d_jo == 0:
        return 0.0
    ratio = (k - 1) * d_oc / d_jo
    return 1.0 / (1.0 + (ratio ** (1.0 / gamma) - 1.0) / k)


def grid_optimal_phi(
    triple: ScdpTriple, content: ContentConfig, k: int, n_points: int = 2001
) -> tuple[float, float]:
    """Argmax of the continuous relaxation on a uniform grid."""
    phis = np.linspace(0.0, 1.0, n_points)
    values = scdp_overall_curve(triple, content, k, phis)
    idx = int(np.argmax(values))
    return float(phis[idx]), float(values[idx])


def best_integer_split(
    triple: ScdpTriple, content: ContentConfig, k: int
) -> tuple[int, float]:
    """Exhaustive maximization of the exact objective over integer splits."""
    best_m, best_v = 0, -math.inf
    for m in range(content.cache_size + 1):
        p_jt, p_ot, p_cm = scheme_probabilities_from_split(content, k, m)
        v = p_jt * triple.p_jt + p_ot * triple.p_ot + p_cm * triple.p_cm
        if v > best_v:
            best_m, best_v = m, v
    return best_m, best_v


@dataclass(frozen=True)
class DesignReport:
    """Full two-step design: per-scheme optimal rates, then the cache split."""

    triple: ScdpTriple
    jt: RateSolution
    ot: AoResult
    ot_scdp: float
    cm: RateSolution
    phi_star: float
    scdp_at_phi_star: float
    scdp_exact_at_phi_star: float
    phi_grid: float
    phi_grid_gap: float
    best_split: int
    scdp_best_split: float
    scdp_mpf_only: float
    scdp_dsf_only: float
    scdp_no_cache: float

    @property
    def jt_redundant_rate(self) -> float:
        return rate_from_beta(self.jt.beta_e)

    @property
    def cm_redundant_rate(self) -> float:
        return rate_from_beta(self.cm.beta_e)

    @property
    def ot_redundant_rates(self) -> tuple[float, ...]:
        return tuple(rate_from_beta(b) for b in self.ot.beta_e)


def end_to_end_design(
    net: NetworkConfig,
    content: ContentConfig,
    r_s: float,
    eve_model: str = "NCE",
    spec: PolarIntegrationSpec | None = None,
    ao_settings: AoSettings | None = None,
    grid_points: int = 2001,
) -> DesignReport:
    """Two-step SCDP maximization: optimal redundant rates per scheme,
    then the closed-form optimal cache split, with grid validation.

    Rate optimization is defined for the non-colluding model; the
    per-scheme SCDPs do not depend on the split, which is what makes the
    decomposition exact.
    """
    if eve_model != "NCE":
        raise ValueError("rate optimization is defined for the NCE model")
    content.validate_capacity(net.k)
    jt_problem = make_jt_problem(net, r_s, spec)
    jt = solve_jt_rate(jt_problem)
    cm = solve_cm_rate(jt_problem, content.delta)
    ot_problem = make_ot_problem(net, r_s, spec)
    ot = ao_solve_ot_rates(ot_problem, ao_settings)
    ot_value = scdp_ot(ot_problem, ot.beta_e)
    triple = ScdpTriple(p_jt=jt.scdp, p_ot=ot_value, p_cm=cm.scdp)

    phi_star = optimal_phi(triple, content, net.k)
    phi_grid, _ = grid_optimal_phi(triple, content, net.k, grid_points)
    best_m, best_v = best_integer_split(triple, content, net.k)
    return DesignReport(
        triple=triple,
        jt=jt,
        ot=ot,
        ot_scdp=ot_value,
        cm=cm,
        phi_star=phi_star,
        scdp_at_phi_star=scdp_overall(triple, content, net.k, "approx", phi_star),
        scdp_exact_at_phi_star=scdp_overall(triple, content, net.k, "exact", phi_star),
        phi_grid=phi_grid,
        phi_grid_gap=abs(phi_star - phi_grid),
        best_split=best_m,
        scdp_best_split=best_v,
        scdp_mpf_only=scdp_overall(triple, content, net.k, "approx", 1.0),
        scdp_dsf_only=scdp_overall(triple, content, net.k, "approx", 0.0),
        scdp_no_cache=triple.p_cm,
    )
