"""Secure content delivery probability (SCDP) toolkit.

Analytic connection/secrecy probabilities for cooperative small-cell
caching under Poisson-distributed eavesdroppers, an independent Monte
Carlo oracle, redundant-rate optimizers, and the closed-form optimal
cache split, with a CSV-emitting CLI on top.
"""

from scdp.geometry import (
    NetworkConfig,
    PolarPoint,
    layout_linear,
    make_linear_network,
    sbs_to_point_distance,
)
from scdp.content import ContentConfig, scheme_probabilities, zipf_head_sum, zipf_pmf
from scdp.numerics import BisectionSpec, PolarIntegrationSpec, bisect_root, integrate_polar
from scdp.analytics import (
    ApproximationConfig,
    RatePolicy,
    SchemeMetrics,
    scheme_metrics,
)
from scdp.montecarlo import TrialBatch
from scdp.rates import AoSettings, JtRateProblem, OtRateProblem, ao_solve_ot_rates, solve_jt_rate
from scdp.caching import DesignReport, ScdpTriple, end_to_end_design, optimal_phi, scdp_overall

__version__ = "0.1.0"

__all__ = [
    "NetworkConfig",
    "PolarPoint",
    "layout_linear",
    "make_linear_network",
    "sbs_to_point_distance",
    "ContentConfig",
    "zipf_pmf",
    "zipf_head_sum",
    "scheme_probabilities",
    "PolarIntegrationSpec",
    "BisectionSpec",
    "integrate_polar",
    "bisect_root",
    "RatePolicy",
    "ApproximationConfig",
    "SchemeMetrics",
    "scheme_metrics",
    "TrialBatch",
    "JtRateProblem",
    "OtRateProblem",
    "AoSettings",
    "solve_jt_rate",
    "ao_solve_ot_rates",
    "ScdpTriple",
    "DesignReport",
    "scdp_overall",
    "optimal_phi",
    "end_to_end_design",
    "__version__",
]
