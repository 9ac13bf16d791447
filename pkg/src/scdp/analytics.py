"""Connection and secrecy probabilities for the cooperative delivery
schemes, against both non-colluding and colluding eavesdroppers.

Conventions used throughout:

* JT / CM send one codeword from all SBSs (CM additionally inflates the
  secrecy rate by the backhaul penalty); OT sends one subfile per SBS on
  1/K of the bandwidth, so per-SBS rates may differ.
* A zero redundant rate maps to secrecy probability 0 (the eavesdropper
  side rate is positive almost surely), keeping optimizers total.
* Improper polar integrals are evaluated on the full [0, 2*pi) angle
  domain without symmetry factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from scdp.geometry import TWO_PI, NetworkConfig
from scdp.numerics import (
    PolarIntegrationSpec,
    erf,
    erfcx,
    integrate_polar,
    simpson_weights,
    upper_gamma_regularized,
)

_LN2 = math.log(2.0)

SCHEMES = ("JT", "OT", "CM")
EVE_MODELS = ("NCE", "CE")


def beta_from_rate(rate: float) -> float:
    """Map a rate in bits/s/Hz to its SNR threshold 2^rate - 1."""
    return math.expm1(rate * _LN2)


def rate_from_beta(beta: float) -> float:
    """Inverse of :func:`beta_from_rate`."""
    return math.log1p(beta) / _LN2


@dataclass(frozen=True)
class RatePolicy:
    """Wiretap-code rates: secrecy rate plus redundant rate(s).

    ``redundant`` is a single rate shared by all SBSs, or a per-SBS
    tuple (orthogonal transmission only).  All rates in bits/s/Hz.
    The codeword threshold follows from R_t = R_s + R_e as
    beta_t = beta_s + (1 + beta_s) * beta_e.
    """

    r_s: float
    redundant: float | tuple[float, ...]

    def __post_init__(self):
        if self.r_s < 0:
            raise ValueError(f"secrecy rate must be >= 0, got {self.r_s}")
        if isinstance(self.redundant, (tuple, list)):
            object.__setattr__(self, "redundant", tuple(float(r) for r in self.redundant))
            if any(r < 0 for r in self.redundant):
                raise ValueError("redundant rates must be >= 0")
        elif self.redundant < 0:
            raise ValueError(f"redundant rate must be >= 0, got {self.redundant}")

    @property
    def is_uniform(self) -> bool:
        return not isinstance(self.redundant, tuple)

    @property
    def beta_s(self) -> float:
        return beta_from_rate(self.r_s)

    def beta_e(self) -> float:
        if not self.is_uniform:
            raise ValueError("per-SBS redundant rates have no scalar threshold")
        return beta_from_rate(self.redundant)

    def beta_e_vector(self, k: int) -> np.ndarray:
        if self.is_uniform:
            return np.full(k, beta_from_rate(self.redundant))
        if len(self.redundant) != k:
            raise ValueError(
                f"got {len(self.redundant)} redundant rates for K={k} SBSs"
            )
        return np.array([beta_from_rate(r) for r in self.redundant])

    def beta_t(self) -> float:
        bs = self.beta_s
        return bs + (1.0 + bs) * self.beta_e()

    def beta_t_vector(self, k: int) -> np.ndarray:
        bs = self.beta_s
        return bs + (1.0 + bs) * self.beta_e_vector(k)


@dataclass(frozen=True)
class ApproximationConfig:
    """Term count for the dominant-term CDF approximation of aggregate SNR.

    Capped at 12 terms: the alternating binomial sum loses digits to
    cancellation faster than extra terms add accuracy.
    """

    m_terms: int = 5

    def __post_init__(self):
        if not 1 <= self.m_terms <= 12:
            raise ValueError(f"m_terms must lie in 1..12, got {self.m_terms}")

    @property
    def xi(self) -> float:
        m = self.m_terms
        return m * math.factorial(m) ** (-1.0 / m)


@dataclass(frozen=True)
class SchemeMetrics:
    """Connection probability, secrecy probability, and their product."""

    scheme: str
    eve_model: str
    p_c: float
    p_s: float
    scdp: float


def default_spec(net: NetworkConfig, **overrides) -> PolarIntegrationSpec:
    """Integration spec sized for this network's geometry."""
    params = dict(r_max=30.0 + net.max_sbs_distance())
    params.update(overrides)
    return PolarIntegrationSpec(**params)


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


# ---------------------------------------------------------------------------
# connection probabilities
# ---------------------------------------------------------------------------

def p_c_jt(net: NetworkConfig, beta_t: float) -> float:
    """Connection probability under joint transmission.

    The non-coherently combined main-channel power is exponential with
    mean sum_k r_{b,k}^(-alpha).
    """
    if beta_t < 0:
        raise ValueError("codeword threshold must be >= 0")
    return math.exp(-(beta_t / net.rho) / net.sum_rb_neg_alpha())


def p_c_ot(net: NetworkConfig, beta_t_k: Sequence[float]) -> float:
    """Connection probability under orthogonal transmission.

    The file is recovered only when every per-SBS subchannel sustains
    its own codeword rate; each subchannel sees K*rho because each SBS
    occupies 1/K of the bandwidth.
    """
    bt = np.asarray(beta_t_k, dtype=float)
    if bt.shape != (net.k,):
        raise ValueError(f"expected {net.k} codeword thresholds, got shape {bt.shape}")
    if np.any(bt < 0):
        raise ValueError("codeword thresholds must be >= 0")
    return math.exp(-float(np.sum(net.r_b**net.alpha * bt)) / (net.k * net.rho))


# ---------------------------------------------------------------------------
# secrecy probabilities, non-colluding eavesdroppers
# ---------------------------------------------------------------------------

def _inv_sum_gain(net: NetworkConfig, r, theta):
    """1 / sum_k d_k^(-alpha) at field points; 0 on an SBS location."""
    d = net.sbs_distances(r, theta)
    with np.errstate(divide="ignore", over="ignore"):
        s = np.sum(d**-net.alpha, axis=0)
        return np.where(np.isinf(s), 0.0, 1.0 / s)


def p_s_nce_jt(
    net: NetworkConfig, beta_e: float, spec: PolarIntegrationSpec | None = None
) -> float:
    """Secrecy probability of JT against independent eavesdroppers.

    Void probability (via the point-process generating functional) that
    no eavesdropper's combined SNR exceeds the redundancy threshold.
    """
    if beta_e < 0:
        raise ValueError("redundancy threshold must be >= 0")
    if net.lambda_e == 0:
        return 1.0
    if beta_e == 0:
        return 0.0
    spec = spec or default_spec(net)

    def integrand(r, theta):
        return np.exp(-(beta_e / net.rho) * _inv_sum_gain(net, r, theta))

    return math.exp(-net.lambda_e * integrate_polar(integrand, spec))


def _ot_exponent(net: NetworkConfig, beta_e_k: np.ndarray, r, theta):
    """sum_k beta_k d_k^alpha / (K rho) at field points."""
    d = net.sbs_distances(r, theta)
    b = beta_e_k.reshape((-1,) + (1,) * (d.ndim - 1))
    return np.sum(b * d**net.alpha, axis=0) / (net.k * net.rho)


def _check_beta_vector(net: NetworkConfig, beta_e_k) -> np.ndarray:
    be = np.asarray(beta_e_k, dtype=float)
    if be.shape != (net.k,):
        raise ValueError(f"expected {net.k} redundancy thresholds, got shape {be.shape}")
    if np.any(be < 0):
        raise ValueError("redundancy thresholds must be >= 0")
    return be


def p_s_nce_ot(
    net: NetworkConfig, beta_e_k: Sequence[float], spec: PolarIntegrationSpec | None = None
) -> float:
    """Secrecy probability of OT against independent eavesdroppers.

    A file leaks only to an eavesdropper that intercepts all K subfiles
    on its own; the integrand is that single-point interception
    probability.
    """
    be = _check_beta_vector(net, beta_e_k)
    if net.lambda_e == 0:
        return 1.0
    if np.all(be == 0):
        return 0.0
    spec = spec or default_spec(net)

    def integrand(r, theta):
        return np.exp(-_ot_exponent(net, be, r, theta))

    return math.exp(-net.lambda_e * integrate_polar(integrand, spec))


def p_s_nce_ot_alpha2(
    net: NetworkConfig, beta_e_k: Sequence[float], n_theta: int = 512
) -> float:
    """Closed form of :func:`p_s_nce_ot` at path-loss exponent 2.

    At alpha = 2 the radial integral is Gaussian and collapses by
    completing the square, leaving a single angular integral
    Z = int sqrt(pi) z e^(z^2) (1 + erf(z)) dtheta with
    z = sum_k beta_k r_{b,k} cos(theta_{b,k} - theta) / sqrt(S K rho),
    S = sum_k beta_k.  Evaluated in erfcx form so the e^(z^2) factor
    never overflows.
    """
    if net.alpha != 2.0:
        raise ValueError(f"closed form requires alpha = 2 exactly, got {net.alpha}")
    be = _check_beta_vector(net, beta_e_k)
    if net.lambda_e == 0:
        return 1.0
    s_beta = float(be.sum())
    if s_beta == 0:
        return 0.0
    krho = net.k * net.rho
    p_term = float(np.sum(be * net.r_b**2))
    theta = np.linspace(0.0, TWO_PI, n_theta + 1)
    z = np.sum(
        be[:, None] * net.r_b[:, None] * np.cos(net.theta_b[:, None] - theta[None, :]),
        axis=0,
    ) / math.sqrt(s_beta * krho)
    # z^2 <= P/(K rho) by Cauchy-Schwarz, so both branches stay bounded
    decay = math.exp(-p_term / krho)
    pos = np.maximum(z, 0.0)
    neg = np.minimum(z, 0.0)
    vals = np.where(
        z >= 0,
        math.sqrt(math.pi) * pos * (1.0 + erf(pos)) * np.exp(pos**2 - p_term / krho),
        math.sqrt(math.pi) * neg * erfcx(-neg) * decay,
    )
    z_int = float(np.sum(simpson_weights(n_theta, TWO_PI / n_theta) * vals))
    total = (krho / (2.0 * s_beta)) * (TWO_PI * decay + z_int)
    return math.exp(-net.lambda_e * total)


# ---------------------------------------------------------------------------
# secrecy probabilities, colluding eavesdroppers
# ---------------------------------------------------------------------------

def laplace_ie(
    net: NetworkConfig, s: float, spec: PolarIntegrationSpec | None = None
) -> float:
    """Laplace transform of the colluders' aggregate SNR under JT.

    The tail of the integrand decays like r^(-alpha), so alpha > 2 is
    required for convergence.
    """
    if s < 0:
        raise ValueError("Laplace argument must be >= 0")
    if s == 0 or net.lambda_e == 0:
        return 1.0
    if net.alpha <= 2:
        raise ValueError("aggregate-SNR transform needs alpha > 2")
    spec = spec or default_spec(net)

    def integrand(r, theta):
        d = net.sbs_distances(r, theta)
        with np.errstate(divide="ignore", over="ignore"):
            g = s * net.rho * np.sum(d**-net.alpha, axis=0)
        return 1.0 - 1.0 / (1.0 + g)

    return math.exp(-net.lambda_e * integrate_polar(integrand, spec))


def p_s_ce_jt(
    net: NetworkConfig,
    beta_e: float,
    approx: ApproximationConfig | None = None,
    spec: PolarIntegrationSpec | None = None,
) -> float:
    """Secrecy probability of JT against colluding (MRC) eavesdroppers.

    Closed-form approximation of the aggregate-SNR CDF via an
    alternating binomial combination of Laplace transform values; the
    sum is compensated and the result clamped to [0,1].
    """
    if beta_e < 0:
        raise ValueError("redundancy threshold must be >= 0")
    if net.lambda_e == 0:
        return 1.0
    if beta_e == 0:
        return 0.0
    approx = approx or ApproximationConfig()
    m_terms, xi = approx.m_terms, approx.xi
    terms = [
        math.comb(m_terms, m) * (-1.0) ** (m + 1) * laplace_ie(net, m * xi / beta_e, spec)
        for m in range(1, m_terms + 1)
    ]
    return _clamp01(math.fsum(terms))


def gamma_moment_params(distances: Sequence[float], alpha: float) -> tuple[float, float]:
    """Gamma shape/scale matching the conditional aggregate-power moments.

    For eavesdroppers at the given distances from one SBS, the fading
    aggregate sum_j |h_j|^2 d_j^(-alpha) has mean sum d^(-alpha) and
    variance sum d^(-2*alpha); moment matching gives shape
    mu^2/sigma^2 (>= 1, equality for a single point) and scale
    sigma^2/mu.
    """
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        raise ValueError("need at least one eavesdropper distance")
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    mu = float(np.sum(d**-alpha))
    var = float(np.sum(d ** (-2.0 * alpha)))
    return mu * mu / var, var / mu


def _default_disc_radius(net: NetworkConfig) -> float:
    return max(20.0, net.max_sbs_distance() + 10.0)


def poisson_count_quantile(mu: float, tail: float = 1e-6) -> int:
    """Smallest J with P{Poisson(mu) > J} < tail."""
    if mu <= 0:
        return 1
    pmf = math.exp(-mu)
    cdf = pmf
    j = 0
    while 1.0 - cdf >= tail and j < 10_000_000:
        j += 1
        pmf *= mu / j
        cdf += pmf
    return max(j, 1)


def p_s_ce_ot_literal(
    net: NetworkConfig,
    beta_e_k: Sequence[float],
    radius: float | None = None,
    j_max: int | None = None,
    spec: PolarIntegrationSpec | None = None,
) -> float:
    """Count-conditioned series for OT secrecy under collusion, with the
    per-point reduction of the gamma moment parameters.

    Each eavesdropper's interception factor reduces to an exponential
    tail, so the series telescopes to Poisson weights times powers of a
    single disc integral.  The value is informative for a finite disc
    only: as the disc grows, ever more remote points each contribute a
    near-zero factor to the all-points product, so the series limit
    degenerates to 1 for any positive density.  The set-level sampled
    reading (:func:`p_s_ce_ot_setlevel`) is the one validated against
    direct simulation.
    """
    be = _check_beta_vector(net, beta_e_k)
    if net.lambda_e == 0:
        return 1.0
    if np.all(be == 0):
        return 0.0
    radius = radius if radius is not None else _default_disc_radius(net)
    base = spec or default_spec(net)
    disc_spec = PolarIntegrationSpec(
        r_max=radius, n_r=base.n_r, n_theta=base.n_theta, adaptive=False
    )

    def integrand(r, theta):
        return np.exp(-_ot_exponent(net, be, r, theta))

    disc_integral = integrate_polar(integrand, disc_spec)
    mu = net.lambda_e * math.pi * radius**2
    q = disc_integral / (math.pi * radius**2)
    q = min(max(q, 0.0), 1.0)
    if j_max is None:
        j_max = poisson_count_quantile(mu)
    term = math.exp(-mu)
    total = 0.0
    for j in range(1, j_max + 1):
        term *= mu * q / j
        total += term
    return _clamp01(1.0 - total)


def p_s_ce_ot_setlevel(
    net: NetworkConfig,
    beta_e_k: Sequence[float],
    radius: float | None = None,
    n_samples: int = 20_000,
    seed: int = 0,
) -> float:
    """Set-level gamma-approximation estimate of OT secrecy under collusion.

    Samples eavesdropper point sets in a disc around the user, matches a
    gamma distribution to each SBS's conditional aggregate power over
    the whole set, and averages the product of per-SBS interception
    tails.  Replaces only the fading average with the gamma fit, so
    geometric correlation between SBSs is kept.
    """
    be = _check_beta_vector(net, beta_e_k)
    if net.lambda_e == 0:
        return 1.0
    if np.all(be == 0):
        return 0.0
    radius = radius if radius is not None else _default_disc_radius(net)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0x5E7)))
    counts = rng.poisson(net.lambda_e * math.pi * radius**2, size=n_samples)
    total = int(counts.sum())
    r = radius * np.sqrt(rng.random(total))
    theta = TWO_PI * rng.random(total)
    owner = np.repeat(np.arange(n_samples), counts)
    d = net.sbs_distances(r, theta)  # (K, total)
    thresh = be / (net.k * net.rho)
    nonempty = counts > 0
    intercept_product = np.ones(n_samples)
    for k in range(net.k):
        s1 = np.bincount(owner, weights=d[k] ** -net.alpha, minlength=n_samples)
        s2 = np.bincount(owner, weights=d[k] ** (-2.0 * net.alpha), minlength=n_samples)
        with np.errstate(invalid="ignore", divide="ignore"):
            ups = np.where(nonempty, s1 * s1 / s2, 1.0)
            tau = np.where(nonempty, s2 / s1, 1.0)
            tail = upper_gamma_regularized(ups, thresh[k] / tau)
        intercept_product *= np.where(nonempty, tail, 0.0)
    return _clamp01(1.0 - float(intercept_product.mean()))


def interference_constant(alpha: float) -> float:
    """pi * Gamma(1 + 2/alpha) * Gamma(1 - 2/alpha); finite for alpha > 2."""
    if alpha <= 2:
        raise ValueError(f"constant is finite only for alpha > 2, got {alpha}")
    return math.pi * math.gamma(1.0 + 2.0 / alpha) * math.gamma(1.0 - 2.0 / alpha)


def laplace_ik(net: NetworkConfig, s: float) -> float:
    """Laplace transform of one SBS's aggregate wiretap power over an
    independent plane-filling point field (closed form, no quadrature)."""
    if s < 0:
        raise ValueError("Laplace argument must be >= 0")
    if s == 0 or net.lambda_e == 0:
        return 1.0
    kappa = interference_constant(net.alpha)
    return math.exp(-kappa * net.lambda_e * (net.k * net.rho * s) ** (2.0 / net.alpha))


def p_s_ce_ot_indep(
    net: NetworkConfig,
    beta_e_k: Sequence[float],
    approx: ApproximationConfig | None = None,
) -> float:
    """OT secrecy under collusion with per-SBS independent point fields.

    Valid when SBSs are far enough apart that the distances from one
    eavesdropper to different SBSs decorrelate; then each subfile stream
    is intercepted independently and the per-stream tail gets the same
    alternating-binomial treatment as the JT case.
    """
    be = _check_beta_vector(net, beta_e_k)
    if net.lambda_e == 0:
        return 1.0
    approx = approx or ApproximationConfig()
    m_terms, xi = approx.m_terms, approx.xi
    product = 1.0
    for bk in be:
        if bk == 0:
            inner = 1.0
        else:
            inner = math.fsum(
                math.comb(m_terms, m) * (-1.0) ** m * laplace_ik(net, m * xi / bk)
                for m in range(0, m_terms + 1)
            )
        product *= min(max(inner, 0.0), 1.0)
    return _clamp01(1.0 - product)


def p_s_ce_ot_alpha4(net: NetworkConfig, beta_e_k: Sequence[float]) -> float:
    """Exact OT collusion secrecy at alpha = 4 under the independent
    point-field premise: 1 - prod_k erf(kappa*lambda/2 * sqrt(K rho / beta_k)).

    Increases with each redundancy threshold and with K; decreases with
    the eavesdropper density and the normalized SNR.
    """
    if net.alpha != 4.0:
        raise ValueError(f"closed form requires alpha = 4 exactly, got {net.alpha}")
    be = _check_beta_vector(net, beta_e_k)
    if net.lambda_e == 0:
        return 1.0
    kappa = math.pi**2 / 2.0
    product = 1.0
    for bk in be:
        if bk == 0:
            product *= 1.0
        else:
            product *= math.erf(0.5 * kappa * net.lambda_e * math.sqrt(net.k * net.rho / bk))
    return _clamp01(1.0 - product)


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def cm_beta_s(beta_s: float, delta: float) -> float:
    """Cache-miss secrecy threshold: R_s inflated to delta*R_s maps the
    threshold to (1 + beta_s)^delta - 1."""
    if delta <= 1:
        raise ValueError(f"backhaul penalty must be > 1, got {delta}")
    return (1.0 + beta_s) ** delta - 1.0


def scheme_metrics(
    net: NetworkConfig,
    policy: RatePolicy,
    scheme: str,
    eve_model: str,
    approx: ApproximationConfig | None = None,
    delta: float | None = None,
    spec: PolarIntegrationSpec | None = None,
) -> SchemeMetrics:
    """Evaluate (p_c, p_s, scdp) for one scheme under one eavesdropper model.

    CM reuses the JT formulas with the secrecy threshold inflated by the
    backhaul penalty ``delta`` (required for CM); the redundancy
    threshold, and hence p_s, is unchanged.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if eve_model not in EVE_MODELS:
        raise ValueError(f"unknown eavesdropper model {eve_model!r}")
    if scheme == "OT":
        beta_t_k = policy.beta_t_vector(net.k)
        beta_e_k = policy.beta_e_vector(net.k)
        p_c = p_c_ot(net, beta_t_k)
        if eve_model == "NCE":
            p_s = p_s_nce_ot(net, beta_e_k, spec)
        else:
            p_s = p_s_ce_ot_indep(net, beta_e_k, approx)
    else:
        if not policy.is_uniform:
            raise ValueError(f"{scheme} requires one shared redundant rate")
        beta_s = policy.beta_s
        if scheme == "CM":
            if delta is None:
                raise ValueError("CM metrics need the backhaul penalty delta")
            beta_s = cm_beta_s(beta_s, delta)
        beta_e = policy.beta_e()
        beta_t = beta_s + (1.0 + beta_s) * beta_e
        p_c = p_c_jt(net, beta_t)
        if eve_model == "NCE":
            p_s = p_s_nce_jt(net, beta_e, spec)
        else:
            p_s = p_s_ce_jt(net, beta_e, approx, spec)
    return SchemeMetrics(scheme=scheme, eve_model=eve_model, p_c=p_c, p_s=p_s, scdp=p_c * p_s)
