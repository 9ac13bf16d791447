"""Redundant-rate optimization.

JT (and CM, via the inflated secrecy threshold) reduces to minimizing a
strictly convex scalar auxiliary function whose derivative has a unique
zero-crossing found by bisection.  OT optimizes a vector of per-SBS
thresholds by cyclic coordinate descent, each subproblem solved exactly
by the same zero/interior dichotomy; the iterate sequence descends and
terminates at a KKT point.

The public ``q_*`` / ``omega_*`` functions evaluate one point through
the adaptive quadrature.  The solvers precompute a fixed quadrature mesh
once per problem (base domain plus two doubling annuli, ample for the
super-exponential integrand tails) and reuse it for every derivative
evaluation; the two paths agree to quadrature tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from scdp.analytics import beta_from_rate, default_spec
from scdp.geometry import TWO_PI, NetworkConfig
from scdp.numerics import (
    BisectionSpec,
    BracketError,
    PolarIntegrationSpec,
    bisect_root,
    integrate_polar,
    polar_mesh,
)


@dataclass(frozen=True)
class JtRateProblem:
    """Scalar redundancy design for a jointly transmitted codeword.

    ``a_coef`` is 1/(rho * sum_k r_{b,k}^(-alpha)); the field kernel
    B(r, theta) = 1/(rho * sum_k d_k(r, theta)^(-alpha)) shapes the
    secrecy exponent.
    """

    net: NetworkConfig
    beta_s: float
    spec: PolarIntegrationSpec

    @property
    def a_coef(self) -> float:
        return 1.0 / (self.net.rho * self.net.sum_rb_neg_alpha())

    def field_kernel(self, r, theta):
        d = self.net.sbs_distances(r, theta)
        with np.errstate(divide="ignore", over="ignore"):
            s = np.sum(d**-self.net.alpha, axis=0)
            return np.where(np.isinf(s), 0.0, 1.0 / (self.net.rho * s))


def make_jt_problem(
    net: NetworkConfig, r_s: float, spec: PolarIntegrationSpec | None = None
) -> JtRateProblem:
    return JtRateProblem(net=net, beta_s=beta_from_rate(r_s), spec=spec or default_spec(net))


def q_secrecy_exponent(p: JtRateProblem, beta_e: float) -> float:
    """lambda_e * integral of exp(-B * beta_e); +inf at beta_e = 0."""
    if p.net.lambda_e == 0:
        return 0.0
    if beta_e <= 0:
        return math.inf

    def integrand(r, theta):
        return np.exp(-beta_e * p.field_kernel(r, theta))

    return p.net.lambda_e * integrate_polar(integrand, p.spec)


def q_value(p: JtRateProblem, beta_e: float) -> float:
    """Auxiliary objective A(1+beta_s)*beta_e + secrecy exponent."""
    return p.a_coef * (1.0 + p.beta_s) * beta_e + q_secrecy_exponent(p, beta_e)


def q_derivative(p: JtRateProblem, beta_e: float) -> float:
    """Strictly increasing from -inf at 0+ to A(1+beta_s) > 0."""
    if p.net.lambda_e == 0:
        return p.a_coef * (1.0 + p.beta_s)
    if beta_e <= 0:
        return -math.inf

    def integrand(r, theta):
        kern = p.field_kernel(r, theta)
        return kern * np.exp(-beta_e * kern)

    return p.a_coef * (1.0 + p.beta_s) - p.net.lambda_e * integrate_polar(integrand, p.spec)


def scdp_jt(p: JtRateProblem, beta_e: float) -> float:
    """SCDP of the JT scheme at the given redundancy threshold."""
    beta_t = p.beta_s + (1.0 + p.beta_s) * beta_e
    exponent = p.a_coef * beta_t + q_secrecy_exponent(p, beta_e)
    return math.exp(-exponent)


@dataclass(frozen=True)
class RateSolution:
    beta_e: float
    objective: float
    scdp: float


# ---------------------------------------------------------------------------
# fixed-mesh kernels
# ---------------------------------------------------------------------------

def _flat_mesh(spec: PolarIntegrationSpec, doublings: int = 2):
    """Node and weight vectors of the base domain plus ``doublings`` annuli."""
    ranges = [(0.0, spec.r_max)]
    edge = spec.r_max
    for _ in range(doublings):
        ranges.append((edge, 2.0 * edge))
        edge *= 2.0
    rs, ts, ws = [], [], []
    for r_range in ranges:
        r, t, w = polar_mesh(spec, (0.0, TWO_PI), r_range)
        rr, tt = np.meshgrid(r, t, indexing="ij")
        rs.append(rr.ravel())
        ts.append(tt.ravel())
        ws.append(w.ravel())
    return np.concatenate(rs), np.concatenate(ts), np.concatenate(ws)


class _JtKernel:
    """Mesh-sampled JT field kernel for cheap repeated evaluation."""

    def __init__(self, p: JtRateProblem, doublings: int = 2):
        r, t, w = _flat_mesh(p.spec, doublings)
        self.values = p.field_kernel(r, t)
        self.weights = w
        self.lam = p.net.lambda_e

    def exponent(self, beta_e: float) -> float:
        if self.lam == 0:
            return 0.0
        if beta_e <= 0:
            return math.inf
        with np.errstate(under="ignore"):
            return self.lam * float(self.weights @ np.exp(-beta_e * self.values))

    def derivative_integral(self, beta_e: float) -> float:
        with np.errstate(under="ignore"):
            return self.lam * float(
                self.weights @ (self.values * np.exp(-beta_e * self.values))
            )


class _OtKernel:
    """Mesh-sampled per-SBS exponent kernel S with S[:, k] = d_k^alpha/(K rho)."""

    def __init__(self, p: OtRateProblem, doublings: int = 2):
        r, t, w = _flat_mesh(p.spec, doublings)
        d = p.net.sbs_distances(r, t)
        self.s_matrix = (d**p.net.alpha).T / (p.net.k * p.net.rho)
        self.weights = w
        self.lam = p.net.lambda_e
        krho = p.net.k * p.net.rho
        self.linear = (1.0 + p.beta_s) * p.rb_alpha / krho

    def omega(self, beta: np.ndarray) -> float:
        lin = float(self.linear @ beta)
        if self.lam == 0:
            return lin
        if np.all(beta == 0):
            return math.inf
        with np.errstate(under="ignore"):
            return lin + self.lam * float(self.weights @ np.exp(-self.s_matrix @ beta))

    def partial(self, beta: np.ndarray, k: int) -> float:
        if self.lam == 0:
            return float(self.linear[k])
        if np.all(beta == 0):
            return -math.inf
        with np.errstate(under="ignore"):
            decay = np.exp(-self.s_matrix @ beta)
            return float(self.linear[k]) - self.lam * float(
                self.weights @ (self.s_matrix[:, k] * decay)
            )

    def gradient(self, beta: np.ndarray) -> np.ndarray:
        return np.array([self.partial(beta, k) for k in range(beta.size)])


# ---------------------------------------------------------------------------
# scalar solvers
# ---------------------------------------------------------------------------

def _bracket_increasing(g, start: float = 1.0, max_expansions: int = 80) -> tuple[float, float]:
    """Bracket the zero of an increasing function by doubling/halving."""
    g_start = g(start)
    if g_start == 0.0:
        return start, start
    lo = hi = start
    if g_start < 0:
        for _ in range(max_expansions):
            hi *= 2.0
            if g(hi) > 0:
                return lo, hi
            lo = hi
    else:
        for _ in range(max_expansions):
            lo *= 0.5
            if g(lo) < 0:
                return lo, hi
            hi = lo
    raise BracketError(f"could not bracket a sign change from start={start}")


def _solve_increasing(g, start: float = 1.0, x_tol: float = 1e-9, f_tol: float = 1e-10) -> float:
    lo, hi = _bracket_increasing(g, start)
    if lo == hi:
        return lo
    return bisect_root(g, BisectionSpec(lo=lo, hi=hi, x_tol=x_tol, f_tol=f_tol))


def solve_jt_rate(p: JtRateProblem) -> RateSolution:
    """Optimal redundancy threshold for JT.

    With no eavesdroppers the optimum is zero redundancy; otherwise the
    unique zero-crossing of the objective derivative, bracketed by
    doubling from 1 (the derivative is negative at the lower bracket end
    before bisecting).
    """
    if p.net.lambda_e == 0:
        return RateSolution(beta_e=0.0, objective=0.0, scdp=math.exp(-p.a_coef * p.beta_s))
    kernel = _JtKernel(p)
    a_rate = p.a_coef * (1.0 + p.beta_s)
    beta_star = _solve_increasing(lambda b: a_rate - kernel.derivative_integral(b))
    exponent = kernel.exponent(beta_star)
    beta_t = p.beta_s + (1.0 + p.beta_s) * beta_star
    return RateSolution(
        beta_e=beta_star,
        objective=a_rate * beta_star + exponent,
        scdp=math.exp(-p.a_coef * beta_t - exponent),
    )


def solve_cm_rate(p: JtRateProblem, delta: float) -> RateSolution:
    """Cache-miss variant: same machinery with the secrecy threshold
    inflated to (1 + beta_s)^delta - 1."""
    if delta <= 1:
        raise ValueError(f"backhaul penalty must be > 1, got {delta}")
    return solve_jt_rate(replace(p, beta_s=(1.0 + p.beta_s) ** delta - 1.0))


# ---------------------------------------------------------------------------
# orthogonal transmission: vector problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OtRateProblem:
    """Per-SBS redundancy design for orthogonal subfile streams."""

    net: NetworkConfig
    beta_s: float
    spec: PolarIntegrationSpec

    @property
    def rb_alpha(self) -> np.ndarray:
        return self.net.r_b**self.net.alpha


def make_ot_problem(
    net: NetworkConfig, r_s: float, spec: PolarIntegrationSpec | None = None
) -> OtRateProblem:
    return OtRateProblem(net=net, beta_s=beta_from_rate(r_s), spec=spec or default_spec(net))


def omega_value(p: OtRateProblem, beta_e) -> float:
    """Vector auxiliary objective; +inf at the all-zero point."""
    beta = np.asarray(beta_e, dtype=float)
    krho = p.net.k * p.net.rho
    linear = (1.0 + p.beta_s) / krho * float(np.dot(p.rb_alpha, beta))
    if p.net.lambda_e == 0:
        return linear
    if np.all(beta == 0):
        return math.inf

    def integrand(r, theta):
        d = p.net.sbs_distances(r, theta)
        b = beta.reshape((-1,) + (1,) * (d.ndim - 1))
        return np.exp(-np.sum(b * d**p.net.alpha, axis=0) / krho)

    return linear + p.net.lambda_e * integrate_polar(integrand, p.spec)


def omega_partial(p: OtRateProblem, beta_e, k: int) -> float:
    """Partial derivative of the vector objective in coordinate ``k``."""
    beta = np.asarray(beta_e, dtype=float)
    krho = p.net.k * p.net.rho
    linear = (1.0 + p.beta_s) * p.rb_alpha[k] / krho
    if p.net.lambda_e == 0:
        return linear
    if np.all(beta == 0):
        return -math.inf

    def integrand(r, theta):
        d = p.net.sbs_distances(r, theta)
        b = beta.reshape((-1,) + (1,) * (d.ndim - 1))
        expo = np.sum(b * d**p.net.alpha, axis=0) / krho
        return d[k] ** p.net.alpha * np.exp(-expo)

    return linear - p.net.lambda_e / krho * integrate_polar(integrand, p.spec)


def scdp_ot(p: OtRateProblem, beta_e) -> float:
    """SCDP of the OT scheme at the given per-SBS thresholds."""
    beta = np.asarray(beta_e, dtype=float)
    krho = p.net.k * p.net.rho
    return math.exp(-p.beta_s * float(p.rb_alpha.sum()) / krho - omega_value(p, beta))


@dataclass(frozen=True)
class AoSettings:
    """Alternating-optimization controls.

    ``epsilon`` is the relative objective-change stop from the iteration
    scheme; ``coord_tol`` additionally requires the coordinates to have
    settled, which the flat basins of this objective need before
    symmetric coordinates agree to optimizer precision.  Coordinates are
    resolved an order of magnitude tighter than ``coord_tol`` so
    bisection jitter cannot mask stationarity.
    """

    epsilon: float = 1e-10
    max_outer: int = 200
    beta_init: float = 1e-3
    coord_tol: float = 1e-8

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.beta_init < 0:
            raise ValueError("initial point must be >= 0")


@dataclass(frozen=True)
class AoResult:
    beta_e: np.ndarray
    omega: float
    iterations: int
    converged: bool
    gradient: np.ndarray
    omega_history: tuple[float, ...] = field(repr=False, default=())

    @property
    def kkt_residual(self) -> float:
        """max(complementarity slack, negative-gradient excess)."""
        comp = float(np.max(np.abs(self.beta_e * self.gradient)))
        neg = float(max(0.0, -np.min(self.gradient)))
        return max(comp, neg)


def _solve_coordinate(kernel: _OtKernel, beta: np.ndarray, k: int, x_tol: float) -> float:
    """Exact minimizer of the objective in coordinate ``k``: zero when the
    derivative at zero is already nonnegative (remote SBSs), else the
    zero-crossing."""
    probe = beta.copy()
    probe[k] = 0.0
    if kernel.partial(probe, k) >= 0:
        return 0.0

    def g(t: float) -> float:
        probe[k] = t
        return kernel.partial(probe, k)

    start = beta[k] if beta[k] > 0 else 1.0
    # x_tol must govern here: the basin can be flat enough that a residual
    # stop leaves coordinate jitter above the sweep settle tolerance
    return _solve_increasing(g, start, x_tol, f_tol=1e-300)


def ao_solve_ot_rates(
    p: OtRateProblem,
    settings: AoSettings | None = None,
    sweep_order: list[int] | None = None,
) -> AoResult:
    """Cyclic coordinate descent on the vector redundancy objective.

    Sweeps coordinates in ascending order (or ``sweep_order``), each
    solved exactly; the objective is nonincreasing across sweeps.
    Terminates when both the relative objective change drops below
    ``epsilon`` and no coordinate moved more than ``coord_tol``; if
    ``max_outer`` sweeps pass first the best iterate is returned flagged
    unconverged.
    """
    settings = settings or AoSettings()
    order = sweep_order if sweep_order is not None else list(range(p.net.k))
    if sorted(order) != list(range(p.net.k)):
        raise ValueError("sweep order must be a permutation of the coordinates")
    kernel = _OtKernel(p)
    if p.net.lambda_e == 0:
        beta = np.zeros(p.net.k)
        grad = kernel.gradient(beta)
        return AoResult(beta, kernel.omega(beta), 0, True, grad, (kernel.omega(beta),))
    beta = np.full(p.net.k, float(settings.beta_init))
    omega_prev = kernel.omega(beta)
    history = [omega_prev]
    converged = False
    iterations = 0
    x_tol = 0.1 * settings.coord_tol
    for iterations in range(1, settings.max_outer + 1):
        beta_old = beta.copy()
        for k in order:
            beta[k] = _solve_coordinate(kernel, beta, k, x_tol)
        omega_new = kernel.omega(beta)
        history.append(omega_new)
        rel_change = abs(omega_new - omega_prev) / max(abs(omega_prev), 1e-300)
        moved = float(np.max(np.abs(beta - beta_old)))
        omega_prev = omega_new
        if rel_change < settings.epsilon and moved <= settings.coord_tol:
            converged = True
            break
    return AoResult(beta, omega_prev, iterations, converged, kernel.gradient(beta), tuple(history))


def solve_ot_uniform_rate(p: OtRateProblem) -> RateSolution:
    """Optimal shared redundancy threshold (all SBSs forced equal).

    The restricted objective derivative swaps the per-coordinate kernel
    for the 1-norms of the distance-power vectors; its unique
    zero-crossing is found by the same bracketed bisection.  The
    restricted optimum can only be weaker than the per-SBS one.
    """
    if p.net.lambda_e == 0:
        return RateSolution(0.0, 0.0, scdp_ot(p, np.zeros(p.net.k)))
    kernel = _OtKernel(p)
    row_sum = kernel.s_matrix.sum(axis=1)
    lin_sum = float(kernel.linear.sum())

    def g(beta: float) -> float:
        if beta <= 0:
            return -math.inf
        with np.errstate(under="ignore"):
            return lin_sum - kernel.lam * float(
                kernel.weights @ (row_sum * np.exp(-row_sum * beta))
            )

    beta_star = _solve_increasing(g)
    vec = np.full(p.net.k, beta_star)
    omega = kernel.omega(vec)
    return RateSolution(
        beta_star,
        omega,
        math.exp(-p.beta_s * float(p.rb_alpha.sum()) / (p.net.k * p.net.rho) - omega),
    )


# ---------------------------------------------------------------------------
# fixed-mesh batch evaluation (grid-search oracles)
# ---------------------------------------------------------------------------

def scdp_jt_batch(
    p: JtRateProblem, betas: np.ndarray, doublings: int = 2, chunk: int = 512
) -> np.ndarray:
    """JT SCDP on a grid of redundancy thresholds over one fixed mesh.

    Shares a truncated quadrature mesh across the whole grid, so use it
    for argmax comparisons against the bisection solution computed with
    the same spec.
    """
    kernel = _JtKernel(p, doublings)
    betas = np.asarray(betas, dtype=float)
    out = np.empty(betas.size)
    for lo in range(0, betas.size, chunk):
        block = betas[lo : lo + chunk, None]
        with np.errstate(under="ignore"):
            integral = np.exp(-block * kernel.values[None, :]) @ kernel.weights
        beta_t = p.beta_s + (1.0 + p.beta_s) * block[:, 0]
        out[lo : lo + chunk] = -p.a_coef * beta_t - p.net.lambda_e * integral
    with np.errstate(under="ignore"):
        return np.exp(out)


def omega_batch(
    p: OtRateProblem, betas: np.ndarray, doublings: int = 2, chunk: int = 256
) -> np.ndarray:
    """Vector objective on an (n, K) grid of thresholds over one fixed mesh."""
    kernel = _OtKernel(p, doublings)
    betas = np.asarray(betas, dtype=float)
    out = np.empty(betas.shape[0])
    for lo in range(0, betas.shape[0], chunk):
        block = betas[lo : lo + chunk]
        with np.errstate(under="ignore"):
            integral = np.exp(-block @ kernel.s_matrix.T) @ kernel.weights
        out[lo : lo + chunk] = block @ kernel.linear + kernel.lam * integral
    return out
