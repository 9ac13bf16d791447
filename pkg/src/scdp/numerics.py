"""Shared numeric kernels: polar-plane quadrature, bisection, and the
special functions used by the secrecy formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

TWO_PI = 2.0 * math.pi

#: maximum number of radial-domain doublings before giving up on the tail
MAX_TAIL_DOUBLINGS = 8


class NumericError(RuntimeError):
    """Numeric failure the caller may want to map to a distinct exit code."""


class TailConvergenceError(NumericError):
    """Raised when the improper-integral tail keeps contributing after the
    maximum number of radial doublings; carries the last two estimates."""

    def __init__(self, estimate_prev: float, estimate_last: float):
        self.estimate_prev = estimate_prev
        self.estimate_last = estimate_last
        super().__init__(
            "integral tail did not converge after "
            f"{MAX_TAIL_DOUBLINGS} doublings (last two estimates: "
            f"{estimate_prev !r}, {estimate_last !r})"
        )


class BracketError(NumericError):
    """Raised when a root bracket does not straddle a sign change."""


@dataclass(frozen=True)
class PolarIntegrationSpec:
    """Composite-Simpson tensor rule over a polar domain.

    ``n_r`` and ``n_theta`` count subintervals and must be even.  With
    ``adaptive`` on, the radial domain [0, r_max] is extended by annuli
    [r_max*2^(i-1), r_max*2^i] until the newest annulus contributes less
    than ``tail_tol`` of the running total (relative).
    """

    r_max: float
    n_r: int = 512
    n_theta: int = 256
    adaptive: bool = True
    tail_tol: float = 1e-6

    def __post_init__(self):
        if self.r_max <= 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        if self.n_r < 16 or self.n_theta < 16:
            raise ValueError("need at least 16 panels per axis")
        if self.n_r % 2 or self.n_theta % 2:
            raise ValueError("composite Simpson needs even panel counts")
        if self.tail_tol <= 0:
            raise ValueError("tail tolerance must be positive")


@dataclass(frozen=True)
class BisectionSpec:
    lo: float
    hi: float
    x_tol: float = 1e-9
    f_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.x_tol <= 0 or self.f_tol <= 0:
            raise ValueError("tolerances must be positive")


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` even subintervals of width ``h``."""
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def polar_mesh(
    spec: PolarIntegrationSpec,
    theta_range: tuple[float, float] = (0.0, TWO_PI),
    r_range: tuple[float, float] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quadrature nodes and combined weights (Jacobian included).

    Returns (r_nodes, theta_nodes, weights) where ``weights[i, j]``
    multiplies f(r_i, theta_j) and already contains the factor r_i.
    """
    r_lo, r_hi = r_range if r_range is not None else (0.0, spec.r_max)
    t_lo, t_hi = theta_range
    r = np.linspace(r_lo, r_hi, spec.n_r + 1)
    t = np.linspace(t_lo, t_hi, spec.n_theta + 1)
    wr = simpson_weights(spec.n_r, (r_hi - r_lo) / spec.n_r) * r
    wt = simpson_weights(spec.n_theta, (t_hi - t_lo) / spec.n_theta)
    return r, t, np.outer(wr, wt)


def _panel_integral(f, spec, theta_range, r_range) -> float:
    r, t, w = polar_mesh(spec, theta_range, r_range)
    vals = np.asarray(f(r[:, None], t[None, :]), dtype=float)
    return float(np.sum(w * vals))


def integrate_polar(
    f,
    spec: PolarIntegrationSpec,
    theta_range: tuple[float, float] = (0.0, TWO_PI),
) -> float:
    """Integrate f(r, theta) * r over the polar domain.

    ``f`` must accept broadcastable numpy arrays (an (n_r+1, 1) radius
    column against a (1, n_theta+1) angle row) and return finite values.
    The angular range defaults to the full circle; half-domain
    conventions with a symmetry factor are the caller's business.
    """
    total = _panel_integral(f, spec, theta_range, (0.0, spec.r_max))
    if not spec.adaptive:
        return total
    edge = spec.r_max
    prev = total
    for _ in range(MAX_TAIL_DOUBLINGS):
        annulus = _panel_integral(f, spec, theta_range, (edge, 2.0 * edge))
        prev = total
        total += annulus
        edge *= 2.0
        if abs(annulus) <= spec.tail_tol * max(abs(total), 1e-300):
            return total
    raise TailConvergenceError(prev, total)


def bisect_root(g, spec: BisectionSpec) -> float:
    """Root of a sign-changing function by bisection.

    Returns x with |g(x)| <= f_tol or with the bracket narrowed to
    x_tol.  Raises BracketError when g(lo) and g(hi) share a sign.
    """
    lo, hi = spec.lo, spec.hi
    f_lo = g(lo)
    f_hi = g(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: g(lo)={f_lo:.6g}, g(hi)={f_hi:.6g}"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(spec.max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = g(mid)
        if abs(f_mid) <= spec.f_tol or (hi - lo) * 0.5 <= spec.x_tol:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function."""
    if x <= 0:
        raise ValueError(f"ln_gamma needs x > 0, got {x}")
    return float(sp.gammaln(x))


def upper_gamma_regularized(a, x):
    """Regularized upper incomplete gamma Gamma(a, x)/Gamma(a), in [0,1]."""
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(a_arr <= 0):
        raise ValueError("shape parameter must be positive")
    if np.any(x_arr < 0):
        raise ValueError("argument must be >= 0")
    out = sp.gammaincc(a_arr, x_arr)
    return float(out) if np.isscalar(a) and np.isscalar(x) else out


def erf(x):
    """Error function (odd, erf(inf) = 1)."""
    out = sp.erf(np.asarray(x, dtype=float))
    return float(out) if np.isscalar(x) else out


def erfcx(x):
    """Scaled complementary error function exp(x^2) * erfc(x)."""
    out = sp.erfcx(np.asarray(x, dtype=float))
    return float(out) if np.isscalar(x) else out
