"""Independent simulation oracle.

Estimates every probability in :mod:`scdp.analytics` from first
principles: sample a Poisson field of eavesdroppers in a finite disc,
draw Rayleigh fading per channel, and count the reliability / secrecy
events of each scheme.

Reproducibility contract: trials are partitioned into fixed-size chunks
and every chunk draws from its own counter-derived stream, so estimates
are bit-identical for a given (seed, n_trials, config) regardless of the
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from scdp.analytics import RatePolicy, cm_beta_s
from scdp.content import ContentConfig, zipf_pmf_vector
from scdp.geometry import TWO_PI, NetworkConfig

_SQRT_HALF = math.sqrt(0.5)

# purpose tags decorrelate the streams of different estimators run on one seed
_PC, _PS, _LAPLACE_IE, _LAPLACE_IK, _OVERALL, _PPP, _FADING = range(1, 8)


@dataclass(frozen=True)
class TrialBatch:
    """Monte Carlo sample set: size, seed provenance, and sampling window.

    ``window_radius`` (d0 units) bounds the sampled eavesdropper disc; it
    must cover at least twice the largest SBS distance plus 10 so the
    truncated tail stays below the estimator tolerances.  ``None`` picks
    that bound (at least 20).
    """

    seed: int
    n_trials: int
    window_radius: float | None = None
    workers: int = 1
    chunk_size: int = 8192

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("need at least one trial")
        if self.workers < 1 or self.chunk_size < 1:
            raise ValueError("workers and chunk size must be positive")


def default_window(net: NetworkConfig) -> float:
    return max(20.0, 2.0 * net.max_sbs_distance() + 10.0)


def _resolve_window(net: NetworkConfig, batch: TrialBatch) -> float:
    radius = batch.window_radius if batch.window_radius is not None else default_window(net)
    if radius < 2.0 * net.max_sbs_distance() + 10.0:
        raise ValueError(
            f"window radius {radius} too small for the geometry "
            f"(need >= {2.0 * net.max_sbs_distance() + 10.0})"
        )
    return radius


def _chunk_rng(seed: int, purpose: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=(seed, purpose, chunk)))
    )


def _run_chunks(
    batch: TrialBatch, purpose: int, kernel: Callable[[np.random.Generator, int], tuple]
) -> list[tuple]:
    """Run ``kernel(rng, n_chunk)`` over fixed-size chunks, in chunk order."""
    sizes = []
    remaining = batch.n_trials
    while remaining > 0:
        sizes.append(min(batch.chunk_size, remaining))
        remaining -= batch.chunk_size
    tasks = [(i, n) for i, n in enumerate(sizes)]
    if batch.workers == 1:
        return [kernel(_chunk_rng(batch.seed, purpose, i), n) for i, n in tasks]
    with ThreadPoolExecutor(max_workers=batch.workers) as pool:
        futures = [pool.submit(kernel, _chunk_rng(batch.seed, purpose, i), n) for i, n in tasks]
        return [f.result() for f in futures]


def _indicator_reduce(parts: list[tuple], n: int) -> tuple[float, float]:
    hits = math.fsum(p[0] for p in parts)
    p_hat = hits / n
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / n)


def _mean_reduce(parts: list[tuple], n: int) -> tuple[float, float]:
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return mean, math.sqrt(var / n)


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric complex Gaussian, zero mean, unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * _SQRT_HALF


def _draw_field(rng, n, lambda_e, radius):
    """One disc-limited Poisson field per trial; returns flat point arrays."""
    counts = rng.poisson(lambda_e * math.pi * radius**2, n)
    total = int(counts.sum())
    r = radius * np.sqrt(rng.random(total))
    theta = TWO_PI * rng.random(total)
    owner = np.repeat(np.arange(n), counts)
    return counts, owner, r, theta


def sample_ppp(batch: TrialBatch, lambda_e: float, radius: float = 20.0) -> list[np.ndarray]:
    """Raw Poisson-field realizations (per trial: array of (r, theta) rows).

    Runs sequentially so the trial order is stable; streams are the same
    chunk-keyed ones the estimators use.
    """
    sequential = replace(batch, workers=1)
    out: list[np.ndarray] = []

    def kernel(rng, n):
        counts, owner, r, theta = _draw_field(rng, n, lambda_e, radius)
        pts = np.column_stack([r, theta])
        splits = np.cumsum(counts)[:-1]
        out.extend(np.split(pts, splits))
        return (0.0,)

    _run_chunks(sequential, _PPP, kernel)
    return out


def sample_fading(batch: TrialBatch, k: int) -> np.ndarray:
    """Fading draws for invariant checks, shape (n_trials, k); sequential."""
    sequential = replace(batch, workers=1)
    parts: list[np.ndarray] = []

    def kernel(rng, n):
        parts.append(_crandn(rng, (n, k)))
        return (0.0,)

    _run_chunks(sequential, _FADING, kernel)
    return np.concatenate(parts, axis=0)


# ---------------------------------------------------------------------------
# connection
# ---------------------------------------------------------------------------

def estimate_pc(
    net: NetworkConfig,
    policy: RatePolicy,
    scheme: str,
    batch: TrialBatch,
    delta: float | None = None,
) -> tuple[float, float]:
    """Empirical connection probability with binomial standard error."""
    if scheme in ("JT", "CM"):
        beta_s = policy.beta_s
        if scheme == "CM":
            if delta is None:
                raise ValueError("CM needs the backhaul penalty delta")
            beta_s = cm_beta_s(beta_s, delta)
        beta_t = beta_s + (1.0 + beta_s) * policy.beta_e()
        gains = net.r_b ** (-net.alpha / 2.0)

        def kernel(rng, n):
            amp = _crandn(rng, (n, net.k)) @ gains
            snr = net.rho * np.abs(amp) ** 2
            return (int(np.count_nonzero(snr >= beta_t)),)

    elif scheme == "OT":
        beta_t_k = policy.beta_t_vector(net.k)
        pow_gain = net.r_b**-net.alpha

        def kernel(rng, n):
            h2 = np.abs(_crandn(rng, (n, net.k))) ** 2
            snr = net.k * net.rho * h2 * pow_gain
            return (int(np.count_nonzero(np.all(snr >= beta_t_k, axis=1))),)

    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return _indicator_reduce(_run_chunks(batch, _PC, kernel), batch.n_trials)


# ---------------------------------------------------------------------------
# secrecy
# ---------------------------------------------------------------------------

def _jt_eav_snr(net, d, h):
    """Per-eavesdropper combined SNR for a jointly transmitted codeword."""
    amp = np.sum(h * d.T ** (-net.alpha / 2.0), axis=1)
    return net.rho * np.abs(amp) ** 2


def estimate_ps(
    net: NetworkConfig,
    policy: RatePolicy,
    scheme: str,
    eve_model: str,
    batch: TrialBatch,
    independent_fields: bool = False,
) -> tuple[float, float]:
    """Empirical secrecy probability.

    The colluding OT case is simulated with the single shared field seen
    by all SBSs (geometric correlation kept); ``independent_fields``
    switches to one field per SBS, the premise of the per-stream
    closed forms, so those can be validated under their own assumption.
    """
    radius = _resolve_window(net, batch)
    mu_args = (net.lambda_e, radius)
    if scheme in ("JT", "CM"):
        beta_e = policy.beta_e()
        if eve_model == "NCE":

            def kernel(rng, n):
                counts, owner, r, theta = _draw_field(rng, n, *mu_args)
                d = net.sbs_distances(r, theta)
                snr = _jt_eav_snr(net, d, _crandn(rng, (r.size, net.k)))
                bad = np.bincount(owner[snr > beta_e], minlength=n)
                return (int(np.count_nonzero(bad == 0)),)

        else:

            def kernel(rng, n):
                counts, owner, r, theta = _draw_field(rng, n, *mu_args)
                d = net.sbs_distances(r, theta)
                snr = _jt_eav_snr(net, d, _crandn(rng, (r.size, net.k)))
                agg = np.bincount(owner, weights=snr, minlength=n)
                return (int(np.count_nonzero(agg <= beta_e)),)

    elif scheme == "OT":
        beta_e_k = policy.beta_e_vector(net.k)
        if eve_model == "NCE":

            def kernel(rng, n):
                counts, owner, r, theta = _draw_field(rng, n, *mu_args)
                d = net.sbs_distances(r, theta)
                h2 = np.abs(_crandn(rng, (r.size, net.k))) ** 2
                snr = net.k * net.rho * h2 * d.T**-net.alpha
                full_intercept = np.all(snr > beta_e_k, axis=1)
                bad = np.bincount(owner[full_intercept], minlength=n)
                return (int(np.count_nonzero(bad == 0)),)

        elif independent_fields:

            def kernel(rng, n):
                secure = np.zeros(n, dtype=bool)
                all_streams = np.ones(n, dtype=bool)
                for k in range(net.k):
                    counts, owner, r, _ = _draw_field(rng, n, *mu_args)
                    h2 = rng.exponential(1.0, r.size)
                    agg = net.k * net.rho * np.bincount(
                        owner, weights=h2 * r**-net.alpha, minlength=n
                    )
                    all_streams &= agg > beta_e_k[k]
                secure = ~all_streams
                return (int(np.count_nonzero(secure)),)

        else:

            def kernel(rng, n):
                counts, owner, r, theta = _draw_field(rng, n, *mu_args)
                d = net.sbs_distances(r, theta)
                h2 = np.abs(_crandn(rng, (r.size, net.k))) ** 2
                all_streams = np.ones(n, dtype=bool)
                for k in range(net.k):
                    agg = net.k * net.rho * np.bincount(
                        owner, weights=h2[:, k] * d[k] ** -net.alpha, minlength=n
                    )
                    all_streams &= agg > beta_e_k[k]
                return (int(np.count_nonzero(~all_streams)),)

    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if eve_model not in ("NCE", "CE"):
        raise ValueError(f"unknown eavesdropper model {eve_model!r}")
    return _indicator_reduce(_run_chunks(batch, _PS, kernel), batch.n_trials)


def estimate_laplace_ie(net: NetworkConfig, s: float, batch: TrialBatch) -> tuple[float, float]:
    """Empirical mean of exp(-s * aggregate JT wiretap SNR)."""
    radius = _resolve_window(net, batch)

    def kernel(rng, n):
        counts, owner, r, theta = _draw_field(rng, n, net.lambda_e, radius)
        d = net.sbs_distances(r, theta)
        snr = _jt_eav_snr(net, d, _crandn(rng, (r.size, net.k)))
        vals = np.exp(-s * np.bincount(owner, weights=snr, minlength=n))
        return (float(vals.sum()), float(np.sum(vals**2)))

    return _mean_reduce(_run_chunks(batch, _LAPLACE_IE, kernel), batch.n_trials)


def estimate_laplace_ik(net: NetworkConfig, s: float, batch: TrialBatch) -> tuple[float, float]:
    """Empirical mean of exp(-s * single-stream aggregate power), sampled
    around one SBS with its own field (the independent-field premise)."""
    radius = _resolve_window(net, batch)

    def kernel(rng, n):
        counts, owner, r, _ = _draw_field(rng, n, net.lambda_e, radius)
        h2 = rng.exponential(1.0, r.size)
        agg = net.k * net.rho * np.bincount(owner, weights=h2 * r**-net.alpha, minlength=n)
        vals = np.exp(-s * agg)
        return (float(vals.sum()), float(np.sum(vals**2)))

    return _mean_reduce(_run_chunks(batch, _LAPLACE_IK, kernel), batch.n_trials)


# ---------------------------------------------------------------------------
# overall SCDP
# ---------------------------------------------------------------------------

def estimate_scdp_overall(
    net: NetworkConfig,
    content: ContentConfig,
    policies: dict[str, RatePolicy],
    eve_model: str,
    batch: TrialBatch,
) -> tuple[float, float]:
    """Empirical overall SCDP under the hybrid cache split.

    Each trial draws a requested file rank from the popularity law, maps
    it to the serving scheme through the cache-group boundaries, and
    checks that scheme's joint reliability-and-secrecy event.
    """
    if eve_model != "NCE":
        raise ValueError("overall SCDP simulation supports the NCE model")
    content.validate_capacity(net.k)
    radius = _resolve_window(net, batch)
    cum = np.cumsum(zipf_pmf_vector(content))
    m1 = content.mpf_count()
    m2 = content.dsf_boundary(net.k)
    jt, ot, cm = policies["JT"], policies["OT"], policies["CM"]
    jt_beta_e = jt.beta_e()
    cm_beta_e = cm.beta_e()
    jt_beta_t = jt.beta_t()
    bs_cm = cm_beta_s(cm.beta_s, content.delta)
    cm_beta_t = bs_cm + (1.0 + bs_cm) * cm_beta_e
    ot_beta_e = ot.beta_e_vector(net.k)
    ot_beta_t = ot.beta_t_vector(net.k)
    amp_gain = net.r_b ** (-net.alpha / 2.0)
    pow_gain = net.r_b**-net.alpha

    def kernel(rng, n):
        ranks = np.searchsorted(cum, rng.random(n), side="right") + 1
        scheme = np.where(ranks <= m1, 0, np.where(ranks <= m2, 1, 2))
        h_b = _crandn(rng, (n, net.k))
        snr_b = net.rho * np.abs(h_b @ amp_gain) ** 2
        snr_b_ot = net.k * net.rho * np.abs(h_b) ** 2 * pow_gain
        conn_joint = {0: snr_b >= jt_beta_t, 2: snr_b >= cm_beta_t}
        conn_ot = np.all(snr_b_ot >= ot_beta_t, axis=1)

        counts, owner, r, theta = _draw_field(rng, n, net.lambda_e, radius)
        d = net.sbs_distances(r, theta)
        h_e = _crandn(rng, (r.size, net.k))
        snr_e = _jt_eav_snr(net, d, h_e)
        sec_jt = np.bincount(owner[snr_e > jt_beta_e], minlength=n) == 0
        sec_cm = np.bincount(owner[snr_e > cm_beta_e], minlength=n) == 0
        snr_e_ot = net.k * net.rho * np.abs(h_e) ** 2 * d.T**-net.alpha
        full_intercept = np.all(snr_e_ot > ot_beta_e, axis=1)
        sec_ot = np.bincount(owner[full_intercept], minlength=n) == 0

        ok = np.where(
            scheme == 0,
            conn_joint[0] & sec_jt,
            np.where(scheme == 1, conn_ot & sec_ot, conn_joint[2] & sec_cm),
        )
        return (int(np.count_nonzero(ok)),)

    return _indicator_reduce(_run_chunks(batch, _OVERALL, kernel), batch.n_trials)
