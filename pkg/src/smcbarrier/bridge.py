"""No-barrier-hit probabilities between two monitoring dates.

Conditional on both endpoints of a GBM step, the log-price path on the
interval is a Brownian bridge; the probability that it never touches a
barrier has a closed form.  One finite barrier: reflection principle.
Two finite barriers: method-of-images series over repeated reflections,

    g = 1 - sum_{m>=1} [R(alpha m - gamma, x) + R(-alpha m + beta, x)]
          + sum_{m>=1} [R(alpha m, x) + R(-alpha m, x)],

    x = ln(s_next/s_prev), alpha = 2 ln(U/L), beta = 2 ln(U/s_prev),
    gamma = 2 ln(s_prev/L), R(z, x) = exp(-z (z - 2x) / (2 sigma^2 dt)),

truncated adaptively: stop after the group of four m-terms whose magnitudes
all fall below ``tol``.  Smaller dt needs fewer terms.  Values are always
clamped to [0, 1]; endpoints on or beyond a barrier give exactly 0 (a crossed
step is certain knock-out, not an error).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SeriesNotConverged

__all__ = ["BridgeQuery", "no_hit_prob", "no_hit_prob_single", "no_hit_prob_double"]


@dataclass(frozen=True)
class BridgeQuery:
    """One bridge question: endpoints, interval parameters, barrier window.

    ``s_prev``/``s_next`` may be scalars or equally shaped arrays.
    """

    s_prev: np.ndarray
    s_next: np.ndarray
    sigma: float
    dt: float
    lower: float = 0.0
    upper: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "s_prev", np.asarray(self.s_prev, dtype=float))
        object.__setattr__(self, "s_next", np.asarray(self.s_next, dtype=float))
        if not (self.sigma > 0 and self.dt > 0):
            raise ValueError("sigma and dt must be positive")
        if self.lower < 0 or not self.lower < self.upper:
            raise ValueError("need 0 <= lower < upper")


def no_hit_prob_single(q: BridgeQuery, barrier: float, side: str):
    """No-hit probability for a single barrier; ``side`` is 'lower' or 'upper'.

    Both endpoints strictly on the allowed side:
    ``1 - exp(-2 ln(s_next/B) ln(s_prev/B) / (sigma^2 dt))``; otherwise 0.
    """
    if side not in ("lower", "upper"):
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    sp, sn = np.broadcast_arrays(q.s_prev, q.s_next)
    if side == "lower":
        alive = (sp > barrier) & (sn > barrier)
    else:
        alive = (sp < barrier) & (sn < barrier)
    g = np.zeros(sp.shape)
    if np.any(alive):
        v = q.sigma * q.sigma * q.dt
        expo = -2.0 * np.log(sn[alive] / barrier) * np.log(sp[alive] / barrier) / v
        g[alive] = -np.expm1(expo)
    return np.clip(g, 0.0, 1.0)


def no_hit_prob_double(q: BridgeQuery, tol: float = 1e-12, m_max: int = 64,
                       return_terms: bool = False):
    """No-hit probability with both barriers finite (image series, see module doc).

    Raises SeriesNotConverged if ``m_max`` groups do not reach ``tol``
    (pathologically large sigma^2 dt relative to the window width).
    """
    if not (q.lower > 0 and np.isfinite(q.upper)):
        raise ValueError("double-barrier form needs 0 < lower and finite upper")
    sp, sn = np.broadcast_arrays(q.s_prev, q.s_next)
    inside = (sp > q.lower) & (sp < q.upper) & (sn > q.lower) & (sn < q.upper)
    g = np.zeros(sp.shape)
    terms_used = 0
    if np.any(inside):
        spi = sp[inside]
        sni = sn[inside]
        x = np.log(sni / spi)
        v = 2.0 * q.sigma * q.sigma * q.dt
        alpha = 2.0 * np.log(q.upper / q.lower)
        beta = 2.0 * np.log(q.upper / spi)
        gamma = 2.0 * np.log(spi / q.lower)

        def r_term(z):
            return np.exp(-z * (z - 2.0 * x) / v)

        acc = np.ones(spi.shape)
        converged = False
        for m in range(1, m_max + 1):
            t1 = r_term(alpha * m - gamma)
            t2 = r_term(-alpha * m + beta)
            t3 = r_term(alpha * m)
            t4 = r_term(-alpha * m)
            acc += t3 + t4 - t1 - t2
            terms_used = m
            group = max(t1.max(), t2.max(), t3.max(), t4.max())
            if group < tol:
                converged = True
                break
        if not converged:
            raise SeriesNotConverged(
                f"double-barrier series: {m_max} groups insufficient for tol={tol}")
        g[inside] = acc
    g = np.clip(g, 0.0, 1.0)
    if return_terms:
        return g, terms_used
    return g


def no_hit_prob(q: BridgeQuery):
    """No-hit probability dispatched on the window shape.

    No barriers -> 1 everywhere; one finite barrier -> reflection formula;
    both finite -> image series.
    """
    has_lower = q.lower > 0
    has_upper = np.isfinite(q.upper)
    if not has_lower and not has_upper:
        return np.ones(np.broadcast(q.s_prev, q.s_next).shape)
    if has_lower and not has_upper:
        return no_hit_prob_single(q, q.lower, "lower")
    if has_upper and not has_lower:
        return no_hit_prob_single(q, q.upper, "upper")
    return no_hit_prob_double(q)
