"""Deterministic reference prices used by the test and acceptance suites.

Independent of the simulation engine: the vanilla and double-barrier values
are closed forms built from normal CDFs only; the grid quadrature evaluates
the nested price integral by backward induction on Gauss-Legendre nodes.

The double-barrier knock-out form integrates the lognormal transition
density against the method-of-images survival density of the log price in
(ln L, ln U); each image term has an analytic normal-CDF integral, and the
image sum is truncated adaptively.  Equivalent to the classical
constant-parameter double-barrier series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import SeriesNotConverged
from .model import MarketTermStructure, OptionSpec

__all__ = ["OraclePrice", "vanilla_bs", "double_barrier_closed_form", "quadrature_price"]


@dataclass(frozen=True)
class OraclePrice:
    """Reference value with its construction method and declared accuracy."""

    value: float
    method: str
    accuracy: float


def vanilla_bs(option: OptionSpec, *, rate: float, dividend: float, sigma: float,
               maturity: float) -> OraclePrice:
    """Black-Scholes call/put value under constant parameters."""
    if not (sigma > 0 and maturity > 0):
        raise ValueError("sigma and maturity must be positive")
    s0, k = option.spot, option.strike
    b = rate - dividend
    srt = sigma * np.sqrt(maturity)
    d1 = (np.log(s0 / k) + (b + 0.5 * sigma * sigma) * maturity) / srt
    d2 = d1 - srt
    df_r = np.exp(-rate * maturity)
    df_q = np.exp(-dividend * maturity)
    if option.payoff_kind == "call":
        value = s0 * df_q * ndtr(d1) - k * df_r * ndtr(d2)
    else:
        value = k * df_r * ndtr(-d2) - s0 * df_q * ndtr(-d1)
    return OraclePrice(value=float(value), method="black-scholes", accuracy=1e-10)


def double_barrier_closed_form(option: OptionSpec, *, rate: float, dividend: float,
                               sigma: float, maturity: float, lower: float,
                               upper: float, tol: float = 1e-10,
                               max_terms: int = 200) -> OraclePrice:
    """Continuously monitored double-barrier knock-out price, constant barriers.

    Image term k contributes I(2 k d) - I(2 u - 2 k d) with d = ln(U/L),
    u = ln(U/S0); I(z) is the analytic integral of the payoff against the
    reflected lognormal density, a combination of two normal CDF differences
    scaled by exp(nu z / sigma^2).  Truncation is adaptive: stop once the
    k-th image pair is below ``tol``.
    """
    if not (0 < lower < upper < np.inf):
        raise ValueError("need finite barriers with 0 < lower < upper")
    s0, k_strike = option.spot, option.strike
    if not lower < s0 < upper:
        # Spot on or beyond a barrier: knocked out, worth 0 by convention.
        return OraclePrice(value=0.0, method="double-barrier-images", accuracy=0.0)
    T = maturity
    b = rate - dividend
    nu = b - 0.5 * sigma * sigma
    s = sigma * np.sqrt(T)
    l = np.log(lower / s0)
    u = np.log(upper / s0)
    d = u - l
    if option.payoff_kind == "call":
        x_lo, x_hi = max(l, np.log(k_strike / s0)), u
    else:
        x_lo, x_hi = l, min(u, np.log(k_strike / s0))
    if x_lo >= x_hi:
        return OraclePrice(value=0.0, method="double-barrier-images", accuracy=0.0)

    sign = 1.0 if option.payoff_kind == "call" else -1.0

    def image_integral(z: float) -> float:
        # integral over (x_lo, x_hi) of sign*(S0 e^x - K) f_N(x; nu T, s^2) R(z, x)
        m = nu * T + z
        cdf_asset = ndtr((x_hi - m - s * s) / s) - ndtr((x_lo - m - s * s) / s)
        cdf_cash = ndtr((x_hi - m) / s) - ndtr((x_lo - m) / s)
        if cdf_asset == 0.0 and cdf_cash == 0.0:
            return 0.0
        return sign * np.exp(nu * z / (sigma * sigma)) * (
            s0 * np.exp(b * T + z) * cdf_asset - k_strike * cdf_cash)

    def pair(k: int) -> float:
        return image_integral(2.0 * k * d) - image_integral(2.0 * u - 2.0 * k * d)

    total = pair(0)
    converged = False
    for k in range(1, max_terms + 1):
        t_pos = pair(k)
        t_neg = pair(-k)
        total += t_pos + t_neg
        if abs(t_pos) + abs(t_neg) < tol:
            converged = True
            break
    if not converged:
        raise SeriesNotConverged(
            f"double-barrier image sum: {max_terms} pairs insufficient for tol={tol}")
    return OraclePrice(value=float(np.exp(-rate * T) * total),
                       method="double-barrier-images", accuracy=tol)


def _gauss_panels(a: float, bnd: float, kink: float | None, n: int):
    """Gauss-Legendre nodes/weights on (a, bnd), optionally split at a payoff kink."""
    x, w = np.polynomial.legendre.leggauss(max(n, 4))
    panels = [(a, bnd)]
    if kink is not None and a < kink < bnd:
        panels = [(a, kink), (kink, bnd)]
    nodes, weights = [], []
    for lo, hi in panels:
        half = 0.5 * (hi - lo)
        nodes.append(0.5 * (lo + hi) + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _transition_density(term: MarketTermStructure, i: int, s_from, s_to):
    """Lognormal one-step density f(s_to | s_from) for interval i, local to the oracle."""
    dt = float(term.dt[i])
    sig = float(term.sigma[i])
    a = (float(term.mu[i]) - 0.5 * sig * sig) * dt
    bb = sig * np.sqrt(dt)
    x = np.log(s_to / s_from)
    return np.exp(-0.5 * ((x - a) / bb) ** 2) / (bb * np.sqrt(2.0 * np.pi) * s_to)


def _node_interval(term: MarketTermStructure, i: int, spot: float) -> tuple[float, float]:
    """Support of the endpoint of interval i: its window, tails truncated if open."""
    lo, hi = term.window(i)
    a_cum = float(np.sum((term.mu[: i + 1] - 0.5 * term.sigma[: i + 1] ** 2) * term.dt[: i + 1]))
    spread = 10.0 * float(np.sqrt(np.sum(term.sigma[: i + 1] ** 2 * term.dt[: i + 1])))
    if lo <= 0.0:
        lo = spot * np.exp(a_cum - spread)
    if not np.isfinite(hi):
        hi = spot * np.exp(a_cum + spread)
    return lo, hi


def quadrature_price(option: OptionSpec, term: MarketTermStructure,
                     monitoring: str | None = None, nodes: int = 400) -> OraclePrice:
    """Nested price integral by backward induction on Gauss-Legendre grids.

    ``monitoring`` defaults to the option's; "discrete" drops the bridge
    factor.  Each endpoint integrates over its own barrier window, so there
    is no tail-truncation error for barrier windows.  The declared accuracy
    is a refinement estimate: |value(nodes) - value(nodes // 2)|.
    """
    mon = monitoring or option.monitoring
    if mon not in ("continuous", "discrete"):
        raise ValueError("monitoring must be 'continuous' or 'discrete'")

    def evaluate(n_nodes: int) -> float:
        n = term.n_steps
        grids = []
        for i in range(n):
            lo, hi = _node_interval(term, i, option.spot)
            kink = option.strike if i == n - 1 else None
            grids.append(_gauss_panels(lo, hi, kink, n_nodes))
        value = option.payoff(grids[-1][0])
        for i in range(n - 1, 0, -1):
            y = grids[i - 1][0]
            x, w = grids[i]
            kernel = _transition_density(term, i, y[:, None], x[None, :])
            if mon == "continuous":
                kernel = kernel * _bridge_matrix(term, i, y, x)
            value = kernel @ (w * value)
        x, w = grids[0]
        f0 = _transition_density(term, 0, option.spot, x)
        if mon == "continuous":
            f0 = f0 * _bridge_matrix(term, 0, np.asarray([option.spot]), x)[0]
        return float(term.discount_factor * np.sum(w * f0 * value))

    coarse = evaluate(nodes // 2)
    fine = evaluate(nodes)
    return OraclePrice(value=fine, method=f"quadrature-{mon}",
                       accuracy=max(abs(fine - coarse), 1e-15))


def _bridge_matrix(term: MarketTermStructure, i: int, y: np.ndarray, x: np.ndarray):
    # Continuous monitoring reuses the bridge no-hit factor; see module doc of
    # smcbarrier.bridge for the formula.  Imported lazily to keep the closed
    # forms above free of any shared numerical machinery.
    from .bridge import BridgeQuery, no_hit_prob

    lo, hi = term.window(i)
    q = BridgeQuery(s_prev=np.broadcast_to(y[:, None], (y.size, x.size)),
                    s_next=np.broadcast_to(x[None, :], (y.size, x.size)),
                    sigma=float(term.sigma[i]), dt=float(term.dt[i]),
                    lower=lo, upper=hi)
    return no_hit_prob(q)
