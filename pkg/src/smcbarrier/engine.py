"""Monte Carlo and sequential (particle) Monte Carlo price estimators.

Both estimators share the product form of the knock-out price

    price = B_{0,T} * E[ payoff(S_N) * prod_n G_n(S_n, S_{n+1}) ],

where G_n is one of the weight families in :mod:`smcbarrier.potentials`.
The plain MC estimator averages the full-path products.  The particle
estimator replaces each expectation by an ensemble mean: per step it proposes
M transitions, evaluates weights, accepts particle m iff U_m <= G_m (fresh
uniforms; particles with zero weight are always rejected), recycles rejected
endpoints from the weight-proportional empirical distribution of the whole
ensemble, and accumulates mean weights; the price is the discounted product
of step means times the mean payoff over post-recycle terminal particles.
Unbounded weight families skip the accept/reject thinning and reselect all M
slots weight-proportionally each step.

Draw order per run is fixed for reproducibility: per step, proposal draws
for m = 1..M (standard normals, or uniforms for the truncated chain), then
acceptance uniforms m = 1..M (bounded kinds only), then the resampler's
exponential stream.  Identical (seed, configuration) gives bit-identical
prices.

If every particle carries zero weight after some proposal, the estimate is
null by convention: price exactly 0, flagged degenerate, never NaN.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import model, potentials
from .model import MarketTermStructure, OptionSpec
from .resampler import WeightedSupport, resample_rejected

__all__ = ["PriceEstimate", "price_mc", "price_smc", "price_knock_in", "estimate_psi"]

_BOUNDED_KINDS = (potentials.Continuous, potentials.Discrete, potentials.TruncatedChain)


@dataclass
class PriceEstimate:
    """One run's price and diagnostics.

    ``stderr`` is the absolute standard error when the run itself provides
    one (plain MC); particle runs carry None and standard errors come from
    independent repetitions.  ``psi`` is the run's survival diagnostic: the
    fraction of surviving paths for MC, the normalizing-constant estimate
    (product of mean weights) for particle runs.
    """

    price: float
    stderr: Optional[float]
    method: str
    size: int
    n_steps: int
    psi: float
    degenerate: bool
    seconds: float
    rejections: int = 0


def _spot_outside_first_window(option: OptionSpec, term: MarketTermStructure) -> bool:
    lo, hi = term.window(0)
    return not (lo < option.spot < hi)


def _knocked_out_estimate(method: str, size: int, term: MarketTermStructure,
                          seconds: float = 0.0) -> PriceEstimate:
    # Spot on or beyond a barrier: knock-out price is 0 by convention.
    return PriceEstimate(price=0.0, stderr=0.0 if method == "mc" else None,
                         method=method, size=size, n_steps=term.n_steps,
                         psi=0.0, degenerate=True, seconds=seconds)


def _require_knock_out(option: OptionSpec):
    if option.direction != "knock_out":
        raise ValueError("this estimator prices knock-out options; use price_knock_in")


def price_mc(option: OptionSpec, term: MarketTermStructure, paths: int,
             kind, rng: np.random.Generator) -> PriceEstimate:
    """Standard Monte Carlo over independent full paths.

    ``kind`` must be Continuous or Discrete.  Bridge factors are evaluated
    only for paths still inside every window so far; dead paths carry zero
    weight for good.
    """
    _require_knock_out(option)
    if not isinstance(kind, (potentials.Continuous, potentials.Discrete)):
        raise ValueError("price_mc supports the Continuous and Discrete kinds only")
    if paths < 2:
        raise ValueError("need at least 2 paths for a standard error")
    if _spot_outside_first_window(option, term):
        return _knocked_out_estimate("mc", paths, term)

    t0 = time.perf_counter()
    continuous = isinstance(kind, potentials.Continuous)
    n = term.n_steps
    s = np.full(paths, option.spot)
    weight = np.ones(paths)
    alive = np.ones(paths, dtype=bool)
    for i in range(n):
        z = rng.standard_normal(paths)
        s_next = model.step_gbm(term, i, s, z)
        lo, hi = term.window(i)
        inside = (s_next > lo) & (s_next < hi)
        alive &= inside
        if continuous and alive.any():
            g = potentials.Continuous().weights(term, option, i, s[alive], s_next[alive])
            weight[alive] *= g
        weight[~alive] = 0.0
        s = s_next
    discounted = term.discount_factor * weight * option.payoff(s)
    price = float(discounted.mean())
    stderr = float(discounted.std(ddof=1) / np.sqrt(paths))
    return PriceEstimate(price=price, stderr=stderr, method="mc", size=paths,
                         n_steps=n, psi=float(alive.mean()), degenerate=False,
                         seconds=time.perf_counter() - t0)


def price_smc(option: OptionSpec, term: MarketTermStructure, particles: int,
              kind, rng: np.random.Generator) -> PriceEstimate:
    """Particle estimator: propose, accept/reject, recycle, product of means."""
    _require_knock_out(option)
    if particles < 2:
        raise ValueError("need at least 2 particles")
    if _spot_outside_first_window(option, term):
        return _knocked_out_estimate("smc", particles, term)

    t0 = time.perf_counter()
    n = term.n_steps
    bounded = kind.bounded
    s = np.full(particles, option.spot)
    step_means = np.empty(n)
    rejections = 0
    for i in range(n):
        proposed = kind.propose(term, i, s, rng)
        g = np.asarray(kind.weights(term, option, i, s, proposed), dtype=float)
        if bounded:
            assert g.max(initial=0.0) <= 1.0 + 1e-12
        step_means[i] = g.mean()
        total = g.sum()
        if not total > 0.0:
            return PriceEstimate(price=0.0, stderr=None, method="smc",
                                 size=particles, n_steps=n, psi=0.0,
                                 degenerate=True, seconds=time.perf_counter() - t0,
                                 rejections=rejections)
        support = WeightedSupport(values=proposed, weights=g / total)
        if bounded:
            u = rng.random(particles)
            accepted = (u <= g) & (g > 0.0)
            n_rejected = particles - int(accepted.sum())
            rejections += n_rejected
            if n_rejected:
                s = proposed.copy()
                s[~accepted] = resample_rejected(support, n_rejected, rng)
            else:
                s = proposed
        else:
            rejections += particles
            s = resample_rejected(support, particles, rng)
        assert s.shape == (particles,)

    norm_const = float(np.prod(step_means))
    if kind.includes_payoff:
        price = term.discount_factor * kind.prefactor(option) * norm_const
    else:
        price = term.discount_factor * norm_const * float(potentials.terminal_payoff(option, s).mean())
    return PriceEstimate(price=price, stderr=None, method="smc", size=particles,
                         n_steps=n, psi=norm_const, degenerate=False,
                         seconds=time.perf_counter() - t0, rejections=rejections)


def price_knock_in(option: OptionSpec, term: MarketTermStructure, method: str,
                   size: int, rng: np.random.Generator, kind=None) -> PriceEstimate:
    """Knock-in price as vanilla minus knock-out.

    MC runs one common-random pass (per-path pairing gives the standard
    error); particle methods difference a vanilla run and a knock-out run on
    independently spawned streams, with the standard error left to
    repetitions as for any single particle run.
    """
    if option.direction != "knock_in":
        raise ValueError("price_knock_in expects a knock_in option")
    ko_option = OptionSpec(option.payoff_kind, option.strike, option.spot,
                           option.monitoring, "knock_out")
    if kind is None:
        kind = potentials.Continuous() if option.monitoring == "continuous" else potentials.Discrete()

    t0 = time.perf_counter()
    if method == "mc":
        if _spot_outside_first_window(option, term):
            # Knocked in immediately: worth the vanilla option.
            vanilla = price_mc(ko_option, term.without_barriers(), size, kind, rng)
            vanilla.method = "mc"
            return vanilla
        continuous = isinstance(kind, potentials.Continuous)
        n = term.n_steps
        s = np.full(size, option.spot)
        weight = np.ones(size)
        alive = np.ones(size, dtype=bool)
        for i in range(n):
            z = rng.standard_normal(size)
            s_next = model.step_gbm(term, i, s, z)
            lo, hi = term.window(i)
            inside = (s_next > lo) & (s_next < hi)
            alive &= inside
            if continuous and alive.any():
                weight[alive] *= potentials.Continuous().weights(term, option, i, s[alive], s_next[alive])
            weight[~alive] = 0.0
            s = s_next
        discounted = term.discount_factor * option.payoff(s) * (1.0 - weight)
        price = float(discounted.mean())
        stderr = float(discounted.std(ddof=1) / np.sqrt(size))
        return PriceEstimate(price=price, stderr=stderr, method="mc", size=size,
                             n_steps=n, psi=float(alive.mean()), degenerate=False,
                             seconds=time.perf_counter() - t0)

    rng_vanilla, rng_ko = rng.spawn(2)
    vanilla = price_smc(ko_option, term.without_barriers(), size, kind, rng_vanilla)
    if _spot_outside_first_window(option, term):
        vanilla.seconds = time.perf_counter() - t0
        return vanilla
    ko = price_smc(ko_option, term, size, kind, rng_ko)
    return PriceEstimate(price=vanilla.price - ko.price, stderr=None, method=method,
                         size=size, n_steps=term.n_steps, psi=ko.psi,
                         degenerate=ko.degenerate, seconds=time.perf_counter() - t0,
                         rejections=ko.rejections)


def estimate_psi(option: OptionSpec, term: MarketTermStructure, paths: int,
                 rng: np.random.Generator) -> float:
    """Probability of surviving the barrier condition to maturity.

    Discrete monitoring: fraction of paths with every grid endpoint inside
    its window.  Continuous monitoring: mean over paths of the product of
    indicator times bridge no-hit factors.
    """
    if paths < 1:
        raise ValueError("need at least one path")
    if _spot_outside_first_window(option, term):
        return 0.0
    continuous = option.monitoring == "continuous"
    s = np.full(paths, option.spot)
    weight = np.ones(paths)
    alive = np.ones(paths, dtype=bool)
    for i in range(term.n_steps):
        z = rng.standard_normal(paths)
        s_next = model.step_gbm(term, i, s, z)
        lo, hi = term.window(i)
        alive &= (s_next > lo) & (s_next < hi)
        if continuous and alive.any():
            weight[alive] *= potentials.Continuous().weights(term, option, i, s[alive], s_next[alive])
        weight[~alive] = 0.0
        s = s_next
    return float(weight.mean()) if continuous else float(alive.mean())
