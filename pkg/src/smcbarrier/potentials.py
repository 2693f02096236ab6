"""Per-step weight families for the Feynman-Kac product form of the price.

A transition particle is the pair (S_i, S_{i+1}); each kind below maps
transitions on interval i to nonnegative weights:

* ``Continuous``      -- window indicator times bridge no-hit probability; [0,1].
* ``Discrete``        -- window indicator alone; {0,1}.
* ``TruncatedChain``  -- proposals come from the chain conditioned to stay in
  the window; the weight is the one-step window survival probability of the
  start point, times the bridge no-hit factor under continuous monitoring.
* ``ImportanceDensity`` -- proposals from a caller-supplied transition density;
  the base weight is multiplied by the density ratio f/f_proposal (unbounded).
* ``PayoffTwist``     -- base weight times h_{i+1}(S_{i+1}) / h_i(S_i) for a
  positive family of intermediate functions with the terminal one pinned to
  the payoff; the price estimator multiplies by h_0(spot) and must not apply
  the terminal payoff again (unbounded).

Bounded kinds support accept/reject selection; unbounded kinds are flagged
via ``bounded`` so the estimator can switch to weight-proportional
reselection of every particle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import model
from .bridge import BridgeQuery, no_hit_prob
from .errors import InvalidRatio, InvalidTwist
from .model import MarketTermStructure, OptionSpec

__all__ = [
    "TransitionParticle",
    "Continuous",
    "Discrete",
    "TruncatedChain",
    "ImportanceDensity",
    "PayoffTwist",
    "drift_shift_proposal",
    "terminal_payoff",
    "inside_window",
]


@dataclass(frozen=True)
class TransitionParticle:
    """One transition (S_i, S_{i+1}) at step index i; values positive."""

    step: int
    s_prev: float
    s_next: float

    def __post_init__(self):
        if not (self.s_prev > 0 and self.s_next > 0):
            raise ValueError("particle asset values must be positive")


def inside_window(term: MarketTermStructure, i: int, s):
    """Open-interval indicator of interval i's window, as floats."""
    lo, hi = term.window(i)
    s = np.asarray(s, dtype=float)
    return ((s > lo) & (s < hi)).astype(float)


def terminal_payoff(option: OptionSpec, s_terminal):
    """Payoff applied to the terminal asset coordinate of the last transition."""
    return option.payoff(s_terminal)


def _bridge_factor(term: MarketTermStructure, i: int, s_prev, s_next):
    lo, hi = term.window(i)
    q = BridgeQuery(s_prev=s_prev, s_next=s_next, sigma=float(term.sigma[i]),
                    dt=float(term.dt[i]), lower=lo, upper=hi)
    return no_hit_prob(q)


class _KindBase:
    bounded: bool = True          # weights guaranteed in [0, 1]
    includes_payoff: bool = False  # product already contains the payoff factor

    def propose(self, term, i, s_prev, rng):
        """Propose next endpoints from current ones; consumes M draws from rng."""
        return model.step_gbm(term, i, s_prev, rng.standard_normal(np.shape(s_prev)))

    def prefactor(self, option: OptionSpec) -> float:
        return 1.0

    def weights(self, term, option, i, s_prev, s_next):
        raise NotImplementedError


@dataclass(frozen=True)
class Continuous(_KindBase):
    """Indicator of landing inside the window times bridge no-hit probability."""

    def weights(self, term, option, i, s_prev, s_next):
        return inside_window(term, i, s_next) * _bridge_factor(term, i, s_prev, s_next)


@dataclass(frozen=True)
class Discrete(_KindBase):
    """Window indicator on the landing point only."""

    def weights(self, term, option, i, s_prev, s_next):
        return inside_window(term, i, s_next)


@dataclass(frozen=True)
class TruncatedChain(_KindBase):
    """Weights for proposals conditioned to land inside the window.

    The landing indicator is certain by construction; what remains is the
    one-step window survival probability of the start point and, under
    continuous monitoring, the bridge no-hit factor.  Values lie in [0, 1].
    """

    def propose(self, term, i, s_prev, rng):
        return model.step_truncated_chain(term, i, s_prev, rng.random(np.shape(s_prev)))

    def weights(self, term, option, i, s_prev, s_next):
        w = np.asarray(model.survival_prob_phi(term, i, s_prev))
        if option.monitoring == "continuous":
            w = w * _bridge_factor(term, i, s_prev, s_next)
        return w


@dataclass(frozen=True)
class ImportanceDensity(_KindBase):
    """Proposals from a caller-supplied transition law, density-ratio weighted.

    ``sample(term, i, s_prev, z)`` maps the engine's standard normal draws to
    proposed endpoints; ``log_density(term, i, s_prev, s_next)`` is the log of
    the proposal transition density with respect to ds_next (same reference
    measure as the model density).  Weights are not bounded by 1.
    """

    sample: Callable
    log_density: Callable

    bounded = False

    def propose(self, term, i, s_prev, rng):
        return self.sample(term, i, s_prev, rng.standard_normal(np.shape(s_prev)))

    def weights(self, term, option, i, s_prev, s_next):
        if option.monitoring == "continuous":
            base = inside_window(term, i, s_next) * _bridge_factor(term, i, s_prev, s_next)
        else:
            base = inside_window(term, i, s_next)
        log_ratio = (model.log_transition_density(term, i, s_prev, s_next)
                     - self.log_density(term, i, s_prev, s_next))
        ratio = np.exp(log_ratio)
        if not np.all(np.isfinite(ratio)):
            raise InvalidRatio("density ratio evaluated to a non-finite value")
        return base * ratio


def drift_shift_proposal(theta: float) -> ImportanceDensity:
    """Built-in importance density: GBM with drift shifted by theta."""

    def _shifted_coeffs(term, i):
        dt = float(term.dt[i])
        sig = float(term.sigma[i])
        a = (float(term.mu[i]) + theta - 0.5 * sig * sig) * dt
        return a, sig * np.sqrt(dt)

    def sample(term, i, s_prev, z):
        a, b = _shifted_coeffs(term, i)
        return np.asarray(s_prev, dtype=float) * np.exp(a + b * np.asarray(z, dtype=float))

    def log_density(term, i, s_prev, s_next):
        a, b = _shifted_coeffs(term, i)
        s_next = np.asarray(s_next, dtype=float)
        x = np.log(s_next / np.asarray(s_prev, dtype=float))
        return -0.5 * ((x - a) / b) ** 2 - np.log(b * np.sqrt(2.0 * np.pi) * s_next)

    return ImportanceDensity(sample=sample, log_density=log_density)


@dataclass(frozen=True)
class PayoffTwist(_KindBase):
    """Payoff-ratio twisted weights; steers selection toward profitable regions.

    ``intermediate(n, s)`` gives the twist function h_n for 0 <= n < N and must
    be strictly positive there; the terminal function is always the payoff
    itself, so the weight product already contains the payoff and the price
    carries the prefactor h_0(spot) instead of a terminal payoff average.
    Default intermediate: payoff + 1.

    ``density`` optionally combines this twist with an importance transition
    law (proposals and density-ratio factor from it).  Experimental: its only
    contract is mean preservation.
    """

    intermediate: Optional[Callable] = None
    density: Optional[ImportanceDensity] = None

    bounded = False
    includes_payoff = True

    def _h(self, option, n: int, s, terminal: bool):
        if terminal:
            return option.payoff(s)
        h = self.intermediate(n, np.asarray(s, dtype=float)) if self.intermediate is not None \
            else option.payoff(s) + 1.0
        h = np.asarray(h, dtype=float)
        if not np.all(h > 0):
            raise InvalidTwist(f"intermediate twist function h_{n} must be strictly positive")
        return h

    def propose(self, term, i, s_prev, rng):
        if self.density is not None:
            return self.density.propose(term, i, s_prev, rng)
        return super().propose(term, i, s_prev, rng)

    def prefactor(self, option: OptionSpec) -> float:
        return float(self._h(option, 0, option.spot, terminal=False))

    def weights(self, term, option, i, s_prev, s_next):
        if self.density is not None:
            base = self.density.weights(term, option, i, s_prev, s_next)
        elif option.monitoring == "continuous":
            base = inside_window(term, i, s_next) * _bridge_factor(term, i, s_prev, s_next)
        else:
            base = inside_window(term, i, s_next)
        num = self._h(option, i + 1, s_next, terminal=(i + 1 == term.n_steps))
        den = self._h(option, i, s_prev, terminal=False)
        return base * num / den
