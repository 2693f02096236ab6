"""Weighted discrete resampling driven by an ordered uniform stream.

Sampling R values from a weighted point mass sum p_m * delta(x - x_m) by the
inverse-distribution method needs sorted uniforms; these come in O(R) from
normalized partial sums of unit exponentials (order-statistics property of
the Poisson process).  The ordered stream is then pushed through the
cumulative weights with a single merge pass:

    k = 1, r = 1
    while r <= R:
        while V_r < p_1 + ... + p_k:  Y_r = x_k;  r += 1
        k += 1

Strict ``<`` lets ties fall to the next atom; zero-weight atoms are never
selected.  Total cost is O(R + M).  ``resample_rejected`` computes the same
merge via a vectorized searchsorted (identical output for the identical
stream, asserted in tests); the literal walk above is ``inverse_cdf_walk``,
instrumented with an operation counter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSupport

__all__ = ["WeightedSupport", "ordered_uniforms", "resample_rejected", "inverse_cdf_walk"]


@dataclass(frozen=True)
class WeightedSupport:
    """Discrete distribution: values x_1..x_M with probabilities p_1..p_M."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.values.shape != self.weights.shape or self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values and weights must be equal-length 1-d arrays")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        total = float(self.weights.sum())
        if total <= 0:
            raise DegenerateSupport("all weights are zero")
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")

    def cumulative(self) -> np.ndarray:
        """Prefix sums with the last entry forced to exactly 1.0."""
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c


def ordered_uniforms(count: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted uniforms on (0,1): V_r = T_r / T_{count+1}, T_r partial sums of Exp(1).

    Jointly distributed as the order statistics of ``count`` iid uniforms;
    O(count) time, already sorted.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    t = np.cumsum(rng.standard_exponential(count + 1))
    v = t[:-1] / t[-1]
    return np.clip(v, np.finfo(float).tiny, np.nextafter(1.0, 0.0))


def resample_rejected(support: WeightedSupport, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` values from ``support`` using one ordered uniform stream.

    Equivalent in distribution to multinomial sampling; outputs are produced
    in the (irrelevant for recycling) sorted-stream order and assigned to
    rejected slots in slot order.
    """
    if count == 0:
        return np.empty(0)
    cum = support.cumulative()
    stream = ordered_uniforms(count, rng)
    idx = np.searchsorted(cum, stream, side="right")
    return support.values[idx]


def inverse_cdf_walk(cum_weights: np.ndarray, stream: np.ndarray) -> tuple[np.ndarray, int]:
    """Reference merge walk over a sorted stream; returns (indices, op count).

    The operation count covers every inner-loop assignment and every atom
    advance, so it is bounded by len(stream) + len(cum_weights) + 1.
    """
    n_atoms = len(cum_weights)
    total = len(stream)
    idx = np.empty(total, dtype=np.intp)
    ops = 0
    k = 0
    r = 0
    while r < total:
        while r < total and stream[r] < cum_weights[k]:
            idx[r] = k
            r += 1
            ops += 1
        k += 1
        ops += 1
        if k >= n_atoms and r < total:
            raise AssertionError("stream value beyond final cumulative weight")
    return idx, ops
