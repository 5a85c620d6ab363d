"""Channel-capacity computations backing the privacy conversions.

Provides the closed-form binary-asymmetric-channel capacity, a generic
Blahut-Arimoto solver with certified upper/lower capacity bounds per
iteration, the mutual information of a scalar Gaussian channel under a
discrete prior, and the amplitude-constrained scalar AWGN capacity via
Blahut-Arimoto on refined input grids. For dimensions above one the
amplitude-constrained capacity is served by analytic bounds only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from .divergences import DiscreteDistribution, GaussianMixture, kl_gaussian_component_vs_mixture
from .numerics import (
    DEFAULT_TOL,
    LOG2_E,
    NonConvergenceError,
    ToleranceConfig,
    binary_entropy,
)

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class BacCrossovers:
    """Crossover probabilities of a binary asymmetric channel.

    eps0 is the probability that input 0 flips to output 1; eps1 the
    probability that input 1 flips to output 0.
    """

    eps0: float
    eps1: float

    def __post_init__(self) -> None:
        for name, v in (("eps0", self.eps0), ("eps1", self.eps1)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


class ChannelMatrix:
    """Row-stochastic transition matrix of a discrete memoryless channel."""

    def __init__(self, entries, input_locations=None):
        w = np.asarray(entries, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("channel matrix must be 2-D and non-empty")
        if np.any(w < 0.0):
            raise ValueError("channel matrix entries must be nonnegative")
        rowsums = w.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > _ROW_SUM_TOL):
            raise ValueError(
                f"rows must sum to 1 within {_ROW_SUM_TOL}; worst deviation "
                f"{np.abs(rowsums - 1.0).max():.3e}"
            )
        self._w = w
        self._w.flags.writeable = False
        if input_locations is None:
            locs = np.arange(w.shape[0], dtype=float)
        else:
            locs = np.asarray(input_locations, dtype=float)
            if locs.shape != (w.shape[0],):
                raise ValueError("input_locations must have one entry per row")
        self._locations = locs
        self._locations.flags.writeable = False

    @property
    def entries(self) -> np.ndarray:
        return self._w

    @property
    def rows(self) -> int:
        return self._w.shape[0]

    @property
    def cols(self) -> int:
        return self._w.shape[1]

    @property
    def input_locations(self) -> np.ndarray:
        return self._locations


def bac_capacity(c: BacCrossovers | tuple[float, float]) -> float:
    """Capacity in bits of the binary asymmetric channel with crossovers c.

    Normalizes the crossovers into the canonical region
    0 <= e0 <= min(e1, 1 - e1, 1/2) using the input/output relabeling
    symmetries C(e0, e1) = C(e1, e0) = C(1 - e0, 1 - e1), then evaluates the
    closed form. A channel with e0 + e1 = 1 is useless and has capacity 0.
    """
    if isinstance(c, BacCrossovers):
        e0, e1 = c.eps0, c.eps1
    else:
        e0, e1 = c
        BacCrossovers(e0, e1)  # reuse the range validation
    # canonical orbit member: the pair whose first coordinate is the minimum
    # of {e0, e1, 1-e0, 1-e1}; it automatically satisfies a <= min(b, 1-b)
    candidates = ((e0, e1), (e1, e0), (1.0 - e0, 1.0 - e1), (1.0 - e1, 1.0 - e0))
    a, b = min(candidates)
    den = 1.0 - a - b
    if abs(den) < 1e-12:
        return 0.0
    ha = binary_entropy(a)
    hb = binary_entropy(b)
    cap = (a / den) * hb - ((1.0 - b) / den) * ha + math.log2(1.0 + 2.0 ** ((ha - hb) / den))
    return max(cap, 0.0)


def blahut_arimoto(
    w: ChannelMatrix,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> tuple[float, DiscreteDistribution]:
    """Capacity (bits) and an achieving input law, by alternating maximization.

    Each iteration yields the classical certified bounds
    log sum_i r_i e^{D_i} <= C <= max_i D_i with D_i the KL divergence of row
    i from the current output law; iteration stops once the bound gap is
    below abs_tol (in bits) and the midpoint is returned. Raises
    NonConvergenceError at the iteration limit.
    """
    mat = w.entries
    m = mat.shape[0]
    logw = np.where(mat > 0.0, np.log(np.maximum(mat, 1e-300)), 0.0)
    row_wlogw = (mat * logw).sum(axis=1)
    r = np.full(m, 1.0 / m)
    gap_tol_nats = tol.abs_tol * math.log(2.0)
    for _ in range(tol.max_iter):
        q = r @ mat
        logq = np.where(q > 0.0, np.log(np.maximum(q, 1e-300)), 0.0)
        d = row_wlogw - mat @ logq
        upper = d.max()
        z = (r * np.exp(d - upper)).sum()
        lower = upper + math.log(z)
        if upper - lower < gap_tol_nats:
            capacity = 0.5 * (upper + lower) * LOG2_E
            r = r * np.exp(d - upper)
            r = r / r.sum()
            return max(capacity, 0.0), DiscreteDistribution(w.input_locations, r)
        r = r * np.exp(d - upper)
        r = r / r.sum()
    raise NonConvergenceError(
        f"Blahut-Arimoto bound gap still above {tol.abs_tol} bits after "
        f"{tol.max_iter} iterations"
    )


def mixture_mutual_information(
    prior: DiscreteDistribution,
    sigma2: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Exact mutual information in bits of x -> x + N(0, sigma2), x ~ prior.

    Computed as the prior-weighted sum of the KL divergences of each output
    component from the output mixture.
    """
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    mix = GaussianMixture.from_prior(prior, sigma2)
    inner = ToleranceConfig(
        abs_tol=min(tol.abs_tol, 1e-11), rel_tol=min(tol.rel_tol, 1e-9),
        max_iter=tol.max_iter,
    )
    total = 0.0
    for x, wx in zip(prior.locations, prior.masses):
        comp = GaussianMixture.single(x, sigma2)
        total += wx * kl_gaussian_component_vs_mixture(comp, mix, inner)
    return total


def _awgn_channel_matrix(xs: np.ndarray, delta: float, sigma: float) -> ChannelMatrix:
    """Bin the output of x -> x + N(0, sigma^2) at step sigma/50 over 12 sigma."""
    lo = -delta - 12.0 * sigma
    hi = delta + 12.0 * sigma
    nbins = int(math.ceil((hi - lo) / (sigma / 50.0)))
    edges = np.linspace(lo, hi, nbins + 1)
    cdf = norm.cdf((edges[None, :] - xs[:, None]) / sigma)
    w = np.diff(cdf, axis=1)
    w = np.maximum(w, 0.0)
    w = w / w.sum(axis=1, keepdims=True)  # mass beyond 12 sigma is ~1e-33
    return ChannelMatrix(w, input_locations=xs)


def peak_awgn_capacity(
    delta: float,
    sigma2: float,
    grid: int = 33,
    tol: ToleranceConfig = DEFAULT_TOL,
    refine_tol: float = 1e-5,
    max_refinements: int = 8,
) -> float:
    """Capacity in bits of y = x + N(0, sigma2) with amplitude |x| <= delta.

    Runs Blahut-Arimoto over `grid` evenly spaced inputs on [-delta, delta]
    with the output discretized as in _awgn_channel_matrix, then refines the
    input grid (count -> 2*count - 1, keeping previous points) until the
    capacity changes by less than refine_tol bits. Both discretizations only
    ever under-estimate the true capacity (data processing), so refinement
    convergence is the stopping certificate.
    """
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if grid < 2:
        raise ValueError(f"grid must be at least 2, got {grid}")
    sigma = math.sqrt(sigma2)
    ba_tol = ToleranceConfig(
        abs_tol=min(tol.abs_tol, refine_tol * 1e-3),
        rel_tol=tol.rel_tol,
        max_iter=max(tol.max_iter, 500_000),
    )
    n = grid
    prev = None
    for _ in range(max_refinements):
        xs = np.linspace(-delta, delta, n)
        cap, _ = blahut_arimoto(_awgn_channel_matrix(xs, delta, sigma), ba_tol)
        if prev is not None and abs(cap - prev) < refine_tol:
            return cap
        prev = cap
        n = 2 * n - 1
    raise NonConvergenceError(
        f"input-grid refinement did not converge below {refine_tol} bits "
        f"within {max_refinements} doublings"
    )


@dataclass(frozen=True)
class CapacityBounds:
    """Certified [lower, upper] interval for a capacity that is not computed exactly."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def peak_awgn_capacity_bounds(d: int, delta: float, sigma2: float) -> CapacityBounds:
    """Analytic bounds on the d-dimensional peak-power-constrained AWGN capacity.

    The input constraint is ||x|| <= sqrt(d)*delta with per-dimension noise
    variance sigma2. Upper bound: the average-power Gaussian capacity
    (d/2)*log2(1 + delta^2/sigma2). Lower bound: the entropy-power
    inequality applied to an isotropic Gaussian input truncated to the
    feasible ball, maximized over the Gaussian scale (whose wide-scale limit
    is the uniform distribution on the ball). The exact d > 1 value is out
    of scope; only this labeled interval is offered.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not (delta > 0.0 and sigma2 > 0.0):
        raise ValueError("delta and sigma2 must be positive")
    upper = 0.5 * d * math.log2(1.0 + delta**2 / sigma2)
    r2 = d * delta**2
    lower = 0.0
    for a2 in np.geomspace(delta**2 * 1e-2, delta**2 * 1e6, 241):
        z = chi2.cdf(r2 / a2, d)
        if z <= 0.0:
            continue
        mean_sq = a2 * d * chi2.cdf(r2 / a2, d + 2) / z
        h_bits = math.log2(z) + 0.5 * d * math.log2(2.0 * math.pi * a2) + (
            mean_sq / (2.0 * a2)
        ) * LOG2_E
        entropy_power = 2.0 ** (2.0 * h_bits / d) / (2.0 * math.pi * math.e)
        lower = max(lower, 0.5 * d * math.log2(1.0 + entropy_power / sigma2))
    return CapacityBounds(lower=min(lower, upper), upper=upper)
