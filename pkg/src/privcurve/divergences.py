"""Hockey-stick and KL divergences for discrete and 1-D Gaussian families.

The hockey-stick divergence with parameter alpha >= 0 is

    H_alpha(P || Q) = sup_E (P(E) - alpha * Q(E)),

attained by the event {y : p(y) > alpha * q(y)}. For discrete pairs this is
an exact sum; for Gaussian-mixture pairs it is computed by quadrature of
max(0, p - alpha*q) with panels split at the sign changes of p - alpha*q.
KL divergences are reported in bits. The KL/hockey-stick integral identity

    KL(P || Q) = log2(e) * int_0^inf (H_{e^t}(P||Q) + e^{-t} H_{e^t}(Q||P)) dt

is exposed as a checkable operation.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    LOG2_E,
    ToleranceConfig,
    integrate_batched,
    integrate_semi_infinite,
)

_MASS_TOL = 1e-12
_ENVELOPE_SIGMAS = 12.0


class SupportError(ValueError):
    """Absolute continuity fails: P puts mass where Q has none."""


class DiscreteDistribution:
    """Finitely supported probability distribution over labeled real atoms.

    Canonical form: locations strictly increasing (duplicates merged on
    construction), zero-mass atoms dropped, masses summing to 1 within
    1e-12. Instances are immutable after construction.
    """

    def __init__(self, locations: Sequence[float], masses: Sequence[float]):
        loc = np.asarray(locations, dtype=float).ravel()
        mass = np.asarray(masses, dtype=float).ravel()
        if loc.size == 0 or loc.size != mass.size:
            raise ValueError("locations and masses must be non-empty and equal-length")
        if not (np.all(np.isfinite(loc)) and np.all(np.isfinite(mass))):
            raise ValueError("locations and masses must be finite")
        if np.any(mass < -_MASS_TOL):
            raise ValueError("masses must be nonnegative")
        total = mass.sum()
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"masses must sum to 1 within {_MASS_TOL}, got {total}")
        order = np.argsort(loc, kind="stable")
        loc, mass = loc[order], mass[order]
        # merge exactly-equal locations
        uniq, inverse = np.unique(loc, return_inverse=True)
        merged = np.zeros_like(uniq)
        np.add.at(merged, inverse, mass)
        keep = merged > 0.0
        if not np.any(keep):
            raise ValueError("distribution has no positive-mass atom")
        self._locations = uniq[keep]
        self._masses = merged[keep] / merged[keep].sum()
        self._locations.flags.writeable = False
        self._masses.flags.writeable = False

    @classmethod
    def bernoulli(cls, p: float) -> "DiscreteDistribution":
        """Ber(p) on locations {0, 1}."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Bernoulli parameter must be in [0, 1], got {p}")
        return cls([0.0, 1.0], [1.0 - p, p])

    @property
    def locations(self) -> np.ndarray:
        return self._locations

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    @property
    def size(self) -> int:
        return self._locations.size

    def entropy(self) -> float:
        """Shannon entropy in bits."""
        m = self._masses
        return float(-(m * np.log2(m)).sum())

    def __repr__(self) -> str:
        pairs = ", ".join(
            f"({x:g}: {w:.6g})" for x, w in zip(self._locations, self._masses)
        )
        return f"DiscreteDistribution([{pairs}])"


class GaussianMixture:
    """Equal-variance 1-D Gaussian mixture with strictly positive weights.

    A single-component instance is a plain Gaussian. Component means need
    not be distinct across different mixtures; weights of exactly zero are
    dropped. Immutable after construction.
    """

    def __init__(self, means: Sequence[float], weights: Sequence[float], variance: float):
        mu = np.asarray(means, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if mu.size == 0 or mu.size != w.size:
            raise ValueError("means and weights must be non-empty and equal-length")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(w))):
            raise ValueError("means and weights must be finite")
        if np.any(w < -_MASS_TOL):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"weights must sum to 1 within {_MASS_TOL}, got {w.sum()}")
        if not variance > 0.0:
            raise ValueError(f"variance must be positive, got {variance}")
        keep = w > 0.0
        self._means = mu[keep]
        self._weights = w[keep] / w[keep].sum()
        self._variance = float(variance)
        self._means.flags.writeable = False
        self._weights.flags.writeable = False

    @classmethod
    def single(cls, mean: float, variance: float) -> "GaussianMixture":
        return cls([mean], [1.0], variance)

    @classmethod
    def from_prior(cls, prior: DiscreteDistribution, variance: float) -> "GaussianMixture":
        """Output law of x -> x + N(0, variance) under a discrete prior."""
        return cls(prior.locations, prior.masses, variance)

    @property
    def means(self) -> np.ndarray:
        return self._means

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def variance(self) -> float:
        return self._variance

    @property
    def sigma(self) -> float:
        return math.sqrt(self._variance)

    @property
    def num_components(self) -> int:
        return self._means.size

    def logpdf(self, y: np.ndarray) -> np.ndarray:
        """Log-density, evaluated in log space with max-shift stabilization."""
        y = np.asarray(y, dtype=float)
        z = -((y[..., None] - self._means) ** 2) / (2.0 * self._variance)
        z = z + np.log(self._weights)
        zmax = z.max(axis=-1)
        out = zmax + np.log(np.exp(z - zmax[..., None]).sum(axis=-1))
        return out - 0.5 * math.log(2.0 * math.pi * self._variance)

    def pdf(self, y: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(y))

    def __repr__(self) -> str:
        return (
            f"GaussianMixture(means={self._means.tolist()}, "
            f"weights={self._weights.tolist()}, variance={self._variance})"
        )


def _merged_support(P: DiscreteDistribution, Q: DiscreteDistribution):
    """Common support by exact location equality; masses aligned, 0 where absent."""
    support = np.union1d(P.locations, Q.locations)
    p = np.zeros(support.size)
    q = np.zeros(support.size)
    p[np.searchsorted(support, P.locations)] = P.masses
    q[np.searchsorted(support, Q.locations)] = Q.masses
    return support, p, q


def hockey_stick_discrete(
    P: DiscreteDistribution, Q: DiscreteDistribution, alpha: float
) -> float:
    """H_alpha(P || Q) for discrete pairs: sum of max(0, P(y) - alpha*Q(y))."""
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    _, p, q = _merged_support(P, Q)
    return float(np.maximum(0.0, p - alpha * q).sum())


def _gaussian_envelope(P: GaussianMixture, Q: GaussianMixture):
    smax = max(P.sigma, Q.sigma)
    lo = min(P.means.min(), Q.means.min()) - _ENVELOPE_SIGMAS * smax
    hi = max(P.means.max(), Q.means.max()) + _ENVELOPE_SIGMAS * smax
    return lo, hi


def _sign_change_roots(g, lo: float, hi: float, scan_points: int = 4096):
    """Roots of a scalar-sign function g located by scan + vectorized bisection."""
    xs = np.linspace(lo, hi, scan_points)
    s = np.sign(g(xs))
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size == 0:
        return np.empty(0)
    a, b = xs[idx].copy(), xs[idx + 1].copy()
    sa = s[idx]
    for _ in range(60):
        m = 0.5 * (a + b)
        sm = np.sign(g(m))
        left = sa * sm <= 0
        b = np.where(left, m, b)
        a = np.where(left, a, m)
        sa = np.where(left, sa, sm)
    return 0.5 * (a + b)


def hockey_stick_gaussian(
    P: GaussianMixture,
    Q: GaussianMixture,
    alpha: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """H_alpha(P || Q) for 1-D Gaussian mixtures by adaptive quadrature.

    Integrates max(0, p - alpha*q) over the 12-sigma envelope around all
    component means, splitting panels at the sign changes of p - alpha*q so
    that each integrated piece is smooth. Sign changes are located on the
    log scale, which keeps the far tails (where both densities underflow
    any fixed threshold) comparable.
    """
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    lo, hi = _gaussian_envelope(P, Q)
    if alpha == 0.0:
        return float(
            integrate_batched(P.pdf, np.linspace(lo, hi, 65), tol.abs_tol, tol.rel_tol)
        )
    log_alpha = math.log(alpha)

    def log_ratio_gap(y):
        return P.logpdf(y) - Q.logpdf(y) - log_alpha

    roots = _sign_change_roots(log_ratio_gap, lo, hi)
    edges = np.concatenate([[lo], roots, [hi]])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0.0:
            continue
        if log_ratio_gap(np.array([0.5 * (a + b)]))[0] <= 0.0:
            continue

        def integrand(y):
            return np.maximum(0.0, P.pdf(y) - alpha * Q.pdf(y))

        sub = np.linspace(a, b, 17)
        total += integrate_batched(integrand, sub, tol.abs_tol, tol.rel_tol)
    return total


def kl_discrete(P: DiscreteDistribution, Q: DiscreteDistribution) -> float:
    """KL(P || Q) in bits; raises SupportError if P is not dominated by Q."""
    _, p, q = _merged_support(P, Q)
    bad = (p > 0.0) & (q == 0.0)
    if np.any(bad):
        raise SupportError(
            "P has mass outside the support of Q (KL divergence is infinite)"
        )
    m = p > 0.0
    return float((p[m] * np.log2(p[m] / q[m])).sum())


def kl_bernoulli(p1: float, p0: float) -> float:
    """KL(Ber(p1) || Ber(p0)) in bits.

    Returns math.inf (the infinite-divergence signal) when p0 is 0 or 1
    while p1 differs from it.
    """
    for name, v in (("p1", p1), ("p0", p0)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    if p1 == p0:
        return 0.0
    if p0 == 0.0 or p0 == 1.0:
        return math.inf
    out = 0.0
    if p1 > 0.0:
        out += p1 * math.log2(p1 / p0)
    if p1 < 1.0:
        out += (1.0 - p1) * math.log2((1.0 - p1) / (1.0 - p0))
    return out


def _kl_gaussian_pair(
    P: GaussianMixture, Q: GaussianMixture, tol: ToleranceConfig
) -> float:
    """KL(P || Q) in bits for mixtures, by quadrature over the joint envelope."""
    lo, hi = _gaussian_envelope(P, Q)

    def integrand(y):
        lp = P.logpdf(y)
        return np.exp(lp) * (lp - Q.logpdf(y))

    edges = np.unique(
        np.concatenate([np.linspace(lo, hi, 65), P.means, Q.means])
    )
    val = integrate_batched(integrand, edges, tol.abs_tol, tol.rel_tol)
    return float(val * LOG2_E)


def kl_gaussian_component_vs_mixture(
    P: GaussianMixture, Q: GaussianMixture, tol: ToleranceConfig = DEFAULT_TOL
) -> float:
    """KL(P || Q) in bits where P is a single Gaussian and Q a mixture."""
    if P.num_components != 1:
        raise ValueError("P must be a single-component Gaussian")
    return _kl_gaussian_pair(P, Q, tol)


DistributionPair = Union[DiscreteDistribution, GaussianMixture]


def verify_kl_hockeystick_identity(
    P: DistributionPair,
    Q: DistributionPair,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> tuple[float, float, float]:
    """Check KL(P||Q) against its hockey-stick integral representation.

    Returns (lhs, rhs, gap) in bits, where lhs is the directly computed KL,
    rhs integrates H_{e^t}(P||Q) + e^{-t} H_{e^t}(Q||P) over t in [0, inf)
    and scales by log2(e), and gap = |lhs - rhs|.
    """
    if isinstance(P, DiscreteDistribution) and isinstance(Q, DiscreteDistribution):
        lhs = kl_discrete(P, Q)

        def hs(t):
            a = math.exp(t)
            return hockey_stick_discrete(P, Q, a) + math.exp(-t) * hockey_stick_discrete(Q, P, a)

    elif isinstance(P, GaussianMixture) and isinstance(Q, GaussianMixture):
        lhs = _kl_gaussian_pair(P, Q, tol)
        inner = ToleranceConfig(
            abs_tol=min(tol.abs_tol, 1e-12), rel_tol=min(tol.rel_tol, 1e-9),
            max_iter=tol.max_iter,
        )

        def hs(t):
            a = math.exp(t)
            return hockey_stick_gaussian(P, Q, a, inner) + math.exp(
                -t
            ) * hockey_stick_gaussian(Q, P, a, inner)

    else:
        raise TypeError("P and Q must both be discrete or both be Gaussian mixtures")

    rhs = LOG2_E * integrate_semi_infinite(hs, tol)
    return lhs, rhs, abs(lhs - rhs)
