"""Shared numerical primitives: special functions, quadrature, and root finding.

Everything here is a pure function of its inputs (no global state), so all
operations are safe to call concurrently. Logarithms in user-facing
quantities are base 2 (bits); natural logs appear only internally. The
convention 0*log(0) = 0 is used throughout so that entropies and
divergences are continuous at the boundary of the simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

LOG2_E = math.log2(math.e)
_SQRT2 = math.sqrt(2.0)


class NonConvergenceError(RuntimeError):
    """An iterative routine failed to reach its tolerance within its budget."""


class BracketError(ValueError):
    """A root/bisection search was given an interval that does not bracket."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Accuracy knobs shared by the iterative routines.

    abs_tol and rel_tol bound the absolute/relative error of quadratures and
    searches; max_iter caps iteration counts of bisections and fixed-point
    loops.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = ToleranceConfig()


def binary_entropy(p: float) -> float:
    """Entropy of Ber(p) in bits, with 0*log(0) = 0."""
    if math.isnan(p) or not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy needs p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc; absolute error well below 1e-12."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float,
    rel_tol: float,
    max_depth: int = 48,
) -> float:
    """Adaptive Simpson quadrature of a scalar function on [a, b].

    Subdivides until the local Richardson error estimate meets a tolerance
    budget proportional to the subinterval width. Raises NonConvergenceError
    if an interval at max recursion depth still fails its budget.
    """
    total_width = b - a
    if total_width <= 0:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    m0 = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m0), f(b)
    stack = [(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 0)]
    total = 0.0
    while stack:
        x0, x2, f0, f1, f2, s_whole, depth = stack.pop()
        xm = 0.5 * (x0 + x2)
        lm = 0.5 * (x0 + xm)
        rm = 0.5 * (xm + x2)
        flm, frm = f(lm), f(rm)
        s_left = simpson(x0, xm, f0, flm, f1)
        s_right = simpson(xm, x2, f1, frm, f2)
        s2 = s_left + s_right
        err = abs(s2 - s_whole) / 15.0
        budget = max(abs_tol * (x2 - x0) / total_width, rel_tol * abs(s2))
        if err <= budget or (x2 - x0) <= abs(xm) * 1e-15:
            total += s2 + (s2 - s_whole) / 15.0
        elif depth >= max_depth:
            raise NonConvergenceError(
                f"adaptive quadrature failed on [{x0}, {x2}] at depth {depth} "
                f"(error estimate {err:.3e} > budget {budget:.3e})"
            )
        else:
            stack.append((x0, xm, f0, flm, f1, s_left, depth + 1))
            stack.append((xm, x2, f1, frm, f2, s_right, depth + 1))
    return total


def integrate_interval(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Integral of f over the finite interval [a, b]."""
    return _adaptive_simpson(f, a, b, tol.abs_tol, tol.rel_tol)


def integrate_semi_infinite(
    f: Callable[[float], float],
    tol: ToleranceConfig = DEFAULT_TOL,
    cutoff_start: float = 8.0,
    cutoff_ceiling: float = 200.0,
) -> float:
    """Integral of a nonnegative, eventually decaying f over [0, inf).

    Integrates adaptively on [0, c] and grows c geometrically (x2 starting
    from cutoff_start) until the newest panel contributes less than abs_tol.
    Raises NonConvergenceError if the ceiling is reached with a
    non-negligible tail.
    """
    lo = 0.0
    hi = cutoff_start
    total = 0.0
    while True:
        panel = _adaptive_simpson(f, lo, hi, tol.abs_tol / 4.0, tol.rel_tol / 4.0)
        total += panel
        if abs(panel) < tol.abs_tol:
            return total
        if hi >= cutoff_ceiling:
            raise NonConvergenceError(
                f"tail of semi-infinite integral still contributes {panel:.3e} "
                f"at the cutoff ceiling {cutoff_ceiling}"
            )
        lo, hi = hi, min(2.0 * hi, cutoff_ceiling)


def find_root_bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Root of a continuous f on [lo, hi] by bisection.

    Requires f(lo) and f(hi) of opposite sign (or zero). Stops when
    |f(mid)| <= abs_tol or the bracket width drops below abs_tol.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}"
        )
    for _ in range(max(tol.max_iter, 1)):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= tol.abs_tol or (hi - lo) <= tol.abs_tol:
            return mid
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    raise NonConvergenceError(
        f"bisection did not converge within {tol.max_iter} iterations"
    )


def integrate_batched(
    f: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    abs_tol: float,
    rel_tol: float,
    max_rounds: int = 60,
) -> float:
    """Adaptive Simpson quadrature with vectorized evaluation.

    f maps an array of points to an array of values. `edges` gives the
    initial panel boundaries; panels failing the local error test are split
    in half, all active midpoints being evaluated in one batched call per
    round. Used for integrands whose evaluation is array-friendly (mixture
    densities), where scalar recursion would dominate the runtime.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0
    total_width = edges[-1] - edges[0]
    if total_width <= 0:
        return 0.0

    a = edges[:-1]
    b = edges[1:]
    m = 0.5 * (a + b)
    pts = np.concatenate([edges, m])
    vals = np.asarray(f(pts), dtype=float)
    fa = vals[: a.size + 1][:-1]
    fb = vals[1 : a.size + 1]
    fm = vals[a.size + 1 :]
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    for _ in range(max_rounds):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        new_vals = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        flm = new_vals[: lm.size]
        frm = new_vals[lm.size :]
        s_left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        s_right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        s2 = s_left + s_right
        err = np.abs(s2 - s) / 15.0
        budget = np.maximum(abs_tol * (b - a) / total_width, rel_tol * np.abs(s2))
        done = (err <= budget) | ((b - a) <= np.maximum(np.abs(m), 1.0) * 1e-15)
        total += np.sum(s2[done] + (s2[done] - s[done]) / 15.0)
        if np.all(done):
            return float(total)
        keep = ~done
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        fa = np.concatenate([fa[keep], fm[keep]])
        fb = np.concatenate([fm[keep], fb[keep]])
        m = np.concatenate([lm[keep], rm[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        s = np.concatenate([s_left[keep], s_right[keep]])
    raise NonConvergenceError(
        f"batched quadrature did not converge within {max_rounds} refinement rounds"
    )
