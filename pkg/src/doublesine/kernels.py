"""Conjugate Dirichlet-type kernels and summation by parts.

The kernel of order k and step r (r a nonzero signed integer) is

    D(k, r, x) = cos((k + r/2) x) / (2 sin((r/2) x)).

It is singular where ``sin(r x / 2)`` vanishes, i.e. at ``x = 2 l pi / r``;
evaluation within ``SINGULARITY_FLOOR`` of a zero denominator raises
:class:`SingularityError` naming the nearest excluded point.

The single-index identity (step r >= 1, m >= n >= 1, arbitrary a)

    sum_{k=n}^{m} a_k sin kx  =  - sum_{k=n}^{m} (a_k - a_{k+r}) D(k,  r, x)
                                 + sum_{k=m+1}^{m+r} a_k         D(k, -r, x)
                                 - sum_{k=n}^{n+r-1} a_k         D(k, -r, x)

is implemented by :func:`row_sum_by_parts`.  Applying it in both indices
turns a rectangle sum of ``c_{jk} sin jx sin ky`` into a mixed-difference
core plus four boundary strips and four corner blocks (nine terms; the
strips have width r); that expansion is :func:`rect_sum_parts`.

All reductions are compensated and performed in a fixed order, so
results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .differences import check_step, delta_0r, delta_r, delta_r0, delta_rr
from .sequences import CoefficientSequence, SingleSequence
from .summing import ksum

__all__ = [
    "SINGULARITY_FLOOR",
    "SingularityError",
    "Rect",
    "dirichlet_conj",
    "assert_admissible",
    "row_sum_by_parts",
    "rect_sum_direct",
    "rect_sum_separable",
    "rect_sum_parts",
    "kernel_bound_check",
    "KernelBoundReport",
]

SINGULARITY_FLOOR = 1e-12


class SingularityError(ValueError):
    """Kernel evaluated too close to a singular abscissa."""


@dataclass(frozen=True)
class Rect:
    """Index rectangle ``m <= j <= M``, ``n <= k <= N`` (all >= 1)."""

    m: int
    M: int
    n: int
    N: int

    def __post_init__(self):
        if not (1 <= self.m <= self.M and 1 <= self.n <= self.N):
            raise ValueError(f"invalid rectangle {self}: need 1 <= m <= M and 1 <= n <= N")


def _check_denominator(r: int, x: float) -> float:
    s = math.sin(0.5 * r * x)
    if abs(s) < SINGULARITY_FLOOR:
        l = round(x * r / (2.0 * math.pi))
        point = 2.0 * l * math.pi / r
        raise SingularityError(
            f"kernel step {r} is singular near x = 2*{l}*pi/{r} = {point!r}; got x = {x!r}")
    return s


def assert_admissible(x: float, r: int) -> None:
    """Raise :class:`SingularityError` if x sits in a singular band for step r."""
    _check_denominator(r, x)
    _check_denominator(-r, x)


def dirichlet_conj(k: int, r: int, x: float) -> float:
    """Kernel value ``cos((k + r/2) x) / (2 sin((r/2) x))``.

    ``k >= 0``; ``r`` is a nonzero signed integer.
    """
    if k < 0:
        raise ValueError(f"kernel order must be >= 0, got {k}")
    if r == 0 or not isinstance(r, (int, np.integer)):
        raise ValueError(f"kernel step must be a nonzero integer, got {r!r}")
    s = _check_denominator(r, x)
    return math.cos((k + 0.5 * r) * x) / (2.0 * s)


def _kernel_row(ks: np.ndarray, r: int, x: float) -> np.ndarray:
    """Vectorised kernel over orders ``ks`` at fixed step and abscissa."""
    s = _check_denominator(r, x)
    return np.cos((ks + 0.5 * r) * x) / (2.0 * s)


def row_sum_by_parts(a: SingleSequence, n: int, m: int, r: int, x: float):
    """``sum_{k=n}^{m} a_k sin kx`` via the step-r summation by parts.

    Exact rearrangement of the direct sum; the two boundary sums have r
    terms each.  ``x`` must avoid the singular abscissae of step r.
    """
    r = check_step(r)
    if not (1 <= n <= m):
        raise ValueError("need 1 <= n <= m")
    ks = np.arange(n, m + 1, dtype=np.int64)
    main = -delta_r(a, r, ks) * _kernel_row(ks, r, x)
    upper_idx = np.arange(m + 1, m + r + 1, dtype=np.int64)
    upper = a.eval(upper_idx) * _kernel_row(upper_idx, -r, x)
    lower_idx = np.arange(n, n + r, dtype=np.int64)
    lower = -a.eval(lower_idx) * _kernel_row(lower_idx, -r, x)
    return ksum(np.concatenate([np.atleast_1d(main), np.atleast_1d(upper), np.atleast_1d(lower)]))


def rect_sum_direct(c: CoefficientSequence, rect: Rect, x: float, y: float):
    """Plain double sum ``sum_{j=m}^{M} sum_{k=n}^{N} c_{jk} sin jx sin ky``.

    Rows are processed with ascending j, each row compensated over
    ascending k, and the row totals compensated again.
    """
    ks = np.arange(rect.n, rect.N + 1, dtype=np.int64)
    sin_ky = np.sin(ks * y)
    rows = []
    for j in range(rect.m, rect.M + 1):
        inner = ksum(np.asarray(c.eval(j, ks)) * sin_ky)
        rows.append(math.sin(j * x) * inner)
    return ksum(np.asarray(rows))


def rect_sum_separable(c: CoefficientSequence, rect: Rect, x: float, y: float):
    """Factored rectangle sum for a separable sequence.

    ``(sum_j a_j sin jx)(sum_k b_k sin ky)``; requires separable parts.
    """
    if c.separable_parts is None:
        raise ValueError(f"sequence {c.name!r} has no separable parts")
    a, b = c.separable_parts
    js = np.arange(rect.m, rect.M + 1, dtype=np.int64)
    ks = np.arange(rect.n, rect.N + 1, dtype=np.int64)
    left = ksum(np.asarray(a.eval(js)) * np.sin(js * x))
    right = ksum(np.asarray(b.eval(ks)) * np.sin(ks * y))
    return left * right


def rect_sum_parts(c: CoefficientSequence, rect: Rect, x: float, y: float, r: int = 2):
    """Rectangle sum via double summation by parts (nine blocks).

    Exact rearrangement of :func:`rect_sum_direct` for any step
    r in {1, 2, 3, ...}; both abscissae must avoid the singular points
    of step r.  Blocks are accumulated in a fixed order: the mixed-
    difference core, then the j strips, k strips, and corners.
    """
    r = check_step(r)
    m, M, n, N = rect.m, rect.M, rect.n, rect.N
    jm = np.arange(m, M + 1, dtype=np.int64)
    kn = np.arange(n, N + 1, dtype=np.int64)
    jU = np.arange(M + 1, M + r + 1, dtype=np.int64)   # upper j strip
    jL = np.arange(m, m + r, dtype=np.int64)           # lower j strip
    kU = np.arange(N + 1, N + r + 1, dtype=np.int64)
    kL = np.arange(n, n + r, dtype=np.int64)

    Dj = _kernel_row(jm, r, x)
    DjU = _kernel_row(jU, -r, x)
    DjL = _kernel_row(jL, -r, x)
    Dk = _kernel_row(kn, r, y)
    DkU = _kernel_row(kU, -r, y)
    DkL = _kernel_row(kL, -r, y)

    blocks = [
        delta_rr(c, r, jm[:, None], kn[None, :]) * Dj[:, None] * Dk[None, :],
        -delta_0r(c, r, jU[:, None], kn[None, :]) * DjU[:, None] * Dk[None, :],
        delta_0r(c, r, jL[:, None], kn[None, :]) * DjL[:, None] * Dk[None, :],
        -delta_r0(c, r, jm[:, None], kU[None, :]) * Dj[:, None] * DkU[None, :],
        np.asarray(c.eval(jU[:, None], kU[None, :])) * DjU[:, None] * DkU[None, :],
        -np.asarray(c.eval(jL[:, None], kU[None, :])) * DjL[:, None] * DkU[None, :],
        delta_r0(c, r, jm[:, None], kL[None, :]) * Dj[:, None] * DkL[None, :],
        -np.asarray(c.eval(jU[:, None], kL[None, :])) * DjU[:, None] * DkL[None, :],
        np.asarray(c.eval(jL[:, None], kL[None, :])) * DjL[:, None] * DkL[None, :],
    ]
    return ksum(np.concatenate([b.reshape(-1) for b in blocks]))


@dataclass(frozen=True)
class KernelBoundReport:
    """Worst slack of ``|D(k, +-2, x)|`` against the envelope bound."""

    worst_slack: float
    witness_x: float
    witness_k: int
    witness_r: int
    n_points: int
    k_max: int


def _envelope(x: np.ndarray) -> np.ndarray:
    """``pi/(4x)`` on (0, pi/2), ``pi/(4(pi-x))`` on (pi/2, pi)."""
    return np.where(x <= 0.5 * math.pi,
                    math.pi / (4.0 * x),
                    math.pi / (4.0 * (math.pi - x)))


def kernel_bound_check(r: int, x_grid: np.ndarray, k_max: int = 512) -> KernelBoundReport:
    """Check ``|D(k, +-r, x)| <= envelope(x)`` over a grid and k <= k_max.

    The envelope is specific to step 2, so ``|r|`` must be 2.  The grid
    must stay inside (0, pi) away from the endpoints.  Returns the worst
    (most positive) slack ``|D| - envelope`` with its witness; a
    negative worst slack means the bound held everywhere.
    """
    if abs(int(r)) != 2:
        raise ValueError("the envelope bound applies to steps +-2 only")
    xs = np.asarray(x_grid, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("empty x grid")
    if np.any(xs <= 0.0) or np.any(xs >= math.pi):
        raise ValueError("grid must lie strictly inside (0, pi)")
    ks = np.arange(0, k_max + 1, dtype=np.int64)
    worst = -math.inf
    wx, wk, wr = xs[0], 0, 2
    env = _envelope(xs)
    for sgn in (2, -2):
        for i, x in enumerate(xs):
            vals = np.abs(_kernel_row(ks, sgn, float(x)))
            idx = int(np.argmax(vals))
            slack = float(vals[idx] - env[i])
            if slack > worst:
                worst, wx, wk, wr = slack, float(x), int(ks[idx]), sgn
    return KernelBoundReport(worst_slack=worst, witness_x=wx, witness_k=wk,
                             witness_r=wr, n_points=int(xs.size), k_max=int(k_max))
