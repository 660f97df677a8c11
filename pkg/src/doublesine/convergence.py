"""Convergence and divergence diagnostics for double sine series.

The quantities here are the ones a regular-convergence argument runs on:

* :func:`lemma1_quantity` -- ``m n  sum_{j>=m} sum_{k>=n} |d22 c_{jk}|``,
  the weighted tail of step-2 mixed differences;
* :func:`lemma2_quantities` -- the two one-sided companions
  ``m sup_{k>=n} k sum_{j>=m} |d20 c_{jk}|`` and its transpose;
* :func:`lemma3_check` -- a pointwise sandwich: ``m n c_{mn}`` must stay
  below a constant multiple of block sums of the sequence;
* :func:`uniform_tail_probe` -- samples rectangle partial sums
  ``sum_{j=m}^{M} sum_{k=n}^{N} c_{jk} sin jx sin ky`` over rectangles
  beyond a moving threshold ``m + n > t`` and watches the sup decay;
* :func:`eta_search` -- finds the smallest threshold past which four
  smallness conditions hold, the gateway to the uniform tail bound;
* :func:`theorem7_bound_check` -- compares sampled rectangle sums beyond
  the threshold against the closed-form envelope
  ``(1 + 2 pi C + 2 pi + 1.5 pi^2 C + pi^2) eps``;
* :func:`remark2_divergence` -- evaluates the residue-modulated preset at
  its divergence point and checks growth against a closed-form minorant.

Infinite sums and sups are scanned up to explicit horizons; power-decay
hints, when present, close the scans with certified tail bounds, and
every result records whether it is certified or merely truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .differences import delta_r
from .kernels import Rect, rect_sum_direct
from .majorants import HorizonError, compile_b, double_sup_scan, single_window_sum
from .sequences import CoefficientSequence, SingleSequence, builtin
from .summing import ksum, sine_prefix

__all__ = [
    "Verdict",
    "TailReport",
    "Measurement",
    "classify_tail",
    "classify_probe",
    "loglog_slope",
    "lemma1_quantity",
    "lemma2_quantities",
    "Lemma3Result",
    "lemma3_check",
    "ProbeConfig",
    "ProbeTraceRow",
    "interior_grid",
    "uniform_tail_probe",
    "uniform_tail_trace",
    "EtaCondition",
    "EtaSearchResult",
    "EtaCapError",
    "eta_search",
    "Theorem7Result",
    "theorem7_bound_check",
    "remark2_divergence",
]

_MAX_GENERIC_CELLS = 5 * 10**7


class Verdict(str, Enum):
    DECAYING = "decaying"
    FLAT = "flat"
    GROWING = "growing"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailReport:
    """A scalar diagnostic evaluated along an increasing scale schedule.

    ``values[i]`` is the diagnostic at ``schedule[i]``; ``bounded[i]``
    records whether that value is certified (no truncated, unbounded
    tail).  ``reference_values`` optionally carries a per-scale
    comparison series (e.g. a closed-form lower bound).  ``fit`` is the
    log-log slope of values against schedule when all values are
    positive.
    """

    schedule: tuple[int, ...]
    values: tuple[float, ...]
    verdict: Verdict
    fit: float | None = None
    bounded: tuple[bool, ...] | None = None
    reference_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.values) != len(self.schedule):
            raise ValueError("values and schedule lengths differ")
        if any(b >= a for a, b in zip(self.schedule[1:], self.schedule)):
            raise ValueError("schedule must be strictly increasing")
        if self.bounded is not None and len(self.bounded) != len(self.schedule):
            raise ValueError("bounded flags and schedule lengths differ")
        if (self.reference_values is not None
                and len(self.reference_values) != len(self.schedule)):
            raise ValueError("reference values and schedule lengths differ")


@dataclass(frozen=True)
class Measurement:
    """A scanned quantity with truncation bookkeeping.

    ``value`` is the scanned part.  ``tail_bound`` bounds what the scan
    missed when a decay hint allows it; ``bounded`` is False when no
    such certificate exists.
    """

    value: float
    bounded: bool
    tail_bound: float | None = None

    @property
    def upper(self) -> float:
        """Certified upper estimate (value plus tail bound)."""
        return self.value + (self.tail_bound or 0.0)


def classify_tail(values, *, decay_factor: float = 100.0, flat_rtol: float = 1e-12) -> Verdict:
    """Verdict for weighted-tail scans such as ``sup_{j+k=s} jk |c_{jk}|``.

    decaying: the last three values strictly decrease and the final
    value is below the first divided by ``decay_factor``.  growing:
    strictly increasing across the schedule.  flat: all values within
    relative ``flat_rtol`` of the first.  Anything else is inconclusive.
    """
    v = [float(x) for x in values]
    if len(v) < 2:
        return Verdict.INCONCLUSIVE
    if len(v) >= 3 and v[-3] > v[-2] > v[-1] and v[-1] < v[0] / decay_factor:
        return Verdict.DECAYING
    if all(b > a for a, b in zip(v, v[1:])):
        return Verdict.GROWING
    ref = max(abs(v[0]), 1e-300)
    if all(abs(x - v[0]) <= flat_rtol * ref for x in v):
        return Verdict.FLAT
    return Verdict.INCONCLUSIVE


def classify_probe(values, *, band: float = 0.05, decay_ratio: float = 4.0,
                   flat_rtol: float = 1e-12) -> Verdict:
    """Verdict for sup-style probes, tolerant of local wiggle.

    decaying: every step grows by at most ``band`` (relatively) and the
    final value is below the first divided by ``decay_ratio``.
    """
    v = [float(x) for x in values]
    if len(v) < 2:
        return Verdict.INCONCLUSIVE
    steps_ok = all(b <= a * (1.0 + band) for a, b in zip(v, v[1:]))
    if steps_ok and v[-1] <= v[0] / decay_ratio:
        return Verdict.DECAYING
    if all(b > a for a, b in zip(v, v[1:])):
        return Verdict.GROWING
    ref = max(abs(v[0]), 1e-300)
    if all(abs(x - v[0]) <= flat_rtol * ref for x in v):
        return Verdict.FLAT
    return Verdict.INCONCLUSIVE


def loglog_slope(schedule, values) -> float | None:
    """Least-squares slope of log(values) against log(schedule)."""
    xs = np.asarray(schedule, dtype=np.float64)
    ys = np.asarray(values, dtype=np.float64)
    if len(xs) < 2 or np.any(ys <= 0.0) or np.any(xs <= 0.0):
        return None
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# --- tail-bound helpers ----------------------------------------------------

def _tail_sum_beyond(H: int, p: float) -> float | None:
    """Bound on ``sum_{j > H} j^{-p}`` (integral comparison); needs p > 1."""
    if p <= 1.0:
        return None
    return float(H) ** (1.0 - p) / (p - 1.0)


def _sum_from(n: int, p: float) -> float | None:
    """Bound on ``sum_{j >= n} j^{-p}``; needs p > 1."""
    if p <= 1.0:
        return None
    return float(n) ** (-p) + float(n) ** (1.0 - p) / (p - 1.0)


def _d2_scan(a: SingleSequence, m: int, H: int) -> Measurement:
    """``sum_{j=m}^{H} |a_j - a_{j+2}|`` plus a tail certificate."""
    j = np.arange(m, H + 1, dtype=np.int64)
    scanned = float(ksum(np.abs(delta_r(a, 2, j))))
    hint = a.decay_hint
    tail = None
    if hint is not None:
        base = _tail_sum_beyond(H, hint.p)
        if base is not None:
            tail = 2.0 * hint.K * base
    return Measurement(value=scanned, bounded=tail is not None, tail_bound=tail)


def _weight_sup_scan(b: SingleSequence, n: int, H: int) -> Measurement:
    """``sup_{k >= n} k |b_k|`` scanned to H with a tail certificate."""
    k = np.arange(n, H + 1, dtype=np.int64)
    vals = k.astype(np.float64) * np.abs(np.asarray(b.eval(k), dtype=np.float64))
    scanned = float(np.max(vals))
    hint = b.decay_hint
    tail = None
    if hint is not None and hint.p >= 1.0:
        # k |b_k| <= K k^(1-p) is nonincreasing for p >= 1
        tail = hint.K * float(H + 1) ** (1.0 - hint.p)
    if tail is not None and tail <= scanned:
        return Measurement(value=scanned, bounded=True, tail_bound=0.0)
    return Measurement(value=scanned, bounded=tail is not None,
                       tail_bound=None if tail is None else tail - scanned)


def _guard_generic(cells: int) -> None:
    if cells > _MAX_GENERIC_CELLS:
        raise ValueError(
            "generic (non-separable) scan too large; lower the horizons or "
            "supply a separable sequence")


def lemma1_quantity(c: CoefficientSequence, m: int, n: int,
                    horizon: int = 1 << 16) -> Measurement:
    """``m n sum_{j>=m} sum_{k>=n} |d22 c_{jk}|`` with step-2 differences.

    Scanned up to ``horizon`` in both indices; a power-decay hint closes
    the tail, otherwise the result is flagged unbounded.
    """
    if m < 1 or n < 1:
        raise ValueError("indices must be >= 1")
    if c.separable_parts is not None:
        a, b = c.separable_parts
        sa = _d2_scan(a, m, horizon)
        sb = _d2_scan(b, n, horizon)
        value = (m * sa.value) * (n * sb.value)
        if sa.bounded and sb.bounded:
            ta, tb = sa.tail_bound, sb.tail_bound
            tail = m * n * (sa.value * tb + ta * sb.value + ta * tb)
            return Measurement(value=value, bounded=True, tail_bound=tail)
        return Measurement(value=value, bounded=False)
    _guard_generic((horizon - m + 1) * (horizon - n + 1))
    k = np.arange(n, horizon + 1, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(1, len(k)))
    parts = []
    for j0 in range(m, horizon + 1, chunk):
        j = np.arange(j0, min(j0 + chunk, horizon + 1), dtype=np.int64)
        d = (np.asarray(c.eval(j[:, None], k[None, :]))
             - np.asarray(c.eval(j[:, None] + 2, k[None, :]))
             - np.asarray(c.eval(j[:, None], k[None, :] + 2))
             + np.asarray(c.eval(j[:, None] + 2, k[None, :] + 2)))
        parts.append(ksum(np.abs(d)))
    value = m * n * float(ksum(np.asarray(parts)))
    hint = c.decay_hint
    if hint is not None:
        beyond_j = _tail_sum_beyond(horizon, hint.p)
        from_n = _sum_from(n, hint.q)
        from_m = _sum_from(m, hint.p)
        beyond_k = _tail_sum_beyond(horizon, hint.q)
        if None not in (beyond_j, from_n, from_m, beyond_k):
            tail = 4.0 * hint.K * (beyond_j * from_n + from_m * beyond_k)
            return Measurement(value=value, bounded=True, tail_bound=m * n * tail)
    return Measurement(value=value, bounded=False)


def lemma2_quantities(c: CoefficientSequence, m: int, n: int,
                      sup_horizon: int = 1 << 14,
                      sum_horizon: int = 1 << 16) -> tuple[Measurement, Measurement]:
    """The two one-sided tail quantities at (m, n).

    First: ``m sup_{k>=n} k sum_{j>=m} |d20 c_{jk}|``.  Second, with the
    roles of the indices swapped: ``n sup_{j>=m} j sum_{k>=n} |d02 c_{jk}|``.
    Sups are scanned to ``sup_horizon``, inner sums to ``sum_horizon``.
    """
    if m < 1 or n < 1:
        raise ValueError("indices must be >= 1")
    if c.separable_parts is not None:
        a, b = c.separable_parts

        def one_sided(first: SingleSequence, second: SingleSequence,
                      lo_sum: int, lo_sup: int, scale: int) -> Measurement:
            inner = _d2_scan(first, lo_sum, sum_horizon)
            outer = _weight_sup_scan(second, lo_sup, sup_horizon)
            value = scale * inner.value * outer.value
            if inner.bounded and outer.bounded:
                ti, to = inner.tail_bound, outer.tail_bound
                tail = scale * (inner.value * to + ti * outer.value + ti * to)
                return Measurement(value=value, bounded=True, tail_bound=tail)
            return Measurement(value=value, bounded=False)

        qa = one_sided(a, b, m, n, m)
        qb = one_sided(b, a, n, m, n)
        return qa, qb

    _guard_generic((sum_horizon - m + 1) * (sup_horizon - n + 1))

    def one_sided_generic(swap: bool, lo_sum: int, lo_sup: int, scale: int) -> Measurement:
        sup_idx = np.arange(lo_sup, sup_horizon + 1, dtype=np.int64)
        sums = np.zeros(len(sup_idx))
        chunk = max(1, (1 << 22) // max(1, len(sup_idx)))
        for j0 in range(lo_sum, sum_horizon + 1, chunk):
            j = np.arange(j0, min(j0 + chunk, sum_horizon + 1), dtype=np.int64)
            if swap:
                d = (np.asarray(c.eval(sup_idx[None, :], j[:, None]))
                     - np.asarray(c.eval(sup_idx[None, :], j[:, None] + 2)))
            else:
                d = (np.asarray(c.eval(j[:, None], sup_idx[None, :]))
                     - np.asarray(c.eval(j[:, None] + 2, sup_idx[None, :])))
            sums += np.abs(d).sum(axis=0)
        value = scale * float(np.max(sup_idx.astype(np.float64) * sums))
        hint = c.decay_hint
        if hint is not None:
            p_sum, p_sup = (hint.q, hint.p) if swap else (hint.p, hint.q)
            beyond_sum = _tail_sum_beyond(sum_horizon, p_sum)
            from_sum = _sum_from(lo_sum, p_sum)
            if beyond_sum is not None and from_sum is not None and p_sup >= 1.0:
                # unscanned j tail at scanned k, plus the whole k > horizon range
                part1 = 2.0 * hint.K * beyond_sum * float(lo_sup) ** (1.0 - p_sup)
                part2 = 2.0 * hint.K * from_sum * float(sup_horizon + 1) ** (1.0 - p_sup)
                return Measurement(value=value, bounded=True,
                                   tail_bound=scale * (part1 + part2))
        return Measurement(value=value, bounded=False)

    qa = one_sided_generic(False, m, n, m)
    qb = one_sided_generic(True, n, m, n)
    return qa, qb


@dataclass(frozen=True)
class Lemma3Result:
    """Pointwise sandwich check ``m n c_{mn} <= RHS`` at one (m, n)."""

    m: int
    n: int
    lhs: float
    rhs: float
    slack: float
    terms: tuple[float, float, float, float]
    truncated: bool


def lemma3_check(c: CoefficientSequence, C: float, lam: int, m: int, n: int,
                 b1: str = "l", b2: str = "l", b3: str = "l",
                 sup_horizon: int = 4096) -> Lemma3Result:
    """Evaluate the four-term majorant sandwich at (m, n).

    RHS = C * (double block sup past b3(m+n))
        + 2C * sum_{j=b1(m)}^{2 lam b1(m)} sum_{k=n}^{2n+1} c_{jk}
        + 2C * sum_{j=m}^{2m+1} sum_{k=b2(n)}^{2 lam b2(n)} c_{jk}
        + 8  * sum_{j=m}^{2m+1} sum_{k=n}^{2n+1} c_{jk}

    The sequence must be nonnegative on the touched ranges; slack is
    RHS - m n c_{mn} and should be >= 0 for members of the step-2 class.
    """
    if m < lam or n < lam:
        raise ValueError(f"need m, n >= lambda = {lam}")
    fb1, fb2, fb3 = compile_b(b1), compile_b(b2), compile_b(b3)

    def window_sum(jlo, jhi, klo, khi) -> float:
        j = np.arange(jlo, jhi + 1, dtype=np.int64)
        k = np.arange(klo, khi + 1, dtype=np.int64)
        vals = np.asarray(c.eval(j[:, None], k[None, :]), dtype=np.float64)
        if np.any(vals < 0.0):
            raise ValueError("lemma3_check needs nonnegative coefficients")
        return float(ksum(vals))

    scan = double_sup_scan(c, fb3(m + n), sup_horizon)
    term1 = C * scan.value
    term2 = 2.0 * C * window_sum(fb1(m), 2 * lam * fb1(m), n, 2 * n + 1)
    term3 = 2.0 * C * window_sum(m, 2 * m + 1, fb2(n), 2 * lam * fb2(n))
    term4 = 8.0 * window_sum(m, 2 * m + 1, n, 2 * n + 1)
    cmn = float(np.asarray(c.eval(m, n)))
    if cmn < 0.0:
        raise ValueError("lemma3_check needs nonnegative coefficients")
    lhs = m * n * cmn
    rhs_total = term1 + term2 + term3 + term4
    return Lemma3Result(m=m, n=n, lhs=lhs, rhs=rhs_total, slack=rhs_total - lhs,
                        terms=(term1, term2, term3, term4), truncated=scan.truncated)


# --- rectangle probes ------------------------------------------------------

def interior_grid(points_per_axis: int) -> tuple[tuple[float, float], ...]:
    """Uniform interior grid of (x, y) points in (0, pi)^2."""
    if points_per_axis < 1:
        raise ValueError("need at least one grid point per axis")
    ticks = [(i * math.pi) / (points_per_axis + 1) for i in range(1, points_per_axis + 1)]
    return tuple((x, y) for x in ticks for y in ticks)


@dataclass(frozen=True)
class ProbeConfig:
    """Sampling plan for rectangle partial-sum probes.

    Rectangles are drawn from a deterministic dyadic lattice: starts
    ``m, n`` are powers of two (plus the structured corners near
    ``ceil(1/x)`` and ``ceil(1/y)`` for each grid point), and the
    corners ``M, N`` double away from the starts up to ``rect_cap``.
    ``thresholds`` is the schedule of lower bounds ``m + n > t``.
    ``min_start`` excludes starts at or below it (class domain
    restrictions); 1 means no exclusion beyond the natural m, n >= 1.
    """

    xy_grid: tuple[tuple[float, float], ...]
    thresholds: tuple[int, ...] = (8, 16, 32, 64, 128)
    rect_cap: int = 4096
    min_start: int = 1
    doublings: int = 4
    band: float = 0.05
    decay_ratio: float = 4.0
    eta_epsilon: float = 0.05
    sup_horizon: int = 1 << 14
    sum_horizon: int = 1 << 16

    def __post_init__(self):
        if not self.xy_grid:
            raise ValueError("xy grid must not be empty")
        for x, y in self.xy_grid:
            if not (0.0 < x < math.pi and 0.0 < y < math.pi):
                raise ValueError(f"grid point ({x}, {y}) outside (0, pi)^2")
        if any(t2 <= t1 for t1, t2 in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if self.thresholds and self.thresholds[0] < 2:
            raise ValueError("thresholds must be >= 2")
        if self.rect_cap < 2 or self.min_start < 1 or self.doublings < 1:
            raise ValueError("bad probe geometry")


def _dyadic_starts(cap: int, min_start: int) -> list[int]:
    out = []
    v = 1
    while v <= cap:
        if v >= min_start:
            out.append(v)
        v *= 2
    return out


def _corners_from(start: int, cap: int, doublings: int) -> list[int]:
    out = []
    v = start
    for _ in range(doublings + 1):
        if v > cap:
            break
        out.append(v)
        v *= 2
    if not out or out[-1] != cap:
        out.append(cap)
    return out


def _transition_index(x: float) -> int:
    """Structured corner near the kernel case split: ceil(1/x) on the
    left half-interval, ceil(1/(pi - x)) on the right."""
    d = x if x <= 0.5 * math.pi else math.pi - x
    return max(1, math.ceil(1.0 / d))


def _rect_arrays(starts_m: list[int], starts_n: list[int], threshold: int,
                 cap: int, doublings: int) -> tuple[np.ndarray, ...]:
    ms, Ms, ns, Ns = [], [], [], []
    for m in starts_m:
        for n in starts_n:
            if m + n <= threshold:
                continue
            for M in _corners_from(m, cap, doublings):
                for N in _corners_from(n, cap, doublings):
                    ms.append(m)
                    Ms.append(M)
                    ns.append(n)
                    Ns.append(N)
    return (np.asarray(ms, dtype=np.int64), np.asarray(Ms, dtype=np.int64),
            np.asarray(ns, dtype=np.int64), np.asarray(Ns, dtype=np.int64))


def _per_xy_max_separable(c: CoefficientSequence, rect_arrays, xy_grid, cap: int):
    """Per grid point: max |rect sum| over the rectangles, via prefix sums."""
    a, b = c.separable_parts
    idx = np.arange(1, cap + 1, dtype=np.int64)
    a_vals = np.asarray(a.eval(idx), dtype=np.float64)
    b_vals = np.asarray(b.eval(idx), dtype=np.float64)
    prefix_x: dict[float, np.ndarray] = {}
    prefix_y: dict[float, np.ndarray] = {}
    ms, Ms, ns, Ns = rect_arrays
    out = []
    for x, y in xy_grid:
        if x not in prefix_x:
            prefix_x[x] = sine_prefix(a_vals, x)
        if y not in prefix_y:
            prefix_y[y] = sine_prefix(b_vals, y)
        U, V = prefix_x[x], prefix_y[y]
        vals = np.abs((U[Ms] - U[ms - 1]) * (V[Ns] - V[ns - 1]))
        i = int(np.argmax(vals))
        out.append((x, y, float(vals[i]),
                    Rect(int(ms[i]), int(Ms[i]), int(ns[i]), int(Ns[i]))))
    return out


def _per_xy_max_generic(c: CoefficientSequence, rect_arrays, xy_grid):
    ms, Ms, ns, Ns = rect_arrays
    cells = int(np.sum((Ms - ms + 1) * (Ns - ns + 1))) * len(xy_grid)
    _guard_generic(cells)
    out = []
    for x, y in xy_grid:
        best, wrect = -1.0, None
        for i in range(len(ms)):
            rect = Rect(int(ms[i]), int(Ms[i]), int(ns[i]), int(Ns[i]))
            val = abs(rect_sum_direct(c, rect, x, y))
            if val > best:
                best, wrect = val, rect
        out.append((x, y, best, wrect))
    return out


def _per_xy_max(c: CoefficientSequence, rect_arrays, xy_grid, cap: int):
    if c.separable_parts is not None:
        return _per_xy_max_separable(c, rect_arrays, xy_grid, cap)
    return _per_xy_max_generic(c, rect_arrays, xy_grid)


def _probe_arrays(probe: ProbeConfig, threshold: int,
                  min_start: int | None = None, per_pair: bool = False):
    """Rectangle corner arrays for one threshold of the probe lattice."""
    lo = probe.min_start if min_start is None else min_start
    lattice = _dyadic_starts(probe.rect_cap, lo)
    structured = {v for x, y in probe.xy_grid
                  for t in (_transition_index(x), _transition_index(y))
                  for v in (t, t + 1, 2 * t) if lo <= v <= probe.rect_cap}
    extra = {lo} if min_start is not None and lo <= probe.rect_cap else set()
    starts = sorted(set(lattice) | structured | extra)
    thr = 1 if per_pair else threshold
    arrays = _rect_arrays(starts, starts, thr, probe.rect_cap, probe.doublings)
    if arrays[0].size == 0:
        raise ValueError(f"no rectangles beyond threshold {threshold}")
    return arrays


def _probe_sup(c: CoefficientSequence, threshold: int, probe: ProbeConfig,
               min_start: int | None = None, per_pair: bool = False):
    """Sup of |rect sum| over the probe's lattice beyond one threshold.

    With ``per_pair`` the threshold is ignored and ``min_start`` bounds
    both start indices from below (used by the fixed-eta check).
    Returns (sup, witness_rect, witness_xy, number of rectangles).
    """
    arrays = _probe_arrays(probe, threshold, min_start, per_pair)
    per_xy = _per_xy_max(c, arrays, probe.xy_grid, probe.rect_cap)
    x, y, sup, wrect = max(per_xy, key=lambda row: row[2])
    return sup, wrect, (x, y), int(arrays[0].size)


@dataclass(frozen=True)
class ProbeTraceRow:
    """Per-threshold, per-grid-point probe maximum with its rectangle."""

    threshold: int
    x: float
    y: float
    m: int
    M: int
    n: int
    N: int
    abs_sum: float


def uniform_tail_trace(c: CoefficientSequence,
                       probe: ProbeConfig) -> tuple[TailReport, tuple[ProbeTraceRow, ...]]:
    """Like :func:`uniform_tail_probe`, also returning the full trace."""
    values = []
    trace: list[ProbeTraceRow] = []
    for t in probe.thresholds:
        arrays = _probe_arrays(probe, t)
        per_xy = _per_xy_max(c, arrays, probe.xy_grid, probe.rect_cap)
        best = -1.0
        for x, y, val, rect in per_xy:
            trace.append(ProbeTraceRow(threshold=t, x=x, y=y, m=rect.m, M=rect.M,
                                       n=rect.n, N=rect.N, abs_sum=val))
            best = max(best, val)
        values.append(best)
    verdict = classify_probe(values, band=probe.band, decay_ratio=probe.decay_ratio)
    report = TailReport(schedule=tuple(probe.thresholds), values=tuple(values),
                        verdict=verdict, fit=loglog_slope(probe.thresholds, values))
    return report, tuple(trace)


def uniform_tail_probe(c: CoefficientSequence, probe: ProbeConfig) -> TailReport:
    """Sup of |rectangle sums| beyond each threshold of the schedule.

    For a uniformly regularly convergent series the values decay; a
    divergence point in the grid keeps them from falling.
    """
    report, _ = uniform_tail_trace(c, probe)
    return report


# --- eta search ------------------------------------------------------------

class EtaCapError(RuntimeError):
    """Raised when no admissible threshold exists below the cap."""


@dataclass(frozen=True)
class EtaCondition:
    """Worst case of one smallness condition over the tested points."""

    name: str
    worst: float
    bound: float
    margin: float
    witness: tuple[int, int]
    certified: bool


@dataclass(frozen=True)
class EtaSearchResult:
    eta: int
    epsilon: float
    C: float
    cap: int
    verify_range: int
    tested_points: tuple[int, ...]
    conditions: tuple[EtaCondition, ...]


def _test_points(eta: int, verify_range: int) -> list[int]:
    pts = {eta + 1, verify_range}
    v = 1
    while v <= verify_range:
        if v > eta + 1:
            pts.add(v)
        v *= 2
    return sorted(pts)


def eta_search(c: CoefficientSequence, epsilon: float, C: float, lam: int = 2,
               cap: int = 1 << 14, verify_range: int | None = None,
               sup_horizon: int = 1 << 14, sum_horizon: int = 1 << 16) -> EtaSearchResult:
    """Smallest eta <= cap past which the four smallness conditions hold.

    Conditions, verified at every tested pair (m, n) with
    m, n in (eta, verify_range]:

        (1)  m n |c_{mn}| < eps              (checked as a sup over the
             whole range beyond eta, not just tested pairs)
        (2)  m n sum_{j>=m} sum_{k>=n} |d22 c_{jk}| < 16 C eps
        (3)  m sum_{j>=m} sup_{k>=n} k |d20 c_{jk}| < 4 C eps
        (4)  n sum_{k>=n} sup_{j>=m} j |d02 c_{jk}| < 4 C eps

    Conditions (3) and (4) place the sup inside the sum, which is the
    form the uniform bound's proof consumes; the companion lemma report
    in :func:`lemma2_quantities` uses the sup-outside form instead.
    Raises :class:`EtaCapError` when the scan passes the cap.
    """
    if epsilon <= 0 or C <= 0:
        raise ValueError("epsilon and C must be positive")
    if verify_range is None:
        verify_range = 2 * cap
    if c.separable_parts is None:
        raise ValueError("eta_search requires a separable sequence; "
                         "supply separable parts or use the lemma quantities directly")
    if verify_range > sum_horizon:
        raise ValueError("verify_range must not exceed sum_horizon")
    a, b = c.separable_parts
    H = max(sup_horizon, verify_range + 1, cap + 2)
    idx = np.arange(1, H + 1, dtype=np.int64)
    a_abs = np.abs(np.asarray(a.eval(idx), dtype=np.float64))
    b_abs = np.abs(np.asarray(b.eval(idx), dtype=np.float64))
    wa = idx.astype(np.float64) * a_abs          # m |a_m|
    wb = idx.astype(np.float64) * b_abs
    suffmax_wa = np.maximum.accumulate(wa[::-1])[::-1]
    suffmax_wb = np.maximum.accumulate(wb[::-1])[::-1]

    def weight_tail(s: SingleSequence) -> float | None:
        hint = s.decay_hint
        if hint is None or hint.p < 1.0:
            return None
        return hint.K * float(H + 1) ** (1.0 - hint.p)

    tail_wa, tail_wb = weight_tail(a), weight_tail(b)

    # suffix sums of |d2| for conditions (2)-(4)
    j2 = np.arange(1, sum_horizon + 1, dtype=np.int64)
    d2a = np.abs(np.asarray(a.eval(j2), dtype=np.float64)
                 - np.asarray(a.eval(j2 + 2), dtype=np.float64))
    d2b = np.abs(np.asarray(b.eval(j2), dtype=np.float64)
                 - np.asarray(b.eval(j2 + 2), dtype=np.float64))
    suff_d2a = np.concatenate([np.cumsum(d2a[::-1])[::-1], [0.0]])
    suff_d2b = np.concatenate([np.cumsum(d2b[::-1])[::-1], [0.0]])

    def d2_tail(s: SingleSequence) -> float | None:
        hint = s.decay_hint
        if hint is None:
            return None
        base = _tail_sum_beyond(sum_horizon, hint.p)
        return None if base is None else 2.0 * hint.K * base

    tail_d2a, tail_d2b = d2_tail(a), d2_tail(b)

    def cond1(eta: int) -> tuple[float, tuple[int, int], bool]:
        sa = float(suffmax_wa[eta])              # sup over m >= eta+1 of m|a_m|
        sb = float(suffmax_wb[eta])
        certified = tail_wa is not None and tail_wb is not None
        if certified:
            sa, sb = max(sa, tail_wa), max(sb, tail_wb)
        ma = eta + 1 + int(np.argmax(wa[eta:]))
        nb = eta + 1 + int(np.argmax(wb[eta:]))
        return sa * sb, (ma, nb), certified

    def conds234(m: int, n: int):
        sa = float(suff_d2a[m - 1])
        sb = float(suff_d2b[n - 1])
        sup_b = float(suffmax_wb[n - 1])
        sup_a = float(suffmax_wa[m - 1])
        cert = None not in (tail_d2a, tail_d2b, tail_wa, tail_wb)
        if cert:
            sa_u, sb_u = sa + tail_d2a, sb + tail_d2b
            sup_a_u, sup_b_u = max(sup_a, tail_wa), max(sup_b, tail_wb)
        else:
            sa_u, sb_u, sup_a_u, sup_b_u = sa, sb, sup_a, sup_b
        q2 = (m * sa_u) * (n * sb_u)
        q3 = m * sa_u * sup_b_u
        q4 = n * sb_u * sup_a_u
        return q2, q3, q4, cert

    bound2 = 16.0 * C * epsilon
    bound34 = 4.0 * C * epsilon

    def passes(eta: int):
        v1, w1, cert1 = cond1(eta)
        if v1 >= epsilon:
            return None
        pts = _test_points(eta, verify_range)
        worst = {"2": (-1.0, None), "3": (-1.0, None), "4": (-1.0, None)}
        cert_all = cert1
        for m in pts:
            for n in pts:
                q2, q3, q4, cert = conds234(m, n)
                cert_all = cert_all and cert
                if q2 >= bound2 or q3 >= bound34 or q4 >= bound34:
                    return None
                for key, q in (("2", q2), ("3", q3), ("4", q4)):
                    if q > worst[key][0]:
                        worst[key] = (q, (m, n))
        conds = (
            EtaCondition("mn|c_mn| < eps", v1, epsilon, epsilon - v1, w1, cert1),
            EtaCondition("weighted d22 tail < 16 C eps", worst["2"][0], bound2,
                         bound2 - worst["2"][0], worst["2"][1], cert_all),
            EtaCondition("row-sum sup tail < 4 C eps", worst["3"][0], bound34,
                         bound34 - worst["3"][0], worst["3"][1], cert_all),
            EtaCondition("col-sum sup tail < 4 C eps", worst["4"][0], bound34,
                         bound34 - worst["4"][0], worst["4"][1], cert_all),
        )
        return EtaSearchResult(eta=eta, epsilon=epsilon, C=C, cap=cap,
                               verify_range=verify_range,
                               tested_points=tuple(pts), conditions=conds)

    # condition (1) gives a cheap lower bound on eta: scan its sup once
    eta = max(1, lam)
    while eta <= cap and cond1(eta)[0] >= epsilon:
        eta += 1
    while eta <= cap:
        result = passes(eta)
        if result is not None:
            return result
        eta += 1
    raise EtaCapError(f"no eta found up to cap {cap} for epsilon {epsilon}")


@dataclass(frozen=True)
class Theorem7Result:
    """Sampled check of the closed-form uniform tail bound."""

    epsilon: float
    C: float
    eta: int
    bound: float
    worst_abs: float
    slack: float
    witness_rect: Rect | None
    witness_xy: tuple[float, float] | None
    n_rects: int


def theorem7_bound_check(c: CoefficientSequence, epsilon: float, eta: int, C: float,
                         probe: ProbeConfig) -> Theorem7Result:
    """Compare sampled |rectangle sums| with m, n > eta against the envelope.

    The envelope is ``(1 + 2 pi C + 2 pi + 1.5 pi^2 C + pi^2) eps``.
    Negative slack (worst observed minus envelope) means the bound held
    on every sampled rectangle and grid point.
    """
    bound = (1.0 + 2.0 * math.pi * C + 2.0 * math.pi
             + 1.5 * math.pi ** 2 * C + math.pi ** 2) * epsilon
    sup, wrect, wxy, n_rects = _probe_sup(c, 0, probe, min_start=eta + 1, per_pair=True)
    return Theorem7Result(epsilon=epsilon, C=C, eta=eta, bound=bound,
                          worst_abs=sup, slack=sup - bound,
                          witness_rect=wrect, witness_xy=wxy, n_rects=n_rects)


def remark2_divergence(schedule: tuple[int, ...] = (10, 100, 1000, 10000)) -> TailReport:
    """Partial sums of the residue-modulated preset at its divergence point.

    At ``x = y = 2 pi / 3`` the square partial sum over
    ``(1..3M+2) x (1..3M+2)`` factors into a perfect square and is
    bounded below by ``(sin(2 pi/3))^2 (sum_{l=0}^{M} 2/((3l+1) ln(3l+3)))^2``,
    which grows without bound.  The verdict is growing only when the
    values strictly increase and dominate the minorant at every scale.
    """
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or not schedule:
        raise ValueError("schedule must be strictly increasing and nonempty")
    if schedule[0] < 0:
        raise ValueError("scales must be >= 0")
    c = builtin("mod3_log_product")
    a, _ = c.separable_parts
    x0 = 2.0 * math.pi / 3.0
    values, bounds = [], []
    for M in schedule:
        J = 3 * M + 2
        j = np.arange(1, J + 1, dtype=np.int64)
        u = float(ksum(np.asarray(a.eval(j)) * np.sin(j * x0)))
        values.append(u * u)
        l = np.arange(0, M + 1, dtype=np.float64)
        minorant = float(ksum(2.0 / ((3.0 * l + 1.0) * np.log(3.0 * l + 3.0))))
        bounds.append(math.sin(x0) ** 2 * minorant ** 2)
    increasing = all(v2 > v1 for v1, v2 in zip(values, values[1:]))
    dominated = all(v >= lb for v, lb in zip(values, bounds))
    verdict = Verdict.GROWING if (increasing and dominated) else Verdict.INCONCLUSIVE
    return TailReport(schedule=tuple(schedule), values=tuple(values), verdict=verdict,
                      fit=loglog_slope(schedule, values),
                      bounded=tuple(True for _ in schedule),
                      reference_values=tuple(bounds))
