"""Majorant families used on the right-hand side of class inequalities.

Three families of row/column/double majorants are provided, all built
from block sums of ``|c|`` over dyadic-style windows ``M..2M``:

* family ``ONE``: an average of ``|c|`` over the fixed window
  ``floor(m/lambda)..ceil(lambda m)`` (no scan);
* family ``TWO``: a maximum of block sums over the bounded window
  ``b(m) <= M <= lambda b(m)`` for rows and columns, and an unbounded
  sup over ``M + N >= b(m+n)`` for the double version;
* family ``THREE``: an unbounded sup over ``M >= b(m)`` (rows/columns)
  or ``M + N >= b(m+n)`` (double).

Unbounded sups are scanned up to ``sup_horizon``.  When the sequence
carries a power-decay hint the scan is completed by a closed-form bound
on the unscanned tail; if that bound does not certify the scanned value
as the true sup, the result is flagged as truncated.

``rhs`` returns the majorant value *without* any class constant C; the
membership fitter divides observed left-hand sides by these values.

Index arithmetic convention: lower block limits round down and are
clamped to 1, upper limits round up.  Enlarging a right-hand-side block
only weakens the inequality under test, so this rounding is the
conservative direction.  All of it lives in :func:`averaging_window` and
:func:`compile_b`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .sequences import CoefficientSequence, SingleSequence, compile_expression
from .summing import ksum

__all__ = [
    "Family",
    "Axis",
    "MajorantFamily",
    "MajorantValue",
    "HorizonError",
    "averaging_window",
    "compile_b",
    "block_sum_row",
    "block_sum_col",
    "block_sum_double",
    "single_block_sum",
    "single_sup_scan",
    "single_window_sum",
    "double_sup_scan",
    "rhs",
]

# Dense double-sup scans build a (2H+1)^2 prefix table; cap its size.
_MAX_DENSE_CELLS = 2 * 10**7


class Family(Enum):
    ONE = "one"
    TWO = "two"
    THREE = "three"


class Axis(Enum):
    ROW = "row"
    COLUMN = "column"
    DOUBLE = "double"


class HorizonError(ValueError):
    """Raised when the scan horizon lies below the scan start."""


@dataclass(frozen=True)
class MajorantValue:
    """A majorant evaluation.

    ``value`` is the scanned (possibly truncated) majorant.  For
    unbounded sups, ``tail_bound`` bounds the unscanned region on the
    same scale as ``value`` when a decay hint permits one;
    ``truncated`` is True when the scan hit the horizon and the tail
    bound fails to certify ``value`` as the true sup.  ``argmax`` is the
    block start (or pair of starts) attaining the scanned maximum.
    """

    value: float
    truncated: bool = False
    tail_bound: float | None = None
    argmax: tuple | None = None


@dataclass(frozen=True)
class MajorantFamily:
    """Configuration of a majorant: family, axis, and scan parameters.

    ``b1``, ``b2``, ``b3`` are closed-form integer sequences (expressions
    in ``l``) steering the scan start for rows, columns, and the double
    threshold.  ``lam`` must be >= 2 for families ONE and TWO; family
    THREE ignores it apart from requiring >= 1.
    """

    family: Family
    axis: Axis
    lam: int = 2
    b1: str = "l"
    b2: str = "l"
    b3: str = "l"
    sup_horizon: int = 4096

    def __post_init__(self):
        if self.family in (Family.ONE, Family.TWO):
            if self.lam < 2:
                raise ValueError(f"family {self.family.value} needs lambda >= 2, got {self.lam}")
        elif self.lam < 1:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if self.sup_horizon < 1:
            raise ValueError("sup_horizon must be >= 1")
        for expr in (self.b1, self.b2, self.b3):
            compile_b(expr)  # raises early on bad expressions


@lru_cache(maxsize=None)
def compile_b(expr: str):
    """Compile a closed-form index sequence ``b(l)`` from an expression.

    Values are floored to ints and must be >= 1.
    """
    fn, _ = compile_expression(expr, ("l",))

    def b(l: int) -> int:
        val = float(fn(l=float(l)))
        if not math.isfinite(val):
            raise ValueError(f"b-sequence {expr!r} not finite at l={l}")
        iv = int(math.floor(val))
        if iv < 1:
            raise ValueError(f"b-sequence {expr!r} must be >= 1, got {iv} at l={l}")
        return iv

    return b


def averaging_window(m: int, lam: int) -> tuple[int, int]:
    """Window ``floor(m/lam)..ceil(lam*m)`` with the lower end clamped to 1."""
    return max(1, m // lam), int(math.ceil(lam * m))


# --- plain block sums (compensated) --------------------------------------

def block_sum_row(c: CoefficientSequence, M: int, n: int) -> float:
    """``sum_{j=M}^{2M} |c_{jn}|`` (M+1 terms)."""
    j = np.arange(M, 2 * M + 1, dtype=np.int64)
    return float(ksum(np.abs(c.eval(j, n))))


def block_sum_col(c: CoefficientSequence, m: int, N: int) -> float:
    """``sum_{k=N}^{2N} |c_{mk}|``."""
    k = np.arange(N, 2 * N + 1, dtype=np.int64)
    return float(ksum(np.abs(c.eval(m, k))))


def block_sum_double(c: CoefficientSequence, M: int, N: int) -> float:
    """``sum_{j=M}^{2M} sum_{k=N}^{2N} |c_{jk}|``."""
    j = np.arange(M, 2 * M + 1, dtype=np.int64)
    k = np.arange(N, 2 * N + 1, dtype=np.int64)
    return float(ksum(np.abs(c.eval(j[:, None], k[None, :]))))


def single_block_sum(a: SingleSequence, M: int) -> float:
    """``sum_{k=M}^{2M} |a_k|``."""
    k = np.arange(M, 2 * M + 1, dtype=np.int64)
    return float(ksum(np.abs(a.eval(k))))


def single_window_sum(a: SingleSequence, lo: int, hi: int) -> float:
    """``sum_{k=lo}^{hi} |a_k|``."""
    k = np.arange(lo, hi + 1, dtype=np.int64)
    return float(ksum(np.abs(a.eval(k))))


# --- scan machinery -------------------------------------------------------

def _abs_values_row(c: CoefficientSequence, n: int, j_lo: int, j_hi: int) -> np.ndarray:
    j = np.arange(j_lo, j_hi + 1, dtype=np.int64)
    return np.abs(np.asarray(c.eval(j, n), dtype=np.float64))


def _block_array(abs_vals: np.ndarray, lo: int, M_lo: int, M_hi: int) -> np.ndarray:
    """Block sums ``sum_{j=M}^{2M}`` for M in M_lo..M_hi.

    ``abs_vals`` holds ``|c_j|`` for j = lo..lo + len - 1 and must cover
    ``2*M_hi``.
    """
    cs = np.concatenate([[0.0], np.cumsum(abs_vals)])
    Ms = np.arange(M_lo, M_hi + 1, dtype=np.int64)
    return cs[2 * Ms - lo + 1] - cs[Ms - lo]


def _single_tail_bound(a: SingleSequence, horizon: int) -> float | None:
    """Bound on ``sup_{M > horizon} sum_{k=M}^{2M} |a_k|`` from the hint.

    ``sum_{k=M}^{2M} |a_k| <= K (M+1) M^{-p} <= 2 K M^{1-p}``, which is
    nonincreasing in M for p >= 1.
    """
    hint = a.decay_hint
    if hint is None or hint.p < 1.0:
        return None
    return 2.0 * hint.K * float(horizon + 1) ** (1.0 - hint.p)


def single_sup_scan(a: SingleSequence, start: int, horizon: int) -> MajorantValue:
    """``sup_{M >= start} sum_{k=M}^{2M} |a_k|`` scanned up to ``horizon``."""
    if horizon < start:
        raise HorizonError(f"horizon {horizon} below scan start {start}")
    k = np.arange(start, 2 * horizon + 1, dtype=np.int64)
    abs_vals = np.abs(np.asarray(a.eval(k), dtype=np.float64))
    blocks = _block_array(abs_vals, start, start, horizon)
    idx = int(np.argmax(blocks))
    sup = float(blocks[idx])
    tail = _single_tail_bound(a, horizon)
    truncated = tail is None or tail > sup
    return MajorantValue(value=sup, truncated=truncated, tail_bound=tail, argmax=(start + idx,))


def _row_tail_bound(c: CoefficientSequence, n: int, horizon: int) -> float | None:
    """Bound on row block sums past the horizon, at fixed column n."""
    if c.separable_parts is not None:
        a, b = c.separable_parts
        base = _single_tail_bound(a, horizon)
        if base is None:
            return None
        return base * float(abs(np.asarray(b.eval(n)).item()))
    hint = c.decay_hint
    if hint is None or hint.p < 1.0:
        return None
    return 2.0 * hint.K * float(n) ** (-hint.q) * float(horizon + 1) ** (1.0 - hint.p)


def _row_sup_scan(c: CoefficientSequence, n: int, start: int, horizon: int,
                  transpose: bool = False) -> MajorantValue:
    """Row sup scan; with ``transpose`` the roles of j and k swap."""
    if horizon < start:
        raise HorizonError(f"horizon {horizon} below scan start {start}")
    if transpose:
        cT = CoefficientSequence(
            name=c.name + ".T",
            eval=lambda j, k, _f=c.eval: _f(k, j),
            separable_parts=(c.separable_parts[1], c.separable_parts[0])
            if c.separable_parts is not None else None,
            decay_hint=None if c.decay_hint is None else type(c.decay_hint)(
                p=c.decay_hint.q, q=c.decay_hint.p, K=c.decay_hint.K),
        )
        return _row_sup_scan(cT, n, start, horizon)
    abs_vals = _abs_values_row(c, n, start, 2 * horizon)
    blocks = _block_array(abs_vals, start, start, horizon)
    idx = int(np.argmax(blocks))
    sup = float(blocks[idx])
    tail = _row_tail_bound(c, n, horizon)
    truncated = tail is None or tail > sup
    return MajorantValue(value=sup, truncated=truncated, tail_bound=tail, argmax=(start + idx,))


def _double_tail_bound(c: CoefficientSequence, horizon: int) -> float | None:
    """Bound on double block sums with ``max(M, N) > horizon``.

    Blocks satisfy ``sum sum |c| <= 4 K M^{1-p} N^{1-q}``; for p, q >= 1
    the factor at the small index is at most 1, so blocks past the
    horizon in either coordinate are bounded by
    ``4 K (horizon+1)^{1-min(p,q)}``-style terms.
    """
    if c.separable_parts is not None:
        a, b = c.separable_parts
        ha, hb = a.decay_hint, b.decay_hint
        if ha is None or hb is None or ha.p < 1.0 or hb.p < 1.0:
            return None
        full_a = 2.0 * ha.K          # sup over all M >= 1 of 2 K M^(1-p), p >= 1
        full_b = 2.0 * hb.K
        tail_a = _single_tail_bound(a, horizon)
        tail_b = _single_tail_bound(b, horizon)
        return max(tail_a * full_b, full_a * tail_b)
    hint = c.decay_hint
    if hint is None or hint.p < 1.0 or hint.q < 1.0:
        return None
    far = float(horizon + 1)
    return max(4.0 * hint.K * far ** (1.0 - hint.p), 4.0 * hint.K * far ** (1.0 - hint.q))


def double_sup_scan(c: CoefficientSequence, threshold: int, horizon: int) -> MajorantValue:
    """``sup over M + N >= threshold`` of double block sums, scanned on
    ``1 <= M, N <= horizon``.
    """
    if threshold > 2 * horizon:
        raise HorizonError(f"horizon {horizon} below scan start: threshold {threshold} unreachable")
    if c.separable_parts is not None:
        a, b = c.separable_parts
        ja = np.arange(1, 2 * horizon + 1, dtype=np.int64)
        fa = _block_array(np.abs(np.asarray(a.eval(ja), dtype=np.float64)), 1, 1, horizon)
        fb = _block_array(np.abs(np.asarray(b.eval(ja), dtype=np.float64)), 1, 1, horizon)
        suff_fa = np.maximum.accumulate(fa[::-1])[::-1]
        Ns = np.arange(1, horizon + 1, dtype=np.int64)
        M_lo = np.clip(threshold - Ns, 1, horizon)
        cand = fb * suff_fa[M_lo - 1]
        nidx = int(np.argmax(cand))
        sup = float(cand[nidx])
        # recover the M attaining the suffix max for the witness
        lo = int(M_lo[nidx])
        midx = lo + int(np.argmax(fa[lo - 1:]))
        argmax = (midx, nidx + 1)
    else:
        side = 2 * horizon + 1
        if side * side > _MAX_DENSE_CELLS:
            raise ValueError(
                "dense double scan too large; lower sup_horizon or use a separable sequence")
        j = np.arange(1, 2 * horizon + 1, dtype=np.int64)
        grid = np.abs(np.asarray(c.eval(j[:, None], j[None, :]), dtype=np.float64))
        pref = np.zeros((len(j) + 1, len(j) + 1))
        np.cumsum(grid, axis=0, out=pref[1:, 1:])
        np.cumsum(pref[1:, 1:], axis=1, out=pref[1:, 1:])
        Ms = np.arange(1, horizon + 1, dtype=np.int64)
        blocks = (pref[2 * Ms, :][:, 2 * Ms] - pref[Ms - 1, :][:, 2 * Ms]
                  - pref[2 * Ms, :][:, Ms - 1] + pref[Ms - 1, :][:, Ms - 1])
        mask = (Ms[:, None] + Ms[None, :]) >= threshold
        blocks = np.where(mask, blocks, -np.inf)
        flat = int(np.argmax(blocks))
        mi, ni = divmod(flat, horizon)
        sup = float(blocks[mi, ni])
        argmax = (mi + 1, ni + 1)
    tail = _double_tail_bound(c, horizon)
    truncated = tail is None or tail > sup
    return MajorantValue(value=sup, truncated=truncated, tail_bound=tail, argmax=argmax)


def _window_row_sum(c: CoefficientSequence, n: int, lo: int, hi: int) -> float:
    j = np.arange(lo, hi + 1, dtype=np.int64)
    return float(ksum(np.abs(c.eval(j, n))))


def _window_col_sum(c: CoefficientSequence, m: int, lo: int, hi: int) -> float:
    k = np.arange(lo, hi + 1, dtype=np.int64)
    return float(ksum(np.abs(c.eval(m, k))))


def _window_double_sum(c: CoefficientSequence, jlo: int, jhi: int, klo: int, khi: int) -> float:
    if c.separable_parts is not None:
        a, b = c.separable_parts
        return single_window_sum(a, jlo, jhi) * single_window_sum(b, klo, khi)
    step = max(1, (1 << 22) // max(1, khi - klo + 1))
    k = np.arange(klo, khi + 1, dtype=np.int64)
    parts = []
    for j0 in range(jlo, jhi + 1, step):
        j = np.arange(j0, min(j0 + step, jhi + 1), dtype=np.int64)
        parts.append(ksum(np.abs(c.eval(j[:, None], k[None, :]))))
    return float(ksum(np.asarray(parts)))


def _bounded_max_scan(c: CoefficientSequence, fixed: int, M_lo: int, M_hi: int,
                      transpose: bool = False) -> tuple[float, int]:
    """Max of block sums over the bounded window M_lo..M_hi.

    ``fixed`` is the frozen index: the column for row blocks, the row
    for column blocks (``transpose=True``).
    """
    if transpose:
        vals = [block_sum_col(c, fixed, N) for N in range(M_lo, M_hi + 1)]
    else:
        vals = [block_sum_row(c, M, fixed) for M in range(M_lo, M_hi + 1)]
    arr = np.asarray(vals)
    idx = int(np.argmax(arr))
    return float(arr[idx]), M_lo + idx


# --- the majorant dispatcher ----------------------------------------------

def rhs(c: CoefficientSequence, fam: MajorantFamily, m: int, n: int) -> MajorantValue:
    """Evaluate the majorant of ``fam`` at (m, n), without the class constant.

    Row majorants carry the 1/m scale, column majorants 1/n, double
    majorants 1/(m n).  Callers enforce the per-axis domain rules
    (``m >= lambda`` for rows of families ONE/TWO, and so on).
    """
    if m < 1 or n < 1:
        raise ValueError("indices must be >= 1")
    fam_b1 = compile_b(fam.b1)
    fam_b2 = compile_b(fam.b2)
    fam_b3 = compile_b(fam.b3)

    if fam.family is Family.ONE:
        if fam.axis is Axis.ROW:
            lo, hi = averaging_window(m, fam.lam)
            return MajorantValue(value=_window_row_sum(c, n, lo, hi) / m)
        if fam.axis is Axis.COLUMN:
            lo, hi = averaging_window(n, fam.lam)
            return MajorantValue(value=_window_col_sum(c, m, lo, hi) / n)
        jlo, jhi = averaging_window(m, fam.lam)
        klo, khi = averaging_window(n, fam.lam)
        return MajorantValue(value=_window_double_sum(c, jlo, jhi, klo, khi) / (m * n))

    if fam.family is Family.TWO:
        if fam.axis is Axis.ROW:
            start = fam_b1(m)
            sup, arg = _bounded_max_scan(c, n, start, fam.lam * start)
            return MajorantValue(value=sup / m, argmax=(arg,))
        if fam.axis is Axis.COLUMN:
            start = fam_b2(n)
            sup, arg = _bounded_max_scan(c, m, start, fam.lam * start, transpose=True)
            return MajorantValue(value=sup / n, argmax=(arg,))
        scan = double_sup_scan(c, fam_b3(m + n), fam.sup_horizon)
        return MajorantValue(value=scan.value / (m * n), truncated=scan.truncated,
                             tail_bound=None if scan.tail_bound is None
                             else scan.tail_bound / (m * n),
                             argmax=scan.argmax)

    # family THREE
    if fam.axis is Axis.ROW:
        scan = _row_sup_scan(c, n, fam_b1(m), fam.sup_horizon)
        scale = m
    elif fam.axis is Axis.COLUMN:
        scan = _row_sup_scan(c, m, fam_b2(n), fam.sup_horizon, transpose=True)
        scale = n
    else:
        scan = double_sup_scan(c, fam_b3(m + n), fam.sup_horizon)
        scale = m * n
    return MajorantValue(value=scan.value / scale, truncated=scan.truncated,
                         tail_bound=None if scan.tail_bound is None else scan.tail_bound / scale,
                         argmax=scan.argmax)
