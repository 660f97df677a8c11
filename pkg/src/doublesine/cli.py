"""Command line front end: config-driven experiments with JSON/CSV reports.

Every subcommand resolves its options from three layers with strict
precedence: explicit command line flags, then an INI config file
(``--config``), then built-in defaults.  The fully resolved option set
is recorded in the JSON report so a run can be reproduced from its own
output.  Exit status: 0 when all asserted verdicts pass, 1 on a
numerical verdict failure (the witness is printed), 2 on a config or
schema violation.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

import numpy as np

from .convergence import (
    EtaCapError,
    ProbeConfig,
    Verdict,
    classify_probe,
    eta_search,
    interior_grid,
    lemma1_quantity,
    lemma2_quantities,
    lemma3_check,
    remark2_divergence,
    theorem7_bound_check,
    uniform_tail_trace,
)
from .differences import delta_r, delta_rr
from .kernels import (
    Rect,
    SingularityError,
    assert_admissible,
    kernel_bound_check,
    rect_sum_direct,
    rect_sum_parts,
    rect_sum_separable,
    row_sum_by_parts,
)
from .majorants import Axis, Family, MajorantFamily
from .membership import (
    SingleClass,
    check_condition_22,
    check_membership,
    check_single_membership,
)
from .reports import SCHEMA_VERSION, to_jsonable, write_csv, write_json
from .sequences import (
    BUILTIN_NAMES,
    CoefficientSequence,
    ExpressionError,
    SingleSequence,
    builtin,
    from_expression,
    from_table,
    parse_sequence_file,
    single_from_expression,
    single_from_values,
)
from .summing import ksum

__all__ = ["main"]


class ConfigError(ValueError):
    """Invalid flag/config combination; maps to exit status 2."""


# Config twin section for each flag destination; flags not listed here
# live in the [cli] section.
_FLAG_SECTIONS = {
    "preset": "sequences",
    "p": "sequences",
    "q": "sequences",
    "expr": "sequences",
    "seq_file": "sequences",
    "seq_name": "sequences",
    "family": "majorants",
    "lam": "majorants",
    "b1": "majorants",
    "b2": "majorants",
    "b3": "majorants",
    "b": "majorants",
    "sup_horizon": "majorants",
    "r": "membership",
    "grid": "membership",
    "max_row_c": "membership",
    "max_col_c": "membership",
    "max_double_c": "membership",
    "max_c": "membership",
    "single_class": "membership",
    "gm_beta": "membership",
    "horizon": "membership",
    "s_max": "membership",
    "decay_factor": "membership",
    "rect": "kernels_summation",
    "x": "kernels_summation",
    "y": "kernels_summation",
    "method": "kernels_summation",
    "tol": "kernels_summation",
    "k_max": "kernels_summation",
    "kernel_points": "kernels_summation",
    "cases_1d": "kernels_summation",
    "cases_2d": "kernels_summation",
    "table_size": "kernels_summation",
    "delta_grid": "kernels_summation",
    "schedule": "convergence",
    "expect": "convergence",
    "thresholds": "convergence",
    "grid_points": "convergence",
    "rect_cap": "convergence",
    "doublings": "convergence",
    "min_start": "convergence",
    "band": "convergence",
    "decay_ratio": "convergence",
    "which": "convergence",
    "epsilon": "convergence",
    "c_const": "convergence",
    "cap": "convergence",
    "verify_range": "convergence",
    "sum_horizon": "convergence",
    "cross_check_max": "convergence",
    "cross_check_tol": "convergence",
}

_COMMANDS = (
    "check-class",
    "condition-22",
    "partial-sum",
    "uniform-tail",
    "lemma",
    "eta",
    "remark2",
    "verify-identities",
)


# --- option parsing helpers --------------------------------------------------

def _parse_int_list(spec: str, what: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(tok) for tok in spec.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad {what} {spec!r}: {exc}") from None
    if not vals:
        raise ConfigError(f"empty {what} {spec!r}")
    return vals


def _dyadic_values(limit: int, start: int = 2) -> tuple[int, ...]:
    if limit < start:
        raise ConfigError(f"dyadic grid limit {limit} below start {start}")
    vals, v = [], start
    while v <= limit:
        vals.append(v)
        v *= 2
    return tuple(vals)


def _parse_grid_values(spec: str) -> tuple[int, ...]:
    """Grid of scales: ``dyadic:LIMIT`` or a comma list of integers."""
    if spec.startswith("dyadic:"):
        return _dyadic_values(int(spec.split(":", 1)[1]))
    return _parse_int_list(spec, "grid")


def _parse_grid_pairs(spec: str) -> tuple[tuple[int, int], ...]:
    """Grid of (m, n) pairs.

    ``dyadic:LIMIT`` takes all pairs of powers of two up to LIMIT; a
    comma list of integers takes all cross pairs; ``MxN`` entries list
    explicit pairs (e.g. ``2x2,4x8``).
    """
    if "x" in spec:
        pairs = []
        for tok in spec.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                m_s, n_s = tok.split("x")
                pairs.append((int(m_s), int(n_s)))
            except ValueError:
                raise ConfigError(f"bad grid pair {tok!r}; expected MxN") from None
        if not pairs:
            raise ConfigError(f"empty grid {spec!r}")
        return tuple(pairs)
    vals = _parse_grid_values(spec)
    return tuple((m, n) for m in vals for n in vals)


def _parse_rect(spec: str) -> Rect:
    """Rectangle spec ``m:Mxn:N``, e.g. ``1:10x1:10``."""
    try:
        j_part, k_part = spec.split("x")
        m_s, M_s = j_part.split(":")
        n_s, N_s = k_part.split(":")
        return Rect(int(m_s), int(M_s), int(n_s), int(N_s))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad rect {spec!r}; expected m:Mxn:N: {exc}") from None


def _parse_preset(args) -> CoefficientSequence:
    name = args.preset
    p = args.p if args.p is not None else 1.0
    q = args.q if args.q is not None else 1.0
    if "(" in name:
        if not name.endswith(")"):
            raise ConfigError(f"bad preset spec {name!r}")
        base, arg_s = name[:-1].split("(", 1)
        parts = [tok.strip() for tok in arg_s.split(",") if tok.strip()]
        try:
            if len(parts) == 1:
                p = q = float(parts[0])
            elif len(parts) == 2:
                p, q = float(parts[0]), float(parts[1])
            else:
                raise ValueError("expected one or two exponents")
        except ValueError as exc:
            raise ConfigError(f"bad preset arguments in {name!r}: {exc}") from None
        name = base.strip()
    if name not in BUILTIN_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(BUILTIN_NAMES)}")
    try:
        return builtin(name, p=p, q=q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _resolve_sequence(args) -> CoefficientSequence:
    """Sequence from --expr / --seq-file / --preset (first match wins)."""
    chosen = [k for k in ("expr", "seq_file", "preset") if getattr(args, k, None)]
    if len(chosen) > 1:
        raise ConfigError(f"choose one sequence source, got {', '.join(chosen)}")
    if args.expr:
        try:
            return from_expression("expr", args.expr)
        except ExpressionError as exc:
            raise ConfigError(str(exc)) from None
    if args.seq_file:
        table = _load_sequence_file(args)
        seq = table[args.seq_name]
        if not isinstance(seq, CoefficientSequence):
            raise ConfigError(f"{args.seq_name!r} is a single sequence; "
                              "this command needs a double sequence")
        return seq
    if args.preset:
        return _parse_preset(args)
    raise ConfigError("no sequence given; use --preset, --expr, or --seq-file")


def _resolve_single(args) -> SingleSequence:
    """Single sequence; presets contribute their first separable factor."""
    if args.expr:
        try:
            return single_from_expression("expr", args.expr)
        except ExpressionError as exc:
            raise ConfigError(str(exc)) from None
    if args.seq_file:
        table = _load_sequence_file(args)
        seq = table[args.seq_name]
        if not isinstance(seq, SingleSequence):
            raise ConfigError(f"{args.seq_name!r} is a double sequence; "
                              "single-class checks need a single sequence")
        return seq
    if args.preset:
        c = _parse_preset(args)
        if c.separable_parts is None:
            raise ConfigError(f"preset {args.preset!r} has no single-sequence factor")
        return c.separable_parts[0]
    raise ConfigError("no sequence given; use --preset, --expr, or --seq-file")


def _load_sequence_file(args) -> dict:
    try:
        table = parse_sequence_file(args.seq_file)
    except (OSError, ExpressionError) as exc:
        raise ConfigError(f"cannot load sequence file {args.seq_file!r}: {exc}") from None
    if not table:
        raise ConfigError(f"sequence file {args.seq_file!r} defines nothing")
    if args.seq_name is None:
        if len(table) == 1:
            args.seq_name = next(iter(table))
        else:
            raise ConfigError(
                f"sequence file defines {sorted(table)}; pick one with --seq-name")
    if args.seq_name not in table:
        raise ConfigError(
            f"no sequence {args.seq_name!r} in file; available: {sorted(table)}")
    return table


def _expect_matches(verdict: Verdict, expect: str) -> bool:
    if expect == "not-decaying":
        return verdict is not Verdict.DECAYING
    return verdict.value == expect


_EXPECT_CHOICES = ("decaying", "flat", "growing", "inconclusive", "not-decaying")


# --- subcommand handlers ------------------------------------------------------
# Each returns (results dict, csv header+rows or None, passed, witness lines).

def _run_check_class(args):
    if args.single_class is not None:
        return _run_check_class_single(args)
    c = _resolve_sequence(args)
    fam = MajorantFamily(Family(args.family), Axis.ROW, lam=args.lam,
                         b1=args.b1, b2=args.b2, b3=args.b3,
                         sup_horizon=args.sup_horizon)
    grid = _parse_grid_pairs(args.grid)
    report = check_membership(c, args.r, fam, grid)
    # Truncated sup scans understate the majorant and so inflate the
    # fitted constant: a cap that holds anyway is certified, while a cap
    # exceeded only at a truncated point is undecided at this horizon.
    passed, witness = True, []
    for label, fitted, cap in (("row", report.fitted_C_row, args.max_row_c),
                               ("column", report.fitted_C_col, args.max_col_c),
                               ("double", report.fitted_C_double, args.max_double_c)):
        if cap is None:
            continue
        if fitted is None:
            passed = False
            witness.append(f"{label} axis: no admissible grid points, cannot assert C <= {cap}")
        elif fitted > cap:
            passed = False
            w = report.worst_witness[label]
            worst_truncated = any(row.axis == label and row.truncated
                                  and row.ratio == fitted for row in report.rows)
            note = ("; worst scan truncated, raise --sup-horizon to decide"
                    if worst_truncated else "")
            witness.append(f"{label} axis: fitted C = {fitted!r} exceeds {cap!r} at {w}{note}")
    results = {
        "sequence": c.name,
        "r": report.r,
        "family": args.family,
        "lam": args.lam,
        "fitted_C_row": report.fitted_C_row,
        "fitted_C_col": report.fitted_C_col,
        "fitted_C_double": report.fitted_C_double,
        "growth_fit": report.growth_fit,
        "worst_witness": report.worst_witness,
        "truncated": report.truncation_flags,
        "grid_size": len(report.grid),
    }
    header = ["m", "n", "axis", "lhs", "rhs", "ratio", "truncated"]
    rows = [[row.m, row.n, row.axis, row.lhs, row.rhs, row.ratio, row.truncated]
            for row in report.rows]
    return results, (header, rows), passed, witness


def _run_check_class_single(args):
    a = _resolve_single(args)
    try:
        klass = SingleClass(args.single_class)
    except ValueError:
        raise ConfigError(f"unknown single class {args.single_class!r}") from None
    grid = _parse_grid_values(args.grid)
    beta = args.gm_beta if klass is SingleClass.GM else None
    try:
        report = check_single_membership(a, klass, grid, lam=args.lam, r=args.r,
                                         horizon=args.horizon, b=args.b, beta=beta,
                                         target_C=args.max_c)
    except (ValueError, ExpressionError) as exc:
        raise ConfigError(str(exc)) from None
    passed, witness = True, []
    if args.max_c is not None and report.verdict != "pass":
        passed = False
        witness.append(f"single class {klass.value}: verdict {report.verdict!r} "
                       f"against C <= {args.max_c!r}; worst {report.worst_witness}")
    results = {
        "sequence": a.name,
        "single_class": klass.value,
        "r": report.r,
        "lam": args.lam,
        "fitted_C": report.fitted_C,
        "worst_witness": report.worst_witness,
        "truncated": report.truncation_flags,
        "verdict": report.verdict,
        "grid_size": len(report.grid),
    }
    header = ["n", "lhs", "rhs", "ratio", "truncated"]
    rows = [[row.m, row.lhs, row.rhs, row.ratio, row.truncated] for row in report.rows]
    return results, (header, rows), passed, witness


def _run_condition_22(args):
    c = _resolve_sequence(args)
    schedule = (_parse_int_list(args.schedule, "schedule")
                if args.schedule is not None else None)
    try:
        report = check_condition_22(c, S=args.s_max, schedule=schedule,
                                    decay_factor=args.decay_factor)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    passed, witness = True, []
    if args.expect is not None and not _expect_matches(report.verdict, args.expect):
        passed = False
        witness.append(f"expected {args.expect!r}, got {report.verdict.value!r}; "
                       f"values {list(report.values)}")
    results = {
        "sequence": c.name,
        "schedule": list(report.schedule),
        "values": list(report.values),
        "verdict": report.verdict.value,
        "fit": report.fit,
        "expect": args.expect,
    }
    bounded = report.bounded or tuple(True for _ in report.schedule)
    header = ["scale", "value", "bounded_flag"]
    rows = [[s, v, b] for s, v, b in zip(report.schedule, report.values, bounded)]
    return results, (header, rows), passed, witness


def _require(args, *dests: str) -> None:
    """Reject flags that neither the command line nor the config supplied."""
    missing = [d for d in dests if getattr(args, d) is None]
    if missing:
        flags = ", ".join("--" + d.replace("_", "-") for d in missing)
        raise ConfigError(f"missing required option(s): {flags}")


def _run_partial_sum(args):
    _require(args, "rect", "x", "y")
    c = _resolve_sequence(args)
    rect = _parse_rect(args.rect)
    methods = [args.method] if args.method != "all" else ["direct", "parts", "separable"]
    if "separable" in methods and c.separable_parts is None:
        if args.method == "separable":
            raise ConfigError(f"sequence {c.name!r} is not separable")
        methods.remove("separable")
    if "parts" in methods:
        try:
            assert_admissible(args.x, args.r)
            assert_admissible(args.y, args.r)
        except SingularityError as exc:
            raise ConfigError(str(exc)) from None
    values = {}
    for method in methods:
        if method == "direct":
            v = rect_sum_direct(c, rect, args.x, args.y)
        elif method == "parts":
            v = rect_sum_parts(c, rect, args.x, args.y, r=args.r)
        else:
            v = rect_sum_separable(c, rect, args.x, args.y)
        values[method] = complex(v) if isinstance(v, complex) else float(v)
    ref = values.get("direct", next(iter(values.values())))
    max_diff = max((abs(v - ref) for v in values.values()), default=0.0)
    limit = args.tol * (1.0 + abs(ref))
    passed, witness = True, []
    if max_diff > limit:
        passed = False
        witness.append(f"methods disagree by {max_diff!r} > {limit!r} on "
                       f"rect {args.rect} at (x, y) = ({args.x!r}, {args.y!r}): {values}")
    results = {
        "sequence": c.name,
        "rect": {"m": rect.m, "M": rect.M, "n": rect.n, "N": rect.N},
        "x": args.x,
        "y": args.y,
        "r": args.r,
        "values": values,
        "max_abs_diff": max_diff,
        "tolerance": args.tol,
    }
    header = ["method", "value"]
    rows = [[method, values[method]] for method in methods]
    return results, (header, rows), passed, witness


def _probe_from_args(args) -> ProbeConfig:
    try:
        return ProbeConfig(
            xy_grid=interior_grid(args.grid_points),
            thresholds=_parse_int_list(args.thresholds, "thresholds"),
            rect_cap=args.rect_cap,
            min_start=args.min_start,
            doublings=args.doublings,
            band=args.band,
            decay_ratio=args.decay_ratio,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _run_uniform_tail(args):
    c = _resolve_sequence(args)
    probe = _probe_from_args(args)
    report, trace = uniform_tail_trace(c, probe)
    passed, witness = True, []
    if args.expect is not None and not _expect_matches(report.verdict, args.expect):
        passed = False
        worst = max(trace, key=lambda row: row.abs_sum)
        witness.append(f"expected {args.expect!r}, got {report.verdict.value!r}; "
                       f"worst |rect sum| {worst.abs_sum!r} at rect "
                       f"[{worst.m}:{worst.M}]x[{worst.n}:{worst.N}], "
                       f"(x, y) = ({worst.x!r}, {worst.y!r})")
    results = {
        "sequence": c.name,
        "thresholds": list(report.schedule),
        "values": list(report.values),
        "verdict": report.verdict.value,
        "fit": report.fit,
        "expect": args.expect,
        "grid_points": args.grid_points,
        "rect_cap": args.rect_cap,
    }
    header = ["m0", "x", "y", "m", "M", "n", "N", "abs_sum"]
    rows = [[t.threshold, t.x, t.y, t.m, t.M, t.n, t.N, t.abs_sum] for t in trace]
    return results, (header, rows), passed, witness


def _run_lemma(args):
    _require(args, "which")
    c = _resolve_sequence(args)
    if args.which in (1, 2):
        return _run_lemma_decay(args, c)
    return _run_lemma3(args, c)


def _run_lemma_decay(args, c):
    schedule = _parse_int_list(args.schedule, "schedule")
    series: dict[str, list] = {}
    if args.which == 1:
        ms = [(lemma1_quantity(c, m, m, horizon=args.sum_horizon),) for m in schedule]
        series["mixed_tail"] = [q[0] for q in ms]
    else:
        pairs = [lemma2_quantities(c, m, m, sup_horizon=args.sup_horizon,
                                   sum_horizon=args.sum_horizon) for m in schedule]
        series["row_tail"] = [qa for qa, _ in pairs]
        series["col_tail"] = [qb for _, qb in pairs]
    verdicts = {}
    passed, witness = True, []
    for name, quantities in series.items():
        values = [q.upper for q in quantities]
        verdict = classify_probe(values, band=args.band, decay_ratio=args.decay_ratio)
        verdicts[name] = verdict.value
        if args.expect is not None and not _expect_matches(verdict, args.expect):
            passed = False
            witness.append(f"{name}: expected {args.expect!r}, got {verdict.value!r}; "
                           f"values {values}")
    results = {
        "sequence": c.name,
        "which": args.which,
        "schedule": list(schedule),
        "series": {name: [q.upper for q in qs] for name, qs in series.items()},
        "bounded": {name: [q.bounded for q in qs] for name, qs in series.items()},
        "verdicts": verdicts,
        "expect": args.expect,
    }
    header = ["scale", "value", "bounded_flag"]
    rows = []
    for name in sorted(series):
        rows.extend([s, q.upper, q.bounded] for s, q in zip(schedule, series[name]))
    return results, (header, rows), passed, witness


def _fit_double_class_constant(c, args, grid) -> float:
    fam = MajorantFamily(Family.TWO, Axis.ROW, lam=args.lam,
                         b1=args.b1, b2=args.b2, b3=args.b3,
                         sup_horizon=args.sup_horizon)
    report = check_membership(c, 2, fam, grid)
    fitted = [v for v in (report.fitted_C_row, report.fitted_C_col,
                          report.fitted_C_double) if v is not None]
    if not fitted or not all(math.isfinite(v) for v in fitted):
        raise ConfigError("cannot fit a class constant on this grid; pass --c-const")
    return max(fitted)


def _run_lemma3(args, c):
    grid = [(m, n) for m, n in _parse_grid_pairs(args.grid)
            if m >= args.lam and n >= args.lam]
    if not grid:
        raise ConfigError(f"no grid points with m, n >= lambda = {args.lam}")
    C = args.c_const if args.c_const is not None else _fit_double_class_constant(c, args, grid)
    rows_out, results_rows = [], []
    passed, witness = True, []
    min_slack, min_at = math.inf, None
    for m, n in grid:
        try:
            res = lemma3_check(c, C, args.lam, m, n, b1=args.b1, b2=args.b2,
                               b3=args.b3, sup_horizon=args.sup_horizon)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        rows_out.append([res.m, res.n, res.lhs, res.rhs, res.slack, res.truncated])
        results_rows.append({"m": res.m, "n": res.n, "lhs": res.lhs,
                             "rhs": res.rhs, "slack": res.slack,
                             "truncated": res.truncated})
        if res.slack < min_slack:
            min_slack, min_at = res.slack, (res.m, res.n)
        if res.slack < 0.0:
            passed = False
            witness.append(f"sandwich violated at (m, n) = ({res.m}, {res.n}): "
                           f"lhs {res.lhs!r} > rhs {res.rhs!r}")
    results = {
        "sequence": c.name,
        "which": 3,
        "C": C,
        "lam": args.lam,
        "min_slack": min_slack,
        "min_slack_at": list(min_at) if min_at else None,
        "points": results_rows,
    }
    header = ["m", "n", "lhs", "rhs", "slack", "truncated"]
    return results, (header, rows_out), passed, witness


def _run_eta(args):
    _require(args, "epsilon", "c_const")
    c = _resolve_sequence(args)
    probe = _probe_from_args(args)
    passed, witness = True, []
    try:
        found = eta_search(c, epsilon=args.epsilon, C=args.c_const, lam=args.lam,
                           cap=args.cap, verify_range=args.verify_range,
                           sup_horizon=args.sup_horizon, sum_horizon=args.sum_horizon)
    except EtaCapError as exc:
        witness.append(str(exc))
        results = {
            "sequence": c.name,
            "epsilon": args.epsilon,
            "C": args.c_const,
            "eta": None,
            "error": str(exc),
        }
        return results, None, False, witness
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    t7 = theorem7_bound_check(c, args.epsilon, found.eta, args.c_const, probe)
    if t7.slack >= 0.0:
        passed = False
        witness.append(f"uniform envelope violated: worst |rect sum| {t7.worst_abs!r} "
                       f">= bound {t7.bound!r} at rect {t7.witness_rect} and "
                       f"(x, y) = {t7.witness_xy}")
    results = {
        "sequence": c.name,
        "epsilon": args.epsilon,
        "C": args.c_const,
        "eta": found.eta,
        "cap": found.cap,
        "verify_range": found.verify_range,
        "tested_points": list(found.tested_points),
        "conditions": [
            {"name": cond.name, "worst": cond.worst, "bound": cond.bound,
             "margin": cond.margin, "witness": list(cond.witness),
             "certified": cond.certified}
            for cond in found.conditions
        ],
        "envelope_bound": t7.bound,
        "worst_abs": t7.worst_abs,
        "slack": t7.slack,
        "witness_rect": None if t7.witness_rect is None else
            {"m": t7.witness_rect.m, "M": t7.witness_rect.M,
             "n": t7.witness_rect.n, "N": t7.witness_rect.N},
        "witness_xy": None if t7.witness_xy is None else list(t7.witness_xy),
        "n_rects": t7.n_rects,
    }
    header = ["condition", "worst", "bound", "margin", "certified"]
    rows = [[cond.name, cond.worst, cond.bound, cond.margin, cond.certified]
            for cond in found.conditions]
    return results, (header, rows), passed, witness


def _run_remark2(args):
    schedule = _parse_int_list(args.schedule, "schedule")
    try:
        report = remark2_divergence(schedule=schedule)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    passed, witness = True, []
    if report.verdict is not Verdict.GROWING:
        passed = False
        witness.append(f"divergence run verdict {report.verdict.value!r}; values "
                       f"{list(report.values)} vs lower bounds "
                       f"{list(report.reference_values or ())}")
    cross_checks = []
    c = builtin("mod3_log_product")
    x0 = 2.0 * math.pi / 3.0
    for M, product_value in zip(report.schedule, report.values):
        if M > args.cross_check_max:
            continue
        J = 3 * M + 2
        direct = float(rect_sum_direct(c, Rect(1, J, 1, J), x0, x0))
        err = abs(direct - product_value)
        limit = args.cross_check_tol * (1.0 + abs(direct))
        cross_checks.append({"scale": M, "direct": direct,
                             "product": product_value, "abs_diff": err})
        if err > limit:
            passed = False
            witness.append(f"direct vs factored mismatch at scale {M}: "
                           f"{direct!r} vs {product_value!r} (diff {err!r})")
    results = {
        "sequence": c.name,
        "x": x0,
        "y": x0,
        "schedule": list(report.schedule),
        "values": list(report.values),
        "lower_bounds": list(report.reference_values or ()),
        "verdict": report.verdict.value,
        "cross_checks": cross_checks,
    }
    header = ["scale", "value", "bounded_flag"]
    rows = [[s, v, True] for s, v in zip(report.schedule, report.values)]
    return results, (header, rows), passed, witness


# --- randomized identity checks ----------------------------------------------

_SAFETY_GAP = 0.05  # stay this far from singular abscissae when sampling x


def _sample_x(rng: np.random.Generator, r: int) -> float:
    """Uniform x in (gap, pi - gap), rejecting singular bands of step r."""
    while True:
        x = float(rng.uniform(_SAFETY_GAP, math.pi - _SAFETY_GAP))
        singular = (abs(x - 2.0 * l * math.pi / r) < _SAFETY_GAP
                    for l in range(0, r + 1))
        if not any(singular):
            return x


def _identity_row_sums(rng: np.random.Generator, cases: int, tol: float):
    worst, worst_case = 0.0, None
    failures = 0
    for i in range(cases):
        r = int(rng.integers(1, 4))
        n = int(rng.integers(1, 21))
        length = int(rng.integers(1, 65))
        m = n + length - 1
        values = rng.uniform(-1.0, 1.0, size=m + r)
        a = single_from_values(f"case{i}", values)
        x = _sample_x(rng, r)
        k = np.arange(n, m + 1, dtype=np.int64)
        direct = float(ksum(values[k - 1] * np.sin(k * x)))
        parts = float(row_sum_by_parts(a, n, m, r, x))
        rel = abs(parts - direct) / (1.0 + abs(direct))
        if rel > worst:
            worst, worst_case = rel, {"case": i, "r": r, "n": n, "m": m, "x": x}
        if rel > tol:
            failures += 1
    return {"cases": cases, "failures": failures, "worst_rel_err": worst,
            "worst_case": worst_case, "tolerance": tol}


def _identity_rect_sums(rng: np.random.Generator, cases: int, size: int, tol: float):
    worst, worst_case = 0.0, None
    failures = 0
    for i in range(cases):
        table = rng.uniform(-1.0, 1.0, size=(size, size)) \
            + 1j * rng.uniform(-1.0, 1.0, size=(size, size))
        c = from_table(f"table{i}", table)
        m = int(rng.integers(1, size // 2))
        M = int(rng.integers(m, size + 1))
        n = int(rng.integers(1, size // 2))
        N = int(rng.integers(n, size + 1))
        rect = Rect(m, M, n, N)
        x, y = _sample_x(rng, 2), _sample_x(rng, 2)
        direct = rect_sum_direct(c, rect, x, y)
        parts = rect_sum_parts(c, rect, x, y, r=2)
        rel = abs(parts - direct) / (1.0 + abs(direct))
        if rel > worst:
            worst, worst_case = rel, {"case": i, "rect": [m, M, n, N],
                                      "x": x, "y": y}
        if rel > tol:
            failures += 1
    return {"cases": cases, "failures": failures, "worst_rel_err": worst,
            "worst_case": worst_case, "tolerance": tol}


def _identity_differences(rng: np.random.Generator, grid: int):
    """Exactness of the step-2 difference decompositions on a random table."""
    table = rng.standard_normal((grid + 2, grid + 2))
    c = from_table("delta", table)
    j = np.arange(1, grid + 1, dtype=np.int64)[:, None]
    k = np.arange(1, grid + 1, dtype=np.int64)[None, :]
    eps = float(np.finfo(np.float64).eps)

    def d11(jj, kk):
        return (np.asarray(c.eval(jj, kk)) - np.asarray(c.eval(jj + 1, kk))
                - np.asarray(c.eval(jj, kk + 1)) + np.asarray(c.eval(jj + 1, kk + 1)))

    d22 = np.asarray(delta_rr(c, 2, j, k))
    recon = d11(j, k) + d11(j + 1, k) + d11(j, k + 1) + d11(j + 1, k + 1)
    pieces = np.stack([np.abs(d11(j, k)), np.abs(d11(j + 1, k)),
                       np.abs(d11(j, k + 1)), np.abs(d11(j + 1, k + 1))])
    scale_22 = np.maximum(1.0, pieces.max(axis=0))
    err_22 = float(np.max(np.abs(d22 - recon) / scale_22))

    a_vals = rng.standard_normal(grid + 2)
    a = single_from_values("delta1", a_vals)
    kk = np.arange(1, grid + 1, dtype=np.int64)
    d2 = np.asarray(delta_r(a, 2, kk))
    recon1 = np.asarray(delta_r(a, 1, kk)) + np.asarray(delta_r(a, 1, kk + 1))
    scale_2 = np.maximum(1.0, np.maximum(np.abs(np.asarray(delta_r(a, 1, kk))),
                                         np.abs(np.asarray(delta_r(a, 1, kk + 1)))))
    err_2 = float(np.max(np.abs(d2 - recon1) / scale_2))
    limit = 8.0 * eps
    return {"grid": grid, "worst_mixed_err": err_22, "worst_single_err": err_2,
            "tolerance": limit,
            "failures": int(err_22 > limit) + int(err_2 > limit)}


def _identity_kernel_bounds(points: int, k_max: int):
    left = np.linspace(0.0, 0.5 * math.pi, points + 2)[1:-1]
    right = np.linspace(0.5 * math.pi, math.pi, points + 2)[1:-1]
    report = kernel_bound_check(2, np.concatenate([left, right]), k_max=k_max)
    return {"points": 2 * points, "k_max": k_max,
            "worst_slack": report.worst_slack,
            "witness": {"x": report.witness_x, "k": report.witness_k,
                        "r": report.witness_r},
            "failures": int(report.worst_slack > 0.0)}


def _identity_sine_parity(k_max: int):
    xs = np.linspace(0.0, math.pi, 101)[1:-1]
    j = np.arange(1, k_max + 1, dtype=np.float64)[:, None]
    lhs = np.sin(j * (math.pi - xs[None, :]))
    rhs_val = ((-1.0) ** (j + 1.0)) * np.sin(j * xs[None, :])
    worst = float(np.max(np.abs(lhs - rhs_val)))
    tol = 1e-11 * k_max
    return {"k_max": k_max, "worst_abs_err": worst, "tolerance": tol,
            "failures": int(worst > tol)}


def _run_verify_identities(args):
    rng = np.random.default_rng(args.seed)
    checks = {
        "row_sum_by_parts": _identity_row_sums(rng, args.cases_1d, args.tol),
        "rect_sum_by_parts": _identity_rect_sums(rng, args.cases_2d,
                                                 args.table_size, args.tol),
        "difference_decompositions": _identity_differences(rng, args.delta_grid),
        "kernel_envelope": _identity_kernel_bounds(args.kernel_points, args.k_max),
        "sine_parity": _identity_sine_parity(args.k_max),
    }
    passed, witness = True, []
    for name, stats in checks.items():
        if stats["failures"]:
            passed = False
            witness.append(f"{name}: {stats['failures']} failure(s); detail {stats}")
    results = {"seed": args.seed, "checks": checks}
    header = ["check", "cases", "failures", "worst"]
    rows = []
    for name, stats in checks.items():
        worst = stats.get("worst_rel_err",
                          stats.get("worst_slack",
                                    stats.get("worst_abs_err",
                                              stats.get("worst_mixed_err"))))
        rows.append([name, stats.get("cases", stats.get("points", stats.get("grid", 0))),
                     stats["failures"], worst])
    return results, (header, rows), passed, witness


_HANDLERS = {
    "check-class": _run_check_class,
    "condition-22": _run_condition_22,
    "partial-sum": _run_partial_sum,
    "uniform-tail": _run_uniform_tail,
    "lemma": _run_lemma,
    "eta": _run_eta,
    "remark2": _run_remark2,
    "verify-identities": _run_verify_identities,
}


# --- parser construction ------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file; flags override it")
    parser.add_argument("--out-dir", default=".", help="directory for report files")
    parser.add_argument("--json", dest="json_name",
                        help="JSON report filename (default <command>.json)")
    parser.add_argument("--csv", dest="csv_name",
                        help="CSV detail filename (default <command>.csv)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized checks")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap (reductions stay deterministic)")


def _add_sequence(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset",
                        help="builtin sequence, e.g. oscillating_quadratic or "
                             "product_power(2,2)")
    parser.add_argument("--p", type=float, help="first exponent for product_power")
    parser.add_argument("--q", type=float, help="second exponent for product_power")
    parser.add_argument("--expr", help="coefficient expression in j, k (or k/n "
                                       "for single-sequence checks)")
    parser.add_argument("--seq-file", help="sequence definition file (name = expr)")
    parser.add_argument("--seq-name", help="name to pick from --seq-file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doublesine",
        description="Numerical checks for double sine series with "
                    "generalized-monotone coefficients.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-class", help="fit class-membership constants")
    _add_common(p)
    _add_sequence(p)
    p.add_argument("--r", type=int, default=2, help="difference step")
    p.add_argument("--family", choices=[f.value for f in Family], default="three")
    p.add_argument("--lam", type=int, default=2, help="window/block dilation")
    p.add_argument("--b1", default="l", help="row block-start map (expression in l)")
    p.add_argument("--b2", default="l", help="column block-start map")
    p.add_argument("--b3", default="l", help="double block-start map")
    p.add_argument("--sup-horizon", type=int, default=4096)
    p.add_argument("--grid", default="dyadic:64",
                   help="dyadic:LIMIT, comma values, or MxN pairs")
    p.add_argument("--max-row-c", type=float, help="assert fitted row C <= this")
    p.add_argument("--max-col-c", type=float, help="assert fitted column C <= this")
    p.add_argument("--max-double-c", type=float, help="assert fitted double C <= this")
    p.add_argument("--single-class", choices=[k.value for k in SingleClass],
                   help="check a single-sequence class instead")
    p.add_argument("--gm-beta", default="star",
                   help="GM majorant: 'star' or an expression in n")
    p.add_argument("--b", default="l", help="block-start map for SBVS2")
    p.add_argument("--horizon", type=int, default=4096,
                   help="sup scan horizon for single classes")
    p.add_argument("--max-c", type=float, help="assert fitted single C <= this")

    p = sub.add_parser("condition-22", help="weighted anti-diagonal decay probe")
    _add_common(p)
    _add_sequence(p)
    p.add_argument("--s-max", type=int, default=4096, help="largest scale")
    p.add_argument("--schedule", help="comma list of scales (default dyadic)")
    p.add_argument("--decay-factor", type=float, default=100.0)
    p.add_argument("--expect", choices=_EXPECT_CHOICES)

    p = sub.add_parser("partial-sum", help="one rectangle partial sum, several ways")
    _add_common(p)
    _add_sequence(p)
    p.add_argument("--rect", help="m:Mxn:N, e.g. 1:10x1:10 (required; may come "
                                  "from the config file)")
    p.add_argument("--x", type=float, help="abscissa in (0, pi) (required)")
    p.add_argument("--y", type=float, help="ordinate in (0, pi) (required)")
    p.add_argument("--r", type=int, default=2, help="step for the by-parts method")
    p.add_argument("--method", choices=["direct", "parts", "separable", "all"],
                   default="all")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="cross-method relative tolerance")

    p = sub.add_parser("uniform-tail", help="sup of |rect sums| beyond thresholds")
    _add_common(p)
    _add_sequence(p)
    p.add_argument("--grid-points", type=int, default=21,
                   help="interior (x, y) points per axis")
    p.add_argument("--thresholds", default="8,16,32,64,128")
    p.add_argument("--rect-cap", type=int, default=4096)
    p.add_argument("--doublings", type=int, default=4)
    p.add_argument("--min-start", type=int, default=1)
    p.add_argument("--band", type=float, default=0.05)
    p.add_argument("--decay-ratio", type=float, default=4.0)
    p.add_argument("--expect", choices=_EXPECT_CHOICES)

    p = sub.add_parser("lemma", help="tail-quantity schedules and the sandwich check")
    _add_common(p)
    _add_sequence(p)
    p.add_argument("--which", type=int, choices=[1, 2, 3],
                   help="quantity family to evaluate (required; may come "
                        "from the config file)")
    p.add_argument("--schedule", default="4,8,16,32,64",
                   help="diagonal scales for --which 1/2")
    p.add_argument("--grid", default="dyadic:64", help="(m, n) grid for --which 3")
    p.add_argument("--band", type=float, default=0.05)
    p.add_argument("--decay-ratio", type=float, default=4.0)
    p.add_argument("--expect", choices=_EXPECT_CHOICES, default=None)
    p.add_argument("--c-const", type=float,
                   help="class constant for --which 3 (fitted when omitted)")
    p.add_argument("--lam", type=int, default=2)
    p.add_argument("--b1", default="l")
    p.add_argument("--b2", default="l")
    p.add_argument("--b3", default="l")
    p.add_argument("--sup-horizon", type=int, default=1 << 14)
    p.add_argument("--sum-horizon", type=int, default=1 << 16)

    p = sub.add_parser("eta", help="threshold search plus the envelope check")
    _add_common(p)
    _add_sequence(p)
    p.add_argument("--epsilon", type=float,
                   help="smallness level (required; may come from the config file)")
    p.add_argument("--c-const", type=float,
                   help="class constant C in the smallness bounds (required)")
    p.add_argument("--lam", type=int, default=2)
    p.add_argument("--cap", type=int, default=1 << 14)
    p.add_argument("--verify-range", type=int)
    p.add_argument("--sup-horizon", type=int, default=1 << 14)
    p.add_argument("--sum-horizon", type=int, default=1 << 16)
    p.add_argument("--grid-points", type=int, default=21)
    p.add_argument("--thresholds", default="8,16,32,64,128")
    p.add_argument("--rect-cap", type=int, default=4096)
    p.add_argument("--doublings", type=int, default=4)
    p.add_argument("--min-start", type=int, default=1)
    p.add_argument("--band", type=float, default=0.05)
    p.add_argument("--decay-ratio", type=float, default=4.0)

    p = sub.add_parser("remark2", help="divergence schedule for the residue preset")
    _add_common(p)
    p.add_argument("--schedule", default="10,100,1000,10000")
    p.add_argument("--cross-check-max", type=int, default=100,
                   help="cross-check factored vs direct sums up to this scale")
    p.add_argument("--cross-check-tol", type=float, default=1e-10)

    p = sub.add_parser("verify-identities", help="randomized exact-identity checks")
    _add_common(p)
    p.add_argument("--cases-1d", type=int, default=1000)
    p.add_argument("--cases-2d", type=int, default=200)
    p.add_argument("--table-size", type=int, default=30)
    p.add_argument("--delta-grid", type=int, default=200)
    p.add_argument("--kernel-points", type=int, default=10000)
    p.add_argument("--k-max", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-9)

    return parser


# --- config file plumbing -----------------------------------------------------

def _subparser_for(parser: argparse.ArgumentParser, command: str):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _coerce(action: argparse.Action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean {raw!r} for --{action.dest.replace('_', '-')}")
    value = raw if action.type is None else action.type(raw)
    if action.choices is not None and value not in action.choices:
        raise ConfigError(
            f"bad value {value!r} for --{action.dest.replace('_', '-')}; "
            f"choices: {sorted(action.choices)}")
    return value


def _apply_config(parser: argparse.ArgumentParser, command: str, path: str) -> None:
    cfg = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    sub_parser = _subparser_for(parser, command)
    actions = {a.dest: a for a in sub_parser._actions
               if a.dest not in ("help", "config")}
    known = {(_FLAG_SECTIONS.get(dest, "cli"), dest) for dest in actions}
    overrides = {}
    for section in cfg.sections():
        for key, raw in cfg.items(section):
            dest = key.replace("-", "_")
            if (section, dest) not in known:
                raise ConfigError(
                    f"config key [{section}] {key} does not match any "
                    f"{command} option")
            try:
                overrides[dest] = _coerce(actions[dest], raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad config value [{section}] {key} = {raw!r}: "
                                  f"{exc}") from None
    sub_parser.set_defaults(**overrides)


def _resolved_config(parser: argparse.ArgumentParser, command: str, args) -> dict:
    sub_parser = _subparser_for(parser, command)
    resolved: dict[str, dict] = {}
    for action in sub_parser._actions:
        if action.dest in ("help",):
            continue
        section = _FLAG_SECTIONS.get(action.dest, "cli")
        resolved.setdefault(section, {})[action.dest] = getattr(args, action.dest, None)
    return resolved


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    try:
        if command in _COMMANDS:
            config_path = None
            for i, tok in enumerate(argv):
                if tok == "--config" and i + 1 < len(argv):
                    config_path = argv[i + 1]
                elif tok.startswith("--config="):
                    config_path = tok.split("=", 1)[1]
            if config_path is not None:
                _apply_config(parser, command, config_path)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # argparse exits 2 on bad usage, matching the config-error status;
            # propagate --help's status 0 unchanged.
            raise SystemExit(exc.code)
        results, csv_payload, passed, witness = _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / (args.json_name or f"{args.command}.json")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": _resolved_config(parser, args.command, args),
        "results": results,
        "pass": passed,
    }
    write_json(json_path, to_jsonable(payload))
    written = [str(json_path)]
    if csv_payload is not None:
        header, rows = csv_payload
        csv_path = out_dir / (args.csv_name or f"{args.command}.csv")
        write_csv(csv_path, header, rows)
        written.append(str(csv_path))

    status = "PASS" if passed else "FAIL"
    print(f"{args.command}: {status} ({', '.join(written)})")
    for line in witness:
        print(f"  witness: {line}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
