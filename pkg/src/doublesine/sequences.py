"""Coefficient sequences for double sine series.

A double sequence ``c_{jk}`` (indices start at 1) is described by a
:class:`CoefficientSequence`: a name, a vectorised evaluator, an optional
factorisation ``c_{jk} = a_j * b_k`` into two :class:`SingleSequence`
parts, and an optional power-decay hint ``|c_{jk}| <= K / (j^p k^q)``
that downstream scans use to bound truncated tails.

Three families of constructors are provided:

* :func:`builtin` returns the named presets used throughout the test
  battery (an oscillating quadratic product, a residue-modulated
  logarithmic product, pure power products, and the zero sequence);
* :func:`separable` builds a product sequence from two single-index
  factors;
* :func:`from_expression` / :func:`parse_sequence_file` compile a small
  arithmetic expression language (variables ``j``, ``k``; functions
  ``ln``, ``pow``, ``mod``, ``abs``, ``sign``, ``alternating``; both
  ``^`` and ``**`` denote powers) into sequence evaluators.

Evaluators accept scalar ints or integer ``numpy`` arrays and broadcast,
so callers can evaluate whole index blocks in one call.  All presets are
real-valued; table-backed sequences may be complex.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

__all__ = [
    "PowerDecay",
    "PowerDecay2D",
    "SingleSequence",
    "CoefficientSequence",
    "separable",
    "builtin",
    "BUILTIN_NAMES",
    "from_table",
    "single_from_values",
    "scale",
    "ExpressionError",
    "compile_expression",
    "from_expression",
    "single_from_expression",
    "parse_sequence_file",
]


@dataclass(frozen=True)
class PowerDecay:
    """Certified bound ``|a_k| <= K / k^p`` valid for every k >= 1."""

    p: float
    K: float


@dataclass(frozen=True)
class PowerDecay2D:
    """Certified bound ``|c_{jk}| <= K / (j^p k^q)`` for all j, k >= 1."""

    p: float
    q: float
    K: float


@dataclass(frozen=True)
class SingleSequence:
    """A single-index sequence ``a_k``, k >= 1.

    ``eval`` maps an int or integer array to values of matching shape.
    ``decay_hint`` certifies ``|a_k| <= K / k^p`` when present.
    """

    name: str
    eval: Callable
    decay_hint: PowerDecay | None = None

    def __call__(self, k):
        return self.eval(k)


@dataclass(frozen=True)
class CoefficientSequence:
    """A double sequence ``c_{jk}``, j, k >= 1.

    ``eval(j, k)`` broadcasts its integer arguments.  When the sequence
    factors as ``a_j * b_k`` the two factors are kept in
    ``separable_parts`` so block scans can run on one index at a time.
    """

    name: str
    eval: Callable
    separable_parts: tuple[SingleSequence, SingleSequence] | None = None
    decay_hint: PowerDecay2D | None = None

    def __call__(self, j, k):
        return self.eval(j, k)

    @property
    def is_separable(self) -> bool:
        return self.separable_parts is not None


def separable(a: SingleSequence, b: SingleSequence, name: str | None = None) -> CoefficientSequence:
    """Product sequence ``c_{jk} = a_j * b_k``.

    The decay hint is derived from the factor hints when both are known.
    """
    hint = None
    if a.decay_hint is not None and b.decay_hint is not None:
        hint = PowerDecay2D(p=a.decay_hint.p, q=b.decay_hint.p, K=a.decay_hint.K * b.decay_hint.K)

    def eval_(j, k):
        return a.eval(j) * b.eval(k)

    return CoefficientSequence(
        name=name or f"{a.name}*{b.name}",
        eval=eval_,
        separable_parts=(a, b),
        decay_hint=hint,
    )


def _int_index(i) -> np.ndarray:
    arr = np.asarray(i)
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.all(np.abs(arr - rounded) < 1e-9):
            raise ValueError("sequence indices must be integers")
        arr = rounded
    return arr.astype(np.int64)


def _alternating(n) -> np.ndarray:
    """``(-1)^n`` for integer n, evaluated without float powers."""
    ni = _int_index(n)
    return np.where(ni % 2 == 0, 1.0, -1.0)


def _osc_eval(n):
    ni = _int_index(n)
    nf = ni.astype(np.float64)
    return (2.0 + np.where(ni % 2 == 0, 1.0, -1.0)) / (nf * nf)


def _mod3_eval(n):
    ni = _int_index(n)
    nf = ni.astype(np.float64)
    return np.where(ni % 3 == 1, 3.0, 1.0) / (nf * np.log(nf + 1.0))


def _power_factor(p: float) -> Callable:
    def eval_(n):
        nf = _int_index(n).astype(np.float64)
        return nf ** (-p)

    return eval_


def _zero_eval(n):
    ni = _int_index(n)
    return np.zeros(np.shape(ni), dtype=np.float64) if np.ndim(ni) else 0.0


_OSC_FACTOR = SingleSequence(
    name="oscillating_quadratic_factor",
    eval=_osc_eval,
    decay_hint=PowerDecay(p=2.0, K=3.0),
)

_MOD3_FACTOR = SingleSequence(
    name="mod3_log_factor",
    eval=_mod3_eval,
    # ln(n+1) >= ln 2 for n >= 1, so a_n <= 3 / (n ln 2).
    decay_hint=PowerDecay(p=1.0, K=3.0 / math.log(2.0)),
)

BUILTIN_NAMES = ("oscillating_quadratic", "mod3_log_product", "product_power", "zero")


def builtin(name: str, p: float = 1.0, q: float = 1.0) -> CoefficientSequence:
    """Return a named preset sequence.

    ``oscillating_quadratic``
        ``c_{jk} = (2 + (-1)^j)/j^2 * (2 + (-1)^k)/k^2``.
    ``mod3_log_product``
        ``c_{jk} = a_j a_k`` with ``a_n = 3/(n ln(n+1))`` when n = 1
        (mod 3) and ``1/(n ln(n+1))`` otherwise.
    ``product_power``
        ``c_{jk} = j^{-p} k^{-q}``; exponents must be positive.
    ``zero``
        the zero sequence.
    """
    if name == "oscillating_quadratic":
        return separable(_OSC_FACTOR, _OSC_FACTOR, name=name)
    if name == "mod3_log_product":
        return separable(_MOD3_FACTOR, _MOD3_FACTOR, name=name)
    if name == "product_power":
        if p <= 0 or q <= 0:
            raise ValueError("product_power exponents must be positive")
        fa = SingleSequence(f"power_{p:g}", _power_factor(p), PowerDecay(p=p, K=1.0))
        fb = SingleSequence(f"power_{q:g}", _power_factor(q), PowerDecay(p=q, K=1.0))
        return separable(fa, fb, name=f"product_power({p:g},{q:g})")
    if name == "zero":
        z = SingleSequence("zero_factor", _zero_eval, PowerDecay(p=1.0, K=0.0))
        return separable(z, z, name="zero")
    raise ValueError(f"unknown preset {name!r}; known presets: {', '.join(BUILTIN_NAMES)}")


def from_table(name: str, values: np.ndarray) -> CoefficientSequence:
    """Sequence backed by a finite table; zero outside the table.

    ``values[j-1, k-1]`` supplies ``c_{jk}`` for in-range indices.  Handy
    for randomised identity tests; complex tables are allowed.
    """
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError("table must be two-dimensional")
    J, K = arr.shape
    zero = np.zeros((), dtype=arr.dtype)

    def eval_(j, k):
        ji = _int_index(j)
        ki = _int_index(k)
        ji, ki = np.broadcast_arrays(ji, ki)
        inside = (ji >= 1) & (ji <= J) & (ki >= 1) & (ki <= K)
        vals = arr[np.clip(ji, 1, J) - 1, np.clip(ki, 1, K) - 1]
        return np.where(inside, vals, zero)

    return CoefficientSequence(name=name, eval=eval_)


def single_from_values(name: str, values: np.ndarray) -> SingleSequence:
    """Single sequence backed by a finite table; zero outside."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("table must be one-dimensional")
    K = arr.shape[0]
    zero = np.zeros((), dtype=arr.dtype)

    def eval_(k):
        ki = _int_index(k)
        inside = (ki >= 1) & (ki <= K)
        return np.where(inside, arr[np.clip(ki, 1, K) - 1], zero)

    return SingleSequence(name=name, eval=eval_)


def scale(c: CoefficientSequence, t: float) -> CoefficientSequence:
    """Scalar multiple ``t * c`` with hints rescaled accordingly."""
    hint = None
    if c.decay_hint is not None:
        hint = replace(c.decay_hint, K=abs(t) * c.decay_hint.K)
    parts = None
    if c.separable_parts is not None:
        a, b = c.separable_parts
        a_hint = None
        if a.decay_hint is not None:
            a_hint = replace(a.decay_hint, K=abs(t) * a.decay_hint.K)
        a_eval = a.eval
        parts = (
            SingleSequence(f"{t:g}*{a.name}", lambda k, _f=a_eval: t * _f(k), a_hint),
            b,
        )
    c_eval = c.eval
    return CoefficientSequence(
        name=f"{t:g}*{c.name}",
        eval=lambda j, k, _f=c_eval: t * _f(j, k),
        separable_parts=parts,
        decay_hint=hint,
    )


# --- expression language ------------------------------------------------

class ExpressionError(ValueError):
    """Raised when a sequence expression uses unsupported syntax."""


_FUNCTIONS: dict[str, Callable] = {
    "ln": np.log,
    "pow": np.power,
    "mod": np.mod,
    "abs": np.abs,
    "sign": np.sign,
    "alternating": _alternating,
}

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


def _validate(node: ast.AST, variables: tuple[str, ...]) -> set[str]:
    """Whitelist walk; returns the variable names the expression uses."""
    used: set[str] = set()
    for sub in ast.walk(node):
        if isinstance(sub, (ast.Expression, ast.Constant, ast.Load)):
            if isinstance(sub, ast.Constant) and not isinstance(sub.value, (int, float)):
                raise ExpressionError(f"unsupported constant {sub.value!r}")
        elif isinstance(sub, ast.BinOp):
            if not isinstance(sub.op, _ALLOWED_BINOPS):
                raise ExpressionError(f"unsupported operator {type(sub.op).__name__}")
        elif isinstance(sub, ast.UnaryOp):
            if not isinstance(sub.op, _ALLOWED_UNARY):
                raise ExpressionError(f"unsupported operator {type(sub.op).__name__}")
        elif isinstance(sub, ast.Call):
            if not isinstance(sub.func, ast.Name) or sub.func.id not in _FUNCTIONS:
                raise ExpressionError("only ln, pow, mod, abs, sign, alternating calls are allowed")
            if sub.keywords:
                raise ExpressionError("keyword arguments are not allowed")
        elif isinstance(sub, ast.Name):
            if sub.id in _FUNCTIONS:
                continue
            if sub.id not in variables:
                raise ExpressionError(f"unknown variable {sub.id!r}; allowed: {variables}")
            used.add(sub.id)
        elif isinstance(sub, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow,
                              ast.Mod, ast.USub, ast.UAdd)):
            continue
        else:
            raise ExpressionError(f"unsupported syntax {type(sub).__name__}")
    return used


def compile_expression(expr: str, variables: tuple[str, ...]) -> tuple[Callable, set[str]]:
    """Compile an expression into ``fn(**variables)``.

    Returns the callable together with the set of variables actually
    referenced.  Evaluation is pure numpy, so array arguments broadcast.
    ``^`` means exponentiation with the usual mathematical precedence
    (tighter than ``*``/``/``), so it is rewritten to ``**`` before
    parsing; the grammar has no string literals, making the textual
    rewrite unambiguous.
    """
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {expr!r}: {exc.msg}") from exc
    used = _validate(tree, variables)
    code = compile(tree, "<sequence-expression>", "eval")
    env = {"__builtins__": {}}
    env.update(_FUNCTIONS)

    def fn(**kwargs):
        scope = dict(env)
        scope.update(kwargs)
        return eval(code, scope)  # noqa: S307 - ast-whitelisted above

    return fn, used


def from_expression(name: str, expr: str) -> CoefficientSequence:
    """Double sequence ``c_{jk}`` defined by an expression in ``j, k``."""
    fn, _ = compile_expression(expr, ("j", "k"))

    def eval_(j, k):
        jf = _int_index(j).astype(np.float64)
        kf = _int_index(k).astype(np.float64)
        return fn(j=jf, k=kf)

    return CoefficientSequence(name=name, eval=eval_)


def single_from_expression(name: str, expr: str) -> SingleSequence:
    """Single sequence ``a_k`` defined by an expression in ``k`` (alias ``n``)."""
    fn, used = compile_expression(expr, ("k", "n"))
    if {"k", "n"} <= used:
        raise ExpressionError("use either k or n as the index, not both")

    def eval_(k):
        kf = _int_index(k).astype(np.float64)
        return fn(k=kf, n=kf)

    return SingleSequence(name=name, eval=eval_)


def parse_sequence_file(path) -> dict[str, CoefficientSequence | SingleSequence]:
    """Load ``name = expression`` definitions from a text file.

    Blank lines and ``#`` comments are skipped.  An expression that
    mentions ``j`` defines a double sequence (``k`` may be absent); one
    that only mentions ``k``/``n`` (or no variable) defines a single
    sequence.
    """
    out: dict[str, CoefficientSequence | SingleSequence] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ExpressionError(f"{path}:{lineno}: expected 'name = expression'")
            name, expr = (part.strip() for part in line.split("=", 1))
            if not name.isidentifier():
                raise ExpressionError(f"{path}:{lineno}: bad sequence name {name!r}")
            if name in out:
                raise ExpressionError(f"{path}:{lineno}: duplicate sequence {name!r}")
            _, used = compile_expression(expr, ("j", "k", "n"))
            if "j" in used and "n" in used:
                raise ExpressionError(f"{path}:{lineno}: mix of j and n is ambiguous")
            if "j" in used:
                out[name] = from_expression(name, expr)
            else:
                out[name] = single_from_expression(name, expr)
    return out
