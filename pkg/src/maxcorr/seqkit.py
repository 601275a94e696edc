"""Deterministic sequences and growth functions used by the moment/series checks.

All checks are finite-range: a :class:`SandwichConstants` certifies the
increment bounds only for the indices it was fitted on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

KINDS = ("power", "power-log", "explicit")


@dataclass(frozen=True)
class SequenceSpec:
    """Rule producing a nonnegative sequence indexed from ``offset``.

    ``power``      : scale * n**exponent
    ``power-log``  : scale * (n ln n)**exponent   (exponent 1/2 gives sqrt(n ln n))
    ``explicit``   : the given values, the first one belonging to n = offset
    """

    kind: str
    exponent: float = 1.0
    scale: float = 1.0
    values: tuple[float, ...] = ()
    offset: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.offset < 1:
            raise ValueError("offset must be >= 1")
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")
        if self.kind == "power-log" and self.exponent < 0:
            raise ValueError("power-log needs a nonnegative exponent")

    def __call__(self, n):
        """Evaluate at real or integer index ``n`` (power kinds only)."""
        n = np.asarray(n, dtype=float)
        if self.kind == "power":
            return self.scale * n**self.exponent
        if self.kind == "power-log":
            return self.scale * (n * np.log(n)) ** self.exponent
        raise TypeError("explicit sequences cannot be evaluated off-grid")

    @property
    def is_power(self) -> bool:
        return self.kind == "power"

    def to_text(self) -> str:
        if self.kind == "explicit":
            return "explicit(" + ",".join(repr(v) for v in self.values) + ")"
        args = [repr(self.exponent)]
        if self.scale != 1.0:
            args.append(f"scale={self.scale!r}")
        return f"{self.kind}({','.join(args)})"


_NAMED = {
    "linear": SequenceSpec("power", 1.0),
    "quadratic": SequenceSpec("power", 2.0),
    "sqrt-nlogn": SequenceSpec("power-log", 0.5),
}


def parse_sequence(text: str) -> SequenceSpec:
    """Parse the CLI text form of a sequence.

    Accepted forms: ``linear``, ``quadratic``, ``sqrt-nlogn``, ``const<k>``,
    ``power(<e>[,scale=<s>])``, ``power-log(<e>[,scale=<s>])`` and
    ``explicit(v1,v2,...)``.
    """
    text = text.strip()
    if text in _NAMED:
        return _NAMED[text]
    m = re.fullmatch(r"const([0-9.eE+-]+)", text)
    if m:
        return SequenceSpec("power", 0.0, scale=float(m.group(1)))
    m = re.fullmatch(r"(power|power-log|explicit)\((.*)\)", text)
    if not m:
        raise ValueError(f"cannot parse sequence {text!r}")
    kind, body = m.groups()
    parts = [p.strip() for p in body.split(",") if p.strip()]
    if kind == "explicit":
        return SequenceSpec("explicit", values=tuple(float(p) for p in parts))
    if not parts:
        raise ValueError(f"{kind} needs an exponent")
    exponent = float(parts[0])
    scale = 1.0
    for extra in parts[1:]:
        key, _, value = extra.partition("=")
        if key.strip() != "scale":
            raise ValueError(f"unknown sequence parameter {key!r}")
        scale = float(value)
    return SequenceSpec(kind, exponent, scale=scale)


def gen_sequence(spec: SequenceSpec, n_max: int) -> np.ndarray:
    """Values of ``spec`` for n = offset..n_max."""
    if n_max < spec.offset:
        raise ValueError(f"n_max={n_max} is below the first index {spec.offset}")
    count = n_max - spec.offset + 1
    if spec.kind == "explicit":
        if len(spec.values) < count:
            raise ValueError(
                f"explicit sequence has {len(spec.values)} values, {count} requested"
            )
        out = np.array(spec.values[:count], dtype=float)
        if np.any(out < 0):
            raise ValueError("explicit sequence contains negative values")
        return out
    n = np.arange(spec.offset, n_max + 1, dtype=float)
    return spec(n)


@dataclass(frozen=True)
class SandwichConstants:
    c: float
    B: float
    n_range: tuple[int, int]
    # The increment bounds are certified on n_range only, never for all n.
    finite_range_certificate: bool = field(default=True)


def fit_sandwich_constants(alpha: Sequence[float], beta: Sequence[float]) -> SandwichConstants:
    """Smallest c >= 1 with c^-1 alpha_n <= beta_n - beta_{n-1} <= c alpha_n, and
    the largest observed growth ratio B = max (beta_{n+1} - beta_n) / beta_n.

    ``alpha`` and ``beta`` hold the terms for n = 1..N; beta_0 = 0 is prepended
    here. B is measured over n = 1..N-1 (the last beta only enters as beta_{n+1}).
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("alpha and beta must be 1-d and of equal length")
    if a.size < 2:
        raise ValueError("need at least two terms")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("sequences must be nonnegative")
    inc = np.diff(np.concatenate(([0.0], b)))
    if np.any(inc < 0):
        raise ValueError("beta must be nondecreasing")

    bad = (a > 0) & (inc <= 0)
    if np.any(bad):
        n = int(np.argmax(bad)) + 1
        raise ValueError(f"beta does not increase at n={n} while alpha_n > 0; no finite c")
    bad = (a == 0) & (inc > 0)
    if np.any(bad):
        n = int(np.argmax(bad)) + 1
        raise ValueError(f"alpha_n = 0 with a positive increment at n={n}; no finite c")

    live = a > 0
    ratio = inc[live] / a[live]
    c = max(1.0, float(ratio.max()), float((1.0 / ratio).max())) if ratio.size else 1.0

    head, nxt = b[:-1], b[1:]
    pos = head > 0
    growth = (nxt[pos] - head[pos]) / head[pos]
    B = float(growth.max()) if growth.size else 0.0
    return SandwichConstants(c=c, B=B, n_range=(1, int(a.size)))


def f_log_adjusted(x: float) -> float:
    """x / ln(e + sqrt(x)); increasing and continuous on [0, inf)."""
    if x < 0:
        raise ValueError("f_log_adjusted is defined for x >= 0")
    return x / math.log(math.e + math.sqrt(x))


def check_bounded_away(values: Sequence[float], exponent: float, offset: int = 1) -> tuple[float, float]:
    """(min, max) of values[n] / n**exponent, with values[0] at n = offset."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty sequence")
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    n = np.arange(offset, offset + v.size, dtype=float)
    r = v / n**exponent
    return float(r.min()), float(r.max())
