"""Time signals with closed-form derivatives, and separable vector sources.

Grammar (used by config files)::

    const(c) | poly(c0, c1, ...) | sin(amp, freq, phase) | <term> + <term> ...

``sin(amp, freq, phase)`` evaluates to ``amp * sin(freq * t + phase)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class TimeSignal:
    serializable = True

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self) -> "TimeSignal":
        raise NotImplementedError

    def to_string(self) -> str:
        raise NotImplementedError

    def is_zero(self) -> bool:
        return False

    def __add__(self, other: "TimeSignal") -> "TimeSignal":
        return SumSignal((self, other))

    def __repr__(self) -> str:
        try:
            return f"TimeSignal({self.to_string()!r})"
        except NotImplementedError:
            return f"{type(self).__name__}()"

    def sq_average(self, T: float, samples: int = 2**12) -> float:
        """(1/T) int_0^T s(t)^2 dt by composite Simpson (T = 0 gives s(0)^2)."""
        if T <= 0:
            return float(np.real(self(0.0)) ** 2)
        t = np.linspace(0.0, T, samples + 1)
        v = np.abs(np.asarray(self(t), dtype=complex)) ** 2
        w = np.ones(samples + 1)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        return float(np.dot(w, v) * (T / samples) / 3.0 / T)


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True, repr=False)
class Const(TimeSignal):
    c: float

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c)

    def derivative(self):
        return Const(0.0)

    def to_string(self):
        return f"const({_fmt(self.c)})"

    def is_zero(self):
        return self.c == 0.0


@dataclass(frozen=True, repr=False)
class Poly(TimeSignal):
    coeffs: tuple

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c in reversed(self.coeffs):
            out = out * t + c
        return out

    def derivative(self):
        if len(self.coeffs) <= 1:
            return Const(0.0)
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def to_string(self):
        return "poly(" + ", ".join(_fmt(c) for c in self.coeffs) + ")"

    def is_zero(self):
        return all(c == 0.0 for c in self.coeffs)


@dataclass(frozen=True, repr=False)
class Sin(TimeSignal):
    amp: float
    freq: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amp * np.sin(self.freq * np.asarray(t, dtype=float) + self.phase)

    def derivative(self):
        return Sin(self.amp * self.freq, self.freq, self.phase + math.pi / 2)

    def to_string(self):
        return f"sin({_fmt(self.amp)}, {_fmt(self.freq)}, {_fmt(self.phase)})"

    def is_zero(self):
        return self.amp == 0.0


@dataclass(frozen=True, repr=False)
class SumSignal(TimeSignal):
    terms: tuple

    def __call__(self, t):
        out = np.zeros_like(np.asarray(t, dtype=float))
        for s in self.terms:
            out = out + s(t)
        return out

    def derivative(self):
        return SumSignal(tuple(s.derivative() for s in self.terms))

    def to_string(self):
        return " + ".join(s.to_string() for s in self.terms)

    def is_zero(self):
        return all(s.is_zero() for s in self.terms)


@dataclass(frozen=True, repr=False)
class CallableSignal(TimeSignal):
    """Arbitrary in-library signal; derivative by central differences."""

    fn: Callable
    dfn: Callable | None = None
    serializable = False

    def __call__(self, t):
        return np.vectorize(self.fn, otypes=[float])(np.asarray(t, dtype=float))

    def derivative(self):
        if self.dfn is not None:
            return CallableSignal(self.dfn)
        h = 1e-6
        return CallableSignal(lambda t: (self.fn(t + h) - self.fn(t - h)) / (2 * h))

    def to_string(self):
        raise NotImplementedError("callable signals are not serializable")


ZERO = Const(0.0)

_TERM = re.compile(r"\s*(const|poly|sin)\s*\(([^()]*)\)\s*")


def parse_signal(text: str | float | int | TimeSignal) -> TimeSignal:
    """Parse the signal grammar; bare numbers are constants."""
    if isinstance(text, TimeSignal):
        return text
    if isinstance(text, (int, float)):
        return Const(float(text))
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse signal {text!r} at offset {pos}")
        kind, args = m.group(1), m.group(2)
        vals = [float(a) for a in args.split(",") if a.strip()]
        if kind == "const":
            if len(vals) != 1:
                raise ValueError("const takes one argument")
            terms.append(Const(vals[0]))
        elif kind == "poly":
            if not vals:
                raise ValueError("poly needs at least one coefficient")
            terms.append(Poly(tuple(vals)))
        else:
            if len(vals) not in (2, 3):
                raise ValueError("sin takes (amp, freq[, phase])")
            terms.append(Sin(*vals))
        pos = m.end()
        if pos < len(text):
            if text[pos] != "+":
                raise ValueError(f"expected '+' at offset {pos} in {text!r}")
            pos += 1
    if not terms:
        raise ValueError("empty signal")
    return terms[0] if len(terms) == 1 else SumSignal(tuple(terms))


@dataclass
class Source:
    """Separable vector source f(t) = sum_m signals[m](t) * vectors[:, m]."""

    vectors: np.ndarray
    signals: list = field(default_factory=list)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=complex)
        if self.vectors.ndim == 1:
            self.vectors = self.vectors[:, None]
        if self.vectors.shape[1] != len(self.signals):
            raise ValueError("one signal per source vector required")

    @classmethod
    def zero(cls, dim: int) -> "Source":
        return cls(np.zeros((dim, 0), dtype=complex), [])

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def is_zero(self) -> bool:
        return all(
            s.is_zero() or not np.any(self.vectors[:, m])
            for m, s in enumerate(self.signals)
        )

    def signal_matrix(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if not self.signals:
            return np.zeros((0, ts.size))
        return np.vstack([np.broadcast_to(s(ts), ts.shape) for s in self.signals])

    def __call__(self, t: float) -> np.ndarray:
        return self.vectors @ self.signal_matrix([t])[:, 0]

    def many(self, ts) -> np.ndarray:
        """Columns f(t_k)."""
        return self.vectors @ self.signal_matrix(ts)

    def derivative(self) -> "Source":
        return Source(self.vectors.copy(), [s.derivative() for s in self.signals])

    def transform(self, M: np.ndarray) -> "Source":
        return Source(np.asarray(M) @ self.vectors, list(self.signals))

    def kron(self, v: np.ndarray) -> "Source":
        """f(t) (x) v, with v a fixed vector on a trailing tensor factor."""
        v = np.asarray(v, dtype=complex)
        vecs = np.stack([np.kron(self.vectors[:, m], v) for m in range(len(self.signals))],
                        axis=1) if self.signals else np.zeros((self.dim * v.size, 0))
        return Source(vecs, list(self.signals))

    def norms(self, ts) -> np.ndarray:
        return np.linalg.norm(self.many(ts), axis=0)

    def integrated_norm(self, T: float, samples: int = 2**12) -> float:
        """int_0^T |f(t)| dt (the time-integrated norm used in the bounds)."""
        if T <= 0 or self.is_zero():
            return 0.0
        t = np.linspace(0.0, T, samples + 1)
        w = np.ones(samples + 1)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        return float(np.dot(w, self.norms(t)) * (T / samples) / 3.0)


def as_signals(items: Sequence) -> list:
    return [parse_signal(x) for x in items]
