"""Linear quadrature algebra over independent Gaussian noise symbols.

Every observable in the protocol is a real linear combination of independent,
zero-mean Gaussian symbols plus a multiple of Alice's classical displacement
S.  Amplitude (``+``) and phase (``-``) quadratures are tracked separately.
Vacuum variance is normalised to 1, which is the only hbar convention used
anywhere in the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, NamedTuple

Quad = Literal["+", "-"]
QUADS: tuple[Quad, Quad] = ("+", "-")

# Tolerance on the Heisenberg product of a declared physical mode.
HEISENBERG_TOL = 1e-12


def conjugate(quad: Quad) -> Quad:
    return "-" if quad == "+" else "+"


class Quadratures(NamedTuple):
    """A pair of per-quadrature reals."""

    plus: float
    minus: float

    def of(self, quad: Quad) -> float:
        if quad == "+":
            return self.plus
        if quad == "-":
            return self.minus
        raise ValueError(f"unknown quadrature {quad!r}")

    @classmethod
    def coerce(cls, value: float | tuple[float, float] | "Quadratures") -> "Quadratures":
        """Accept a scalar (symmetric) or a ``(plus, minus)`` pair."""
        if isinstance(value, cls):
            return value
        if isinstance(value, (tuple, list)):
            plus, minus = value
            return cls(float(plus), float(minus))
        return cls(float(value), float(value))

    def is_symmetric(self) -> bool:
        return self.plus == self.minus


@dataclass(frozen=True)
class NoiseSymbol:
    """An independent zero-mean Gaussian variable, one per quadrature.

    Equality and hashing use ``id`` only.  ``physical`` symbols stand for
    optical modes and must satisfy ``variance_plus * variance_minus >= 1``;
    classical noise (Eve's added Gaussian noise, say) may carry any
    nonnegative variances.
    """

    id: str
    variance_plus: float = field(compare=False)
    variance_minus: float = field(compare=False)
    physical: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.variance_plus < 0 or self.variance_minus < 0:
            raise ValueError(f"symbol {self.id}: variances must be nonnegative")
        if self.physical and self.variance_plus * self.variance_minus < 1 - HEISENBERG_TOL:
            raise ValueError(
                f"symbol {self.id}: V+ * V- = {self.variance_plus * self.variance_minus:.6g} < 1 "
                "violates the uncertainty relation for a physical mode"
            )

    def variance(self, quad: Quad) -> float:
        return self.variance_plus if quad == "+" else self.variance_minus


class Workspace:
    """Issues noise symbols with unique ids and remembers declaration order.

    The declaration order is what the Monte Carlo sampler uses to lay out its
    draw matrix, so two workspaces built by the same code sample identically.
    """

    def __init__(self):
        self._symbols: dict[str, NoiseSymbol] = {}
        self._counter = itertools.count()

    def _declare(self, name: str, v_plus: float, v_minus: float, physical: bool) -> NoiseSymbol:
        sym_id = f"{name}#{next(self._counter)}"
        sym = NoiseSymbol(sym_id, float(v_plus), float(v_minus), physical)
        self._symbols[sym_id] = sym
        return sym

    def mode(self, name: str, v_plus: float = 1.0, v_minus: float | None = None) -> NoiseSymbol:
        """Declare a physical mode; defaults to vacuum."""
        if v_minus is None:
            v_minus = 1.0 / v_plus
        return self._declare(name, v_plus, v_minus, physical=True)

    def vacuum(self, name: str) -> NoiseSymbol:
        return self._declare(name, 1.0, 1.0, physical=True)

    def noise(self, name: str, v_plus: float, v_minus: float | None = None) -> NoiseSymbol:
        """Declare classical Gaussian noise (exempt from the Heisenberg check)."""
        if v_minus is None:
            v_minus = v_plus
        return self._declare(name, v_plus, v_minus, physical=False)

    @property
    def symbols(self) -> tuple[NoiseSymbol, ...]:
        return tuple(self._symbols.values())

    def __contains__(self, sym: NoiseSymbol) -> bool:
        return self._symbols.get(sym.id) is sym

    def __len__(self) -> int:
        return len(self._symbols)


@dataclass(frozen=True, eq=False)
class ModeExpression:
    """``sum_i c_i * N_i + s * S`` for each quadrature.

    ``plus`` and ``minus`` map symbols to coefficients; ``signal`` holds the
    multiplier of Alice's displacement in each quadrature.  Instances are
    treated as immutable values.
    """

    plus: Mapping[NoiseSymbol, float] = field(default_factory=dict)
    minus: Mapping[NoiseSymbol, float] = field(default_factory=dict)
    signal: Quadratures = Quadratures(0.0, 0.0)

    @classmethod
    def of_symbol(cls, sym: NoiseSymbol, coefficient: float = 1.0) -> "ModeExpression":
        return cls({sym: coefficient}, {sym: coefficient})

    @classmethod
    def of_signal(cls, coefficient: float = 1.0) -> "ModeExpression":
        return cls(signal=Quadratures(coefficient, coefficient))

    @classmethod
    def zero(cls) -> "ModeExpression":
        return cls()

    def coefficients(self, quad: Quad) -> Mapping[NoiseSymbol, float]:
        return self.plus if quad == "+" else self.minus

    def symbols(self) -> set[NoiseSymbol]:
        return set(self.plus) | set(self.minus)

    def is_zero(self) -> bool:
        return not self.plus and not self.minus and self.signal == (0.0, 0.0)

    def without(self, syms: Iterable[NoiseSymbol]) -> "ModeExpression":
        """Drop the given symbols (e.g. noise the estimator knows exactly)."""
        drop = set(syms)
        return ModeExpression(
            {s: c for s, c in self.plus.items() if s not in drop},
            {s: c for s, c in self.minus.items() if s not in drop},
            self.signal,
        )

    def __add__(self, other: "ModeExpression") -> "ModeExpression":
        return combine(self, other, 1.0, 1.0)

    def __sub__(self, other: "ModeExpression") -> "ModeExpression":
        return combine(self, other, 1.0, -1.0)

    def __mul__(self, w: float) -> "ModeExpression":
        return combine(self, ZERO, w, 0.0)

    __rmul__ = __mul__

    def __truediv__(self, w: float) -> "ModeExpression":
        return self * (1.0 / w)

    def __neg__(self) -> "ModeExpression":
        return self * -1.0


ZERO = ModeExpression()


def _merge(a: Mapping[NoiseSymbol, float], b: Mapping[NoiseSymbol, float], wa: float, wb: float):
    out: dict[NoiseSymbol, float] = {}
    for sym, c in a.items():
        out[sym] = wa * c
    for sym, c in b.items():
        out[sym] = out.get(sym, 0.0) + wb * c
    # exact cancellations only; tiny nonzero coefficients are kept
    return {s: c for s, c in out.items() if c != 0.0}


def combine(a: ModeExpression, b: ModeExpression, wa: float, wb: float) -> ModeExpression:
    """Return ``wa * a + wb * b``."""
    return ModeExpression(
        _merge(a.plus, b.plus, wa, wb),
        _merge(a.minus, b.minus, wa, wb),
        Quadratures(wa * a.signal.plus + wb * b.signal.plus, wa * a.signal.minus + wb * b.signal.minus),
    )


def splice(plus_from: ModeExpression, minus_from: ModeExpression) -> ModeExpression:
    """Take the ``+`` quadrature of one expression and the ``-`` of another.

    Used for heterodyne records, where the two quadratures are read off
    different beamsplitter outputs.
    """
    return ModeExpression(
        dict(plus_from.plus),
        dict(minus_from.minus),
        Quadratures(plus_from.signal.plus, minus_from.signal.minus),
    )


def beamsplitter(a: ModeExpression, b: ModeExpression, t: float) -> tuple[ModeExpression, ModeExpression]:
    """Mix two modes on a beamsplitter of power transmittance ``t``.

    Outputs are ``(sqrt(t) a + sqrt(1-t) b, sqrt(1-t) a - sqrt(t) b)``.
    """
    if not 0.0 <= t <= 1.0 or math.isnan(t):
        raise ValueError(f"beamsplitter transmittance must lie in [0, 1], got {t}")
    rt, rr = math.sqrt(t), math.sqrt(1.0 - t)
    return combine(a, b, rt, rr), combine(a, b, rr, -rt)


def covariance(a: ModeExpression, b: ModeExpression, quad: Quad, v_signal: float | Quadratures) -> float:
    """``sum_i c_i d_i V_i + s_a s_b V_S`` for the requested quadrature."""
    vs = Quadratures.coerce(v_signal).of(quad)
    ca, cb = a.coefficients(quad), b.coefficients(quad)
    if len(cb) < len(ca):
        ca, cb = cb, ca
    total = 0.0
    for sym, c in ca.items():
        d = cb.get(sym)
        if d is not None:
            total += c * d * sym.variance(quad)
    return total + a.signal.of(quad) * b.signal.of(quad) * vs


def variance(e: ModeExpression, quad: Quad, v_signal: float | Quadratures) -> float:
    """``sum_i c_i^2 V_i + s^2 V_S`` for the requested quadrature."""
    vs = Quadratures.coerce(v_signal).of(quad)
    if vs < 0:
        raise ValueError("signal variance must be nonnegative")
    return covariance(e, e, quad, vs)
