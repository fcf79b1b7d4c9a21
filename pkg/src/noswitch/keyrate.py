"""Conditional variances and reverse-reconciliation secret key rates.

Rates are in bits per channel use (base-2 logs).  The no-switching rate
sums both quadratures of Bob's heterodyne record; the switching comparison
measures one randomly chosen quadrature per use, directly.  The switching
formula is a reconstruction (direct single-quadrature detection with the
same Heisenberg-limited Eve) and is only compared against the no-switching
rate, never against absolute reference values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .modes import QUADS, ModeExpression, Quad, Quadratures, conjugate, covariance, variance
from .protocol import ChannelParams, SourceParams, build_protocol


class Target(str, enum.Enum):
    HETERODYNE = "BobHeterodyne"
    DIRECT = "BobDirect"


class Variant(str, enum.Enum):
    NO_SWITCHING = "NoSwitching"
    SWITCHING = "Switching"


@dataclass(frozen=True)
class ConditionalVariance:
    value: float
    conditioner: str  # "Alice", "Eve" or "EveJoint"
    target: Target
    quadrature: Quad
    optimal_gain: float | None = None


@dataclass(frozen=True)
class KeyRateReport:
    v_ab: Quadratures
    v_eb: Quadratures  # lower bound on Eve's conditional variance
    delta_i_plus: float
    delta_i_minus: float
    delta_i: float
    variant: Variant
    note: str = ""


def _max_squeezed(v_a: Quadratures, quad: Quad) -> SourceParams:
    """Source with all modulation in ``quad``, squeezed as far as allowed."""
    other = conjugate(quad)
    sq = {quad: 1.0 / v_a.of(other), other: v_a.of(other)}
    return SourceParams(v_a, (sq["+"], sq["-"]), squeezed=True)


def alice_conditional_variance(
    src: SourceParams,
    ch: ChannelParams,
    target: Target = Target.HETERODYNE,
    quad: Quad = "+",
    minimize_squeezing: bool = False,
) -> ConditionalVariance:
    """Residual variance of Bob's record after Alice's best linear estimate.

    With ``minimize_squeezing`` Alice's state is squeezed in ``quad`` down to
    ``1/V_A`` of the conjugate quadrature, which gives the smallest value any
    source of this total variance can reach.
    """
    target = Target(target)
    if minimize_squeezing:
        src = _max_squeezed(src.v_a, quad)
    v_s = src.v_s.of(quad)
    if v_s <= 0:
        raise ValueError(f"V_S{quad} = 0: no modulation, the optimal gain is undefined")
    modes = build_protocol(src, ch, switching=target is Target.DIRECT)
    cov_sb = covariance(ModeExpression.of_signal(), modes.bob, quad, src.v_s)
    gain = cov_sb / v_s
    # residual at the optimal gain; avoids cancellation in V_B - cov^2 / V_S
    residual = modes.bob - gain * ModeExpression.of_signal()
    value = variance(residual, quad, src.v_s)
    return ConditionalVariance(value, "Alice", target, quad, gain)


def eve_conditional_variance_bound(
    src: SourceParams,
    ch: ChannelParams,
    quad: Quad = "+",
    target: Target = Target.HETERODYNE,
) -> ConditionalVariance:
    """Smallest conditional variance Eve can have on Bob's ``quad`` record.

    Before Bob's beamsplitter, ``V_E|B'(q) * V_A|B'(-q) >= 1`` with Alice's
    term at its squeezing-optimised minimum.  Bob's beamsplitter then adds
    half a unit of vacuum Eve knows nothing about.
    """
    target = Target(target)
    v_ab_min = alice_conditional_variance(src, ch, Target.DIRECT, conjugate(quad), minimize_squeezing=True).value
    if v_ab_min <= 0:
        raise ValueError("Alice's minimum conditional variance vanishes (eta=0 with V_N=0); Eve's bound is singular")
    pre = 1.0 / v_ab_min
    value = pre if target is Target.DIRECT else 0.5 * (pre + 1.0)
    return ConditionalVariance(value, "Eve", target, quad, None)


def uncertainty_product(src: SourceParams, ch: ChannelParams, quad: Quad = "+") -> float:
    """``V_E|B'(q) * V_A|B'_min(-q)``; equals 1 when Eve's bound is saturated."""
    eve = eve_conditional_variance_bound(src, ch, quad, Target.DIRECT).value
    alice = alice_conditional_variance(src, ch, Target.DIRECT, conjugate(quad), minimize_squeezing=True).value
    return eve * alice


def secret_key_rate(src: SourceParams, ch: ChannelParams, variant: Variant = Variant.NO_SWITCHING) -> KeyRateReport:
    """Guaranteed reverse-reconciliation rate against the Heisenberg-limited Eve.

    Negative values mean the channel is insecure and are returned as-is.
    A channel with ``eta = 0`` carries nothing and reports rate 0.
    """
    variant = Variant(variant)
    target = Target.HETERODYNE if variant is Variant.NO_SWITCHING else Target.DIRECT
    v_ab = [alice_conditional_variance(src, ch, target, q).value for q in QUADS]
    v_eb = [eve_conditional_variance_bound(src, ch, q, target).value for q in QUADS]
    if ch.eta == 0.0:
        return KeyRateReport(Quadratures(*v_ab), Quadratures(*v_eb), 0.0, 0.0, 0.0, variant, note="degenerate channel")
    per_quad = [0.5 * math.log2(e / a) for a, e in zip(v_ab, v_eb)]
    if variant is Variant.NO_SWITCHING:
        total = per_quad[0] + per_quad[1]
    else:
        # one quadrature per use, chosen at random
        total = 0.5 * (per_quad[0] + per_quad[1])
    return KeyRateReport(Quadratures(*v_ab), Quadratures(*v_eb), per_quad[0], per_quad[1], total, variant)


def closed_form_rate(eta: float, v_n: float, v_a: float) -> float:
    """Symmetric coherent-state no-switching rate, in one line."""
    return math.log2((1.0 / (eta / v_a + (1 - eta) * v_n) + 1) / (eta + (1 - eta) * v_n + 1))


def closed_form_switching_rate(eta: float, v_n: float, v_a: float) -> float:
    return 0.5 * math.log2(1.0 / (eta / v_a + (1 - eta) * v_n) / (eta + (1 - eta) * v_n))


def keyrate_surface(
    etas: Sequence[float],
    v_ns: Sequence[float],
    src: SourceParams,
    variant: Variant = Variant.NO_SWITCHING,
) -> list[list[KeyRateReport]]:
    """Reports on the ``etas x v_ns`` grid, indexed ``[i_eta][j_vn]``."""
    if len(etas) == 0 or len(v_ns) == 0:
        raise ValueError("empty grid")
    for v in v_ns:
        if v < 1:
            raise ValueError(f"grid V_N = {v} < 1")
    return [[secret_key_rate(src, ChannelParams(eta, v_n), variant) for v_n in v_ns] for eta in etas]


def security_threshold(v_n: float, v_a: float, tol: float = 1e-6, scan: int = 1000) -> float | None:
    """Smallest ``eta`` above which the no-switching rate is positive.

    Returns ``None`` when the rate never changes sign on ``(0, 1]`` (e.g.
    ``V_N = 1``, secure everywhere).  The bracket comes from a coarse scan;
    the crossing is then bisected to ``tol``.
    """
    src = SourceParams.coherent(v_a)

    def rate(eta):
        return secret_key_rate(src, ChannelParams(eta, v_n)).delta_i

    etas = [k / scan for k in range(1, scan + 1)]
    prev_eta, prev = etas[0], rate(etas[0])
    if prev >= 0:
        return None
    for eta in etas[1:]:
        cur = rate(eta)
        if cur >= 0:
            lo, hi = prev_eta, eta
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if rate(mid) >= 0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev_eta, prev = eta, cur
    return None
