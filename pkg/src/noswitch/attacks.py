"""Feed-forward eavesdropping attacks on the no-switching protocol.

Eve taps the channel with a beamsplitter of transmittance ``epsilon`` whose
other input is one arm of an EPR pair (vacuum for the coherent attack).  She
heterodynes the tapped light, feeds the photocurrents forward onto Bob's beam
with a gain that restores the expected signal amplitude, and tops up the
noise with classical Gaussian noise she records exactly.  The retained EPR
arm is heterodyned too.  Her information is the residual variance of Bob's
record given both of her heterodyne records.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .keyrate import alice_conditional_variance, secret_key_rate
from .modes import QUADS, ModeExpression, NoiseSymbol, Quad, Quadratures, Workspace, beamsplitter, covariance, variance
from .optimize import bisect_boundary, golden_section
from .protocol import ChannelParams, SourceParams, alice_state, heterodyne

# Eve's squeezing levels tried by the entanglement attack.
DEFAULT_SQUEEZING = (1.0, 0.5, 0.1, 0.01)
# Smallest tap transmittance searched; epsilon = 0 itself is excluded.
EPS_FLOOR = 1e-9
BOUNDARY_TOL = 1e-10
# Noise budgets within this of zero are treated as exactly saturated.
BUDGET_TOL = 1e-12
SCAN_POINTS = 200
SCAN_AGREEMENT = 1e-6


class AttackKind(str, enum.Enum):
    COHERENT_FF = "coherent"
    ENTANGLEMENT_FF = "entanglement"


class AttackOptimizationError(RuntimeError):
    """Golden-section and grid-scan optima disagree."""


def epr_resource(squeezing: float) -> tuple[Quadratures, Quadratures]:
    """Variances of two beams squeezed to ``squeezing`` in conjugate quadratures.

    Mixed on a 50/50 beamsplitter they form an EPR pair; ``squeezing = 1``
    gives two vacua.
    """
    if squeezing <= 0:
        raise ValueError("squeezing variance must be positive")
    return Quadratures(squeezing, 1 / squeezing), Quadratures(1 / squeezing, squeezing)


def feed_forward_gain(eta: float, epsilon: float) -> float:
    """Gain restoring Bob's signal amplitude to ``sqrt(eta)``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.sqrt(2) * (math.sqrt(eta) - math.sqrt(epsilon)) / math.sqrt(1 - epsilon)


@dataclass(frozen=True)
class AttackConfig:
    epsilon: float
    v_sqz1: Quadratures | float = 1.0
    v_sqz2: Quadratures | float = 1.0
    v_added: Quadratures | float = 0.0

    def __post_init__(self):
        for name in ("v_sqz1", "v_sqz2", "v_added"):
            object.__setattr__(self, name, Quadratures.coerce(getattr(self, name)))
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if min(self.v_added) < 0:
            raise ValueError("added noise variance must be nonnegative")

    @classmethod
    def with_squeezing(cls, epsilon: float, squeezing: float = 1.0, v_added=0.0) -> "AttackConfig":
        s1, s2 = epr_resource(squeezing)
        return cls(epsilon, s1, s2, v_added)

    def gain(self, eta: float) -> float:
        return feed_forward_gain(eta, self.epsilon)


@dataclass(frozen=True)
class AttackModes:
    ws: Workspace
    alice: ModeExpression
    x_e1: ModeExpression
    x_e2: ModeExpression
    forwarded: ModeExpression  # what Eve sends on to Bob, before his beamsplitter
    x_b_ff: ModeExpression
    added_noise: NoiseSymbol
    gain: float


def build_attack_modes(src: SourceParams, ch: ChannelParams, cfg: AttackConfig) -> AttackModes:
    """Construct Eve's two records and Bob's attacked record."""
    ws = Workspace()
    x_a = alice_state(src, ws)
    sqz1 = ws.mode("sqz1", cfg.v_sqz1.plus, cfg.v_sqz1.minus)
    sqz2 = ws.mode("sqz2", cfg.v_sqz2.plus, cfg.v_sqz2.minus)
    epr1, epr2 = beamsplitter(ModeExpression.of_symbol(sqz1), ModeExpression.of_symbol(sqz2), 0.5)
    x_e1 = heterodyne(epr2, ws, "N_E1")
    to_bob, to_eve = beamsplitter(x_a, epr1, cfg.epsilon)
    x_e2 = heterodyne(to_eve, ws, "N_E2")
    g = cfg.gain(ch.eta)
    added = ws.noise("N_add", cfg.v_added.plus, cfg.v_added.minus)
    forwarded = to_bob + g * x_e2 + ModeExpression.of_symbol(added)
    x_b_ff = heterodyne(forwarded, ws, "N_B")
    return AttackModes(ws, x_a, x_e1, x_e2, forwarded, x_b_ff, added, g)


@dataclass(frozen=True)
class DetectionBudget:
    induced: Quadratures  # noise Eve's manipulation puts on the channel
    v_added: Quadratures  # what she must add to match the passive channel
    feasible: bool


def detection_budget(src: SourceParams, ch: ChannelParams, cfg: AttackConfig) -> DetectionBudget:
    """Noise Eve may still add, in units of the beam arriving at Bob.

    Bob expects ``(eta V_A + (1 - eta) V_N + 1) / 2``.  The attacked record
    is built with no added noise; subtracting the calibrated signal part
    ``sqrt(eta / 2) X_A`` leaves ``(induced + 1) / 2``.  Any ``cfg.v_added``
    is ignored.
    """
    bare = AttackConfig(cfg.epsilon, cfg.v_sqz1, cfg.v_sqz2, 0.0)
    modes = build_attack_modes(src, ch, bare)
    excess = modes.x_b_ff - math.sqrt(ch.eta / 2) * modes.alice
    induced = Quadratures(*(2 * variance(excess, q, src.v_s) - 1 for q in QUADS))
    budget = Quadratures(*((1 - ch.eta) * ch.v_n.of(q) - induced.of(q) for q in QUADS))
    feasible = min(budget) >= -BUDGET_TOL
    v_added = Quadratures(*(max(b, 0.0) if abs(b) <= BUDGET_TOL else b for b in budget))
    return DetectionBudget(induced, v_added, feasible)


@dataclass(frozen=True)
class JointConditional:
    value: float
    gains: tuple[float, float]
    degenerate: bool = False


def joint_conditional_variance(
    x_b: ModeExpression,
    x_e1: ModeExpression,
    x_e2: ModeExpression,
    v_s: Quadratures | float,
    quad: Quad = "+",
    known: Sequence[NoiseSymbol] = (),
) -> JointConditional:
    """Residual variance of ``x_b`` after the best linear estimate from two records.

    Symbols in ``known`` (noise the estimator generated herself) are removed
    from ``x_b`` first.  A singular Gram matrix falls back to the better of
    the two single-record estimates and is flagged ``degenerate``.
    """
    x_b = x_b.without(known)
    v_b = variance(x_b, quad, v_s)
    v1 = variance(x_e1, quad, v_s)
    v2 = variance(x_e2, quad, v_s)
    c1 = covariance(x_b, x_e1, quad, v_s)
    c2 = covariance(x_b, x_e2, quad, v_s)
    c12 = covariance(x_e1, x_e2, quad, v_s)
    det = v1 * v2 - c12**2
    if det <= 1e-12 * max(v1 * v2, 1e-300):
        gain1 = c1 / v1 if v1 > 0 else 0.0
        gain2 = c2 / v2 if v2 > 0 else 0.0
        r1 = v_b - gain1 * c1
        r2 = v_b - gain2 * c2
        if r1 <= r2:
            return JointConditional(r1, (gain1, 0.0), True)
        return JointConditional(r2, (0.0, gain2), True)
    value = v_b - (v1 * c2**2 + v2 * c1**2 - 2 * c1 * c2 * c12) / det
    gains = ((c1 * v2 - c2 * c12) / det, (c2 * v1 - c1 * c12) / det)
    return JointConditional(value, gains)


@dataclass(frozen=True)
class AttackOutcome:
    kind: AttackKind
    eta: float
    v_n: Quadratures
    epsilon_star: float
    squeezing: float
    gain: float
    v_added: Quadratures
    v_e1: Quadratures
    v_e2: Quadratures
    cov_b_e1: Quadratures
    cov_b_e2: Quadratures
    cov_e1_e2: Quadratures
    v_eb_joint: Quadratures
    v_eb_prime: Quadratures  # Eve's inference of the beam before Bob's beamsplitter
    v_ab: Quadratures
    delta_i_attack: float
    delta_i_bound: float
    feasible: bool
    interval: tuple[float, float] | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def gap(self) -> float:
        return self.delta_i_attack - self.delta_i_bound


def _v_ab(src: SourceParams, ch: ChannelParams) -> Quadratures:
    return Quadratures(*(alice_conditional_variance(src, ch, quad=q).value for q in QUADS))


def _attack_rate(src, ch, cfg, v_ab: Quadratures) -> float:
    modes = build_attack_modes(src, ch, cfg)
    total = 0.0
    for q in QUADS:
        v_eb = joint_conditional_variance(modes.x_b_ff, modes.x_e1, modes.x_e2, src.v_s, q, (modes.added_noise,)).value
        total += 0.5 * math.log2(v_eb / v_ab.of(q))
    return total


def evaluate_attack(
    src: SourceParams,
    ch: ChannelParams,
    cfg: AttackConfig,
    kind: AttackKind = AttackKind.COHERENT_FF,
    squeezing: float = 1.0,
    interval: tuple[float, float] | None = None,
) -> AttackOutcome:
    """Full outcome of one attack configuration.

    The added noise is always set from :func:`detection_budget`;
    ``cfg.v_added`` is ignored.
    """
    budget = detection_budget(src, ch, cfg)
    cfg = AttackConfig(cfg.epsilon, cfg.v_sqz1, cfg.v_sqz2, Quadratures(*(max(v, 0.0) for v in budget.v_added)))
    modes = build_attack_modes(src, ch, cfg)
    known = (modes.added_noise,)
    v_s = src.v_s
    v_ab = _v_ab(src, ch)
    stats = {k: [] for k in ("v_e1", "v_e2", "c1", "c2", "c12", "veb", "vebp")}
    delta = 0.0
    for q in QUADS:
        stats["v_e1"].append(variance(modes.x_e1, q, v_s))
        stats["v_e2"].append(variance(modes.x_e2, q, v_s))
        stats["c1"].append(covariance(modes.x_b_ff, modes.x_e1, q, v_s))
        stats["c2"].append(covariance(modes.x_b_ff, modes.x_e2, q, v_s))
        stats["c12"].append(covariance(modes.x_e1, modes.x_e2, q, v_s))
        veb = joint_conditional_variance(modes.x_b_ff, modes.x_e1, modes.x_e2, v_s, q, known).value
        stats["veb"].append(veb)
        stats["vebp"].append(joint_conditional_variance(modes.forwarded, modes.x_e1, modes.x_e2, v_s, q, known).value)
        delta += 0.5 * math.log2(veb / v_ab.of(q))
    bound = secret_key_rate(src, ch).delta_i
    pq = {k: Quadratures(*v) for k, v in stats.items()}
    return AttackOutcome(
        kind=AttackKind(kind),
        eta=ch.eta,
        v_n=ch.v_n,
        epsilon_star=cfg.epsilon,
        squeezing=squeezing,
        gain=modes.gain,
        v_added=budget.v_added,
        v_e1=pq["v_e1"],
        v_e2=pq["v_e2"],
        cov_b_e1=pq["c1"],
        cov_b_e2=pq["c2"],
        cov_e1_e2=pq["c12"],
        v_eb_joint=pq["veb"],
        v_eb_prime=pq["vebp"],
        v_ab=v_ab,
        delta_i_attack=delta,
        delta_i_bound=bound,
        feasible=budget.feasible,
        interval=interval,
    )


def _budget_vertex(eta: float, sigma: float, budget: float) -> float:
    """Centre, in ``sqrt(epsilon)``, of the tap settings that fit the budget.

    Eve's induced noise is ``(sigma (1 - sqrt(eps eta))^2 + (sqrt(eta) -
    sqrt(eps))^2) / (1 - eps)``, with ``sigma`` the variance of her injected
    EPR arm; staying within ``budget`` is a quadratic inequality in
    ``sqrt(eps)`` whose vertex lies inside the feasible set when it is
    nonempty.
    """
    return math.sqrt(eta) * (sigma + 1) / (sigma * eta + 1 + budget)


def feasible_interval(src: SourceParams, ch: ChannelParams, squeezing: float = 1.0) -> tuple[float, float] | None:
    """``[eps_min, eps_max]`` where the attack stays within the noise budget.

    Each quadrature's boundary is bisected outward from the centre of its
    feasible set; the quadratures' intervals are then intersected.
    """
    s1, s2 = epr_resource(squeezing)
    lo, hi = EPS_FLOOR, 1.0 - EPS_FLOOR
    for q in QUADS:
        sigma = 0.5 * (s1.of(q) + s2.of(q))
        budget_total = (1 - ch.eta) * ch.v_n.of(q)
        centre = min(max(_budget_vertex(ch.eta, sigma, budget_total) ** 2, EPS_FLOOR), 1 - EPS_FLOOR)

        def slack(eps, q=q):
            b = detection_budget(src, ch, AttackConfig(eps, s1, s2))
            return budget_total - b.induced.of(q)

        peak = slack(centre)
        if peak < -BUDGET_TOL:
            return None
        if peak <= BUDGET_TOL:
            q_lo = q_hi = centre
        else:
            q_lo = EPS_FLOOR if slack(EPS_FLOOR) >= 0 else bisect_boundary(slack, EPS_FLOOR, centre, BOUNDARY_TOL)
            q_hi = bisect_boundary(slack, centre, 1 - EPS_FLOOR, BOUNDARY_TOL)
        lo, hi = max(lo, q_lo), min(hi, q_hi)
        if lo > hi:
            return None
    return lo, hi


def _optimize_epsilon(src, ch, squeezing, kind) -> AttackOutcome | None:
    interval = feasible_interval(src, ch, squeezing)
    if interval is None:
        return None
    lo, hi = interval
    s1, s2 = epr_resource(squeezing)
    v_ab = _v_ab(src, ch)

    def objective(eps):
        return _attack_rate(src, ch, AttackConfig(eps, s1, s2), v_ab)

    if hi - lo <= BOUNDARY_TOL:
        eps_star = lo
    else:
        eps_gs = golden_section(objective, lo, hi, BOUNDARY_TOL)
        candidates = [(objective(e), e) for e in (lo, eps_gs, hi)]
        best = min(v for v, _ in candidates)
        # flat minima resolve to the smallest epsilon
        eps_star = min(e for v, e in candidates if v <= best + 1e-12)
        scan = np.linspace(lo, hi, SCAN_POINTS)
        scan_vals = [objective(e) for e in scan]
        if min(scan_vals) < best - SCAN_AGREEMENT:
            i = int(np.argmin(scan_vals))
            raise AttackOptimizationError(
                f"golden-section optimum {best:.12g} at eps={eps_star:.12g} beaten by scan "
                f"{scan_vals[i]:.12g} at eps={scan[i]:.12g}; eta={ch.eta}, V_N={tuple(ch.v_n)}, "
                f"squeezing={squeezing}, interval=({lo:.12g}, {hi:.12g})"
            )
    return evaluate_attack(src, ch, AttackConfig(eps_star, s1, s2), kind, squeezing, interval)


def optimize_attack(
    src: SourceParams,
    ch: ChannelParams,
    kind: AttackKind = AttackKind.COHERENT_FF,
    squeezing_grid: Sequence[float] = DEFAULT_SQUEEZING,
) -> AttackOutcome:
    """Eve's best tap transmittance (and squeezing, for the EPR attack).

    Minimises the attack's key rate over the feasible interval.  When no
    setting fits the noise budget the outcome is the passive tap at
    ``epsilon = eta`` flagged ``feasible=False``.
    """
    kind = AttackKind(kind)
    if not 0.0 < ch.eta < 1.0:
        raise ValueError("attacks need 0 < eta < 1")
    if min(ch.v_n) < 1.0:
        raise ValueError("attacks need V_N >= 1")
    levels = (1.0,) if kind is AttackKind.COHERENT_FF else tuple(squeezing_grid)
    if not levels:
        raise ValueError("empty squeezing grid")
    best: AttackOutcome | None = None
    for r in levels:
        out = _optimize_epsilon(src, ch, r, kind)
        if out is None:
            continue
        if best is None or out.delta_i_attack < best.delta_i_attack - 1e-12 or (
            abs(out.delta_i_attack - best.delta_i_attack) <= 1e-12 and out.epsilon_star < best.epsilon_star
        ):
            best = out
    if best is None:
        out = evaluate_attack(src, ch, AttackConfig(ch.eta), kind, 1.0)
        return AttackOutcome(**{**out.__dict__, "feasible": False, "notes": ("no feasible tap setting",)})
    return best


def closed_form_induced_noise(eta: float, epsilon: float, v_sqz1: float, v_sqz2: float) -> float:
    """Noise the feed-forward attack puts on the channel, in closed form."""
    vs = v_sqz1 + v_sqz2
    num = (vs + 2 * epsilon) - 2 * math.sqrt(epsilon * eta) * (2 + vs) + eta * (2 + epsilon * vs)
    return num / (2 * (1 - epsilon))


def closed_form_bob_variance(eta: float, epsilon: float, v_a: float, v_sqz1: float, v_sqz2: float, v_added: float) -> float:
    """Bob's attacked heterodyne variance, in closed form."""
    vs = v_sqz1 + v_sqz2
    bracket = 2 + vs - 2 * math.sqrt(eta * epsilon) * (2 + vs) + 2 * eta + eta * epsilon * vs
    return eta * v_a / 2 + v_added / 2 - bracket / (4 * epsilon - 4)


def attack_table(
    etas: Sequence[float],
    v_ns: Sequence[float],
    v_a: float,
    kinds: Sequence[AttackKind] = (AttackKind.COHERENT_FF, AttackKind.ENTANGLEMENT_FF),
    squeezing_grid: Sequence[float] = DEFAULT_SQUEEZING,
) -> list[AttackOutcome]:
    """Optimised outcomes ordered by ``(eta, v_n, kind)``."""
    src = SourceParams.coherent(v_a)
    rows = []
    for eta in etas:
        for v_n in v_ns:
            ch = ChannelParams(eta, v_n)
            for kind in kinds:
                rows.append(optimize_attack(src, ch, kind, squeezing_grid))
    return rows

