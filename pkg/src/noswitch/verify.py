"""Monte Carlo checks of the analytic variances, covariances and rates.

Analytic references come from the closed-form expressions where one exists
and from the mode algebra otherwise; the estimates come from sampling the
same physical setup.  A check passes when the two agree within
``MAX_SE`` standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import montecarlo as mc
from .attacks import (
    AttackConfig,
    build_attack_modes,
    closed_form_bob_variance,
    detection_budget,
    joint_conditional_variance,
)
from .modes import covariance
from .protocol import ChannelParams, SourceParams, build_protocol

MAX_SE = 5.0
DEFAULT_N = 1_000_000
DEFAULT_SEED = 42
CORRUPTION_FACTOR = 1.2


@dataclass(frozen=True)
class CheckResult:
    name: str
    analytic: float
    estimate: mc.EstimateWithError

    @property
    def se_multiple(self) -> float:
        return self.estimate.z(self.analytic)

    @property
    def passed(self) -> bool:
        return self.se_multiple <= MAX_SE


def _protocol_checks(n, seed, eta, v_n, v_a):
    src = SourceParams.coherent(v_a)
    ch = ChannelParams(eta, v_n)
    m = build_protocol(src, ch)
    batch = mc.sample(m.ws, {"X_A": m.alice, "X_Bp": m.arriving, "X_B": m.bob}, n, (*mc.seed_tuple(seed), 0), src.v_s)
    v_s = v_a - 1
    v_bp = eta * v_a + (1 - eta) * v_n
    v_b = (v_bp + 1) / 2
    v_ab = (eta + (1 - eta) * v_n + 1) / 2
    checks = []
    for q in "+-":
        checks += [
            (f"V_A{q} prepared", v_a, mc.estimate_variance(batch, "X_A", q)),
            (f"V_B'{q} arriving", v_bp, mc.estimate_variance(batch, "X_Bp", q)),
            (f"V_B{q} heterodyne", v_b, mc.estimate_variance(batch, "X_B", q)),
            (f"V_A|B{q} Alice conditional", v_ab, mc.estimate_conditional_variance(batch, "X_B", "S", q)),
        ]
    checks += [
        ("<S X_B'>+", math.sqrt(eta) * v_s, mc.estimate_covariance(batch, "S", "X_Bp", "+")),
        ("<S X_B>+", math.sqrt(eta / 2) * v_s, mc.estimate_covariance(batch, "S", "X_B", "+")),
        ("g_A+ optimal gain", math.sqrt(eta / 2), mc.estimate_gain(batch, "X_B", "S", "+")),
        ("I(B:A)+ bits", 0.5 * math.log2(v_b / v_ab), mc.estimate_mutual_information(batch, "S", "X_B", "+")),
    ]
    return checks


def _attack_checks(n, seed, eta, v_n, v_a, epsilon, squeezing, batch_id):
    src = SourceParams.coherent(v_a)
    ch = ChannelParams(eta, v_n)
    cfg = AttackConfig.with_squeezing(epsilon, squeezing)
    budget = detection_budget(src, ch, cfg)
    v_added = max(budget.v_added.plus, 0.0)
    cfg = AttackConfig.with_squeezing(epsilon, squeezing, v_added)
    m = build_attack_modes(src, ch, cfg)
    eve_view = m.x_b_ff.without([m.added_noise])
    exprs = {"X_E1": m.x_e1, "X_E2": m.x_e2, "X_Bff": m.x_b_ff, "X_Bff_eve": eve_view}
    batch = mc.sample(m.ws, exprs, n, (*mc.seed_tuple(seed), batch_id), src.v_s)
    s1, s2 = cfg.v_sqz1, cfg.v_sqz2
    tag = f"[sqz={squeezing:g}]"
    checks = []
    for q in "+-":
        vs = s1.of(q) + s2.of(q)
        joint = joint_conditional_variance(m.x_b_ff, m.x_e1, m.x_e2, src.v_s, q, [m.added_noise])
        checks += [
            (f"V_E1{q} {tag}", (vs + 2) / 4, mc.estimate_variance(batch, "X_E1", q)),
            (f"V_E2{q} {tag}", ((1 - epsilon) * v_a + epsilon * vs / 2 + 1) / 2, mc.estimate_variance(batch, "X_E2", q)),
            (
                f"V_B^ff{q} {tag}",
                closed_form_bob_variance(eta, epsilon, v_a, s1.of(q), s2.of(q), v_added),
                mc.estimate_variance(batch, "X_Bff", q),
            ),
            (
                f"V_E1,E2|B{q} {tag}",
                joint.value,
                mc.estimate_conditional_variance(batch, "X_Bff_eve", ["X_E1", "X_E2"], q),
            ),
        ]
    checks += [
        (f"<X_B X_E1>+ {tag}", covariance(eve_view, m.x_e1, "+", src.v_s), mc.estimate_covariance(batch, "X_Bff_eve", "X_E1", "+")),
        (f"<X_B X_E2>+ {tag}", covariance(eve_view, m.x_e2, "+", src.v_s), mc.estimate_covariance(batch, "X_Bff_eve", "X_E2", "+")),
        (f"<X_E1 X_E2>+ {tag}", covariance(m.x_e1, m.x_e2, "+", src.v_s), mc.estimate_covariance(batch, "X_E1", "X_E2", "+")),
        (
            f"V_A|B+ under attack {tag}",
            (eta + (1 - eta) * v_n + 1) / 2,
            mc.estimate_conditional_variance(batch, "X_Bff", "S", "+"),
        ),
    ]
    return checks


def run_oracle_suite(n: int = DEFAULT_N, seed=DEFAULT_SEED, corrupt: str | None = None) -> list[CheckResult]:
    """All pinned checks; ``corrupt`` names a check whose reference is
    deliberately scaled by ``CORRUPTION_FACTOR`` (negative control)."""
    raw = _protocol_checks(n, seed, eta=0.5, v_n=1.5, v_a=100.0)
    raw += _attack_checks(n, seed, eta=0.5, v_n=2.0, v_a=100.0, epsilon=0.3, squeezing=0.5, batch_id=1)
    raw += _attack_checks(n, seed, eta=0.7, v_n=1.5, v_a=100.0, epsilon=0.6, squeezing=1.0, batch_id=2)
    results = []
    for name, analytic, est in raw:
        if corrupt is not None and name == corrupt:
            analytic *= CORRUPTION_FACTOR
        results.append(CheckResult(name, analytic, est))
    if corrupt is not None and not any(r.name == corrupt for r in results):
        raise KeyError(f"no check named {corrupt!r}")
    return results
