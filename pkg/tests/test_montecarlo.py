import hashlib
import math

import numpy as np
import pytest

from noswitch import montecarlo as mc
from noswitch.attacks import AttackConfig, build_attack_modes, joint_conditional_variance
from noswitch.modes import ModeExpression, Workspace
from noswitch.protocol import ChannelParams, SourceParams, build_protocol

N = 1_000_000


def digest(batch):
    h = hashlib.sha256()
    for name in sorted(batch.records):
        for q in "+-":
            h.update(batch.records[name][q].tobytes())
    return h.hexdigest()


@pytest.fixture(scope="module")
def hetero_batch():
    src = SourceParams.coherent(100.0)
    m = build_protocol(src, ChannelParams(1.0, 1.0))
    return mc.sample(m.ws, {"X_B": m.bob, "X_A": m.alice}, N, 7, src.v_s)


def test_zero_expression_gives_zero_records():
    ws = Workspace()
    ws.vacuum("v")
    b = mc.sample(ws, {"Z": ModeExpression.zero()}, 1000, 1, 0.0)
    assert not b.record("Z", "+").any()


def test_vacuum_variance_within_chi_square_error():
    ws = Workspace()
    v = ModeExpression.of_symbol(ws.vacuum("v"))
    b = mc.sample(ws, {"v": v}, N, 3, 0.0)
    est = mc.estimate_variance(b, "v", "+")
    assert abs(est.value - 1.0) < 5 * math.sqrt(2 / N)


def test_seeded_sampling_is_bit_identical():
    src = SourceParams.coherent(10.0)
    m = build_protocol(src, ChannelParams(0.5, 1.5))
    a = mc.sample(m.ws, {"B": m.bob}, 200_000, 11, src.v_s)
    b = mc.sample(m.ws, {"B": m.bob}, 200_000, 11, src.v_s)
    c = mc.sample(m.ws, {"B": m.bob}, 200_000, 12, src.v_s)
    assert digest(a) == digest(b) != digest(c)


def test_threaded_sampling_matches_serial():
    src = SourceParams.coherent(10.0)
    m = build_protocol(src, ChannelParams(0.5, 1.5))
    a = mc.sample(m.ws, {"B": m.bob}, 300_000, 5, src.v_s)
    b = mc.sample(m.ws, {"B": m.bob}, 300_000, 5, src.v_s, workers=4)
    assert digest(a) == digest(b)


def test_conditioning_on_itself_leaves_nothing(hetero_batch):
    est = mc.estimate_conditional_variance(hetero_batch, "X_B", "X_B", "+")
    assert est.value == pytest.approx(0.0, abs=1e-9)


def test_alice_conditional_at_unit_transmission(hetero_batch):
    for q in "+-":
        est = mc.estimate_conditional_variance(hetero_batch, "X_B", "S", q)
        assert est.z(1.0) < 5


def test_mutual_information_at_unit_transmission(hetero_batch):
    expected = 0.5 * math.log2(50.5)
    assert expected == pytest.approx(2.8291, abs=5e-5)
    for q in "+-":
        assert mc.estimate_mutual_information(hetero_batch, "S", "X_B", q).z(expected) < 5


def test_mutual_information_of_independent_records_is_small():
    ws = Workspace()
    a = ModeExpression.of_symbol(ws.vacuum("a"))
    b = ModeExpression.of_symbol(ws.vacuum("b"))
    batch = mc.sample(ws, {"a": a, "b": b}, N, 9, 0.0)
    est = mc.estimate_mutual_information(batch, "a", "b", "+")
    assert abs(est.value) < 1e-5


def test_mutual_information_grows_with_modulation():
    vals = []
    for v_a in (11.0, 21.0, 41.0):
        src = SourceParams.coherent(v_a)
        m = build_protocol(src, ChannelParams(0.5, 1.5))
        batch = mc.sample(m.ws, {"B": m.bob}, 200_000, 21, src.v_s)
        vals.append(mc.estimate_mutual_information(batch, "S", "B", "+").value)
    assert vals[0] < vals[1] < vals[2]


def test_two_conditioners_match_joint_formula():
    rng = np.random.default_rng(2024)
    for _ in range(3):
        eta, eps, r = rng.uniform(0.2, 0.8), rng.uniform(0.1, 0.9), rng.choice([1.0, 0.5, 0.2])
        src = SourceParams.coherent(50.0)
        cfg = AttackConfig.with_squeezing(eps, r, v_added=0.3)
        m = build_attack_modes(src, ChannelParams(eta, 2.0), cfg)
        view = m.x_b_ff.without([m.added_noise])
        batch = mc.sample(m.ws, {"B": view, "E1": m.x_e1, "E2": m.x_e2}, N, 33, src.v_s)
        for q in "+-":
            ref = joint_conditional_variance(m.x_b_ff, m.x_e1, m.x_e2, src.v_s, q, [m.added_noise]).value
            assert mc.estimate_conditional_variance(batch, "B", ["E1", "E2"], q).z(ref) < 5


def test_gain_estimate():
    src = SourceParams.coherent(100.0)
    m = build_protocol(src, ChannelParams(0.5, 1.5))
    batch = mc.sample(m.ws, {"B": m.bob}, N, 4, src.v_s)
    assert mc.estimate_gain(batch, "B", "S", "+").z(math.sqrt(0.25)) < 5


def test_reserved_and_undeclared_names():
    ws, other = Workspace(), Workspace()
    v = ModeExpression.of_symbol(other.vacuum("v"))
    with pytest.raises(KeyError):
        mc.sample(ws, {"v": v}, 10, 0, 0.0)
    with pytest.raises(ValueError):
        mc.sample(other, {"S": v}, 10, 0, 0.0)
    with pytest.raises(ValueError):
        mc.sample(other, {"v": v}, 1, 0, 0.0)


def test_standard_error_scales_with_root_n():
    ws = Workspace()
    v = ModeExpression.of_symbol(ws.mode("v", 2.0, 0.5))
    small = mc.estimate_variance(mc.sample(ws, {"v": v}, 10_000, 1, 0.0), "v", "+").se
    large = mc.estimate_variance(mc.sample(ws, {"v": v}, N, 1, 0.0), "v", "+").se
    assert small / large == pytest.approx(10.0, rel=0.05)


def test_z_score_edge_cases():
    assert mc.EstimateWithError(1.0, 0.0, 5).z(1.0) == 0.0
    assert mc.EstimateWithError(1.0, 0.0, 5).z(2.0) == math.inf
