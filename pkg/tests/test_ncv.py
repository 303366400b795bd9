import itertools
import random

import numpy as np
import pytest

from conftest import X, equal_up_to_phase, gate_matrix, oracle_unitary
from pprm_synth.circuit import AUXILIARY, Circuit, MctGate, NcvGate
from pprm_synth.ncv import (
    ALL_VARIANTS, CostReport, ToffoliVariant, apply_dr1, apply_dr2, apply_dr3,
    decompose_toffoli, elide_trailing_ncv, lower_detailed, parse_variant_policy,
    quantum_cost, route_rule, simplify_gates, to_toffoli_level,
)
from pprm_synth.pipeline import PipelineConfig, run_pipeline
from pprm_synth.pprm import parse_pprm
from pprm_synth.verify import check_equivalence, simulate_mct_batch


def mct_table(w, gates):
    rows = np.array(list(itertools.product((0, 1), repeat=w)), dtype=np.uint8)
    c = Circuit.for_function(w - 1).with_gates(gates)
    return simulate_mct_batch(c, rows)


@pytest.mark.parametrize("variant", ALL_VARIANTS, ids=lambda v: f"{v.polarity}-{v.index}")
def test_toffoli_variants_match_oracle(variant):
    ncv = variant.expand()
    assert len(ncv) == 5
    g = variant.gate()
    want = gate_matrix(3, g.controls, g.target, X)
    got = oracle_unitary(3, ncv)
    assert np.allclose(got, want, atol=1e-12)


def test_mixed_polarity_toffoli():
    for pol in itertools.product((True, False), repeat=2):
        g = MctGate(((0, pol[0]), (2, pol[1])), 1)
        for k in range(1, 5):
            ncv = decompose_toffoli(g, k)
            assert np.allclose(oracle_unitary(3, ncv), gate_matrix(3, g.controls, 1, X), atol=1e-12)


def test_variant_validation():
    with pytest.raises(ValueError):
        ToffoliVariant(5)
    with pytest.raises(ValueError):
        decompose_toffoli(MctGate(((0, True),), 1))


def test_route_rule_table():
    assert route_rule(2, 5) is None
    assert route_rule(4, 5) == "DR3"
    assert route_rule(3, 5) == "DR1"
    assert route_rule(3, 6) == "DR1"
    assert route_rule(4, 6) == "DR2"
    assert route_rule(5, 8) == "DR2"
    with pytest.raises(ValueError):
        route_rule(3, 3)  # more controls than spare lines


def test_dr1_ladder_counts_and_function():
    for m, w in [(3, 5), (3, 6), (4, 7), (4, 8)]:
        g = MctGate(tuple((i, True) for i in range(m)), w - 1)
        c = Circuit.for_function(w - 1)
        parts = apply_dr1(g, c)
        assert len(parts) == 4 * (m - 2)
        assert all(len(p.controls) == 2 for p in parts)
        assert np.array_equal(mct_table(w, parts), mct_table(w, [g]))


def test_dr2_counts_and_function():
    g = MctGate(tuple((i, True) for i in range(4)), 5)
    c = Circuit.for_function(5)
    parts = apply_dr2(g, c)
    assert [len(p.controls) for p in parts] == [3, 2, 3, 2]
    assert np.array_equal(mct_table(6, parts), mct_table(6, [g]))
    tf = apply_dr2(g, c, target_first=True)
    assert tf[0].target == 5 and tf[-1].target != 5
    assert np.array_equal(mct_table(6, tf), mct_table(6, [g]))


def test_dr3_adds_one_line():
    g = MctGate(tuple((i, True) for i in range(4)), 4)
    c = Circuit.for_function(4)
    c2, parts = apply_dr3(g, c)
    assert c2.width == c.width + 1
    assert c2.lines[-1].kind == AUXILIARY and c2.lines[-1].name == "L1"
    rows = np.array(list(itertools.product((0, 1), repeat=6)), dtype=np.uint8)
    got = simulate_mct_batch(c2.with_gates(parts), rows)
    want = simulate_mct_batch(c2.with_gates([g]), rows)
    assert np.array_equal(got, want)
    with pytest.raises(ValueError):
        apply_dr3(MctGate(((0, True), (1, True), (2, True)), 4), c)


def test_toffoli_level_random_equivalent():
    rng = random.Random(8)
    for _ in range(60):
        w = rng.randint(3, 8)
        gates = []
        for _ in range(rng.randint(1, 4)):
            t = rng.randrange(w)
            pool = [i for i in range(w) if i != t]
            ctrls = rng.sample(pool, rng.randint(0, len(pool)))
            gates.append(MctGate(tuple((x, rng.random() < 0.7) for x in ctrls), t))
        c = Circuit.for_function(w - 1).with_gates(gates)
        tof = to_toffoli_level(c)
        assert all(len(g.controls) <= 2 for g in tof.gates)
        extra = tof.width - c.width
        rows = np.array(list(itertools.product((0, 1), repeat=w)), dtype=np.uint8)
        for aux in itertools.product((0, 1), repeat=extra):
            full = np.hstack([rows, np.tile(np.array(aux, dtype=np.uint8), (len(rows), 1))])
            got = simulate_mct_batch(tof, full)
            assert np.array_equal(got[:, :w], simulate_mct_batch(c, rows))
            assert np.array_equal(got[:, w:], full[:, w:])


def random_ncv(rng, w, n):
    out = []
    for _ in range(n):
        t = rng.randrange(w)
        if rng.random() < 0.15:
            out.append(NcvGate("NOT", t))
            continue
        ctl = rng.choice([i for i in range(w) if i != t])
        out.append(NcvGate(rng.choice(["CNOT", "CV", "CVdag"]), t, (ctl, rng.random() < 0.8)))
    return out


def test_simplify_preserves_unitary_random():
    rng = random.Random(21)
    for _ in range(200):
        w = rng.randint(2, 4)
        gates = random_ncv(rng, w, rng.randint(1, 16))
        s = simplify_gates(gates)
        assert len(s) <= len(gates)
        assert equal_up_to_phase(oracle_unitary(w, gates), oracle_unitary(w, s))


def test_simplify_merge_rules():
    cv, cvd, cx = (NcvGate(k, 1, (0, True)) for k in ("CV", "CVdag", "CNOT"))
    assert simplify_gates([cv, cv]) == [cx]
    assert simplify_gates([cv, cvd]) == []
    assert simplify_gates([cvd, cx]) == [cv]
    assert simplify_gates([cv, cx]) == [cvd]
    assert simplify_gates([cx, cx]) == []
    # commuting past a gate on other lines
    other = NcvGate("CNOT", 3, (2, True))
    assert simplify_gates([cv, other, cv]) == [cx, other]
    # blocked when the middle gate flips the control
    blocker = NcvGate("NOT", 0)
    assert simplify_gates([cv, blocker, cv]) == [cv, blocker, cv]


def test_simplify_start_matches_full_pass():
    rng = random.Random(4)
    for _ in range(50):
        pre = simplify_gates(random_ncv(rng, 4, 12))
        tail = random_ncv(rng, 4, 5)
        assert len(simplify_gates(pre + tail, start=len(pre))) <= len(pre) + len(tail)
        a = oracle_unitary(4, simplify_gates(pre + tail, start=len(pre)))
        assert equal_up_to_phase(a, oracle_unitary(4, pre + tail))


def test_elide_trailing_ncv():
    gs = [NcvGate("CNOT", 2, (0, True)), NcvGate("CNOT", 1, (0, True))]
    assert elide_trailing_ncv(gs, 2) == gs[:1]


def test_variant_policy_parse():
    assert parse_variant_policy("greedy") is None
    assert parse_variant_policy("fixed:3") == 3
    assert parse_variant_policy(2) == 2
    for bad in ("fixed:9", "best", 0):
        with pytest.raises(ValueError):
            parse_variant_policy(bad)


def test_lowering_reports_variants_and_verifies():
    f = parse_pprm("x1x2x3x4 + x1(x3 + x5)")
    res = run_pipeline(f, PipelineConfig(rearrange=False))
    low = res.lowering
    assert len(low.variants) == sum(1 for g in low.toffoli.gates if len(g.controls) == 2)
    assert len(low.decomposed.gates) >= len(low.simplified.gates) >= len(low.final.gates)
    assert check_equivalence(low.final, f).equivalent


def test_fixed_policy_never_beats_greedy_on_examples():
    for text in ["x1x2x3x4 + x1x3 + x1x5", "x1(x3 + x5) + x1x2x3x4"]:
        f = parse_pprm(text)
        greedy = run_pipeline(f).qc
        for k in range(1, 5):
            assert run_pipeline(f, PipelineConfig(variant_policy=f"fixed:{k}")).qc >= greedy


def test_golden_costs():
    f1 = parse_pprm("x1x2x3x4 + x1x3 + x1x5")
    assert run_pipeline(f1, PipelineConfig(rearrange=False)).qc == 42
    f2 = parse_pprm("x1(x3 + x5) + x1x2x3x4")
    assert run_pipeline(f2).qc == 30
    ex = parse_pprm("x1x2x4 + x2x3x4 + x2x3 + x2x4 + x1 + x1x2x3~x4")
    r = run_pipeline(ex)
    assert 45 <= r.qc <= 47
    assert r.equivalence.equivalent


def test_quantum_cost_models():
    gates = [
        NcvGate("CV", 2, (0, False)), NcvGate("CVdag", 2, (1, True)),
        NcvGate("CNOT", 1, (0, True)), NcvGate("NOT", 0),
    ]
    c = Circuit.for_function(2).with_gates(gates, stage="NCV")
    rep = quantum_cost(c)
    assert isinstance(rep, CostReport)
    assert rep.qc("annotated") == 4
    assert rep.negative_controls == 1
    assert rep.qc("strict-export") == 4 + 2 * 1 + 1
    assert rep.counts == {"NOT": 1, "CNOT": 1, "CV": 1, "CVdag": 1}
    with pytest.raises(ValueError):
        rep.qc("other")
    assert rep.to_dict()["strict_export_qc"] == 7


def test_quantum_cost_lowers_mct():
    c = Circuit.for_function(2).append(MctGate(((0, True), (1, True)), 2))
    assert quantum_cost(c).qc() == 5
    assert quantum_cost(Circuit.for_function(3)).qc() == 0


def test_lower_detailed_without_simplify_is_five_per_toffoli():
    c = Circuit.for_function(3).append(
        MctGate(((0, True), (1, True)), 3), MctGate(((1, True), (2, True)), 3))
    low = lower_detailed(c, do_simplify=False, elide=False)
    assert len(low.final.gates) == 10
