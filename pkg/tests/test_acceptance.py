"""Acceptance criteria 1-10; each test prints one PASS/FAIL line."""
import itertools
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

import pprm_synth
from conftest import (
    X, brute_table, equal_up_to_phase, gate_matrix, oracle_unitary, qasm_unitary, random_function,
)
from pprm_synth.circuit import INPUT, Circuit, Line, MctGate, NcvGate
from pprm_synth.mct_synth import apply_ctr, synth_direct
from pprm_synth.ncv import ALL_VARIANTS, apply_dr1, apply_dr2, apply_dr3, quantum_cost, simplify_gates
from pprm_synth.pipeline import PipelineConfig, run_pipeline
from pprm_synth.pprm import format_pprm, parse_pprm, term
from pprm_synth.qasm import CVDAG_ORDERS, format_qasm
from pprm_synth.verify import check_equivalence, line_changes, simulate_mct_batch

DATA = Path(pprm_synth.__file__).parent / "data"

# pinned tolerances and limits
AMP_TOL = 1e-9
F1_QC_UNREARRANGED = 42
F2_QC_REARRANGED = 30
EXAMPLE_QC_RANGE = (45, 47)
EXAMPLE_QC_TARGET = 46
EXAMPLE_FORM = "x1 + (x2x4)(x1 + x3) + x2(x3 + x4) + x1x2x3~x4"
SMALL_RUNTIME_S = 1.0
REWRITE_RUNTIME_S = 30.0
PROPERTY_RUNTIME_S = 120.0
REWRITE_CASES, REWRITE_MAX_W, REWRITE_MAX_GATES = 200, 6, 40
PROPERTY_CASES, PROPERTY_MAX_N, PROPERTY_MAX_TERMS = 500, 8, 12
TABLE_SUBSET = {"4gt5_21": (21, 11), "4gt11_23": (7, 4), "4gt13_25": (15, 10), "4mod5_8": (9, 6)}
REVLIB_ENV = "PPRM_SYNTH_REVLIB_DIR"


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"criterion {n}: {detail}"
    return emit


def full_table(c):
    rows = np.array(list(itertools.product((0, 1), repeat=c.width)), dtype=np.uint8)
    return simulate_mct_batch(c, rows)


def all_input_lines(w):
    return tuple(Line(f"x{i + 1}", INPUT) for i in range(w))


def timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


def test_criterion_1_rearrangement_effect(report):
    f1 = parse_pprm((DATA / "f1.pprm").read_text())
    off, t_off = timed(run_pipeline, f1, PipelineConfig(rearrange=False))
    on, t_on = timed(run_pipeline, f1)
    checks = [
        off.qc == F1_QC_UNREARRANGED, on.qc == F2_QC_REARRANGED,
        t_off < SMALL_RUNTIME_S, t_on < SMALL_RUNTIME_S,
        off.equivalence.equivalent, on.equivalence.equivalent,
        off.equivalence.mode == on.equivalence.mode == "exhaustive",
        off.equivalence.inputs_checked >= 2 ** 5 and on.equivalence.inputs_checked >= 2 ** 5,
    ]
    report(1, all(checks), f"qc unrearranged={off.qc} rearranged={on.qc} "
                           f"runtime={t_off:.3f}s/{t_on:.3f}s")


def test_criterion_2_worked_example(report):
    f = parse_pprm((DATA / "4gt4_20.pprm").read_text())
    res, t = timed(run_pipeline, f)
    form = format_pprm(res.forms["rearrange"], header=False)
    lo, hi = EXAMPLE_QC_RANGE
    ok = form == EXAMPLE_FORM and res.equivalence.equivalent and lo <= res.qc <= hi and t < SMALL_RUNTIME_S
    target = "target met" if res.qc == EXAMPLE_QC_TARGET else f"target {EXAMPLE_QC_TARGET} missed"
    report(2, ok, f"form={form!r} qc={res.qc} ({target}) runtime={t:.3f}s")


def test_criterion_3_direct_method(report):
    f = parse_pprm((DATA / "direct4.pprm").read_text())
    c = synth_direct(f.terms, Circuit.for_function(4))
    pats = [tuple((l, p) for l, p in g.controls) for g in c.gates]
    want = [
        ((0, True), (1, True), (2, True), (3, True)),
        ((0, False), (1, True), (3, True)),
        ((1, False), (2, True), (3, True)),
        ((2, True), (3, True)),
        (),
    ]
    rows = np.zeros((16, 5), dtype=np.uint8)
    rows[:, :4] = list(itertools.product((0, 1), repeat=4))
    got = list(simulate_mct_batch(c, rows)[:, 4])
    neg = sum(1 for g in c.gates for _, p in g.controls if not p)
    ok = (len(c.gates) == 5 and pats == want and neg == 2 and all(g.target == 4 for g in c.gates)
          and got == brute_table(f) and check_equivalence(c, f).equivalent)
    report(3, ok, f"gates={len(c.gates)} negative_controls={neg}")


def test_criterion_4_toffoli_variants(report):
    t0 = time.perf_counter()
    worst = 0.0
    sizes = set()
    for v in ALL_VARIANTS:
        ncv = v.expand()
        sizes.add(len(ncv))
        g = v.gate()
        err = np.max(np.abs(oracle_unitary(3, ncv) - gate_matrix(3, g.controls, g.target, X)))
        worst = max(worst, float(err))
    t = time.perf_counter() - t0
    ok = len(ALL_VARIANTS) == 8 and sizes == {5} and worst < AMP_TOL and t < SMALL_RUNTIME_S
    report(4, ok, f"variants={len(ALL_VARIANTS)} max_err={worst:.2e} runtime={t:.3f}s")


def test_criterion_5_decomposition_rules(report):
    def gate(m, t):
        return MctGate(tuple((i, True) for i in range(m)), t)

    def same(w, parts, g, lines=None):
        c = Circuit(lines or all_input_lines(w), (), "MCT")
        return np.array_equal(full_table(c.with_gates(parts)), full_table(c.with_gates([g])))

    results = {}
    g = gate(3, 5)
    p = apply_dr1(g, Circuit(all_input_lines(6)))
    results["dr1_3"] = (len(p), len(p) == 4 and same(6, p, g))
    g = gate(5, 9)
    p = apply_dr1(g, Circuit(all_input_lines(10)))
    results["dr1_5"] = (len(p), len(p) == 12 and same(10, p, g))
    g = gate(7, 8)
    p = apply_dr2(g, Circuit(all_input_lines(9)))
    counts = tuple(len(x.controls) for x in p)
    results["dr2"] = (counts, counts == (5, 3, 5, 3) and same(9, p, g))
    g = gate(5, 5)
    c = Circuit(all_input_lines(6))
    c2, p = apply_dr3(g, c)
    ok3 = c2.width == c.width + 1 and np.array_equal(
        full_table(Circuit(all_input_lines(7), tuple(p))),
        full_table(Circuit(all_input_lines(7), (g,))))
    results["dr3"] = (c2.width - c.width, ok3)
    report(5, all(v[1] for v in results.values()),
           " ".join(f"{k}={v[0]}" for k, v in results.items()))


def test_criterion_6_rewrite_soundness(report):
    rng = random.Random(606)
    t0 = time.perf_counter()
    bad_unitary = grew = 0
    for _ in range(REWRITE_CASES):
        w = rng.randint(2, REWRITE_MAX_W)
        gates = []
        for _ in range(rng.randint(1, REWRITE_MAX_GATES)):
            t = rng.randrange(w)
            if rng.random() < 0.1:
                gates.append(NcvGate("NOT", t))
                continue
            ctl = rng.choice([i for i in range(w) if i != t])
            gates.append(NcvGate(rng.choice(["CNOT", "CV", "CVdag"]), t, (ctl, rng.random() < 0.75)))
        s = simplify_gates(gates)
        grew += len(s) > len(gates)
        bad_unitary += not equal_up_to_phase(oracle_unitary(w, gates), oracle_unitary(w, s), AMP_TOL)
    t = time.perf_counter() - t0
    ok = bad_unitary == 0 and grew == 0 and t < REWRITE_RUNTIME_S
    report(6, ok, f"cases={REWRITE_CASES} unitary_mismatch={bad_unitary} grew={grew} runtime={t:.1f}s")


def test_criterion_7_end_to_end_properties(report):
    rng = random.Random(707)
    t0 = time.perf_counter()
    fails = {"equivalence": 0, "exhaustive": 0, "restore": 0, "qc": 0}
    for _ in range(PROPERTY_CASES):
        f = random_function(rng, n_max=PROPERTY_MAX_N, terms_max=PROPERTY_MAX_TERMS)
        res = run_pipeline(f)
        fails["equivalence"] += not res.equivalence.equivalent
        fails["exhaustive"] += res.equivalence.mode != "exhaustive"
        fails["qc"] += res.qc > len(res.lowering.decomposed.gates)
        kept = run_pipeline(f, PipelineConfig(elide=False))
        changed = line_changes(kept.ncv)
        fails["restore"] += any(changed[i] for i in kept.ncv.inputs)
        fails["equivalence"] += not kept.equivalence.equivalent
    t = time.perf_counter() - t0
    ok = not any(fails.values()) and t < PROPERTY_RUNTIME_S
    report(7, ok, f"cases={PROPERTY_CASES} failures={fails} runtime={t:.1f}s")


def test_criterion_8_common_target_rule(report):
    lines = all_input_lines(5)
    pair = Circuit(lines, (MctGate(tuple((i, True) for i in range(4)), 4),
                           MctGate(tuple((i, True) for i in range(1, 4)), 4)))
    merged = apply_ctr(pair)
    want = MctGate(((0, False), (1, True), (2, True), (3, True)), 4)
    ok = merged.gates == (want,) and np.array_equal(full_table(pair), full_table(merged))
    # also through the term-level circuit with a zeroed result line
    f = parse_pprm("x1x2x3x4 + x2x3x4")
    direct = apply_ctr(synth_direct([term("x1x2x3x4"), term("x2x3x4")], Circuit.for_function(4)))
    ok = ok and len(direct.gates) == 1 and check_equivalence(direct, f).equivalent
    report(8, ok, f"merged={[str(c) for c in merged.gates[0].controls] if merged.gates else None}")


def test_criterion_9_table_subset(report, capsys):
    root = os.environ.get(REVLIB_ENV)
    if not root:
        with capsys.disabled():
            print(f"\ncriterion 9: SKIP set {REVLIB_ENV} to a directory of .real/.pprm definitions")
        pytest.skip(f"{REVLIB_ENV} not set")
    found = {}
    for name in TABLE_SUBSET:
        for ext in (".pprm", ".real"):
            p = Path(root) / f"{name}{ext}"
            if p.exists():
                found[name] = p
                break
    missing = sorted(set(TABLE_SUBSET) - set(found))
    parts, ok = [], not missing
    for name, p in sorted(found.items()):
        res = run_pipeline(p)
        bound, proposed = TABLE_SUBSET[name]
        good = res.equivalence.equivalent and res.qc <= bound
        ok = ok and good
        parts.append(f"{name}={res.qc}(<= {bound}: {good}; proposed {proposed}: "
                     f"{'match' if res.qc == proposed else 'differs'})")
    if missing:
        parts.append(f"missing={missing}")
    report(9, ok, " ".join(parts))


def test_criterion_10_export_round_trip(report):
    rng = random.Random(1010)
    circuits = [run_pipeline(DATA / n).ncv for n in ("f1.pprm", "f2.pprm", "4gt4_20.pprm", "direct4.pprm")]
    while len(circuits) < 40:
        c = run_pipeline(random_function(rng, n_max=5, terms_max=8)).ncv
        if c.width <= 7:
            circuits.append(c)
    worst, strict_ok = 0.0, True
    for c in circuits:
        for order in CVDAG_ORDERS:
            text = format_qasm(c, order)
            w, u = qasm_unitary(text)
            ref = oracle_unitary(c.width, c.gates)
            idx = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
            phase = u[idx] / ref[idx]
            worst = max(worst, float(np.max(np.abs(ref * phase - u))))
        cost = quantum_cost(c)
        strict_ok = strict_ok and cost.strict_export_qc >= cost.qc_total
    ok = worst < AMP_TOL and strict_ok
    report(10, ok, f"circuits={len(circuits)} max_err={worst:.2e} strict>=annotated={strict_ok}")
