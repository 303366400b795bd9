"""Simulation engines and equivalence checks.

Three engines:

* classical bit simulation of MCT circuits (batched over inputs);
* a semi-classical NCV engine tracking each line as ``V^k |0>`` with k mod 4
  (0 = |0>, 1 = V|0>, 2 = |1>, 3 = V|1>), valid while every control that
  matters is classical;
* a dense state-vector engine, the ground truth, capped at 14 lines.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import ANCILLA, AUXILIARY, INPUT, RESULT, Circuit, NcvGate
from .pprm import BoolFunction, truth_table

__all__ = [
    "V", "VDAG", "X", "STATEVECTOR_CAP", "NonClassicalControl", "EquivalenceReport",
    "simulate_mct", "simulate_mct_batch", "simulate_ncv_semiclassical",
    "simulate_ncv_semiclassical_batch", "simulate_statevector", "apply_gates_dense",
    "circuit_unitary", "check_equivalence", "check_unitary_equiv", "line_changes",
    "input_vectors", "check_circuit_equivalence", "SEMI_ZERO", "SEMI_V_ZERO", "SEMI_ONE", "SEMI_V_ONE",
]

V = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
VDAG = V.conj().T
X = np.array([[0, 1], [1, 0]], dtype=complex)
_POWER_MATRIX = {1: V, 2: X, 3: VDAG}
STATEVECTOR_CAP = 14

SEMI_ZERO, SEMI_V_ZERO, SEMI_ONE, SEMI_V_ONE = 0, 1, 2, 3


@dataclass(frozen=True)
class NonClassicalControl:
    gate_index: int


# ---------------------------------------------------------------- classical

def _bits_matrix(inputs, w: int) -> np.ndarray:
    a = np.asarray(inputs, dtype=np.uint8)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[1] != w:
        raise ValueError(f"input has {a.shape[1]} bits, circuit has {w} lines")
    return a.copy()


def _forced_zero(c: Circuit) -> list[int]:
    return [i for i, l in enumerate(c.lines) if l.kind in (ANCILLA, RESULT)]


def simulate_mct_batch(c: Circuit, inputs) -> np.ndarray:
    """Rows of ``inputs`` are full line assignments; zero-initialized lines are forced to 0."""
    if c.stage != "MCT":
        raise ValueError("simulate_mct expects an MCT circuit")
    bits = _bits_matrix(inputs, c.width)
    bits[:, _forced_zero(c)] = 0
    for g in c.gates:
        fire = np.ones(len(bits), dtype=bool)
        for line, pos in g.controls:
            fire &= bits[:, line] == (1 if pos else 0)
        bits[fire, g.target] ^= 1
    return bits


def simulate_mct(c: Circuit, bits: Sequence[int]) -> list[int]:
    return [int(b) for b in simulate_mct_batch(c, bits)[0]]


# ---------------------------------------------------------------- semi-classical

def simulate_ncv_semiclassical_batch(c: Circuit, inputs) -> tuple[np.ndarray, np.ndarray]:
    """Return (states, first_bad_gate) for every row of ``inputs``.

    ``states`` holds the final k (mod 4) per line; ``first_bad_gate`` is -1
    when no fired gate ever saw a non-classical control, else that gate's
    index (states of such rows are meaningless).
    """
    if c.stage != "NCV":
        raise ValueError("expected an NCV circuit")
    bits = _bits_matrix(inputs, c.width)
    bits[:, _forced_zero(c)] = 0
    k = (bits.astype(np.int8) * 2) % 4
    bad = np.full(len(k), -1, dtype=np.int64)
    for gi, g in enumerate(c.gates):
        if g.control is None:
            k[:, g.target] = (k[:, g.target] + g.power) % 4
            continue
        line, pos = g.control
        ck = k[:, line]
        quantum = (ck % 2) == 1
        newly = quantum & (bad < 0)
        bad[newly] = gi
        fire = (~quantum) & (ck == (2 if pos else 0))
        k[fire, g.target] = (k[fire, g.target] + g.power) % 4
    return k, bad


def simulate_ncv_semiclassical(c: Circuit, bits: Sequence[int]):
    """Bits on success; NonClassicalControl if a control went non-classical.

    A non-classical final state is reported as the state list (values 1/3)
    rather than bits.
    """
    k, bad = simulate_ncv_semiclassical_batch(c, bits)
    if bad[0] >= 0:
        return NonClassicalControl(int(bad[0]))
    row = k[0]
    if np.any(row % 2):
        return [int(v) for v in row]
    return [int(v) // 2 for v in row]


# ---------------------------------------------------------------- dense

def _check_cap(w: int, cap: int):
    if w > cap:
        raise ValueError(f"state-vector simulation capped at {cap} lines, circuit has {w}")


def _gate_parts(g):
    if isinstance(g, NcvGate):
        return g.controls, _POWER_MATRIX[g.power]
    return g.controls, X


def apply_gates_dense(state: np.ndarray, gates, w: int) -> np.ndarray:
    """Apply gates to a batch of states shaped (B, 2, ..., 2) in place."""
    for g in gates:
        ctrls, u = _gate_parts(g)
        idx: list = [slice(None)] * (w + 1)
        for line, pos in ctrls:
            idx[1 + line] = 1 if pos else 0
        ctrl_lines = {l for l, _ in ctrls}
        remaining = [a for a in range(w) if a not in ctrl_lines]
        ax = 1 + remaining.index(g.target)
        sub = state[tuple(idx)]
        moved = np.moveaxis(sub, ax, -1) @ u.T
        state[tuple(idx)] = np.moveaxis(moved, -1, ax)
    return state


def simulate_statevector(c: Circuit, bits: Sequence[int], cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """Dense amplitudes (length 2^w, line 0 most significant)."""
    w = c.width
    _check_cap(w, cap)
    b = _bits_matrix(bits, w)[0]
    b[_forced_zero(c)] = 0
    state = np.zeros((1,) + (2,) * w, dtype=complex)
    state[(0,) + tuple(int(x) for x in b)] = 1.0
    apply_gates_dense(state, c.gates, w)
    return state.reshape(-1)


def circuit_unitary(c: Circuit, cap: int = 10) -> np.ndarray:
    """2^w x 2^w matrix; column j is the image of basis state j."""
    w = c.width
    _check_cap(w, cap)
    n = 2 ** w
    state = np.eye(n, dtype=complex).reshape((n,) + (2,) * w)
    apply_gates_dense(state, c.gates, w)
    return state.reshape(n, n).T


def check_unitary_equiv(c1: Circuit, c2: Circuit, tol: float = 1e-9, cap: int = 10) -> bool:
    """Equal up to global phase; phase taken from the first nonzero entry of U1^† U2."""
    if c1.width != c2.width:
        raise ValueError(f"width mismatch: {c1.width} vs {c2.width}")
    u1, u2 = circuit_unitary(c1, cap), circuit_unitary(c2, cap)
    prod = u1.conj().T @ u2
    flat = prod.reshape(-1)
    nz = np.flatnonzero(np.abs(flat) > 1e-12)
    if not len(nz):
        return False
    phase = flat[nz[0]] / abs(flat[nz[0]])
    return bool(np.max(np.abs(u1 * phase - u2)) < tol + 1e-15)


# ---------------------------------------------------------------- equivalence

def _free_lines(c: Circuit) -> list[int]:
    return [i for i, l in enumerate(c.lines) if l.kind in (INPUT, AUXILIARY)]


def input_vectors(n: int, limit: int = 16, samples: int = 10_000, seed: int = 0) -> tuple[np.ndarray, str]:
    """All 2^n rows (x1 is the most significant bit) or seeded uniform samples."""
    if n <= limit:
        vals = np.arange(2 ** n, dtype=np.int64)
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        vals = rng.integers(0, 2 ** n, size=samples, dtype=np.int64)
        mode = "sampled"
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((vals[:, None] >> shifts) & 1).astype(np.uint8), mode


@dataclass
class EquivalenceReport:
    status: str  # equivalent | counterexample | non_classical
    inputs_checked: int
    mode: str
    counterexample: dict | None = None
    gate_index: int | None = None
    fallbacks: int = 0

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"

    def to_dict(self) -> dict:
        d = {"status": self.status, "inputs_checked": self.inputs_checked, "mode": self.mode,
             "fallbacks": self.fallbacks}
        if self.counterexample is not None:
            d["counterexample"] = self.counterexample
        if self.gate_index is not None:
            d["gate_index"] = self.gate_index
        return d


def _full_rows(c: Circuit, xs: np.ndarray, aux_bits: np.ndarray | None = None) -> np.ndarray:
    rows = np.zeros((len(xs), c.width), dtype=np.uint8)
    ins = c.inputs
    rows[:, ins] = xs[:, : len(ins)]
    aux = [i for i, l in enumerate(c.lines) if l.kind == AUXILIARY]
    if aux and aux_bits is not None:
        rows[:, aux] = aux_bits
    return rows


def _result_probability(c: Circuit, row: np.ndarray, cap: int) -> float:
    amps = simulate_statevector(c, row, cap)
    probs = np.abs(amps.reshape((2,) * c.width)) ** 2
    return float(np.take(probs, 1, axis=c.result).sum())


def check_equivalence(c: Circuit, f: BoolFunction, seed: int = 0, exhaustive_cap: int = 16,
                      samples: int = 10_000, statevector_cap: int = STATEVECTOR_CAP,
                      aux_values: Sequence[int] = (0, 1)) -> EquivalenceReport:
    """Compare the result line against ``f`` over all (or sampled) inputs.

    Auxiliary lines start in every value of ``aux_values``.  NCV rows that
    leave the semi-classical fast path are re-run on the state-vector
    engine.
    """
    n = len(c.inputs)
    if f.n > n:
        raise ValueError(f"function has {f.n} variables, circuit has {n} inputs")
    xs, mode = input_vectors(n, exhaustive_cap, samples, seed)
    expected = truth_table(f, xs).astype(float)
    has_aux = any(l.kind == AUXILIARY for l in c.lines)
    checked = 0
    fallbacks = 0
    res = c.result
    for av in (aux_values if has_aux else (0,)):
        rows = _full_rows(c, xs, np.uint8(av))
        if c.stage == "MCT":
            got = simulate_mct_batch(c, rows)[:, res].astype(np.int64)
            ok = np.ones(len(rows), dtype=bool)
        else:
            k, bad = simulate_ncv_semiclassical_batch(c, rows)
            got = (k[:, res] // 2).astype(np.int64)
            ok = (bad < 0) & (k[:, res] % 2 == 0)
        got_f = got.astype(float)
        for r in np.flatnonzero(~ok):
            if c.width > statevector_cap:
                return EquivalenceReport("non_classical", checked, mode,
                                         gate_index=int(bad[r]) if bad[r] >= 0 else None,
                                         fallbacks=fallbacks)
            fallbacks += 1
            got_f[r] = _result_probability(c, rows[r], statevector_cap)
        mismatch = np.abs(got_f - expected) > 1e-9
        if mismatch.any():
            r = int(np.flatnonzero(mismatch)[0])
            ce = {"input": [int(b) for b in xs[r]], "expected": int(expected[r]),
                  "got": got_f[r] if not float(got_f[r]).is_integer() else int(got_f[r])}
            if has_aux:
                ce["aux"] = int(av)
            return EquivalenceReport("counterexample", checked + r + 1, mode, ce,
                                     fallbacks=fallbacks)
        checked += len(rows)
    return EquivalenceReport("equivalent", checked, mode, fallbacks=fallbacks)


def check_circuit_equivalence(c: Circuit, ref: Circuit, seed: int = 0, exhaustive_cap: int = 16,
                              samples: int = 10_000, statevector_cap: int = STATEVECTOR_CAP
                              ) -> EquivalenceReport:
    """Compare ``c`` against an MCT reference on the reference's kept lines.

    Kept lines are the result line if there is one, else every non-garbage
    line.  Lines that ``c`` adds beyond the reference width must be
    auxiliary; they are tried at 0 and 1.
    """
    if ref.stage != "MCT":
        raise ValueError("reference must be an MCT circuit")
    if c.width < ref.width:
        raise ValueError("circuit is narrower than its reference")
    kept = [ref.result] if ref.has_result else [i for i, l in enumerate(ref.lines) if not l.garbage]
    free = _free_lines(ref)
    xs, mode = input_vectors(len(free), exhaustive_cap, samples, seed)
    base = np.zeros((len(xs), ref.width), dtype=np.uint8)
    base[:, free] = xs
    expected = simulate_mct_batch(ref, base)[:, kept].astype(float)
    extra = c.width - ref.width
    checked = 0
    fallbacks = 0
    for av in ((0, 1) if extra else (0,)):
        rows = np.zeros((len(xs), c.width), dtype=np.uint8)
        rows[:, : ref.width] = base
        rows[:, ref.width:] = av
        if c.stage == "MCT":
            got = simulate_mct_batch(c, rows)[:, kept].astype(float)
        else:
            k, bad = simulate_ncv_semiclassical_batch(c, rows)
            got = (k[:, kept] // 2).astype(float)
            bad_rows = (bad >= 0) | (k[:, kept] % 2 == 1).any(axis=1)
            for r in np.flatnonzero(bad_rows):
                if c.width > statevector_cap:
                    return EquivalenceReport("non_classical", checked, mode,
                                             gate_index=int(bad[r]) if bad[r] >= 0 else None)
                fallbacks += 1
                probs = np.abs(simulate_statevector(c, rows[r], statevector_cap)
                               .reshape((2,) * c.width)) ** 2
                got[r] = [float(np.take(probs, 1, axis=l).sum()) for l in kept]
        mismatch = (np.abs(got - expected) > 1e-9).any(axis=1)
        if mismatch.any():
            r = int(np.flatnonzero(mismatch)[0])
            ce = {"input": [int(b) for b in base[r]], "expected": [int(v) for v in expected[r]],
                  "got": [float(v) for v in got[r]]}
            return EquivalenceReport("counterexample", checked + r + 1, mode, ce, fallbacks=fallbacks)
        checked += len(rows)
    return EquivalenceReport("equivalent", checked, mode, fallbacks=fallbacks)


def line_changes(c: Circuit, limit: int = 14, samples: int = 4096, seed: int = 0) -> list[bool]:
    """Per line: can the final value differ from the initial one?

    Free lines (inputs and auxiliary) are swept exhaustively up to ``limit``
    of them, else sampled.  A non-classical final value counts as changed.
    """
    free = _free_lines(c)
    xs, _ = input_vectors(len(free), limit, samples, seed)
    rows = np.zeros((len(xs), c.width), dtype=np.uint8)
    rows[:, free] = xs
    if c.stage == "MCT":
        out = simulate_mct_batch(c, rows)
        return [bool(v) for v in (out != rows).any(axis=0)]
    k, bad = simulate_ncv_semiclassical_batch(c, rows)
    good = bad < 0
    start = rows.astype(np.int8) * 2
    changed = (k[good] != start[good]).any(axis=0)
    if not good.all():
        # rows that left the fast path: decide per line on the dense engine
        changed = changed | _dense_changes(c, rows[~good])
    return [bool(v) for v in changed]


def _dense_changes(c: Circuit, rows: np.ndarray) -> np.ndarray:
    w = c.width
    changed = np.zeros(w, dtype=bool)
    if w > STATEVECTOR_CAP:
        return np.ones(w, dtype=bool)
    for row in rows:
        probs = np.abs(simulate_statevector(c, row).reshape((2,) * w)) ** 2
        for line in range(w):
            p1 = float(np.take(probs, 1, axis=line).sum())
            if abs(p1 - row[line]) > 1e-9:
                changed[line] = True
    return changed
