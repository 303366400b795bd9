"""MCT -> NCV lowering, peephole simplification and quantum cost.

Gates with three or more controls are first split into two-control gates with
three rules chosen by control count ``m`` and circuit width ``w``:

* DR3 (``m > 2`` and ``m == w - 1``): add one auxiliary line, then DR2.
* DR1 (``w >= 5`` and ``3 <= m <= ceil(w/2)``): a ladder of ``4(m - 2)``
  Toffolis using ``m - 2`` free lines as (dirty) work lines.
* DR2 (``w >= 5`` and ``m > ceil(w/2)``): four gates, split through one free
  relay line.

Each Toffoli then becomes one of four five-gate NCV patterns.  Every NCV gate
applies a power of V to its target (CV=1, CNOT=2, CV†=3), so adjacent or
commuted-adjacent gates with the same control and target simply add powers
mod 4; that single merge covers the CV·CV, CV·CNOT, CV†·CNOT and
cancellation rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .circuit import (
    AUXILIARY, Circuit, Line, MctGate, NcvGate, gates_commute, ncv_from_power,
)

__all__ = [
    "ToffoliVariant", "ALL_VARIANTS", "decompose_toffoli", "free_lines",
    "apply_dr1", "apply_dr2", "apply_dr3", "route_rule", "to_toffoli_level",
    "simplify", "simplify_gates", "elide_trailing_ncv", "lower_circuit", "lower_detailed",
    "Lowering", "CostReport", "quantum_cost", "parse_variant_policy",
]

DEFAULT_WINDOW = 64

# (power, control slot, target slot); slot 0 = c1, 1 = c2, 2 = t
_PATTERNS: dict[int, tuple[tuple[int, int, int], ...]] = {
    1: ((1, 1, 2), (2, 0, 1), (3, 1, 2), (2, 0, 1), (1, 0, 2)),
    2: ((3, 1, 2), (2, 0, 1), (1, 1, 2), (2, 0, 1), (3, 0, 2)),
    3: ((3, 0, 2), (2, 0, 1), (1, 1, 2), (2, 0, 1), (3, 1, 2)),
    4: ((1, 0, 2), (2, 0, 1), (3, 1, 2), (2, 0, 1), (1, 1, 2)),
}


@dataclass(frozen=True)
class ToffoliVariant:
    """One of the five-gate realizations of a two-control NOT."""

    index: int
    polarity: str = "positive"

    def __post_init__(self):
        if self.index not in _PATTERNS:
            raise ValueError(f"variant index must be 1..4, got {self.index}")
        if self.polarity not in ("positive", "negative"):
            raise ValueError(f"unknown polarity {self.polarity!r}")

    def gate(self, c1: int = 0, c2: int = 1, t: int = 2) -> MctGate:
        p = self.polarity == "positive"
        return MctGate(((c1, p), (c2, p)), t)

    def expand(self, c1: int = 0, c2: int = 1, t: int = 2) -> list[NcvGate]:
        return decompose_toffoli(self.gate(c1, c2, t), self.index)


ALL_VARIANTS = tuple(ToffoliVariant(i, p) for p in ("positive", "negative") for i in range(1, 5))


def decompose_toffoli(g: MctGate, variant: int | ToffoliVariant = 1) -> list[NcvGate]:
    """Five NCV gates realizing a two-control gate.

    Each control keeps its own polarity, so mixed-polarity gates use the same
    patterns with negative-control annotations.
    """
    if len(g.controls) != 2:
        raise ValueError(f"expected a two-control gate, got {len(g.controls)} controls")
    k = variant.index if isinstance(variant, ToffoliVariant) else int(variant)
    if k not in _PATTERNS:
        raise ValueError(f"variant index must be 1..4, got {k}")
    (c1, p1), (c2, p2) = g.controls
    slots = ((c1, p1), (c2, p2), (g.target, True))
    out = []
    for power, cs, ts in _PATTERNS[k]:
        gate = ncv_from_power(power, slots[ts][0], slots[cs])
        assert gate is not None
        out.append(gate)
    return out


# ---------------------------------------------------------------- DR rules

def free_lines(g: MctGate, width: int) -> list[int]:
    used = g.support
    return [i for i in range(width) if i not in used]


def _half(w: int) -> int:
    return math.ceil(w / 2)


def apply_dr1(g: MctGate, c: Circuit) -> list[MctGate]:
    """Ladder of 4(m-2) Toffolis on the lowest free lines.

    Work lines need not start clean; they are restored.
    """
    ctrls = list(g.controls)
    m = len(ctrls)
    if m < 3:
        raise ValueError("DR1 needs at least three controls")
    work = free_lines(g, c.width)[: m - 2]
    if len(work) < m - 2:
        raise ValueError(f"DR1 on {m} controls needs {m - 2} free lines, have {len(work)}")
    a = [(w, True) for w in work]  # a[0] = a1

    def T(x, y, t):
        return MctGate((x, y), t)

    down = [T(ctrls[m - 1], a[m - 3], g.target)]
    down += [T(ctrls[i - 1], a[i - 3], a[i - 2][0]) for i in range(m - 1, 2, -1)]
    bottom = [T(ctrls[0], ctrls[1], a[0][0])]
    up = [T(ctrls[i - 1], a[i - 3], a[i - 2][0]) for i in range(3, m)]
    half = down + bottom + up
    return half + half


def _dr2_split(g: MctGate, width: int, relay: int, target_first: bool) -> list[MctGate]:
    ctrls = list(g.controls)
    m1 = min(_half(width), len(ctrls) - 1)
    head = MctGate(tuple(ctrls[:m1]), relay)
    tail = MctGate(tuple(ctrls[m1:]) + ((relay, True),), g.target)
    return [tail, head, tail, head] if target_first else [head, tail, head, tail]


def apply_dr2(g: MctGate, c: Circuit, target_first: bool = False) -> list[MctGate]:
    """Four gates through one relay line (the lowest free line).

    The head gate takes the first ``min(ceil(w/2), m-1)`` controls and
    targets the relay; the tail gate takes the rest plus the relay.  By
    default the head comes first; ``target_first`` starts with the tail so
    the final head gate only restores the relay.
    """
    free = free_lines(g, c.width)
    if not free:
        raise ValueError("DR2 needs a free line; use DR3")
    return _dr2_split(g, c.width, free[0], target_first)


def apply_dr3(g: MctGate, c: Circuit, target_first: bool = False) -> tuple[Circuit, list[MctGate]]:
    """Append one auxiliary line and split through it with DR2."""
    if not (len(g.controls) > 2 and len(g.controls) == c.width - 1):
        raise ValueError("DR3 applies only when m > 2 and m == w - 1")
    c2, aux = c.add_line(Line(f"L{_aux_count(c) + 1}", AUXILIARY))
    return c2, _dr2_split(g, c2.width, aux, target_first)


def _aux_count(c: Circuit) -> int:
    return sum(1 for l in c.lines if l.kind == AUXILIARY)


def route_rule(m: int, w: int) -> str | None:
    if m <= 2:
        return None
    if m == w - 1:
        return "DR3"
    if w >= 5 and m <= _half(w):
        return "DR1"
    if w >= 5:
        return "DR2"
    raise ValueError(f"no decomposition rule for m={m}, w={w}")


def _split(g: MctGate, c: Circuit) -> tuple[Circuit, list[MctGate]]:
    rule = route_rule(len(g.controls), c.width)
    if rule == "DR3":
        return apply_dr3(g, c, target_first=True)
    if rule == "DR1":
        return c, apply_dr1(g, c)
    return c, apply_dr2(g, c, target_first=True)


def to_toffoli_level(c: Circuit) -> Circuit:
    """Recursively split every gate until it has at most two controls."""
    if c.stage != "MCT":
        raise ValueError("expected an MCT circuit")
    out: list[MctGate] = []
    cur = c.with_gates(())

    def push(g: MctGate):
        nonlocal cur
        if len(g.controls) <= 2:
            out.append(g)
            return
        cur, parts = _split(g, cur)
        for p in parts:
            push(p)

    for g in c.gates:
        push(g)
    return cur.with_gates(out)


# ---------------------------------------------------------------- simplify

def _key(g: NcvGate):
    return (g.control, g.target)


def simplify_gates(gates: Sequence[NcvGate], window: int = DEFAULT_WINDOW,
                   start: int = 0) -> list[NcvGate]:
    """Merge same-(control, target) gates that can be commuted together.

    Gate i scans forward (at most ``window`` gates) past gates it commutes
    with; a partner's power is added to gate i and the partner removed (both
    vanish when the sum is 0 mod 4).  After a merge the scan restarts
    ``window`` gates earlier.  Positions before ``start`` are assumed to be
    already at a fixpoint.
    """
    gs = list(gates)
    budget = 10 * max(1, len(gs))
    i = max(0, start - window)
    while i < len(gs):
        gi = gs[i]
        merged = False
        for j in range(i + 1, min(len(gs), i + 1 + window)):
            gj = gs[j]
            if _key(gj) == _key(gi):
                new = ncv_from_power(gi.power + gj.power, gi.target, gi.control)
                del gs[j]
                if new is None:
                    del gs[i]
                else:
                    gs[i] = new
                merged = True
                break
            if not gates_commute(gi, gj):
                break
        if merged:
            budget -= 1
            if budget <= 0:
                break
            i = max(0, i - window)
        else:
            i += 1
    return gs


def simplify(c: Circuit, window: int = DEFAULT_WINDOW) -> Circuit:
    if c.stage != "NCV":
        raise ValueError("simplify works on NCV circuits")
    return c.with_gates(simplify_gates(c.gates, window))


def elide_trailing_ncv(gates: Sequence[NcvGate], result: int) -> list[NcvGate]:
    gs = list(gates)
    while gs and gs[-1].target != result:
        gs.pop()
    return gs


# ---------------------------------------------------------------- lowering

def parse_variant_policy(policy: str | int | None) -> int | None:
    """``greedy`` -> None, ``fixed:K`` or K -> K."""
    if policy is None or policy == "greedy":
        return None
    if isinstance(policy, int):
        k = policy
    elif isinstance(policy, str) and policy.startswith("fixed:"):
        k = int(policy.split(":", 1)[1])
    else:
        raise ValueError(f"unknown variant policy {policy!r}")
    if k not in _PATTERNS:
        raise ValueError(f"variant index must be 1..4, got {k}")
    return k


def _single(g: MctGate) -> NcvGate:
    if not g.controls:
        return NcvGate("NOT", g.target)
    return NcvGate("CNOT", g.target, g.controls[0])


@dataclass(frozen=True)
class Lowering:
    toffoli: Circuit        # MCT circuit with <= 2 controls per gate
    decomposed: Circuit     # raw NCV, chosen variants concatenated
    simplified: Circuit
    final: Circuit
    variants: tuple[int, ...]


def lower_detailed(c: Circuit, policy: str | int | None = "greedy", do_simplify: bool = True,
                   elide: bool = True, window: int = DEFAULT_WINDOW) -> Lowering:
    """Lower an MCT circuit to NCV.

    Gates are emitted left to right and the emitted prefix is kept simplified.
    Under the greedy policy each Toffoli takes the variant that leaves the
    shortest simplified prefix (ties to the lowest index).
    """
    fixed = parse_variant_policy(policy)
    tof = to_toffoli_level(c)
    raw: list[NcvGate] = []
    em: list[NcvGate] = []
    chosen: list[int] = []

    def extend(cur, new):
        if not do_simplify:
            return cur + new
        return simplify_gates(cur + new, window, start=len(cur))

    for g in tof.gates:
        if len(g.controls) < 2:
            ng = [_single(g)]
            raw += ng
            em = extend(em, ng)
            continue
        if fixed is not None or not do_simplify:
            k = fixed or 1
            best = extend(em, decompose_toffoli(g, k))
        else:
            best, k = None, 1
            for cand in range(1, 5):
                trial = extend(em, decompose_toffoli(g, cand))
                if best is None or len(trial) < len(best):
                    best, k = trial, cand
        chosen.append(k)
        raw += decompose_toffoli(g, k)
        em = best
    base = tof.with_gates((), stage="NCV")
    elide = elide and c.has_result
    final = elide_trailing_ncv(em, c.result) if elide else em
    from .mct_synth import mark_garbage

    final_c = base.with_gates(final)
    if elide:
        final_c = mark_garbage(final_c)
    return Lowering(tof, base.with_gates(raw), base.with_gates(em), final_c, tuple(chosen))


def lower_circuit(c: Circuit, policy: str | int | None = "greedy", do_simplify: bool = True,
                  elide: bool = True) -> Circuit:
    return lower_detailed(c, policy, do_simplify, elide).final


# ---------------------------------------------------------------- cost

@dataclass(frozen=True)
class CostReport:
    counts: dict[str, int]
    qc_total: int
    negative_controls: int
    strict_export_qc: int
    per_stage: dict[str, int] = field(default_factory=dict)

    def qc(self, model: str = "annotated") -> int:
        if model == "annotated":
            return self.qc_total
        if model == "strict-export":
            return self.strict_export_qc
        raise ValueError(f"unknown cost model {model!r}")

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "qc_total": self.qc_total,
            "negative_controls": self.negative_controls,
            "strict_export_qc": self.strict_export_qc,
            "per_stage": dict(self.per_stage),
        }


def quantum_cost(c: Circuit, per_stage: dict[str, int] | None = None) -> CostReport:
    """Gate count of an NCV circuit (MCT circuits are lowered first).

    The strict export figure adds two NOTs per negative control and one CNOT
    per CV† (its export realization).
    """
    if c.stage == "MCT":
        c = lower_circuit(c)
    counts = {k: 0 for k in ("NOT", "CNOT", "CV", "CVdag")}
    for g in c.gates:
        counts[g.kind] += 1
    neg = sum(1 for g in c.gates if g.negative)
    total = len(c.gates)
    strict = total + 2 * neg + counts["CVdag"]
    return CostReport(counts, total, neg, strict, dict(per_stage or {}))
