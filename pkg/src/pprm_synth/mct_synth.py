"""Algebraic form -> multiple-control Toffoli circuit.

Product terms become one MCT gate on the result line.  A factored term
``(g)(v1 + ... + vl)`` accumulates the XOR on ``vl`` with a CNOT chain, fires
one gate per product of ``g`` (controlled additionally by ``vl``), then undoes
the chain.  Afterwards common-target pairs are merged (CTR) and the trailing
restore gates are dropped.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .circuit import Circuit, MctGate, RESULT, gates_commute
from .pprm import BoolFunction, GvTerm, ProductTerm, Term

__all__ = [
    "product_gate", "synth_direct", "synth_gv", "apply_ctr", "elide_trailing",
    "mark_garbage", "synth_function", "synth_counts",
]


def _line_of(var: int, c: Circuit) -> int:
    idx = var - 1
    if idx >= len(c.inputs):
        raise ValueError(f"term references x{var} but the circuit has {len(c.inputs)} inputs")
    return c.inputs[idx]


def product_gate(p: ProductTerm, c: Circuit, extra: Sequence[tuple[int, bool]] = ()) -> MctGate:
    ctrls = [(_line_of(l.var, c), l.positive) for l in p.literals]
    return MctGate(tuple(ctrls) + tuple(extra), c.result)


def synth_direct(terms: Iterable[ProductTerm], c: Circuit) -> Circuit:
    """One gate per product on the result line; the constant 1 is a bare NOT."""
    return c.append(*(product_gate(p, c) for p in terms))


def synth_gv(t: GvTerm, c: Circuit) -> Circuit:
    """Chain, group gates, mirrored un-chain."""
    if t.len_f < 2:
        raise ValueError("a factored term needs at least two factor entries")
    vs = [_line_of(v, c) for v in t.var_indices]
    chain = [MctGate(((a, True),), b) for a, b in zip(vs, vs[1:])]
    sink = vs[-1]
    middle: list[MctGate] = []
    if t.has_one:
        middle.append(MctGate((), sink))
    core = [product_gate(p, c, extra=((sink, True),)) for p in t.group]
    gates = chain + middle + core + middle + chain[::-1]
    return c.append(*gates)


def _ctr_pair(a: MctGate, b: MctGate) -> MctGate | None:
    if a.target != b.target or not (a.all_positive and b.all_positive):
        return None
    ca, cb = a.control_lines, b.control_lines
    small, big = (ca, cb) if len(ca) < len(cb) else (cb, ca)
    if len(big) - len(small) != 1 or not small < big:
        return None
    (extra,) = big - small
    ctrls = sorted([(l, True) for l in small] + [(extra, False)])
    return MctGate(tuple(ctrls), a.target)


def apply_ctr(c: Circuit) -> Circuit:
    """Merge common-target gate pairs whose positive control sets differ by one.

    One left-to-right pass.  A later gate is pulled back to its partner only
    across gates it commutes with.
    """
    gates = list(c.gates)
    i = 0
    while i < len(gates):
        for j in range(i + 1, len(gates)):
            merged = _ctr_pair(gates[i], gates[j])
            if merged is not None and all(
                gates_commute(gates[k], gates[j]) for k in range(i + 1, j)
            ):
                gates[i] = merged
                del gates[j]
                break
        i += 1
    return c.with_gates(gates)


def mark_garbage(c: Circuit) -> Circuit:
    """Flag every non-result line whose output can differ from its input."""
    from .verify import line_changes

    changed = line_changes(c)
    flags = [bool(ch) and l.kind != RESULT for ch, l in zip(changed, c.lines)]
    return c.with_garbage(flags)


def elide_trailing(c: Circuit, limit: int | None = None) -> Circuit:
    """Drop trailing gates that do not target the result line.

    Nothing after the last gate reads its target, so this is exactly the
    never-read-again suffix.  ``limit`` caps the number of removed gates
    (the literal "last LenF-1 gates" rule).  Garbage flags are refreshed.
    """
    if not c.has_result:
        return mark_garbage(c)
    gates = list(c.gates)
    res = c.result
    dropped = 0
    while gates and gates[-1].target != res and (limit is None or dropped < limit):
        gates.pop()
        dropped += 1
    return mark_garbage(c.with_gates(gates))


def synth_counts(t: Term) -> int:
    """Gates emitted for one term before elision."""
    if isinstance(t, ProductTerm):
        return 1
    return 2 * (t.len_f - 1) + len(t.group)


def synth_function(f: BoolFunction, ctr: bool = True, elide: bool = True,
                   strict_elide: bool = False) -> Circuit:
    """n inputs + result line; terms in order; then CTR and trailing elision.

    ``strict_elide`` removes at most LenF-1 gates, and only when the last
    term is factored.
    """
    c = Circuit.for_function(f.n)
    for t in f.terms:
        c = synth_direct([t], c) if isinstance(t, ProductTerm) else synth_gv(t, c)
    if ctr:
        c = apply_ctr(c)
    if elide:
        limit = None
        if strict_elide:
            last = f.terms[-1] if f.terms else None
            limit = last.len_f - 1 if isinstance(last, GvTerm) else 0
        c = elide_trailing(c, limit)
    return c
