"""Degree-grouped factorization of positive product terms.

Terms of equal degree are collected into an occurrence table (rows are terms,
columns are variables).  The most frequent variable is pulled out, its rows
are removed, and the loop repeats until the table is empty.  Each extracted
variable's remainders are then inspected for a shared product part; when the
leftover is a plain XOR of single literals the whole set collapses to one
``(g)(v1 + ... + vl)`` term.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .pprm import BoolFunction, GvTerm, Literal, ProductTerm, Term

__all__ = [
    "FactTable", "FactorExtraction", "build_fact_table", "select_factor",
    "extract_all", "analyze_common_factor", "factorize",
]


@dataclass(frozen=True)
class FactTable:
    group_degree: int
    rows: tuple[ProductTerm, ...]
    cols: tuple[int, ...]
    cells: np.ndarray  # shape (len(rows), len(cols)), uint8

    @property
    def column_sums(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.cells.sum(axis=0))

    def __len__(self) -> int:
        return len(self.rows)

    def drop_rows(self, keep: np.ndarray) -> "FactTable":
        return FactTable(self.group_degree, tuple(r for r, k in zip(self.rows, keep) if k),
                         self.cols, self.cells[keep])


@dataclass(frozen=True)
class FactorExtraction:
    factor_var: int
    factor_groups: tuple[ProductTerm, ...]

    def rows(self) -> list[ProductTerm]:
        lit = ProductTerm((Literal(self.factor_var),))
        return [g.times(lit) for g in self.factor_groups]


def build_fact_table(group: list[ProductTerm], allow_single: bool = False) -> FactTable:
    """Occurrence matrix for one degree group.

    Groups of fewer than two terms are rejected unless ``allow_single``.
    """
    group = list(group)
    if len(group) < 2 and not (allow_single and group):
        raise ValueError("a factorization table needs at least two terms")
    degrees = {t.degree for t in group}
    if len(degrees) != 1:
        raise ValueError(f"mixed degrees in group: {sorted(degrees)}")
    if any(not t.is_positive for t in group):
        raise ValueError("negative literals are not factorized")
    cols = tuple(sorted(set().union(*(t.variables for t in group))))
    index = {v: j for j, v in enumerate(cols)}
    cells = np.zeros((len(group), len(cols)), dtype=np.uint8)
    for i, t in enumerate(group):
        for v in t.variables:
            cells[i, index[v]] = 1
    return FactTable(degrees.pop(), tuple(group), cols, cells)


def select_factor(table: FactTable) -> int:
    """Variable with the largest column sum; ties go to the lowest index."""
    if not len(table):
        raise ValueError("empty factorization table")
    sums = table.cells.sum(axis=0)
    return table.cols[int(np.argmax(sums))]  # argmax returns the first maximum


def extract_all(table: FactTable) -> list[FactorExtraction]:
    out = []
    while len(table):
        var = select_factor(table)
        j = table.cols.index(var)
        hit = table.cells[:, j] == 1
        groups = tuple(r.without(var) for r, h in zip(table.rows, hit) if h)
        out.append(FactorExtraction(var, groups))
        table = table.drop_rows(~hit)
    return out


def _single(var: int) -> ProductTerm:
    return ProductTerm((Literal(var),))


def _cross_split(rems: list[ProductTerm]) -> tuple[list[ProductTerm], list[int]] | None:
    """Write ``rems`` as {p * v : p in P, v in V} with V single variables.

    Returns (P, V) for the first variable (ascending) that admits a full
    cross product with |P| >= 2 and |V| >= 2, else None.
    """
    remset = set(rems)
    variables = sorted(set().union(*(r.variables for r in rems)))
    for u in variables:
        pu = {r.without(u) for r in rems if u in r.variables}
        cls = [w for w in variables if {r.without(w) for r in rems if w in r.variables} == pu]
        if len(pu) < 2 or len(cls) < 2 or len(pu) * len(cls) != len(rems):
            continue
        if any(p.times(_single(w)) not in remset for p in pu for w in cls):
            continue
        ps = sorted(pu, key=lambda p: [l.var for l in p.literals])
        return ps, cls
    return None


def analyze_common_factor(extractions: list[FactorExtraction]) -> list[Term]:
    out: list[Term] = []
    for ex in extractions:
        xs = _single(ex.factor_var)
        groups = list(ex.factor_groups)
        if len(groups) < 2:
            out.extend(ex.rows())
            continue
        common = reduce(frozenset.intersection, (frozenset(g.literals) for g in groups))
        prefix = xs.times(ProductTerm(tuple(common)))
        rems = [ProductTerm(tuple(frozenset(g.literals) - common)) for g in groups]
        if all(r.degree == 1 for r in rems):
            out.append(GvTerm((prefix,), tuple(rems)))
            continue
        split = _cross_split(rems) if all(r.degree >= 1 for r in rems) else None
        if split is None:
            out.extend(ex.rows())
            continue
        ps, cls = split
        if all(p.degree == 1 for p in ps) and min(v for p in ps for v in p.variables) > min(cls):
            # both sides are plain literals: keep the lowest variable inside the group
            ps, cls = [_single(v) for v in cls], [p.literals[0].var for p in ps]
        group = tuple(prefix.times(p) for p in ps)
        out.append(GvTerm(group, tuple(_single(v) for v in cls)))
    return out


def factorize(f: BoolFunction) -> BoolFunction:
    """Factorize positive terms of degree >= 2, grouped by degree.

    Output is the per-degree results in ascending degree order; terms with
    negative literals follow unchanged at the end.
    """
    if not f.is_plain:
        raise ValueError("factorize expects product terms only")
    by_degree: dict[int, list[ProductTerm]] = {}
    passthrough: list[ProductTerm] = []
    for t in f.terms:
        if t.is_positive:
            by_degree.setdefault(t.degree, []).append(t)
        else:
            passthrough.append(t)
    out: list[Term] = []
    for d in sorted(by_degree):
        group = by_degree[d]
        if d < 2 or len(group) < 2:
            out.extend(group)
            continue
        out.extend(analyze_common_factor(extract_all(build_fact_table(group))))
    return f.with_terms(out + passthrough)
