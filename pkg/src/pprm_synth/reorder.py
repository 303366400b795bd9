"""Term ordering passes applied to a factorized function.

``reorder_method`` sorts products by degree and factored terms by (LenF,
form), merges a product into a factored term whose group it equals (R1),
swaps oversized F4/F5 groups with their variables (R2), and finally orders
groups of terms sharing factor variables by their largest LenF.
``rearrange_max_last`` then moves the single heaviest term (by ``d_term``)
to the end of the function.
"""
from __future__ import annotations

from dataclasses import dataclass

from .pprm import FORMS, ONE, BoolFunction, GvTerm, Literal, ProductTerm, Term, classify_form

__all__ = [
    "TermGroup", "classify_form", "apply_r1", "apply_r2", "reorder_method",
    "d_term", "rearrange_max_last", "form_rank",
]


@dataclass(frozen=True)
class TermGroup:
    common_v: frozenset[int]
    members: tuple[GvTerm, ...]

    @property
    def max_len_f(self) -> int:
        return max(m.len_f for m in self.members)


def form_rank(t: GvTerm) -> int:
    return FORMS.index(t.form)


def _as_products(t: Term) -> frozenset[ProductTerm]:
    if isinstance(t, ProductTerm):
        return frozenset((t,))
    return frozenset(t.products())


def apply_r1(f: BoolFunction) -> BoolFunction:
    """Fold a term equal to some factored term's group into that term (+1).

    Applied to a fixpoint; every application removes one term.
    """
    terms = list(f.terms)
    changed = True
    while changed:
        changed = False
        for gi, g in enumerate(terms):
            if not isinstance(g, GvTerm) or g.has_one:
                continue
            target = frozenset(g.group)
            for ti, t in enumerate(terms):
                if ti == gi or _as_products(t) != target:
                    continue
                terms[gi] = GvTerm(g.group, g.factor_vars + (ONE,))
                del terms[ti]
                changed = True
                break
            if changed:
                break
    return f.with_terms(terms)


def _lits(vs) -> tuple[ProductTerm, ...]:
    return tuple(ProductTerm((Literal(v),)) for v in vs)


def apply_r2(t: GvTerm) -> GvTerm:
    """Swap an F4/F5 group with its factor variables when the group is wider.

    For F4 only the inner XOR swaps; the outer literal stays in the group.
    A constant 1 among the factor variables blocks the swap (it cannot move
    into a group).
    """
    form = t.form
    if form not in ("F4", "F5") or t.has_one:
        return t
    if len(t.group_variables) <= t.len_f:
        return t
    if form == "F5":
        new_group = _lits(t.var_indices)
        new_vars = tuple(t.group)
    else:
        outer = _f4_outer(t.group)
        inner = sorted(t.group_variables - {outer.var})
        new_group = tuple(ProductTerm((outer, Literal(v))) for v in t.var_indices)
        new_vars = _lits(inner)
    return GvTerm(new_group, new_vars)


def _f4_outer(group) -> Literal:
    common = frozenset(group[0].literals)
    for p in group[1:]:
        common &= frozenset(p.literals)
    return next(iter(common))


def _product_key(t: ProductTerm) -> int:
    return t.degree


def _gv_key(t: GvTerm) -> tuple[int, int]:
    return (t.len_f, form_rank(t))


def _stage1(terms: list[Term]) -> list[Term]:
    products = sorted((t for t in terms if isinstance(t, ProductTerm)), key=_product_key)
    gvs = sorted((t for t in terms if isinstance(t, GvTerm)), key=_gv_key)
    return products + gvs


def _groups(gvs: list[GvTerm]) -> list[TermGroup]:
    order: list[frozenset[int]] = []
    members: dict[frozenset[int], list[GvTerm]] = {}
    for t in gvs:
        key = frozenset(t.var_indices)
        if key not in members:
            order.append(key)
            members[key] = []
        members[key].append(t)
    groups = []
    for key in order:
        ms = sorted(members[key], key=lambda m: (form_rank(m), m.len_f))
        groups.append(TermGroup(key, tuple(ms)))
    return sorted(groups, key=lambda g: g.max_len_f)


def reorder_method(f: BoolFunction) -> BoolFunction:
    terms = _stage1(list(f.terms))
    terms = list(apply_r1(f.with_terms(terms)).terms)
    terms = [apply_r2(t) if isinstance(t, GvTerm) else t for t in terms]
    products = sorted((t for t in terms if isinstance(t, ProductTerm)), key=_product_key)
    gvs = [t for t in terms if isinstance(t, GvTerm)]
    ordered: list[Term] = list(products)
    for g in _groups(gvs):
        ordered.extend(g.members)
    return f.with_terms(ordered)


def d_term(t: Term) -> int:
    """Degree-of-term weight used to pick the term synthesized last."""
    if isinstance(t, ProductTerm):
        return t.degree
    form = t.form
    if form == "F1":
        return max(p.degree for p in t.group)
    if form == "F2":
        return t.group[0].degree + 1
    if form == "F4":
        return 3
    return 2  # F3, F5


def rearrange_max_last(f: BoolFunction) -> BoolFunction:
    """Move the term with maximal ``d_term`` to the end.

    Among ties the one already latest in the order is moved.
    """
    if len(f.terms) < 2:
        return f
    weights = [d_term(t) for t in f.terms]
    top = max(weights)
    k = max(i for i, w in enumerate(weights) if w == top)
    terms = list(f.terms)
    moved = terms.pop(k)
    return f.with_terms(terms + [moved])
