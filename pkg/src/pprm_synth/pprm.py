"""Boolean functions in XOR-of-products (PPRM / mixed-polarity) form.

A function is an ordered list of terms over variables ``x1..xn``.  A term is
either a plain product of literals or a factored ``(g)(v1 + v2 + ...)`` term
whose value is the AND of its factor group and the XOR of its factor
variables.  Order never changes the truth table but synthesis reads terms
left to right, so it is kept exactly.

Text syntax::

    .n 4                      # optional width header
    x1x2x3x4 + ~x1x2x4 + 1    # '+' is XOR, '~' negates, '1' is the constant
    (x2x4)(x1 + x3)           # factored term
    (x1(x2 + x3))(x6 + x7 + 1)
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Literal", "ProductTerm", "GvTerm", "BoolFunction", "PprmSyntaxError",
    "ONE", "FORMS", "classify_form", "parse_pprm", "format_pprm", "format_term",
    "evaluate", "truth_table", "normalize", "expand", "term",
]


class PprmSyntaxError(ValueError):
    """Raised for malformed .pprm text; carries a line/column position."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True, order=True)
class Literal:
    var: int
    positive: bool = True

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")

    def __str__(self) -> str:
        return f"x{self.var}" if self.positive else f"~x{self.var}"


@dataclass(frozen=True)
class ProductTerm:
    """AND of literals; the empty product is the constant 1."""

    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        lits = tuple(sorted(self.literals, key=lambda l: l.var))
        seen = [l.var for l in lits]
        if len(set(seen)) != len(seen):
            raise ValueError(f"repeated variable in product term {lits}")
        object.__setattr__(self, "literals", lits)

    @property
    def degree(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(l.var for l in self.literals)

    @property
    def is_one(self) -> bool:
        return not self.literals

    @property
    def is_positive(self) -> bool:
        return all(l.positive for l in self.literals)

    def without(self, var: int) -> "ProductTerm":
        return ProductTerm(tuple(l for l in self.literals if l.var != var))

    def times(self, other: "ProductTerm") -> "ProductTerm":
        return ProductTerm(self.literals + other.literals)

    def __str__(self) -> str:
        return "".join(str(l) for l in self.literals) or "1"


ONE = ProductTerm()

#: Factor-group forms, in the order used for sorting.
FORMS = ("F1", "F2", "F3", "F4", "F5")


def classify_form(group: Sequence[ProductTerm]) -> str:
    """Syntactic class of a factor group given as an XOR of product terms.

    F3 lone literal, F2 lone product, F5 XOR of >= 2 single literals,
    F4 literal times an XOR of >= 2 literals, F1 anything else.
    """
    group = tuple(group)
    if not group:
        raise ValueError("empty factor group")
    if any(t.is_one for t in group):
        return "F1"
    if len(group) == 1:
        return "F3" if group[0].degree == 1 else "F2"
    if all(t.degree == 1 for t in group):
        return "F5"
    if all(t.degree == 2 for t in group):
        common = reduce(frozenset.intersection, (frozenset(t.literals) for t in group))
        if len(common) == 1:
            rest = [frozenset(t.literals) - common for t in group]
            if len(set(rest)) == len(rest):
                return "F4"
    return "F1"


def _f4_split(group: Sequence[ProductTerm]) -> tuple[Literal, tuple[Literal, ...]]:
    common = reduce(frozenset.intersection, (frozenset(t.literals) for t in group))
    (outer,) = common
    inner = tuple(next(iter(frozenset(t.literals) - common)) for t in group)
    return outer, inner


@dataclass(frozen=True)
class GvTerm:
    """Factored term ``(group)(v1 + ... + vl)``.

    ``group`` is an XOR of product terms (forms F1-F5); ``factor_vars`` holds
    single positive literals in chain order, optionally plus one constant 1.
    """

    group: tuple[ProductTerm, ...]
    factor_vars: tuple[ProductTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "group", tuple(self.group))
        object.__setattr__(self, "factor_vars", tuple(self.factor_vars))
        if len(self.factor_vars) < 2:
            raise ValueError("a factored term needs at least two factor variables")
        ones = sum(1 for v in self.factor_vars if v.is_one)
        if ones > 1:
            raise ValueError("at most one constant 1 among factor variables")
        if ones == len(self.factor_vars):
            raise ValueError("factor variables cannot all be constant")
        for v in self.factor_vars:
            if not v.is_one and (v.degree != 1 or not v.is_positive):
                raise ValueError(f"factor variable {v} is not a single positive literal")
        names = [v.literals[0].var for v in self.factor_vars if not v.is_one]
        if len(set(names)) != len(names):
            raise ValueError("repeated factor variable")
        classify_form(self.group)
        if self.group_variables & set(names):
            raise ValueError("factor variables overlap the factor group")

    @property
    def form(self) -> str:
        return classify_form(self.group)

    @property
    def len_f(self) -> int:
        return len(self.factor_vars)

    @property
    def has_one(self) -> bool:
        return any(v.is_one for v in self.factor_vars)

    @property
    def var_indices(self) -> tuple[int, ...]:
        """Non-constant factor variables, in chain order."""
        return tuple(v.literals[0].var for v in self.factor_vars if not v.is_one)

    @property
    def group_variables(self) -> frozenset[int]:
        return frozenset().union(*(t.variables for t in self.group))

    @property
    def variables(self) -> frozenset[int]:
        return self.group_variables | frozenset(self.var_indices)

    def products(self) -> list[ProductTerm]:
        """Distributed product terms (before XOR cancellation)."""
        return [g.times(v) for g in self.group for v in self.factor_vars]


Term = Union[ProductTerm, GvTerm]


@dataclass(frozen=True)
class BoolFunction:
    n: int
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n < 0:
            raise ValueError("negative variable count")
        for t in self.terms:
            top = max(t.variables, default=0)
            if top > self.n:
                raise ValueError(f"term {format_term(t)} references x{top} but n={self.n}")

    @property
    def is_plain(self) -> bool:
        return all(isinstance(t, ProductTerm) for t in self.terms)

    def with_terms(self, terms: Iterable[Term]) -> "BoolFunction":
        return BoolFunction(self.n, tuple(terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        return format_pprm(self, header=False)


def term(text: str) -> Term:
    """Parse a single term, e.g. ``term("x1~x3")`` or ``term("(x1x2)(x3+x4)")``."""
    f = parse_pprm(text)
    if len(f.terms) != 1:
        raise ValueError(f"expected exactly one term in {text!r}")
    return f.terms[0]


# ---------------------------------------------------------------- printing

def _format_group(group: Sequence[ProductTerm]) -> str:
    if classify_form(group) == "F4":
        outer, inner = _f4_split(group)
        return f"{outer}(" + " + ".join(str(l) for l in inner) + ")"
    return " + ".join(str(t) for t in group)


def format_term(t: Term) -> str:
    if isinstance(t, ProductTerm):
        return str(t)
    vars_ = "(" + " + ".join(str(v) for v in t.factor_vars) + ")"
    if t.form == "F3":
        return f"{t.group[0]}{vars_}"
    return f"({_format_group(t.group)}){vars_}"


def format_pprm(f: BoolFunction, header: bool = True) -> str:
    body = " + ".join(format_term(t) for t in f.terms)
    if header:
        return f".n {f.n}\n{body}\n"
    return body


# ----------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<var>~?\s*x\s*\d+)|(?P<one>1(?!\d))|(?P<op>[+()]))")


class _Parser:
    def __init__(self, text: str, line_of):
        self.text = text
        self.pos = 0
        self.line_of = line_of
        self.tokens = self._lex()
        self.i = 0

    def error(self, msg: str, pos: int | None = None):
        line, col = self.line_of(self.pos if pos is None else pos)
        raise PprmSyntaxError(msg, line, col)

    def _lex(self):
        toks = []
        pos = 0
        text = self.text
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                self.pos = pos
                self.error(f"unexpected character {text[pos]!r}")
            start = m.start(m.lastgroup)
            if m.group("var"):
                raw = re.sub(r"\s", "", m.group("var"))
                neg = raw.startswith("~")
                k = int(raw.lstrip("~")[1:])
                if k == 0:
                    self.pos = start
                    self.error("variable index 0 (variables are numbered from 1)")
                toks.append(("lit", Literal(k, not neg), start))
            elif m.group("one"):
                toks.append(("one", None, start))
            else:
                toks.append((m.group("op"), None, start))
            pos = m.end()
        toks.append(("eof", None, len(text)))
        return toks

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            self.error(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def product(self) -> ProductTerm:
        tok = self.peek()
        if tok[0] == "one":
            self.take()
            return ONE
        lits = []
        while self.peek()[0] == "lit":
            lits.append(self.take()[1])
        if not lits:
            self.error("expected a product term", tok[2])
        try:
            return ProductTerm(tuple(lits))
        except ValueError as exc:
            self.error(str(exc), tok[2])

    def xor_of_products(self) -> list[ProductTerm]:
        out = [self.product()]
        while self.peek()[0] == "+":
            self.take()
            out.append(self.product())
        return out

    def group(self) -> list[ProductTerm]:
        # either an XOR of products, or literal '(' XOR of literals ')'
        start = self.peek()[2]
        first = self.product()
        if self.peek()[0] == "(":
            if first.degree != 1:
                self.error("nested factor group must be a single literal", start)
            self.take("(")
            inner = self.xor_of_products()
            self.take(")")
            return [first.times(p) for p in inner]
        out = [first]
        while self.peek()[0] == "+":
            self.take()
            out.append(self.product())
        return out

    def term(self) -> Term:
        tok = self.peek()
        if tok[0] == "(":
            self.take("(")
            g = self.group()
            self.take(")")
            self.take("(")
            v = self.xor_of_products()
            self.take(")")
        else:
            p = self.product()
            if self.peek()[0] != "(":
                return p
            g = [p]
            self.take("(")
            v = self.xor_of_products()
            self.take(")")
        try:
            return GvTerm(tuple(g), tuple(v))
        except ValueError as exc:
            self.error(str(exc), tok[2])

    def function(self) -> list[Term]:
        if self.peek()[0] == "eof":
            return []
        out = [self.term()]
        while self.peek()[0] == "+":
            self.take()
            out.append(self.term())
        tok = self.peek()
        if tok[0] != "eof":
            self.error(f"unexpected {tok[0]!r}", tok[2])
        return out


def parse_pprm(text: str, n: int | None = None, strict_positive: bool = False) -> BoolFunction:
    """Parse .pprm text into a :class:`BoolFunction`.

    ``n`` overrides both the ``.n`` header and the inferred width.  With
    ``strict_positive`` any negative literal is a syntax error.
    """
    header_n = None
    body_parts: list[str] = []
    offsets: list[tuple[int, int]] = []  # (offset in body, line number)
    cursor = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("."):
            parts = stripped.split()
            if parts[0] == ".n" and len(parts) == 2 and parts[1].isdigit():
                header_n = int(parts[1])
                continue
            raise PprmSyntaxError(f"unknown directive {stripped!r}", lineno, 1)
        offsets.append((cursor, lineno))
        body_parts.append(line)
        cursor += len(line) + 1
    body = "\n".join(body_parts)

    def line_of(pos: int) -> tuple[int, int]:
        line, start = 1, 0
        for off, ln in offsets:
            if off <= pos:
                line, start = ln, off
        return line, pos - start + 1

    parser = _Parser(body, line_of)
    terms = parser.function()
    if strict_positive:
        for t in terms:
            prods = [t] if isinstance(t, ProductTerm) else t.group
            if any(not p.is_positive for p in prods):
                raise PprmSyntaxError(f"negative literal in {format_term(t)} (strict PPRM)")
    top = max((max(t.variables, default=0) for t in terms), default=0)
    width = n if n is not None else (header_n if header_n is not None else top)
    if top > width:
        raise PprmSyntaxError(f"x{top} exceeds declared width {width}")
    return BoolFunction(width, tuple(terms))


# -------------------------------------------------------------- semantics

def _eval_product(p: ProductTerm, bits: Sequence[int]) -> int:
    for l in p.literals:
        if bool(bits[l.var - 1]) != l.positive:
            return 0
    return 1


def _eval_term(t: Term, bits: Sequence[int]) -> int:
    if isinstance(t, ProductTerm):
        return _eval_product(t, bits)
    g = 0
    for p in t.group:
        g ^= _eval_product(p, bits)
    if not g:
        return 0
    v = 0
    for p in t.factor_vars:
        v ^= _eval_product(p, bits)
    return v


def evaluate(f: BoolFunction, assignment: Sequence[int]) -> int:
    """Value of ``f`` at one assignment; ``assignment[k]`` is x_{k+1}."""
    if len(assignment) != f.n:
        raise ValueError(f"assignment has {len(assignment)} bits, function has n={f.n}")
    out = 0
    for t in f.terms:
        out ^= _eval_term(t, assignment)
    return out


def _product_column(p: ProductTerm, x: np.ndarray) -> np.ndarray:
    col = np.ones(x.shape[0], dtype=np.uint8)
    for l in p.literals:
        col &= x[:, l.var - 1] if l.positive else 1 - x[:, l.var - 1]
    return col


def truth_table(f: BoolFunction, inputs: np.ndarray | None = None) -> np.ndarray:
    """Vectorised evaluation.

    ``inputs`` is an (m, n) 0/1 array; by default all 2^n assignments in
    counting order with x1 as the most significant bit.
    """
    if inputs is None:
        idx = np.arange(2 ** f.n, dtype=np.int64)
        shifts = np.arange(f.n - 1, -1, -1)
        inputs = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    x = np.asarray(inputs, dtype=np.uint8)
    out = np.zeros(x.shape[0], dtype=np.uint8)
    for t in f.terms:
        if isinstance(t, ProductTerm):
            out ^= _product_column(t, x)
        else:
            g = np.zeros_like(out)
            for p in t.group:
                g ^= _product_column(p, x)
            v = np.zeros_like(out)
            for p in t.factor_vars:
                v ^= _product_column(p, x)
            out ^= g & v
    return out


def _cancel(products: Iterable[ProductTerm]) -> list[ProductTerm]:
    # keep first-occurrence order of survivors
    counts: dict[ProductTerm, int] = {}
    order: list[ProductTerm] = []
    for p in products:
        if p not in counts:
            order.append(p)
            counts[p] = 0
        counts[p] ^= 1
    return [p for p in order if counts[p]]


def normalize(f: BoolFunction) -> BoolFunction:
    """Remove pairs of identical product terms (t + t = 0)."""
    if not f.is_plain:
        raise ValueError("normalize expects product terms only; expand first")
    return f.with_terms(_cancel(f.terms))


def expand(f: BoolFunction) -> BoolFunction:
    """Distribute every factored term back into products, then normalize."""
    flat: list[ProductTerm] = []
    for t in f.terms:
        if isinstance(t, ProductTerm):
            flat.append(t)
        else:
            flat.extend(t.products())
    return f.with_terms(_cancel(flat))
