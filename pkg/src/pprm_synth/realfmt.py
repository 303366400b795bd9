"""RevLib ``.real`` reader and writer.

Gate lines are ``tK c1 .. c(K-1) t`` for multiple-control Toffolis (a ``-``
prefix marks a negative control), ``v a t`` / ``v+ a t`` for controlled V
and V†.  Line kinds that ``.constants``/``.garbage`` cannot express (result
vs. ancilla, auxiliary lines) travel in a ``# lines:`` comment written by
:func:`write_real`; files without it fall back to header inference.
"""
from __future__ import annotations

from pathlib import Path

from .circuit import ANCILLA, AUXILIARY, INPUT, RESULT, Circuit, Line, MctGate, NcvGate

__all__ = ["RealFormatError", "read_real", "write_real", "parse_real", "format_real"]

_KIND_CODE = {INPUT: "i", ANCILLA: "a", AUXILIARY: "x", RESULT: "r"}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


class RealFormatError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


def _fmt_ctrl(name: str, pos: bool) -> str:
    return name if pos else f"-{name}"


def format_real(c: Circuit) -> str:
    names = [l.name for l in c.lines]
    out = [".version 1.0", f"# lines: {''.join(_KIND_CODE[l.kind] for l in c.lines)}",
           f"# stage: {c.stage}",
           f".numvars {c.width}", ".variables " + " ".join(names),
           ".inputs " + " ".join(names), ".outputs " + " ".join(names),
           ".constants " + "".join("0" if l.starts_zero else "-" for l in c.lines),
           ".garbage " + "".join("1" if l.garbage else "-" for l in c.lines),
           ".begin"]
    for g in c.gates:
        if isinstance(g, MctGate):
            parts = [_fmt_ctrl(names[l], p) for l, p in g.controls] + [names[g.target]]
            out.append(f"t{len(parts)} " + " ".join(parts))
        elif g.kind in ("NOT", "CNOT"):
            parts = [_fmt_ctrl(names[l], p) for l, p in g.controls] + [names[g.target]]
            out.append(f"t{len(parts)} " + " ".join(parts))
        else:
            (l, p), = g.controls
            name = "v" if g.kind == "CV" else "v+"
            out.append(f"{name} {_fmt_ctrl(names[l], p)} {names[g.target]}")
    out.append(".end")
    return "\n".join(out) + "\n"


def write_real(c: Circuit, path) -> None:
    Path(path).write_text(format_real(c), encoding="utf-8")


def _flagstring(value: str, w: int, key: str, lineno: int) -> str:
    value = value.replace(" ", "")
    if len(value) != w:
        raise RealFormatError(f"{key} has {len(value)} entries, expected {w}", lineno)
    return value


def parse_real(text: str) -> Circuit:
    header: dict[str, tuple[str, int]] = {}
    kinds_hint = None
    stage_hint = None
    gate_lines: list[tuple[int, str]] = []
    in_body = False
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("lines:"):
                kinds_hint = body.split(":", 1)[1].strip()
            elif body.startswith("stage:"):
                stage_hint = body.split(":", 1)[1].strip()
            continue
        if ended:
            raise RealFormatError("content after .end", lineno)
        if line.startswith("."):
            key, _, rest = line.partition(" ")
            key = key.lower()
            if key == ".begin":
                in_body = True
            elif key == ".end":
                if not in_body:
                    raise RealFormatError(".end before .begin", lineno)
                ended = True
                in_body = False
            elif in_body:
                raise RealFormatError(f"header {key} inside the gate list", lineno)
            else:
                header[key] = (rest.strip(), lineno)
            continue
        if not in_body:
            raise RealFormatError(f"gate outside .begin/.end: {line!r}", lineno)
        gate_lines.append((lineno, line))
    if not ended:
        raise RealFormatError("missing .end")
    if ".variables" not in header:
        raise RealFormatError("missing .variables")
    names = header[".variables"][0].split()
    w = len(names)
    if len(set(names)) != w:
        raise RealFormatError("duplicate variable names", header[".variables"][1])
    if ".numvars" in header:
        nv, ln = header[".numvars"]
        if not nv.isdigit() or int(nv) != w:
            raise RealFormatError(f".numvars {nv} does not match {w} variables", ln)
    consts = _flag(header, ".constants", w)
    garbage = _flag(header, ".garbage", w)
    lines = _line_kinds(names, consts, garbage, kinds_hint)
    index = {n: i for i, n in enumerate(names)}
    gates = [_parse_gate(l, ln, index) for ln, l in gate_lines]
    stage = stage_hint or ("NCV" if any(isinstance(g, NcvGate) for g in gates) else "MCT")
    if stage == "NCV":
        gates = [_as_ncv(g, ln) for g, (ln, _) in zip(gates, gate_lines)]
    elif any(isinstance(g, NcvGate) for g in gates):
        raise RealFormatError("V gates in an MCT circuit")
    return Circuit(tuple(lines), tuple(gates), stage)


def _flag(header, key: str, w: int) -> str:
    if key not in header:
        return "-" * w
    value, ln = header[key]
    return _flagstring(value, w, key, ln)


def _line_kinds(names, consts: str, garbage: str, hint: str | None) -> list[Line]:
    w = len(names)
    if hint is not None:
        if len(hint) != w or any(ch not in _CODE_KIND for ch in hint):
            raise RealFormatError(f"bad '# lines:' hint {hint!r}")
        kinds = [_CODE_KIND[ch] for ch in hint]
    else:
        kinds = [ANCILLA if ch == "0" else INPUT for ch in consts]
        # the one clean constant line that is kept is taken as the result
        kept = [i for i in range(w) if consts[i] == "0" and garbage[i] == "-"]
        if len(kept) == 1:
            kinds[kept[0]] = RESULT
    for ch in consts:
        if ch not in "-01":
            raise RealFormatError(f"bad constant flag {ch!r}")
        if ch == "1":
            raise RealFormatError("constant-1 lines are not supported")
    return [Line(n, k, garbage[i] == "1") for i, (n, k) in enumerate(zip(names, kinds))]


def _parse_gate(line: str, lineno: int, index: dict[str, int]):
    parts = line.split()
    name, args = parts[0].lower(), parts[1:]

    def ref(tok: str) -> tuple[int, bool]:
        pos = not tok.startswith("-")
        tok = tok.lstrip("-")
        if tok not in index:
            raise RealFormatError(f"unknown line {tok!r}", lineno)
        return index[tok], pos

    if name.startswith("t") and name[1:].isdigit():
        k = int(name[1:])
        if k != len(args) or k < 1:
            raise RealFormatError(f"{name} expects {k} lines, got {len(args)}", lineno)
        refs = [ref(a) for a in args]
        tgt, tpos = refs[-1]
        if not tpos:
            raise RealFormatError("negative target", lineno)
        try:
            return MctGate(tuple(refs[:-1]), tgt)
        except ValueError as e:
            raise RealFormatError(str(e), lineno) from None
    if name in ("v", "v+"):
        if len(args) != 2:
            raise RealFormatError(f"{name} expects 2 lines", lineno)
        (cl, cp), (tl, tp) = ref(args[0]), ref(args[1])
        if not tp:
            raise RealFormatError("negative target", lineno)
        try:
            return NcvGate("CV" if name == "v" else "CVdag", tl, (cl, cp))
        except ValueError as e:
            raise RealFormatError(str(e), lineno) from None
    raise RealFormatError(f"unsupported gate {parts[0]!r}", lineno)


def _as_ncv(g, lineno: int) -> NcvGate:
    if isinstance(g, NcvGate):
        return g
    if len(g.controls) == 0:
        return NcvGate("NOT", g.target)
    if len(g.controls) == 1:
        return NcvGate("CNOT", g.target, g.controls[0])
    raise RealFormatError("multi-control gate in an NCV circuit", lineno)


def read_real(path) -> Circuit:
    return parse_real(Path(path).read_text(encoding="utf-8"))
