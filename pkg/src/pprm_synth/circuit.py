"""Circuit containers shared by the MCT and NCV stages."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence, Union

__all__ = [
    "Line", "MctGate", "NcvGate", "Circuit", "Control",
    "INPUT", "ANCILLA", "AUXILIARY", "RESULT", "NCV_KINDS", "NCV_POWER",
    "ncv_from_power", "gates_commute",
]

INPUT, ANCILLA, AUXILIARY, RESULT = "input", "ancilla_zero", "auxiliary", "result"

#: (line index, positive polarity)
Control = tuple[int, bool]


@dataclass(frozen=True)
class Line:
    name: str
    kind: str = INPUT
    garbage: bool = False

    @property
    def starts_zero(self) -> bool:
        return self.kind in (ANCILLA, RESULT)


@dataclass(frozen=True)
class MctGate:
    """Multiple-control Toffoli: flip ``target`` when every control matches."""

    controls: tuple[Control, ...]
    target: int

    def __post_init__(self):
        ctrls = tuple((int(l), bool(p)) for l, p in self.controls)
        object.__setattr__(self, "controls", ctrls)
        lines = [l for l, _ in ctrls]
        if len(set(lines)) != len(lines):
            raise ValueError(f"repeated control line in {ctrls}")
        if self.target in lines:
            raise ValueError("target line is also a control")

    @property
    def control_lines(self) -> frozenset[int]:
        return frozenset(l for l, _ in self.controls)

    @property
    def support(self) -> frozenset[int]:
        return self.control_lines | {self.target}

    @property
    def all_positive(self) -> bool:
        return all(p for _, p in self.controls)

    def __len__(self) -> int:
        return len(self.controls)


NCV_KINDS = ("NOT", "CNOT", "CV", "CVdag")
# exponent of V applied to the target: V^2 = X
NCV_POWER = {"NOT": 2, "CNOT": 2, "CV": 1, "CVdag": 3}


@dataclass(frozen=True)
class NcvGate:
    kind: str
    target: int
    control: Control | None = None

    def __post_init__(self):
        if self.kind not in NCV_KINDS:
            raise ValueError(f"unknown NCV kind {self.kind!r}")
        if self.kind == "NOT":
            if self.control is not None:
                raise ValueError("NOT takes no control")
        else:
            if self.control is None:
                raise ValueError(f"{self.kind} needs exactly one control")
            c = (int(self.control[0]), bool(self.control[1]))
            if c[0] == self.target:
                raise ValueError("control equals target")
            object.__setattr__(self, "control", c)

    @property
    def power(self) -> int:
        return NCV_POWER[self.kind]

    @property
    def control_lines(self) -> frozenset[int]:
        return frozenset() if self.control is None else frozenset((self.control[0],))

    @property
    def controls(self) -> tuple[Control, ...]:
        return () if self.control is None else (self.control,)

    @property
    def support(self) -> frozenset[int]:
        return self.control_lines | {self.target}

    @property
    def negative(self) -> bool:
        return self.control is not None and not self.control[1]

    def __str__(self) -> str:
        if self.control is None:
            return f"NOT({self.target})"
        l, p = self.control
        return f"{self.kind}({'' if p else '~'}{l};{self.target})"


def ncv_from_power(power: int, target: int, control: Control | None) -> NcvGate | None:
    power %= 4
    if power == 0:
        return None
    if control is None:
        if power != 2:
            raise ValueError("uncontrolled V is not an NCV gate")
        return NcvGate("NOT", target)
    return NcvGate({1: "CV", 2: "CNOT", 3: "CVdag"}[power], target, control)


Gate = Union[MctGate, NcvGate]


def gates_commute(a: Gate, b: Gate) -> bool:
    """Sufficient commutation test for controlled X-power gates.

    Both gate families act on their target with a power of X and read their
    controls diagonally, so they commute whenever neither target is a
    control of the other (shared targets and shared controls are fine).
    """
    return a.target not in b.control_lines and b.target not in a.control_lines


@dataclass(frozen=True)
class Circuit:
    lines: tuple[Line, ...]
    gates: tuple[Gate, ...] = ()
    stage: str = "MCT"

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.stage not in ("MCT", "NCV"):
            raise ValueError(f"unknown stage {self.stage!r}")
        kind = MctGate if self.stage == "MCT" else NcvGate
        w = len(self.lines)
        for g in self.gates:
            if not isinstance(g, kind):
                raise TypeError(f"{type(g).__name__} in a {self.stage} circuit")
            if max(g.support) >= w or min(g.support) < 0:
                raise ValueError(f"gate {g} references a line outside 0..{w - 1}")
        if sum(1 for l in self.lines if l.kind == RESULT) > 1:
            raise ValueError("more than one result line")

    @classmethod
    def for_function(cls, n: int) -> "Circuit":
        """n input lines x1..xn followed by one zeroed result line."""
        lines = [Line(f"x{i}") for i in range(1, n + 1)] + [Line("f", RESULT)]
        return cls(tuple(lines))

    @property
    def width(self) -> int:
        return len(self.lines)

    @property
    def result(self) -> int:
        for i, l in enumerate(self.lines):
            if l.kind == RESULT:
                return i
        raise ValueError("circuit has no result line")

    @property
    def has_result(self) -> bool:
        return any(l.kind == RESULT for l in self.lines)

    @property
    def inputs(self) -> list[int]:
        return [i for i, l in enumerate(self.lines) if l.kind == INPUT]

    def with_gates(self, gates: Iterable[Gate], stage: str | None = None) -> "Circuit":
        return replace(self, gates=tuple(gates), stage=stage or self.stage)

    def append(self, *gates: Gate) -> "Circuit":
        return replace(self, gates=self.gates + tuple(gates))

    def add_line(self, line: Line) -> tuple["Circuit", int]:
        return replace(self, lines=self.lines + (line,)), len(self.lines)

    def with_garbage(self, flags: Sequence[bool]) -> "Circuit":
        lines = tuple(replace(l, garbage=bool(g)) for l, g in zip(self.lines, flags))
        return replace(self, lines=lines)

    def __len__(self) -> int:
        return len(self.gates)
