"""End-to-end driver: text in, verified NCV circuit and cost out."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

from .circuit import Circuit
from .factorization import factorize
from .mct_synth import apply_ctr, elide_trailing, mark_garbage, synth_direct, synth_gv
from .ncv import CostReport, Lowering, lower_detailed, parse_variant_policy, quantum_cost
from .pprm import BoolFunction, GvTerm, ProductTerm, expand, normalize, parse_pprm
from .realfmt import parse_real
from .reorder import rearrange_max_last, reorder_method
from .verify import EquivalenceReport, check_equivalence, check_circuit_equivalence

__all__ = ["STAGES", "PipelineConfig", "PipelineResult", "PipelineError", "run_pipeline", "load_input"]

STAGES = (
    "parse", "normalize", "factorize", "reorder", "rearrange", "synth", "ctr", "elide",
    "decompose", "simplify", "lower", "cost", "verify",
)
COST_MODELS = ("annotated", "strict-export")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    factorize: bool = True
    reorder: bool = True
    rearrange: bool = True
    ctr: bool = True
    elide: bool = True
    simplify: bool = True
    strict_elide: bool = False
    variant_policy: str = "greedy"
    cost_model: str = "annotated"
    stop_after: str | None = None
    seed: int = 0
    exhaustive_cap: int = 16
    strict_pprm: bool = False
    verify: bool = True

    def __post_init__(self):
        if self.stop_after is not None and self.stop_after not in STAGES:
            raise ValueError(f"unknown stage {self.stop_after!r}; choose from {', '.join(STAGES)}")
        if self.cost_model not in COST_MODELS:
            raise ValueError(f"unknown cost model {self.cost_model!r}")
        parse_variant_policy(self.variant_policy)
        if not self.factorize:
            # later algebraic passes only make sense on a factored function
            object.__setattr__(self, "reorder", False)
            object.__setattr__(self, "rearrange", False)

    def with_(self, **kw) -> "PipelineConfig":
        return replace(self, **kw)


@dataclass
class PipelineResult:
    config: PipelineConfig
    function: BoolFunction | None = None
    forms: dict[str, BoolFunction] = field(default_factory=dict)
    mct: Circuit | None = None
    lowering: Lowering | None = None
    ncv: Circuit | None = None
    cost: CostReport | None = None
    equivalence: EquivalenceReport | None = None
    stopped_at: str | None = None
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def qc(self) -> int | None:
        return None if self.cost is None else self.cost.qc(self.config.cost_model)

    @property
    def final_form(self) -> BoolFunction | None:
        for name in ("rearrange", "reorder", "factorize", "normalize", "parse"):
            if name in self.forms:
                return self.forms[name]
        return None


def load_input(source, strict_pprm: bool = False) -> Union[BoolFunction, Circuit]:
    """Path, raw text, BoolFunction or Circuit -> BoolFunction or MCT Circuit."""
    if isinstance(source, (BoolFunction, Circuit)):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).suffix in (".pprm", ".real", ".txt")):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".real":
            return parse_real(text)
        return parse_pprm(text, strict_positive=strict_pprm)
    text = str(source)
    if text.lstrip().startswith(".version") or "\n.begin" in text:
        return parse_real(text)
    return parse_pprm(text, strict_positive=strict_pprm)


def _synth(f: BoolFunction, cfg: PipelineConfig, res: PipelineResult, stop) -> Circuit | None:
    c = Circuit.for_function(f.n)
    for t in f.terms:
        c = synth_direct([t], c) if isinstance(t, ProductTerm) else synth_gv(t, c)
    if stop("synth", c):
        return None
    if cfg.ctr:
        c = apply_ctr(c)
    if stop("ctr", c):
        return None
    if cfg.elide:
        limit = None
        if cfg.strict_elide:
            last = f.terms[-1] if f.terms else None
            limit = last.len_f - 1 if isinstance(last, GvTerm) else 0
        c = elide_trailing(c, limit)
    else:
        c = mark_garbage(c)
    return c


def run_pipeline(source, config: PipelineConfig | None = None) -> PipelineResult:
    """parse -> normalize -> factorize -> reorder -> rearrange -> synth -> ctr
    -> elide -> decompose -> simplify -> elide -> cost -> verify.

    Stages switched off in ``config`` are skipped; ``stop_after`` ends the run
    after the named stage with whatever has been produced so far.
    """
    cfg = config or PipelineConfig()
    res = PipelineResult(cfg)
    clock = time.perf_counter

    def stop(stage: str, mct: Circuit | None = None) -> bool:
        if mct is not None:
            res.mct = mct
        if cfg.stop_after == stage:
            res.stopped_at = stage
            return True
        return False

    def timed(stage, fn, *a):
        t0 = clock()
        try:
            return fn(*a)
        except PipelineError:
            raise
        except Exception as e:  # attribute failures to the stage
            raise PipelineError(stage, e) from e
        finally:
            res.timings_ms[stage] = (clock() - t0) * 1000.0

    obj = timed("parse", load_input, source, cfg.strict_pprm)
    if isinstance(obj, Circuit):
        return _run_circuit(obj, cfg, res, stop, timed)
    f = obj
    res.function = f
    res.forms["parse"] = f
    if stop("parse"):
        return res
    plain = f if f.is_plain else expand(f)
    g = timed("normalize", normalize, plain)
    res.forms["normalize"] = g
    res.function = g
    if stop("normalize"):
        return res
    if cfg.factorize:
        g = timed("factorize", factorize, g)
        res.forms["factorize"] = g
    if stop("factorize"):
        return res
    if cfg.reorder:
        g = timed("reorder", reorder_method, g)
        res.forms["reorder"] = g
    if stop("reorder"):
        return res
    if cfg.rearrange:
        g = timed("rearrange", rearrange_max_last, g)
        res.forms["rearrange"] = g
    if stop("rearrange"):
        return res
    mct = timed("synth", _synth, g, cfg, res, stop)
    if mct is None:
        return res
    res.mct = mct
    if stop("elide"):
        return res
    return _lower_and_check(mct, cfg, res, stop, timed, lambda c: check_equivalence(
        c, res.function, seed=cfg.seed, exhaustive_cap=cfg.exhaustive_cap))


def _run_circuit(c: Circuit, cfg, res, stop, timed) -> PipelineResult:
    if c.stage != "MCT":
        res.ncv = c
        res.cost = quantum_cost(c)
        return res
    res.mct = c
    ref = c
    return _lower_and_check(c, cfg, res, stop, timed, lambda n: check_circuit_equivalence(
        n, ref, seed=cfg.seed, exhaustive_cap=cfg.exhaustive_cap))


def _lower_and_check(mct, cfg, res, stop, timed, checker) -> PipelineResult:
    low = timed("lower", lower_detailed, mct, cfg.variant_policy, cfg.simplify, cfg.elide)
    res.lowering = low
    if cfg.stop_after in ("decompose", "simplify"):
        res.ncv = low.decomposed if cfg.stop_after == "decompose" else low.simplified
        res.stopped_at = cfg.stop_after
        res.cost = quantum_cost(res.ncv, _stages(mct, low))
        return res
    res.ncv = low.final
    if stop("lower"):
        return res
    res.cost = timed("cost", quantum_cost, low.final, _stages(mct, low))
    if stop("cost") or not cfg.verify:
        return res
    res.equivalence = timed("verify", checker, low.final)
    stop("verify")
    return res


def _stages(mct: Circuit, low: Lowering) -> dict[str, int]:
    return {
        "mct": len(mct.gates),
        "toffoli": len(low.toffoli.gates),
        "decomposed": len(low.decomposed.gates),
        "simplified": len(low.simplified.gates),
        "final": len(low.final.gates),
    }
