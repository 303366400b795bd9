"""Command-line interface: ``pprm-synth {synth,lower,verify,cost,bench,export}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .bench import bench_csv, bench_json, read_manifest, run_bench, write_bench
from .pipeline import STAGES, PipelineConfig, PipelineError, PipelineResult, run_pipeline
from .pprm import PprmSyntaxError, format_pprm
from .qasm import CVDAG_ORDERS, format_qasm
from .realfmt import RealFormatError, format_real

__all__ = ["main", "build_parser"]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("pipeline")
    g.add_argument("--seed", type=int, default=0, help="RNG seed for sampled verification")
    g.add_argument("--stop-after", choices=STAGES, default=None, help="end after this stage and dump it")
    g.add_argument("--format", choices=("text", "json", "csv"), default="text", help="report format on stdout")
    g.add_argument("--emit", default="", help="comma list of artifacts to write: pprm,real,qasm,json,png")
    g.add_argument("--out-dir", type=Path, default=Path("."), help="directory for --emit artifacts")
    g.add_argument("--cost-model", choices=("annotated", "strict-export"), default="annotated")
    g.add_argument("--variant-policy", default="greedy", help="greedy or fixed:K (K = 1..4)")
    g.add_argument("--strict-pprm", action="store_true", help="reject negative literals in the input")
    g.add_argument("--strict-elide", action="store_true", help="drop only the last LenF-1 restore gates")
    g.add_argument("--exhaustive-cap", type=int, default=16, help="max inputs (log2) for exhaustive checks")
    for stage in ("factorize", "reorder", "rearrange", "ctr", "elide", "simplify"):
        g.add_argument(f"--no-{stage}", action="store_true", help=f"disable the {stage} stage")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="pprm-synth", description="PPRM to NCV circuit synthesis")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="run the full pipeline on one function")
    s.add_argument("input", type=Path)

    s = sub.add_parser("lower", parents=[common], help="lower a function or .real MCT circuit to NCV")
    s.add_argument("input", type=Path)

    s = sub.add_parser("verify", parents=[common], help="synthesize and print the equivalence report")
    s.add_argument("input", type=Path)

    s = sub.add_parser("cost", parents=[common], help="print the cost report")
    s.add_argument("input", type=Path)

    s = sub.add_parser("bench", parents=[common], help="run every manifest entry and tabulate costs")
    s.add_argument("manifest", type=Path)
    s.add_argument("--timings", action="store_true", help="include runtimes (output no longer byte-stable)")
    s.add_argument("--no-plot", action="store_true", help="skip the QC chart")

    s = sub.add_parser("export", parents=[common], help="write OpenQASM 2.0 for the final circuit")
    s.add_argument("input", type=Path)
    s.add_argument("-o", "--output", type=Path, default=None, help="output .qasm path (default stdout)")
    s.add_argument("--cvdag-order", choices=CVDAG_ORDERS, default="cv-first")
    return ap


def config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        factorize=not args.no_factorize, reorder=not args.no_reorder,
        rearrange=not args.no_rearrange, ctr=not args.no_ctr, elide=not args.no_elide,
        simplify=not args.no_simplify, strict_elide=args.strict_elide,
        variant_policy=args.variant_policy, cost_model=args.cost_model,
        stop_after=args.stop_after, seed=args.seed, exhaustive_cap=args.exhaustive_cap,
        strict_pprm=args.strict_pprm,
    )


def _summary(res: PipelineResult) -> dict:
    d: dict = {"stopped_at": res.stopped_at}
    form = res.final_form
    if form is not None:
        d["function"] = format_pprm(form, header=False)
    if res.mct is not None:
        d["mct_gates"] = len(res.mct.gates)
    if res.ncv is not None:
        d["width"] = res.ncv.width
        d["garbage"] = [l.name for l in res.ncv.lines if l.garbage]
    if res.cost is not None:
        d["qc"] = res.qc
        d["cost_model"] = res.config.cost_model
        d["cost"] = res.cost.to_dict()
    if res.equivalence is not None:
        d["equivalence"] = res.equivalence.to_dict()
    return d


def _dump_stage(res: PipelineResult) -> str:
    """Text of whatever the pipeline stopped on."""
    if res.ncv is not None and res.stopped_at in ("decompose", "simplify", "lower"):
        return format_real(res.ncv)
    if res.stopped_at in ("synth", "ctr", "elide") and res.mct is not None:
        return format_real(res.mct)
    form = res.final_form
    return format_pprm(form) if form is not None else ""


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, list):
            out[key] = " ".join(str(x) for x in v)
        else:
            out[key] = v
    return out


def _render(d: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    flat = _flat(d)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(flat))
        w.writerow(["" if v is None else v for v in flat.values()])
        return buf.getvalue()
    return "".join(f"{k}: {'' if v is None else v}\n" for k, v in flat.items())


def _emit(res: PipelineResult, stem: str, kinds: list[str], out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in kinds:
        path = out_dir / f"{stem}.{kind}"
        if kind == "pprm" and res.final_form is not None:
            path.write_text(format_pprm(res.final_form), encoding="utf-8")
        elif kind == "real" and (res.ncv or res.mct) is not None:
            if res.mct is not None:
                (out_dir / f"{stem}.mct.real").write_text(format_real(res.mct), encoding="utf-8")
                written.append(out_dir / f"{stem}.mct.real")
            if res.ncv is None:
                continue
            path = out_dir / f"{stem}.ncv.real"
            path.write_text(format_real(res.ncv), encoding="utf-8")
        elif kind == "qasm" and res.ncv is not None:
            path.write_text(format_qasm(res.ncv), encoding="utf-8")
        elif kind == "json":
            path.write_text(json.dumps(_summary(res), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        elif kind == "png" and res.cost is not None and res.cost.per_stage:
            from .plotting import plot_stage_costs

            plot_stage_costs(res.cost.per_stage, path, title=f"{stem}: gate count by stage")
        else:
            continue
        written.append(path)
    return written


def _exit_code(res: PipelineResult) -> int:
    if res.equivalence is not None and not res.equivalence.equivalent:
        return 1
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as e:
        ap.error(str(e))
    emit = [k.strip() for k in args.emit.split(",") if k.strip()]
    bad = set(emit) - {"pprm", "real", "qasm", "json", "png"}
    if bad:
        ap.error(f"unknown --emit kinds: {', '.join(sorted(bad))}")
    out = sys.stdout

    try:
        if args.command == "bench":
            entries = read_manifest(args.manifest)
            rows = run_bench(entries, config)
            if emit or args.out_dir != Path("."):
                paths = write_bench(rows, args.out_dir, config, args.timings, plot=not args.no_plot)
                for p in paths.values():
                    print(f"wrote {p}", file=sys.stderr)
            out.write(bench_json(rows, config, args.timings) if args.format == "json"
                      else bench_csv(rows, args.timings))
            return 0 if all(r.verified for r in rows) else 1

        res = run_pipeline(args.input, config)
        stem = args.input.stem
        if emit:
            for p in _emit(res, stem, emit, args.out_dir):
                print(f"wrote {p}", file=sys.stderr)

        if args.command == "export":
            if res.ncv is None:
                ap.error("export needs a lowered circuit; do not stop before 'decompose'")
            text = format_qasm(res.ncv, args.cvdag_order)
            if args.output:
                args.output.write_text(text, encoding="utf-8")
            else:
                out.write(text)
            return _exit_code(res)
        if args.command == "verify":
            rep = res.equivalence.to_dict() if res.equivalence else {"status": "not-run"}
            out.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
            return _exit_code(res)
        if args.command == "cost":
            d = res.cost.to_dict() if res.cost else {}
            d["qc"] = res.qc
            d["cost_model"] = config.cost_model
            out.write(_render(d, args.format))
            return _exit_code(res)
        if args.command == "lower":
            if args.format == "text" and res.ncv is not None:
                out.write(format_real(res.ncv))
            else:
                out.write(_render(_summary(res), args.format))
            return _exit_code(res)
        # synth
        if res.stopped_at is not None and args.format == "text":
            out.write(_dump_stage(res))
        else:
            out.write(_render(_summary(res), args.format))
        return _exit_code(res)
    except (PipelineError, PprmSyntaxError, RealFormatError, OSError, ValueError) as e:
        print(f"pprm-synth: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
