"""Benchmark harness: run the pipeline over a manifest and tabulate costs.

Manifest format, one entry per line (``#`` starts a comment)::

    path[,reference_qc,source]

Relative paths resolve against the manifest's directory.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .pipeline import PipelineConfig, run_pipeline

__all__ = [
    "ManifestEntry", "BenchRow", "read_manifest", "parse_manifest", "run_bench",
    "bench_csv", "bench_json", "average_row", "worker_count", "write_bench",
]

THREADS_ENV = "PPRM_SYNTH_THREADS"


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    reference_qc: int | None = None
    source: str | None = None

    @property
    def name(self) -> str:
        return self.path.stem


@dataclass(frozen=True)
class BenchRow:
    function: str
    qc_ours: int | None
    qc_reference: int | None
    source: str | None
    verified: bool
    status: str
    runtime_ms: float = 0.0
    strict_export_qc: int | None = None


def parse_manifest(text: str, base: Path | None = None) -> list[ManifestEntry]:
    base = base or Path(".")
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) > 3:
            raise ValueError(f"manifest line {lineno}: expected path[,reference_qc,source]")
        path = Path(parts[0])
        if not path.is_absolute():
            path = base / path
        ref = None
        if len(parts) >= 2 and parts[1]:
            try:
                ref = int(parts[1])
            except ValueError:
                raise ValueError(f"manifest line {lineno}: reference QC {parts[1]!r} is not an integer") from None
        source = parts[2] if len(parts) == 3 and parts[2] else None
        entries.append(ManifestEntry(path, ref, source))
    return entries


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    return parse_manifest(path.read_text(encoding="utf-8"), path.parent)


def _run_one(entry: ManifestEntry, config: PipelineConfig) -> BenchRow:
    t0 = time.perf_counter()
    try:
        res = run_pipeline(entry.path, config)
        verified = res.equivalence is not None and res.equivalence.equivalent
        status = "ok" if verified else (res.equivalence.status if res.equivalence else "unverified")
        return BenchRow(entry.name, res.qc, entry.reference_qc, entry.source, verified, status,
                        (time.perf_counter() - t0) * 1000.0,
                        res.cost.strict_export_qc if res.cost else None)
    except Exception as e:  # a failing row must not stop the table
        msg = " ".join(f"{type(e).__name__}: {e}".split())
        return BenchRow(entry.name, None, entry.reference_qc, entry.source, False,
                        f"error: {msg}", (time.perf_counter() - t0) * 1000.0)


def worker_count(n_rows: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {cap!r}") from None
    return max(1, min(limit, n_rows))


def run_bench(entries: list[ManifestEntry], config: PipelineConfig | None = None) -> list[BenchRow]:
    """One row per entry, sorted by (function, source); failures become rows."""
    config = config or PipelineConfig()
    if not entries:
        return []
    workers = worker_count(len(entries))
    if workers == 1:
        rows = [_run_one(e, config) for e in entries]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, entries, [config] * len(entries)))
    return sorted(rows, key=lambda r: (r.function, r.source or "", r.qc_reference or -1))


def _mean(vals) -> float | None:
    vals = [v for v in vals if v is not None]
    return round(sum(vals) / len(vals), 2) if vals else None


def average_row(rows: list[BenchRow]) -> dict:
    """Means over rows with a cost; the reference mean uses rows that have one."""
    return {
        "function": "Average",
        "qc_ours": _mean(r.qc_ours for r in rows),
        "qc_reference": _mean(r.qc_reference for r in rows if r.qc_ours is not None),
        "verified": sum(r.verified for r in rows),
        "rows": len(rows),
    }


_COLUMNS = ("function", "qc_ours", "qc_reference", "source", "verified", "status", "strict_export_qc")


def _cells(row: dict, timings: bool) -> list:
    cols = _COLUMNS + (("runtime_ms",) if timings else ())
    out = []
    for c in cols:
        v = row.get(c)
        if isinstance(v, float) and c == "runtime_ms":
            v = f"{v:.1f}"
        out.append("" if v is None else v)
    return out


def bench_csv(rows: list[BenchRow], timings: bool = False) -> str:
    """CSV text; runtimes are left out unless asked for so output is byte-stable."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS + (("runtime_ms",) if timings else ()))
    for r in rows:
        w.writerow(_cells(asdict(r), timings))
    if rows:
        avg = average_row(rows)
        w.writerow(_cells({"function": "Average", "qc_ours": avg["qc_ours"],
                           "qc_reference": avg["qc_reference"], "verified": avg["verified"]},
                          timings))
    return buf.getvalue()


def bench_json(rows: list[BenchRow], config: PipelineConfig | None = None, timings: bool = False) -> str:
    items = []
    for r in rows:
        d = asdict(r)
        if not timings:
            d.pop("runtime_ms")
        else:
            d["runtime_ms"] = round(d["runtime_ms"], 1)
        items.append(d)
    doc = {"rows": items, "average": average_row(rows) if rows else None}
    if config is not None:
        doc["config"] = {k: v for k, v in asdict(config).items()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_bench(rows: list[BenchRow], out_dir, config: PipelineConfig | None = None,
                timings: bool = False, plot: bool = True) -> dict[str, Path]:
    """Write bench.csv, bench.json and (optionally) bench_qc.png into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / "bench.csv", "json": out / "bench.json"}
    paths["csv"].write_text(bench_csv(rows, timings), encoding="utf-8")
    paths["json"].write_text(bench_json(rows, config, timings), encoding="utf-8")
    if plot:
        from .plotting import plot_bench

        paths["png"] = plot_bench(rows, out / "bench_qc.png")
    return paths
