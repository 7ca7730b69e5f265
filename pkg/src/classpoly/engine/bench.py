"""Benchmark harness: phase timings and heights for a list of discriminants."""

from __future__ import annotations

import csv
import io
import time
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..heightbound import PrecisionPolicy
from ..polyops import poly_from_roots
from ..bigfloat import BigComplex
from .pipeline import PHASES, STRATEGIES, RunReport, compute_class_polynomial

COLUMNS = (
    "D", "h", "strategy", "precision",
    *PHASES, "total",
    "height_nats", "heuristic_nats", "proven_nats", "agm/sparse",
)


def read_discriminants(path: str | Path) -> list[int]:
    """One discriminant per line; blank lines and '#' comments are ignored."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.extend(int(tok) for tok in line.replace(",", " ").split())
    return out


def benchmark_suite(
    discriminants: Iterable[int],
    strategies: Sequence[str] = STRATEGIES,
    policy: PrecisionPolicy = PrecisionPolicy(),
    enumeration: str = "factored",
    chunks: Optional[int] = None,
) -> list[RunReport]:
    """One RunReport per (D, strategy), in input order."""
    reports = []
    for D in discriminants:
        for s in strategies:
            _, report = compute_class_polynomial(D, s, enumeration, policy, chunks=chunks)
            reports.append(report)
    return reports


def _ratio(reports: Sequence[RunReport], r: RunReport) -> str:
    if r.strategy != "agm":
        return ""
    base = next((x for x in reports if x.D == r.D and x.strategy == "sparse"), None)
    if base is None or base.total == 0:
        return ""
    return f"{r.total / base.total:.3f}"


def table_rows(reports: Sequence[RunReport]) -> list[list[str]]:
    rows = []
    for r in sorted(reports, key=lambda x: (STRATEGIES.index(x.strategy), -x.D)):
        rows.append([
            str(r.D), str(r.h), r.strategy, str(r.precision),
            *(f"{r.timings.get(p, 0.0):.4f}" for p in PHASES), f"{r.total:.4f}",
            f"{r.measured_height_nats:.2f}", f"{r.heuristic_nats:.2f}", f"{r.proven_bound_nats:.2f}",
            _ratio(reports, r),
        ])
    return rows


def format_table(reports: Sequence[RunReport], delimiter: str = "\t") -> str:
    """Rows grouped by strategy; the agm rows carry the agm/sparse total ratio."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(COLUMNS)
    writer.writerows(table_rows(reports))
    return buf.getvalue()


def tree_scaling(sizes: Sequence[int] = (64, 128, 256, 512), prec: int = 128, repeats: int = 3,
                 seed: int = 0) -> list[tuple[int, float]]:
    """Best-of-``repeats`` time of poly_from_roots on h random unit-disc roots."""
    import random

    rng = random.Random(seed)
    out = []
    for h in sizes:
        roots = [BigComplex.from_value(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), prec) for _ in range(h)]
        best = float("inf")
        for _ in range(repeats):
            t = time.perf_counter()
            poly_from_roots(roots)
            best = min(best, time.perf_counter() - t)
        out.append((h, best))
    return out


def write_report(reports: Sequence[RunReport], outdir: str | Path, delimiter: str = "\t") -> list[Path]:
    """Write the table and its figures into outdir; returns the written paths."""
    from . import plotting

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ext = "csv" if delimiter == "," else "tsv"
    table = outdir / f"bench.{ext}"
    table.write_text(format_table(reports, delimiter))
    paths = [table]
    paths.append(plotting.plot_phase_timings(reports, outdir / "phase_timings.png"))
    paths.append(plotting.plot_heights(reports, outdir / "heights.png"))
    return paths
