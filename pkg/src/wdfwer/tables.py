"""Reproduction of the eight global-null FWER tables.

Each table fixes a procedure, a sidedness and a level; rows run over
``N_GRID`` and columns over ``DELTA_GRID``.  Every cell is a conditional
estimate under the loading schedule with its own seed derived from the master
seed and the cell coordinates.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import depmodels, mc, records
from .procedures import Family, ProcedureSpec, Sided

N_GRID = (2500, 5000, 7500, 10000)
DELTA_GRID = (0.1, 0.25, 0.5, 0.75, 1.0)
PROFILES = {
    "full": {"replicates": mc.DEFAULT_REPLICATES, "tolerance": 0.005},
    "ci": {"replicates": mc.CI_REPLICATES, "tolerance": 0.01},
}


@dataclass(frozen=True)
class TableSpec:
    table_id: int
    family: Family
    sided: Sided
    alpha: float

    @property
    def title(self) -> str:
        name = "Adjusted Bonferroni" if self.family is Family.BONFERRONI else "Sidak"
        return f"Table {self.table_id}: {name} ({self.sided.value}-sided), alpha={self.alpha}"


TABLES = tuple(
    TableSpec(i + 1, fam, sided, alpha)
    for i, (sided, fam, alpha) in enumerate(
        (s, f, a)
        for s in (Sided.ONE, Sided.TWO)
        for f in (Family.BONFERRONI, Family.SIDAK)
        for a in (0.10, 0.05)
    )
)


def cell_seed(master_seed: int, table_id: int, row: int, col: int) -> int:
    ss = np.random.SeedSequence([int(master_seed), table_id, row, col])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_tables(master_seed: int = 0, replicates: int = mc.DEFAULT_REPLICATES,
               lambda1: float = 0.5, workers: int = 1, tables=TABLES,
               n_grid=N_GRID, delta_grid=DELTA_GRID) -> dict:
    """Estimates keyed by table id, each a row-major list of ``Estimate``."""
    models = {}

    def model(n, delta):
        if (n, delta) not in models:
            models[(n, delta)] = depmodels.build_schedule(lambda1, delta, n)
        return models[(n, delta)]

    jobs = []
    for t in tables:
        for r, n in enumerate(n_grid):
            for c, delta in enumerate(delta_grid):
                jobs.append((t, r, c, model(n, delta)))

    def one(job):
        t, r, c, m = job
        spec = ProcedureSpec(t.family, t.sided)
        return mc.fwer_conditional(m, spec, t.alpha, replicates=replicates,
                                   seed=cell_seed(master_seed, t.table_id, r, c))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    out = {t.table_id: [] for t in tables}
    for (t, _, _, _), est in zip(jobs, results):
        out[t.table_id].append(est)
    return out


def max_deviation(estimates, alpha: float) -> float:
    return max(abs(e.value - alpha) for e in estimates)


def markdown_table(t: TableSpec, estimates, n_grid=N_GRID, delta_grid=DELTA_GRID) -> str:
    lines = [f"### {t.title}", "",
             "| | " + " | ".join(f"delta={d:g}" for d in delta_grid) + " |",
             "|---|" + "---|" * len(delta_grid)]
    ncol = len(delta_grid)
    for r, n in enumerate(n_grid):
        cells = estimates[r * ncol:(r + 1) * ncol]
        lines.append(f"| n={n} | " + " | ".join(f"{e.value:.5f}" for e in cells) + " |")
    return "\n".join(lines) + "\n"


def summary_rows(results: dict, tolerance: float, tables=TABLES) -> list:
    rows = []
    for t in tables:
        dev = max_deviation(results[t.table_id], t.alpha)
        rows.append({"table": t.table_id, "procedure": t.family.value,
                     "sided": t.sided.value, "alpha": t.alpha,
                     "max_abs_dev": dev, "tolerance": tolerance,
                     "pass": dev <= tolerance})
    return rows


def write_tables(results: dict, out_dir, tolerance: float, fmt: str = "csv",
                 tables=TABLES, n_grid=N_GRID, delta_grid=DELTA_GRID) -> list:
    """Write per-table CSV and Markdown plus a summary; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for t in tables:
        recs = [e.record() for e in results[t.table_id]]
        stem = out / f"table{t.table_id}"
        paths = {stem.with_suffix(".csv"): records.to_csv(recs),
                 stem.with_suffix(".md"): markdown_table(t, results[t.table_id],
                                                         n_grid, delta_grid)}
        if fmt == "json":
            paths[stem.with_suffix(".jsonl")] = records.to_jsonl(recs)
        for path, text in paths.items():
            path.write_text(text)
            written.append(path)

    summary = summary_rows(results, tolerance, tables)
    cols = ("table", "procedure", "sided", "alpha", "max_abs_dev", "tolerance", "pass")
    csv_lines = [",".join(cols)]
    md_lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for row in summary:
        vals = [repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols]
        csv_lines.append(",".join(vals))
        md_lines.append("| " + " | ".join(vals) + " |")
    for name, text in (("summary.csv", "\n".join(csv_lines) + "\n"),
                       ("summary.md", "\n".join(md_lines) + "\n")):
        (out / name).write_text(text)
        written.append(out / name)
    return written
