"""Sweep execution: grid x solvers x trials -> long-format CSV rows.

Every row carries the derived seed that regenerates it in isolation: the
cell seed is a CRC of (base_seed, canonical coordinate string) XOR the
trial index, and each model component (truth, ensemble, noise, init,
probes) hashes a component tag on top of that.  Rows are appended to the
output CSV as cells complete (crash-safe, one flushed write per row) and
the finished file is rewritten sorted on the grid coordinates so reruns
are byte-identical apart from the timestamp comment.
"""

from __future__ import annotations

import dataclasses
import datetime
import os
import re
import zlib
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from ..model import NoiseSpec, gen_ensemble, gen_ground_truth, gen_noise, measure
from ..optim import InitSpec, RunRecord, gd_l2, make_init, subgd
from ..rip import estimate_l1l2_rip, estimate_l2_rip, estimate_sign_rip, q_deviation_l2
from .scenario import Scenario, SolverSpec

__all__ = ["ResultTable", "run_scenario", "derive_seed", "component_seed", "aggregate"]

SOLVE_COLUMNS = (
    "scenario", "d", "m", "p", "dist", "scale", "solver", "algorithm", "r_prime",
    "policy", "eta0", "rho", "iters", "trial", "seed", "status",
    "final_err", "final_loss_l1", "final_loss_l2",
)
RIP_COLUMNS = (
    "kind", "r", "m", "d", "p", "sigma", "n_samples", "delta_hat",
    "scenario", "dist", "trial", "seed", "status",
)
QDEV_COLUMNS = (
    "scenario", "d", "m", "p", "dist", "scale", "n_samples", "trial", "seed",
    "status", "deviation", "noise_only",
)


def derive_seed(base_seed: int, coords: str, trial: int) -> int:
    """Deterministic per-row seed: CRC of the cell identity XOR trial."""
    cell = zlib.crc32(f"{base_seed}|{coords}".encode())
    return (cell ^ trial) & 0x7FFFFFFF


def component_seed(row_seed: int, component: str) -> int:
    return zlib.crc32(f"{row_seed}|{component}".encode()) & 0x7FFFFFFF


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return "nan" if np.isnan(value) else f"{value:.12g}"
    return str(value)


@dataclass
class ResultTable:
    """Long-format sweep results with a fixed column order."""

    columns: tuple[str, ...]
    rows: list[dict[str, Any]]

    def column(self, name: str) -> list[Any]:
        return [r[name] for r in self.rows]

    def to_csv(self, path, timestamp: bool = True) -> None:
        with open(path, "w") as fh:
            if timestamp:
                fh.write(f"# generated {datetime.datetime.now().isoformat()}\n")
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(row[c]) for c in self.columns) + "\n")

    @classmethod
    def from_csv(cls, path) -> "ResultTable":
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
        if not lines:
            return cls(columns=(), rows=[])
        columns = tuple(lines[0].split(","))
        rows = []
        for ln in lines[1:]:
            vals = ln.split(",")
            row: dict[str, Any] = {}
            for c, v in zip(columns, vals):
                try:
                    row[c] = int(v)
                except ValueError:
                    try:
                        row[c] = float(v)
                    except ValueError:
                        row[c] = v
            rows.append(row)
        return cls(columns=columns, rows=rows)


@dataclass(frozen=True)
class _Task:
    """One unit of work, picklable for the process pool."""

    scenario_name: str
    kind: str
    cell_index: int
    coords: dict[str, Any]
    trial: int
    seed: int
    r_star: int
    variant: str
    trace: bool
    # solve
    solver: SolverSpec | None = None
    init: InitSpec | None = None
    # rip / qdev
    rank: int = 1
    certifier: str = "sign"
    n_samples: int = 200


def _noise_for(task: _Task, m: int) -> Any:
    spec = NoiseSpec(
        p=task.coords["p"], dist=task.coords["dist"], scale=task.coords["scale"],
        seed=component_seed(task.seed, "noise"),
    )
    return gen_noise(m, spec)


def _run_task(task: _Task) -> tuple[_Task, dict[str, Any], RunRecord | None]:
    d, m = task.coords["d"], task.coords["m"]
    ensemble = gen_ensemble(d, m, seed=component_seed(task.seed, "ensemble"), variant=task.variant)
    noise = _noise_for(task, m)
    if task.kind == "solve":
        truth = gen_ground_truth(d, task.r_star, seed=component_seed(task.seed, "truth"))
        y = measure(ensemble, truth, noise)
        sv = task.solver
        r_prime = sv.resolve_r_prime(d)
        u0 = make_init(task.init, ensemble, y, r_prime, seed=component_seed(task.seed, "init"))
        if sv.algorithm == "subgd":
            _, record = subgd(ensemble, y, u0, sv.policy, sv.iters, truth=truth)
        else:
            _, record = gd_l2(ensemble, y, u0, sv.policy, sv.iters, truth=truth)
        row = {
            "status": record.status,
            "final_err": record.final("err_frob"),
            "final_loss_l1": record.final("loss_l1"),
            "final_loss_l2": record.final("loss_l2"),
        }
        return task, row, (record if task.trace else None)
    if task.kind == "rip":
        probe_seed = component_seed(task.seed, "probes")
        if task.certifier == "sign":
            est = estimate_sign_rip(ensemble, noise, task.rank, task.n_samples, seed=probe_seed)
        elif task.certifier == "l2":
            est = estimate_l2_rip(ensemble, task.rank, task.n_samples, seed=probe_seed)
        else:
            est = estimate_l1l2_rip(ensemble, task.rank, task.n_samples, seed=probe_seed)
        row = {
            "kind": est.kind, "r": est.rank, "sigma": task.coords["scale"],
            "n_samples": est.n_samples, "delta_hat": est.delta_hat, "status": "ok",
        }
        return task, row, None
    # qdev
    dev = q_deviation_l2(ensemble, noise, task.n_samples, seed=component_seed(task.seed, "probes"))
    row = {
        "n_samples": task.n_samples, "status": "ok",
        "deviation": dev.deviation, "noise_only": dev.noise_only,
    }
    return task, row, None


def _coord_string(task: _Task) -> str:
    parts = [f"{k}={task.coords[k]!r}" for k in ("d", "m", "p", "dist", "scale")]
    if task.kind == "solve":
        parts.append(f"solver={task.solver.label}")
    elif task.kind == "rip":
        parts += [f"rank={task.rank}", f"certifier={task.certifier}"]
    return "|".join(parts)


def _build_tasks(s: Scenario, trace: bool) -> list[_Task]:
    tasks = []
    for cell_index, coords in enumerate(s.grid_cells()):
        if s.kind == "solve":
            variants: Iterable[dict[str, Any]] = ({"solver": sv} for sv in s.solvers)
        elif s.kind == "rip":
            variants = ({"rank": r, "certifier": c} for r in s.rank for c in s.certifiers)
        else:
            variants = ({},)
        for extra in variants:
            for trial in range(s.trials):
                task = _Task(
                    scenario_name=s.name, kind=s.kind, cell_index=cell_index,
                    coords=coords, trial=trial, seed=0, r_star=s.r_star,
                    variant=s.variant, trace=trace, init=s.init,
                    n_samples=s.n_samples, **extra,
                )
                seed = derive_seed(s.base_seed, _coord_string(task), trial)
                tasks.append(dataclasses.replace(task, seed=seed))
    return tasks


def _base_row(task: _Task) -> dict[str, Any]:
    c = task.coords
    row = {
        "scenario": task.scenario_name, "d": c["d"], "m": c["m"], "p": c["p"],
        "dist": c["dist"], "scale": c["scale"], "trial": task.trial, "seed": task.seed,
    }
    if task.kind == "solve":
        sv = task.solver
        kind, eta0, rho = sv.policy_fields()
        row.update(
            solver=sv.label, algorithm=sv.algorithm,
            r_prime=sv.resolve_r_prime(c["d"]), policy=kind, eta0=eta0, rho=rho,
            iters=sv.iters,
        )
    return row


def _failure_row(task: _Task, exc: Exception) -> dict[str, Any]:
    row = _base_row(task)
    row["status"] = f"failed:{type(exc).__name__}"
    columns = {"solve": SOLVE_COLUMNS, "rip": RIP_COLUMNS, "qdev": QDEV_COLUMNS}[task.kind]
    for col in columns:
        row.setdefault(col, float("nan"))
    return row


def _sort_key(columns: tuple[str, ...]):
    keys = [c for c in ("d", "m", "p", "dist", "scale", "solver", "kind", "r", "sigma", "trial") if c in columns]

    def key(row: dict[str, Any]):
        return tuple(row[k] for k in keys)

    return key


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text)


def run_scenario(
    s: Scenario,
    out_dir: str | os.PathLike | None = None,
    threads: int = 1,
    trace: bool | None = None,
) -> ResultTable:
    """Execute a scenario; write <out>/<name>.csv and optional trace files.

    ``threads`` > 1 runs grid cells on a process pool (work stealing via
    as_completed); rows are sorted on grid coordinates before the final
    write so the file content does not depend on completion order.
    """
    trace = s.trace if trace is None else trace
    out = Path(out_dir) if out_dir is not None else Path(s.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    columns = {"solve": SOLVE_COLUMNS, "rip": RIP_COLUMNS, "qdev": QDEV_COLUMNS}[s.kind]
    tasks = _build_tasks(s, trace)
    csv_path = out / f"{_slug(s.name)}.csv"
    trace_dir = out / "traces"
    if trace:
        trace_dir.mkdir(exist_ok=True)

    rows: list[dict[str, Any]] = []
    with open(csv_path, "w") as live:
        live.write(f"# generated {datetime.datetime.now().isoformat()}\n")
        live.write(",".join(columns) + "\n")

        def finish(task: _Task, row: dict[str, Any], record: RunRecord | None) -> None:
            full = {**_base_row(task), **row}
            rows.append(full)
            live.write(",".join(_fmt(full[c]) for c in columns) + "\n")
            live.flush()
            if record is not None:
                name = f"{_slug(s.name)}_c{task.cell_index:03d}_{_slug(task.solver.label)}_t{task.trial}.csv"
                record.to_csv(trace_dir / name)

        if threads <= 1:
            for task in tasks:
                try:
                    finish(*_run_task(task))
                except Exception as exc:  # noqa: BLE001 - failure becomes a flagged row
                    rows.append(_failure_row(task, exc))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = {pool.submit(_run_task, t): t for t in tasks}
                for fut in as_completed(futures):
                    task = futures[fut]
                    try:
                        finish(*fut.result())
                    except Exception as exc:  # noqa: BLE001
                        rows.append(_failure_row(task, exc))

    rows.sort(key=_sort_key(columns))
    table = ResultTable(columns=columns, rows=rows)
    tmp = csv_path.with_suffix(".csv.tmp")
    table.to_csv(tmp)
    os.replace(tmp, csv_path)
    return table


def aggregate(
    table: ResultTable, value: str, by: tuple[str, ...]
) -> list[dict[str, Any]]:
    """Median + interquartile range of one column per group (ok rows only).

    Heavy-tailed noise makes means meaningless, so all reporting uses
    median and IQR.
    """
    groups: dict[tuple, list[float]] = {}
    for row in table.rows:
        if str(row.get("status", "ok")) != "ok":
            continue
        v = row[value]
        if not isinstance(v, (int, float)) or (isinstance(v, float) and np.isnan(v)):
            continue
        groups.setdefault(tuple(row[k] for k in by), []).append(float(v))
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        vals = np.array(groups[key])
        entry = dict(zip(by, key))
        entry.update(
            n=len(vals),
            median=float(np.median(vals)),
            q25=float(np.percentile(vals, 25)),
            q75=float(np.percentile(vals, 75)),
        )
        out.append(entry)
    return out
