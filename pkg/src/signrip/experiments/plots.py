"""Plot emission: vector figures plus the CSV slice behind each one.

Line plots show the median with an interquartile band over trials; error
axes are log-scaled with values clipped at 1e-12.  Heatmaps pivot the
median metric over two grid axes.  Every figure gets a sibling CSV holding
exactly the aggregated numbers that were drawn.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .runner import ResultTable, aggregate  # noqa: E402

__all__ = ["emit_plots", "LOG_FLOOR"]

LOG_FLOOR = 1e-12

_AXIS_PRIORITY = ("m", "d", "p", "scale", "sigma", "r")


def _ok_rows(table: ResultTable) -> list[dict]:
    return [r for r in table.rows if str(r.get("status", "ok")) == "ok"]


def _varying_axes(rows: list[dict], columns) -> list[str]:
    out = []
    for axis in _AXIS_PRIORITY:
        if axis in columns and len({r[axis] for r in rows}) > 1:
            out.append(axis)
    return out


def _clip(values) -> np.ndarray:
    return np.maximum(np.asarray(values, dtype=float), LOG_FLOOR)


def _write_slice(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[c]:.12g}" if isinstance(row[c], float) else str(row[c]) for c in columns) + "\n")


def _value_column(table: ResultTable) -> str:
    for cand in ("final_err", "delta_hat", "deviation"):
        if cand in table.columns:
            return cand
    raise ValueError(f"no plottable value column among {table.columns}")


def _group_keys(table: ResultTable) -> tuple[str, ...]:
    if "solver" in table.columns:
        return ("solver", "r_prime")
    if "kind" in table.columns:
        return ("kind", "r")
    return ()


def _plot_trace(table: ResultTable, out: Path, name: str) -> list[Path]:
    t = np.array([r["t"] for r in table.rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    drew = []
    for col, style in (("err_frob", "-"), ("loss_l1", "--")):
        if col in table.columns:
            vals = np.array([r[col] for r in table.rows], dtype=float)
            if np.isfinite(vals).any():
                ax.semilogy(t, _clip(vals), style, label=col)
                drew.append(col)
    ax.set_xlabel("iteration")
    ax.set_ylabel("value (log)")
    ax.legend()
    ax.set_title(name)
    fig_path = out / f"{name}_trace.svg"
    fig.savefig(fig_path, bbox_inches="tight")
    plt.close(fig)
    slice_path = out / f"{name}_trace.csv"
    _write_slice(slice_path, ["t", *drew], table.rows)
    return [fig_path, slice_path]


def _plot_line(table: ResultTable, out: Path, name: str) -> list[Path]:
    rows = _ok_rows(table)
    value = _value_column(table)
    varying = _varying_axes(rows, table.columns)
    x_axis = varying[0] if varying else "trial"
    groups = _group_keys(table)
    agg = aggregate(table, value, by=(*groups, x_axis))
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = sorted({tuple(a[g] for g in groups) for a in agg}, key=str)
    for label in labels:
        pts = sorted((a for a in agg if tuple(a[g] for g in groups) == label), key=lambda a: a[x_axis])
        x = [a[x_axis] for a in pts]
        med, lo, hi = (_clip([a[k] for a in pts]) for k in ("median", "q25", "q75"))
        text = ", ".join(f"{g}={v}" for g, v in zip(groups, label)) or value
        ax.plot(x, med, "o-", label=text)
        ax.fill_between(x, lo, hi, alpha=0.2)
    if "noise_only" in table.columns:  # deviation sweeps carry a second curve
        extra = aggregate(table, "noise_only", by=(x_axis,))
        pts = sorted(extra, key=lambda a: a[x_axis])
        ax.plot([a[x_axis] for a in pts], _clip([a["median"] for a in pts]), "s--", label="noise_only")
    ax.set_yscale("log")
    ax.set_xlabel(x_axis)
    ax.set_ylabel(f"{value} (median, IQR)")
    ax.legend(fontsize=8)
    ax.set_title(name)
    fig_path = out / f"{name}_line.svg"
    fig.savefig(fig_path, bbox_inches="tight")
    plt.close(fig)
    slice_path = out / f"{name}_line.csv"
    _write_slice(slice_path, [*groups, x_axis, "n", "median", "q25", "q75"], agg)
    return [fig_path, slice_path]


def _plot_heatmap(table: ResultTable, out: Path, name: str) -> list[Path]:
    rows = _ok_rows(table)
    value = _value_column(table)
    varying = _varying_axes(rows, table.columns)
    if len(varying) < 2:
        warnings.warn(f"heatmap needs two varying axes, found {varying}; falling back to line")
        return _plot_line(table, out, name)
    x_axis, y_axis = varying[0], varying[1]
    written = []
    solver_labels = sorted({r["solver"] for r in rows}) if "solver" in table.columns else [None]
    for solver in solver_labels:
        sub = [r for r in rows if solver is None or r["solver"] == solver]
        agg = aggregate(ResultTable(columns=table.columns, rows=sub), value, by=(x_axis, y_axis))
        xs = sorted({a[x_axis] for a in agg})
        ys = sorted({a[y_axis] for a in agg})
        grid = np.full((len(ys), len(xs)), np.nan)
        for a in agg:
            grid[ys.index(a[y_axis]), xs.index(a[x_axis])] = a["median"]
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(
            np.log10(_clip(grid)), origin="lower", aspect="auto", cmap="viridis",
            extent=(-0.5, len(xs) - 0.5, -0.5, len(ys) - 0.5),
        )
        ax.set_xticks(range(len(xs)), [str(v) for v in xs])
        ax.set_yticks(range(len(ys)), [str(v) for v in ys])
        ax.set_xlabel(x_axis)
        ax.set_ylabel(y_axis)
        tag = f"{name}_{solver}" if solver is not None else name
        ax.set_title(f"{tag}: log10 median {value}")
        fig.colorbar(im, ax=ax)
        fig_path = out / f"{tag}_heatmap.svg"
        fig.savefig(fig_path, bbox_inches="tight")
        plt.close(fig)
        slice_path = out / f"{tag}_heatmap.csv"
        _write_slice(slice_path, [x_axis, y_axis, "n", "median", "q25", "q75"], agg)
        written += [fig_path, slice_path]
    return written


def emit_plots(table: ResultTable, kind: str, out_dir, name: str | None = None) -> list[Path]:
    """Write figure file(s) + CSV slice(s) for a result table.

    ``kind`` is "line" or "heatmap"; tables with a ``t`` column (iteration
    traces) always get the trace rendering.  An empty table warns and
    writes nothing.
    """
    if kind not in ("line", "heatmap"):
        raise ValueError(f"kind must be 'line' or 'heatmap', got {kind!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not table.rows:
        warnings.warn("empty result table: no plots written")
        return []
    if name is None:
        name = str(table.rows[0].get("scenario", "plot")) if "scenario" in table.columns else "plot"
    if "t" in table.columns:
        return _plot_trace(table, out, name)
    if kind == "heatmap":
        return _plot_heatmap(table, out, name)
    return _plot_line(table, out, name)
