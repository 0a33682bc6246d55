"""SVG figures.  Output bytes depend only on the input series."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from .errors import InvalidParameter

_RC = {
    "svg.hashsalt": "sparsecert",
    "svg.fonttype": "path",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    return path


def threshold_curve(series, path) -> Path:
    s_vals = [int(s) for s, _ in series]
    vals = [float(v) for _, v in series]
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(7.0, 3.6))
        ax = fig.add_subplot()
        ax.plot(s_vals, vals, color="C0", lw=0.8, marker=".", ms=3)
        ax.axhline(4 / math.sqrt(41), color="C1", ls="--", lw=0.8, label=r"$4/\sqrt{41}$")
        ax.axhline(2 / 3, color="C2", ls=":", lw=0.8, label=r"$2/3$")
        ax.set_xlabel("s")
        ax.set_ylabel(r"sufficient bound on $\delta_{2s}$")
        ax.set_xlim(min(s_vals) - 1, max(s_vals) + 1)
        ax.legend(loc="lower right", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def phase_diagram(records, path) -> Path:
    rows = [r if isinstance(r, dict) else r.to_json() for r in records]
    s_vals = sorted({int(r["s"]) for r in rows})
    m_vals = sorted({int(r["m"]) for r in rows})
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(6.0, 3.8))
        ax = fig.add_subplot()
        if len(s_vals) == 1:
            pts = sorted((int(r["m"]), float(r["prob"])) for r in rows)
            ax.plot([m for m, _ in pts], [p for _, p in pts], marker="o", ms=3, lw=1.0)
            ax.set_ylim(-0.02, 1.02)
            ax.set_xlabel("m (samples)")
            ax.set_ylabel("empirical recovery probability")
            ax.set_title(f"N = {rows[0]['N']}, s = {s_vals[0]}, {rows[0]['ensemble']}")
        else:
            grid = [[math.nan] * len(m_vals) for _ in s_vals]
            for r in rows:
                grid[s_vals.index(int(r["s"]))][m_vals.index(int(r["m"]))] = float(r["prob"])
            im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0, cmap="viridis",
                           extent=(m_vals[0] - 0.5, m_vals[-1] + 0.5, s_vals[0] - 0.5, s_vals[-1] + 0.5))
            fig.colorbar(im, ax=ax, label="recovery probability")
            ax.set_xlabel("m (samples)")
            ax.set_ylabel("s (sparsity)")
            ax.grid(False)
        fig.tight_layout()
        return _save(fig, path)


def emit_figure(series, kind: str, path) -> Path:
    series = list(series)
    if not series:
        raise InvalidParameter("cannot draw an empty series")
    if kind == "threshold_curve":
        return threshold_curve(series, path)
    if kind == "phase_diagram":
        return phase_diagram(series, path)
    raise InvalidParameter(f"unknown figure kind {kind!r}")
