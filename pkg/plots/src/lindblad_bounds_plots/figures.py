"""Figure builders over the documented CSV schemas.

Each builder validates its input columns, renders one figure, saves it
to ``spec.output`` when given, and returns the matplotlib figure for
inspection.  Schema violations raise :class:`SchemaMismatch`; an empty
but well-formed CSV produces an empty plot and a warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

BOUNDS_COLUMNS = ("omega", "n", "objective", "direction", "bound", "status")
GAP_COLUMNS = ("omega", "n", "delta_lb", "delta_ub", "navigator_min",
               "argmin", "status")
NAVIGATOR_COLUMNS = ("omega", "n", "delta", "navigator")

GUIDE_LABEL = "polynomial guide (non-rigorous)"
#: Guide curves fit at most this many of the largest-N points.
GUIDE_POINTS = 4
GUIDE_DEGREE = 2


class SchemaMismatch(Exception):
    """The input CSV does not carry the documented columns."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input CSVs, figure kind, output path."""

    inputs: Tuple[Path, ...]
    kind: str  # bounds-vs-omega | bounds-vs-N | gap-regions | navigator-profile
    output: Optional[Path] = None
    guide: bool = True
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        kinds = ("bounds-vs-omega", "bounds-vs-N", "gap-regions",
                 "navigator-profile")
        if self.kind not in kinds:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _load(path: Path, required) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise SchemaMismatch(f"{path}: no header row")
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaMismatch(f"{path}: missing columns {missing}")
    return frame


def _load_all(spec: FigureSpec, required) -> pd.DataFrame:
    frames = [_load(Path(p), required) for p in spec.inputs]
    return pd.concat(frames, ignore_index=True)


def _finish(fig, spec: FigureSpec):
    if spec.output is not None:
        fig.savefig(spec.output, dpi=150, bbox_inches="tight")
    return fig


def _warn_if_empty(frame: pd.DataFrame, what: str) -> bool:
    if frame.empty:
        warnings.warn(f"no rows in {what} input; rendering an empty plot",
                      UserWarning, stacklevel=3)
        return True
    return False


def plot_bounds_vs_omega(spec: FigureSpec):
    """Upper/lower observable bounds as functions of the coupling,
    one curve pair per level."""
    frame = _load_all(spec, BOUNDS_COLUMNS)
    fig, ax = plt.subplots(figsize=(6, 4))
    if not _warn_if_empty(frame, "bounds"):
        solved = frame[frame["status"] == "optimal"]
        for (n, direction), group in solved.groupby(["n", "direction"]):
            group = group.sort_values("omega")
            style = "-" if direction == "max" else "--"
            ax.plot(group["omega"], group["bound"], style,
                    label=f"N={n} {direction}")
        ax.legend(fontsize=8)
    ax.set_xlabel(r"coupling $\Omega$")
    ax.set_ylabel("certified bound")
    ax.set_title("steady-state observable bounds")
    return _finish(fig, spec)


def plot_gap_regions(spec: FigureSpec):
    """Shaded allowed decay-rate bands versus the coupling, per level."""
    frame = _load_all(spec, GAP_COLUMNS)
    fig, ax = plt.subplots(figsize=(6, 4))
    if not _warn_if_empty(frame, "gap"):
        allowed = frame[frame["status"] == "ok"].dropna(
            subset=["delta_lb", "delta_ub"])
        for n, group in allowed.groupby("n"):
            group = group.sort_values("omega")
            ax.fill_between(group["omega"], group["delta_lb"],
                            group["delta_ub"], alpha=0.35, label=f"N={n}")
        ax.legend(fontsize=8)
    ax.set_xlabel(r"coupling $\Omega$")
    ax.set_ylabel(r"decay rate $\Delta$")
    ax.set_title("bootstrap-allowed decay-rate regions")
    return _finish(fig, spec)


def _guide_curve(inv_n: np.ndarray, values: np.ndarray):
    order = np.argsort(inv_n)  # ascending 1/N = descending N
    pick = order[:GUIDE_POINTS]
    degree = min(GUIDE_DEGREE, pick.size - 1)
    coeffs = np.polyfit(inv_n[pick], values[pick], degree)
    xs = np.linspace(0.0, inv_n.max(), 100)
    return xs, np.polyval(coeffs, xs)


def plot_bounds_vs_N(spec: FigureSpec):
    """Bound versus inverse level, with an optional non-rigorous
    polynomial guide through the largest-N points."""
    frame = _load_all(spec, BOUNDS_COLUMNS)
    fig, ax = plt.subplots(figsize=(6, 4))
    if not _warn_if_empty(frame, "bounds"):
        solved = frame[frame["status"] == "optimal"]
        for (omega, direction), group in solved.groupby(["omega",
                                                         "direction"]):
            group = group.sort_values("n")
            inv_n = 1.0 / group["n"].to_numpy(dtype=float)
            values = group["bound"].to_numpy(dtype=float)
            ax.plot(inv_n, values, "o",
                    label=rf"$\Omega$={omega} {direction}")
            if spec.guide and len(group["n"].unique()) >= 2:
                xs, ys = _guide_curve(inv_n, values)
                ax.plot(xs, ys, ":", color="gray", label=GUIDE_LABEL)
        # deduplicate the guide label
        handles, labels = ax.get_legend_handles_labels()
        seen, keep = set(), []
        for h, l in zip(handles, labels):
            if l not in seen:
                seen.add(l)
                keep.append((h, l))
        ax.legend(*zip(*keep), fontsize=8)
    ax.set_xlabel("1 / N")
    ax.set_ylabel("certified bound")
    ax.set_title("bound convergence with bootstrap level")
    return _finish(fig, spec)


def plot_navigator_profile(spec: FigureSpec):
    """Minimal late-time slack versus trial decay rate; the sign
    classifies the rate as allowed or excluded."""
    frame = _load_all(spec, NAVIGATOR_COLUMNS)
    fig, ax = plt.subplots(figsize=(6, 4))
    if not _warn_if_empty(frame, "navigator"):
        for (omega, n), group in frame.groupby(["omega", "n"]):
            group = group.sort_values("delta")
            finite = group[np.isfinite(group["navigator"])]
            ax.plot(finite["delta"], finite["navigator"], "-o",
                    markersize=3, label=rf"$\Omega$={omega}, N={n}")
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.legend(fontsize=8)
    ax.set_xlabel(r"decay rate $\Delta$")
    ax.set_ylabel("navigator")
    ax.set_title("navigator profile")
    return _finish(fig, spec)


_BUILDERS = {
    "bounds-vs-omega": plot_bounds_vs_omega,
    "bounds-vs-N": plot_bounds_vs_N,
    "gap-regions": plot_gap_regions,
    "navigator-profile": plot_navigator_profile,
}


def render(spec: FigureSpec):
    """Dispatch a figure spec to its builder."""
    return _BUILDERS[spec.kind](spec)
