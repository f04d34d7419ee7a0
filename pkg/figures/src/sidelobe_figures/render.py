"""Figure rendering for sweep outputs.

Three kinds: ``heatmap`` (PSR over the examined area, transmitter at the
origin, boresight along +x), ``curve`` (eavesdropping area vs PSR threshold,
multiple reports overlay), ``bars`` (area at one threshold across reports).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .io import SchemaError, read_grid_csv, read_report, verify_digest  # noqa: E402

KINDS = ("heatmap", "curve", "bars")
FIGSIZE = (5.4, 4.0)
DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    kind: str
    out_path: str
    title: str = ""
    labels: tuple = field(default_factory=tuple)
    threshold: float = 0.001  # bars: which area column to plot
    check_digest: str = ""  # heatmap: report whose digest must match the CSV

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {', '.join(KINDS)}")
        if not self.inputs:
            raise ValueError("at least one input file is required")
        if self.labels and len(self.labels) != len(self.inputs):
            raise ValueError("need exactly one label per input")


def _label(doc: dict, params_keys=("antennas", "attacker_height")) -> str:
    base = f"{doc['scenario']} {doc['rate_gbps']:g} Gbps"
    params = doc.get("parameters", {})
    extras = [f"{params['antennas']}" if "antennas" in params else "",
              f"h={params['attacker_height']:g}m"
              if "attacker_height" in params else ""]
    extras = [e for e in extras if e]
    return base + (" (" + ", ".join(extras) + ")" if extras else "")


def _render_heatmap(spec: FigureSpec, ax):
    grid = read_grid_csv(spec.inputs[0])
    if spec.check_digest and not verify_digest(spec.inputs[0], spec.check_digest):
        raise SchemaError(f"{spec.inputs[0]}: digest mismatch against "
                          f"{spec.check_digest}")
    dx = np.diff(grid.xs).mean() if grid.xs.size > 1 else 1.0
    dy = np.diff(grid.ys).mean() if grid.ys.size > 1 else 1.0
    extent = (grid.xs[0] - dx / 2, grid.xs[-1] + dx / 2,
              grid.ys[0] - dy / 2, grid.ys[-1] + dy / 2)
    im = ax.imshow(grid.values, origin="lower", extent=extent, aspect="equal",
                   vmin=0.0, vmax=1.0, cmap="inferno")
    ax.plot(0, 0, marker="^", color="cyan", markersize=9)
    ax.annotate("TX", (0, 0), textcoords="offset points", xytext=(6, 6),
                color="cyan")
    ax.set_xlabel("x (m), TX boresight")
    ax.set_ylabel("y (m)")
    plt.colorbar(im, ax=ax, label="packet success rate")


def _render_curve(spec: FigureSpec, ax):
    for i, path in enumerate(spec.inputs):
        doc = read_report(path)
        thresholds = [t for t, _ in doc["areas"]]
        areas = [a for _, a in doc["areas"]]
        label = spec.labels[i] if spec.labels else _label(doc)
        ax.plot(thresholds, areas, marker="o", label=label)
    ax.set_xlabel("PSR threshold")
    ax.set_ylabel("eavesdropping area (m$^2$)")
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    ax.legend()


def _render_bars(spec: FigureSpec, ax):
    labels, heights = [], []
    for i, path in enumerate(spec.inputs):
        doc = read_report(path)
        areas = dict(doc["areas"])
        if spec.threshold not in areas:
            raise SchemaError(f"{path}: no area at threshold {spec.threshold:g} "
                              f"(has {sorted(areas)})")
        labels.append(spec.labels[i] if spec.labels else _label(doc))
        heights.append(areas[spec.threshold])
    ax.bar(range(len(heights)), heights, color="tab:blue")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(f"area with PSR > {spec.threshold:g} (m$^2$)")
    ax.grid(True, axis="y", alpha=0.3)


def render(spec: FigureSpec) -> str:
    """Render ``spec`` to its output path and return the path."""
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        {"heatmap": _render_heatmap, "curve": _render_curve,
         "bars": _render_bars}[spec.kind](spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path


import numpy as np  # noqa: E402  (used by _render_heatmap)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="sidelobe-render",
        description="render sweep CSV/JSON outputs as figures")
    p.add_argument("--kind", required=True, choices=list(KINDS))
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   help="input file, repeatable (CSV for heatmap, report JSON "
                        "for curve/bars)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--title", default="")
    p.add_argument("--label", dest="labels", action="append",
                   help="series label, repeatable")
    p.add_argument("--threshold", type=float, default=0.001,
                   help="bars: area column to plot")
    p.add_argument("--check-digest", default="",
                   help="heatmap: report JSON whose csv_digest must match")
    args = p.parse_args(argv)
    try:
        spec = FigureSpec(inputs=tuple(args.inputs), kind=args.kind,
                          out_path=args.out, title=args.title,
                          labels=tuple(args.labels or ()),
                          threshold=args.threshold,
                          check_digest=args.check_digest)
        render(spec)
    except FileNotFoundError as e:
        print(f"sidelobe-render: i/o error: {e}", file=sys.stderr)
        return 2
    except (SchemaError, ValueError) as e:
        print(f"sidelobe-render: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"sidelobe-render: i/o error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
