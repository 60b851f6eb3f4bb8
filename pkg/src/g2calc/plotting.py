"""Figure rendering for suite reports (headless matplotlib backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-._" else "-" for ch in name)


def render_report_figures(report, out_path: str | Path) -> list[str]:
    """One PNG per sample group, written next to the report file.

    Samples are grouped by originating suite (the part of the series name
    before "/" for combined runs).  Axes switch to log scale when a group's
    data is positive and spans more than two decades.
    """
    out = Path(out_path)
    groups: dict[str, dict[str, list[tuple[float, float]]]] = {}
    for s in report.samples:
        series = s["series"]
        if "/" in series:
            group, label = series.split("/", 1)
        else:
            group, label = report.suite, series
        groups.setdefault(group, {}).setdefault(label, []).append(
            (s["t"], s["value"]))

    written: list[str] = []
    for group in sorted(groups):
        series_map = groups[group]
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        ts_all: list[float] = []
        vs_all: list[float] = []
        for label in sorted(series_map):
            pts = sorted(series_map[label])
            ts = [p[0] for p in pts]
            vs = [p[1] for p in pts]
            ts_all += ts
            vs_all += vs
            ax.plot(ts, vs, marker="o", markersize=3, linewidth=1.0,
                    label=label)
        if ts_all and min(ts_all) > 0 and max(ts_all) / min(ts_all) > 100:
            ax.set_xscale("log")
        positive = [v for v in vs_all if v > 0]
        if positive and len(positive) == len(vs_all) \
                and max(positive) / min(positive) > 100:
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("value")
        ax.set_title(f"{group} samples")
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        target = out.with_name(f"{out.stem}-{_slug(group)}.png")
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(str(target))
    return written
