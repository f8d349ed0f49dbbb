"""Rendering of evaluation reports: aligned text, JSONL, and figures.

The figure path writes one PNG per metric (per-topic bars with the mean
drawn as a horizontal line) plus a summary chart of the means, next to
whatever delimited output the caller asked for.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .treceval import EvalReport


def render_text(report: EvalReport, per_topic: bool = True) -> str:
    """Aligned plain-text metric table."""
    metrics = list(report.means)
    lines = []
    header = ["topic"] + metrics
    widths = [max(8, len(h) + 2) for h in header]
    fmt = "".join(f"{{:<{w}}}" for w in widths)
    lines.append(fmt.format(*header))
    if per_topic:
        for topic_id, values in report.rows:
            lines.append(fmt.format(topic_id, *[f"{values[m]:.4f}" for m in metrics]))
    lines.append(fmt.format("mean", *[f"{report.means[m]:.4f}" for m in metrics]))
    if report.skipped:
        lines.append(f"skipped (no relevant judgments): {', '.join(map(str, report.skipped))}")
    return "\n".join(lines)


def render_jsonl(report: EvalReport) -> str:
    """Machine-readable report: one JSON object per topic plus a mean row."""
    lines = []
    for topic_id, values in report.rows:
        lines.append(json.dumps({"topic": topic_id, "tag": report.tag, **values}))
    lines.append(json.dumps({"topic": "mean", "tag": report.tag, **report.means}))
    for topic_id in report.skipped:
        lines.append(json.dumps({"topic": topic_id, "tag": report.tag, "skipped": True}))
    return "\n".join(lines)


def render_figures(report: EvalReport, out_dir) -> list[Path]:
    """Write one bar chart per metric and a means summary; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    topics = [topic_id for topic_id, _ in report.rows]
    for metric in report.means:
        fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(topics) + 2.0), 3.0))
        values = [values[metric] for _, values in report.rows]
        ax.bar([str(t) for t in topics], values, color="#4878a8")
        ax.axhline(report.means[metric], color="#c44e52", linewidth=1.0,
                   label=f"mean {report.means[metric]:.4f}")
        ax.set_xlabel("topic")
        ax.set_ylabel(metric)
        ax.set_ylim(0.0, 1.05)
        ax.set_title(f"{report.tag}: {metric}")
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        path = out_dir / f"{metric.replace('@', '_at_')}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    names = list(report.means)
    ax.bar(names, [report.means[m] for m in names], color="#4878a8")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("mean value")
    ax.set_title(f"{report.tag}: metric means")
    fig.tight_layout()
    path = out_dir / "means.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
