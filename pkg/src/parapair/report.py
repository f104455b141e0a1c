"""Figure rendering for evaluation and corpus reports.

Every helper writes PNG files into a directory and returns the paths,
so CLI report runs leave plots next to the delimited output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import CorpusStats
from .evaluation import QuestionMetrics, RankingReport

__all__ = [
    "render_corpus_figures",
    "render_eval_figures",
    "render_shard_count_figure",
]


def render_eval_figures(
    out_dir: str | Path, report: RankingReport, rows: Sequence[QuestionMetrics]
) -> list[Path]:
    """Write a metric bar chart and a per-question AP histogram."""
    out_dir = Path(out_dir)
    paths = []

    fig, ax = plt.subplots(figsize=(5, 4))
    names = ["P@1", "MAP", "MRR"]
    values = [report.p_at_1, report.map, report.mrr]
    bars = ax.bar(names, values, color=["#4c72b0", "#55a868", "#c44e52"])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"Ranking metrics over {report.question_count} questions")
    ax.bar_label(bars, fmt="%.3f")
    fig.tight_layout()
    path = out_dir / "metrics.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.hist([row.average_precision for row in rows], bins=20, range=(0.0, 1.0), color="#4c72b0")
    ax.set_xlabel("average precision")
    ax.set_ylabel("questions")
    ax.set_title("Per-question average precision")
    fig.tight_layout()
    path = out_dir / "average_precision_hist.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)
    return paths


def render_corpus_figures(out_dir: str | Path, stats: CorpusStats) -> list[Path]:
    """Write a characters-by-source bar chart."""
    out_dir = Path(out_dir)
    fig, ax = plt.subplots(figsize=(6, 4))
    items = sorted(stats.chars_by_source.items())
    labels = [name for name, _ in items] or ["(none)"]
    values = [chars for _, chars in items] or [0]
    ax.bar(labels, values, color="#55a868")
    ax.set_ylabel("characters")
    ax.set_title(f"{stats.documents} documents, {stats.paragraphs} paragraphs")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    path = out_dir / "source_chars.png"
    fig.savefig(path)
    plt.close(fig)
    return [path]


def render_shard_count_figure(out_dir: str | Path, counts: dict) -> list[Path]:
    """Write a grouped bar chart of example counts by objective and hardness."""
    out_dir = Path(out_dir)
    by_objective = counts.get("by_objective", {})
    objectives = list(by_objective)
    hardnesses = ["positive", "hard", "easy"]
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.25
    for offset, hardness in enumerate(hardnesses):
        xs = [i + (offset - 1) * width for i in range(len(objectives))]
        ys = [by_objective[o].get(hardness, 0) for o in objectives]
        ax.bar(xs, ys, width=width, label=hardness)
    ax.set_xticks(range(len(objectives)))
    ax.set_xticklabels(objectives)
    ax.set_ylabel("examples")
    ax.set_title(f"{counts.get('total', 0)} examples")
    ax.legend()
    fig.tight_layout()
    path = out_dir / "example_counts.png"
    fig.savefig(path)
    plt.close(fig)
    return [path]
