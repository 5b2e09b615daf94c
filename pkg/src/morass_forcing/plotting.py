"""Figures for the ``report`` verb, rendered off-screen to PNG."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def plot_widths(rows: list[dict], path: str) -> None:
    """Level widths and family sizes into the top, log scale."""
    levels = [r["level"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(levels, [r["theta"] for r in rows], "o-", label="width")
    ax.plot(levels, [r["maps_to_top"] for r in rows], "s--", label="maps into top")
    ax.set_yscale("log", base=2)
    ax.set_xlabel("level")
    ax.set_xticks(levels)
    ax.legend()
    ax.set_title("Morass growth")
    _save(fig, path)


def plot_supports(hist: dict[str, dict[int, int]], path: str) -> None:
    """Side-by-side bars of support sizes, one group per fixture."""
    names = sorted(hist)
    sizes = sorted({k for h in hist.values() for k in h})
    width = 0.8 / max(len(names), 1)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for i, name in enumerate(names):
        xs = [s + (i - (len(names) - 1) / 2) * width for s in sizes]
        ax.bar(xs, [hist[name].get(s, 0) for s in sizes], width=width, label=name)
    ax.set_xticks(sizes)
    ax.set_xlabel("support size")
    ax.set_ylabel("top conditions")
    ax.legend()
    ax.set_title("Supports of the level decomposition")
    _save(fig, path)


def plot_members(rows: list[dict], path: str) -> None:
    """Members against all conditions for each color bound."""
    bounds = [r["colors"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(bounds, [r["conditions"] for r in rows], "o-", label="conditions")
    ax.plot(bounds, [r["members"] for r in rows], "s-", label="members")
    ax.plot(bounds, [r["antichain"] for r in rows], "^:", label="largest antichain")
    ax.set_yscale("log")
    ax.set_xticks(bounds)
    ax.set_xlabel("color bound")
    ax.legend()
    ax.set_title("Colored-pair universe")
    _save(fig, path)
