#!/usr/bin/env python3
"""Render figures from the CSV files written by `wtmpc run-open-loop` and
`wtmpc run-closed-loop`."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def violation_by_radius(results: pd.DataFrame, out: Path) -> None:
    open_loop = results[results.experiment == "open_loop"]
    if open_loop.empty:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for (mode, n), g in open_loop.groupby(["mode", "n"]):
        if mode == "robust":
            continue
        stats = g.groupby("epsilon").violation_frequency.agg(["mean", "std"]).reset_index()
        ax.errorbar(stats.epsilon, stats["mean"], yerr=stats["std"], marker="o", capsize=3,
                    label=f"{mode}, n={n}")
    ax.set_xscale("symlog", linthresh=1e-2)
    ax.set_xlabel("radius ε")
    ax.set_ylabel("open-loop violation frequency")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "open_loop_violation.png", dpi=150)
    plt.close(fig)


def tradeoff(tradeoff_df: pd.DataFrame, out: Path) -> None:
    if tradeoff_df.empty:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode, g in tradeoff_df.groupby("mode"):
        ax.scatter(g.mean_violation_frequency, g.mean_closed_loop_cost, label=mode)
        for _, r in g.iterrows():
            ax.annotate(f"ε={r.epsilon:g}, n={r.n}",
                        (r.mean_violation_frequency, r.mean_closed_loop_cost), fontsize=7)
    ax.set_xlabel("mean closed-loop violation frequency")
    ax.set_ylabel("mean closed-loop cost")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "closed_loop_tradeoff.png", dpi=150)
    plt.close(fig)


def sections(sections_df: pd.DataFrame, out: Path) -> None:
    if sections_df.empty:
        return
    for (eps, n), g in sections_df.groupby(["epsilon", "n"]):
        fig, ax = plt.subplots(figsize=(6, 4))
        for row, h in g.groupby("row"):
            ax.plot(h.k, h.support_gamma, marker="o", label=f"Γ_k, row {row}")
            ax.plot(h.k, h.support_robust, linestyle="--", color="gray")
        ax.set_xlabel("step k")
        ax.set_ylabel("support along constraint row")
        ax.set_title(f"ε={eps:g}, n={n} (dashed: X ⊖ E_k)")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(out / f"tube_sections_eps{eps:g}_n{n}.png", dpi=150)
        plt.close(fig)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", type=Path, help="output directory of a run")
    parser.add_argument("--out", type=Path, help="figure directory (default: the run directory)")
    args = parser.parse_args()
    out = args.out or args.directory
    out.mkdir(parents=True, exist_ok=True)

    def load(name: str) -> pd.DataFrame:
        path = args.directory / name
        return pd.read_csv(path) if path.exists() else pd.DataFrame()

    violation_by_radius(load("results.csv"), out)
    tradeoff(load("tradeoff.csv"), out)
    sections(load("tube_sections.csv"), out)


if __name__ == "__main__":
    main()
