#!/usr/bin/env python3
"""Plot CSVs written by the blockfade CLI.

    python3 scripts/plot_curves.py fig5.csv -o fig5.png

Outage/FER curves are drawn on a log axis against Eb/N0, mutual information
sweeps against SNR, exponent tables against R/M.
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def group_key(row):
    for cols in (("scheme", "labeling"), ("model",), ("scheme",)):
        if all(c in row for c in cols):
            return "/".join(row[c] for c in cols)
    return "curve"


def plot(rows, ax):
    header = rows[0].keys()
    if "r_over_m_value" in header:
        x = [float(r["r_over_m_value"]) for r in rows]
        for col in ("upper_bound", "lower_bound", "optimal"):
            ax.step(x, [float(r[col]) for r in rows], where="post", label=col)
        ax.set_xlabel("R/M")
        ax.set_ylabel("exponent")
        return
    groups = defaultdict(list)
    for r in rows:
        groups[group_key(r)].append(r)
    if "value_bits" in header:
        for name, rs in groups.items():
            ax.plot([float(r["snr_db"]) for r in rs], [float(r["value_bits"]) for r in rs], label=name)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("bits / channel use")
        return
    ycol = "p_out" if "p_out" in header else "fer"
    for name, rs in groups.items():
        pts = [(float(r["ebn0_db"]), float(r[ycol])) for r in rs if float(r[ycol]) > 0]
        if pts:
            ax.semilogy(*zip(*pts), marker="o", label=name)
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel(ycol)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("csv")
    p.add_argument("-o", "--output", default=None)
    args = p.parse_args()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    plot(load(args.csv), ax)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output or args.csv.rsplit(".", 1)[0] + ".png", dpi=150)


if __name__ == "__main__":
    main()
