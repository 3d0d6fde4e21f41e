#!/usr/bin/env python3
"""Render the pump/atom-number maps produced by `srlaser sweep`.

Usage: plot_maps.py power_map.csv [linewidth_map.csv ...]

Each map is drawn on log-log axes with the collective-region boundary
(cells whose branch column flips to/from "collective") overlaid as a
dashed line. Failed cells (error_code != 0) are masked.
"""
import sys

import matplotlib.pyplot as plt
import numpy as np


def load(path):
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
    rows = np.genfromtxt(path, delimiter=",", names=True, comments="#",
                         dtype=None, encoding="utf-8")
    return meta, rows


def main(paths):
    fig, axes = plt.subplots(1, len(paths), figsize=(6 * len(paths), 5),
                             squeeze=False)
    for ax, path in zip(axes[0], paths):
        meta, rows = load(path)
        w = np.unique(rows["pump"])
        n = np.unique(rows["n_atoms"])
        value = np.full((n.size, w.size), np.nan)
        collective = np.zeros((n.size, w.size), dtype=bool)
        wi = {v: i for i, v in enumerate(w)}
        ni = {v: i for i, v in enumerate(n)}
        for r in rows:
            i, j = ni[r["n_atoms"]], wi[r["pump"]]
            if r["error_code"] == 0:
                value[i, j] = r["value"]
            collective[i, j] = r["branch"] == "collective"
        mesh = ax.pcolormesh(w, n, np.log10(np.abs(value) + 1e-300),
                             shading="nearest")
        ax.contour(w, n, collective.astype(float), levels=[0.5],
                   colors="white", linestyles="dashed")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("pump rate w (s$^{-1}$)")
        ax.set_ylabel("atom number N")
        ax.set_title(path)
        fig.colorbar(mesh, ax=ax, label="log10 value")
    fig.tight_layout()
    plt.show()


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    main(sys.argv[1:])
