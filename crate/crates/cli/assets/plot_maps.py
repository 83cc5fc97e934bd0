#!/usr/bin/env python3
"""Plot A(KER, delay) maps written by `h2asym model` or `h2asym analyze`.

Usage: python3 plot_maps.py [MAP.csv ...]   (default: every *map*/scan_* CSV here)
"""
import glob
import os
import sys

import matplotlib.pyplot as plt
import numpy as np


def load(path):
    data = np.genfromtxt(path, delimiter=",", skip_header=1, names=True)
    ker = np.unique(data["ker_ev"])
    delay = np.unique(data["delay_fs"])
    grid = np.full((ker.size, delay.size), np.nan)
    ki = np.searchsorted(ker, data["ker_ev"])
    di = np.searchsorted(delay, data["delay_fs"])
    grid[ki, di] = data["asymmetry"]
    return ker, delay, grid


def main(paths):
    if not paths:
        here = os.path.dirname(os.path.abspath(__file__))
        paths = sorted(glob.glob(os.path.join(here, "model_map_*.csv")))
        paths += sorted(glob.glob(os.path.join(here, "scan_*.csv")))
    for path in paths:
        ker, delay, grid = load(path)
        fig, ax = plt.subplots(figsize=(6, 4))
        lim = np.nanmax(np.abs(grid)) or 1.0
        mesh = ax.pcolormesh(delay, ker, grid, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="asymmetry")
        ax.set_xlabel("delay (fs)")
        ax.set_ylabel("KER (eV)")
        ax.set_title(os.path.basename(path))
        out = os.path.splitext(path)[0] + ".png"
        fig.tight_layout()
        fig.savefig(out, dpi=120)
        plt.close(fig)
        print(out)


if __name__ == "__main__":
    main(sys.argv[1:])
