#!/usr/bin/env python3
"""Plot a spectrum.csv emitted by `srlaser spectrum`.

Usage: plot_spectrum.py spectrum.csv
"""
import sys

import matplotlib.pyplot as plt
import numpy as np


def main(path):
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
    omega, s = np.loadtxt(path, delimiter=",", comments="#", skiprows=1,
                          unpack=True)
    plt.plot(omega, s)
    fwhm = meta.get("linewidth_fwhm", "?")
    plt.xlabel(r"$\omega - \omega_a$ (s$^{-1}$)")
    plt.ylabel("spectral density")
    plt.title(f"FWHM = {fwhm}")
    plt.show()


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
