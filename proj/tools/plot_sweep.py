"""Plot the two tables written by `kernelnet sweep-phi --out <stem>.csv`.

usage: python tools/plot_sweep.py <stem> [out.png]
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load(path):
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    names = lines[0].strip().split(",")
    data = np.genfromtxt(lines[1:], delimiter=",")
    return {n: data[:, i] for i, n in enumerate(names)}


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__.strip())
    stem = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else stem + ".png"
    left = load(stem + "_clustering.csv")
    right = load(stem + "_separation.csv")

    fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4.2))
    a.plot(left["phi"], left["C_over_p"])
    a.set_xlabel(r"$\Phi$")
    a.set_ylabel(r"$\langle C\rangle / p$")
    a.set_xlim(0, np.pi)
    for name in right:
        if name.startswith("P_tilde_k"):
            b.plot(right["phi"], right[name], label="k = " + name[len("P_tilde_k"):])
    b.set_xlabel(r"$\Phi$")
    b.set_ylabel(r"$P(k,\pi) / (\pi N^k)$")
    b.set_xlim(0, np.pi)
    b.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print("wrote", out)


if __name__ == "__main__":
    main()
