"""Log-log plot of the plotdata files written by ``curvnet converge`` / ``curvnet umbilic``.

    curvnet converge --config configs/torus.cfg --out torus
    python demos/plot_convergence.py torus/plotdata_*.txt -o torus.png

Needs matplotlib, which the package itself does not depend on.
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("files", nargs="+")
    ap.add_argument("-o", "--output", default="convergence.png")
    args = ap.parse_args()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for path in args.files:
        with open(path) as fh:
            label = fh.readline().lstrip("# ").split()[-1]
        data = np.loadtxt(path, ndmin=2)
        if len(data):
            ax.loglog(data[:, 0], data[:, 1], "o-", label=label)
    eps = np.array(ax.get_xlim())
    y0 = ax.get_ylim()[0]
    for p, style in ((1, "k--"), (2, "k:")):
        ax.loglog(eps, y0 * 4 * (eps / eps[0]) ** p, style, lw=0.8, label=f"slope {p}")
    ax.set_xlabel("eps_max")
    ax.set_ylabel("error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
