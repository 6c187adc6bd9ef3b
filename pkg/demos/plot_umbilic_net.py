"""Draw an umbilic net in the parameter plane (family 1 red, family 2 blue).

    python demos/plot_umbilic_net.py star 8 -o star8.png

Needs matplotlib, which the package itself does not depend on.
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from curvnet.netgen import PATTERNS, umbilic_net, umbilic_patch  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("pattern", choices=sorted(PATTERNS))
    ap.add_argument("rings", type=int)
    ap.add_argument("-o", "--output", default=None)
    args = ap.parse_args()
    patch = umbilic_patch(args.pattern)
    net = umbilic_net(patch, args.pattern, args.rings)
    fig, ax = plt.subplots(figsize=(7, 7))
    for e in range(net.n_edges):
        p = net.edge_polyline(e)
        ax.plot(p[:, 0], p[:, 1], "r-" if net.family[e] == 1 else "b-", lw=0.6)
    ax.plot(net.uv[:, 0], net.uv[:, 1], "k.", ms=2)
    ax.plot([0], [0], "ko", ms=6)
    ax.set_aspect("equal")
    ax.set_title(f"{args.pattern}, rings = {args.rings}, umbilic valence {net.meta['umbilic_valence']}")
    out = args.output or f"{args.pattern}{args.rings}.png"
    fig.savefig(out, dpi=100)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
