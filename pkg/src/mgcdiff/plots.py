"""SVG figures rendered from the experiment CSV files."""
import csv
from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_example2(csv_path, out_dir):
    """Worst-case error against l and eps, and the bound margin, as three SVG files."""
    plt = _pyplot()
    plt.rcParams["svg.hashsalt"] = "mgcdiff"
    rows = _read(csv_path)
    eps = sorted({float(r["epsilon"]) for r in rows})
    ls = sorted({int(r["l"]) for r in rows})
    wc = {(float(r["epsilon"]), int(r["l"])): float(r["delta_wc"]) for r in rows}
    eta = {(float(r["epsilon"]), int(r["l"])): float(r["eta"]) for r in rows}
    out = Path(out_dir)
    written = []

    fig, ax = plt.subplots()
    for e in eps:
        ax.semilogy(ls, [max(wc[e, l], 1e-300) for l in ls], marker="o", label=f"eps={e:g}")
    ax.set_xlabel("l")
    ax.set_ylabel("worst-case delta")
    ax.legend(fontsize="x-small")
    written.append(out / "example2_delta_vs_l.svg")
    fig.savefig(written[-1], metadata={"Date": None})
    plt.close(fig)

    fig, ax = plt.subplots()
    for l in ls:
        ax.loglog(eps, [max(wc[e, l], 1e-300) for e in eps], marker="o", label=f"l={l}")
    ax.set_xlabel("eps")
    ax.set_ylabel("worst-case delta")
    ax.legend(fontsize="x-small", ncol=2)
    written.append(out / "example2_delta_vs_eps.svg")
    fig.savefig(written[-1], metadata={"Date": None})
    plt.close(fig)

    margin = np.array([[eta[e, l] - wc[e, l] for l in ls] for e in eps])
    fig, ax = plt.subplots()
    im = ax.imshow(np.log10(np.maximum(margin, 1e-300)), origin="lower", aspect="auto",
                   extent=(ls[0] - 0.5, ls[-1] + 0.5, -0.5, len(eps) - 0.5))
    ax.set_yticks(range(len(eps)), [f"{e:g}" for e in eps])
    ax.set_xlabel("l")
    ax.set_ylabel("eps")
    fig.colorbar(im, label="log10(eta - worst-case delta)")
    written.append(out / "example2_margin.svg")
    fig.savefig(written[-1], metadata={"Date": None})
    plt.close(fig)
    return written


def plot_example1(out_dir):
    """Contour plots of the analytic, closed-form and error surfaces."""
    plt = _pyplot()
    plt.rcParams["svg.hashsalt"] = "mgcdiff"
    out = Path(out_dir)
    written = []
    for name in ("analytic", "closed_form", "error"):
        data = np.loadtxt(out / f"example1_{name}.csv", delimiter=",", skiprows=1)
        n = int(round(np.sqrt(len(data))))
        grid = data[:n, 1]
        vals = data[:, 2].reshape(n, n)
        fig, ax = plt.subplots()
        cs = ax.contourf(grid, grid, vals.T, levels=20)
        fig.colorbar(cs)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_aspect("equal")
        written.append(out / f"example1_{name}.svg")
        fig.savefig(written[-1], metadata={"Date": None})
        plt.close(fig)
    return written
