"""
Plot columns of any qdarwin CSV (developer tool).

    python scripts/plot_output.py out/fig3_gaussian.csv --x t --y r_qcb r_quadratic --logy
    python scripts/plot_output.py out/mesh_c.csv --mesh
"""
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))  # Root

import click
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from utils.output_table import read_table


def plot_lines(df, x, ys, logy):
    fig, ax = plt.subplots(figsize=(8, 5))
    for y in ys:
        ax.plot(df[x], df[y], label=y)
    ax.set_xlabel(x)
    if logy:
        ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def plot_mesh(df):
    """xi as radius along each initial Bloch direction: the torus-like surfaces of the mesh command."""
    thetas = np.unique(df["theta"])
    phis = np.unique(df["phi"])
    xi = df.pivot(index="theta", columns="phi", values="xi").loc[thetas, phis].to_numpy()
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    x = xi * np.sin(th) * np.cos(ph)
    y = xi * np.sin(th) * np.sin(ph)
    z = xi * np.cos(th)
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(x, y, z, cmap="viridis", linewidth=0, antialiased=True)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    return fig


@click.command()
@click.argument("csv_path")
@click.option("--x", default="t", show_default=True)
@click.option("--y", "ys", multiple=True)
@click.option("--logy", is_flag=True)
@click.option("--mesh", is_flag=True, help="Treat the file as bloch-mesh output.")
@click.option("--out", default=None, help="Image path (default: CSV path with .png).")
def main(csv_path, x, ys, logy, mesh, out):
    df = read_table(csv_path)
    if mesh:
        fig = plot_mesh(df)
    else:
        ys = ys or [c for c in df.columns if c != x and np.issubdtype(df[c].dtype, np.number)]
        fig = plot_lines(df, x, ys, logy)
    target = out or str(Path(csv_path).with_suffix(".png"))
    fig.savefig(target, dpi=150, bbox_inches="tight")
    print(f"📈 Saved {target}")


if __name__ == "__main__":
    main()
