"""Static SVG renderings of the CSV bundles. Needs the ``plot`` extra."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .trajectory import COLUMNS


def _load(path: Path) -> tuple[list[str], np.ndarray]:
    lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:] if "=" not in ln]
    data = np.array([[float(c) if c else np.nan for c in r] for r in rows]).reshape(-1, len(header))
    return header, data


def _heatmap(ax, data):
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    grid = np.full((len(ys), len(xs)), np.nan)
    for x, y, val in data:
        grid[np.searchsorted(ys, y), np.searchsorted(xs, x)] = val
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
    ax.figure.colorbar(mesh, ax=ax)


def render(figure: str, files: dict[str, Path], out: Path) -> dict[str, Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rendered = {}
    if figure == "fig1":
        fig, ax = plt.subplots()
        for key, style in (("engine", "-"), ("meanfield", "--")):
            _, data = _load(files[key])
            for c, name in enumerate(COLUMNS, start=1):
                ax.plot(data[:, 0], data[:, c], style, label=f"{name} ({key})")
        ax.set_xlabel("t")
        ax.legend(fontsize="x-small", ncol=2)
        groups = {"fig1": fig}
    elif figure == "fig4":
        fig, ax = plt.subplots()
        for key, path in files.items():
            header, data = _load(path)
            if header == ["x", "y", "value"]:
                ax.plot(data[:, 0], data[:, 2], marker="o", label=key.removeprefix("fig4_"))
            else:
                ax.axvline(data[0, 0], color="gray", ls="--")
        ax.set_xlabel("tau")
        ax.set_ylabel("eradication probability")
        ax.legend()
        groups = {"fig4": fig}
    else:
        groups = {}
        for key, path in files.items():
            fig, ax = plt.subplots()
            _heatmap(ax, _load(path)[1])
            ax.set_title(key)
            groups[key] = fig
    for key, fig in groups.items():
        path = out / f"{key}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        rendered[f"{key}_svg"] = path
    return rendered
