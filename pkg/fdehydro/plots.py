"""SVG line plots of experiment tables."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .exceptions import PlotIoError  # noqa: E402
from .util import read_table  # noqa: E402

if TYPE_CHECKING:
    from .experiments import ResultBundle

LOG = logging.getLogger(__name__)

# fixed salt and no date keep the SVG bytes reproducible
SVG_HASH_SALT = "fdehydro"


@dataclass(slots=True, frozen=True)
class PlotSpec:
    """One SVG drawn from one table of a bundle.

    Every column in `columns` becomes a line against `x`.  With `group`, one
    line is drawn per value of that column instead.  `scatter_table` adds a
    point cloud of `scatter_column` against `x` from a second table.
    """

    name: str
    table: str
    x: str
    columns: tuple[str, ...]
    group: str | None = None
    logx: bool = False
    logy: bool = False
    title: str = ""
    scatter_table: str | None = None
    scatter_column: str | None = None

    @property
    def filename(self) -> str:
        """Return the SVG file name."""
        return f"{self.name}.svg"


def _read(bundle: "ResultBundle", table: str) -> pd.DataFrame:
    path = bundle.tables.get(table)
    if path is None:
        raise PlotIoError(f"bundle has no table named {table}")
    try:
        return read_table(path)
    except (OSError, pd.errors.EmptyDataError) as ex:
        raise PlotIoError(f"cannot read {path}: {ex}") from ex


def _draw(spec: PlotSpec, bundle: "ResultBundle", path: Path) -> None:
    frame = _read(bundle, spec.table)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if spec.scatter_table is not None and spec.scatter_column is not None:
            cloud = _read(bundle, spec.scatter_table)
            ax.scatter(
                cloud[spec.x], cloud[spec.scatter_column], s=6, alpha=0.3, color="grey"
            )
        for column in spec.columns:
            if spec.group is None:
                ax.plot(frame[spec.x], frame[column], marker="o", label=column)
                continue
            for key, part in frame.groupby(spec.group, sort=True):
                ax.plot(
                    part[spec.x], part[column], marker="o", label=f"{spec.group}={key}"
                )
        if spec.logx:
            ax.set_xscale("log")
        if spec.logy:
            ax.set_yscale("log")
        ax.set_xlabel(spec.x)
        ax.set_title(spec.title or spec.name)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    except KeyError as ex:
        raise PlotIoError(f"{spec.name}: missing column {ex}") from ex
    except OSError as ex:
        raise PlotIoError(f"cannot write {path}: {ex}") from ex
    finally:
        plt.close(fig)


def emit_plots(bundle: "ResultBundle") -> list[Path]:
    """Render every plot of a bundle as SVG next to its tables.

    Raises:
        PlotIoError: if a table is missing or a plot cannot be written

    Returns:
        list[Path]: the written files
    """
    matplotlib.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    paths = []
    for spec in bundle.plots:
        path = bundle.output_dir / spec.filename
        _draw(spec, bundle, path)
        LOG.debug("wrote plot %s", path)
        paths.append(path)
    return paths
