"""Utility functions for fdehydro."""

import logging
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .exceptions import InvalidCheckpointError

LOG = logging.getLogger(__name__)


def validate_checkpoints(
    checkpoints: Sequence[float], t_start: float, t_end: float
) -> np.ndarray:
    """Validate a checkpoint list.

    Args:
        checkpoints (Sequence[float]): requested checkpoint times
        t_start (float): start of the interval
        t_end (float): end of the interval

    Raises:
        InvalidCheckpointError: if checkpoints are not strictly increasing or
            fall outside [t_start, t_end]

    Returns:
        np.ndarray: the checkpoints as a float array
    """
    times = np.asarray(checkpoints, dtype=np.float64)
    if times.ndim != 1:
        raise InvalidCheckpointError("checkpoints must be a flat list of times")
    if times.size and not np.all(np.isfinite(times)):
        raise InvalidCheckpointError("checkpoints must be finite")
    if times.size > 1 and np.any(np.diff(times) <= 0.0):
        raise InvalidCheckpointError("checkpoints must be strictly increasing")
    if times.size and (times[0] < t_start or times[-1] > t_end):
        raise InvalidCheckpointError(
            f"checkpoints must lie in [{t_start}, {t_end}], "
            f"got [{times[0]}, {times[-1]}]"
        )
    return times


def torus_distances(n: int) -> np.ndarray:
    """Return the matrix of nearest-path distances between sites of a torus.

    Args:
        n (int): torus size

    Returns:
        np.ndarray: n x n integer matrix of min(|y-x|, n-|y-x|)
    """
    sites = np.arange(n)
    diff = np.abs(sites[:, None] - sites[None, :])
    return np.minimum(diff, n - diff)


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    """Write a table as CSV with a stable float representation.

    Args:
        frame (pd.DataFrame): the table
        path (Path): target file

    Returns:
        Path: the written path
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    LOG.debug("wrote %d rows to %s", len(frame), path)
    return path


def read_table(path: Path) -> pd.DataFrame:
    """Read a CSV table written by write_table."""
    return pd.read_csv(path)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def dumps_json(record: dict[str, Any]) -> str:
    """Serialize a record with sorted keys."""
    return json.dumps(record, indent=2, sort_keys=True, default=_json_default)


def write_json(record: dict[str, Any], path: Path) -> Path:
    """Write a JSON record with sorted keys.

    Args:
        record (dict[str, Any]): the record
        path (Path): target file

    Returns:
        Path: the written path
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(record) + "\n", encoding="utf-8")
    return path
