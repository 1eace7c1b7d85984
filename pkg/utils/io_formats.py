"""
I/O Formats Module
Plain-text artifact formats (curves, designs, material fields, node positions)
and atomic write-then-rename helpers for run directories
"""

import json
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

from config import APP_NAME, APP_VERSION, FLOAT_FORMAT
from core.design_rep import DesignVector, MaterialField, format_design, parse_design
from core.exceptions import ConfigError

PathLike = Union[str, Path]


def get_output_directory(base_dir: PathLike) -> Path:
    """
    Get or create a run output directory.

    Args:
        base_dir: Directory name or path

    Returns:
        Absolute path to the directory
    """
    out = Path(base_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)
    return out


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write text to a temporary file next to path, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: PathLike, data: Dict) -> Path:
    return atomic_write_text(path, json.dumps(data, indent=2, ensure_ascii=False) + "\n")


def write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    """CSV with 17 significant digits so logged values replay exactly."""
    return atomic_write_text(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


# ============================================================================
# CURVES
# ============================================================================

def format_curve(points: np.ndarray) -> str:
    """Two-column 'x y' listing (mm)."""
    return "".join(f"{x:.17g} {y:.17g}\n" for x, y in np.asarray(points, dtype=float))


def parse_curve(text: str, source: str = "curve") -> np.ndarray:
    """
    Parse a two-column point list; blank lines and '#' comments are skipped.

    Raises:
        ConfigError: On malformed lines or fewer than 3 points
    """
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(source, f"line {lineno}: expected 'x y'")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(source, f"line {lineno}: {exc}") from exc
    if len(points) < 3:
        raise ConfigError(source, f"at least 3 points required (got {len(points)})")
    return np.array(points, dtype=float)


def read_curve(path: PathLike, key: str = "target_curve.path") -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(key, f"file not found: {path}")
    return parse_curve(path.read_text(encoding="utf-8"), key)


def write_curve(path: PathLike, points: np.ndarray) -> Path:
    return atomic_write_text(path, format_curve(points))


# ============================================================================
# DESIGNS, FIELDS, POSITIONS
# ============================================================================

def write_design(path: PathLike, design: DesignVector) -> Path:
    return atomic_write_text(path, format_design(design))


def read_design(path: PathLike, key: str = "design") -> DesignVector:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(key, f"file not found: {path}")
    try:
        return parse_design(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


def format_material(material: MaterialField) -> str:
    """'element rho' per line."""
    return "".join(f"{e} {int(v)}\n" for e, v in enumerate(material.rho))


def format_positions(positions: np.ndarray, node_ids: Optional[Iterable[int]] = None) -> str:
    """'node x y' per line."""
    pts = np.asarray(positions, dtype=float)
    ids = range(len(pts)) if node_ids is None else node_ids
    return "".join(f"{i} {pts[i, 0]:.17g} {pts[i, 1]:.17g}\n" for i in ids)


def run_info(seed: int, **extra) -> Dict:
    """Version stamp written into every run directory."""
    info = {
        "app": APP_NAME,
        "version": APP_VERSION,
        "seed": int(seed),
        "created_at": datetime.now().isoformat(timespec="seconds"),
    }
    info.update(extra)
    return info
