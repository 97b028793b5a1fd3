"""
Deterministic file outputs: map CSVs, JSON reports, contour CSVs and PGM heatmaps.

Every file is written to a temporary sibling first and moved into place with
os.replace, so readers never see a half-written artifact.
"""

import io
import logging
import os
import tempfile
import warnings
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import orjson
import pandas as pd
from PIL import Image

from analysis.contours import ContourSet
from core.errors import DegenerateRange, OutputError
from simulation.absorption import AbsorptionMap

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CSV_FLOAT_FORMAT = "%.17g"
JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
MID_GRAY = 128
FILE_MODE = 0o644


def _umask() -> int:
    # os.umask can only be read by setting it
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write(path: PathLike, data: bytes) -> Path:
    """Write bytes to path via a temp file in the same directory."""
    path = Path(path)
    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path.parent, prefix=f".{path.name}.", delete=False) as tmp:
            tmp_name = tmp.name
            tmp.write(data)
        os.chmod(tmp_name, FILE_MODE & ~_umask())
        os.replace(tmp_name, path)
    except OSError as e:
        if tmp_name and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(str(path), e.strerror or str(e)) from e
    logger.debug("wrote %s (%d bytes)", path, len(data))
    return path


# ============= CSV =============

def map_frame(amap: AbsorptionMap) -> pd.DataFrame:
    """One row per node, x-major then y."""
    xs, ys = amap.axes()
    nx, ny = amap.values.shape
    return pd.DataFrame({
        "x": np.repeat(xs, ny),
        "y": np.tile(ys, nx),
        "chi_im": amap.values.ravel(),
    })


def write_map_csv(amap: AbsorptionMap, path: PathLike) -> Path:
    """Header "x,y,chi_im", 17 significant digits, "\\n" line endings."""
    text = map_frame(amap).to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return atomic_write(path, text.encode("utf-8"))


def read_map_csv(path: PathLike) -> pd.DataFrame:
    """Read a map CSV back with exact float round-trip."""
    return pd.read_csv(path, float_precision="round_trip")


def write_contours_csv(contours: Sequence[ContourSet], path: PathLike) -> Path:
    """Columns level, polyline, vertex, x, y, closed; polylines numbered per level."""
    rows: List[Dict[str, Any]] = []
    for contour_set in contours:
        for k, (line, closed) in enumerate(zip(contour_set.polylines, contour_set.closed)):
            for v, (x, y) in enumerate(line):
                rows.append({
                    "level": contour_set.level,
                    "polyline": k,
                    "vertex": v,
                    "x": x,
                    "y": y,
                    "closed": int(closed),
                })
    frame = pd.DataFrame(rows, columns=["level", "polyline", "vertex", "x", "y", "closed"])
    text = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return atomic_write(path, text.encode("utf-8"))


# ============= JSON =============

def dumps_json(data: Any) -> bytes:
    """Stable-key, indented JSON with a trailing newline; NaN and inf become null."""
    return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"


def write_json(data: Any, path: PathLike) -> Path:
    return atomic_write(path, dumps_json(data))


# ============= HEATMAP =============

def heatmap_raster(amap: AbsorptionMap) -> np.ndarray:
    """
    8-bit grayscale raster, shape (ny, nx): row r is y index r, column c is x index c.
    [min, max] maps linearly onto [0, 255]; a constant map becomes uniform mid-gray.
    """
    values = amap.values
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        warnings.warn(
            f"map range is degenerate (min = max = {lo:.6g}); rendering uniform gray",
            DegenerateRange,
            stacklevel=2,
        )
        scaled = np.full(values.shape, MID_GRAY, dtype=np.uint8)
    else:
        scaled = np.rint((values - lo) / (hi - lo) * 255.0).astype(np.uint8)
    return np.ascontiguousarray(scaled.T)


def render_heatmap(amap: AbsorptionMap, path: PathLike) -> Path:
    """Binary PGM (P5), one pixel per node."""
    image = Image.fromarray(heatmap_raster(amap))
    buffer = io.BytesIO()
    image.save(buffer, format="PPM")
    return atomic_write(path, buffer.getvalue())
