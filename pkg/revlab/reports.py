"""
Report writers: JSON results, CSV traces and optional Excel workbooks.

Files are written only once a command has finished computing, through a
temporary file in the target directory followed by os.replace, so a crash
never leaves a partial report behind.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

from revlab.config import SCHEMA_VERSION

logger = logging.getLogger(__name__)

EXCEL_MAX_WIDTH = 50


def _plain(obj):
    """JSON encoder hook for numpy scalars and arrays."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(payload: dict) -> str:
    """Canonical JSON text: sorted keys, schema_version stamped."""
    body = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(body, indent=2, ensure_ascii=False, sort_keys=True, default=_plain) + "\n"


def _atomic_write(path: Path, write) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_json(payload: dict, path: Path | str) -> Path:
    path = Path(path)
    text = dumps(payload)
    _atomic_write(path, lambda tmp: tmp.write_text(text, encoding="utf-8"))
    logger.info("wrote %s", path)
    return path


def write_csv(df: pd.DataFrame, path: Path | str) -> Path:
    path = Path(path)
    _atomic_write(path, lambda tmp: df.to_csv(tmp, index=False))
    logger.info("wrote %s (%d rows)", path, len(df))
    return path


def export_to_excel(sheets: dict[str, pd.DataFrame], path: Path | str) -> Path:
    """
    Write one sheet per DataFrame with wrapped header cells and column widths
    fitted to the content (capped at EXCEL_MAX_WIDTH characters).
    """
    from openpyxl.styles import Alignment
    from openpyxl.utils import get_column_letter

    path = Path(path)

    def write(tmp: Path) -> None:
        with pd.ExcelWriter(tmp, engine="openpyxl") as writer:
            for name, df in sheets.items():
                df.to_excel(writer, index=False, sheet_name=name[:31])
                ws = writer.sheets[name[:31]]
                for idx, col in enumerate(df.columns, start=1):
                    longest = max(df[col].astype(str).map(len).max() if len(df) else 0, len(str(col)))
                    ws.column_dimensions[get_column_letter(idx)].width = min(longest + 2, EXCEL_MAX_WIDTH)
                for cell in ws[1]:
                    cell.alignment = Alignment(wrap_text=True, vertical="top")

    _atomic_write(path, write)
    logger.info("wrote %s (%d sheets)", path, len(sheets))
    return path
