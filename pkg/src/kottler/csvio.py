"""Plain CSV tables with 17-significant-digit floats and atomic writes."""

from __future__ import annotations

import csv
import io
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError

__all__ = ["format_float", "render_table", "atomic_write_text", "write_table", "read_table"]


def format_float(x: float) -> str:
    """Shortest form that still carries 17 significant digits."""
    return f"{float(x):.17g}"


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    return format_float(value)


def render_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Render a header plus rows with ``,`` separators and LF line endings."""
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename.

    ``"-"`` writes to standard output instead.
    """
    if str(path) == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_table(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_text(path, render_table(header, rows))


def read_table(source, header: Sequence[str]) -> list[list[float]]:
    """Parse a numeric CSV whose first line must equal ``header``.

    Parameters
    ----------
    source : path or text stream

    Raises
    ------
    InputError
        On a header mismatch, a wrong field count or a non-numeric cell. The
        error carries the 1-based line number.
    OSError
        If the file cannot be opened.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    rows: list[list[float]] = []
    expected = [h.strip() for h in header]
    seen_header = False
    for lineno, record in enumerate(reader, start=1):
        if not record or all(not c.strip() for c in record):
            continue
        if not seen_header:
            if [c.strip() for c in record] != expected:
                raise InputError(f"expected header {','.join(expected)!r}, got {','.join(record)!r}", lineno)
            seen_header = True
            continue
        if len(record) != len(expected):
            raise InputError(f"expected {len(expected)} fields, got {len(record)}", lineno)
        try:
            rows.append([float(c) for c in record])
        except ValueError as exc:
            raise InputError(f"non-numeric field ({exc})", lineno) from None
    if not seen_header:
        raise InputError("empty file, missing header", 1)
    return rows
