"""Tab-delimited table IO with the conventions of the original R tooling:
no quoting, header as the first row, "NA" for missing values."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Sequence

from .errors import WriteError

NA = "NA"


def _cell(value) -> str:
    if value is None:
        return NA
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    return str(value)


def format_table(rows: Iterable[Sequence], header: Sequence[str] | None = None) -> str:
    lines = []
    if header is not None:
        lines.append("\t".join(header))
    lines.extend("\t".join(_cell(v) for v in row) for row in rows)
    return "".join(line + "\n" for line in lines)


def write_table(path: str | os.PathLike, rows: Iterable[Sequence], header: Sequence[str] | None = None) -> Path:
    path = Path(path)
    text = format_table(rows, header)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc
    return path


def read_table(path: str | os.PathLike) -> list[list[str]]:
    """Read a tab-delimited file into rows of strings. Blank lines are dropped."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = (line.rstrip("\r") for line in text.split("\n"))
    return [line.split("\t") for line in lines if line.strip()]
