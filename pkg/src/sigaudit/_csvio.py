"""Shared CSV reading/writing with `# key=value` metadata comment lines.

All toolkit artifacts are CSV files with unix line endings, optional
leading comment lines of the form ``# key=value``, then one header row.
Writers are byte-deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import os
from typing import Iterable, Sequence


def write_csv(
    path: str | os.PathLike,
    comments: Sequence[tuple[str, str]],
    header: Sequence[str],
    rows: Iterable[Sequence[str]],
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for key, value in comments:
            handle.write(f"# {key}={value}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path: str | os.PathLike) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Return (metadata, header, rows); metadata from leading `# k=v` lines."""
    meta: dict[str, str] = {}
    data_lines: list[str] = []
    with open(path, encoding="utf-8", newline="") as handle:
        for raw in handle:
            line = raw.rstrip("\n").rstrip("\r")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if line:
                data_lines.append(line)
    if not data_lines:
        raise ValueError(f"{os.fspath(path)}: no data rows")
    parsed = list(csv.reader(data_lines))
    return meta, parsed[0], parsed[1:]
