"""Run-length encoding of binary mask slices for the wire format."""

from __future__ import annotations

import numpy as np


def encode_rows(binary: np.ndarray) -> list[list[int]]:
    """Per-row alternating run lengths starting with the zero value.

    Decoding runs left to right flipping 0/1 after each run reproduces the
    row exactly; a leading 0 marks rows that start with foreground.
    """
    rows: list[list[int]] = []
    for row in np.asarray(binary, dtype=np.uint8):
        width = row.shape[0]
        edges = np.flatnonzero(row[1:] != row[:-1]) + 1
        bounds = np.concatenate(([0], edges, [width]))
        runs = np.diff(bounds).tolist()
        if row[0] == 1:
            runs = [0] + runs
        rows.append([int(r) for r in runs])
    return rows
