"""ASCII image renders of perception grids.

Two styles: per-cell decision colors and a pignistic mean color.  The palette
is fixed: free space green, moving objects red, static classes (mapped and
unmapped infrastructure, stopped objects) blue, unknown black.  Images are
written as PPM P3 (color) / PGM P2 (grayscale), which are diffable text.
"""

from __future__ import annotations

from typing import TextIO

import numpy as np

from .fusion import DECISION_LABELS, decide_grid, pignistic_grid
from .grid import EvidentialGrid

# Row order: decision codes F, I, U, S, M, UNKNOWN.
DECISION_COLORS = np.array([
    (0, 255, 0),      # F: green
    (0, 0, 255),      # I: blue
    (0, 0, 255),      # U: blue
    (0, 0, 255),      # S: blue
    (255, 0, 0),      # M: red
    (0, 0, 0),        # UNKNOWN: black
], dtype=np.uint8)

# Per-class colors used for the pignistic mean (no unknown row: the mean is
# taken over the five classes weighted by their pignistic probability).
CLASS_COLORS = DECISION_COLORS[:5].astype(float)


def write_ppm(pixels: np.ndarray, out: TextIO) -> None:
    """Write an (rows, cols, 3) uint8 array as ASCII PPM (P3)."""
    rows, cols, _ = pixels.shape
    out.write(f"P3\n{cols} {rows}\n255\n")
    for r in range(rows):
        out.write(" ".join(str(int(v)) for v in pixels[r].ravel()) + "\n")


def write_pgm(values: np.ndarray, out: TextIO) -> None:
    """Write an (rows, cols) uint8 array as ASCII PGM (P2)."""
    rows, cols = values.shape
    out.write(f"P2\n{cols} {rows}\n255\n")
    for r in range(rows):
        out.write(" ".join(str(int(v)) for v in values[r]) + "\n")


def _to_image(cellwise: np.ndarray) -> np.ndarray:
    """Flip (i, j, ...) cell-indexed data into image rows, north up."""
    return cellwise.swapaxes(0, 1)[::-1]


def decision_image(pg: EvidentialGrid, unknown_threshold: float) -> np.ndarray:
    codes = decide_grid(pg, unknown_threshold)
    return _to_image(DECISION_COLORS[codes])


def pignistic_image(pg: EvidentialGrid) -> np.ndarray:
    bet = pignistic_grid(pg)
    rgb = np.clip(np.rint(bet @ CLASS_COLORS), 0, 255).astype(np.uint8)
    return _to_image(rgb)


class MovingTrace:
    """Persistent overlay of every cell ever decided as a moving object."""

    def __init__(self, width: int, height: int):
        self.mask = np.zeros((width, height), dtype=bool)

    def update(self, pg: EvidentialGrid, unknown_threshold: float) -> None:
        moving_code = DECISION_LABELS.index("M")
        self.mask |= decide_grid(pg, unknown_threshold) == moving_code

    def image(self) -> np.ndarray:
        rgb = np.zeros(self.mask.shape + (3,), dtype=np.uint8)
        rgb[self.mask] = (255, 0, 0)
        return _to_image(rgb)
