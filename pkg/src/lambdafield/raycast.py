"""Exact grid traversal for lidar beams and error-disk rasterization."""

from __future__ import annotations

import math

import numpy as np

from .geometry import GridGeometry


def trace_beam(geometry: GridGeometry, origin: tuple[float, float],
               endpoint: tuple[float, float]) -> list[tuple[int, float]]:
    """Cells crossed by the segment origin->endpoint, with per-cell chord lengths.

    Incremental line-through-grid walk (one boundary crossing per step).
    The origin must be inside the grid; the endpoint is clipped to the grid
    boundary. Returns (flat cell index, chord length) ordered from the origin
    outward; chords sum to the clipped segment length.
    """
    ox, oy = origin
    ex, ey = endpoint
    if not geometry.contains(ox, oy):
        raise ValueError(f"beam origin ({ox}, {oy}) outside grid")
    dx = ex - ox
    dy = ey - oy
    seg_len = math.hypot(dx, dy)
    if seg_len == 0.0:
        return []

    # clip the parameter range [0, t_end] to the grid box
    t_end = 1.0
    if dx > 0:
        t_end = min(t_end, (geometry.origin_x + geometry.width - ox) / dx)
    elif dx < 0:
        t_end = min(t_end, (geometry.origin_x - ox) / dx)
    if dy > 0:
        t_end = min(t_end, (geometry.origin_y + geometry.height - oy) / dy)
    elif dy < 0:
        t_end = min(t_end, (geometry.origin_y - oy) / dy)
    if t_end <= 0.0:
        return []

    col, row = geometry.cell_of(ox, oy)
    res = geometry.resolution

    step_col = 1 if dx > 0 else -1
    step_row = 1 if dy > 0 else -1
    t_delta_x = res / abs(dx) if dx != 0 else math.inf
    t_delta_y = res / abs(dy) if dy != 0 else math.inf

    if dx > 0:
        t_max_x = (geometry.origin_x + (col + 1) * res - ox) / dx
    elif dx < 0:
        t_max_x = (geometry.origin_x + col * res - ox) / dx
    else:
        t_max_x = math.inf
    if dy > 0:
        t_max_y = (geometry.origin_y + (row + 1) * res - oy) / dy
    elif dy < 0:
        t_max_y = (geometry.origin_y + row * res - oy) / dy
    else:
        t_max_y = math.inf

    out: list[tuple[int, float]] = []
    t_prev = 0.0
    while True:
        t_next = min(t_max_x, t_max_y, t_end)
        chord = (t_next - t_prev) * seg_len
        if chord > 1e-12 * seg_len:  # drop degenerate slivers at boundaries
            out.append((row * geometry.n_cols + col, chord))
        if t_next >= t_end:
            break
        if t_max_x <= t_max_y:
            col += step_col
            t_max_x += t_delta_x
        else:
            row += step_row
            t_max_y += t_delta_y
        if not (0 <= col < geometry.n_cols and 0 <= row < geometry.n_rows):
            break
        t_prev = t_next
    return out


def error_region_cells(geometry: GridGeometry, center: tuple[float, float],
                       radius: float) -> np.ndarray:
    """Flat indices of cells whose center lies within the disk around a return.

    Cells outside the grid are dropped; the result may be empty.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    cx, cy = center
    res = geometry.resolution
    col_lo = int(math.floor((cx - radius - geometry.origin_x) / res))
    col_hi = int(math.floor((cx + radius - geometry.origin_x) / res))
    row_lo = int(math.floor((cy - radius - geometry.origin_y) / res))
    row_hi = int(math.floor((cy + radius - geometry.origin_y) / res))
    col_lo = max(col_lo, 0)
    row_lo = max(row_lo, 0)
    col_hi = min(col_hi, geometry.n_cols - 1)
    row_hi = min(row_hi, geometry.n_rows - 1)
    if col_lo > col_hi or row_lo > row_hi:
        return np.empty(0, dtype=np.int64)
    cols, rows = np.meshgrid(np.arange(col_lo, col_hi + 1),
                             np.arange(row_lo, row_hi + 1))
    centers_x = geometry.origin_x + (cols + 0.5) * res
    centers_y = geometry.origin_y + (rows + 0.5) * res
    inside = (centers_x - cx) ** 2 + (centers_y - cy) ** 2 <= radius * radius
    return (rows[inside] * geometry.n_cols + cols[inside]).astype(np.int64)
