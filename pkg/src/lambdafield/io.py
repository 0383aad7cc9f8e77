"""Serialization: grid dumps, CSV exports, PGM renders, scan logs, path files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .bayes import BayesGrid
from .field import LambdaGrid, SensorModel
from .geometry import GridGeometry
from .sensor import Beam, GroundTruthMap

LAMBDA_DUMP_MAGIC = "lambda-field-grid"
BAYES_DUMP_MAGIC = "bayes-grid"
DUMP_VERSION = 1


def save_lambda_grid(grid: LambdaGrid, path: str | Path) -> None:
    """Versioned textual dump: geometry, sensor model and (h, m) pairs
    in row-major order."""
    geo = grid.geometry
    s = grid.sensor
    lines = [
        f"{LAMBDA_DUMP_MAGIC} {DUMP_VERSION}",
        f"origin {geo.origin_x!r} {geo.origin_y!r}",
        f"resolution {geo.resolution!r}",
        f"size {geo.n_cols} {geo.n_rows}",
        f"lambda_max {grid.lambda_max!r}",
        f"sensor {s.p_hit!r} {s.p_miss!r} {s.error_area!r} {s.max_range!r}",
        "counts",
    ]
    lines += [f"{h} {m}" for h, m in zip(grid.hits, grid.misses)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_lambda_grid(path: str | Path) -> LambdaGrid:
    lines = Path(path).read_text().splitlines()
    magic, version = lines[0].rsplit(" ", 1)
    if magic != LAMBDA_DUMP_MAGIC or int(version) != DUMP_VERSION:
        raise ValueError(f"not a lambda grid dump: {path}")
    header = _parse_header(lines[1:6])
    geo = GridGeometry(*header["origin"], header["resolution"][0],
                       *[int(v) for v in header["size"]])
    ph, pm, e, rmax = header["sensor"]
    grid = LambdaGrid(geo, SensorModel(ph, pm, e, rmax),
                      lambda_max=header["lambda_max"][0])
    counts = np.loadtxt(lines[7:7 + geo.n_cells], dtype=np.int64).reshape(-1, 2)
    grid.hits = counts[:, 0].astype(np.uint32)
    grid.misses = counts[:, 1].astype(np.uint32)
    return grid


def save_bayes_grid(grid: BayesGrid, path: str | Path) -> None:
    geo = grid.geometry
    lines = [
        f"{BAYES_DUMP_MAGIC} {DUMP_VERSION}",
        f"origin {geo.origin_x!r} {geo.origin_y!r}",
        f"resolution {geo.resolution!r}",
        f"size {geo.n_cols} {geo.n_rows}",
        f"clamp {grid.log_odds_clamp!r}",
        f"updates {grid.l_occ!r} {grid.l_free!r}",
        "logodds",
    ]
    lines += [repr(float(v)) for v in grid.log_odds]
    Path(path).write_text("\n".join(lines) + "\n")


def load_bayes_grid(path: str | Path) -> BayesGrid:
    lines = Path(path).read_text().splitlines()
    magic, version = lines[0].rsplit(" ", 1)
    if magic != BAYES_DUMP_MAGIC or int(version) != DUMP_VERSION:
        raise ValueError(f"not a bayes grid dump: {path}")
    header = _parse_header(lines[1:6])
    geo = GridGeometry(*header["origin"], header["resolution"][0],
                       *[int(v) for v in header["size"]])
    grid = BayesGrid(geo, log_odds_clamp=header["clamp"][0])
    grid.l_occ, grid.l_free = header["updates"]
    grid.log_odds = np.array([float(v) for v in lines[7:7 + geo.n_cells]])
    return grid


def _parse_header(lines: list[str]) -> dict[str, list[float]]:
    out = {}
    for line in lines:
        key, *vals = line.split()
        out[key] = [float(v) for v in vals]
    return out


def export_lambda_csv(grid: LambdaGrid, path: str | Path) -> None:
    """col,row,h,m,lambda,lambda_low,lambda_high for every cell."""
    lam = grid.lambda_map()
    low, high = grid.bound_maps()
    geo = grid.geometry
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["col", "row", "h", "m", "lambda", "lambda_low",
                         "lambda_high"])
        for i in range(geo.n_cells):
            col, row = geo.unflat(i)
            writer.writerow([col, row, int(grid.hits[i]), int(grid.misses[i]),
                             repr(float(lam[i])), repr(float(low[i])),
                             repr(float(high[i]))])


def export_bayes_csv(grid: BayesGrid, path: str | Path) -> None:
    occ = grid.occupancy()
    geo = grid.geometry
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["col", "row", "log_odds", "p_occ"])
        for i in range(geo.n_cells):
            col, row = geo.unflat(i)
            writer.writerow([col, row, repr(float(grid.log_odds[i])),
                             repr(float(occ[i]))])


def export_lambda_pgm(grid: LambdaGrid, path: str | Path,
                      scale: float | None = None) -> None:
    """16-bit PGM of the intensity map; pixel = lambda * scale, clipped.

    The scale factor is declared in a comment header so renders are
    self-describing. Row 0 of the grid is the first raster row.
    """
    lam = grid.lambda_map()
    if scale is None:
        scale = 65535.0 / grid.lambda_max
    write_pgm(path, lam.reshape(grid.geometry.n_rows, grid.geometry.n_cols),
              scale, maxval=65535)


def export_bayes_pgm(grid: BayesGrid, path: str | Path) -> None:
    occ = grid.occupancy().reshape(grid.geometry.n_rows, grid.geometry.n_cols)
    write_pgm(path, occ, 65535.0, maxval=65535)


def write_pgm(path: str | Path, values: np.ndarray, scale: float,
              maxval: int) -> None:
    pixels = np.clip(np.round(values * scale), 0, maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n# scale {scale!r}\n{values.shape[1]} {values.shape[0]}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.astype(dtype).tobytes())


def read_pgm(path: str | Path) -> tuple[np.ndarray, float]:
    """Binary PGM reader; returns (raw pixel array, declared scale or 1.0)."""
    data = Path(path).read_bytes()
    pos = 0
    tokens: list[bytes] = []
    scale = 1.0
    while len(tokens) < 4:
        # tokenize header, honoring comment lines (which may carry the scale)
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            end = data.index(b"\n", pos)
            comment = data[pos + 1:end].split()
            if len(comment) == 2 and comment[0] == b"scale":
                scale = float(comment[1])
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"unsupported PGM magic {tokens[0]!r}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pos += 1  # single whitespace after maxval
    dtype = ">u2" if maxval > 255 else "u1"
    pixels = np.frombuffer(data, dtype=dtype, offset=pos,
                           count=width * height).reshape(height, width)
    return pixels.astype(np.float64), scale


def load_ground_truth(path: str | Path, geometry: GridGeometry | None = None,
                      origin: tuple[float, float] = (0.0, 0.0),
                      resolution: float = 0.1) -> GroundTruthMap:
    """Ground-truth intensities from 8-bit PGM (pixel * scale) or CSV
    (col,row,lambda)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        pixels, scale = read_pgm(path)
        if geometry is None:
            geometry = GridGeometry(origin[0], origin[1], resolution,
                                    pixels.shape[1], pixels.shape[0])
        return GroundTruthMap(geometry, pixels.reshape(-1) * scale)
    if geometry is None:
        raise ValueError("CSV ground truth needs an explicit geometry")
    values = np.zeros(geometry.n_cells)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["col", "row", "lambda"]:
            raise ValueError(f"unexpected ground-truth CSV header {header}")
        for col, row, lam in reader:
            values[geometry.flat(int(col), int(row))] = float(lam)
    return GroundTruthMap(geometry, values)


def save_scan_log(path: str | Path,
                  scans: list[tuple[float, tuple[float, float, float], list[Beam]]]
                  ) -> None:
    """CSV of (t, pose_x, pose_y, pose_theta, angle, range, hit), one row per beam."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "pose_x", "pose_y", "pose_theta", "angle",
                         "range", "hit"])
        for t, pose, beams in scans:
            for beam in beams:
                angle = math.atan2(beam.direction[1], beam.direction[0])
                writer.writerow([repr(t), repr(pose[0]), repr(pose[1]),
                                 repr(pose[2]), repr(angle),
                                 repr(beam.measured_range), int(beam.hit)])


def load_scan_log(path: str | Path
                  ) -> list[tuple[float, tuple[float, float, float], list[Beam]]]:
    scans: dict[tuple, list[Beam]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (float(row["t"]), (float(row["pose_x"]), float(row["pose_y"]),
                                     float(row["pose_theta"])))
            angle = float(row["angle"])
            beam = Beam((key[1][0], key[1][1]),
                        (math.cos(angle), math.sin(angle)),
                        float(row["range"]), bool(int(row["hit"])))
            scans.setdefault(key, []).append(beam)
    return [(t, pose, beams) for (t, pose), beams in scans.items()]


def save_risk_report(path: str | Path, crossing, risk_fn,
                     use_bound: str = "mle") -> None:
    """Per-cell CSV of (cell_index, cum_area, lambda, f, cdf, partial_risk)
    for plotting density/CDF curves along a crossing."""
    from .path import collision_pdf  # local import: io stays leaf-importable

    lam = crossing.lambdas(use_bound)
    cum = crossing.cumulative_areas()
    exponents = crossing.areas * lam
    survive = np.exp(-np.concatenate(([0.0], np.cumsum(exponents[:-1])))) \
        if len(crossing) else np.empty(0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_index", "cum_area", "lambda", "f", "cdf",
                         "partial_risk"])
        cdf = 0.0
        for i in range(len(crossing)):
            hit_here = -math.expm1(-exponents[i])
            partial = risk_fn(float(cum[i])) * survive[i] * hit_here
            cdf += survive[i] * hit_here
            writer.writerow([int(crossing.cells[i]), repr(float(cum[i])),
                             repr(float(lam[i])),
                             repr(collision_pdf(crossing, float(cum[i]),
                                                use_bound)),
                             repr(float(cdf)), repr(float(partial))])


def save_planner_log(path: str | Path, log) -> None:
    """CSV of (t, v, omega, risk_upper, n_admissible, stopped_flag) per step."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "v", "omega", "risk_upper", "n_admissible",
                         "stopped_flag"])
        for step in log:
            writer.writerow([repr(step.t), repr(step.v), repr(step.omega),
                             repr(step.risk_upper), step.n_admissible,
                             int(step.stopped)])


def load_path_csv(path: str | Path) -> np.ndarray:
    """(N, 3) array of poses from a CSV of x,y,theta rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:2]] != ["x", "y"]:
            raise ValueError(f"unexpected path CSV header {header}")
        rows = [[float(v) for v in row[:3]] + [0.0] * (3 - len(row[:3]))
                for row in reader if row]
    return np.asarray(rows, dtype=np.float64)


def save_path_csv(path: str | Path, poses: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "theta"])
        for pose in np.asarray(poses):
            writer.writerow([repr(float(v)) for v in pose[:3]])
