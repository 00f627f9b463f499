"""Track sources: CSV waypoint files and deterministic generated courses."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from poptrack.trajectory import Path

GENERATORS = ("straight", "oval", "figure-eight", "chicane")

# Parametric curves are sampled this finely before arc-length resampling.
_DENSE_STEP = 0.002


@dataclass(frozen=True)
class TrackSpec:
    """Either ``csv`` (a file of ``x,y`` rows) or ``generator`` plus its dimensions.

    Generator parameters (meters):

    * ``straight``: ``length``
    * ``oval``: ``straight_length``, ``radius``, optional ``chicane_amplitude``
      and ``chicane_wavelength`` for a sinusoidal chicane on the back straight
    * ``figure-eight``: ``radius`` of each lobe
    * ``chicane``: ``length``, ``amplitude``, ``wavelength``
    """

    generator: str | None = None
    csv: str | None = None
    params: dict[str, float] = field(default_factory=dict)
    spacing: float = 1.0
    laps: int = 1

    def __post_init__(self) -> None:
        if (self.generator is None) == (self.csv is None):
            raise ValueError("track needs exactly one of 'generator' or 'csv'")
        if self.generator is not None and self.generator not in GENERATORS:
            raise ValueError(f"unknown track generator {self.generator!r}; expected one of {GENERATORS}")
        if not self.spacing > 0:
            raise ValueError("track spacing must be positive")
        if self.laps < 1:
            raise ValueError("laps must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        if self.csv is not None:
            return {"csv": self.csv}
        return {"generator": self.generator, **self.params, "spacing": self.spacing, "laps": self.laps}


def _param(params: dict[str, float], name: str, default: float | None = None) -> float:
    if name not in params:
        if default is None:
            raise ValueError(f"track generator needs parameter {name!r}")
        return default
    return float(params[name])


def _positive(name: str, value: float) -> float:
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"track dimension {name!r} must be positive, got {value}")
    return value


def _arc(cx: float, cy: float, r: float, a0: float, sweep: float) -> np.ndarray:
    n = max(2, int(math.ceil(abs(sweep) * r / _DENSE_STEP)) + 1)
    a = a0 + sweep * np.linspace(0.0, 1.0, n)
    return np.column_stack([cx + r * np.cos(a), cy + r * np.sin(a)])


def _line(x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
    n = max(2, int(math.ceil(math.hypot(x1 - x0, y1 - y0) / _DENSE_STEP)) + 1)
    t = np.linspace(0.0, 1.0, n)
    return np.column_stack([x0 + (x1 - x0) * t, y0 + (y1 - y0) * t])


def _sine(x0: float, length: float, y0: float, amplitude: float, wavelength: float, direction: float) -> np.ndarray:
    # Full sine periods along x (direction +1 or -1), offset toward +y when amplitude > 0.
    n = max(2, int(math.ceil(length / _DENSE_STEP)) + 1)
    s = np.linspace(0.0, length, n)
    periods = max(1, round(length / wavelength))
    y = y0 + amplitude * np.sin(math.pi * periods * s / length) ** 2
    return np.column_stack([x0 + direction * s, y])


def _join(pieces: list[np.ndarray]) -> np.ndarray:
    out = [pieces[0]]
    for piece in pieces[1:]:
        out.append(piece[1:])
    return np.vstack(out)


def _dense_curve(spec: TrackSpec) -> tuple[np.ndarray, bool]:
    p = spec.params
    kind = spec.generator
    if kind == "straight":
        length = _positive("length", _param(p, "length"))
        return _line(0.0, 0.0, length, 0.0), False
    if kind == "oval":
        straight = _positive("straight_length", _param(p, "straight_length"))
        r = _positive("radius", _param(p, "radius"))
        amp = _param(p, "chicane_amplitude", 0.0)
        wavelength = _param(p, "chicane_wavelength", straight / 2.0)
        back = (
            _sine(straight, straight, 2 * r, -abs(amp), _positive("chicane_wavelength", wavelength), -1.0)
            if amp
            else _line(straight, 2 * r, 0.0, 2 * r)
        )
        return _join([
            _line(0.0, 0.0, straight, 0.0),
            _arc(straight, r, r, -math.pi / 2, math.pi),
            back,
            _arc(0.0, r, r, math.pi / 2, math.pi),
        ]), True
    if kind == "figure-eight":
        r = _positive("radius", _param(p, "radius"))
        # Two tangent circles traversed in opposite senses, crossing at the origin.
        return _join([
            _arc(r, 0.0, r, math.pi, -2 * math.pi),
            _arc(-r, 0.0, r, 0.0, 2 * math.pi),
        ]), True
    if kind == "chicane":
        length = _positive("length", _param(p, "length"))
        amp = _param(p, "amplitude")
        wavelength = _positive("wavelength", _param(p, "wavelength"))
        if amp == 0:
            raise ValueError("chicane amplitude must be non-zero")
        # Alternate left/right bumps so the curvature changes sign.
        periods = max(1, round(length / wavelength))
        n = max(2, int(math.ceil(length / _DENSE_STEP)) + 1)
        s = np.linspace(0.0, length, n)
        y = amp * np.sin(math.pi * periods * s / length) * np.abs(np.sin(math.pi * periods * s / length))
        return np.column_stack([s, y]), False
    raise ValueError(f"unknown generator {kind!r}")


def _resample(dense: np.ndarray, spacing: float, closed: bool) -> np.ndarray:
    seg = np.hypot(*np.diff(dense, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    count = max(1, round(total / spacing))
    # Closed loops drop the duplicated closing point.
    targets = np.arange(count if closed else count + 1) * (total / count)
    return np.column_stack([np.interp(targets, s, dense[:, 0]), np.interp(targets, s, dense[:, 1])])


def generate_track(spec: TrackSpec) -> Path:
    """Sparse waypoints for a generated course at ``spec.spacing`` arc-length intervals."""
    if spec.generator is None:
        raise ValueError("generate_track needs a generator spec")
    dense, closed = _dense_curve(spec)
    pts = _resample(dense, spec.spacing, closed)
    if closed and spec.laps > 1:
        pts = np.vstack([pts] * spec.laps + [pts[:1]])
    elif closed:
        pts = np.vstack([pts, pts[:1]])
    return Path.from_points(pts, resolution=spec.spacing)


def track_perimeter(spec: TrackSpec) -> float:
    """Arc length of one lap of a generated course, from its dense sampling."""
    dense, _ = _dense_curve(spec)
    return float(np.hypot(*np.diff(dense, axis=0).T).sum())


def read_track_csv(filename: str | FsPath, epsilon: float = 0.01) -> Path:
    with open(filename, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "y"]:
            raise ValueError(f"{filename}: expected header 'x,y', got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{filename}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ValueError(f"{filename}:{lineno}: non-numeric waypoint {row}") from None
    return Path.from_points(rows, epsilon=epsilon)


def write_track_csv(path: Path, filename: str | FsPath) -> None:
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y"])
        for x, y in path.points:
            writer.writerow([repr(float(x)), repr(float(y))])


def load_track(spec: TrackSpec, base_dir: str | FsPath | None = None, epsilon: float = 0.01) -> Path:
    if spec.csv is not None:
        filename = FsPath(spec.csv)
        if base_dir is not None and not filename.is_absolute():
            filename = FsPath(base_dir) / filename
        return read_track_csv(filename, epsilon)
    sparse = generate_track(spec)
    return Path(sparse.points, sparse.resolution, epsilon)


# Same course as the bundled benchmark scenario.
BENCHMARK_TRACK = TrackSpec(
    generator="oval",
    params={"straight_length": 330.0, "radius": 60.0, "chicane_amplitude": 6.0, "chicane_wavelength": 160.0},
    spacing=1.0,
)
