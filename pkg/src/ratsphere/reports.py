"""Output plumbing shared by the command-line tools: radius rules, JSON-lines, CSV, SVG and the point cache."""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from .lattice_points import PointSet, omega_n

_RULE = re.compile(
    r"""^\s*
    (?:(?P<c>[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*(?P<star>\*)?\s*)?
    (?:(?P<var>[nT])\s*(?:\^\s*\(?\s*(?P<a>[+-]?[0-9]*\.?[0-9]+)\s*\)?)?)?
    \s*$""",
    re.VERBOSE,
)


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass(frozen=True)
class RadiusRule:
    """R = c * n^a, parsed from strings like "n^-0.4", "0.5*n^-1" or "0.3"."""

    c: float
    a: float
    text: str

    @classmethod
    def parse(cls, text: str) -> RadiusRule:
        m = _RULE.match(text)
        if not m or (m["c"] is None and m["var"] is None) or (m["star"] and m["var"] is None):
            raise ValueError(f"cannot parse radius rule {text!r}; expected c*n^a")
        c = float(m["c"]) if m["c"] is not None else 1.0
        if m["var"] is None:
            a = 0.0
        else:
            a = float(m["a"]) if m["a"] is not None else 1.0
        if c <= 0:
            raise ValueError("the constant must be positive")
        return cls(c, a, text.strip())

    def __call__(self, n: float) -> float:
        R = self.c * float(n) ** self.a
        if not 0 < R <= 2:
            raise ValueError(f"rule {self.text!r} gives R={R} outside (0, 2] at n={n}")
        return R


class JsonLinesWriter:
    """Writes a config header record followed by data records, one JSON object per line."""

    def __init__(self, stream, command: str, config: dict):
        self.stream = stream
        self.write({"record": "config", "command": command, "version": artifact_version(), "config": config})

    def write(self, obj: dict) -> None:
        self.stream.write(json.dumps(_plain(obj), sort_keys=True) + "\n")


def _plain(obj):
    """Convert numpy scalars and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def write_csv(path, header: list[str], rows, comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_points_csv(path, points: PointSet, comment: str | None = None) -> None:
    header = [f"m{i + 1}" for i in range(points.d + 1)] + ["n"]
    rows = (list(m) + [h] for m, h in zip(points.numerators.tolist(), points.heights.tolist()))
    write_csv(path, header, rows, comment)


def write_svg(path, points: PointSet, size: int = 600) -> None:
    """Orthographic view from above of the points with z >= 0."""
    X = points.coords()
    X = X[X[:, 2] >= 0]
    half = size / 2
    r = 0.45 * size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<circle cx="{half}" cy="{half}" r="{r:.1f}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    for x, y, _ in X[:, :3]:
        parts.append(f'<circle cx="{half + r * x:.2f}" cy="{half - r * y:.2f}" r="1.2" fill="black"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def cache_dir(flag: str | None) -> Path | None:
    d = flag or os.environ.get("RSL_CACHE")
    if not d:
        return None
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cached_omega_n(n: int, d: int, directory: Path | None) -> PointSet:
    """omega_n with an optional .npy cache of the numerator array keyed by (d, n)."""
    if directory is None:
        return omega_n(n, d)
    f = directory / f"omega_d{d}_n{n}.npy"
    if f.exists():
        nums = np.load(f)
        pts = PointSet(d, nums, np.full(len(nums), n, dtype=np.int64), ("fixed", n))
        pts.check_invariants()
        return pts
    pts = omega_n(n, d)
    np.save(f, pts.numerators)
    return pts
