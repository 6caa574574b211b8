from pathlib import Path

import numpy as np
import svgwrite

from gridshell.services.planar import PlanarGrid

STROKE = "#1a1a1a"
DIGITS = 6


def _fmt(point) -> str:
    x, y = (round(float(v), DIGITS) for v in point)
    return f"{x:g},{y:g}"


def _rectangle(center, direction, length, width) -> str:
    normal = np.array([-direction[1], direction[0]])
    a = direction * length / 2
    b = normal * width / 2
    corners = [center - a - b, center + a - b, center + a + b, center - a + b]
    return "M" + " L".join(_fmt(c) for c in corners) + " Z"


def lamella_path(pg: PlanarGrid, k: int, clearance: float) -> str:
    """Outline of lamella k with its notch slots as sub-paths."""
    start, end = pg.endpoints[k]
    delta = end - start
    direction = delta / np.linalg.norm(delta)
    if pg.width > 0:
        middle = (start + end) / 2
        parts = [_rectangle(middle, direction, pg.lengths[k], pg.width)]
    else:
        parts = [f"M{_fmt(start)} L{_fmt(end)}"]

    points, lengths = pg.notch_points, pg.notch_lengths
    slot_width = max(pg.width / 2, clearance)
    for notch, pair, length in zip(pg.notches, points, lengths):
        if k not in (notch.g, notch.h):
            continue
        center = pair[0] if k == notch.g else pair[1]
        slot = length + clearance
        parts.append(_rectangle(center, direction, slot, slot_width))
    return " ".join(parts)


def render_svg(pg: PlanarGrid, path, clearance=0.02) -> Path:
    """One path element per lamella, notch slots drawn inside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points = pg.endpoints.reshape(-1, 2)
    margin = max(pg.width, clearance) + 0.05 * np.ptp(points, axis=0).max()
    low = points.min(axis=0) - margin
    size = np.ptp(points, axis=0) + 2 * margin

    dwg = svgwrite.Drawing(str(path), profile="tiny")
    dwg.attribs["viewBox"] = " ".join(
        f"{round(float(v), DIGITS):g}" for v in (*low, *size)
    )
    layer = dwg.g(id="lamellae", fill="none", stroke=STROKE)
    for k, id in enumerate(pg.ids):
        layer.add(
            dwg.path(
                d=lamella_path(pg, k, clearance),
                id=id,
                stroke_width=round(0.002 * size.max(), DIGITS),
            )
        )
    dwg.add(layer)
    dwg.save()
    return path
