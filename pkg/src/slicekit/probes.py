"""Simulators for visual-encoding failure modes of fixed-tile pipelines.

Models a proprietary-style high-resolution mode that covers an image with
fixed 512px tiles (padding below tile size, equal-overlap placement when the
resolution is not tile-divisible), predicts object-counting answers under
the overlap-multiplicity hypothesis, and probes square-padding waste.
Scenes are synthetic shape arrangements rendered to portable pixmaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .partition import ImageSize, PixelRect

COLORS = {
    "red": (220, 40, 40),
    "green": (40, 170, 60),
    "white": (255, 255, 255),
    "blue": (40, 80, 220),
    "grey": (128, 128, 128),
}
SHAPES = ("circle", "triangle", "square")


@dataclass(frozen=True)
class SceneObject:
    shape: str
    color: str
    center: tuple[float, float]
    size: float

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.color not in COLORS:
            raise ValueError(f"unknown color {self.color!r}")
        if self.size <= 0:
            raise ValueError("object size must be positive")


@dataclass(frozen=True)
class SyntheticScene:
    canvas: ImageSize
    objects: tuple[SceneObject, ...]
    background: str = "grey"

    def __post_init__(self):
        for obj in self.objects:
            x, y = obj.center
            if not (0 <= x < self.canvas.width_px and 0 <= y < self.canvas.height_px):
                raise ValueError(f"object center {obj.center} outside canvas")

    def scaled(self, factor: float) -> "SyntheticScene":
        w = max(1, round(self.canvas.width_px * factor))
        h = max(1, round(self.canvas.height_px * factor))
        objs = tuple(
            SceneObject(o.shape, o.color, (o.center[0] * factor, o.center[1] * factor), o.size * factor)
            for o in self.objects
        )
        return SyntheticScene(canvas=ImageSize(w, h), objects=objs, background=self.background)


@dataclass(frozen=True)
class SliceCover:
    tile_px: int
    rects: tuple[PixelRect, ...]
    padded_canvas: ImageSize
    grid: tuple[int, int] = field(default=(1, 1))  # tiles along (x, y)


def _axis_positions(length: int, tile_px: int) -> list[int]:
    """Tile start offsets along one axis: equal-overlap placement."""
    if length <= tile_px:
        return [0]
    k = math.ceil(length / tile_px)
    stride = (length - tile_px) / (k - 1)
    return [round(i * stride) for i in range(k)]


def overlap_tile_cover(canvas: ImageSize, tile_px: int = 512) -> SliceCover:
    """Cover the (padded) canvas with ceil(W/tile) x ceil(H/tile) fixed tiles.

    Images at or below the tile size are padded into a single tile.  When an
    axis is not tile-divisible the tiles overlap: they are spread at stride
    (dim - tile)/(k - 1), rounded to integer pixels.
    """
    xs = _axis_positions(canvas.width_px, tile_px)
    ys = _axis_positions(canvas.height_px, tile_px)
    rects = tuple(PixelRect(x=x, y=y, w=tile_px, h=tile_px) for y in ys for x in xs)
    padded = ImageSize(max(canvas.width_px, tile_px), max(canvas.height_px, tile_px))
    return SliceCover(tile_px=tile_px, rects=rects, padded_canvas=padded, grid=(len(xs), len(ys)))


def object_multiplicity(obj: SceneObject, cover: SliceCover) -> int:
    """Number of tiles whose (half-open) extent contains the object center."""
    x, y = obj.center
    return sum(1 for r in cover.rects if r.x <= x < r.x + r.w and r.y <= y < r.y + r.h)


def simulate_count(scene: SyntheticScene, cover: SliceCover) -> int:
    """Predicted answer: each object counted once per tile covering its center."""
    return sum(object_multiplicity(obj, cover) for obj in scene.objects)


def heatmap_probe(
    canvas: ImageSize,
    object_template: tuple[SceneObject, ...],
    grid_step_px: int,
) -> list[list[int]]:
    """Predicted count at every template placement on a regular position grid.

    The template's object centers are offsets from the placement origin; the
    returned matrix is indexed [row][col] over origins spaced grid_step_px
    apart, keeping only placements where the whole template fits.
    """
    if not object_template:
        raise ValueError("object template must contain at least one object")
    max_dx = max(o.center[0] for o in object_template)
    max_dy = max(o.center[1] for o in object_template)
    cover = overlap_tile_cover(canvas)
    matrix: list[list[int]] = []
    for oy in range(0, canvas.height_px - math.ceil(max_dy), grid_step_px):
        row = []
        for ox in range(0, canvas.width_px - math.ceil(max_dx), grid_step_px):
            placed = tuple(
                SceneObject(o.shape, o.color, (o.center[0] + ox, o.center[1] + oy), o.size)
                for o in object_template
            )
            scene = SyntheticScene(canvas=canvas, objects=placed)
            row.append(simulate_count(scene, cover))
        matrix.append(row)
    return matrix


def phase_classify(scene: SyntheticScene, resolution_scale: float) -> tuple[int, set[int]]:
    """Resize the scene and classify the tiling regime.

    Phase 1: single (padded) tile, answers match ground truth.  Phase 2:
    multiple tiles but no center sits in an overlap band; elevated answers
    come from objects cut by tile borders.  Phase 3: overlap multiplicities
    kick in, mixing ground truth, fragment counts and multiplied counts.
    """
    resized = scene.scaled(resolution_scale)
    truth = len(resized.objects)
    cover = overlap_tile_cover(resized.canvas)
    if len(cover.rects) == 1:
        return 1, {truth}

    simulated = simulate_count(resized, cover)
    fragments = _fragment_count(resized, cover)
    answers = {truth, simulated, fragments}
    multiplicities = [object_multiplicity(o, cover) for o in resized.objects]
    phase = 3 if max(multiplicities) > 1 else 2
    return phase, answers


def _fragment_count(scene: SyntheticScene, cover: SliceCover) -> int:
    """Objects counted once per tile their bounding disk touches (cut pieces)."""
    total = 0
    for obj in scene.objects:
        x, y = obj.center
        half = obj.size / 2
        for r in cover.rects:
            if x + half > r.x and x - half < r.x + r.w and y + half > r.y and y - half < r.y + r.h:
                total += 1
    return total


def padding_waste(aspect_w: float, aspect_h: float) -> float:
    """Fraction of square-padded computation spent on real content."""
    if aspect_w <= 0 or aspect_h <= 0:
        raise ValueError("aspect components must be positive")
    return min(aspect_w, aspect_h) / max(aspect_w, aspect_h)


def render_scene(scene: SyntheticScene) -> bytes:
    """Deterministic P6 portable-pixmap rasterization (no anti-aliasing)."""
    w, h = scene.canvas.width_px, scene.canvas.height_px
    bg = COLORS[scene.background]
    rows = [bytearray(bg * w) for _ in range(h)]
    for obj in scene.objects:
        color = bytes(COLORS[obj.color])
        cx, cy = obj.center
        half = obj.size / 2
        y0 = max(0, math.floor(cy - half))
        y1 = min(h - 1, math.ceil(cy + half))
        x0 = max(0, math.floor(cx - half))
        x1 = min(w - 1, math.ceil(cx + half))
        for py in range(y0, y1 + 1):
            for px in range(x0, x1 + 1):
                if _covers(obj, px + 0.5, py + 0.5):
                    rows[py][3 * px : 3 * px + 3] = color
    header = f"P6\n{w} {h}\n255\n".encode()
    return header + b"".join(bytes(r) for r in rows)


def _covers(obj: SceneObject, x: float, y: float) -> bool:
    cx, cy = obj.center
    half = obj.size / 2
    if obj.shape == "square":
        return abs(x - cx) <= half and abs(y - cy) <= half
    if obj.shape == "circle":
        return (x - cx) ** 2 + (y - cy) ** 2 <= half * half
    # upward triangle: apex at (cx, cy-half), base corners at (cx +/- half, cy+half)
    if not (cy - half <= y <= cy + half):
        return False
    frac = (y - (cy - half)) / obj.size  # 0 at apex, 1 at base
    return abs(x - cx) <= half * frac


def padding_probe_scene(aspect_w: float, aspect_h: float, long_side_px: int = 336) -> SyntheticScene:
    """Centered colored rectangle on a grey square canvas (padding-blindness probe)."""
    canvas = ImageSize(long_side_px, long_side_px)
    scale = long_side_px / max(aspect_w, aspect_h)
    rect_w = max(1.0, aspect_w * scale)
    rect_h = max(1.0, aspect_h * scale)
    # a square object scaled per axis is not expressible; emulate the rectangle
    # with a row/column of squares
    size = min(rect_w, rect_h)
    count = max(1, round(max(rect_w, rect_h) / size))
    objs = []
    cx0 = (long_side_px - max(rect_w, rect_h)) / 2 + size / 2
    for i in range(count):
        offset = cx0 + i * size
        center = (offset, long_side_px / 2) if rect_w >= rect_h else (long_side_px / 2, offset)
        objs.append(SceneObject("square", "green", center, size))
    return SyntheticScene(canvas=canvas, objects=tuple(objs))
