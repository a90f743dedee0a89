"""Per-slice patch-grid planning and position-embedding interpolation.

Plans how many patch columns/rows a slice (or the low-resolution overview
image) gets under the encoder's token budget, and resizes the pretrained 2D
position-embedding table to arbitrary grid shapes with align-corners
bilinear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .partition import ImageSize, VitSpec


@dataclass(frozen=True)
class PatchGrid:
    cols: int
    rows: int

    def __post_init__(self):
        if self.cols < 1 or self.rows < 1:
            raise ValueError("patch grid dimensions must be >= 1")

    @property
    def tokens(self) -> int:
        return self.cols * self.rows


@dataclass(frozen=True)
class PosEmbedGrid:
    """2D position-embedding table, shape (rows, cols, dim)."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ValueError("position embedding grid must be rank 3 (rows, cols, dim)")
        if not np.isfinite(self.values).all():
            raise ValueError("position embeddings must be finite")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]


def fit_patch_grid(slice_w_px: float, slice_h_px: float, vit: VitSpec) -> PatchGrid:
    """Largest patch grid within the token budget matching the slice aspect.

    The continuous optimum (c, r) = (sqrt(M*a), sqrt(M/a)) uses the budget M
    exactly at aspect a = w/h.  We enumerate its floor/ceil neighbours,
    decrementing any combination that overshoots the budget, and keep the
    candidate with the smallest |log(c/r) - log(a)|; ties go to more tokens,
    then more columns.  Slices are never upscaled, so the grid is further
    capped by the slice's native patch capacity per axis.
    """
    if slice_w_px < vit.patch_px or slice_h_px < vit.patch_px:
        raise ValueError(f"degenerate slice: {slice_w_px}x{slice_h_px} is smaller than one {vit.patch_px}px patch")
    budget = vit.token_budget
    cap_c = int(slice_w_px // vit.patch_px)
    cap_r = int(slice_h_px // vit.patch_px)
    aspect = slice_w_px / slice_h_px
    ideal_c = math.sqrt(budget * aspect)
    ideal_r = math.sqrt(budget / aspect)

    def clip(v: int, cap: int) -> int:
        return min(max(v, 1), cap)

    seen: set[tuple[int, int]] = set()
    stack = [
        (clip(c, cap_c), clip(r, cap_r))
        for c in (math.floor(ideal_c), math.ceil(ideal_c))
        for r in (math.floor(ideal_r), math.ceil(ideal_r))
    ]
    feasible: list[tuple[int, int]] = []
    while stack:
        c, r = stack.pop()
        if c < 1 or r < 1 or (c, r) in seen:
            continue
        seen.add((c, r))
        if c * r <= budget:
            feasible.append((c, r))
        else:
            stack.append((c - 1, r))
            stack.append((c, r - 1))

    log_a = math.log(aspect)
    best = min(feasible, key=lambda cr: (abs(math.log(cr[0] / cr[1]) - log_a), -cr[0] * cr[1], -cr[0]))
    return PatchGrid(cols=best[0], rows=best[1])


def snap_to_patch(target_w_px: float, target_h_px: float, patch_px: int) -> tuple[int, int]:
    """Round each dimension to the nearest patch multiple (half rounds up).

    The adjustment per dimension never exceeds ceil(patch/2) pixels and the
    result is never smaller than one patch.
    """
    if target_w_px <= 0 or target_h_px <= 0:
        raise ValueError("target dimensions must be positive")

    def snap(v: float) -> int:
        mult = math.floor(v / patch_px + 0.5)
        return max(1, mult) * patch_px

    return snap(target_w_px), snap(target_h_px)


def reshape_pos_embed_1d_to_2d(seq: np.ndarray, q: int) -> PosEmbedGrid:
    """Row-major reshape of an (M, dim) embedding sequence to (q, q, dim)."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2:
        raise ValueError("embedding sequence must be a 2D (tokens, dim) array")
    if seq.shape[0] != q * q:
        raise ValueError(f"sequence length {seq.shape[0]} is not q^2 = {q * q}")
    return PosEmbedGrid(values=seq.reshape(q, q, seq.shape[1]))


def interpolate_pos_embed(src: PosEmbedGrid, target: PatchGrid) -> PosEmbedGrid:
    """Align-corners bilinear interpolation to the target grid shape.

    Corner cells of the source map exactly onto corner cells of the target,
    so interpolating to the source's own shape is the identity.  Each axis is
    handled separately (bilinear is separable) with a fixed summation order,
    making results independent of how channels might be parallelized.
    """
    out = _interp_axis(src.values, target.rows, axis=0)
    out = _interp_axis(out, target.cols, axis=1)
    return PosEmbedGrid(values=out)


def _interp_axis(values: np.ndarray, new_size: int, axis: int) -> np.ndarray:
    old_size = values.shape[axis]
    if new_size == old_size:
        return values.copy()
    if old_size == 1:
        reps = [1, 1, 1]
        reps[axis] = new_size
        return np.tile(values, reps)
    if new_size == 1:
        # align-corners degenerate target: keep the first source cell
        return np.take(values, [0], axis=axis)
    pos = np.arange(new_size) * (old_size - 1) / (new_size - 1)
    lo = np.minimum(np.floor(pos).astype(int), old_size - 2)
    frac = pos - lo
    a = np.take(values, lo, axis=axis)
    b = np.take(values, lo + 1, axis=axis)
    shape = [1, 1, 1]
    shape[axis] = new_size
    f = frac.reshape(shape)
    return a * (1.0 - f) + b * f


def overview_grid(image: ImageSize, vit: VitSpec) -> PatchGrid:
    """Patch grid for the native-aspect overview downscale of the full image."""
    return fit_patch_grid(image.width_px, image.height_px, vit)
