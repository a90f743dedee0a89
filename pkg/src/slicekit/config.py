"""Runtime configuration with JSON-file overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .partition import VitSpec


@dataclass(frozen=True)
class AppConfig:
    vit: VitSpec = VitSpec()
    resampler_queries: int = 64
    max_slices: int = 6
    seed: int = 42
    output_format: str = "json"  # json | text
    model_dims_path: str | None = None

    def __post_init__(self):
        if self.max_slices < 1:
            raise ValueError("max_slices must be >= 1")
        if self.resampler_queries < 1:
            raise ValueError("resampler_queries must be >= 1")
        if self.output_format not in ("json", "text"):
            raise ValueError("output_format must be 'json' or 'text'")


def load_config(path: str | None = None) -> AppConfig:
    cfg = AppConfig()
    if path is None:
        return cfg
    with open(path) as f:
        raw = json.load(f)
    if "vit" in raw:
        v = raw["vit"]
        cfg = replace(
            cfg,
            vit=VitSpec(
                pretrain_width_px=v.get("w", 336),
                pretrain_height_px=v.get("h", 336),
                patch_px=v.get("patch", 14),
                token_budget=v.get("M", (v.get("w", 336) // v.get("patch", 14)) * (v.get("h", 336) // v.get("patch", 14))),
            ),
        )
    for key, attr in (
        ("K", "resampler_queries"),
        ("max_N", "max_slices"),
        ("seed", "seed"),
        ("format", "output_format"),
        ("model_dims", "model_dims_path"),
    ):
        if key in raw:
            cfg = replace(cfg, **{attr: raw[key]})
    return cfg
