"""Inference FLOP estimates for encoder, projector and LLM prefill.

Standard dense-transformer accounting: per layer and t tokens,
8*t*d^2 (QKV + output projections) + 4*t^2*d (QK^T and attn*V) +
4*t*d*d_ffn (two FFN matmuls), multiply-adds counted as 2 ops.  Softmax and
norms are ignored.  Absolute numbers depend on the accounting convention;
comparisons between strategies are expressed as ratios.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .partition import ImageSize, VitSpec, select_partition
from .patches import fit_patch_grid, overview_grid

STRATEGIES = ("uhd", "llava15", "uhd-mlp", "fixed2x2-mlp")


@dataclass(frozen=True)
class StackDims:
    layers: int
    hidden_dim: int
    ffn_dim: int

    def __post_init__(self):
        if min(self.layers, self.hidden_dim, self.ffn_dim) < 0:
            raise ValueError("stack dims must be non-negative")


@dataclass(frozen=True)
class ModelDims:
    encoder: StackDims
    encoder_patch_px: int
    resampler_queries: int
    mlp_hidden_dim: int
    llm: StackDims


@dataclass(frozen=True)
class CostReport:
    strategy: str
    encoder_flops: float
    projector_flops: float
    llm_prefill_flops: float
    visual_tokens_to_llm: int

    @property
    def total_flops(self) -> float:
        return self.encoder_flops + self.projector_flops + self.llm_prefill_flops

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "encoder_flops": self.encoder_flops,
            "projector_flops": self.projector_flops,
            "llm_prefill_flops": self.llm_prefill_flops,
            "total_flops": self.total_flops,
            "total_tflops": self.total_flops / 1e12,
            "visual_tokens_to_llm": self.visual_tokens_to_llm,
        }


def load_model_dims(path: str | None = None) -> ModelDims:
    """Read architecture constants from JSON (packaged defaults if no path)."""
    if path is None:
        raw = json.loads(resources.files("slicekit.data").joinpath("model_dims.json").read_text())
    else:
        with open(path) as f:
            raw = json.load(f)
    enc, proj, llm = raw["encoder"], raw["projector"], raw["llm"]
    return ModelDims(
        encoder=StackDims(enc["layers"], enc["hidden_dim"], enc["ffn_dim"]),
        encoder_patch_px=enc["patch_px"],
        resampler_queries=proj["resampler_queries"],
        mlp_hidden_dim=proj["mlp_hidden_dim"],
        llm=StackDims(llm["layers"], llm["hidden_dim"], llm["ffn_dim"]),
    )


def vit_token_count(width_px: int, height_px: int, patch_px: int) -> int:
    """Patch tokens for an image encoded whole: (w/patch) * (h/patch)."""
    if width_px % patch_px or height_px % patch_px:
        raise ValueError("dimensions must be multiples of the patch size (snap first)")
    return (width_px // patch_px) * (height_px // patch_px)


def transformer_stack_flops(dims: StackDims, tokens: int) -> float:
    d, f = dims.hidden_dim, dims.ffn_dim
    per_layer = 8.0 * tokens * d * d + 4.0 * tokens * tokens * d + 4.0 * tokens * d * f
    return dims.layers * per_layer


def resampler_flops(dims: ModelDims, input_tokens: int) -> float:
    d, k = dims.encoder.hidden_dim, dims.resampler_queries
    t = input_tokens
    # key/value projections on t tokens, query projection on K queries,
    # then the two K x t attention matmuls
    return 4.0 * t * d * d + 2.0 * k * d * d + 4.0 * k * t * d


def mlp_projector_flops(dims: ModelDims, input_tokens: int) -> float:
    d_in, h, d_out = dims.encoder.hidden_dim, dims.mlp_hidden_dim, dims.llm.hidden_dim
    return input_tokens * (2.0 * d_in * h + 2.0 * h * d_out)


def _encoder_passes(dims: ModelDims, image: ImageSize, vit: VitSpec, strategy: str) -> list[int]:
    """Token count of each encoder forward pass (slices + overview)."""
    if strategy == "llava15":
        return [vit.token_budget]  # single square-resized pass
    if strategy == "fixed2x2-mlp":
        return [vit.token_budget] * 5  # four fixed slices + overview
    plan = select_partition(image, vit)
    passes = [fit_patch_grid(r.w, r.h, vit).tokens for r in plan.slice_rects]
    passes.append(overview_grid(image, vit).tokens)
    return passes


def estimate_flops(
    dims: ModelDims,
    image: ImageSize,
    strategy: str = "uhd",
    text_tokens: int = 0,
    vit: VitSpec | None = None,
) -> CostReport:
    """Cost report for one encoding strategy on one image."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    vit = vit or VitSpec()
    passes = _encoder_passes(dims, image, vit, strategy)
    encoder = sum(transformer_stack_flops(dims.encoder, t) for t in passes)

    if strategy == "uhd":
        projector = sum(resampler_flops(dims, t) for t in passes)
        visual_tokens = dims.resampler_queries * len(passes)
    else:
        total_in = sum(passes)
        projector = mlp_projector_flops(dims, total_in)
        visual_tokens = total_in

    llm = transformer_stack_flops(dims.llm, visual_tokens + text_tokens)
    return CostReport(
        strategy=strategy,
        encoder_flops=encoder,
        projector_flops=projector,
        llm_prefill_flops=llm,
        visual_tokens_to_llm=visual_tokens,
    )


def compare_strategies(
    dims: ModelDims,
    strategy_a: str,
    strategy_b: str,
    image: ImageSize,
    text_tokens: int = 0,
    vit: VitSpec | None = None,
) -> tuple[float, CostReport, CostReport]:
    """Total-cost ratio a/b plus both reports."""
    a = estimate_flops(dims, image, strategy_a, text_tokens, vit)
    b = estimate_flops(dims, image, strategy_b, text_tokens, vit)
    return a.total_flops / b.total_flops, a, b
