"""Compositional vector quantization with a low-dimensional shared codebook.

One codebook of K codevectors (dimension d* = d/m) quantizes all m
segments of every feature vector, giving K**m effective combinations from
a K-entry table. Includes vanilla-VQ and product-quantization baselines,
a parameter-free interpolate/quantize/pool feature enhancement, bit-exact
storage codecs with the matching cost model, and a desk-scale
straight-through trainer.
"""

from .codebook import (
    AnchorMode,
    FitRound,
    ReactivationPolicy,
    codebook_init,
    ema_update,
    fit_codebook,
    nearest_code,
    reactivate_dead,
    record_usage,
    usage_fraction,
)
from .core import (
    Codebook,
    CodeGrid,
    FeatureMap,
    Metric,
    QuantConfig,
    featuremap_new,
    split_vector,
)
from .cost_model import (
    CostReport,
    bits_per_index,
    load_codebook,
    load_grid,
    pack_indices,
    save_codebook,
    save_grid,
    storage_cost,
    unpack_indices,
)
from .data import extract_patches, gen_correlated_map, gen_mixture, load_pgm, save_pgm
from .enhancement import avg_pool, bilinear_upsample, enhanced_quantize
from .kernels import available_backends, count_multiplications, get_backend, use_backend
from .metrics import (
    l1,
    mse,
    psnr,
    quality_report,
    segment_usage,
    sharing_histogram,
    ssim,
    stats_lines,
)
from .quantizers import (
    PqCodebookSet,
    effective_capacity,
    fit_pq_codebooks,
    looc_dequantize,
    looc_quantize,
    pq_dequantize,
    pq_quantize,
    vq_quantize,
)
from .trainer import (
    GRADIENT_ROUTING,
    CodebookLearning,
    LinearAE,
    LossRecord,
    LossTerms,
    TrainConfig,
    grad_check,
    loss_terms,
    train,
    train_step,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorMode",
    "Codebook",
    "CodebookLearning",
    "CodeGrid",
    "CostReport",
    "FeatureMap",
    "FitRound",
    "GRADIENT_ROUTING",
    "LinearAE",
    "LossRecord",
    "LossTerms",
    "Metric",
    "PqCodebookSet",
    "QuantConfig",
    "ReactivationPolicy",
    "TrainConfig",
    "avg_pool",
    "available_backends",
    "bilinear_upsample",
    "bits_per_index",
    "codebook_init",
    "count_multiplications",
    "effective_capacity",
    "ema_update",
    "enhanced_quantize",
    "extract_patches",
    "featuremap_new",
    "fit_codebook",
    "fit_pq_codebooks",
    "gen_correlated_map",
    "gen_mixture",
    "get_backend",
    "grad_check",
    "l1",
    "load_codebook",
    "load_grid",
    "load_pgm",
    "looc_dequantize",
    "looc_quantize",
    "loss_terms",
    "mse",
    "nearest_code",
    "pack_indices",
    "pq_dequantize",
    "pq_quantize",
    "psnr",
    "quality_report",
    "reactivate_dead",
    "record_usage",
    "save_codebook",
    "save_grid",
    "save_pgm",
    "segment_usage",
    "sharing_histogram",
    "split_vector",
    "ssim",
    "stats_lines",
    "storage_cost",
    "train",
    "train_step",
    "unpack_indices",
    "usage_fraction",
    "use_backend",
    "vq_quantize",
]
