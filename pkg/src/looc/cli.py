"""Command-line surface: fit, quantize, dequantize, train, cost, bench.

Every command is deterministic per seed; identical flags produce
byte-identical output files. Exit codes: 0 success, 2 usage/config error,
3 IO error, 4 numeric divergence.

Synthetic inputs are inline specs:
  mixture:n=1000,d=8,c=16[,spread=0.05]   -> n vectors from c clusters
  correlated:h=32,w=32,d=16,s=2           -> spatially smoothed noise map
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import kernels
from .codebook import ReactivationPolicy, fit_codebook, usage_fraction
from .core import Codebook, FeatureMap, Metric, QuantConfig
from .cost_model import (
    load_codebook,
    load_grid,
    save_codebook,
    save_grid,
    storage_cost,
)
from .data import extract_patches, gen_correlated_map, gen_mixture, load_pgm, save_pgm
from .enhancement import avg_pool, enhanced_quantize
from .errors import CodecError, LoocError, NonFiniteLossError
from .metrics import mse, quality_report, stats_lines
from .quantizers import (
    PqCodebookSet,
    effective_capacity,
    looc_dequantize,
    looc_quantize,
    pq_quantize,
    vq_quantize,
)
from .trainer import LOSS_LOG_HEADER, CodebookLearning, TrainConfig, train

BUNDLED_TRAIN_SPEC = "mixture:n=256,d=8,c=4,spread=0.05"


def _parse_kv(body: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for part in body.split(","):
        if not part:
            continue
        if "=" not in part:
            raise LoocError(f"malformed synthetic parameter {part!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_synthetic(spec: str, seed: int):
    """Build a dataset from an inline spec; returns vectors or a FeatureMap."""
    if ":" not in spec:
        raise LoocError(f"synthetic spec {spec!r} needs a kind: prefix")
    kind, body = spec.split(":", 1)
    kv = _parse_kv(body)
    if kind == "mixture":
        return gen_mixture(
            n=int(kv.get("n", "1000")),
            d=int(kv.get("d", "8")),
            components=int(kv.get("c", "8")),
            spread=float(kv.get("spread", "0.05")),
            seed=seed,
        )
    if kind == "correlated":
        return gen_correlated_map(
            h=int(kv.get("h", "32")),
            w=int(kv.get("w", "32")),
            d=int(kv.get("d", "8")),
            smoothness=float(kv.get("s", "2")),
            seed=seed,
        )
    raise LoocError(f"unknown synthetic kind {kind!r}")


def _load_vectors(args) -> np.ndarray:
    if getattr(args, "input", None):
        fmap = load_pgm(args.input)
        return fmap.data.reshape(fmap.h * fmap.w, fmap.d)
    if getattr(args, "synthetic", None):
        got = parse_synthetic(args.synthetic, args.seed)
        if isinstance(got, FeatureMap):
            return got.data.reshape(got.h * got.w, got.d)
        return got
    raise LoocError("provide --input or --synthetic")


def _load_map(args) -> FeatureMap:
    if getattr(args, "input", None):
        return load_pgm(args.input)
    if getattr(args, "synthetic", None):
        got = parse_synthetic(args.synthetic, args.seed)
        if not isinstance(got, FeatureMap):
            raise LoocError("this command needs a spatial map (correlated: spec)")
        return got
    raise LoocError("provide --input or --synthetic")


def _segmentation(d: int, dstar, m) -> tuple[int, int]:
    if dstar is None and m is None:
        raise LoocError("provide --dstar and/or --m")
    if m is None:
        m = d // dstar if dstar else 0
    if dstar is None:
        if d % m != 0:
            raise LoocError(f"d={d} is not divisible by m={m}")
        dstar = d // m
    if dstar < 1 or m < 1 or dstar * m != d:
        raise LoocError(
            f"--dstar {dstar} x --m {m} must factor the data dimension d={d}"
        )
    return dstar, m


def cmd_fit(args) -> int:
    vectors = _load_vectors(args)
    d = vectors.shape[1]
    dstar, m = _segmentation(d, args.dstar, args.m)
    metric = Metric(args.metric)
    segments = vectors.reshape(vectors.shape[0] * m, dstar)
    cb, history = fit_codebook(
        segments,
        args.K,
        seed=args.seed,
        metric=metric,
        rounds=args.rounds,
        reactivate=args.reactivate,
    )
    save_codebook(args.out, cb, m=m, metric=metric)
    print(f"usage={usage_fraction(cb):.3f}")
    print(f"mse={history[-1].mse!r}")
    print(f"rounds={len(history)}")
    return 0


def cmd_quantize(args) -> int:
    cb, m, metric = load_codebook(args.cb)
    fmap = _load_map(args)
    cfg = QuantConfig(m=m, beta=args.beta, metric=metric)
    smoothed, grid = enhanced_quantize(fmap, cb, cfg)
    save_grid(args.out, grid)
    report = quality_report(fmap, smoothed, grid, cb.k)
    cost = storage_cost(cb.k, cb.d_star, m, grid.h, grid.w)
    report.update(
        {
            "k": cb.k,
            "d_star": cb.d_star,
            "m": m,
            "beta": args.beta,
            "h": grid.h,
            "w": grid.w,
            "codebook_bits": cost.codebook_bits,
            "index_bits": cost.index_bits,
            "total_bits": cost.total_bits,
            "multiplications": cost.multiplications,
        }
    )
    if args.stats:
        with open(args.stats, "w") as fh:
            json.dump(report, fh, sort_keys=True)
            fh.write("\n")
    for line in stats_lines(report):
        print(line)
    return 0


def cmd_dequantize(args) -> int:
    cb, _, _ = load_codebook(args.cb)
    grid = load_grid(args.grid)
    recon = avg_pool(looc_dequantize(grid, cb), args.beta)
    if args.out:
        save_pgm(recon, args.out)
    if args.ref:
        ref = load_pgm(args.ref) if not args.ref.startswith("correlated:") \
            else parse_synthetic(args.ref, args.seed)
        print(f"mse={mse(ref, recon)!r}")
    return 0


def cmd_train(args) -> int:
    if args.input:
        vectors = extract_patches(load_pgm(args.input), args.patch)
    else:
        vectors = _load_vectors(args)
    d = vectors.shape[1]
    d_lat = args.dlat or d
    dstar, m = _segmentation(d_lat, args.dstar, args.m)
    cfg = TrainConfig(
        lr=args.lr,
        steps=args.steps,
        batch=args.batch,
        mu=args.mu,
        seed=args.seed,
        codebook_learning=CodebookLearning(args.codebook_learning),
        reactivate_every=args.reactivate_every,
    )
    qcfg = QuantConfig(m=m, metric=Metric(args.metric), mu=args.mu)
    ae, cb, records = train(vectors, args.K, cfg, qcfg, d_lat=d_lat)
    lines = [LOSS_LOG_HEADER] + [r.csv_line() for r in records]
    if args.log:
        with open(args.log, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)
    if args.out_cb:
        save_codebook(args.out_cb, cb, m=m, metric=Metric(args.metric))
    print(f"initial_total={records[0].total!r}")
    print(f"final_total={records[-1].total!r}")
    print(f"usage={records[-1].usage:.3f}")
    return 0


def _parse_config(text: str) -> tuple[int, int, int]:
    # "1024x128" or "32x4:m=32"
    m = 1
    body = text
    if ":" in text:
        body, opts = text.split(":", 1)
        kv = _parse_kv(opts)
        m = int(kv.get("m", "1"))
    try:
        k_str, dstar_str = body.split("x")
        k, dstar = int(k_str), int(dstar_str)
    except ValueError as exc:
        raise LoocError(f"malformed config {text!r}; expected KxDSTAR[:m=M]") from exc
    if min(k, dstar, m) < 1:
        raise LoocError(f"config {text!r} values must be positive")
    return k, dstar, m


def _parse_hw(text: str) -> tuple[int, int]:
    try:
        h_str, w_str = text.split("x")
        h, w = int(h_str), int(w_str)
    except ValueError as exc:
        raise LoocError(f"malformed --hw {text!r}; expected HxW") from exc
    if h < 1 or w < 1:
        raise LoocError("--hw values must be positive")
    return h, w


def cmd_cost(args) -> int:
    h, w = _parse_hw(args.hw)
    for text in args.config:
        k, dstar, m = _parse_config(text)
        report = storage_cost(k, dstar, m, h, w)
        capacity = effective_capacity(k, m)
        print(
            f"config={text} codebook_bits={report.codebook_bits:,} "
            f"index_bits={report.index_bits:,} total_bits={report.total_bits:,} "
            f"multiplications={report.multiplications:,} capacity={capacity:,}"
        )
    return 0


def _time_quantize(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def cmd_bench(args) -> int:
    vectors = _load_vectors(args)
    n, d = vectors.shape
    dstar, m = _segmentation(d, args.dstar, args.m)
    if m * (args.K - 1).bit_length() > 24:
        raise LoocError(
            f"K^m = {args.K}^{m} too large for the vanilla-VQ comparison"
        )
    k_vq = effective_capacity(args.K, m)
    rng = np.random.default_rng(args.seed)
    fmap = FeatureMap(vectors.reshape(n, 1, d))
    cb_vq = Codebook(vectors=rng.standard_normal((k_vq, d)).astype(np.float32))
    cb_looc = Codebook(vectors=rng.standard_normal((args.K, dstar)).astype(np.float32))
    cb_pq = PqCodebookSet(
        tuple(
            Codebook(vectors=rng.standard_normal((args.K, dstar)).astype(np.float32))
            for _ in range(m)
        )
    )
    schemes = [
        ("vq", lambda: vq_quantize(fmap, cb_vq), storage_cost(k_vq, d, 1, n, 1)),
        ("pq", lambda: pq_quantize(fmap, cb_pq), storage_cost(args.K, dstar, m, n, 1)),
        ("looc", lambda: looc_quantize(fmap, cb_looc, m), storage_cost(args.K, dstar, m, n, 1)),
    ]
    print(f"n={n} d={d} m={m} K={args.K} K_vq={k_vq} (matched capacity)")
    for backend in kernels.available_backends():
        with kernels.use_backend(backend):
            for name, fn, cost in schemes:
                with kernels.count_multiplications() as counter:
                    fn()
                elapsed = _time_quantize(fn, args.repeats)
                rate = n / elapsed if elapsed > 0 else float("inf")
                print(
                    f"backend={backend} scheme={name} vectors_per_sec={rate:,.0f} "
                    f"model_multiplications={cost.multiplications:,} "
                    f"counted_multiplications={counter.total:,}"
                )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="looc",
        description="Compositional vector quantization with a shared low-dimensional codebook.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a codebook via assign/EMA/reactivate rounds")
    fit.add_argument("--input", help="binary PGM image")
    fit.add_argument("--synthetic", help="inline dataset spec (mixture:/correlated:)")
    fit.add_argument("--K", type=int, required=True, help="number of codevectors")
    fit.add_argument("--dstar", type=int, help="codevector dimension d* = d/m")
    fit.add_argument("--m", type=int, help="segments per feature vector")
    fit.add_argument("--metric", choices=["l2", "cosine"], default="l2")
    fit.add_argument("--reactivate", action="store_true",
                     help="re-seed inactive codevectors from data anchors")
    fit.add_argument("--rounds", type=int, default=50)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True, help="output codebook file")
    fit.set_defaults(func=cmd_fit)

    quant = sub.add_parser("quantize", help="quantize a map and emit grid + stats")
    quant.add_argument("--cb", required=True, help="codebook file")
    quant.add_argument("--input", help="binary PGM image")
    quant.add_argument("--synthetic", help="correlated: map spec")
    quant.add_argument("--beta", type=int, default=1, help="interpolation scale")
    quant.add_argument("--seed", type=int, default=0)
    quant.add_argument("--out", required=True, help="output grid file")
    quant.add_argument("--stats", help="output JSON stats file")
    quant.set_defaults(func=cmd_quantize)

    deq = sub.add_parser("dequantize", help="reconstruct a map from a grid")
    deq.add_argument("--cb", required=True)
    deq.add_argument("--grid", required=True)
    deq.add_argument("--beta", type=int, default=1,
                     help="pool the grid back down by this factor")
    deq.add_argument("--seed", type=int, default=0)
    deq.add_argument("--out", help="output PGM (single-channel maps only)")
    deq.add_argument("--ref", help="reference image; prints reconstruction mse")
    deq.set_defaults(func=cmd_dequantize)

    tr = sub.add_parser("train", help="train the linear autoencoder + codebook")
    tr.add_argument("--input", help="binary PGM image (trains on patches)")
    tr.add_argument("--synthetic", default=BUNDLED_TRAIN_SPEC,
                    help="inline dataset spec (default: bundled mixture)")
    tr.add_argument("--patch", type=int, default=4, help="patch size for PGM input")
    tr.add_argument("--K", type=int, default=8)
    tr.add_argument("--dstar", type=int, default=None)
    tr.add_argument("--m", type=int, default=2)
    tr.add_argument("--dlat", type=int, default=None, help="latent dimension")
    tr.add_argument("--metric", choices=["l2", "cosine"], default="l2")
    tr.add_argument("--mu", type=float, default=0.25)
    tr.add_argument("--lr", type=float, default=0.05)
    tr.add_argument("--steps", type=int, default=200)
    tr.add_argument("--batch", type=int, default=32)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--codebook-learning", choices=["gradient", "ema"],
                    default="gradient")
    tr.add_argument("--reactivate-every", type=int, default=0)
    tr.add_argument("--log", help="loss log file (default: stdout)")
    tr.add_argument("--out-cb", help="save the trained codebook here")
    tr.set_defaults(func=cmd_train)

    cost = sub.add_parser("cost", help="print storage/compute costs for configs")
    cost.add_argument("--config", action="append", required=True,
                      help="KxDSTAR[:m=M]; repeatable")
    cost.add_argument("--hw", default="8x8", help="map size HxW")
    cost.set_defaults(func=cmd_cost)

    bench = sub.add_parser("bench", help="time VQ vs PQ vs LooC at matched capacity")
    bench.add_argument("--synthetic", default="mixture:n=2048,d=8,c=16")
    bench.add_argument("--input", help="binary PGM image")
    bench.add_argument("--K", type=int, default=64)
    bench.add_argument("--dstar", type=int, default=None)
    bench.add_argument("--m", type=int, default=2)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (CodecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LoocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
