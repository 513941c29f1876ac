"""Desk-scale training of a linear autoencoder around the quantizer.

The loss is reconstruction + codebook + mu * commitment, with stop-gradient
semantics realized as explicit routing: the reconstruction gradient reaches
the encoder straight through the quantizer (as if the quantized latents
were the latents), the codebook term moves only codevectors, and the
commitment term moves only the encoder. GradPieces encodes that routing
structurally; there is no decoder-from-commitment or codebook-from-
reconstruction field at all.

Everything runs in float64 with plain SGD, so trajectories are bit-exact
per seed and gradients can be checked against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import kernels
from .codebook import ReactivationPolicy, _ema_update_arrays, reactivate_dead, usage_fraction
from .core import Codebook, Metric, QuantConfig
from .errors import (
    DimensionMismatchError,
    LengthMismatchError,
    LoocError,
    NonFiniteLossError,
)

# term -> parameter groups receiving its gradient (the stop-gradient contract)
GRADIENT_ROUTING = {
    "recon": ("encoder", "decoder"),
    "codebook": ("codebook",),
    "commit": ("encoder",),
}


class CodebookLearning(str, Enum):
    GRADIENT_LOSS = "gradient"
    EMA = "ema"


@dataclass(frozen=True)
class LinearAE:
    """Affine encoder/decoder pair: x -> x @ enc_w + enc_b -> decode back."""

    enc_w: np.ndarray
    enc_b: np.ndarray
    dec_w: np.ndarray
    dec_b: np.ndarray

    def __post_init__(self) -> None:
        for name in ("enc_w", "enc_b", "dec_w", "dec_b"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            if not np.isfinite(arr).all():
                raise LoocError(f"{name} contains NaN or Inf")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        d_in, d_lat = self.enc_w.shape
        if self.enc_b.shape != (d_lat,) or self.dec_w.shape != (d_lat, d_in) \
                or self.dec_b.shape != (d_in,):
            raise DimensionMismatchError("inconsistent encoder/decoder shapes")

    @property
    def d_in(self) -> int:
        return self.enc_w.shape[0]

    @property
    def d_lat(self) -> int:
        return self.enc_w.shape[1]

    @classmethod
    def init(cls, d_in: int, d_lat: int, seed: int, scale: float = 1.0) -> "LinearAE":
        rng = np.random.default_rng(seed)
        return cls(
            enc_w=rng.normal(0.0, scale / np.sqrt(d_in), (d_in, d_lat)),
            enc_b=np.zeros(d_lat),
            dec_w=rng.normal(0.0, scale / np.sqrt(d_lat), (d_lat, d_in)),
            dec_b=np.zeros(d_in),
        )

    def encode(self, x: np.ndarray) -> np.ndarray:
        return x @ self.enc_w + self.enc_b

    def decode(self, z: np.ndarray) -> np.ndarray:
        return z @ self.dec_w + self.dec_b


@dataclass(frozen=True)
class TrainConfig:
    lr: float
    steps: int
    batch: int
    mu: float = 0.25
    seed: int = 0
    codebook_learning: CodebookLearning = CodebookLearning.GRADIENT_LOSS
    reactivate_every: int = 0  # 0 disables reactivation
    policy: ReactivationPolicy = ReactivationPolicy()

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise LoocError("lr must be positive")
        if self.steps < 1 or self.batch < 1:
            raise LoocError("steps and batch must be positive")
        if self.mu < 0:
            raise LoocError("mu must be non-negative")
        if self.reactivate_every < 0:
            raise LoocError("reactivate_every must be >= 0")
        if not isinstance(self.codebook_learning, CodebookLearning):
            object.__setattr__(
                self, "codebook_learning", CodebookLearning(self.codebook_learning)
            )


@dataclass(frozen=True)
class LossTerms:
    recon: float
    codebook: float
    commit: float
    total: float


@dataclass(frozen=True)
class LossRecord:
    step: int
    recon: float
    codebook: float
    commit: float
    total: float
    usage: float

    def csv_line(self) -> str:
        return (
            f"{self.step},{self.recon!r},{self.codebook!r},"
            f"{self.commit!r},{self.total!r},{self.usage!r}"
        )


LOSS_LOG_HEADER = "step,recon,codebook,commit,total,usage"


def loss_terms(x, x_hat, z, z_hat, mu: float) -> LossTerms:
    """Evaluate the three loss terms for one example (or one batch, rowwise).

    recon = ||x - x_hat||^2, codebook = ||z - z_hat||^2 (routed to the
    codebook only), commit = mu * ||z - z_hat||^2 (routed to the encoder
    only). Numerically the codebook and commitment terms differ only by
    the mu factor; the stop-gradient distinction is a routing contract,
    not a value difference. 2-d inputs are averaged over rows.
    """
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    z_hat = np.asarray(z_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise LengthMismatchError("x and x_hat must have the same shape")
    if z.shape != z_hat.shape:
        raise LengthMismatchError("z and z_hat must have the same shape")
    rows = x.shape[0] if x.ndim == 2 else 1
    recon = float(((x - x_hat) ** 2).sum() / rows)
    quant = float(((z - z_hat) ** 2).sum() / rows)
    commit = mu * quant
    return LossTerms(recon, quant, commit, recon + quant + commit)


@dataclass(frozen=True)
class GradPieces:
    """Per-term gradients; the field set is the routing table made concrete."""

    enc_w_recon: np.ndarray
    enc_b_recon: np.ndarray
    dec_w_recon: np.ndarray
    dec_b_recon: np.ndarray
    enc_w_commit: np.ndarray
    enc_b_commit: np.ndarray
    codebook: np.ndarray

    @property
    def enc_w(self) -> np.ndarray:
        return self.enc_w_recon + self.enc_w_commit

    @property
    def enc_b(self) -> np.ndarray:
        return self.enc_b_recon + self.enc_b_commit


def _quantize_batch(z: np.ndarray, cb: Codebook, qcfg: QuantConfig):
    b, d_lat = z.shape
    ds = qcfg.d_star(d_lat)
    if cb.d_star != ds:
        raise DimensionMismatchError(
            f"codebook dimension {cb.d_star} != segment dimension {ds}"
        )
    segs = z.reshape(b * qcfg.m, ds).astype(np.float32)
    idx, _ = kernels.assign(segs, cb.vectors, qcfg.metric)
    z_hat = cb.vectors[idx].astype(np.float64).reshape(b, d_lat)
    return idx.astype(np.int64), z_hat


def _gradients(
    ae: LinearAE, x: np.ndarray, z: np.ndarray, z_hat: np.ndarray,
    idx: np.ndarray, k: int, mu: float,
) -> GradPieces:
    b, d_lat = z.shape
    ds = z_hat.size // idx.size
    x_hat = ae.decode(z_hat)
    g_xhat = 2.0 * (x_hat - x) / b
    g_z_recon = g_xhat @ ae.dec_w.T  # straight-through: as if z_hat == z
    g_z_commit = 2.0 * mu * (z - z_hat) / b
    g_zhat_cb = (2.0 * (z_hat - z) / b).reshape(-1, ds)
    cb_grad = np.zeros((k, ds), dtype=np.float64)
    np.add.at(cb_grad, idx, g_zhat_cb)
    return GradPieces(
        enc_w_recon=x.T @ g_z_recon,
        enc_b_recon=g_z_recon.sum(axis=0),
        dec_w_recon=z_hat.T @ g_xhat,
        dec_b_recon=g_xhat.sum(axis=0),
        enc_w_commit=x.T @ g_z_commit,
        enc_b_commit=g_z_commit.sum(axis=0),
        codebook=cb_grad,
    )


def train_step(
    ae: LinearAE,
    cb: Codebook,
    batch: np.ndarray,
    cfg: TrainConfig,
    qcfg: QuantConfig,
    step: int = 0,
) -> tuple[LinearAE, Codebook, LossRecord]:
    """One SGD step over a batch of flat input vectors.

    Forward: encode, quantize each latent compositionally, decode. The
    encoder receives the straight-through reconstruction gradient plus the
    commitment gradient; the decoder the reconstruction gradient; the
    codebook either its loss-term gradient or an EMA move toward assigned
    segments, per cfg.codebook_learning. Aborts with NonFiniteLossError if
    the total loss diverges.
    """
    x = np.ascontiguousarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DimensionMismatchError("batch must be a non-empty (b, d_in) array")
    if x.shape[1] != ae.d_in:
        raise DimensionMismatchError(
            f"batch dimension {x.shape[1]} != encoder input {ae.d_in}"
        )
    z = ae.encode(x)
    idx, z_hat = _quantize_batch(z, cb, qcfg)
    x_hat = ae.decode(z_hat)
    terms = loss_terms(x, x_hat, z, z_hat, cfg.mu)
    if not np.isfinite(terms.total):
        raise NonFiniteLossError(f"total loss is {terms.total} at step {step}")
    grads = _gradients(ae, x, z, z_hat, idx, cb.k, cfg.mu)

    lr = cfg.lr
    new_ae = LinearAE(
        enc_w=ae.enc_w - lr * grads.enc_w,
        enc_b=ae.enc_b - lr * grads.enc_b,
        dec_w=ae.dec_w - lr * grads.dec_w_recon,
        dec_b=ae.dec_b - lr * grads.dec_b_recon,
    )

    segs = z.reshape(-1, cb.d_star).astype(np.float32)
    hits = np.bincount(idx, minlength=cb.k).astype(np.int64)
    if cfg.codebook_learning is CodebookLearning.GRADIENT_LOSS:
        vectors = cb.vectors.astype(np.float64) - lr * grads.codebook
        decay = cfg.policy.decay
        new_cb = Codebook(
            vectors=vectors.astype(np.float32),
            usage_count=cb.usage_count + hits,
            usage_ema=decay * cb.usage_ema + (1.0 - decay) * hits,
        )
    else:
        new_cb = _ema_update_arrays(cb, idx, segs, cfg.policy.decay)

    if cfg.reactivate_every > 0 and (step + 1) % cfg.reactivate_every == 0:
        new_cb, _ = reactivate_dead(
            new_cb, segs, cfg.policy, seed=cfg.seed * 1_000_003 + step + 1
        )

    record = LossRecord(
        step=step,
        recon=terms.recon,
        codebook=terms.codebook,
        commit=terms.commit,
        total=terms.total,
        usage=usage_fraction(new_cb),
    )
    return new_ae, new_cb, record


def train(
    data: np.ndarray,
    k: int,
    cfg: TrainConfig,
    qcfg: QuantConfig,
    d_lat: int | None = None,
) -> tuple[LinearAE, Codebook, list[LossRecord]]:
    """Full training run: init AE and codebook, then cfg.steps SGD steps.

    The codebook seeds from the initial encoder's view of the data, which
    keeps early quantization errors commensurate with the latents. Batches
    are drawn with replacement from a seed-pinned generator, so the whole
    trajectory is deterministic.
    """
    from .codebook import codebook_init

    x = np.ascontiguousarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DimensionMismatchError("training data must be a non-empty (n, d) array")
    d_lat = d_lat or x.shape[1]
    ds = qcfg.d_star(d_lat)
    rng = np.random.default_rng(cfg.seed)
    ae = LinearAE.init(x.shape[1], d_lat, seed=cfg.seed)
    z0 = ae.encode(x).reshape(-1, ds).astype(np.float32)
    cb = codebook_init(k, ds, z0, seed=cfg.seed)
    records: list[LossRecord] = []
    for step in range(1, cfg.steps + 1):
        batch = x[rng.integers(0, x.shape[0], size=cfg.batch)]
        ae, cb, record = train_step(ae, cb, batch, cfg, qcfg, step=step)
        records.append(record)
    return ae, cb, records


def grad_check(
    ae: LinearAE,
    cb: Codebook,
    x,
    qcfg: QuantConfig,
    mu: float = 0.25,
    step_size: float = 1e-4,
) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Code assignments are frozen at their current values (the quantizer is
    piecewise constant, so freezing makes the loss locally smooth) and the
    finite-difference surrogate respects the stop-gradient routing: the
    decoder input moves with the latents (straight-through), the codebook
    term sees constant latents, and the commitment term sees constant
    quantized latents. Only encoder/decoder parameters are checked; under
    EMA codebook learning the codebook is not a gradient at all, and under
    the gradient-loss mode its routed gradient intentionally excludes the
    decoder path, so finite differences do not apply to it either.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    z0 = ae.encode(x)
    idx, z_hat0 = _quantize_batch(z0, cb, qcfg)
    delta = z_hat0 - z0
    b = x.shape[0]

    def surrogate(cand: LinearAE) -> float:
        z = cand.encode(x)
        x_hat = cand.decode(z + delta)
        recon = ((x - x_hat) ** 2).sum() / b
        quant = ((z0 - z_hat0) ** 2).sum() / b
        commit = mu * ((z - z_hat0) ** 2).sum() / b
        return float(recon + quant + commit)

    grads = _gradients(ae, x, z0, z_hat0, idx, cb.k, mu)
    analytic = {
        "enc_w": grads.enc_w,
        "enc_b": grads.enc_b,
        "dec_w": grads.dec_w_recon,
        "dec_b": grads.dec_b_recon,
    }
    worst = 0.0
    for name, grad in analytic.items():
        base = getattr(ae, name)
        flat_grad = np.asarray(grad, dtype=np.float64).reshape(-1)
        for pos in range(base.size):
            bumped = base.copy()
            bumped_flat = bumped.reshape(-1)
            orig = bumped_flat[pos]
            bumped_flat[pos] = orig + step_size
            hi = surrogate(replace(ae, **{name: bumped}))
            bumped_flat[pos] = orig - step_size
            lo = surrogate(replace(ae, **{name: bumped}))
            fd = (hi - lo) / (2.0 * step_size)
            a = flat_grad[pos]
            err = abs(a - fd) / max(abs(a), abs(fd), 1e-6)
            worst = max(worst, err)
    return worst
