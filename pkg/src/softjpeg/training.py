"""Patch ingestion, Adam with polynomial LR decay, the training loop and
checkpointing, plus evaluation sweeps against the baseline codec."""

import json
import os
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from . import pipeline as pl
from .autodiff import Tensor, load_tensors, save_tensors
from .codec import bits_per_pixel, decode_baseline, encode_baseline, read_ppm, tables_for_quality
from .editor import stem_forward
from .losses import CSV_HEADER, LossConfig, loss_terms, msssim, msssim_db, psnr, ssim
from .losses import mse as mse_metric


@dataclass
class TrainConfig:
    steps: int = 200
    batch_size: int = 32
    patch_size: int = 256
    num_patches: int = 256
    # lr0 = 1.0 decayed to 1e-8 matches the original recipe but destabilizes
    # the compact stem; 3e-4 is the desk-scale default.  Both run.
    lr0: float = 3e-4
    lr_end: float = 1e-8
    decay_power: float = 1.0
    # Table parameters live at scale s, so their steps are scaled down.
    table_lr_scale: float = 1e-2
    seed: int = 0
    hidden_size: int = 64
    kwta_k: int = 32
    refine_steps: int = 3
    table_scale: float = 1e-5
    # The verbatim cubic correction (r - x)^3 has derivative -3(r - x)^2 <= 0,
    # which reverses every gradient crossing the quantizer and makes the loss
    # climb; training defaults to the ascending (x - r)^3 form.
    soft_round_alternate: bool = True
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if isinstance(self.loss, dict):
            self.loss = LossConfig(**self.loss)
        if self.patch_size % 8:
            raise ValueError(f"patch_size must be a multiple of 8, got {self.patch_size}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not self.lr0 > self.lr_end > 0:
            raise ValueError(f"need lr0 > lr_end > 0, got {self.lr0}, {self.lr_end}")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")

    @property
    def pipeline(self):
        return pl.PipelineConfig(
            hidden_size=self.hidden_size,
            kwta_k=self.kwta_k,
            refine_steps=self.refine_steps,
            table_scale=self.table_scale,
            soft_round_alternate=self.soft_round_alternate,
        )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainingCheckpoint:
    params: pl.PipelineParams
    adam: AdamState
    config: TrainConfig
    step: int


def init_adam(named_params):
    m = {name: np.zeros_like(t.data) for name, t in named_params.items()}
    v = {name: np.zeros_like(t.data) for name, t in named_params.items()}
    return AdamState(m=m, v=v)


def poly_decay(lr0, lr_end, step, total, power):
    """(lr0 - lr_end) * (1 - step/total)^power + lr_end; clamps past the end."""
    if power <= 0:
        raise ValueError(f"decay power must be positive, got {power}")
    if step >= total:
        return lr_end
    frac = 1.0 - step / total
    return (lr0 - lr_end) * frac**power + lr_end


def adam_step(named_params, state, lr, lr_scales=None):
    """Bias-corrected Adam update in place; returns the updated state.

    ``lr_scales`` optionally maps parameter names to multipliers on the
    learning rate (used to keep the table parameters at their own scale).
    Parameters without a gradient are left untouched (their moments decay).
    """
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for name, t in named_params.items():
        g = t.grad
        if g is None:
            g = np.zeros_like(t.data)
        elif not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient for parameter {name!r}")
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        step_lr = lr * (lr_scales.get(name, 1.0) if lr_scales else 1.0)
        t.data -= step_lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


def _list_ppm_files(data_dir):
    names = sorted(n for n in os.listdir(data_dir) if n.lower().endswith(".ppm"))
    return [os.path.join(data_dir, n) for n in names]


def sample_patches(images, patch_size, count, rng):
    """Seeded uniform random crops from a pool of (H, W, 3) arrays."""
    usable = [img for img in images
              if img.shape[0] >= patch_size and img.shape[1] >= patch_size]
    if not usable:
        raise ValueError(f"no images of at least {patch_size}x{patch_size} to crop from")
    patches = []
    for _ in range(count):
        img = usable[rng.integers(len(usable))]
        top = rng.integers(img.shape[0] - patch_size + 1)
        left = rng.integers(img.shape[1] - patch_size + 1)
        patches.append(img[top : top + patch_size, left : left + patch_size].copy())
    return patches


def load_patches(data_dir, patch_size, count, seed):
    """Extract ``count`` random crops from the P6 images in a directory.

    Unreadable or undersized files are skipped with a warning; an empty
    usable set is an error.
    """
    rng = np.random.default_rng(seed)
    images = []
    for path in _list_ppm_files(data_dir):
        try:
            img = read_ppm(path)
        except (OSError, ValueError) as exc:
            warnings.warn(f"skipping {path}: {exc}")
            continue
        if img.shape[0] < patch_size or img.shape[1] < patch_size:
            warnings.warn(f"skipping {path}: smaller than {patch_size}x{patch_size}")
            continue
        images.append(img)
    if not images:
        raise ValueError(f"no usable training images in {data_dir}")
    return sample_patches(images, patch_size, count, rng)


def _table_lr_scales(params, config):
    return {name: config.table_lr_scale for name in params.tables.named()}


def _feature_fn(params, config):
    def features(image_tensor):
        x = ad.scalar_mul(ad.transpose(image_tensor, (0, 3, 1, 2)), 1.0 / 255.0)
        return stem_forward(x, params.stem)

    return features


def train_step(params, config, adam, batch, step):
    """One optimization step on a (B, H, W, 3) uint8 batch.

    Returns a record dict with the loss components and learning rate.
    """
    out = pl.forward(batch, params, config.pipeline, rounding="soft")
    x = Tensor(np.asarray(batch, dtype=np.float64))
    features = _feature_fn(params, config) if config.loss.gamma > 0 else None
    terms = loss_terms(x, out.reconstruction, params.tables, out.scores,
                       config.loss, features)
    for t in params.named().values():
        t.zero_grad()
    ad.backward(terms["total"])
    lr = poly_decay(config.lr0, config.lr_end, step, config.steps, config.decay_power)
    adam_step(params.named(), adam, lr, _table_lr_scales(params, config))
    params.tables.clamp_()
    return {
        "step": step + 1,
        "loss": terms["total"].item(),
        "d": terms["d"].item(),
        "r": terms["r"].item(),
        "al": terms["al"].item(),
        "lr": lr,
    }


def _step_rng(seed, step):
    return np.random.default_rng([seed, step])


def train_on_patches(patches, config, log=None, resume=None, stop_step=None, on_step=None):
    """Run the training loop over a fixed patch pool.

    ``resume`` continues from a TrainingCheckpoint; ``stop_step`` interrupts
    the schedule early (the LR schedule still spans config.steps).  Batches
    are drawn with a per-step seeded RNG, so an interrupted and resumed run
    reproduces the uninterrupted trajectory exactly.  ``on_step(params,
    record)`` runs after every update, for debug-mode invariant checks.
    """
    if resume is not None:
        params, adam, start = resume.params, resume.adam, resume.step
    else:
        params = pl.init_pipeline(config.pipeline, seed=config.seed)
        adam = init_adam(params.named())
        start = 0
    stop = config.steps if stop_step is None else min(stop_step, config.steps)
    pool = np.stack(patches)
    history = []
    for step in range(start, stop):
        rng = _step_rng(config.seed, step)
        batch = pool[rng.integers(len(pool), size=config.batch_size)]
        record = train_step(params, config, adam, batch, step)
        history.append(record)
        if log is not None:
            log("{step},{loss:.6f},{d:.6f},{r:.6f},{al:.6f},{lr:.3e}".format(**record))
        if on_step is not None:
            on_step(params, record)
    return TrainingCheckpoint(params, adam, config, stop), history


def train(config, data_dir, out_path, log=None):
    """Dataset-driven training: crop patches, run the loop, save a checkpoint."""
    patches = load_patches(data_dir, config.patch_size, config.num_patches, config.seed)
    checkpoint, history = train_on_patches(patches, config, log=log)
    save_checkpoint(checkpoint, out_path)
    return checkpoint, history


# --- checkpoint serialization ------------------------------------------------
#
# A checkpoint file is a named-tensor container (parameters, then Adam
# moments under adam.m.* / adam.v.*) followed by a JSON trailer with the
# config snapshot and counters.

_CHECKPOINT_FORMAT = "softjpeg-checkpoint-v1"


def checkpoint_bytes(ckpt):
    named = {name: t.data for name, t in ckpt.params.named().items()}
    for name, m in ckpt.adam.m.items():
        named[f"adam.m.{name}"] = m
    for name, v in ckpt.adam.v.items():
        named[f"adam.v.{name}"] = v
    trailer = {
        "format": _CHECKPOINT_FORMAT,
        "step": ckpt.step,
        "adam": {
            "step": ckpt.adam.step,
            "beta1": ckpt.adam.beta1,
            "beta2": ckpt.adam.beta2,
            "eps": ckpt.adam.eps,
        },
        "config": ckpt.config.to_dict(),
    }
    return save_tensors(named) + json.dumps(trailer, sort_keys=True).encode("utf-8")


def checkpoint_from_bytes(blob):
    named, end = load_tensors(blob)
    trailer = json.loads(blob[end:].decode("utf-8"))
    if trailer.get("format") != _CHECKPOINT_FORMAT:
        raise ValueError(f"not a {_CHECKPOINT_FORMAT} checkpoint")
    config = TrainConfig.from_dict(trailer["config"])
    params = pl.params_from_named(named, config.pipeline)
    adam = AdamState(
        m={n: named[f"adam.m.{n}"] for n in params.named()},
        v={n: named[f"adam.v.{n}"] for n in params.named()},
        step=trailer["adam"]["step"],
        beta1=trailer["adam"]["beta1"],
        beta2=trailer["adam"]["beta2"],
        eps=trailer["adam"]["eps"],
    )
    return TrainingCheckpoint(params, adam, config, trailer["step"])


def save_checkpoint(ckpt, path):
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(ckpt))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return checkpoint_from_bytes(fh.read())


# --- evaluation ----------------------------------------------------------------


def _match_baseline_quality(image, target_bpp):
    """Binary-search the quality whose baseline bpp is nearest the target."""
    h, w = image.shape[:2]

    def bpp_at(q):
        return bits_per_pixel(encode_baseline(image, tables_for_quality(q)), w, h)

    lo, hi = 1, 100
    bpp_lo, bpp_hi = bpp_at(lo), bpp_at(hi)
    if target_bpp <= bpp_lo:
        return lo, bpp_lo
    if target_bpp >= bpp_hi:
        return hi, bpp_hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        bpp_mid = bpp_at(mid)
        if bpp_mid < target_bpp:
            lo, bpp_lo = mid, bpp_mid
        else:
            hi, bpp_hi = mid, bpp_mid
    if abs(bpp_lo - target_bpp) <= abs(bpp_hi - target_bpp):
        return lo, bpp_lo
    return hi, bpp_hi


def _metric_row(image_id, bpp, original, decoded):
    err = mse_metric(np.asarray(original, float), np.asarray(decoded, float))
    ms = msssim(original, decoded)
    return {
        "image_id": image_id,
        "bpp": bpp,
        "psnr_db": psnr(original, decoded),
        "ssim": ssim(original, decoded),
        "msssim": ms,
        "msssim_db": msssim_db(ms),
        "mse": err,
    }


def evaluate(checkpoint, data_dir, csv_out=None):
    """Neural-pipeline and bpp-matched baseline metrics for every image.

    Returns the row dicts (two per image); optionally writes them as CSV in
    the ``image_id,bpp,psnr_db,ssim,msssim,msssim_db,mse`` schema.
    """
    params, config = checkpoint.params, checkpoint.config
    rows = []
    for path in _list_ppm_files(data_dir):
        name = os.path.splitext(os.path.basename(path))[0]
        image = read_ppm(path)
        out = pl.forward(image, params, config.pipeline, rounding="hard", measure_rate=True)
        recon = np.clip(np.rint(out.reconstruction.data[0]), 0, 255).astype(np.uint8)
        neural_bpp = out.bpp[0]
        rows.append(_metric_row(f"{name}#neural", neural_bpp, image, recon))

        quality, base_bpp = _match_baseline_quality(image, neural_bpp)
        decoded = decode_baseline(encode_baseline(image, tables_for_quality(quality)))
        rows.append(_metric_row(f"{name}#jpeg-q{quality}", base_bpp, image, decoded))

    if csv_out is not None:
        with open(csv_out, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(
                    "{image_id},{bpp:.6f},{psnr_db:.6f},{ssim:.6f},"
                    "{msssim:.6f},{msssim_db:.6f},{mse:.6f}\n".format(**row)
                )
    return rows


def sweep_grid(base_config, grid):
    """Enumerate configs over a {field: [values...]} grid, depth-first."""
    configs = [base_config]
    for name, values in grid.items():
        nxt = []
        for cfg in configs:
            for value in values:
                data = cfg.to_dict()
                if name in LossConfig.__dataclass_fields__:
                    data["loss"] = dict(data["loss"], **{name: value})
                else:
                    data[name] = value
                nxt.append(TrainConfig.from_dict(data))
        configs = nxt
    return configs
