"""Optimization loop for the appearance field.

Each iteration draws a batch of supervision tuples (uniform with
replacement, seeded) and applies the L1 color loss. Once the edge weight
ramps above zero, a random patch of a random target view is rendered
through the current field and the difference-of-Gaussians loss against
the corresponding patch of the reference image injects additional
per-pixel gradients. A single Adam step combines both terms.

Runs are reproducible bit-exactly for fixed seeds (single-threaded).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .field import (
    FieldConfig,
    FieldParameters,
    add_gradients,
    adam_step,
    field_backward,
    field_forward,
    init_adam,
    init_field,
    save_checkpoint,
)
from .filtering import (  # noqa: F401  (module-level API of the training stage)
    GaussianKernel,
    LUMA_WEIGHTS,
    blur,
    blur_adjoint,
    dog_loss,
    gaussian_kernel,
    grayscale,
)
from .scene import GBufferView

EDGE_REFERENCE_MODES = ("transfer", "geometry")


@dataclass
class TrainConfig:
    total_iters: int = 60000
    batch_size: int = 512
    lr: float = 1e-4
    lambda_max: float = 50.0
    lambda_start_frac: float = 0.15
    lambda_ramp_end_frac: float = 0.5
    sigma1: float = 1.0
    sigma2: float = 1.6
    edge_patch: int = 64
    edge_period: int = 1
    edge_reference: str = "transfer"
    seed: int = 0
    field: FieldConfig = dataclass_field(default_factory=FieldConfig)

    def __post_init__(self):
        errors = train_config_errors(self)
        if errors:
            raise ValueError("; ".join(errors))


def train_config_errors(cfg: TrainConfig) -> list[str]:
    """Invariant violations of a training config, empty when valid."""
    errors = []
    if cfg.total_iters < 1:
        errors.append("total_iters must be >= 1")
    if cfg.batch_size < 1:
        errors.append("batch_size must be >= 1")
    if cfg.lr <= 0:
        errors.append("lr must be > 0")
    if not 0.0 <= cfg.lambda_start_frac <= cfg.lambda_ramp_end_frac <= 1.0:
        errors.append(
            "lambda_start_frac and lambda_ramp_end_frac must satisfy "
            "0 <= lambda_start_frac <= lambda_ramp_end_frac <= 1"
        )
    if cfg.sigma1 <= 0:
        errors.append("sigma1 must be > 0")
    if cfg.sigma2 <= cfg.sigma1:
        errors.append("sigma2 must exceed sigma1")
    if cfg.edge_patch < 1:
        errors.append("edge_patch must be >= 1")
    if cfg.edge_period < 1:
        errors.append("edge_period must be >= 1")
    if cfg.edge_reference not in EDGE_REFERENCE_MODES:
        errors.append("edge_reference must be 'transfer' or 'geometry'")
    if cfg.lambda_max < 0:
        errors.append("lambda_max must be >= 0")
    return errors


def lambda_schedule(iteration: int, cfg: TrainConfig) -> float:
    """Edge-loss weight at `iteration`: zero before the start fraction of
    training, linear ramp to `lambda_max` at the ramp end, constant after.
    Non-decreasing and continuous."""
    if not 0 <= iteration < cfg.total_iters:
        raise ValueError("iteration out of range")
    t = iteration / cfg.total_iters
    start, end = cfg.lambda_start_frac, cfg.lambda_ramp_end_frac
    if t < start:
        return 0.0
    if t >= end or end == start:
        return cfg.lambda_max
    return cfg.lambda_max * (t - start) / (end - start)


def render_field(
    params: FieldParameters, view: GBufferView, chunk: int = 16384
) -> np.ndarray:
    """Deferred-shading render: query the field at the view's covered
    (position, normal, view direction) pixels; background stays 0."""
    mask = view.coverage_mask()
    out = np.zeros((view.height, view.width, 3))
    if not mask.any():
        return out
    ys, xs = np.nonzero(mask)
    x = view.position[ys, xs]
    n = view.normal[ys, xs]
    w = view.view_dir[ys, xs]
    colors = np.empty((ys.size, 3))
    for start in range(0, ys.size, chunk):
        sl = slice(start, start + chunk)
        colors[sl] = field_forward(params, x[sl], n[sl], w[sl])
    out[ys, xs] = colors
    return out


@dataclass
class TrainResult:
    params: FieldParameters
    iterations: np.ndarray
    color_loss: np.ndarray
    edge_loss: np.ndarray
    lambda_weight: np.ndarray


def _edge_patch_origin(rng, height, width, size):
    ph = min(size, height)
    pw = min(size, width)
    y0 = int(rng.integers(0, height - ph + 1))
    x0 = int(rng.integers(0, width - pw + 1))
    return y0, x0, ph, pw


def train(
    samples,
    target_views: list[GBufferView],
    cfg: TrainConfig,
    edge_references: list[np.ndarray] | None = None,
    params: FieldParameters | None = None,
    diagnostic_path=None,
) -> TrainResult:
    """Fit the appearance field to transferred supervision samples.

    `edge_references` supplies the per-view reference images for the edge
    loss in 'transfer' mode (one (H, W, 3) image per target view, e.g.
    from ``correspondence.transfer_image``); 'geometry' mode uses each
    view's own rgb plane. A non-finite loss aborts with a diagnostic
    checkpoint at `diagnostic_path` when given.
    """
    if samples.count == 0:
        raise ValueError("samples must be nonempty")
    if not target_views:
        raise ValueError("need at least one target view")
    if cfg.edge_reference == "transfer" and cfg.lambda_max > 0:
        if edge_references is None or len(edge_references) != len(target_views):
            raise ValueError(
                "edge_reference 'transfer' needs one reference image per target view"
            )

    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    init_seed = int(seeds[0].generate_state(1)[0])
    batch_rng = np.random.default_rng(seeds[1])
    patch_rng = np.random.default_rng(seeds[2])

    if params is None:
        params = init_field(cfg.field, seed=init_seed)
    state = init_adam(params, lr=cfg.lr)

    x_all = samples.position.astype(np.float32)
    n_all = samples.normal.astype(np.float32)
    w_all = samples.view_dir.astype(np.float32)
    c_all = samples.rgb.astype(np.float32)

    ref_gray = None
    if cfg.lambda_max > 0:
        if cfg.edge_reference == "transfer":
            ref_gray = [grayscale(img) for img in edge_references]
        else:
            ref_gray = [grayscale(v.rgb.astype(np.float64)) for v in target_views]

    iters = np.arange(cfg.total_iters)
    color_hist = np.zeros(cfg.total_iters)
    edge_hist = np.zeros(cfg.total_iters)
    lambda_hist = np.zeros(cfg.total_iters)

    for it in range(cfg.total_iters):
        pick = batch_rng.integers(0, samples.count, size=cfg.batch_size)
        color_loss, gw, gb = field_backward(
            params, x_all[pick], n_all[pick], w_all[pick], ref_rgb=c_all[pick]
        )

        lam = lambda_schedule(it, cfg)
        edge_value = 0.0
        if lam > 0.0 and it % cfg.edge_period == 0:
            vi = int(patch_rng.integers(0, len(target_views)))
            view = target_views[vi]
            y0, x0, ph, pw = _edge_patch_origin(
                patch_rng, view.height, view.width, cfg.edge_patch
            )
            win = (slice(y0, y0 + ph), slice(x0, x0 + pw))
            mask = view.coverage_mask()[win]
            if mask.any():
                ys, xs = np.nonzero(mask)
                px = view.position[win][ys, xs]
                pn = view.normal[win][ys, xs]
                pw_dir = view.view_dir[win][ys, xs]
                pred = field_forward(params, px, pn, pw_dir)
                patch = np.zeros((ph, pw, 3))
                patch[ys, xs] = pred
                edge_value, gray_grad = dog_loss(
                    grayscale(patch), ref_gray[vi][win], cfg.sigma1, cfg.sigma2
                )
                rgb_grad = lam * gray_grad[ys, xs, None] * LUMA_WEIGHTS[None, :]
                _, egw, egb = field_backward(
                    params, px, pn, pw_dir, output_grad=rgb_grad
                )
                gw, gb = add_gradients((gw, gb), (egw, egb))

        total = color_loss + lam * edge_value
        if not np.isfinite(total):
            if diagnostic_path is not None:
                save_checkpoint(params, diagnostic_path)
            raise RuntimeError(
                f"non-finite loss at iteration {it}"
                + (f"; diagnostic checkpoint at {diagnostic_path}" if diagnostic_path else "")
            )

        state, params = adam_step(state, params, gw, gb)
        color_hist[it] = color_loss
        edge_hist[it] = edge_value
        lambda_hist[it] = lam

    return TrainResult(
        params=params,
        iterations=iters,
        color_loss=color_hist,
        edge_loss=edge_hist,
        lambda_weight=lambda_hist,
    )
