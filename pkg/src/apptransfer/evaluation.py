"""Image metrics, dataset splits and the bootstrapped multiview
consistency protocol.

Bootstrapping measures consistency without ground truth: render the
trained field on the train views, fit a fresh field on those renders
(geometry read from the train-view G-buffers, colors from the renders
only), then compare the two fields' renders on the held-out test views.
View-inconsistent colors cannot be explained by any single field over
fixed geometry, so they depress the bootstrapped scores.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .correspondence import TransferSamples
from .field import FieldParameters
from .filtering import grayscale
from .scene import CameraPose, GBufferView
from .training import TrainConfig, render_field, train

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 8
SSIM_C1 = (0.01) ** 2
SSIM_C2 = (0.03) ** 2


@dataclass
class SplitSpec:
    total: int = 200
    train: int = 100
    val: int = 20
    test: int = 80
    seed: int = 0

    def __post_init__(self):
        if min(self.total, self.train, self.val, self.test) < 0:
            raise ValueError("split sizes must be non-negative")
        if self.train + self.val + self.test != self.total:
            raise ValueError("train + val + test must equal total")


@dataclass
class MetricReport:
    protocol: str
    view_indices: list[int]
    psnr_db: list[float]
    ssim: list[float]

    @property
    def psnr_mean(self) -> float:
        return float(np.mean(self.psnr_db))

    @property
    def psnr_min(self) -> float:
        return float(np.min(self.psnr_db))

    @property
    def ssim_mean(self) -> float:
        return float(np.mean(self.ssim))

    @property
    def ssim_min(self) -> float:
        return float(np.min(self.ssim))

    def summary(self) -> str:
        return (
            f"{self.protocol}: {len(self.view_indices)} views, "
            f"psnr mean {self.psnr_mean:.2f} dB (min {self.psnr_min:.2f}), "
            f"ssim mean {self.ssim_mean:.4f} (min {self.ssim_min:.4f})"
        )


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; zero error caps at 99 dB."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"size mismatch: {a.shape} vs {b.shape}")
    mse = float(((a - b) ** 2).mean())
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak**2 / mse), PSNR_CAP_DB)


def _window_mean(x: np.ndarray) -> np.ndarray:
    # mean over all fully interior WINDOW x WINDOW patches (stride 1)
    h, w = x.shape
    half = SSIM_WINDOW // 2
    filtered = ndimage.uniform_filter(x, size=SSIM_WINDOW, mode="constant")
    return filtered[half : h - SSIM_WINDOW + half + 1, half : w - SSIM_WINDOW + half + 1]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local structural similarity over 8x8 sliding windows.

    Inputs are grayscale; rgb images are converted via Rec. 709 luma.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 3:
        a = grayscale(a)
    if b.ndim == 3:
        b = grayscale(b)
    if a.shape != b.shape:
        raise ValueError(f"size mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels on each side")

    mu_a = _window_mean(a)
    mu_b = _window_mean(b)
    var_a = _window_mean(a * a) - mu_a**2
    var_b = _window_mean(b * b) - mu_b**2
    cov = _window_mean(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float((num / den).mean())


def make_split(
    spec: SplitSpec, poses: list[CameraPose]
) -> tuple[list[CameraPose], list[CameraPose], list[CameraPose]]:
    """Seeded random partition of `poses` into train, val and test lists."""
    if len(poses) != spec.total:
        raise ValueError(f"expected {spec.total} poses, got {len(poses)}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(spec.total)
    train_idx = order[: spec.train]
    val_idx = order[spec.train : spec.train + spec.val]
    test_idx = order[spec.train + spec.val :]
    return (
        [poses[i] for i in train_idx],
        [poses[i] for i in val_idx],
        [poses[i] for i in test_idx],
    )


def split_indices(spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index triples of the partition that ``make_split`` applies."""
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(spec.total)
    return (
        order[: spec.train],
        order[spec.train : spec.train + spec.val],
        order[spec.train + spec.val :],
    )


def direct_metrics(
    rendered: list[np.ndarray],
    references: list[np.ndarray],
    view_indices: list[int] | None = None,
) -> MetricReport:
    """Per-view PSNR/SSIM between rendered images and references."""
    if len(rendered) != len(references):
        raise ValueError("rendered and reference lists must have equal length")
    idx = list(view_indices) if view_indices is not None else list(range(len(rendered)))
    order = np.argsort(idx)
    return MetricReport(
        protocol="direct",
        view_indices=[idx[i] for i in order],
        psnr_db=[psnr(rendered[i], references[i]) for i in order],
        ssim=[ssim(rendered[i], references[i]) for i in order],
    )


def _resample_view(view: GBufferView, rgb: np.ndarray, per_view: int, rng):
    mask = view.coverage_mask()
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return None
    take = min(per_view, xs.size)
    pick = rng.choice(xs.size, size=take, replace=False)
    ys, xs = ys[pick], xs[pick]
    return (
        view.position[ys, xs].astype(np.float64),
        view.normal[ys, xs].astype(np.float64),
        view.view_dir[ys, xs].astype(np.float64),
        rgb[ys, xs].astype(np.float64),
    )


def bootstrap_metrics(
    params: FieldParameters,
    train_views: list[GBufferView],
    test_views: list[GBufferView],
    train_cfg: TrainConfig,
    per_view: int = 5000,
    seed: int = 0,
    view_indices: list[int] | None = None,
) -> MetricReport:
    """Bootstrapped consistency scores of a trained field.

    The fresh field's color supervision comes exclusively from the
    rendered train views; its geometry tuples come from the train-view
    G-buffers. The edge loss is disabled for the refit (the rendered
    images are their own reference).
    """
    if not train_views or not test_views:
        raise ValueError("need nonempty train and test view lists")

    train_renders = [render_field(params, v) for v in train_views]

    rng = np.random.default_rng(seed)
    tuples = []
    for view, render in zip(train_views, train_renders):
        got = _resample_view(view, render, per_view, rng)
        if got is not None:
            tuples.append(got)
    if not tuples:
        raise ValueError("train views have no coverage")
    samples = TransferSamples(
        position=np.concatenate([t[0] for t in tuples]),
        normal=np.concatenate([t[1] for t in tuples]),
        view_dir=np.concatenate([t[2] for t in tuples]),
        rgb=np.concatenate([t[3] for t in tuples]),
    )

    refit_cfg = replace(train_cfg, lambda_max=0.0, seed=seed)
    refit = train(samples, train_views, refit_cfg)

    idx = list(view_indices) if view_indices is not None else list(range(len(test_views)))
    order = np.argsort(idx)
    pairs = [
        (render_field(params, test_views[i]), render_field(refit.params, test_views[i]))
        for i in order
    ]
    return MetricReport(
        protocol="bootstrapped",
        view_indices=[idx[i] for i in order],
        psnr_db=[psnr(a, b) for a, b in pairs],
        ssim=[ssim(a, b) for a, b in pairs],
    )


def composite(fg_rgb: np.ndarray, alpha: np.ndarray, bg_rgb: np.ndarray) -> np.ndarray:
    """Alpha-over compositing: alpha * fg + (1 - alpha) * bg."""
    fg_rgb = np.asarray(fg_rgb, dtype=np.float64)
    bg_rgb = np.asarray(bg_rgb, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if fg_rgb.shape != bg_rgb.shape or alpha.shape != fg_rgb.shape[:2]:
        raise ValueError("size mismatch between layers")
    return alpha[..., None] * fg_rgb + (1.0 - alpha[..., None]) * bg_rgb
