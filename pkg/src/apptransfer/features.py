"""Per-pixel descriptors and the similarity tooling built on them.

The built-in descriptor is a deterministic, handcrafted stand-in for
learned feature extractors: it concatenates the surface normal, the
bounding-box-normalized position, the hue/saturation of the shaded color
and multi-scale difference-of-Gaussian responses of the luminance.
Externally produced descriptor maps of any dimension can be ingested
through the FEAT container and used interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filtering import blur, gaussian_kernel, grayscale
from .scene import GBufferView


@dataclass
class FeatureMap:
    """Dense per-pixel descriptors; `data` is (H, W, dim) float32."""

    data: np.ndarray
    provenance: str = "external"

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError("feature data must be (H, W, dim)")
        if self.data.shape[2] < 1:
            raise ValueError("dim must be >= 1")
        if not np.isfinite(self.data).all():
            raise ValueError("feature data must be finite")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass
class DescriptorConfig:
    """Component groups of the built-in descriptor.

    `scales` are Gaussian sigmas for the multi-scale luminance responses;
    consecutive scales contribute len(scales)-1 channels.
    """

    scales: tuple[float, ...] = (1.0, 2.0, 4.0)
    include_appearance: bool = True
    include_normal: bool = True
    include_relative_position: bool = True

    def __post_init__(self):
        scales = tuple(self.scales)
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be strictly increasing")
        self.scales = scales
        groups = (
            self.include_appearance
            or self.include_normal
            or self.include_relative_position
            or len(scales) >= 2
        )
        if not groups:
            raise ValueError("at least one descriptor group must be enabled")

    @property
    def dim(self) -> int:
        d = 0
        if self.include_normal:
            d += 3
        if self.include_relative_position:
            d += 3
        if self.include_appearance:
            d += 2
        d += max(len(self.scales) - 1, 0)
        return d


def rgb_to_hue_saturation(rgb: np.ndarray) -> np.ndarray:
    """Hue in [0,1) and saturation in [0,1] of an (..., 3) rgb array."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    span = maxc - minc
    safe_span = np.where(span > 0, span, 1.0)
    hue = np.zeros_like(maxc)
    sel = (maxc == r) & (span > 0)
    hue = np.where(sel, ((g - b) / safe_span) % 6.0, hue)
    sel = (maxc == g) & (span > 0) & (maxc != r)
    hue = np.where(sel, (b - r) / safe_span + 2.0, hue)
    sel = (maxc == b) & (span > 0) & (maxc != r) & (maxc != g)
    hue = np.where(sel, (r - g) / safe_span + 4.0, hue)
    hue = hue / 6.0
    sat = np.where(maxc > 0, span / np.where(maxc > 0, maxc, 1.0), 0.0)
    return np.stack([hue, sat], axis=-1)


def builtin_descriptor(
    view: GBufferView, cfg: DescriptorConfig | None = None
) -> FeatureMap:
    """Handcrafted per-pixel descriptor of a rendered view.

    Covered pixels get the concatenation of the enabled groups; background
    pixels get the zero vector. Raises if the view has no coverage.
    """
    cfg = cfg or DescriptorConfig()
    mask = view.coverage_mask()
    if not mask.any():
        raise ValueError("empty view")

    parts = []
    if cfg.include_normal:
        parts.append(view.normal.astype(np.float64))
    if cfg.include_relative_position:
        pos = view.position.astype(np.float64)
        covered = pos[mask]
        lo = covered.min(axis=0)
        hi = covered.max(axis=0)
        extent = np.maximum(hi - lo, 1e-12)
        parts.append((pos - lo) / extent)
    if cfg.include_appearance:
        parts.append(rgb_to_hue_saturation(view.rgb))
    if len(cfg.scales) >= 2:
        luma = grayscale(view.rgb)
        blurred = [blur(luma, gaussian_kernel(s)) for s in cfg.scales]
        for lo_img, hi_img in zip(blurred, blurred[1:]):
            parts.append((lo_img - hi_img)[..., None])

    data = np.concatenate(parts, axis=-1)
    data[~mask] = 0.0
    return FeatureMap(data=data.astype(np.float32), provenance="builtin-v1")


def cosine_similarity(f1: np.ndarray, f2: np.ndarray) -> float:
    """Cosine of the angle between two descriptors, in [-1, 1]."""
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    n1 = np.linalg.norm(f1)
    n2 = np.linalg.norm(f2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("zero-norm descriptor")
    return float(np.dot(f1, f2) / (n1 * n2))


def feature_pixel(
    x: int, y: int, gbuf_size: tuple[int, int], feat_size: tuple[int, int]
) -> tuple[int, int]:
    """Nearest-pixel index of G-buffer pixel (x, y) in a feature map of a
    possibly different resolution. Sizes are (width, height)."""
    gw, gh = gbuf_size
    fw, fh = feat_size
    return (x * fw // gw, y * fh // gh)


def affinity_heatmap(
    query: tuple[int, int],
    query_map: FeatureMap,
    other: FeatureMap,
    mask_background: bool = True,
) -> np.ndarray:
    """Per-pixel similarity of `other` to the descriptor at `query`
    (an (x, y) pixel of `query_map`), clamped to [0, 1] for writing.

    Background (zero-norm) pixels of `other` map to 0 when
    `mask_background` is set and raise otherwise.
    """
    qx, qy = query
    q = query_map.data[qy, qx].astype(np.float64)
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise ValueError("uncovered query pixel")

    flat = other.data.reshape(-1, other.dim).astype(np.float64)
    norms = np.linalg.norm(flat, axis=1)
    covered = norms > 0
    if not mask_background and not covered.all():
        raise ValueError("zero-norm descriptor")
    sims = np.zeros(flat.shape[0])
    sims[covered] = (flat[covered] @ q) / (norms[covered] * qn)
    return np.clip(sims, 0.0, 1.0).reshape(other.height, other.width)


def fit_pca(x: np.ndarray, n_components: int = 3):
    """PCA by covariance eigendecomposition with a deterministic sign
    convention (the largest-magnitude loading of each component is made
    positive).

    Returns (mean, components, eigenvalues) with components as columns of
    a (dim, k) matrix, ordered by decreasing eigenvalue, k <= n_components.
    """
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / max(x.shape[0] - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][: min(n_components, x.shape[1])]
    comps = []
    out_vals = []
    for idx in order:
        v = evecs[:, idx].copy()
        j = int(np.argmax(np.abs(v)))
        if v[j] < 0:
            v = -v
        comps.append(v)
        out_vals.append(max(float(evals[idx]), 0.0))
    return mean, np.stack(comps, axis=1), np.asarray(out_vals)


def pca_visualization(maps: list[FeatureMap]) -> list[np.ndarray]:
    """First three principal coordinates of the covered descriptors of all
    maps, rescaled per component to [0, 1], as one rgb image per map.

    The PCA is fitted jointly so corresponding regions get corresponding
    colors. Missing or degenerate components render as constant 0.5;
    background pixels are 0.
    """
    if not maps:
        raise ValueError("need at least one feature map")
    dim = maps[0].dim
    if any(m.dim != dim for m in maps):
        raise ValueError("feature maps must share a descriptor dimension")

    flats = [m.data.reshape(-1, dim).astype(np.float64) for m in maps]
    masks = [np.linalg.norm(f, axis=1) > 0 for f in flats]
    gathered = np.concatenate([f[k] for f, k in zip(flats, masks)], axis=0)
    if gathered.shape[0] < 3:
        raise ValueError("need at least 3 covered pixels across the maps")

    mean, comps, evals = fit_pca(gathered, n_components=3)
    tol = 1e-12 * max(1.0, float(evals.max(initial=0.0)))
    n_comp = comps.shape[1]

    joint = (gathered - mean) @ comps
    los = joint.min(axis=0)
    his = joint.max(axis=0)

    images = []
    for flat, mask, fmap in zip(flats, masks, maps):
        out = np.zeros((flat.shape[0], 3))
        coords = (flat[mask] - mean) @ comps
        for c in range(3):
            if c >= n_comp or evals[c] <= tol or his[c] - los[c] <= 1e-12:
                out[mask, c] = 0.5
            else:
                out[mask, c] = (coords[:, c] - los[c]) / (his[c] - los[c])
        images.append(out.reshape(fmap.height, fmap.width, 3))
    return images
