"""Sampling labeled feature point clouds, matching them by descriptor
similarity and assembling the transferred supervision set.

The matching maps every target point to the source point with maximal
cosine similarity, optionally restricted to source points whose
originating view is among the k angularly closest views. The mapping is
intentionally neither bijective nor geometry-consistent; a rough rigid
pre-alignment (yaw grid search over centroid/scale-normalized clouds) is
available for object pairs in different poses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import FeatureMap, feature_pixel
from .scene import CameraPose, GBufferView


@dataclass
class MatchConfig:
    """Sampling and matching defaults for the correspondence stage."""

    views: int = 100
    per_view: int = 5000
    k: int = 10
    prealign: bool = False
    seed: int = 0


@dataclass
class FeaturePointCloud:
    """Sampled covered pixels with their descriptors and labels.

    Arrays are parallel over points: `features` (N, D), the 3-vector
    labels (N, 3), `view_index` (N,) into `view_forwards` (V, 3) and
    `pixel` (N, 2) as (x, y).
    """

    features: np.ndarray
    rgb: np.ndarray
    position: np.ndarray
    normal: np.ndarray
    view_dir: np.ndarray
    view_index: np.ndarray
    pixel: np.ndarray
    view_forwards: np.ndarray
    skipped_views: int = 0

    @property
    def count(self) -> int:
        return self.features.shape[0]

    def bbox_diagonal(self) -> float:
        if self.count == 0:
            return 0.0
        span = self.position.max(axis=0) - self.position.min(axis=0)
        return float(np.linalg.norm(span))


@dataclass
class CorrespondenceMap:
    """For target point j, `source_index[j]` is the matched source point
    and `score[j]` its cosine similarity."""

    source_index: np.ndarray
    score: np.ndarray

    @property
    def count(self) -> int:
        return self.source_index.shape[0]


@dataclass
class TransferSamples:
    """Supervision tuples: target position and normal, source view
    direction and source color."""

    position: np.ndarray
    normal: np.ndarray
    view_dir: np.ndarray
    rgb: np.ndarray

    @property
    def count(self) -> int:
        return self.position.shape[0]


@dataclass
class RigidTransform:
    """x -> scale * R x + translation, mapping target into source space."""

    rotation: np.ndarray
    translation: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-6):
            raise ValueError("rotation must be orthonormal")
        if np.linalg.det(r) < 0:
            raise ValueError("rotation must be proper (det +1)")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        self.rotation = r
        self.translation = np.asarray(self.translation, dtype=np.float64)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * (np.asarray(points) @ self.rotation.T) + self.translation

    def rotate(self, vectors: np.ndarray) -> np.ndarray:
        return np.asarray(vectors) @ self.rotation.T


def identity_transform() -> RigidTransform:
    return RigidTransform(rotation=np.eye(3), translation=np.zeros(3), scale=1.0)


def sample_points(
    views: list[tuple[GBufferView, FeatureMap]],
    per_view: int = 5000,
    seed: int = 0,
) -> FeaturePointCloud:
    """Draw up to `per_view` covered pixels per view, uniformly without
    replacement, deterministically under `seed`.

    Views without any covered pixel are skipped; the skip count is kept in
    the result. Pixels whose descriptor is the zero vector are excluded so
    every stored feature has positive norm.
    """
    if per_view < 1:
        raise ValueError("per_view must be >= 1")
    rng = np.random.default_rng(seed)

    feats, rgbs, positions, normals, view_dirs, view_ids, pixels = (
        [], [], [], [], [], [], [],
    )
    forwards = np.zeros((len(views), 3))
    skipped = 0
    for vi, (view, fmap) in enumerate(views):
        forwards[vi] = view.camera.forward()
        mask = view.coverage_mask()
        ys, xs = np.nonzero(mask)
        if xs.size == 0:
            skipped += 1
            continue
        fx, fy = feature_pixel(
            xs, ys, (view.width, view.height), (fmap.width, fmap.height)
        )
        descr = fmap.data[fy, fx].astype(np.float64)
        nonzero = np.linalg.norm(descr, axis=1) > 0
        xs, ys, fx, fy, descr = xs[nonzero], ys[nonzero], fx[nonzero], fy[nonzero], descr[nonzero]
        if xs.size == 0:
            skipped += 1
            continue
        take = min(per_view, xs.size)
        pick = rng.choice(xs.size, size=take, replace=False)
        xs, ys = xs[pick], ys[pick]
        feats.append(descr[pick])
        rgbs.append(view.rgb[ys, xs])
        positions.append(view.position[ys, xs])
        normals.append(view.normal[ys, xs])
        view_dirs.append(view.view_dir[ys, xs])
        view_ids.append(np.full(take, vi, dtype=np.int32))
        pixels.append(np.stack([xs, ys], axis=1).astype(np.int32))

    if not feats:
        raise ValueError("no covered pixels in any view")
    return FeaturePointCloud(
        features=np.concatenate(feats).astype(np.float64),
        rgb=np.concatenate(rgbs).astype(np.float64),
        position=np.concatenate(positions).astype(np.float64),
        normal=np.concatenate(normals).astype(np.float64),
        view_dir=np.concatenate(view_dirs).astype(np.float64),
        view_index=np.concatenate(view_ids),
        pixel=np.concatenate(pixels),
        view_forwards=forwards,
        skipped_views=skipped,
    )


def _closest_view_order(
    target_forward: np.ndarray, source_forwards: np.ndarray
) -> np.ndarray:
    dots = np.clip(source_forwards @ target_forward, -1.0, 1.0)
    angles = np.arccos(dots)
    return np.argsort(angles, kind="stable")


def select_candidate_views(
    target_view_index: int,
    target_views: list[CameraPose],
    source_views: list[CameraPose],
    k: int,
    transform: RigidTransform | None = None,
) -> list[int]:
    """Indices of the k source views whose camera forward axes are
    angularly closest to the target view's (ties to the lower index).

    A pre-alignment transform, when given, rotates the target forward axis
    into source space before comparing.
    """
    if not 1 <= k <= len(source_views):
        raise ValueError("k must be in [1, len(source_views)]")
    fwd = target_views[target_view_index].forward()
    if transform is not None:
        fwd = transform.rotate(fwd)
    source_forwards = np.stack([v.forward() for v in source_views])
    return list(_closest_view_order(fwd, source_forwards)[:k])


def _normalized_features(cloud: FeaturePointCloud) -> np.ndarray:
    feats = cloud.features.astype(np.float64)
    norms = np.linalg.norm(feats, axis=1, keepdims=True)
    if (norms == 0).any():
        raise ValueError("zero-norm descriptor")
    return feats / norms


def build_mapping(
    target: FeaturePointCloud,
    source: FeaturePointCloud,
    k: int | None = None,
    transform: RigidTransform | None = None,
    block_size: int = 2048,
) -> CorrespondenceMap:
    """Match every target point to the most similar source point.

    With `k` the search is restricted, per target view, to source points
    from the k angularly closest source views; `k=None` searches all
    sources (the exact full argmax). Ties resolve to the lowest source
    index.
    """
    if target.count == 0 or source.count == 0:
        raise ValueError("clouds must be nonempty")
    n_source_views = source.view_forwards.shape[0]
    if k is not None and not 1 <= k <= n_source_views:
        raise ValueError("k must be in [1, number of source views]")

    t_feats = _normalized_features(target)
    s_feats = _normalized_features(source)

    phi = np.empty(target.count, dtype=np.int64)
    score = np.empty(target.count, dtype=np.float64)
    for vi in np.unique(target.view_index):
        rows = np.flatnonzero(target.view_index == vi)
        if k is None:
            cand = np.arange(source.count)
        else:
            fwd = target.view_forwards[vi]
            if transform is not None:
                fwd = transform.rotate(fwd)
            order = _closest_view_order(fwd, source.view_forwards)[:k]
            cand = np.flatnonzero(np.isin(source.view_index, order))
        if cand.size == 0:
            raise ValueError("no candidate source points")
        block = s_feats[cand]
        for start in range(0, rows.size, block_size):
            chunk = rows[start : start + block_size]
            sims = t_feats[chunk] @ block.T
            arg = sims.argmax(axis=1)
            phi[chunk] = cand[arg]
            score[chunk] = sims[np.arange(chunk.size), arg]
    return CorrespondenceMap(source_index=phi, score=score)


def assemble_training_set(
    mapping: CorrespondenceMap,
    target: FeaturePointCloud,
    source: FeaturePointCloud,
) -> TransferSamples:
    """Supervision tuples (target position, target normal, source view
    direction, source color) under the mapping.

    Reads neither the target's colors nor the source's positions.
    """
    if mapping.count != target.count:
        raise ValueError("mapping length must equal the target point count")
    if mapping.count and mapping.source_index.max() >= source.count:
        raise ValueError("mapping references source points out of range")
    idx = mapping.source_index
    return TransferSamples(
        position=target.position.copy(),
        normal=target.normal.copy(),
        view_dir=source.view_dir[idx],
        rgb=source.rgb[idx],
    )


def _yaw_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rotation_grid(yaw_steps: int, full_rotation: bool):
    yaws = [2.0 * math.pi * i / yaw_steps for i in range(yaw_steps)]
    if not full_rotation:
        return [_yaw_matrix(t) for t in yaws]
    from .scene import rotation_xyz

    rotations = []
    pitches = [math.radians(a) for a in (-60, -30, 0, 30, 60)]
    rolls = [math.radians(a) for a in (-90, -45, 0, 45, 90)]
    for yaw in yaws:
        for pitch in pitches:
            for roll in rolls:
                rotations.append(rotation_xyz(roll, pitch, yaw))
    return rotations


def prealign(
    target: FeaturePointCloud,
    source: FeaturePointCloud,
    yaw_steps: int = 36,
    subsample: int = 500,
    seed: int = 0,
    full_rotation: bool = False,
) -> RigidTransform:
    """Rough rigid alignment of the target cloud onto the source cloud.

    Translation aligns centroids, scale matches bounding-box diagonals and
    the rotation is chosen from a uniform yaw grid (about +z; a coarse
    full-rotation grid when `full_rotation`) maximizing the mean, over a
    subsample of target points, of the best proximity-weighted descriptor
    similarity to any subsampled source point. Deterministic.
    """
    if target.count == 0 or source.count == 0:
        raise ValueError("clouds must be nonempty")
    c_t = target.position.mean(axis=0)
    c_s = source.position.mean(axis=0)
    diag_t = target.bbox_diagonal()
    diag_s = source.bbox_diagonal()
    if diag_t < 1e-12 or diag_s < 1e-12:
        return RigidTransform(rotation=np.eye(3), translation=c_s - c_t, scale=1.0)
    scale = diag_s / diag_t

    rng = np.random.default_rng(seed)
    t_idx = rng.choice(target.count, size=min(subsample, target.count), replace=False)
    s_idx = rng.choice(source.count, size=min(subsample, source.count), replace=False)
    t_pos = target.position[t_idx] - c_t
    s_pos = source.position[s_idx]
    t_feat = target.features[t_idx]
    s_feat = source.features[s_idx]
    t_feat = t_feat / np.linalg.norm(t_feat, axis=1, keepdims=True)
    s_feat = s_feat / np.linalg.norm(s_feat, axis=1, keepdims=True)
    sims = t_feat @ s_feat.T

    bandwidth = 0.1 * diag_s
    best_score = -np.inf
    best_rot = np.eye(3)
    for rot in _rotation_grid(yaw_steps, full_rotation):
        moved = scale * (t_pos @ rot.T) + c_s
        d2 = ((moved[:, None, :] - s_pos[None, :, :]) ** 2).sum(axis=-1)
        weight = np.exp(-d2 / (2.0 * bandwidth**2))
        score = float((sims * weight).max(axis=1).mean())
        if score > best_score:
            best_score = score
            best_rot = rot
    return RigidTransform(
        rotation=best_rot, translation=c_s - scale * (best_rot @ c_t), scale=scale
    )


def transfer_image(
    view: GBufferView,
    fmap: FeatureMap,
    source: FeaturePointCloud,
    k: int | None = None,
    transform: RigidTransform | None = None,
) -> np.ndarray:
    """Dense transferred-color image of one target view: every covered
    pixel takes the color of its best-matching source point. Background
    pixels are 0."""
    cloud = sample_points([(view, fmap)], per_view=view.width * view.height)
    if k is not None:
        k = min(k, source.view_forwards.shape[0])
    mapping = build_mapping(cloud, source, k=k, transform=transform)
    out = np.zeros((view.height, view.width, 3))
    xs = cloud.pixel[:, 0]
    ys = cloud.pixel[:, 1]
    out[ys, xs] = source.rgb[mapping.source_index]
    return out
