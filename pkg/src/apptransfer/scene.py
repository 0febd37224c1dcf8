"""Analytic test scenes and the raycaster that renders them to G-buffers.

A scene is a list of solid primitives (sphere, box, torus, capped cone),
each with a rigid pose and a procedural texture. Rendering produces a
:class:`GBufferView`: per-pixel world position, surface normal, view
direction, shaded color and a binary alpha. Shading is a headlight
Lambertian term (light co-located with the camera), which makes the
brightness view-dependent while staying analytically checkable.

Scene files are declarative YAML documents; see ``load_scene`` for the
schema.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

COVERAGE_THRESHOLD = 0.5

_RAY_EPS = 1e-6
_PARALLEL_EPS = 1e-8

TEXTURE_KINDS = ("constant", "checker", "gradient", "bands")
_AXIS_NAMES = {"x": 0, "y": 1, "z": 2}


def normalize(v: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unit-normalize vectors along `axis`; zero vectors stay zero."""
    n = np.linalg.norm(v, axis=axis, keepdims=True)
    return np.where(n > 0, v / np.where(n > 0, n, 1.0), 0.0)


def rotation_xyz(rx: float, ry: float, rz: float) -> np.ndarray:
    """Rotation matrix for intrinsic x, y, z Euler angles in radians."""
    cx, sx = math.cos(rx), math.sin(rx)
    cy, sy = math.cos(ry), math.sin(ry)
    cz, sz = math.cos(rz), math.sin(rz)
    mx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=np.float64)
    my = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=np.float64)
    mz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=np.float64)
    return mz @ my @ mx


@dataclass
class Texture:
    """Procedural surface color, evaluated in the primitive's local frame."""

    kind: str = "constant"
    color_a: tuple[float, float, float] = (0.8, 0.8, 0.8)
    color_b: tuple[float, float, float] = (0.2, 0.2, 0.2)
    scale: float = 2.0
    axis: int = 2

    def __post_init__(self):
        if self.kind not in TEXTURE_KINDS:
            raise ValueError(f"unknown texture kind {self.kind!r}")
        for name in ("color_a", "color_b"):
            c = getattr(self, name)
            if len(c) != 3 or any(not (0.0 <= v <= 1.0) for v in c):
                raise ValueError(f"{name} must be three values in [0,1]")
        if self.scale <= 0:
            raise ValueError("texture scale must be > 0")
        if self.axis not in (0, 1, 2):
            raise ValueError("texture axis must be 0, 1 or 2")

    def sample(self, points: np.ndarray, bounds: np.ndarray) -> np.ndarray:
        """Albedo at local-frame `points` (N,3); `bounds` is (2,3) lo/hi."""
        a = np.asarray(self.color_a, dtype=np.float64)
        b = np.asarray(self.color_b, dtype=np.float64)
        if self.kind == "constant":
            return np.broadcast_to(a, points.shape).copy()
        if self.kind == "checker":
            parity = np.floor(points * self.scale).sum(axis=-1).astype(np.int64) % 2
            return np.where(parity[..., None] == 0, a, b)
        if self.kind == "bands":
            parity = np.floor(points[..., self.axis] * self.scale).astype(np.int64) % 2
            return np.where(parity[..., None] == 0, a, b)
        # gradient along one local axis, normalized by the primitive bounds
        lo, hi = bounds[0, self.axis], bounds[1, self.axis]
        t = np.clip((points[..., self.axis] - lo) / max(hi - lo, 1e-12), 0.0, 1.0)
        return a + t[..., None] * (b - a)


@dataclass
class Primitive:
    """Analytic solid with a rigid pose and a texture.

    `rotation_deg` are intrinsic x, y, z Euler angles in degrees. Rays are
    intersected in the local frame; subclasses implement
    ``intersect_local`` and ``local_bounds``.
    """

    texture: Texture = field(default_factory=Texture)
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation_deg: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def rotation(self) -> np.ndarray:
        rx, ry, rz = (math.radians(a) for a in self.rotation_deg)
        return rotation_xyz(rx, ry, rz)

    def rays_to_local(self, origin: np.ndarray, dirs: np.ndarray):
        r = self.rotation
        o = (np.asarray(origin, dtype=np.float64) - np.asarray(self.position)) @ r
        d = dirs @ r
        return np.broadcast_to(o, d.shape), d

    def points_to_local(self, points: np.ndarray) -> np.ndarray:
        return (points - np.asarray(self.position)) @ self.rotation

    def normals_to_world(self, normals: np.ndarray) -> np.ndarray:
        return normals @ self.rotation.T

    def intersect_local(self, o: np.ndarray, d: np.ndarray):
        raise NotImplementedError

    def local_bounds(self) -> np.ndarray:
        raise NotImplementedError


@dataclass
class Sphere(Primitive):
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be > 0")

    def intersect_local(self, o, d):
        b = (o * d).sum(axis=-1)
        c = (o * o).sum(axis=-1) - self.radius**2
        disc = b * b - c
        ok = disc >= 0
        s = np.sqrt(np.where(ok, disc, 0.0))
        t0 = -b - s
        t1 = -b + s
        cand = np.where(t0 > _RAY_EPS, t0, np.where(t1 > _RAY_EPS, t1, np.inf))
        t = np.where(ok, cand, np.inf)
        t_safe = np.where(np.isfinite(t), t, 0.0)
        p = o + t_safe[:, None] * d
        n = normalize(p)
        return t, n

    def local_bounds(self):
        r = self.radius
        return np.array([[-r, -r, -r], [r, r, r]], dtype=np.float64)


@dataclass
class Box(Primitive):
    size: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if any(s <= 0 for s in self.size):
            raise ValueError("box size components must be > 0")

    def intersect_local(self, o, d):
        half = np.asarray(self.size, dtype=np.float64) / 2.0
        safe_d = np.where(np.abs(d) > _PARALLEL_EPS, d, _PARALLEL_EPS)
        inv = 1.0 / safe_d
        t0 = (-half - o) * inv
        t1 = (half - o) * inv
        tmin = np.minimum(t0, t1).max(axis=-1)
        tmax = np.maximum(t0, t1).min(axis=-1)
        hit = (tmax >= tmin) & (tmax > _RAY_EPS)
        t = np.where(hit, np.where(tmin > _RAY_EPS, tmin, tmax), np.inf)
        t_safe = np.where(np.isfinite(t), t, 0.0)
        p = o + t_safe[:, None] * d
        # face normal: axis with the largest relative coordinate
        rel = np.abs(p) / half
        axis = rel.argmax(axis=-1)
        n = np.zeros_like(p)
        rows = np.arange(p.shape[0])
        n[rows, axis] = np.sign(p[rows, axis])
        return t, n

    def local_bounds(self):
        half = np.asarray(self.size, dtype=np.float64) / 2.0
        return np.stack([-half, half])


@dataclass
class Torus(Primitive):
    """Torus around the local z axis (tube of radius `minor_radius`
    swept at distance `major_radius`)."""

    major_radius: float = 1.0
    minor_radius: float = 0.3

    def __post_init__(self):
        if self.major_radius <= 0 or self.minor_radius <= 0:
            raise ValueError("torus radii must be > 0")

    def intersect_local(self, o, d):
        big_r, small_r = self.major_radius, self.minor_radius
        t = np.full(d.shape[0], np.inf)
        # bounding-sphere prefilter keeps the quartic solve small
        b = (o * d).sum(axis=-1)
        c = (o * o).sum(axis=-1) - (big_r + small_r) ** 2
        near = b * b - c >= 0
        if not near.any():
            return t, np.zeros_like(d)
        ol, dl = o[near], d[near]

        dot_od = (ol * dl).sum(axis=-1)
        mm = (ol * ol).sum(axis=-1)
        g = mm + big_r**2 - small_r**2
        a2 = dl[:, 0] ** 2 + dl[:, 1] ** 2
        a1 = 2.0 * (ol[:, 0] * dl[:, 0] + ol[:, 1] * dl[:, 1])
        a0 = ol[:, 0] ** 2 + ol[:, 1] ** 2
        c3 = 4.0 * dot_od
        c2 = 2.0 * g + 4.0 * dot_od**2 - 4.0 * big_r**2 * a2
        c1 = 4.0 * dot_od * g - 4.0 * big_r**2 * a1
        c0 = g * g - 4.0 * big_r**2 * a0

        roots = _quartic_roots(c3, c2, c1, c0)
        real = np.abs(roots.imag) < 1e-6 * (1.0 + np.abs(roots.real))
        cand = np.where(real, roots.real, np.inf)
        cand = _polish_quartic(cand, c3, c2, c1, c0)
        residual = _quartic_eval(cand, c3, c2, c1, c0)
        scale = 1.0 + np.abs(c0)[:, None]
        valid = (cand > _RAY_EPS) & (np.abs(residual) < 1e-5 * scale)
        cand = np.where(valid, cand, np.inf)
        t_near = cand.min(axis=1)
        t[near] = t_near

        t_safe = np.where(np.isfinite(t), t, 0.0)
        p = o + t_safe[:, None] * d
        k = (p * p).sum(axis=-1) + big_r**2 - small_r**2
        grad = k[:, None] * p - 2.0 * big_r**2 * p * np.array([1.0, 1.0, 0.0])
        n = normalize(grad)
        return t, n

    def local_bounds(self):
        rr = self.major_radius + self.minor_radius
        return np.array(
            [[-rr, -rr, -self.minor_radius], [rr, rr, self.minor_radius]],
            dtype=np.float64,
        )


@dataclass
class Cone(Primitive):
    """Capped cone frustum along local z, from radius `base_radius` at z=0
    to `top_radius` at z=`height`."""

    base_radius: float = 1.0
    top_radius: float = 0.5
    height: float = 1.0

    def __post_init__(self):
        if self.base_radius <= 0 or self.top_radius <= 0 or self.height <= 0:
            raise ValueError("cone size parameters must be > 0")

    def intersect_local(self, o, d):
        r0, r1, h = self.base_radius, self.top_radius, self.height
        slope = (r1 - r0) / h
        n_rays = d.shape[0]
        t_best = np.full(n_rays, np.inf)
        n_best = np.zeros((n_rays, 3))

        # lateral surface: x^2 + y^2 = (r0 + slope*z)^2, z in [0, h]
        rad_o = r0 + slope * o[:, 2]
        qa = d[:, 0] ** 2 + d[:, 1] ** 2 - (slope * d[:, 2]) ** 2
        qb = o[:, 0] * d[:, 0] + o[:, 1] * d[:, 1] - slope * d[:, 2] * rad_o
        qc = o[:, 0] ** 2 + o[:, 1] ** 2 - rad_o**2
        disc = qb * qb - qa * qc
        ok = (disc >= 0) & (np.abs(qa) > 1e-12)
        s = np.sqrt(np.where(ok, disc, 0.0))
        for t_side in ((-qb - s), (-qb + s)):
            t_c = np.where(ok, t_side / np.where(ok, qa, 1.0), np.inf)
            z = o[:, 2] + t_c * d[:, 2]
            good = ok & (t_c > _RAY_EPS) & (z >= 0) & (z <= h) & (t_c < t_best)
            if good.any():
                p = o[good] + t_c[good, None] * d[good]
                rad = r0 + slope * p[:, 2]
                nl = np.stack(
                    [p[:, 0], p[:, 1], -slope * rad], axis=-1
                )
                t_best[good] = t_c[good]
                n_best[good] = normalize(nl)

        # caps at z=0 (radius r0) and z=h (radius r1)
        for z_cap, radius, nz in ((0.0, r0, -1.0), (h, r1, 1.0)):
            dz = d[:, 2]
            valid = np.abs(dz) > _PARALLEL_EPS
            t_c = np.where(valid, (z_cap - o[:, 2]) / np.where(valid, dz, 1.0), np.inf)
            p = o + t_c[:, None] * d
            inside = p[:, 0] ** 2 + p[:, 1] ** 2 <= radius**2
            good = valid & inside & (t_c > _RAY_EPS) & (t_c < t_best)
            t_best[good] = t_c[good]
            n_best[good] = np.array([0.0, 0.0, nz])

        return t_best, n_best

    def local_bounds(self):
        rmax = max(self.base_radius, self.top_radius)
        return np.array([[-rmax, -rmax, 0.0], [rmax, rmax, self.height]])


def _quartic_roots(c3, c2, c1, c0) -> np.ndarray:
    """Roots of monic quartics t^4 + c3 t^3 + c2 t^2 + c1 t + c0, batched.

    Uses eigenvalues of the companion matrices; callers should polish the
    real candidates with Newton steps before trusting them.
    """
    n = c3.shape[0]
    comp = np.zeros((n, 4, 4), dtype=np.float64)
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 3, 2] = 1.0
    comp[:, 0, 3] = -c0
    comp[:, 1, 3] = -c1
    comp[:, 2, 3] = -c2
    comp[:, 3, 3] = -c3
    return np.linalg.eigvals(comp)


def _quartic_eval(t, c3, c2, c1, c0):
    c3, c2, c1, c0 = (np.asarray(c)[:, None] for c in (c3, c2, c1, c0))
    return (((t + c3) * t + c2) * t + c1) * t + c0


def _polish_quartic(t, c3, c2, c1, c0, iters: int = 3):
    c3b, c2b, c1b, c0b = (np.asarray(c)[:, None] for c in (c3, c2, c1, c0))
    finite = np.isfinite(t)
    x = np.where(finite, t, 0.0)
    for _ in range(iters):
        f = (((x + c3b) * x + c2b) * x + c1b) * x + c0b
        fp = ((4.0 * x + 3.0 * c3b) * x + 2.0 * c2b) * x + c1b
        step = np.where(np.abs(fp) > 1e-12, f / np.where(fp == 0, 1.0, fp), 0.0)
        x = x - step
    return np.where(finite, x, np.inf)


@dataclass
class SceneDescription:
    primitives: list[Primitive]

    def __post_init__(self):
        if not self.primitives:
            raise ValueError("scene must contain at least one primitive")


@dataclass
class CameraPose:
    """Pinhole camera: position, look-at target, up hint, vertical fov."""

    position: tuple[float, float, float]
    look_at: tuple[float, float, float] = (0.0, 0.0, 0.0)
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    fov_y: float = math.radians(45.0)
    width: int = 400
    height: int = 400

    def __post_init__(self):
        if np.allclose(self.position, self.look_at):
            raise ValueError("camera position must differ from look_at")
        if not (0.0 < self.fov_y < math.pi):
            raise ValueError("fov must be in (0, pi)")
        if self.width < 1 or self.height < 1:
            raise ValueError("resolution must be at least 1x1")

    def forward(self) -> np.ndarray:
        f = np.asarray(self.look_at, dtype=np.float64) - np.asarray(self.position)
        return f / np.linalg.norm(f)

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Right, up, forward unit vectors; falls back deterministically
        when the view direction is parallel to the up hint."""
        fwd = self.forward()
        up_hint = np.asarray(self.up, dtype=np.float64)
        if np.linalg.norm(np.cross(fwd, up_hint)) < _PARALLEL_EPS:
            up_hint = np.array([0.0, 0.0, 1.0])
            if np.linalg.norm(np.cross(fwd, up_hint)) < _PARALLEL_EPS:
                up_hint = np.array([1.0, 0.0, 0.0])
        right = np.cross(fwd, up_hint)
        right /= np.linalg.norm(right)
        up = np.cross(right, fwd)
        return right, up, fwd


def camera_rays(camera: CameraPose) -> tuple[np.ndarray, np.ndarray]:
    """Ray origin (3,) and unit directions (H, W, 3) through pixel centers."""
    right, up, fwd = camera.basis()
    w, h = camera.width, camera.height
    tan_half = math.tan(camera.fov_y / 2.0)
    aspect = w / h
    xs = ((np.arange(w) + 0.5) / w * 2.0 - 1.0) * tan_half * aspect
    ys = (1.0 - (np.arange(h) + 0.5) / h * 2.0) * tan_half
    dirs = (
        fwd[None, None, :]
        + xs[None, :, None] * right[None, None, :]
        + ys[:, None, None] * up[None, None, :]
    )
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    return np.asarray(camera.position, dtype=np.float64), dirs


@dataclass
class GBufferView:
    """Per-pixel geometry and appearance for one camera.

    Planes are (H, W, 3) float32 except alpha (H, W). Where alpha is at
    most 0.5 every other plane is zero.
    """

    camera: CameraPose
    position: np.ndarray
    normal: np.ndarray
    view_dir: np.ndarray
    rgb: np.ndarray
    alpha: np.ndarray

    def coverage_mask(self) -> np.ndarray:
        return self.alpha > COVERAGE_THRESHOLD

    @property
    def width(self) -> int:
        return self.alpha.shape[1]

    @property
    def height(self) -> int:
        return self.alpha.shape[0]


def render_gbuffer(scene: SceneDescription, camera: CameraPose) -> GBufferView:
    """Closest-hit raycast of `scene` from `camera`.

    Position is the hit point, the normal is the analytic outward normal,
    rgb is the texture albedo times the headlight Lambertian term
    max(0, n.w), and alpha is 1 on hit (else 0 with zeroed planes).
    """
    origin, dirs = camera_rays(camera)
    h, w = dirs.shape[:2]
    flat_dirs = dirs.reshape(-1, 3)
    n_rays = flat_dirs.shape[0]

    best_t = np.full(n_rays, np.inf)
    best_prim = np.full(n_rays, -1, dtype=np.int32)
    best_normal = np.zeros((n_rays, 3))

    for idx, prim in enumerate(scene.primitives):
        o_l, d_l = prim.rays_to_local(origin, flat_dirs)
        t, n_local = prim.intersect_local(o_l, d_l)
        closer = t < best_t
        if closer.any():
            best_t = np.where(closer, t, best_t)
            best_prim[closer] = idx
            best_normal[closer] = prim.normals_to_world(n_local[closer])

    hit = np.isfinite(best_t)
    positions = np.zeros((n_rays, 3))
    positions[hit] = origin + best_t[hit, None] * flat_dirs[hit]

    view_dirs = np.zeros((n_rays, 3))
    view_dirs[hit] = normalize(origin - positions[hit])

    albedo = np.zeros((n_rays, 3))
    for idx, prim in enumerate(scene.primitives):
        sel = hit & (best_prim == idx)
        if sel.any():
            local = prim.points_to_local(positions[sel])
            albedo[sel] = prim.texture.sample(local, prim.local_bounds())

    lambert = np.clip((best_normal * view_dirs).sum(axis=-1), 0.0, None)
    rgb = np.zeros((n_rays, 3))
    rgb[hit] = albedo[hit] * lambert[hit, None]
    rgb = np.clip(rgb, 0.0, 1.0)

    alpha = hit.astype(np.float32)
    return GBufferView(
        camera=camera,
        position=positions.reshape(h, w, 3).astype(np.float32),
        normal=best_normal.reshape(h, w, 3).astype(np.float32),
        view_dir=view_dirs.reshape(h, w, 3).astype(np.float32),
        rgb=rgb.reshape(h, w, 3).astype(np.float32),
        alpha=alpha.reshape(h, w),
    )


def sample_camera_sphere(
    count: int,
    radius: float,
    seed: int,
    fov_y: float = math.radians(45.0),
    resolution: tuple[int, int] = (400, 400),
) -> list[CameraPose]:
    """`count` poses uniformly distributed on a sphere around the origin,
    all looking at the origin. Deterministic for a fixed seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be > 0")
    rng = np.random.default_rng(seed)
    poses = []
    w, h = resolution
    while len(poses) < count:
        v = rng.normal(size=3)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            continue
        p = v / norm * radius
        poses.append(
            CameraPose(position=tuple(p), fov_y=fov_y, width=w, height=h)
        )
    return poses


def circular_trajectory(
    count: int,
    radius: float,
    elevation: float,
    fov_y: float = math.radians(45.0),
    resolution: tuple[int, int] = (400, 400),
) -> list[CameraPose]:
    """Poses equally spaced in azimuth at a fixed elevation above the
    xy-plane, looking at the origin."""
    if count < 1:
        raise ValueError("count must be >= 1")
    w, h = resolution
    poses = []
    ce, se = math.cos(elevation), math.sin(elevation)
    for i in range(count):
        az = 2.0 * math.pi * i / count
        p = (radius * ce * math.cos(az), radius * ce * math.sin(az), radius * se)
        poses.append(CameraPose(position=p, fov_y=fov_y, width=w, height=h))
    return poses


_PRIMITIVE_KINDS = {"sphere": Sphere, "box": Box, "torus": Torus, "cone": Cone}

_PRIMITIVE_FIELDS = {
    "sphere": ("radius",),
    "box": ("size",),
    "torus": ("major_radius", "minor_radius"),
    "cone": ("base_radius", "top_radius", "height"),
}


def _parse_texture(spec: dict) -> Texture:
    kwargs = dict(spec)
    if "axis" in kwargs and isinstance(kwargs["axis"], str):
        try:
            kwargs["axis"] = _AXIS_NAMES[kwargs["axis"]]
        except KeyError:
            raise ValueError(f"unknown texture axis {kwargs['axis']!r}") from None
    for key in ("color_a", "color_b"):
        if key in kwargs:
            kwargs[key] = tuple(float(v) for v in kwargs[key])
    return Texture(**kwargs)


def parse_scene(doc: dict) -> SceneDescription:
    """Build a scene from a parsed YAML document. See ``load_scene``."""
    if not isinstance(doc, dict) or "primitives" not in doc:
        raise ValueError("scene document must contain a 'primitives' list")
    prims = []
    for i, entry in enumerate(doc["primitives"]):
        entry = dict(entry)
        kind = entry.pop("kind", None)
        if kind not in _PRIMITIVE_KINDS:
            raise ValueError(f"primitive {i}: unknown kind {kind!r}")
        texture = _parse_texture(entry.pop("texture", {}))
        kwargs = {"texture": texture}
        if "position" in entry:
            kwargs["position"] = tuple(float(v) for v in entry.pop("position"))
        if "rotation_deg" in entry:
            kwargs["rotation_deg"] = tuple(float(v) for v in entry.pop("rotation_deg"))
        for name in _PRIMITIVE_FIELDS[kind]:
            if name in entry:
                value = entry.pop(name)
                if name == "size":
                    value = tuple(float(v) for v in value)
                else:
                    value = float(value)
                kwargs[name] = value
        if entry:
            raise ValueError(f"primitive {i}: unknown keys {sorted(entry)}")
        prims.append(_PRIMITIVE_KINDS[kind](**kwargs))
    return SceneDescription(primitives=prims)


def load_scene(path) -> SceneDescription:
    """Load a scene from a YAML file.

    Schema::

        primitives:
          - kind: sphere | box | torus | cone
            position: [x, y, z]          # optional, default origin
            rotation_deg: [rx, ry, rz]   # optional, intrinsic xyz Euler
            radius: 1.0                  # sphere
            size: [sx, sy, sz]           # box, full extents
            major_radius: 1.0            # torus
            minor_radius: 0.3
            base_radius: 1.0             # cone
            top_radius: 0.5
            height: 1.0
            texture:
              kind: constant | checker | gradient | bands
              color_a: [r, g, b]
              color_b: [r, g, b]
              scale: 2.0                 # cells or bands per unit
              axis: x | y | z            # gradient / bands axis
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return parse_scene(doc)


def strip_textures(
    scene: SceneDescription, albedo: tuple[float, float, float] = (0.75, 0.75, 0.75)
) -> SceneDescription:
    """Copy of `scene` with every texture replaced by a constant albedo."""
    prims = []
    for prim in scene.primitives:
        clone = copy.deepcopy(prim)
        clone.texture = Texture(kind="constant", color_a=albedo)
        prims.append(clone)
    return SceneDescription(primitives=prims)
