"""View-dependent appearance field: an MLP from (position, normal, view
direction) to rgb, with hand-derived gradients and an Adam optimizer.

Inputs are lifted by a sinusoidal frequency encoding. The network is a
plain ReLU MLP (optionally with one skip connection re-injecting the
encoded input), a narrower penultimate ReLU layer and a sigmoid rgb
output. Everything is pure numpy; forward and backward are pure functions
of the parameters and the batch.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

CHECKPOINT_MAGIC = b"NFLD"
CHECKPOINT_VERSION = 1


@dataclass
class EncodingConfig:
    """Frequency counts of the input lift.

    A vector v becomes [v, sin(2^0 v), cos(2^0 v), ..., sin(2^(f-1) v),
    cos(2^(f-1) v)] element-wise (the raw copy only when `include_raw`).
    Positions use `position_freqs`; normals and view directions both use
    `direction_freqs`.
    """

    position_freqs: int = 10
    direction_freqs: int = 4
    include_raw: bool = True

    def __post_init__(self):
        if self.position_freqs < 0 or self.direction_freqs < 0:
            raise ValueError("frequency counts must be >= 0")


@dataclass
class FieldConfig:
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    hidden_layers: int = 8
    hidden_width: int = 256
    penultimate_width: int = 128
    skip_layer: int | None = 5

    def __post_init__(self):
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise ValueError("hidden layer count and width must be >= 1")
        if self.penultimate_width < 1:
            raise ValueError("penultimate width must be >= 1")
        if self.skip_layer is not None and not (
            2 <= self.skip_layer <= self.hidden_layers
        ):
            raise ValueError("skip_layer must lie in [2, hidden_layers]")

    @property
    def input_dim(self) -> int:
        enc = self.encoding
        raw = 1 if enc.include_raw else 0
        pos = 3 * (raw + 2 * enc.position_freqs)
        ang = 3 * (raw + 2 * enc.direction_freqs)
        return pos + 2 * ang


@dataclass
class FieldParameters:
    """Weights and biases, ordered hidden layers, penultimate, output."""

    config: FieldConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def dtype(self):
        return self.weights[0].dtype


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def positional_encoding(
    v: np.ndarray, freqs: int, include_raw: bool = True
) -> np.ndarray:
    """Sinusoidal lift of (..., d) vectors to (..., d*(raw + 2*freqs))."""
    if freqs < 0:
        raise ValueError("freqs must be >= 0")
    v = np.asarray(v)
    parts = [v] if include_raw else []
    for i in range(freqs):
        scaled = (2.0**i) * v
        parts.append(np.sin(scaled))
        parts.append(np.cos(scaled))
    if not parts:
        return v[..., :0]
    return np.concatenate(parts, axis=-1)


def encode_inputs(
    cfg: EncodingConfig, x: np.ndarray, n: np.ndarray, omega: np.ndarray
) -> np.ndarray:
    return np.concatenate(
        [
            positional_encoding(x, cfg.position_freqs, cfg.include_raw),
            positional_encoding(n, cfg.direction_freqs, cfg.include_raw),
            positional_encoding(omega, cfg.direction_freqs, cfg.include_raw),
        ],
        axis=-1,
    )


def _layer_dims(cfg: FieldConfig) -> list[tuple[int, int]]:
    dims = []
    prev = cfg.input_dim
    for layer in range(1, cfg.hidden_layers + 1):
        fan_in = prev + (cfg.input_dim if layer == cfg.skip_layer else 0)
        dims.append((fan_in, cfg.hidden_width))
        prev = cfg.hidden_width
    dims.append((prev, cfg.penultimate_width))
    dims.append((cfg.penultimate_width, 3))
    return dims


def init_field(cfg: FieldConfig, seed: int = 0, dtype=np.float32) -> FieldParameters:
    """Glorot-uniform weights, zero biases; deterministic per seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in _layer_dims(cfg):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return FieldParameters(config=cfg, weights=weights, biases=biases)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(params: FieldParameters, encoded: np.ndarray):
    cfg = params.config
    dtype = params.dtype
    h = encoded.astype(dtype)
    inputs = []  # pre-matmul input of every layer
    zs = []
    a = h
    for layer in range(1, cfg.hidden_layers + 1):
        if layer == cfg.skip_layer:
            a = np.concatenate([a, h], axis=-1)
        inputs.append(a)
        z = a @ params.weights[layer - 1] + params.biases[layer - 1]
        zs.append(z)
        a = np.maximum(z, 0.0)
    inputs.append(a)
    z = a @ params.weights[-2] + params.biases[-2]
    zs.append(z)
    a = np.maximum(z, 0.0)
    inputs.append(a)
    z = a @ params.weights[-1] + params.biases[-1]
    zs.append(z)
    out = _sigmoid(z)
    return out, (inputs, zs)


def field_forward(
    params: FieldParameters, x: np.ndarray, n: np.ndarray, omega: np.ndarray
) -> np.ndarray:
    """Predicted rgb in (0, 1)^3 for a batch of (x, n, omega) rows."""
    x = np.atleast_2d(np.asarray(x))
    n = np.atleast_2d(np.asarray(n))
    omega = np.atleast_2d(np.asarray(omega))
    for name, arr in (("x", x), ("n", n), ("omega", omega)):
        if not np.isfinite(arr).all():
            raise ValueError(f"non-finite values in input {name}")
    encoded = encode_inputs(params.config.encoding, x, n, omega)
    out, _ = _forward_cached(params, encoded)
    return out


def _backward(params: FieldParameters, cache, d_out: np.ndarray):
    """Parameter gradients given the loss gradient at the sigmoid output."""
    cfg = params.config
    inputs, zs = cache
    y = _sigmoid(zs[-1])
    delta = (d_out * y * (1.0 - y)).astype(params.dtype)

    grad_w = [None] * len(params.weights)
    grad_b = [None] * len(params.biases)
    for idx in range(len(params.weights) - 1, -1, -1):
        grad_w[idx] = inputs[idx].T @ delta
        grad_b[idx] = delta.sum(axis=0)
        if idx == 0:
            break
        da = delta @ params.weights[idx].T
        if cfg.skip_layer is not None and idx == cfg.skip_layer - 1:
            # inputs[idx] was concat(activation, encoded input); the
            # encoded part carries no trainable upstream state
            da = da[:, : da.shape[1] - cfg.input_dim]
        # ReLU subgradient: 0 at exactly 0
        delta = da * (zs[idx - 1] > 0)
    return grad_w, grad_b


def field_backward(
    params: FieldParameters,
    x: np.ndarray,
    n: np.ndarray,
    omega: np.ndarray,
    ref_rgb: np.ndarray | None = None,
    output_grad: np.ndarray | None = None,
):
    """Loss and parameter gradients for a batch.

    With `ref_rgb` the loss is the batch-mean L1 color error (channel sum,
    subgradient 0 at exact zero residual). `output_grad`, if given, is an
    externally supplied gradient with respect to the predicted rgb and is
    added to the L1 term; either argument may be used alone.

    Returns (loss, grad_weights, grad_biases).
    """
    x = np.atleast_2d(np.asarray(x))
    n = np.atleast_2d(np.asarray(n))
    omega = np.atleast_2d(np.asarray(omega))
    if x.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    encoded = encode_inputs(params.config.encoding, x, n, omega)
    pred, cache = _forward_cached(params, encoded)

    d_out = np.zeros_like(pred)
    loss = 0.0
    if ref_rgb is not None:
        residual = pred - np.asarray(ref_rgb, dtype=pred.dtype)
        loss = float(np.abs(residual).sum(axis=-1).mean())
        d_out = d_out + np.sign(residual) / pred.shape[0]
    if output_grad is not None:
        d_out = d_out + np.asarray(output_grad, dtype=pred.dtype)
    grad_w, grad_b = _backward(params, cache, d_out)
    return loss, grad_w, grad_b


def add_gradients(g1, g2):
    """Element-wise sum of two (grad_weights, grad_biases) pairs."""
    gw = [a + b for a, b in zip(g1[0], g2[0])]
    gb = [a + b for a, b in zip(g1[1], g2[1])]
    return gw, gb


def init_adam(params: FieldParameters, lr: float = 1e-4) -> AdamState:
    zeros_w = [np.zeros_like(w) for w in params.weights]
    zeros_b = [np.zeros_like(b) for b in params.biases]
    return AdamState(
        m_w=zeros_w,
        v_w=[np.zeros_like(w) for w in params.weights],
        m_b=zeros_b,
        v_b=[np.zeros_like(b) for b in params.biases],
        lr=lr,
    )


def adam_step(
    state: AdamState, params: FieldParameters, grad_w, grad_b
) -> tuple[AdamState, FieldParameters]:
    """One bias-corrected Adam update; returns fresh state and parameters."""
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t

    new_w, new_mw, new_vw = [], [], []
    for w, g, m, v in zip(params.weights, grad_w, state.m_w, state.v_w):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        step = state.lr * (m / corr1) / (np.sqrt(v / corr2) + state.eps)
        new_w.append(w - step)
        new_mw.append(m)
        new_vw.append(v)
    new_b, new_mb, new_vb = [], [], []
    for b, g, m, v in zip(params.biases, grad_b, state.m_b, state.v_b):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        step = state.lr * (m / corr1) / (np.sqrt(v / corr2) + state.eps)
        new_b.append(b - step)
        new_mb.append(m)
        new_vb.append(v)

    next_state = replace(state, m_w=new_mw, v_w=new_vw, m_b=new_mb, v_b=new_vb, t=t)
    next_params = FieldParameters(config=params.config, weights=new_w, biases=new_b)
    return next_state, next_params


def save_checkpoint(params: FieldParameters, path) -> None:
    cfg = params.config
    enc = cfg.encoding
    tensors = []
    for w, b in zip(params.weights, params.biases):
        tensors.append(w)
        tensors.append(b)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(
            struct.pack(
                "<IIBIIIi",
                enc.position_freqs,
                enc.direction_freqs,
                1 if enc.include_raw else 0,
                cfg.hidden_layers,
                cfg.hidden_width,
                cfg.penultimate_width,
                cfg.skip_layer if cfg.skip_layer is not None else -1,
            )
        )
        fh.write(struct.pack("<I", len(tensors)))
        for tensor in tensors:
            fh.write(struct.pack("<I", tensor.ndim))
            fh.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            fh.write(np.ascontiguousarray(tensor, dtype="<f4").tobytes())


def _read_checkpoint(path, header_only: bool = False):
    from .storage import ContainerError, _check_magic, _read_exact, _read_u32

    with open(path, "rb") as fh:
        _check_magic(fh, CHECKPOINT_MAGIC)
        version = _read_u32(fh, "version")
        if version != CHECKPOINT_VERSION:
            raise ContainerError(f"unsupported version {version}")
        raw = _read_exact(fh, struct.calcsize("<IIBIIIi"), "field config")
        pf, df, include_raw, layers, width, penult, skip = struct.unpack("<IIBIIIi", raw)
        cfg = FieldConfig(
            encoding=EncodingConfig(pf, df, bool(include_raw)),
            hidden_layers=layers,
            hidden_width=width,
            penultimate_width=penult,
            skip_layer=None if skip < 0 else skip,
        )
        if header_only:
            return cfg, None
        n_tensors = _read_u32(fh, "tensor count")
        tensors = []
        for i in range(n_tensors):
            ndim = _read_u32(fh, f"tensor {i} ndim")
            shape = struct.unpack(
                f"<{ndim}I", _read_exact(fh, 4 * ndim, f"tensor {i} shape")
            )
            count = int(np.prod(shape)) if ndim else 1
            raw = _read_exact(fh, count * 4, f"tensor {i} data")
            tensors.append(np.frombuffer(raw, dtype="<f4").reshape(shape).copy())
    return cfg, tensors


def load_checkpoint(path) -> FieldParameters:
    """Read a checkpoint, validating shapes against the stored config."""
    from .storage import ContainerError

    cfg, tensors = _read_checkpoint(path)
    expected = _layer_dims(cfg)
    if tensors is None or len(tensors) != 2 * len(expected):
        raise ContainerError("tensor count mismatch")
    weights = tensors[0::2]
    biases = tensors[1::2]
    for (fan_in, fan_out), w, b in zip(expected, weights, biases):
        if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise ContainerError(
                "encoding dimension mismatch: config expects "
                f"({fan_in}, {fan_out}), checkpoint has {w.shape}"
            )
    return FieldParameters(config=cfg, weights=weights, biases=biases)


def checkpoint_header(path) -> dict:
    cfg, _ = _read_checkpoint(path, header_only=True)
    return {
        "format": "NFLD",
        "position_freqs": cfg.encoding.position_freqs,
        "direction_freqs": cfg.encoding.direction_freqs,
        "include_raw": cfg.encoding.include_raw,
        "hidden_layers": cfg.hidden_layers,
        "hidden_width": cfg.hidden_width,
        "penultimate_width": cfg.penultimate_width,
        "skip_layer": cfg.skip_layer,
        "input_dim": cfg.input_dim,
    }
