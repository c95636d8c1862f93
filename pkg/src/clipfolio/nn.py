"""Flat-parameter MLP with exact reverse-mode gradients and Adam.

Parameters live in one float64 vector; for each consecutive layer pair the
weight matrix (fan_in x fan_out, row-major) is followed by its bias.
Hidden layers use ReLU; the output head is softmax, softplus or linear.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import CheckpointMismatch, DimensionMismatch, InvalidSpec, ShapeMismatch, TapeMismatch

HEADS = ("softmax", "softplus", "linear")


@dataclass(frozen=True)
class LayerSpec:
    sizes: tuple[int, ...]
    head: str = "softmax"

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise InvalidSpec(f"invalid layer sizes {self.sizes}")
        if self.head not in HEADS:
            raise InvalidSpec(f"unknown head {self.head!r}")

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    @property
    def n_params(self) -> int:
        return sum((a + 1) * b for a, b in zip(self.sizes, self.sizes[1:]))

    def unpack(self, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Views ``(W, b)`` into ``params`` for each layer."""
        if params.shape != (self.n_params,):
            raise ShapeMismatch(f"expected {self.n_params} parameters, got {params.shape}")
        out, off = [], 0
        for a, b in zip(self.sizes, self.sizes[1:]):
            W = params[off:off + a * b].reshape(a, b)
            off += a * b
            out.append((W, params[off:off + b]))
            off += b
        return out


def init_params(spec: LayerSpec, seed) -> np.ndarray:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    gen = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    params = np.zeros(spec.n_params)
    for W, _ in spec.unpack(params):
        bound = 1.0 / np.sqrt(W.shape[0])
        W[...] = gen.uniform(-bound, bound, size=W.shape)
    return params


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


@dataclass(frozen=True, eq=False)
class Tape:
    spec: LayerSpec
    n_params: int
    inputs: list          # input to each layer, 2-D
    pre: list             # pre-activations, 2-D
    output: np.ndarray    # 2-D
    squeeze: bool


def forward(params: np.ndarray, spec: LayerSpec, x: np.ndarray) -> tuple[np.ndarray, Tape]:
    """Evaluate the network on one input vector or a batch of rows."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    if h.ndim != 2 or h.shape[1] != spec.n_in:
        raise DimensionMismatch(f"input width {h.shape[-1]} != {spec.n_in}")
    layers = spec.unpack(params)
    inputs, pre = [], []
    for k, (W, b) in enumerate(layers):
        inputs.append(h)
        z = h @ W + b
        pre.append(z)
        h = np.maximum(z, 0.0) if k < len(layers) - 1 else z
    if spec.head == "softmax":
        out = softmax(h)
    elif spec.head == "softplus":
        out = softplus(h)
    else:
        out = h
    tape = Tape(spec, spec.n_params, inputs, pre, out, squeeze)
    return (out[0] if squeeze else out), tape


def backward(params: np.ndarray, spec: LayerSpec, tape: Tape, output_grad: np.ndarray) -> np.ndarray:
    """Gradient of ``sum(output_grad * output)`` w.r.t. ``params``.

    For batched tapes the gradient is summed over rows.
    """
    if tape.spec != spec or tape.n_params != params.shape[0]:
        raise TapeMismatch("tape was produced by a different network")
    g = np.asarray(output_grad, dtype=float)
    g = g[None, :] if tape.squeeze else g
    if g.shape != tape.output.shape:
        raise TapeMismatch(f"output_grad shape {g.shape} != output {tape.output.shape}")
    y = tape.output
    if spec.head == "softmax":
        d = y * (g - (g * y).sum(axis=1, keepdims=True))
    elif spec.head == "softplus":
        d = g * expit(tape.pre[-1])
    else:
        d = g
    grad = np.zeros_like(params)
    layers = spec.unpack(params)
    glayers = spec.unpack(grad)
    for k in range(len(layers) - 1, -1, -1):
        W, _ = layers[k]
        gW, gb = glayers[k]
        gW[...] = tape.inputs[k].T @ d
        gb[...] = d.sum(axis=0)
        if k > 0:
            d = (d @ W.T) * (tape.pre[k - 1] > 0)
    return grad


def grad_check(params: np.ndarray, spec: LayerSpec, x: np.ndarray,
               scalar_fn: Callable[[np.ndarray], tuple[float, np.ndarray]], h: float = 1e-5) -> float:
    """Max relative error between backprop and central differences.

    ``scalar_fn`` maps the network output to ``(value, d value / d output)``.
    """
    out, tape = forward(params, spec, x)
    _, dout = scalar_fn(out)
    analytic = backward(params, spec, tape, dout)
    numeric = np.empty_like(params)
    p = params.copy()
    for i in range(p.size):
        orig = p[i]
        p[i] = orig + h
        fp = scalar_fn(forward(p, spec, x)[0])[0]
        p[i] = orig - h
        fm = scalar_fn(forward(p, spec, x)[0])[0]
        p[i] = orig
        numeric[i] = (fp - fm) / (2 * h)
    return relative_error(analytic, numeric)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


@dataclass(frozen=True, eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n: int, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
        return cls(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2, eps)


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState,
              maximize: bool = False) -> tuple[np.ndarray, AdamState]:
    if not (params.shape == grad.shape == state.m.shape == state.v.shape):
        raise ShapeMismatch("params, grad and Adam moments must share a shape")
    g = -grad if maximize else grad
    t = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    mhat = m / (1 - state.beta1 ** t)
    vhat = v / (1 - state.beta2 ** t)
    new = params - state.lr * mhat / (np.sqrt(vhat) + state.eps)
    return new, replace(state, m=m, v=v, step=t)


# -- checkpoints -----------------------------------------------------------

def save_params(path, spec: LayerSpec, params: np.ndarray) -> None:
    """Header line with layer sizes and head, then one parameter per line."""
    if params.shape != (spec.n_params,):
        raise ShapeMismatch("parameter vector does not match spec")
    with open(path, "w") as fh:
        fh.write(f"sizes={','.join(map(str, spec.sizes))} head={spec.head}\n")
        fh.writelines(f"{float(p)!r}\n" for p in params)


def load_params(path, expect: LayerSpec | None = None) -> tuple[LayerSpec, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().split()
        try:
            fields = dict(item.split("=", 1) for item in header)
            spec = LayerSpec(tuple(int(s) for s in fields["sizes"].split(",")), fields["head"])
        except (KeyError, ValueError) as exc:
            raise CheckpointMismatch(f"{path}: malformed checkpoint header") from exc
        params = np.array([float(line) for line in fh if line.strip()])
    if params.shape != (spec.n_params,):
        raise CheckpointMismatch(f"{path}: expected {spec.n_params} parameters, found {params.size}")
    if expect is not None and spec != expect:
        raise CheckpointMismatch(f"checkpoint network {spec.sizes}/{spec.head} does not match "
                                 f"configured {expect.sizes}/{expect.head}")
    return spec, params
