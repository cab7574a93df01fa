"""Dense-network plumbing shared by the affinity and classifier stages.

Everything is plain numpy float64. Networks are small (a hidden layer or
two); training is mini-batch SGD with an explicit divergence guard. Mlp
values are immutable once built: their arrays are copied and marked
read-only so they can be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericError

ACTIVATIONS = ("identity", "relu", "sigmoid")


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "identity":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ValueError(f"unknown activation {name!r}")


def _activation_deriv(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "identity":
        return np.ones_like(z)
    if name == "relu":
        return (z > 0.0).astype(float)
    if name == "sigmoid":
        return a * (1.0 - a)
    raise ValueError(f"unknown activation {name!r}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str

    def __post_init__(self) -> None:
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        w = _frozen(self.weights)
        b = _frozen(self.bias)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent layer shapes {w.shape} / {b.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("layer parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)


@dataclass(frozen=True)
class Mlp:
    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("empty network")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.weights.shape[1] != prev.weights.shape[0]:
                raise ValueError("layer dimensions do not chain")

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    def parameter_count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)


def init_mlp(dims: Sequence[int], activations: Sequence[str], rng) -> Mlp:
    """Glorot-uniform initialized network with the given layer dims.

    ``dims`` = (in, h1, ..., out); ``activations`` has one tag per layer.
    """
    if len(activations) != len(dims) - 1:
        raise ValueError("need one activation per layer")
    layers = []
    for fan_in, fan_out, act in zip(dims, dims[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        layers.append(Layer(w, b, act))
    return Mlp(tuple(layers))


def mlp_forward(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    """Apply the network to a batch (N, input_dim) -> (N, output_dim)."""
    a = np.asarray(x, dtype=float)
    for layer in mlp.layers:
        a = _apply_activation(layer.activation, a @ layer.weights.T + layer.bias)
    return a


# --- mutable training representation ---------------------------------------
# During SGD we work on plain [W, b] copies and only wrap back into Mlp at
# the end, so the frozen/read-only invariant holds for every published value.


def mlp_params(mlp: Mlp) -> list[list[np.ndarray]]:
    return [[layer.weights.copy(), layer.bias.copy()] for layer in mlp.layers]


def params_to_mlp(params: list[list[np.ndarray]], template: Mlp) -> Mlp:
    return Mlp(
        tuple(
            Layer(w, b, layer.activation)
            for (w, b), layer in zip(params, template.layers)
        )
    )


def forward_trace(params, acts, x):
    """Forward keeping per-layer preactivations and outputs for backprop."""
    a = x
    outputs = [x]
    preacts = []
    for (w, b), act in zip(params, acts):
        z = a @ w.T + b
        a = _apply_activation(act, z)
        preacts.append(z)
        outputs.append(a)
    return outputs, preacts


def backprop(params, acts, outputs, preacts, delta):
    """Gradients of a scalar loss given d(loss)/d(output) = delta."""
    grads = [None] * len(params)
    for i in range(len(params) - 1, -1, -1):
        w, _ = params[i]
        dz = delta * _activation_deriv(acts[i], preacts[i], outputs[i + 1])
        grads[i] = [dz.T @ outputs[i], dz.sum(axis=0)]
        delta = dz @ w
    return grads


def reconstruction_loss(encoder: Mlp, decoder: Mlp, x: np.ndarray) -> float:
    """Mean squared reconstruction error of decode(encode(x)) against x."""
    x = np.asarray(x, dtype=float)
    out = mlp_forward(decoder, mlp_forward(encoder, x))
    return float(np.mean((out - x) ** 2))


def reconstruction_grads(params, acts, x):
    """Full-batch MSE loss and per-layer gradients for a chained net on x."""
    outputs, preacts = forward_trace(params, acts, x)
    resid = outputs[-1] - x
    loss = float(np.mean(resid**2))
    delta = 2.0 * resid / resid.size
    return loss, backprop(params, acts, outputs, preacts, delta)


@dataclass(frozen=True)
class SgdConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.05
    divergence_limit: float = 1e6


def train_reconstruction(
    encoder: Mlp,
    decoder: Mlp,
    x: np.ndarray,
    cfg: SgdConfig,
    rng,
    update_encoder: bool = True,
) -> tuple[Mlp, Mlp, list[float]]:
    """Mini-batch SGD on mean squared reconstruction error.

    Returns updated (encoder, decoder) plus the per-epoch full-data loss
    history (history[0] is the pre-training loss). Raises NumericError if
    the loss diverges or goes non-finite.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("need a nonempty (N, dim) matrix")
    if x.shape[1] != encoder.input_dim:
        raise ValueError(
            f"data dim {x.shape[1]} does not match encoder input {encoder.input_dim}"
        )
    n_enc = len(encoder.layers)
    params = mlp_params(encoder) + mlp_params(decoder)
    acts = [l.activation for l in encoder.layers] + [l.activation for l in decoder.layers]
    first_trainable = 0 if update_encoder else n_enc

    history = [_full_loss(params, acts, x, cfg)]
    n = x.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = x[order[start : start + cfg.batch_size]]
            _, grads = reconstruction_grads(params, acts, batch)
            for i in range(first_trainable, len(params)):
                params[i][0] -= cfg.learning_rate * grads[i][0]
                params[i][1] -= cfg.learning_rate * grads[i][1]
        history.append(_full_loss(params, acts, x, cfg, epoch=epoch))
    new_encoder = params_to_mlp(params[:n_enc], encoder) if update_encoder else encoder
    new_decoder = params_to_mlp(params[n_enc:], decoder)
    return new_encoder, new_decoder, history


def _full_loss(params, acts, x, cfg, epoch=None):
    outputs, _ = forward_trace(params, acts, x)
    loss = float(np.mean((outputs[-1] - x) ** 2))
    if not np.isfinite(loss) or loss > cfg.divergence_limit:
        where = "initial state" if epoch is None else f"epoch {epoch}"
        raise NumericError(
            f"reconstruction loss diverged at {where}: {loss!r} "
            f"(lr={cfg.learning_rate}, batch={cfg.batch_size})"
        )
    return loss


def task_seed(base: int, kind: int, *ids: int) -> int:
    """Fold task identifiers into one integer seed, stably across platforms."""
    return int(np.random.SeedSequence([base, kind, *ids]).generate_state(1)[0])


# --- parameter packing (used by gradient checks and refinement) ------------


def flatten_params(param_list) -> np.ndarray:
    return np.concatenate([np.ravel(a) for pair in param_list for a in pair])


def unflatten_params(vec: np.ndarray, template) -> list[list[np.ndarray]]:
    out = []
    pos = 0
    for pair in template:
        rebuilt = []
        for a in pair:
            size = int(np.prod(a.shape)) if a.ndim else 1
            rebuilt.append(vec[pos : pos + size].reshape(a.shape).copy())
            pos += size
        out.append(rebuilt)
    if pos != vec.size:
        raise ValueError("vector length does not match template")
    return out
