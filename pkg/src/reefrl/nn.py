"""Minimal fully-connected Q-network stack in double precision.

Forward pass, exact reverse-mode gradients of a Huber regression loss on
selected action outputs, Adam updates, and a central-difference gradient
verifier.  Hidden layers are rectified, the output layer is linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PARAMS_FORMAT_VERSION = 1

HUBER_DELTA = 1.0

ADAM_LR = 3e-4
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class MlpParams:
    """Weights and biases of a rectifier MLP with a linear output layer.

    ``weights[k]`` has shape (layer_sizes[k+1], layer_sizes[k]), row-major;
    ``biases[k]`` has shape (layer_sizes[k+1],).
    """

    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self) -> None:
        if self.activation != "relu":
            raise ValueError(f"unsupported activation: {self.activation!r}")
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise ValueError("weight count does not match layer sizes")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (self.layer_sizes[k + 1], self.layer_sizes[k])
            if w.shape != expect:
                raise ValueError(f"layer {k} weight shape {w.shape} != {expect}")
            if b.shape != (self.layer_sizes[k + 1],):
                raise ValueError(f"layer {k} bias shape {b.shape} mismatch")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "MlpParams":
        return MlpParams(
            layer_sizes=list(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            activation=self.activation,
        )

    def to_dict(self) -> dict:
        return {
            "format_version": PARAMS_FORMAT_VERSION,
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "activation": self.activation,
        }

    @staticmethod
    def from_dict(d: dict) -> "MlpParams":
        version = d.get("format_version")
        if version != PARAMS_FORMAT_VERSION:
            raise FormatVersionError(
                f"unsupported network format version {version!r}, "
                f"expected {PARAMS_FORMAT_VERSION}"
            )
        return MlpParams(
            layer_sizes=[int(n) for n in d["layer_sizes"]],
            weights=[np.asarray(w, dtype=np.float64) for w in d["weights"]],
            biases=[np.asarray(b, dtype=np.float64) for b in d["biases"]],
            activation=d["activation"],
        )


class FormatVersionError(ValueError):
    """Serialized parameters carry an unknown format version."""


def init_mlp(layer_sizes: list[int], rng: np.random.Generator) -> MlpParams:
    """Uniform fan-in scaled init (bound sqrt(6/fan_in)), zero biases."""
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return MlpParams(layer_sizes=list(layer_sizes), weights=weights, biases=biases)


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Evaluate the network on a single input vector or a batch (rows)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.layer_sizes[0]:
        raise ValueError(
            f"input width {x.shape[-1]} != expected {params.layer_sizes[0]}"
        )
    a = x
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ w.T + b
        if k != last:
            np.maximum(a, 0.0, out=a)
    return a


def _forward_cached(params: MlpParams, x: np.ndarray):
    """Batch forward keeping pre-activations for the backward pass."""
    activations = [x]
    pre = []
    a = x
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        pre.append(z)
        a = np.maximum(z, 0.0) if k != last else z
        activations.append(a)
    return pre, activations


def huber(residual: np.ndarray, delta: float = HUBER_DELTA) -> np.ndarray:
    r = np.abs(residual)
    return np.where(r <= delta, 0.5 * residual ** 2, delta * (r - 0.5 * delta))


def huber_grad(residual: np.ndarray, delta: float = HUBER_DELTA) -> np.ndarray:
    return np.clip(residual, -delta, delta)


def loss_and_grad(
    params: MlpParams,
    inputs: np.ndarray,
    action_indices: np.ndarray,
    targets: np.ndarray,
) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Mean Huber loss between Q(s)[a] and target, with exact gradients.

    Non-selected action outputs receive zero gradient.  Returns
    (loss, [(dW, db) per layer]).
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    action_indices = np.asarray(action_indices, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)
    batch = inputs.shape[0]
    n_out = params.layer_sizes[-1]
    if np.any(action_indices < 0) or np.any(action_indices >= n_out):
        raise IndexError("action index out of range")

    pre, acts = _forward_cached(params, inputs)
    q = acts[-1][np.arange(batch), action_indices]
    residual = q - targets
    loss = float(np.mean(huber(residual)))

    d_out = np.zeros((batch, n_out), dtype=np.float64)
    d_out[np.arange(batch), action_indices] = huber_grad(residual) / batch

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * params.n_layers  # type: ignore[list-item]
    d = d_out
    for k in range(params.n_layers - 1, -1, -1):
        grads[k] = (d.T @ acts[k], d.sum(axis=0))
        if k > 0:
            d = (d @ params.weights[k]) * (pre[k - 1] > 0.0)
    return loss, grads


@dataclass
class AdamState:
    """First/second moment accumulators shaped like the parameters."""

    m_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_weights: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int = 0
    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @staticmethod
    def for_params(params: MlpParams, lr: float = ADAM_LR,
                   beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2,
                   eps: float = ADAM_EPS) -> "AdamState":
        return AdamState(
            m_weights=[np.zeros_like(w) for w in params.weights],
            m_biases=[np.zeros_like(b) for b in params.biases],
            v_weights=[np.zeros_like(w) for w in params.weights],
            v_biases=[np.zeros_like(b) for b in params.biases],
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )


def adam_step(
    params: MlpParams,
    grads: list[tuple[np.ndarray, np.ndarray]],
    state: AdamState,
) -> tuple[MlpParams, AdamState]:
    """Bias-corrected Adam update; mutates params/state in place."""
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for k, (dw, db) in enumerate(grads):
        if dw.shape != params.weights[k].shape or db.shape != params.biases[k].shape:
            raise ValueError(f"gradient shape mismatch at layer {k}")
        for p, g, m, v in (
            (params.weights[k], dw, state.m_weights[k], state.v_weights[k]),
            (params.biases[k], db, state.m_biases[k], state.v_biases[k]),
        ):
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


def finite_diff_check(
    params: MlpParams,
    x: np.ndarray,
    action_index: int,
    target: float,
    h: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Coordinatewise error |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
    """
    x = np.asarray(x, dtype=np.float64)
    actions = np.array([action_index])
    targets = np.array([float(target)])

    def loss_at() -> float:
        out = forward(params, x)
        residual = out[action_index] - target
        return float(huber(np.array([residual]))[0])

    _, grads = loss_and_grad(params, x[None, :], actions, targets)
    worst = 0.0
    for k in range(params.n_layers):
        for arr, g_ad in ((params.weights[k], grads[k][0]),
                          (params.biases[k], grads[k][1])):
            flat = arr.reshape(-1)
            g_flat = g_ad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = loss_at()
                flat[i] = orig - h
                down = loss_at()
                flat[i] = orig
                g_fd = (up - down) / (2.0 * h)
                denom = max(1e-8, abs(g_flat[i]) + abs(g_fd))
                worst = max(worst, abs(g_flat[i] - g_fd) / denom)
    return worst
