"""Feedforward multilayer perceptron with two full-batch trainers.

The network is plain data (per-layer weight matrices and bias vectors,
logistic sigmoid on every layer, single output unit). Training minimizes
mean squared error over the whole batch with either sign-based resilient
step adaptation or damped Gauss-Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .exceptions import (
    DimensionError,
    EmptyBatch,
    InvalidArchitecture,
    ModelTooLarge,
    NumericalFailure,
)

_MAX_LAMBDA = 1e12


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class MlpNetwork:
    """Layered affine-then-sigmoid network; the last layer has one unit."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]  # weights[l] has shape (out, in)
    biases: list[np.ndarray]  # biases[l] has shape (out,)

    @property
    def input_width(self) -> int:
        return self.layer_sizes[0]

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


def parameter_count(layer_sizes: Sequence[int]) -> int:
    return sum(
        n_out * n_in + n_out for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:])
    )


def init_network(layer_sizes: Sequence[int], seed: int) -> MlpNetwork:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise InvalidArchitecture(f"unusable layer sizes: {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    return MlpNetwork(sizes, weights, biases)


def _check_batch(net: MlpNetwork, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != net.input_width:
        raise DimensionError(
            f"input width {x.shape[1]} does not match network input {net.input_width}"
        )
    return x


def _forward_pass(net: MlpNetwork, x: np.ndarray) -> list[np.ndarray]:
    """Activations per layer, input included; all shaped (n, layer size)."""
    activations = [x]
    for w, b in zip(net.weights, net.biases):
        activations.append(sigmoid(activations[-1] @ w.T + b))
    return activations


def forward(net: MlpNetwork, x: np.ndarray) -> float:
    """Network output for a single input vector, in (0, 1)."""
    batch = _check_batch(net, np.asarray(x))
    return float(_forward_pass(net, batch)[-1][0, 0])


def forward_batch(net: MlpNetwork, x: np.ndarray) -> np.ndarray:
    batch = _check_batch(net, x)
    return _forward_pass(net, batch)[-1][:, 0]


def mean_squared_error(net: MlpNetwork, x: np.ndarray, targets: np.ndarray) -> float:
    out = forward_batch(net, x)
    return float(np.mean((out - np.asarray(targets, dtype=np.float64)) ** 2))


def gradient(
    net: MlpNetwork, x: np.ndarray, targets: np.ndarray
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact gradient of batch MSE, one (dW, db) pair per layer."""
    batch = _check_batch(net, x)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if batch.shape[0] == 0:
        raise EmptyBatch("gradient needs at least one example")
    if targets.shape[0] != batch.shape[0]:
        raise DimensionError("targets and inputs disagree in length")

    activations = _forward_pass(net, batch)
    n = batch.shape[0]
    out = activations[-1]
    # d(MSE)/d(out) = 2/n * (out - t); sigmoid' folded in via a*(1-a).
    delta = (2.0 / n) * (out - targets[:, None]) * out * (1.0 - out)
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.weights)  # type: ignore[list-item]
    for layer in range(len(net.weights) - 1, -1, -1):
        a_prev = activations[layer]
        grads[layer] = (delta.T @ a_prev, delta.sum(axis=0))
        if layer > 0:
            a = activations[layer]
            delta = (delta @ net.weights[layer]) * a * (1.0 - a)
    return grads


def flatten_params(net: MlpNetwork) -> np.ndarray:
    parts = []
    for w, b in zip(net.weights, net.biases):
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def set_params_from_flat(net: MlpNetwork, flat: np.ndarray) -> None:
    offset = 0
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        net.weights[i] = flat[offset : offset + w.size].reshape(w.shape)
        offset += w.size
        net.biases[i] = flat[offset : offset + b.size].copy()
        offset += b.size


def flatten_gradient(grads: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    parts = []
    for dw, db in grads:
        parts.append(dw.ravel())
        parts.append(db)
    return np.concatenate(parts)


@dataclass(frozen=True)
class RpropConfig:
    """Resilient-propagation constants (classical defaults)."""

    delta0: float = 0.1
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    delta_max: float = 50.0
    delta_min: float = 1e-6
    max_epochs: int = 1000
    target_mse: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta_minus < 1.0 < self.eta_plus:
            raise ValueError("step factors must satisfy 0 < eta- < 1 < eta+")
        if not 0.0 < self.delta_min <= self.delta0 <= self.delta_max:
            raise ValueError("step sizes must satisfy 0 < delta_min <= delta0 <= delta_max")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be non-negative")


@dataclass(frozen=True)
class LmConfig:
    """Damped Gauss-Newton settings; the solver is cubic in parameter count."""

    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    max_epochs: int = 100
    target_mse: float = 0.0
    max_parameters: int = 5000

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if self.lambda_up <= 1.0 or not 0.0 < self.lambda_down < 1.0:
            raise ValueError("damping factors must satisfy lambda_up > 1, 0 < lambda_down < 1")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be non-negative")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mse: float
    damping: float | None = None


def train_rprop(
    net: MlpNetwork,
    x: np.ndarray,
    targets: np.ndarray,
    config: RpropConfig,
) -> tuple[MlpNetwork, list[EpochStats]]:
    """Sign-based per-parameter step adaptation on the full batch.

    Sign agreement grows the step by eta+, a sign flip shrinks it by eta-,
    suppresses the update, and zeroes the stored gradient; steps always
    stay within [delta_min, delta_max].
    """
    net = net.copy()
    log: list[EpochStats] = []
    if config.max_epochs == 0:
        return net, log

    params = flatten_params(net)
    steps = np.full(params.shape, config.delta0)
    prev_grad = np.zeros_like(params)

    for epoch in range(1, config.max_epochs + 1):
        current = mean_squared_error(net, x, targets)
        if current <= config.target_mse:
            break
        grad = flatten_gradient(gradient(net, x, targets))
        sign_product = prev_grad * grad
        grew = sign_product > 0
        flipped = sign_product < 0
        steps[grew] = np.minimum(steps[grew] * config.eta_plus, config.delta_max)
        steps[flipped] = np.maximum(steps[flipped] * config.eta_minus, config.delta_min)
        grad[flipped] = 0.0
        params = params - np.sign(grad) * steps
        if not np.all(np.isfinite(params)):
            raise NumericalFailure("training produced non-finite weights")
        set_params_from_flat(net, params)
        prev_grad = grad
        after = mean_squared_error(net, x, targets)
        if not np.isfinite(after):
            raise NumericalFailure("training produced a non-finite error")
        log.append(EpochStats(epoch=epoch, mse=after))
        if after <= config.target_mse:
            break
    return net, log


def output_jacobian(net: MlpNetwork, x: np.ndarray) -> np.ndarray:
    """Per-sample derivative of the scalar output w.r.t. every parameter.

    Shape (n_samples, n_parameters), parameter order matching
    flatten_params.
    """
    batch = _check_batch(net, x)
    activations = _forward_pass(net, batch)
    n = batch.shape[0]
    out = activations[-1]
    delta = out * (1.0 - out)  # d out / d z_last, shape (n, 1)
    layer_parts: list[np.ndarray] = [None] * len(net.weights)  # type: ignore[list-item]
    for layer in range(len(net.weights) - 1, -1, -1):
        a_prev = activations[layer]
        dw = np.einsum("no,ni->noi", delta, a_prev).reshape(n, -1)
        layer_parts[layer] = np.concatenate([dw, delta], axis=1)
        if layer > 0:
            a = activations[layer]
            delta = (delta @ net.weights[layer]) * a * (1.0 - a)
    return np.concatenate(layer_parts, axis=1)


def train_lm(
    net: MlpNetwork,
    x: np.ndarray,
    targets: np.ndarray,
    config: LmConfig,
) -> tuple[MlpNetwork, list[EpochStats]]:
    """Damped Gauss-Newton on the residuals, with accept/reject damping control.

    Each epoch solves (J'J + lambda*I) step = J'residual via Cholesky;
    a failed factorization or a rejected step escalates lambda, a
    successful step relaxes it.
    """
    n_params = parameter_count(net.layer_sizes)
    if n_params > config.max_parameters:
        raise ModelTooLarge(
            f"{n_params} parameters exceed the trainer cap of {config.max_parameters}"
        )
    batch = _check_batch(net, x)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if batch.shape[0] == 0:
        raise EmptyBatch("training needs at least one example")

    net = net.copy()
    log: list[EpochStats] = []
    lam = config.lambda0
    params = flatten_params(net)
    identity = np.eye(n_params)

    for epoch in range(1, config.max_epochs + 1):
        current = mean_squared_error(net, batch, targets)
        if current <= config.target_mse:
            break
        residual = targets - forward_batch(net, batch)
        jac = output_jacobian(net, batch)
        jtj = jac.T @ jac
        jte = jac.T @ residual

        accepted = False
        while not accepted:
            try:
                factor = scipy.linalg.cho_factor(jtj + lam * identity)
                step = scipy.linalg.cho_solve(factor, jte)
            except scipy.linalg.LinAlgError:
                lam *= config.lambda_up
                if lam > _MAX_LAMBDA:
                    raise NumericalFailure(
                        "normal equations unsolvable even at maximum damping"
                    ) from None
                continue
            candidate = params + step
            set_params_from_flat(net, candidate)
            new_error = mean_squared_error(net, batch, targets)
            if new_error < current:
                params = candidate
                lam *= config.lambda_down
                accepted = True
            else:
                set_params_from_flat(net, params)
                lam *= config.lambda_up
                if lam > _MAX_LAMBDA:
                    # No descent direction left at any damping: converged.
                    return net, log
        log.append(EpochStats(epoch=epoch, mse=new_error, damping=lam))
        if new_error <= config.target_mse:
            break
    return net, log


class MlpClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier over encoded vectors with a single sigmoid output.

    Targets are 0/1; the decision threshold is 0.5, inclusive on the
    positive side.
    """

    def __init__(
        self,
        hidden_layers: tuple[int, ...] = (25,),
        trainer: str = "rprop",
        rprop_config: RpropConfig | None = None,
        lm_config: LmConfig | None = None,
        seed: int = 0,
    ):
        self.hidden_layers = hidden_layers
        self.trainer = trainer
        self.rprop_config = rprop_config
        self.lm_config = lm_config
        self.seed = seed

    def fit(self, X, y) -> "MlpClassifier":
        X = check_array(X)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        sizes = (X.shape[1], *self.hidden_layers, 1)
        net = init_network(sizes, self.seed)
        if self.trainer == "rprop":
            config = self.rprop_config or RpropConfig()
            self.network_, self.epoch_log_ = train_rprop(net, X, y, config)
        elif self.trainer == "lm":
            config = self.lm_config or LmConfig()
            self.network_, self.epoch_log_ = train_lm(net, X, y, config)
        else:
            raise ValueError(f"unknown trainer {self.trainer!r}")
        return self

    def _require_fitted(self) -> MlpNetwork:
        if not hasattr(self, "network_"):
            raise NotFittedError("classifier is not fitted")
        return self.network_

    def decision_scores(self, X) -> np.ndarray:
        net = self._require_fitted()
        return forward_batch(net, check_array(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_scores(X) >= 0.5).astype(int)
