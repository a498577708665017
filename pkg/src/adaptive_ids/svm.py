"""Two-class soft-margin SVM trained by sequential minimal optimization.

The trainer is the simplified pairwise scheme: sweep for an index whose
KKT condition is violated beyond tolerance, pair it with the index of
largest error gap (seeded random fallback), and solve the two-variable
subproblem analytically. Kernel values come from a full Gram matrix for
small problems and from a bounded column cache above that.
"""

from __future__ import annotations

import random
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .exceptions import DegenerateLabels, DimensionError

FULL_GRAM_LIMIT = 4000
_COLUMN_CACHE_SIZE = 1024


@dataclass(frozen=True)
class Kernel:
    """Linear or RBF kernel; gamma applies to RBF only."""

    name: str
    gamma: float | None = None

    def __post_init__(self):
        if self.name not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.name == "rbf" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("rbf kernel needs gamma > 0")

    @classmethod
    def linear(cls) -> "Kernel":
        return cls("linear")

    @classmethod
    def rbf(cls, gamma: float) -> "Kernel":
        return cls("rbf", gamma)

    def eval(self, x: np.ndarray, z: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        if x.shape != z.shape:
            raise DimensionError(f"kernel inputs disagree in width: {x.shape} vs {z.shape}")
        if self.name == "linear":
            return float(x @ z)
        diff = x - z
        return float(np.exp(-self.gamma * (diff @ diff)))

    def matrix(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Pairwise kernel values, shape (len(x), len(z))."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        if x.shape[1] != z.shape[1]:
            raise DimensionError(f"kernel inputs disagree in width: {x.shape[1]} vs {z.shape[1]}")
        if self.name == "linear":
            return x @ z.T
        sq = (
            np.sum(x * x, axis=1)[:, None]
            + np.sum(z * z, axis=1)[None, :]
            - 2.0 * (x @ z.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.gamma * sq)


@dataclass(frozen=True)
class SmoConfig:
    """Soft-margin and stopping settings for the pairwise optimizer.

    max_passes counts consecutive full sweeps without any update before
    stopping; max_sweeps bounds total sweeps as a safety valve.
    """

    C: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 10
    seed: int = 0
    max_sweeps: int = 1000

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class SvmModel:
    """Support vectors with signed dual coefficients (alpha_i * y_i) and bias."""

    support_vectors: np.ndarray  # (m, d)
    coefficients: np.ndarray  # (m,)
    bias: float
    kernel: Kernel
    C: float

    @property
    def input_width(self) -> int:
        return self.support_vectors.shape[1]


class _GramSource:
    """Kernel column provider: full matrix when small, bounded cache when large."""

    def __init__(self, x: np.ndarray, kernel: Kernel):
        self._x = x
        self._kernel = kernel
        n = x.shape[0]
        self._full = kernel.matrix(x, x) if n <= FULL_GRAM_LIMIT else None
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def column(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[:, i]
        cached = self._cache.get(i)
        if cached is not None:
            self._cache.move_to_end(i)
            return cached
        column = self._kernel.matrix(self._x, self._x[i : i + 1])[:, 0]
        self._cache[i] = column
        if len(self._cache) > _COLUMN_CACHE_SIZE:
            self._cache.popitem(last=False)
        return column

    def diag(self, i: int) -> float:
        if self._full is not None:
            return float(self._full[i, i])
        return self._kernel.eval(self._x[i], self._x[i])


def smo_train(
    x: np.ndarray,
    y: np.ndarray,
    config: SmoConfig,
    kernel: Kernel,
) -> SvmModel:
    """Optimize the dual and return the model with zero-coefficient vectors dropped."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    if n == 0 or not (np.any(y > 0) and np.any(y < 0)):
        raise DegenerateLabels("training needs examples of both classes")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be -1 or +1")

    gram = _GramSource(x, kernel)
    rng = random.Random(config.seed)
    alpha = np.zeros(n)
    # Running bias; errors[i] = f(x_i) - y_i with the bias folded in.
    b = 0.0
    errors = -y.copy()

    C = config.C
    tol = config.tolerance
    quiet_passes = 0
    sweeps = 0
    while quiet_passes < config.max_passes and sweeps < config.max_sweeps:
        sweeps += 1
        changed = 0
        for i in range(n):
            e_i = errors[i]
            r_i = e_i * y[i]
            if not ((r_i < -tol and alpha[i] < C) or (r_i > tol and alpha[i] > 0)):
                continue
            j = _pick_second(i, alpha, errors, C, rng, n)
            delta_b = (
                _optimize_pair(i, j, x, y, alpha, errors, gram, C)
                if j is not None
                else None
            )
            if delta_b is None:
                # Heuristic pair made no progress; try a few random partners.
                for _ in range(4):
                    j = rng.randrange(n - 1)
                    if j >= i:
                        j += 1
                    delta_b = _optimize_pair(i, j, x, y, alpha, errors, gram, C)
                    if delta_b is not None:
                        break
            if delta_b is not None:
                b += delta_b
                changed += 1
        if changed == 0:
            quiet_passes += 1
        else:
            quiet_passes = 0

    # The error cache tracks f(x) = g(x) + b, so g is recoverable exactly.
    g = errors + y - b
    b = _final_bias(alpha, y, g, C)
    keep = alpha > 0
    return SvmModel(
        support_vectors=x[keep].copy(),
        coefficients=(alpha * y)[keep],
        bias=b,
        kernel=kernel,
        C=C,
    )


def _pick_second(
    i: int,
    alpha: np.ndarray,
    errors: np.ndarray,
    C: float,
    rng: random.Random,
    n: int,
) -> int | None:
    if n < 2:
        return None
    unbound = np.flatnonzero((alpha > 0) & (alpha < C))
    candidates = unbound[unbound != i]
    if candidates.size:
        gaps = np.abs(errors[i] - errors[candidates])
        return int(candidates[int(np.argmax(gaps))])
    j = rng.randrange(n - 1)
    return j + 1 if j >= i else j


def _optimize_pair(
    i: int,
    j: int,
    x: np.ndarray,
    y: np.ndarray,
    alpha: np.ndarray,
    errors: np.ndarray,
    gram: _GramSource,
    C: float,
) -> float | None:
    """Analytically solve the two-variable subproblem; None when no progress."""
    if i == j:
        return None
    a_i, a_j = alpha[i], alpha[j]
    if y[i] != y[j]:
        low, high = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
    else:
        low, high = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
    if low >= high:
        return None

    col_i = gram.column(i)
    col_j = gram.column(j)
    k_ii, k_jj, k_ij = gram.diag(i), gram.diag(j), float(col_i[j])
    eta = 2.0 * k_ij - k_ii - k_jj
    if eta >= 0:
        return None

    e_i, e_j = errors[i], errors[j]
    new_j = a_j - y[j] * (e_i - e_j) / eta
    new_j = min(max(new_j, low), high)
    if abs(new_j - a_j) < 1e-12:
        return None
    new_i = a_i + y[i] * y[j] * (a_j - new_j)

    d_i = (new_i - a_i) * y[i]
    d_j = (new_j - a_j) * y[j]
    b_i = -(e_i + d_i * k_ii + d_j * k_ij)
    b_j = -(e_j + d_i * k_ij + d_j * k_jj)
    if 0.0 < new_i < C:
        delta_b = b_i
    elif 0.0 < new_j < C:
        delta_b = b_j
    else:
        delta_b = (b_i + b_j) / 2.0

    alpha[i], alpha[j] = new_i, new_j
    errors += d_i * col_i + d_j * col_j + delta_b
    return delta_b


def _final_bias(alpha: np.ndarray, y: np.ndarray, g: np.ndarray, C: float) -> float:
    """Bias consistent with the KKT conditions at the final alphas.

    With unbound support vectors the bias is pinned (average y - g over
    them); with every alpha at a bound it is only constrained to an
    interval, whose midpoint keeps all margins legal. The running bias
    accumulated from pair updates can drift outside that interval.
    """
    eps = 1e-12
    unbound = (alpha > eps) & (alpha < C - eps)
    targets = y - g
    if unbound.any():
        return float(np.mean(targets[unbound]))
    lows: list[float] = []
    highs: list[float] = []
    for a_i, y_i, target in zip(alpha, y, targets):
        at_upper = a_i >= C - eps
        if y_i > 0:
            (highs if at_upper else lows).append(target)
        else:
            (lows if at_upper else highs).append(target)
    if not lows and not highs:
        return 0.0
    if not lows:
        return float(min(highs))
    if not highs:
        return float(max(lows))
    return float((max(lows) + min(highs)) / 2.0)


def decision_value(model: SvmModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != model.input_width:
        raise DimensionError(
            f"input width {x.shape[0]} does not match model width {model.input_width}"
        )
    k = model.kernel.matrix(model.support_vectors, x[None, :])[:, 0]
    return float(model.coefficients @ k + model.bias)


def decision_values(model: SvmModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.input_width:
        raise DimensionError(
            f"input width {x.shape[1]} does not match model width {model.input_width}"
        )
    k = model.kernel.matrix(x, model.support_vectors)
    return k @ model.coefficients + model.bias


def dual_objective(alpha: np.ndarray, y: np.ndarray, gram: np.ndarray) -> float:
    """Value of the dual objective for a feasible alpha vector."""
    signed = alpha * y
    return float(np.sum(alpha) - 0.5 * signed @ gram @ signed)


class SmoSvmClassifier(ClassifierMixin, BaseEstimator):
    """Estimator facade over the pairwise trainer; labels are -1/+1.

    gamma=None uses 1 / n_features. Ties on the decision boundary
    (exactly zero) classify as +1.
    """

    def __init__(
        self,
        C: float = 1.0,
        kernel: str = "rbf",
        gamma: float | None = None,
        tolerance: float = 1e-3,
        max_passes: int = 10,
        max_sweeps: int = 1000,
        seed: int = 0,
    ):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tolerance = tolerance
        self.max_passes = max_passes
        self.max_sweeps = max_sweeps
        self.seed = seed

    def _kernel(self, width: int) -> Kernel:
        if self.kernel == "linear":
            return Kernel.linear()
        gamma = self.gamma if self.gamma is not None else 1.0 / width
        return Kernel.rbf(gamma)

    def fit(self, X, y) -> "SmoSvmClassifier":
        X = check_array(X)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        config = SmoConfig(
            C=self.C,
            tolerance=self.tolerance,
            max_passes=self.max_passes,
            seed=self.seed,
            max_sweeps=self.max_sweeps,
        )
        self.model_ = smo_train(X, y, config, self._kernel(X.shape[1]))
        return self

    def _require_fitted(self) -> SvmModel:
        if not hasattr(self, "model_"):
            raise NotFittedError("classifier is not fitted")
        return self.model_

    def decision_function(self, X) -> np.ndarray:
        return decision_values(self._require_fitted(), check_array(X))

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return np.where(scores >= 0.0, 1.0, -1.0)
