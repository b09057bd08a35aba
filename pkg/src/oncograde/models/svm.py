"""Soft-margin SVM trained with simplified sequential minimal optimization,
wrapped one-vs-rest for the three-class problem.

The solver optimizes pairs of dual coefficients analytically: the first
index sweeps over KKT violators, the second is drawn uniformly at random
from the remaining points. Pairs whose curvature eta = 2K_ij - K_ii - K_jj
is non-negative (possible for the indefinite sigmoid kernel) are skipped,
so training always terminates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import RngStream, as_matrix
from ..dataset import N_CLASSES
from .base import KernelSpec, kernel_matrix, proba_to_labels

# hard cap on total sweeps; convergence normally exits via clean passes
_MAX_SWEEPS = 1000
_MIN_ALPHA_STEP = 1e-8
# snap coefficients this close to the box bounds onto them; float noise at
# the bounds otherwise leaves permanently sub-threshold violators behind
_BOUND_EPS = 1e-10


@dataclass
class BinarySvm:
    """Dual solution for one two-class machine, labels in {-1, +1}."""

    kernel: KernelSpec
    alphas: np.ndarray
    bias: float
    X: np.ndarray
    y: np.ndarray
    C: float

    @property
    def support_mask(self) -> np.ndarray:
        return self.alphas > 0

    def decision(self, Xq) -> np.ndarray:
        Xq = as_matrix(Xq)
        m = self.support_mask
        if not m.any():
            return np.full(Xq.shape[0], self.bias)
        K = kernel_matrix(self.kernel, Xq, self.X[m])
        return K @ (self.alphas[m] * self.y[m]) + self.bias


def dual_objective(svm: BinarySvm) -> float:
    """Value of the dual: sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = svm.alphas * svm.y
    K = kernel_matrix(svm.kernel, svm.X, svm.X)
    return float(svm.alphas.sum() - 0.5 * ay @ K @ ay)


def kkt_violation(svm: BinarySvm, tol: float = 1e-3) -> float:
    """Largest violation of the tol-relaxed KKT conditions over training points."""
    E = svm.decision(svm.X) - svm.y
    r = svm.y * E
    viol = np.zeros_like(r)
    lower = svm.alphas < svm.C  # margin must not be violated from below
    viol[lower] = np.maximum(viol[lower], -r[lower] - tol)
    upper = svm.alphas > 0
    viol[upper] = np.maximum(viol[upper], r[upper] - tol)
    return float(viol.max(initial=0.0))


def train_svm_binary(
    X,
    y,
    kernel: KernelSpec,
    C: float = 1.0,
    tol: float = 1e-3,
    max_passes: int = 10,
    stream: RngStream | None = None,
) -> BinarySvm:
    """Simplified SMO on labels in {-1, +1}.

    Terminates after ``max_passes`` consecutive sweeps without an update
    (for positive-definite kernels that means the KKT conditions hold
    within tol) or at a hard sweep cap for indefinite kernels.
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=float)
    if not ((y == 1).any() and (y == -1).any()):
        raise ValueError("both classes must be present for binary SVM training")
    if stream is None:
        stream = RngStream(0)

    n = X.shape[0]
    K = kernel_matrix(kernel, X, X)
    alphas = np.zeros(n)
    b = 0.0
    # F_i = sum_j alpha_j y_j K_ij, maintained incrementally
    F = np.zeros(n)

    def try_pair(i: int, j: int) -> bool:
        nonlocal b, F
        E_i = F[i] + b - y[i]
        E_j = F[j] + b - y[j]
        a_i_old, a_j_old = alphas[i], alphas[j]
        if y[i] != y[j]:
            L = max(0.0, a_j_old - a_i_old)
            H = min(C, C + a_j_old - a_i_old)
        else:
            L = max(0.0, a_i_old + a_j_old - C)
            H = min(C, a_i_old + a_j_old)
        if L == H:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0:
            return False

        a_j = a_j_old - y[j] * (E_i - E_j) / eta
        a_j = min(max(a_j, L), H)
        if abs(a_j - a_j_old) < _MIN_ALPHA_STEP:
            return False
        a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)
        a_i = min(max(a_i, 0.0), C)
        a_i = 0.0 if a_i < _BOUND_EPS else (C if a_i > C - _BOUND_EPS else a_i)
        a_j = 0.0 if a_j < _BOUND_EPS else (C if a_j > C - _BOUND_EPS else a_j)

        b1 = b - E_i - y[i] * (a_i - a_i_old) * K[i, i] - y[j] * (a_j - a_j_old) * K[i, j]
        b2 = b - E_j - y[i] * (a_i - a_i_old) * K[i, j] - y[j] * (a_j - a_j_old) * K[j, j]
        if 0 < a_i < C:
            b = b1
        elif 0 < a_j < C:
            b = b2
        else:
            b = (b1 + b2) / 2.0

        F += (a_i - a_i_old) * y[i] * K[i] + (a_j - a_j_old) * y[j] * K[j]
        alphas[i], alphas[j] = a_i, a_j
        return True

    passes = 0
    sweeps = 0
    while passes < max_passes and sweeps < _MAX_SWEEPS:
        changed = 0
        for i in range(n):
            r = y[i] * (F[i] + b - y[i])
            if not ((r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0)):
                continue
            # second index: random start, then scan the rest so a blocked
            # draw cannot stall convergence
            start = stream.randint(n - 1)
            for step in range(n - 1):
                j = (start + step) % (n - 1)
                if j >= i:
                    j += 1
                if try_pair(i, j):
                    changed += 1
                    break
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0

    return BinarySvm(kernel=kernel, alphas=alphas, bias=float(b), X=X, y=y, C=C)


@dataclass
class SvmOvrModel:
    family = "svm_ovr"
    kernel: KernelSpec
    C: float
    machines: list[dict]  # per class: support_x, support_coef (alpha*y), bias
    n_features: int

    def decision_matrix(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"dimension mismatch: model expects {self.n_features} features, got {X.shape[1]}"
            )
        cols = []
        for mach in self.machines:
            sx = np.asarray(mach["support_x"], dtype=float)
            coef = np.asarray(mach["support_coef"], dtype=float)
            if sx.size == 0:
                cols.append(np.full(X.shape[0], mach["bias"]))
            else:
                cols.append(kernel_matrix(self.kernel, X, sx) @ coef + mach["bias"])
        return np.column_stack(cols) if X.shape[0] else np.empty((0, N_CLASSES))

    def predict_proba(self, X) -> np.ndarray:
        d = self.decision_matrix(X)
        if d.shape[0] == 0:
            return np.empty((0, N_CLASSES))
        shifted = d - d.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return proba_to_labels(self.decision_matrix(X))

    def to_params(self) -> dict:
        return {
            "kernel": {
                "kind": self.kernel.kind,
                "gamma": self.kernel.gamma,
                "degree": self.kernel.degree,
                "coef0": self.kernel.coef0,
            },
            "C": self.C,
            "n_features": self.n_features,
            "machines": [
                {
                    "support_x": np.asarray(m["support_x"]).tolist(),
                    "support_coef": np.asarray(m["support_coef"]).tolist(),
                    "bias": float(m["bias"]),
                }
                for m in self.machines
            ],
        }

    @classmethod
    def from_params(cls, params: dict) -> "SvmOvrModel":
        k = params["kernel"]
        return cls(
            kernel=KernelSpec(kind=k["kind"], gamma=k["gamma"], degree=k["degree"], coef0=k["coef0"]),
            C=params["C"],
            machines=params["machines"],
            n_features=params["n_features"],
        )


def train_svm_ovr(
    X,
    y,
    kernel: KernelSpec,
    C: float = 1.0,
    tol: float = 1e-3,
    max_passes: int = 10,
    stream: RngStream | None = None,
) -> SvmOvrModel:
    """One binary machine per class (class c = +1, rest = -1)."""
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if np.unique(y).size < 2:
        raise ValueError("at least 2 classes required for one-vs-rest training")
    if stream is None:
        stream = RngStream(0)

    machines = []
    for cls in range(N_CLASSES):
        if not (y == cls).any():
            # absent class: constant decision -1, never wins against a real machine
            machines.append({"support_x": np.empty((0, X.shape[1])), "support_coef": np.empty(0), "bias": -1.0})
            continue
        ypm = np.where(y == cls, 1.0, -1.0)
        svm = train_svm_binary(X, ypm, kernel, C, tol, max_passes, stream.derive(cls))
        m = svm.support_mask
        machines.append(
            {
                "support_x": svm.X[m],
                "support_coef": svm.alphas[m] * svm.y[m],
                "bias": svm.bias,
            }
        )
    return SvmOvrModel(kernel=kernel, C=C, machines=machines, n_features=X.shape[1])
