"""Objective functions with exact gradients and Hessians.

All objectives act on flat vectors. Matrix variables (sparse coding over the
Birkhoff polytope) are flattened row-major, matching `socgs.regions.Birkhoff`.
"""

from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit

# Smallest eigenvalue accepted as positive semidefinite.
_PSD_TOL = 1e-10


class Objective:
    """Value / gradient / Hessian access plus curvature metadata.

    Attributes
    ----------
    mu, L, L2 : float
        Strong convexity, gradient Lipschitz and Hessian Lipschitz constants.
    f_opt, x_opt : float or None, ndarray or None
        Optimal value and minimizer over the feasible region, when known.
    is_quadratic : bool
        True when ``f`` is exactly quadratic, so that an exact line search
        along ``d`` is ``-<grad, d> / curvature(x, d)``.
    """

    name = "objective"
    is_quadratic = False

    def __init__(self, dim: int, mu: float, L: float, L2: float):
        self.dim = dim
        self.mu = float(mu)
        self.L = float(L)
        self.L2 = float(L2)
        self.f_opt: Optional[float] = None
        self.x_opt: Optional[np.ndarray] = None

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def hess_vec(self, x, d) -> np.ndarray:
        return self.hessian(x) @ d

    def curvature(self, x, d) -> float:
        """``d^T Hess f(x) d``."""
        return float(d @ self.hess_vec(x, d))

    def line_function(self, x, d):
        """``gamma -> f(x + gamma d) - f(x)``, the function a line search minimizes.

        Subclasses override this with a form that avoids cancellation, so
        that the decrease stays resolvable when it is far below ``eps * |f|``.
        """
        x = self._vec(x)
        f0 = self.value(x)
        return lambda t: self.value(x + t * d) - f0

    def hessian_eig_bounds(self, x) -> tuple[float, float]:
        """Smallest and largest eigenvalue of the Hessian at ``x``."""
        w = np.linalg.eigvalsh(self.hessian(x))
        return float(w[0]), float(w[-1])

    def with_optimum(self, f_opt: float, x_opt=None) -> "Objective":
        """Copy of this objective with reference optimum metadata attached."""
        other = copy.copy(self)
        other.f_opt = float(f_opt)
        other.x_opt = None if x_opt is None else np.asarray(x_opt, dtype=float).copy()
        return other

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, objective expects ({self.dim},)")
        return x


class QuadraticObjective(Objective):
    """``f(x) = 1/2 x^T A x - b^T x``."""

    name = "quadratic"
    is_quadratic = True

    def __init__(self, A, b):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        n = b.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A has shape {A.shape}, b has length {n}")
        if not np.allclose(A, A.T, rtol=0, atol=1e-12):
            raise ValueError("A is not symmetric")
        A = 0.5 * (A + A.T)
        w = np.linalg.eigvalsh(A)
        if w[0] < -_PSD_TOL:
            raise ValueError(f"A is not positive semidefinite (smallest eigenvalue {w[0]:.3e})")
        super().__init__(n, mu=max(w[0], 0.0), L=w[-1], L2=0.0)
        self.A = A
        self.b = b

    def value(self, x):
        x = self._vec(x)
        return float(0.5 * x @ self.A @ x - self.b @ x)

    def gradient(self, x):
        return self.A @ self._vec(x) - self.b

    def hessian(self, x):
        return self.A

    def hess_vec(self, x, d):
        return self.A @ d

    def line_function(self, x, d):
        slope = float(self.gradient(x) @ d)
        curv = float(d @ self.A @ d)
        return lambda t: t * slope + 0.5 * t * t * curv

    def hessian_eig_bounds(self, x):
        return self.mu, self.L


def quadratic_objective(A, b) -> QuadraticObjective:
    return QuadraticObjective(A, b)


def random_quadratic(n: int, cond: float = 100.0, seed=0, center=None) -> QuadraticObjective:
    """Quadratic with eigenvalues log-spaced in ``[1, cond]`` and a random eigenbasis.

    The unconstrained minimizer is ``center`` (standard normal if omitted).
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = np.geomspace(1.0, cond, n) if n > 1 else np.array([1.0])
    A = (Q * eigs) @ Q.T
    A = 0.5 * (A + A.T)
    c = rng.standard_normal(n) if center is None else np.asarray(center, dtype=float)
    return QuadraticObjective(A, A @ c)


class SparseCodingObjective(Objective):
    """``f(X) = sum_i ||y_i - X z_i||^2`` over flattened n x n matrices ``X``.

    The Hessian is block diagonal with ``n`` copies of ``2 sum_i z_i z_i^T``.
    """

    name = "sparse_coding"
    is_quadratic = True

    def __init__(self, Z, Y):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Z.shape != Y.shape:
            raise ValueError(f"Z has shape {Z.shape}, Y has shape {Y.shape}")
        m, n = Z.shape
        if m < 1:
            raise ValueError("need at least one sample")
        self.n = n
        self.Z = Z  # rows are z_i
        self.Y = Y
        self.block = 2.0 * Z.T @ Z
        self._YZ = 2.0 * Y.T @ Z
        w = np.linalg.eigvalsh(self.block)
        super().__init__(n * n, mu=w[0], L=w[-1], L2=0.0)

    def _mat(self, x):
        return self._vec(x).reshape(self.n, self.n)

    def value(self, x):
        X = self._mat(x)
        R = self.Y - self.Z @ X.T
        return float(np.sum(R * R))

    def gradient(self, x):
        X = self._mat(x)
        return (X @ self.block - self._YZ).ravel()

    def hessian(self, x):
        return np.kron(np.eye(self.n), self.block)

    def hess_vec(self, x, d):
        return (np.asarray(d).reshape(self.n, self.n) @ self.block).ravel()

    def hessian_eig_bounds(self, x):
        return self.mu, self.L


def sparse_coding_objective(Z, Y) -> SparseCodingObjective:
    """Build the sparse-coding objective from samples ``z_i`` and targets ``y_i``.

    ``Z`` and ``Y`` are (m, n) arrays whose rows are the vectors.
    """
    return SparseCodingObjective(Z, Y)


def sparse_coding_data(n: int, m: int, seed=0):
    """Synthetic data: standard normal ``B`` and ``z_i``, with ``y_i = B z_i``.

    Returns ``(Z, Y, B)`` with ``Z`` and ``Y`` of shape (m, n).
    """
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    Z = rng.standard_normal((m, n))
    return Z, Z @ B.T, B


class LogisticObjective(Objective):
    """l2-regularized logistic loss ``1/m sum log(1 + exp(-y_i <x, z_i>)) + lam/2 ||x||^2``."""

    name = "logistic"

    def __init__(self, Z, y, lam: float):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        y = np.asarray(y, dtype=float)
        if Z.shape[0] != y.shape[0]:
            raise ValueError(f"{Z.shape[0]} samples but {y.shape[0]} labels")
        bad = ~np.isin(y, (-1.0, 1.0))
        if np.any(bad):
            raise ValueError(f"invalid label {y[bad][0]!r} at sample {int(np.argmax(bad))}")
        if not lam > 0:
            raise ValueError("regularization lam must be > 0")
        m, n = Z.shape
        self.Z = Z
        self.y = y
        self.lam = float(lam)
        self.m = m
        self._YZ = y[:, None] * Z
        gram_max = float(np.linalg.eigvalsh(Z.T @ Z)[-1]) / m
        # |sigma''| <= 1 / (6 sqrt 3)
        L2 = float(np.mean(np.linalg.norm(Z, axis=1) ** 3)) / (6.0 * math.sqrt(3.0))
        super().__init__(n, mu=self.lam, L=self.lam + 0.25 * gram_max, L2=L2)

    def margins(self, x) -> np.ndarray:
        return self._YZ @ self._vec(x)

    def value(self, x):
        x = self._vec(x)
        loss = np.logaddexp(0.0, -self._YZ @ x)
        return float(loss.mean() + 0.5 * self.lam * x @ x)

    def line_function(self, x, d):
        x = self._vec(x)
        d = np.asarray(d, dtype=float)
        s0 = expit(-(self._YZ @ x))
        t = self._YZ @ d
        xd, dd = float(x @ d), float(d @ d)

        def phi(gamma):
            # log(1 + e^-(m + g t)) - log(1 + e^-m) = log1p(expit(-m) * expm1(-g t))
            data = np.mean(np.log1p(s0 * np.expm1(-gamma * t)))
            return float(data + self.lam * (gamma * xd + 0.5 * gamma * gamma * dd))

        return phi

    def gradient(self, x):
        x = self._vec(x)
        s = expit(-(self._YZ @ x))
        return -(self._YZ.T @ s) / self.m + self.lam * x

    def curvature_weights(self, x) -> np.ndarray:
        """``sigma_i (1 - sigma_i)`` at ``x``; the data-term Hessian weights."""
        s = expit(self.margins(x))
        return s * (1.0 - s)

    def hessian(self, x):
        w = self.curvature_weights(x)
        H = (self.Z.T * w) @ self.Z / self.m
        H[np.diag_indices_from(H)] += self.lam
        return 0.5 * (H + H.T)

    def hess_vec(self, x, d):
        w = self.curvature_weights(x)
        return self.Z.T @ (w * (self.Z @ d)) / self.m + self.lam * d


def logistic_objective(Z, y, lam: float) -> LogisticObjective:
    return LogisticObjective(Z, y, lam)


def logistic_data(n: int, m: int, seed=0, density: float = 0.5, noise: float = 0.1,
                  normalize: bool = True):
    """Synthetic binary classification data with a sparse planted separator.

    Samples are standard normal, scaled to unit norm when ``normalize`` is
    set; labels are ``sign(<w, z>)`` for a sparse ``w``, with a fraction
    ``noise`` of labels flipped.
    """
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((m, n))
    if normalize:
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    w = np.zeros(n)
    k = max(1, int(round(density * n)))
    w[rng.choice(n, size=k, replace=False)] = rng.standard_normal(k)
    y = np.where(Z @ w >= 0.0, 1.0, -1.0)
    flip = rng.random(m) < noise
    y[flip] *= -1.0
    return Z, y


def load_sparse_samples(path, n_features: Optional[int] = None):
    """Read ``label index:value ...`` lines (1-based indices) into dense arrays.

    Blank lines and ``#`` comments are skipped. Returns ``(Z, y)``.

    Raises
    ------
    ValueError
        On a malformed line; the message carries the path and line number.
    """
    path = Path(path)
    labels, rows = [], []
    max_index = 0
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
                if label not in (-1.0, 1.0):
                    raise ValueError(f"label {parts[0]!r} not in {{-1, +1}}")
                entries = {}
                for tok in parts[1:]:
                    idx_s, sep, val_s = tok.partition(":")
                    if not sep:
                        raise ValueError(f"token {tok!r} is not index:value")
                    idx = int(idx_s)
                    if idx < 1:
                        raise ValueError(f"index {idx} is not 1-based")
                    if idx in entries:
                        raise ValueError(f"index {idx} repeated")
                    val = float(val_s)
                    if not math.isfinite(val):
                        raise ValueError(f"non-finite value {val_s!r}")
                    entries[idx] = val
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            labels.append(label)
            rows.append(entries)
            if entries:
                max_index = max(max_index, max(entries))
    if not rows:
        raise ValueError(f"{path}: no samples")
    n = max_index if n_features is None else n_features
    if max_index > n:
        raise ValueError(f"{path}: feature index {max_index} exceeds n_features={n}")
    Z = np.zeros((len(rows), n))
    for i, entries in enumerate(rows):
        for idx, val in entries.items():
            Z[i, idx - 1] = val
    return Z, np.asarray(labels)
