"""Quadratic models of the objective and the Hessian oracles that feed them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import weighted_norm_sq


@dataclass(frozen=True)
class HessianEstimate:
    """Positive definite matrix ``H`` returned by an oracle with accuracy ``omega``.

    ``omega = inf`` marks an oracle that makes no accuracy claim.
    """

    H: np.ndarray
    omega: float = 0.0

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError(f"Hessian estimate must be square, got {H.shape}")
        H = 0.5 * (H + H.T)
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        if not self.omega >= 0:
            raise ValueError("omega must be >= 0")
        lo = float(np.linalg.eigvalsh(H)[0])
        if not lo > 0:
            raise ValueError(f"Hessian estimate is not positive definite (smallest eigenvalue {lo:.3e})")


class QuadraticModel:
    """``f(x_k) + <g_k, x - x_k> + 1/2 ||x - x_k||_H^2`` around a base point ``x_k``."""

    def __init__(self, x_base, f_base: float, g_base, estimate: HessianEstimate):
        self.x_base = np.asarray(x_base, dtype=float).copy()
        self.f_base = float(f_base)
        self.g_base = np.asarray(g_base, dtype=float).copy()
        self.estimate = estimate
        self.H = estimate.H
        n = self.x_base.shape[0]
        if self.g_base.shape != (n,) or self.H.shape != (n, n):
            raise ValueError("model base point, gradient and Hessian disagree in dimension")

    @property
    def dim(self):
        return self.x_base.shape[0]

    def _delta(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.x_base.shape:
            raise ValueError(f"point has shape {x.shape}, model expects {self.x_base.shape}")
        return x - self.x_base

    def value(self, x) -> float:
        d = self._delta(x)
        return self.f_base + float(self.g_base @ d) + 0.5 * weighted_norm_sq(d, self.H)

    def gradient(self, x) -> np.ndarray:
        return self.g_base + self.H @ self._delta(x)

    def curvature(self, x, d) -> float:
        """``d^T H d``; independent of ``x``."""
        return float(d @ self.H @ d)


def model_value(m: QuadraticModel, x) -> float:
    return m.value(x)


def model_gradient(m: QuadraticModel, x) -> np.ndarray:
    return m.gradient(x)


def eta_of(H, hess) -> float:
    """Metric distortion ``max(lmax(H^-1 hess), lmax(hess^-1 H))``.

    Computed from the generalized symmetric eigenproblem ``hess v = w H v``,
    whose eigenvalues are those of ``H^-1 hess``.
    """
    H = np.asarray(H, dtype=float)
    hess = np.asarray(hess, dtype=float)
    if H.shape != hess.shape:
        raise ValueError(f"shape mismatch {H.shape} vs {hess.shape}")
    try:
        w = scipy.linalg.eigh(0.5 * (hess + hess.T), 0.5 * (H + H.T), eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular or indefinite matrix: {exc}") from None
    if not w[0] > 0:
        raise ValueError("singular or indefinite matrix")
    return float(max(w[-1], 1.0 / w[0]))


class ExactHessianOracle:
    """Returns the true Hessian (``omega = 0``)."""

    kind = "exact"

    def __init__(self, objective):
        self.objective = objective

    def __call__(self, x) -> HessianEstimate:
        return HessianEstimate(self.objective.hessian(x), 0.0)


class IdentityHessianOracle:
    """Always returns the identity; no accuracy claim (``omega = inf``)."""

    kind = "identity"

    def __init__(self, dim: int):
        self.dim = dim

    def __call__(self, x) -> HessianEstimate:
        return HessianEstimate(np.eye(self.dim), math.inf)


class PerturbedHessianOracle:
    """Exact Hessian plus a random multiple of the identity that vanishes at ``x*``.

    Returns ``Hess f(x) + beta * omega * ||x - x*||^2 * I`` with ``beta``
    uniform on ``[-lmin / (omega ||x - x*||^2 + 1), lmin]``, ``lmin`` the
    smallest Hessian eigenvalue at ``x``. Every output is positive definite
    and satisfies ``eta - 1 <= omega ||x - x*||^2``.

    Query ``i`` draws ``beta`` from a generator seeded with ``(seed, i)``, so
    a solve is reproducible from ``seed`` alone.
    """

    kind = "perturbed"

    def __init__(self, objective, omega: float, seed=0):
        if objective.x_opt is None:
            raise ValueError("perturbed Hessian oracle needs the objective's minimizer x_opt")
        if not omega >= 0:
            raise ValueError("omega must be >= 0")
        self.objective = objective
        self.omega = float(omega)
        self.seed = seed
        self.queries = 0
        self.last_beta = 0.0

    def __call__(self, x) -> HessianEstimate:
        x = np.asarray(x, dtype=float)
        rng = np.random.default_rng((self.seed, self.queries))
        self.queries += 1
        hess = np.array(self.objective.hessian(x), dtype=float)
        scale = self.omega * float(np.sum((x - self.objective.x_opt) ** 2))
        if scale == 0.0:
            self.last_beta = 0.0
            return HessianEstimate(hess, self.omega)
        lmin, _ = self.objective.hessian_eig_bounds(x)
        beta = rng.uniform(-lmin / (scale + 1.0), lmin)
        self.last_beta = float(beta)
        hess[np.diag_indices_from(hess)] += beta * scale
        return HessianEstimate(hess, self.omega)


def exact_hessian_oracle(objective) -> ExactHessianOracle:
    return ExactHessianOracle(objective)


def identity_hessian_oracle(dim: int) -> IdentityHessianOracle:
    return IdentityHessianOracle(dim)


def perturbed_hessian_oracle(objective, omega: float, seed=0) -> PerturbedHessianOracle:
    return PerturbedHessianOracle(objective, omega, seed)
