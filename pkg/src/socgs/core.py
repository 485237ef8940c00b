"""Shared types: vertices, active sets, iterate states, stopping rules and traces."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Hashable, Optional, Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-9
# Negative weights this close to zero are float noise from the barycentric update.
_NEGATIVE_CLAMP = 1e-14

STEP_KINDS = ("fw", "away", "drop", "pvm", "acg")


class InvariantError(AssertionError):
    """Raised by audit checks when an active-set or trace invariant is broken."""


@dataclass(frozen=True, eq=False)
class Vertex:
    """A polytope vertex.

    ``key`` is a totally ordered identifier derived from the structured form
    (simplex index, signed l1 index, permutation tuple). Two vertices are the
    same atom iff their keys are equal; embeddings are never compared.
    """

    key: tuple
    form: Hashable
    dense: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.dense.setflags(write=False)

    def __eq__(self, other):
        return isinstance(other, Vertex) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


class ActiveSet:
    """Ordered list of (vertex, weight) pairs with weights on the unit simplex.

    Instances are treated as values: the update methods return new objects.
    """

    __slots__ = ("_vertices", "_weights", "_index")

    def __init__(self, vertices: Sequence[Vertex], weights):
        vertices = list(vertices)
        weights = np.asarray(weights, dtype=float).copy()
        if len(vertices) != weights.shape[0]:
            raise ValueError("vertices and weights differ in length")
        self._vertices = vertices
        self._weights = weights
        self._weights.setflags(write=False)
        self._index = {v.key: i for i, v in enumerate(vertices)}
        if len(self._index) != len(vertices):
            raise InvariantError("duplicate atom in active set")

    @classmethod
    def singleton(cls, vertex: Vertex) -> "ActiveSet":
        return cls([vertex], [1.0])

    def __len__(self):
        return len(self._vertices)

    def __iter__(self):
        return iter(zip(self._vertices, self._weights))

    def __contains__(self, vertex: Vertex):
        return vertex.key in self._index

    @property
    def vertices(self) -> list[Vertex]:
        return list(self._vertices)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def weight_of(self, vertex: Vertex) -> float:
        i = self._index.get(vertex.key)
        return 0.0 if i is None else float(self._weights[i])

    def keys(self) -> list[tuple]:
        return [v.key for v in self._vertices]

    def embeddings(self) -> np.ndarray:
        """Atoms stacked row-wise, shape ``(len(self), dim)``."""
        return np.stack([v.dense for v in self._vertices])

    def fw_update(self, v: Vertex, gamma: float) -> "ActiveSet":
        """Move weight ``gamma`` toward ``v``; collapse to ``{v}`` when ``gamma == 1``."""
        if gamma >= 1.0:
            return ActiveSet.singleton(v)
        weights = (1.0 - gamma) * self._weights
        vertices = list(self._vertices)
        i = self._index.get(v.key)
        if i is None:
            vertices.append(v)
            weights = np.append(weights, gamma)
        else:
            weights[i] += gamma
        return _cleaned(vertices, weights)

    def away_update(self, a: Vertex, gamma: float, gamma_max: float) -> "ActiveSet":
        """Move weight ``gamma`` away from ``a``; drop ``a`` when ``gamma == gamma_max``."""
        i = self._index[a.key]
        weights = (1.0 + gamma) * self._weights
        weights[i] -= gamma
        if gamma >= gamma_max:
            weights[i] = 0.0
        return _cleaned(list(self._vertices), weights)

    def check(self, tol: float = WEIGHT_SUM_TOL) -> None:
        """Raise `InvariantError` unless the weight invariants hold."""
        if len(self._vertices) == 0:
            raise InvariantError("empty active set")
        if not np.all(self._weights > 0.0):
            raise InvariantError(f"non-positive weight {self._weights.min()!r}")
        err = abs(float(self._weights.sum()) - 1.0)
        if err > tol:
            raise InvariantError(f"weights sum to 1 {err:+.3e}")


def _cleaned(vertices: list[Vertex], weights: np.ndarray) -> ActiveSet:
    # Zero-weight atoms are removed; tiny negatives are float noise.
    bad = weights < -_NEGATIVE_CLAMP
    if np.any(bad):
        raise InvariantError(f"barycentric weight {weights[bad].min()!r} < 0")
    keep = weights > 0.0
    kept_vertices = [v for v, k in zip(vertices, keep) if k]
    kept = weights[keep]
    kept = kept / math.fsum(kept)
    return ActiveSet(kept_vertices, kept)


def convex_combination(active_set: ActiveSet) -> np.ndarray:
    """Return ``sum(weight * embedding)`` over the atoms of ``active_set``."""
    if len(active_set) == 0:
        raise ValueError("empty active set")
    return active_set.weights @ active_set.embeddings()


def weighted_norm_sq(v, H) -> float:
    """Return ``v^T H v``."""
    v = np.asarray(v, dtype=float)
    H = np.asarray(H, dtype=float)
    if H.shape != (v.shape[0], v.shape[0]):
        raise ValueError(f"dimension mismatch: v has {v.shape[0]}, H is {H.shape}")
    return float(v @ H @ v)


@dataclass(frozen=True)
class IterateState:
    """Current point together with its vertex decomposition."""

    x: np.ndarray
    active_set: ActiveSet

    @classmethod
    def from_vertex(cls, vertex: Vertex) -> "IterateState":
        return cls(vertex.dense.astype(float), ActiveSet.singleton(vertex))

    @classmethod
    def from_active_set(cls, active_set: ActiveSet) -> "IterateState":
        return cls(convex_combination(active_set), active_set)

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.x - convex_combination(self.active_set))))

    def check(self) -> None:
        self.active_set.check()
        if not np.all(np.isfinite(self.x)):
            raise InvariantError("non-finite iterate")
        err = self.reconstruction_error()
        if err > RECONSTRUCTION_TOL:
            raise InvariantError(f"iterate differs from its active set by {err:.3e}")


@dataclass(frozen=True)
class StoppingCriterion:
    max_outer_iterations: Optional[int] = 1000
    fw_gap_tolerance: float = 0.0
    wall_time_budget: Optional[float] = None

    def __post_init__(self):
        if self.fw_gap_tolerance < 0:
            raise ValueError("fw_gap_tolerance must be >= 0")
        if (
            self.max_outer_iterations is None
            and self.wall_time_budget is None
            and self.fw_gap_tolerance <= 0
        ):
            raise ValueError("stopping criterion has no finite bound")

    def done(self, iteration: int, fw_gap: float, elapsed: float) -> bool:
        if fw_gap <= self.fw_gap_tolerance:
            return True
        if self.max_outer_iterations is not None and iteration >= self.max_outer_iterations:
            return True
        if self.wall_time_budget is not None and elapsed >= self.wall_time_budget:
            return True
        return False


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    f: float
    fw_gap: float
    primal_gap: Optional[float]
    dist_opt: Optional[float]
    lmo_calls: int
    fo_calls: int
    hessian_calls: int
    elapsed_s: float
    step_kind: str


@dataclass(frozen=True)
class SolveTrace:
    """Finished, immutable record of one solve.

    ``info`` holds per-iteration solver diagnostics (for SOCGS: candidate
    values, inner-loop exits); ``x`` and ``active_set`` are the final iterate.
    """

    algorithm: str
    records: tuple[TraceRecord, ...]
    x: Optional[np.ndarray] = None
    active_set: Optional[ActiveSet] = None
    info: tuple[Any, ...] = ()

    def __len__(self):
        return len(self.records)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]


class Counters:
    """Oracle call counters owned by a single solve."""

    __slots__ = ("lmo", "fo", "hessian")

    def __init__(self):
        self.lmo = 0
        self.fo = 0
        self.hessian = 0


class TraceRecorder:
    """Append-only builder for a `SolveTrace`."""

    def __init__(self, algorithm: str, f_opt=None, x_opt=None, counters=None):
        self.algorithm = algorithm
        self.f_opt = f_opt
        self.x_opt = None if x_opt is None else np.asarray(x_opt, dtype=float)
        self.counters = counters if counters is not None else Counters()
        self._records: list[TraceRecord] = []
        self._info: list[Any] = []
        self._t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0

    def record(self, iteration: int, x, f: float, fw_gap: float, step_kind: str, info=None):
        if not math.isfinite(f):
            raise FloatingPointError(f"non-finite objective at iteration {iteration}")
        c = self.counters
        self._records.append(
            TraceRecord(
                iter=iteration,
                f=float(f),
                fw_gap=float(fw_gap),
                primal_gap=None if self.f_opt is None else float(f - self.f_opt),
                dist_opt=None
                if self.x_opt is None
                else float(np.linalg.norm(np.asarray(x) - self.x_opt)),
                lmo_calls=c.lmo,
                fo_calls=c.fo,
                hessian_calls=c.hessian,
                elapsed_s=self.elapsed(),
                step_kind=step_kind,
            )
        )
        if info is not None:
            self._info.append(info)

    def add_info(self, info) -> None:
        self._info.append(info)

    def finish(self, state: Optional[IterateState] = None) -> SolveTrace:
        return SolveTrace(
            algorithm=self.algorithm,
            records=tuple(self._records),
            x=None if state is None else state.x.copy(),
            active_set=None if state is None else state.active_set,
            info=tuple(self._info),
        )
