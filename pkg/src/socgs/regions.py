"""Feasible regions and their linear minimization oracles.

Every region exposes ``lmo(g)`` returning the `Vertex` minimizing ``<g, v>``.
Ties are broken toward the lowest canonical key so traces are reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ActiveSet, Vertex


class FeasibleRegion:
    """Base class; subclasses fill in ``dim``, ``diameter`` and the oracle."""

    kind: str = ""
    dim: int
    diameter: float

    def lmo(self, g) -> Vertex:
        raise NotImplementedError

    def lowest_vertex(self) -> Vertex:
        raise NotImplementedError

    def random_vertex(self, rng: np.random.Generator) -> Vertex:
        raise NotImplementedError

    def _check(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        if g.shape != (self.dim,):
            raise ValueError(f"gradient has shape {g.shape}, region expects ({self.dim},)")
        return g

    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError


class Simplex(FeasibleRegion):
    """Probability simplex in R^n; vertices are the basis vectors."""

    kind = "simplex"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("simplex dimension must be >= 1")
        self.n = n
        self.dim = n
        self.diameter = math.sqrt(2.0)

    def __repr__(self):
        return f"Simplex({self.n})"

    def vertex(self, i: int) -> Vertex:
        e = np.zeros(self.n)
        e[i] = 1.0
        return Vertex(key=(int(i),), form=int(i), dense=e)

    def lmo(self, g) -> Vertex:
        g = self._check(g)
        # argmin returns the first (lowest-index) minimizer.
        return self.vertex(int(np.argmin(g)))

    def lowest_vertex(self) -> Vertex:
        return self.vertex(0)

    def random_vertex(self, rng):
        return self.vertex(int(rng.integers(self.n)))

    def contains(self, x, tol=1e-9):
        x = np.asarray(x)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)


class L1Ball(FeasibleRegion):
    """l1 ball of radius ``tau``; vertices are ``+-tau * e_i``.

    The canonical key of ``sign * tau * e_i`` is ``(i, 0)`` for a positive
    sign and ``(i, 1)`` for a negative one.
    """

    kind = "l1_ball"

    def __init__(self, n: int, radius: float = 1.0):
        if n < 1:
            raise ValueError("l1 ball dimension must be >= 1")
        if not radius > 0:
            raise ValueError("l1 ball radius must be > 0")
        self.n = n
        self.dim = n
        self.radius = float(radius)
        self.diameter = 2.0 * self.radius

    def __repr__(self):
        return f"L1Ball({self.n}, radius={self.radius})"

    def vertex(self, i: int, sign: int) -> Vertex:
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        e = np.zeros(self.n)
        e[i] = sign * self.radius
        return Vertex(key=(int(i), 0 if sign > 0 else 1), form=(int(i), sign), dense=e)

    def lmo(self, g) -> Vertex:
        g = self._check(g)
        i = int(np.argmax(np.abs(g)))
        if g[i] == 0.0:
            return self.lowest_vertex()
        return self.vertex(i, -1 if g[i] > 0 else 1)

    def lowest_vertex(self):
        return self.vertex(0, 1)

    def random_vertex(self, rng):
        return self.vertex(int(rng.integers(self.n)), int(rng.choice([-1, 1])))

    def contains(self, x, tol=1e-9):
        return bool(np.abs(np.asarray(x)).sum() <= self.radius + tol)


class Birkhoff(FeasibleRegion):
    """Doubly stochastic n x n matrices, flattened row-major into R^(n*n).

    Vertices are permutation matrices; permutation ``p`` puts a one at
    ``(i, p[i])``. The oracle solves a linear assignment problem.
    """

    kind = "birkhoff"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("Birkhoff dimension must be >= 1")
        self.n = n
        self.dim = n * n
        self.diameter = math.sqrt(2.0 * n)

    def __repr__(self):
        return f"Birkhoff({self.n})"

    def vertex(self, perm) -> Vertex:
        perm = tuple(int(j) for j in perm)
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), perm] = 1.0
        return Vertex(key=perm, form=perm, dense=P.ravel())

    def lmo(self, g) -> Vertex:
        g = self._check(g)
        if not np.any(g):
            return self.lowest_vertex()
        return self.vertex(hungarian_assignment(g.reshape(self.n, self.n)))

    def lowest_vertex(self):
        return self.vertex(range(self.n))

    def random_vertex(self, rng):
        return self.vertex(rng.permutation(self.n))

    def contains(self, x, tol=1e-9):
        X = np.asarray(x).reshape(self.n, self.n)
        return bool(
            np.all(X >= -tol)
            and np.allclose(X.sum(axis=0), 1.0, atol=tol)
            and np.allclose(X.sum(axis=1), 1.0, atol=tol)
        )


def make_region(kind: str, n: int, radius: float = 1.0) -> FeasibleRegion:
    if kind == "simplex":
        return Simplex(n)
    if kind == "l1_ball":
        return L1Ball(n, radius)
    if kind == "birkhoff":
        return Birkhoff(n)
    raise ValueError(f"unknown region kind {kind!r}")


def away_vertex(active_set: ActiveSet, g) -> Vertex:
    """Atom of ``active_set`` maximizing ``<g, v>``; lowest key on ties."""
    if len(active_set) == 0:
        raise ValueError("empty active set")
    vertices = active_set.vertices
    scores = active_set.embeddings() @ np.asarray(g, dtype=float)
    best = scores.max()
    return min((v for v, s in zip(vertices, scores) if s == best), key=lambda v: v.key)


def hungarian_assignment(cost) -> np.ndarray:
    """Minimum-cost perfect assignment of rows to columns.

    Shortest augmenting paths with dual potentials, O(n^3). Returns ``perm``
    with row ``i`` assigned to column ``perm[i]``.

    Parameters
    ----------
    cost : (n, n) array_like
        Finite cost matrix.

    Returns
    -------
    numpy.ndarray of int
    """
    C = np.asarray(cost, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    n = C.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)

    # 1-based bookkeeping: column 0 is a virtual root.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match = np.zeros(n + 1, dtype=int)  # match[j] = row assigned to column j
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            free = ~used[1:]
            reduced = C[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            used_idx = np.nonzero(used)[0]
            u[match[used_idx]] += delta
            v[used_idx] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    perm = np.empty(n, dtype=int)
    perm[match[1:] - 1] = np.arange(n)
    return perm
