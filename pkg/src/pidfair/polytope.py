"""The fixed-marginal polytope of joint distributions on ``(Z, A, B)``.

Every member ``Q`` shares the pairwise marginals ``P(Z, A)`` and ``P(Z, B)``
with the true distribution. For a fixed ``z`` the slice ``Q(z, ., .)`` is a
transportation table with row sums ``P(z, a)`` and column sums ``P(z, b)``,
so the polytope is a product of transportation polytopes, one per ``z``.
Vertices of a transportation polytope are basic solutions supported on
spanning trees of the complete bipartite graph; for the small alphabets this
package targets they are enumerated outright.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .dist import Alphabet, JointDist, reorder

MARGIN_TOL = 1e-12
# above this many candidate edge subsets the LP oracle falls back to HiGHS
MAX_ENUMERATION = 200_000


@lru_cache(maxsize=None)
def _tree_maps(m: int, n: int) -> np.ndarray:
    """Integer maps from margins to basic solutions, one per spanning tree.

    Returns an array of shape ``(T, m * n, m + n - 1)``; multiplying by
    ``[row_sums, col_sums[:-1]]`` gives the cell values of the basic solution
    for tree ``t``. Trees are listed in lexicographic order of their edge sets.
    """
    cells = [(i, j) for i in range(m) for j in range(n)]
    k = m + n - 1
    maps = []
    for edges in itertools.combinations(range(m * n), k):
        parent = list(range(m + n))

        def find(u):
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        acyclic = True
        for e in edges:
            i, j = cells[e]
            ri, rj = find(i), find(m + j)
            if ri == rj:
                acyclic = False
                break
            parent[ri] = rj
        if not acyclic:
            continue
        # equations: m row sums, first n-1 column sums (the last one is implied)
        A = np.zeros((k, k))
        for col, e in enumerate(edges):
            i, j = cells[e]
            A[i, col] = 1.0
            if j < n - 1:
                A[m + j, col] = 1.0
        inv = np.rint(np.linalg.inv(A))
        full = np.zeros((m * n, k))
        full[list(edges), :] = inv
        maps.append(full)
    return np.array(maps)


def _n_edge_subsets(m: int, n: int) -> int:
    from math import comb

    return comb(m * n, m + n - 1)


def transport_vertices(rows: np.ndarray, cols: np.ndarray) -> np.ndarray | None:
    """Vertices of ``{S >= 0 : S.sum(1) = rows, S.sum(0) = cols}``.

    Margins must be strictly positive. Returns an array ``(V, m, n)`` ordered
    by first appearance over the lexicographic tree order, or ``None`` when
    the table is too large to enumerate.
    """
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    m, n = len(rows), len(cols)
    if m == 1:
        return cols[None, None, :].copy()
    if n == 1:
        return rows[None, :, None].copy()
    if _n_edge_subsets(m, n) > MAX_ENUMERATION:
        return None
    maps = _tree_maps(m, n)
    margins = np.concatenate([rows, cols[:-1]])
    sols = maps @ margins
    scale = max(rows.sum(), 1e-300)
    ok = sols.min(axis=1) >= -1e-13 * scale
    sols = np.clip(sols[ok], 0.0, None)
    # same vertex from different (degenerate) bases: keep the first
    keys = np.round(sols / scale, 13)
    _, first = np.unique(keys, axis=0, return_index=True)
    sols = sols[np.sort(first)]
    return sols.reshape(-1, m, n)


def _transport_lp(cost: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    m, n = cost.shape
    A_eq = np.zeros((m + n, m * n))
    for i in range(m):
        A_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        A_eq[m + j, j::n] = 1.0
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=np.concatenate([rows, cols]), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    return np.clip(res.x, 0.0, None).reshape(m, n)


@dataclass
class Slice:
    """Support-reduced transportation table for one value of the target."""

    z: int
    rows: np.ndarray  # indices into A with P(z, a) > 0
    cols: np.ndarray  # indices into B with P(z, b) > 0
    row_sums: np.ndarray
    col_sums: np.ndarray
    vertices: np.ndarray | None = field(repr=False, default=None)

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def minimize_linear(self, cost: np.ndarray) -> tuple[np.ndarray, int]:
        """Vertex minimizing ``<cost, S>``; ties go to the lowest vertex index."""
        if self.vertices is not None:
            scores = np.tensordot(self.vertices, cost, axes=([1, 2], [0, 1]))
            best = int(np.argmin(scores))
            return self.vertices[best], best
        return _transport_lp(cost, self.row_sums, self.col_sums), -1


@dataclass(frozen=True, eq=False)
class MarginalPolytope:
    """Joint distributions on ``(Z, A, B)`` with fixed ``P(Z,A)`` and ``P(Z,B)``."""

    target: Alphabet
    source_a: Alphabet
    source_b: Alphabet
    p_za: np.ndarray
    p_zb: np.ndarray

    def __post_init__(self):
        p_za = np.array(self.p_za, dtype=float)
        p_zb = np.array(self.p_zb, dtype=float)
        if p_za.shape != (len(self.target), len(self.source_a)):
            raise ValueError("P(Z,A) shape does not match the alphabets")
        if p_zb.shape != (len(self.target), len(self.source_b)):
            raise ValueError("P(Z,B) shape does not match the alphabets")
        for name, p in (("P(Z,A)", p_za), ("P(Z,B)", p_zb)):
            if p.min() < 0 or abs(p.sum() - 1.0) > MARGIN_TOL:
                raise ValueError(f"{name} is not a probability table")
        if np.max(np.abs(p_za.sum(axis=1) - p_zb.sum(axis=1))) > MARGIN_TOL:
            raise ValueError("P(Z,A) and P(Z,B) disagree on the Z marginal")
        p_za.setflags(write=False)
        p_zb.setflags(write=False)
        object.__setattr__(self, "p_za", p_za)
        object.__setattr__(self, "p_zb", p_zb)

    @classmethod
    def from_dist(cls, dist: JointDist, target: str = "z", source: str = "yhat") -> "MarginalPolytope":
        """Polytope for ``Uni(target : source | other)``."""
        from .dist import AXIS

        q = reorder(dist, target, source)
        other = 3 - AXIS[target] - AXIS[source]
        return cls(
            dist.alphabets[AXIS[target]],
            dist.alphabets[AXIS[source]],
            dist.alphabets[other],
            q.sum(axis=2),
            q.sum(axis=1),
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.target), len(self.source_a), len(self.source_b)

    @property
    def p_z(self) -> np.ndarray:
        return self.p_za.sum(axis=1)

    def swapped(self) -> "MarginalPolytope":
        """Same polytope with the roles of the two sources exchanged."""
        return MarginalPolytope(self.target, self.source_b, self.source_a, self.p_zb, self.p_za)

    def slices(self, enumerate_vertices: bool = True) -> list[Slice]:
        out = []
        for z in range(len(self.target)):
            if self.p_z[z] <= 0:
                continue
            rows = np.flatnonzero(self.p_za[z] > 0)
            cols = np.flatnonzero(self.p_zb[z] > 0)
            s = Slice(z, rows, cols, self.p_za[z, rows], self.p_zb[z, cols])
            if enumerate_vertices:
                s.vertices = transport_vertices(s.row_sums, s.col_sums)
            out.append(s)
        return out

    def contains(self, q: np.ndarray, tol: float = 1e-9) -> bool:
        q = np.asarray(q, dtype=float)
        if q.shape != self.shape or q.min() < -tol:
            return False
        return bool(
            np.max(np.abs(q.sum(axis=2) - self.p_za)) <= tol and np.max(np.abs(q.sum(axis=1) - self.p_zb)) <= tol
        )
