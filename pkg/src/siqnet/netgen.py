"""Time-invariant backbone graphs restricting who may contact whom.

Adjacency is stored in CSR form (``indptr``, ``indices``) with each row
sorted, so the neighbours of ``j`` inside the vaccinated block
``0 .. n_v-1`` form a prefix of the row. The complete graph is virtual and
never materialises its edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import networkx as nx
import numpy as np

from .params import PopulationSplit


class BackboneKind(str, Enum):
    COMPLETE = "complete"
    ERDOS_RENYI = "erdos_renyi"
    BARABASI_ALBERT = "barabasi_albert"


@dataclass(frozen=True, eq=False)
class Backbone:
    kind: BackboneKind
    n: int
    seed: int | None = None
    indptr: np.ndarray | None = field(default=None, repr=False)
    indices: np.ndarray | None = field(default=None, repr=False)
    label: str = ""

    @property
    def is_complete(self) -> bool:
        return self.kind is BackboneKind.COMPLETE

    def degree(self) -> np.ndarray:
        if self.is_complete:
            return np.full(self.n, self.n - 1, dtype=np.int64)
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        if self.is_complete:
            return self.n * (self.n - 1) // 2
        return int(self.indptr[-1]) // 2

    def edges(self) -> np.ndarray:
        """Array of shape (m, 2) with ``j < k`` in each row, 0-based."""
        if self.is_complete:
            j, k = np.triu_indices(self.n, 1)
            return np.column_stack([j, k])
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def group_boundary(self, n_v: int) -> np.ndarray:
        """Per-row offset where neighbours stop being vaccinated."""
        if self.is_complete:
            raise ValueError("complete backbone has no stored rows")
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        below = np.bincount(rows[self.indices < n_v], minlength=self.n)
        return self.indptr[:-1] + below

    def __eq__(self, other):
        if not isinstance(other, Backbone):
            return NotImplemented
        if (self.kind, self.n) != (other.kind, other.n):
            return False
        if self.is_complete:
            return True
        return np.array_equal(self.indptr, other.indptr) and np.array_equal(self.indices, other.indices)

    __hash__ = None


def _from_edges(kind, n, edges, seed=None, label="") -> Backbone:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint out of range")
    edges = edges[edges[:, 0] != edges[:, 1]]
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Backbone(kind, n, seed, indptr, dst.astype(np.int64), label)


def _from_networkx(kind, g, seed, label) -> Backbone:
    edges = np.array(list(g.edges()), dtype=np.int64).reshape(-1, 2)
    return _from_edges(kind, g.number_of_nodes(), edges, seed, label)


def complete(n: int) -> Backbone:
    if n < 2:
        raise ValueError("complete backbone needs n >= 2")
    return Backbone(BackboneKind.COMPLETE, n, label="complete")


def erdos_renyi(n: int, p: float, seed: int) -> Backbone:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    g = nx.fast_gnp_random_graph(n, p, seed=seed)
    return _from_networkx(BackboneKind.ERDOS_RENYI, g, seed, f"er:{p:g}")


def barabasi_albert(n: int, m: int, seed: int) -> Backbone:
    """Preferential attachment grown from a clique on ``m + 1`` nodes."""
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    g = nx.barabasi_albert_graph(n, m, seed=seed, initial_graph=nx.complete_graph(m + 1))
    return _from_networkx(BackboneKind.BARABASI_ALBERT, g, seed, f"ba:{m}")


def neighbors(b: Backbone, j: int, group: str | None = None,
              split: PopulationSplit | None = None) -> np.ndarray:
    """Neighbours of ``j``, optionally restricted to group ``"v"`` or ``"n"``."""
    if not 0 <= j < b.n:
        raise IndexError(j)
    if group is not None:
        if split is None:
            raise ValueError("group filtering needs the population split")
        if group not in ("v", "n"):
            raise ValueError(f"group must be 'v' or 'n', got {group!r}")
    if b.is_complete:
        if group is None:
            lo, hi = 0, b.n
        else:
            sl = split.group_slice(group == "v")
            lo, hi = sl.start, sl.stop
        idx = np.arange(lo, hi, dtype=np.int64)
        return idx[idx != j]
    row = b.indices[b.indptr[j]:b.indptr[j + 1]]
    if group is None:
        return row
    cut = np.searchsorted(row, split.n_v)
    return row[:cut] if group == "v" else row[cut:]


def parse_spec(spec: str, n: int, seed: int) -> Backbone:
    """``complete`` | ``er:<p>`` | ``ba:<m>`` as accepted on the command line."""
    spec = spec.strip().lower()
    if spec in ("complete", "none", ""):
        return complete(n)
    kind, _, arg = spec.partition(":")
    if kind == "er":
        return erdos_renyi(n, float(arg or 0.01), seed)
    if kind == "ba":
        return barabasi_albert(n, int(arg or 50), seed)
    raise ValueError(f"unknown backbone spec {spec!r}")


def write_edgelist(b: Backbone, path: str | Path) -> None:
    """One ``j k`` pair per line, 1-based, ``j < k``."""
    np.savetxt(path, b.edges() + 1, fmt="%d")


def read_edgelist(path: str | Path, n: int, kind: BackboneKind = BackboneKind.ERDOS_RENYI) -> Backbone:
    data = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if data.size == 0:
        data = np.empty((0, 2), dtype=np.int64)
    return _from_edges(kind, n, data - 1, label=str(path))
