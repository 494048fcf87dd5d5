"""Sparse directed link graph and its network centrality measures.

The graph is stored in compressed sparse row form, once forward (out-links)
and once reversed (in-links).  Instances are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, MalformedInputError

GRAPH_MAGIC = "#%clickgraph-graph v1"


@dataclass(frozen=True, eq=False)
class CentralityVector:
    """One value per node for a single centrality measure."""

    kind: str  # in_degree | out_degree | degree | pagerank | kcore
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class LinkGraph:
    """Immutable directed graph over dense integer node ids.

    Adjacency is deduplicated and sorted ascending in both directions, so the
    flat edge list (``edge_sources``, ``out_indices``) is in lexicographic
    (src, trg) order.  Self-loops are kept and counted in ``self_loops``.
    """

    n_nodes: int
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray
    labels: tuple[str, ...] | None = None
    self_loops: int = 0

    @property
    def n_edges(self) -> int:
        return int(len(self.out_indices))

    def out_neighbors(self, i: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[i]:self.out_indptr[i + 1]]

    def in_neighbors(self, j: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[j]:self.in_indptr[j + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    @cached_property
    def edge_sources(self) -> np.ndarray:
        """Source node of every edge slot, aligned to ``out_indices``."""
        return np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.out_degrees())

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        return self.edge_sources * np.int64(self.n_nodes) + self.out_indices

    def edge_slots(self, src: np.ndarray, trg: np.ndarray) -> np.ndarray:
        """Flat edge index for each (src, trg) pair, -1 where no such edge."""
        src = np.asarray(src, dtype=np.int64)
        trg = np.asarray(trg, dtype=np.int64)
        keys = src * np.int64(self.n_nodes) + trg
        pos = np.searchsorted(self._edge_keys, keys)
        pos = np.minimum(pos, max(self.n_edges - 1, 0))
        if self.n_edges == 0:
            return np.full(len(keys), -1, dtype=np.int64)
        hit = self._edge_keys[pos] == keys
        return np.where(hit, pos, -1)

    def has_edge(self, src: int, trg: int) -> bool:
        return int(self.edge_slots(np.array([src]), np.array([trg]))[0]) >= 0

    def name_to_id(self) -> dict[str, int]:
        if self.labels is None:
            raise MalformedInputError("graph carries no node labels")
        return {name: i for i, name in enumerate(self.labels)}


def same_structure(a: LinkGraph, b: LinkGraph) -> bool:
    """Whether two graphs have the identical node range and edge set."""
    return a is b or (
        a.n_nodes == b.n_nodes
        and a.n_edges == b.n_edges
        and np.array_equal(a.out_indptr, b.out_indptr)
        and np.array_equal(a.out_indices, b.out_indices)
    )


def _csr_from_pairs(n_nodes: int, src: np.ndarray, trg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((trg, src))
    src, trg = src[order], trg[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, trg.astype(np.int64)


def build_graph(
    edges: Iterable[tuple[int, int]] | np.ndarray,
    n_nodes: int | None = None,
    labels: Sequence[str] | None = None,
) -> LinkGraph:
    """Build a :class:`LinkGraph` from (src, trg) id pairs.

    Duplicate pairs are collapsed to a single edge; self-loops are kept.
    ``n_nodes`` declares the id range (defaults to ``max id + 1``, or to
    ``len(labels)`` when labels are given); any id outside it raises
    :class:`MalformedInputError`.
    """
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise MalformedInputError("edges must be (src, trg) pairs")
    if labels is not None:
        if n_nodes is None:
            n_nodes = len(labels)
        elif n_nodes != len(labels):
            raise MalformedInputError(f"{len(labels)} labels for {n_nodes} declared nodes")
    if arr.size and arr.min() < 0:
        raise MalformedInputError("node ids must be nonnegative")
    max_id = int(arr.max()) if arr.size else -1
    if n_nodes is None:
        n_nodes = max_id + 1
    elif max_id >= n_nodes:
        raise MalformedInputError(f"edge id {max_id} outside declared range [0, {n_nodes})")

    if arr.size:
        arr = np.unique(arr, axis=0)
    src, trg = arr[:, 0], arr[:, 1]
    self_loops = int(np.count_nonzero(src == trg))
    out_indptr, out_indices = _csr_from_pairs(n_nodes, src, trg)
    in_indptr, in_indices = _csr_from_pairs(n_nodes, trg, src)
    return LinkGraph(
        n_nodes=n_nodes,
        out_indptr=out_indptr,
        out_indices=out_indices,
        in_indptr=in_indptr,
        in_indices=in_indices,
        labels=tuple(labels) if labels is not None else None,
        self_loops=self_loops,
    )


def degrees(g: LinkGraph) -> tuple[CentralityVector, CentralityVector, CentralityVector]:
    """Per-node in-degree, out-degree, and total degree."""
    ind = g.in_degrees()
    outd = g.out_degrees()
    return (
        CentralityVector("in_degree", ind),
        CentralityVector("out_degree", outd),
        CentralityVector("degree", ind + outd),
    )


def _undirected_adjacency(g: LinkGraph) -> tuple[np.ndarray, np.ndarray]:
    # Union of both directions; self-loops dropped (they cannot sustain a core).
    src = np.concatenate([g.edge_sources, g.out_indices])
    trg = np.concatenate([g.out_indices, g.edge_sources])
    keep = src != trg
    src, trg = src[keep], trg[keep]
    if src.size:
        pairs = np.unique(np.stack([src, trg], axis=1), axis=0)
        src, trg = pairs[:, 0], pairs[:, 1]
    return _csr_from_pairs(g.n_nodes, src, trg)


def kcore(g: LinkGraph) -> CentralityVector:
    """Core number per node on the undirected projection.

    Peels minimum-degree nodes in degree order (bucket queue); a node's core
    number is the largest k for which it survives in the k-core.
    """
    n = g.n_nodes
    indptr, indices = _undirected_adjacency(g)
    core = np.diff(indptr).astype(np.int64)
    if n == 0:
        return CentralityVector("kcore", core)

    # Bucket queue over current degrees: bin_[k] is the position in `vert`
    # where the block of degree-k vertices starts.  Peeling a vertex demotes
    # each higher-degree neighbor by one bucket via a swap with its bucket head.
    max_deg = int(core.max())
    bin_count = np.bincount(core, minlength=max_deg + 1)
    bin_ = np.concatenate(([0], np.cumsum(bin_count)[:-1]))
    vert = np.argsort(core, kind="stable")
    pos = np.empty(n, dtype=np.int64)
    pos[vert] = np.arange(n)

    for i in range(n):
        v = vert[i]
        for u in indices[indptr[v]:indptr[v + 1]]:
            if core[u] > core[v]:
                du, pu = core[u], pos[u]
                pw = bin_[du]
                w = vert[pw]
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_[du] += 1
                core[u] -= 1
    return CentralityVector("kcore", core)


def pagerank(
    g: LinkGraph,
    alpha: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> CentralityVector:
    """Classic PageRank by power iteration from a uniform start.

    Dangling nodes (out-degree 0) spread their mass uniformly over all
    nodes.  Iteration stops when the L1 change drops to ``tol``; failure to
    converge raises :class:`ConvergenceError` carrying the last iterate.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = g.n_nodes
    if n == 0:
        return CentralityVector("pagerank", np.zeros(0))

    src = g.edge_sources
    trg = g.out_indices
    outdeg = g.out_degrees().astype(np.float64)
    inv_out = np.zeros(n)
    nonzero = outdeg > 0
    inv_out[nonzero] = 1.0 / outdeg[nonzero]
    dangling = ~nonzero

    pr = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        spread = np.bincount(trg, weights=pr[src] * inv_out[src], minlength=n)
        new = (1.0 - alpha) / n + alpha * (spread + pr[dangling].sum() / n)
        delta = float(np.abs(new - pr).sum())
        pr = new
        if delta <= tol:
            return CentralityVector("pagerank", pr / pr.sum())
    raise ConvergenceError(
        f"pagerank did not converge within {max_iter} iterations (last L1 change {delta:.3e})",
        last=pr,
        iterations=max_iter,
    )


def save_graph(g: LinkGraph, path, header_lines: Sequence[str] = ()) -> None:
    """Write a versioned text snapshot: node count, labels, sorted edge list."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(GRAPH_MAGIC + "\n")
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"nodes\t{g.n_nodes}\n")
        fh.write(f"selfloops\t{g.self_loops}\n")
        if g.labels is not None:
            for i, name in enumerate(g.labels):
                if "\t" in name or "\n" in name:
                    raise MalformedInputError(f"label {name!r} contains separators")
                fh.write(f"label\t{i}\t{name}\n")
        fh.write(f"edges\t{g.n_edges}\n")
        src = g.edge_sources
        for s, t in zip(src, g.out_indices):
            fh.write(f"{s}\t{t}\n")


def load_graph(path) -> LinkGraph:
    """Read a snapshot written by :func:`save_graph`."""
    with open(path, "r", encoding="utf-8") as fh:
        magic = fh.readline().rstrip("\n")
        if magic != GRAPH_MAGIC:
            raise MalformedInputError(f"not a graph snapshot (magic {magic!r})")
        n_nodes = None
        labels: dict[int, str] = {}
        edges: list[tuple[int, int]] = []
        n_edges = None
        for raw in fh:
            if raw.startswith("#"):
                continue
            fields = raw.rstrip("\n").split("\t")
            if fields[0] == "nodes":
                n_nodes = int(fields[1])
            elif fields[0] == "selfloops":
                continue
            elif fields[0] == "label":
                labels[int(fields[1])] = fields[2]
            elif fields[0] == "edges":
                n_edges = int(fields[1])
            else:
                edges.append((int(fields[0]), int(fields[1])))
    if n_nodes is None:
        raise MalformedInputError("snapshot missing node count")
    if n_edges is not None and n_edges != len(edges):
        raise MalformedInputError(f"snapshot declares {n_edges} edges, found {len(edges)}")
    label_seq = None
    if labels:
        label_seq = [labels.get(i, str(i)) for i in range(n_nodes)]
    return build_graph(edges, n_nodes=n_nodes, labels=label_seq)
