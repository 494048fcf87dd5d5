"""Parsing and alignment of the three input artifacts.

Edge lists, clickstream transition logs, and link-feature files all arrive as
tab-separated text; everything is interned to dense integer ids so the rest
of the toolkit never touches article names.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import graph as graphmod
from .errors import (
    LineError,
    MalformedInputError,
    SchemaError,
    SupportError,
)
from .graph import LinkGraph

DEFAULT_THRESHOLD = 10

REGIONS = ("lead", "body", "left-body", "right-body", "infobox", "navbox")

#: Fixed column order of a serialized link-feature table.
FEATURE_COLUMNS = (
    "src", "trg", "transitions",
    "src_degree", "trg_degree",
    "src_in_degree", "trg_in_degree",
    "src_out_degree", "trg_out_degree",
    "src_kcore", "trg_kcore",
    "src_pagerank", "trg_pagerank",
    "text_sim", "topic_sim",
    "x_coord", "y_coord", "region",
)

NETWORK_COLUMNS = (
    "src_degree", "trg_degree",
    "src_in_degree", "trg_in_degree",
    "src_out_degree", "trg_out_degree",
    "src_kcore", "trg_kcore",
    "src_pagerank", "trg_pagerank",
)

_MANDATORY = ("src", "trg", "text_sim", "topic_sim", "x_coord", "y_coord", "region")


@dataclass(frozen=True, eq=False)
class TransitionLog:
    """Observed per-edge transition counts, threshold-filtered and deduplicated."""

    src: np.ndarray
    trg: np.ndarray
    count: np.ndarray
    threshold: int = DEFAULT_THRESHOLD

    @classmethod
    def from_pairs(
        cls,
        src: Iterable[int],
        trg: Iterable[int],
        count: Iterable[int],
        threshold: int = DEFAULT_THRESHOLD,
        graph: LinkGraph | None = None,
    ) -> "TransitionLog":
        """Build a log from raw arrays, enforcing the invariants.

        Pairs must be unique after sorting; counts below ``threshold`` are
        rejected; when ``graph`` is given every pair must be one of its edges.
        """
        src = np.asarray(list(src), dtype=np.int64)
        trg = np.asarray(list(trg), dtype=np.int64)
        count = np.asarray(list(count), dtype=np.int64)
        order = np.lexsort((trg, src))
        src, trg, count = src[order], trg[order], count[order]
        if len(src) > 1:
            dup = (src[1:] == src[:-1]) & (trg[1:] == trg[:-1])
            if dup.any():
                raise MalformedInputError("duplicate (src, trg) pair in transition log")
        if count.size and count.min() < threshold:
            raise MalformedInputError(f"transition count below threshold {threshold}")
        if graph is not None and len(src):
            if (graph.edge_slots(src, trg) < 0).any():
                raise SupportError("transition pair is not an edge of the graph")
        return cls(src=src, trg=trg, count=count, threshold=threshold)

    def __len__(self) -> int:
        return len(self.count)

    @property
    def total(self) -> int:
        return int(self.count.sum()) if len(self.count) else 0

    def aligned_counts(self, g: LinkGraph) -> np.ndarray:
        """Counts as a dense vector over the graph's edge slots.

        Raises :class:`SupportError` if any logged pair is not a graph edge.
        """
        out = np.zeros(g.n_edges, dtype=np.float64)
        if len(self.src) == 0:
            return out
        slots = g.edge_slots(self.src, self.trg)
        if (slots < 0).any():
            bad = int(np.argmax(slots < 0))
            raise SupportError(
                f"transition ({self.src[bad]}, {self.trg[bad]}) is not an edge of the graph"
            )
        out[slots] = self.count
        return out


@dataclass
class DropStats:
    """Accounting of what the clickstream parser kept and discarded."""

    lines: int = 0
    malformed: int = 0
    external: int = 0
    non_edge: int = 0
    below_threshold_pairs: int = 0
    below_threshold_count: int = 0
    kept_pairs: int = 0
    kept_count: int = 0
    parse_errors: list[str] = field(default_factory=list)


def parse_edge_list(lines: Iterable[str]) -> tuple[list[tuple[int, int]], dict[str, int]]:
    """Parse ``src_name<TAB>trg_name`` lines into id pairs.

    Names are interned to dense ids in first-seen order.  Duplicate lines are
    passed through untouched; deduplication happens in :func:`graph.build_graph`.
    """
    name_to_id: dict[str, int] = {}
    edges: list[tuple[int, int]] = []

    def intern(name: str, line_no: int) -> int:
        if not name:
            raise LineError(line_no, "empty article name")
        idx = name_to_id.get(name)
        if idx is None:
            idx = len(name_to_id)
            name_to_id[name] = idx
        return idx

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise LineError(line_no, f"expected 2 tab-separated fields, got {len(fields)}")
        edges.append((intern(fields[0], line_no), intern(fields[1], line_no)))
    return edges, name_to_id


def edge_lines(edges: Iterable[tuple[int, int]], names: Sequence[str]) -> Iterable[str]:
    """Inverse of :func:`parse_edge_list`; yields writable lines."""
    for s, t in edges:
        yield f"{names[s]}\t{names[t]}\n"


def parse_clickstream(
    lines: Iterable[str],
    name_to_id: dict[str, int],
    graph: LinkGraph,
    threshold: int = DEFAULT_THRESHOLD,
    fail_fast: bool = False,
) -> tuple[TransitionLog, DropStats]:
    """Parse clickstream rows into a :class:`TransitionLog`.

    Rows are ``referrer<TAB>resource<TAB>count`` or the 4-column variant with
    a type token before the count (the type is ignored).  Referrers that are
    not internal article names are dropped as external traffic, pairs that are
    not graph edges are dropped, duplicate pairs are summed, and only pairs
    with a summed count of at least ``threshold`` are kept.

    Malformed rows raise :class:`LineError` when ``fail_fast`` is set and are
    otherwise skipped and recorded in the returned :class:`DropStats`.
    """
    stats = DropStats()
    sums: dict[tuple[int, int], int] = {}

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        stats.lines += 1
        fields = line.split("\t")
        if len(fields) == 3:
            ref, res, count_text = fields
        elif len(fields) == 4:
            ref, res, _type, count_text = fields
        else:
            err = LineError(line_no, f"expected 3 or 4 tab-separated fields, got {len(fields)}")
            if fail_fast:
                raise err
            stats.malformed += 1
            stats.parse_errors.append(str(err))
            continue
        try:
            count = int(count_text)
        except ValueError:
            err = LineError(line_no, f"non-numeric count {count_text!r}")
            if fail_fast:
                raise err
            stats.malformed += 1
            stats.parse_errors.append(str(err))
            continue

        src = name_to_id.get(ref)
        if src is None:
            stats.external += 1
            continue
        trg = name_to_id.get(res)
        if trg is None or not graph.has_edge(src, trg):
            stats.non_edge += 1
            continue
        sums[(src, trg)] = sums.get((src, trg), 0) + count

    kept = {pair: c for pair, c in sums.items() if c >= threshold}
    dropped = {pair: c for pair, c in sums.items() if c < threshold}
    stats.below_threshold_pairs = len(dropped)
    stats.below_threshold_count = sum(dropped.values())
    stats.kept_pairs = len(kept)
    stats.kept_count = sum(kept.values())

    log = TransitionLog.from_pairs(
        src=[p[0] for p in kept],
        trg=[p[1] for p in kept],
        count=list(kept.values()),
        threshold=threshold,
        graph=graph,
    )
    return log, stats


def transition_lines(log: TransitionLog, names: Sequence[str]) -> Iterable[str]:
    """Serialize a log back to 3-column clickstream format (reparse-stable)."""
    for s, t, c in zip(log.src, log.trg, log.count):
        yield f"{names[s]}\t{names[t]}\t{c}\n"


@dataclass(frozen=True, eq=False)
class LinkFeatureTable:
    """One record per link: transition count plus network, semantic, and
    visual features.  ``src``/``trg`` are internal node ids."""

    src: np.ndarray
    trg: np.ndarray
    data: dict[str, np.ndarray]
    labels: tuple[str, ...] | None = None

    def __len__(self) -> int:
        return len(self.src)

    def column(self, name: str) -> np.ndarray:
        if name == "src":
            return self.src
        if name == "trg":
            return self.trg
        return self.data[name]

    def edge_values(self, g: LinkGraph, name: str, fill=np.nan) -> np.ndarray:
        """Column spread over the graph's edge slots; uncovered edges get ``fill``."""
        col = self.column(name)
        out = np.full(g.n_edges, fill, dtype=col.dtype if col.dtype.kind == "f" else object)
        slots = g.edge_slots(self.src, self.trg)
        ok = slots >= 0
        out[slots[ok]] = col[ok]
        return out


@dataclass
class JoinReport:
    """Row-level problems and recompute-consistency findings from a table load."""

    rejected: list[tuple[int, str, str, str]] = field(default_factory=list)  # line, src, trg, reason
    consistency: dict[str, tuple[int, float]] = field(default_factory=dict)  # col -> (mismatches, max abs diff)
    rows_read: int = 0
    rows_kept: int = 0


def compute_network_features(g: LinkGraph, alpha: float = 0.85) -> dict[str, np.ndarray]:
    """Per-node centralities keyed the way feature columns expect them."""
    ind, outd, deg = graphmod.degrees(g)
    cores = graphmod.kcore(g)
    pr = graphmod.pagerank(g, alpha=alpha)
    return {
        "degree": deg.values.astype(np.float64),
        "in_degree": ind.values.astype(np.float64),
        "out_degree": outd.values.astype(np.float64),
        "kcore": cores.values.astype(np.float64),
        "pagerank": pr.values,
    }


def _node_feature_columns(per_node: dict[str, np.ndarray], src: np.ndarray, trg: np.ndarray) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    for base, vec in per_node.items():
        name = "pagerank" if base == "pagerank" else base
        cols[f"src_{name}"] = vec[src]
        cols[f"trg_{name}"] = vec[trg]
    return cols


def load_feature_table(
    lines: Iterable[str],
    graph: LinkGraph | None,
    transitions: TransitionLog | None = None,
    recompute_network: bool = False,
    delimiter: str = "\t",
) -> tuple[LinkFeatureTable, JoinReport]:
    """Load a delimited feature file and join it against graph and transitions.

    The header must name at least the mandatory columns (src, trg, the two
    similarities, coordinates, region); network columns may be recomputed
    from the graph instead (``recompute_network``), in which case a
    consistency report is filled for any network columns also present in the
    file.  A missing ``transitions`` column is filled from the log (0 where
    unobserved).

    Rows referencing non-edges, rows with out-of-range similarities, and rows
    with unknown region labels are rejected and listed in the report.

    ``graph=None`` skips edge validation and interns names from the file
    itself (useful for standalone inspection of published feature files).
    """
    it = iter(lines)
    header: list[str] | None = None
    for raw in it:
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        header = [h.strip() for h in line.split(delimiter)]
        break
    if header is None:
        raise SchemaError("feature file has no header line")
    colpos = {name: i for i, name in enumerate(header)}

    missing = [c for c in _MANDATORY if c not in colpos]
    if not recompute_network:
        missing += [c for c in NETWORK_COLUMNS if c not in colpos]
    if missing:
        raise SchemaError(f"feature file missing mandatory columns: {', '.join(missing)}")

    if graph is not None and graph.labels is not None:
        name_to_id = graph.name_to_id()
        intern = None
    elif graph is not None:
        name_to_id = None
        intern = None
    else:
        name_to_id = {}
        intern = name_to_id  # grown on the fly

    report = JoinReport()
    src_ids: list[int] = []
    trg_ids: list[int] = []
    raw_cols: dict[str, list] = {c: [] for c in header if c not in ("src", "trg")}
    seen: set[tuple[int, int]] = set()

    numeric = {c for c in FEATURE_COLUMNS if c not in ("src", "trg", "region")}

    for line_no, raw in enumerate(it, start=2):
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        report.rows_read += 1
        fields = line.split(delimiter)
        if len(fields) != len(header):
            report.rejected.append((line_no, "", "", f"expected {len(header)} fields, got {len(fields)}"))
            continue
        src_name = fields[colpos["src"]]
        trg_name = fields[colpos["trg"]]

        if name_to_id is not None:
            if intern is not None:
                s = name_to_id.setdefault(src_name, len(name_to_id))
                t = name_to_id.setdefault(trg_name, len(name_to_id))
            else:
                s = name_to_id.get(src_name, -1)
                t = name_to_id.get(trg_name, -1)
        else:
            try:
                s, t = int(src_name), int(trg_name)
            except ValueError:
                report.rejected.append((line_no, src_name, trg_name, "non-integer id in unlabeled graph"))
                continue

        if graph is not None:
            if s < 0 or t < 0 or not graph.has_edge(s, t):
                report.rejected.append((line_no, src_name, trg_name, "not an edge of the graph"))
                continue
        if (s, t) in seen:
            report.rejected.append((line_no, src_name, trg_name, "duplicate link row"))
            continue

        row_vals: dict[str, object] = {}
        bad = None
        for cname in raw_cols:
            text = fields[colpos[cname]]
            if cname in numeric:
                try:
                    row_vals[cname] = float(text)
                except ValueError:
                    bad = f"non-numeric value {text!r} in column {cname}"
                    break
            else:
                row_vals[cname] = text
        if bad is None:
            for sim in ("text_sim", "topic_sim"):
                v = row_vals.get(sim)
                if v is not None and not 0.0 <= float(v) <= 1.0:
                    bad = f"{sim} {v} outside [0, 1]"
                    break
        if bad is None and row_vals.get("region") not in (None, *REGIONS):
            bad = f"unknown region label {row_vals['region']!r}"
        if bad is not None:
            report.rejected.append((line_no, src_name, trg_name, bad))
            continue

        seen.add((s, t))
        src_ids.append(s)
        trg_ids.append(t)
        for cname in raw_cols:
            raw_cols[cname].append(row_vals[cname])

    report.rows_kept = len(src_ids)
    src = np.asarray(src_ids, dtype=np.int64)
    trg = np.asarray(trg_ids, dtype=np.int64)

    data: dict[str, np.ndarray] = {}
    for cname, values in raw_cols.items():
        if cname == "region":
            data[cname] = np.asarray(values, dtype=object)
        else:
            data[cname] = np.asarray(values, dtype=np.float64)

    if "transitions" not in data:
        data["transitions"] = np.zeros(len(src), dtype=np.float64)
        if transitions is not None and len(src):
            data["transitions"] = _counts_for_pairs(transitions, src, trg)

    if recompute_network and graph is not None:
        per_node = compute_network_features(graph)
        computed = _node_feature_columns(per_node, src, trg)
        for cname, vec in computed.items():
            if cname in raw_cols and len(src):
                diff = np.abs(data[cname] - vec)
                mism = int((diff > 1e-9).sum())
                report.consistency[cname] = (mism, float(diff.max()) if len(diff) else 0.0)
            data[cname] = vec

    labels = graph.labels if graph is not None else _labels_from_intern(name_to_id)
    table = LinkFeatureTable(src=src, trg=trg, data=data, labels=labels)
    return table, report


def _labels_from_intern(name_to_id: dict[str, int] | None) -> tuple[str, ...] | None:
    if not name_to_id:
        return None
    out = [""] * len(name_to_id)
    for name, idx in name_to_id.items():
        out[idx] = name
    return tuple(out)


def _counts_for_pairs(log: TransitionLog, src: np.ndarray, trg: np.ndarray) -> np.ndarray:
    counts = np.zeros(len(src), dtype=np.float64)
    if len(log) == 0 or len(src) == 0:
        return counts
    lookup = {(int(s), int(t)): int(c) for s, t, c in zip(log.src, log.trg, log.count)}
    for i, (s, t) in enumerate(zip(src, trg)):
        counts[i] = lookup.get((int(s), int(t)), 0)
    return counts


def build_feature_table(
    g: LinkGraph,
    log: TransitionLog,
    text_sim: np.ndarray,
    topic_sim: np.ndarray,
    x_coord: np.ndarray,
    y_coord: np.ndarray,
    region: np.ndarray,
    covered: np.ndarray | None = None,
    alpha: float = 0.85,
) -> LinkFeatureTable:
    """Assemble a feature table for the graph's edges from per-edge arrays.

    All arrays are aligned to the graph's edge slots.  ``covered`` masks the
    edges to include (default: all).  Network features are computed here.
    """
    m = g.n_edges
    for name, arr in (("text_sim", text_sim), ("topic_sim", topic_sim),
                      ("x_coord", x_coord), ("y_coord", y_coord), ("region", region)):
        if len(arr) != m:
            raise MalformedInputError(f"{name} has {len(arr)} entries for {m} edges")
    if covered is None:
        covered = np.ones(m, dtype=bool)
    for label in np.asarray(region, dtype=object)[covered]:
        if label not in REGIONS:
            raise SchemaError(f"unknown region label {label!r}")

    src = g.edge_sources[covered]
    trg = g.out_indices[covered]
    per_node = compute_network_features(g, alpha=alpha)
    data = _node_feature_columns(per_node, src, trg)
    data["transitions"] = log.aligned_counts(g)[covered]
    data["text_sim"] = np.asarray(text_sim, dtype=np.float64)[covered]
    data["topic_sim"] = np.asarray(topic_sim, dtype=np.float64)[covered]
    data["x_coord"] = np.asarray(x_coord, dtype=np.float64)[covered]
    data["y_coord"] = np.asarray(y_coord, dtype=np.float64)[covered]
    data["region"] = np.asarray(region, dtype=object)[covered]
    return LinkFeatureTable(src=src, trg=trg, data=data, labels=g.labels)


def feature_table_lines(table: LinkFeatureTable, delimiter: str = "\t") -> Iterable[str]:
    """Serialize a table in the fixed column order (names when labeled)."""
    yield delimiter.join(FEATURE_COLUMNS) + "\n"
    labels = table.labels
    for i in range(len(table)):
        out = []
        for col in FEATURE_COLUMNS:
            if col == "src":
                out.append(labels[table.src[i]] if labels else str(int(table.src[i])))
            elif col == "trg":
                out.append(labels[table.trg[i]] if labels else str(int(table.trg[i])))
            elif col == "region":
                out.append(str(table.data["region"][i]))
            else:
                v = float(table.data[col][i])
                out.append(str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(v))
        yield delimiter.join(out) + "\n"


def table_stats(table: LinkFeatureTable) -> tuple[int, int, float]:
    """(link count, total transitions, mean transitions per link)."""
    n = len(table)
    total = int(round(float(table.data["transitions"].sum())))
    mean = total / n if n else math.nan
    return n, total, mean
