"""Semantic similarity features.

Articles become sublinear tf-idf vectors, a seeded sparse sign projection
compresses them to a fixed dimension, and similarities are cosines: projected
vectors for text, binary category indicators for topics.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import MalformedInputError, UnknownArticleError

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")

DEFAULT_DIM = 512
_PROJECTION_CHUNK = 1024  # rows of the projection matrix drawn per rng call


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than 2."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if len(t) >= 2]


@dataclass(frozen=True, eq=False)
class DocumentCorpus:
    """Token counts and category sets per article, plus document frequencies."""

    names: tuple[str, ...]
    name_to_idx: dict[str, int]
    token_counts: tuple[dict[str, int], ...]
    categories: tuple[frozenset[str], ...]
    vocabulary: dict[str, int]
    doc_freq: np.ndarray

    @property
    def n_docs(self) -> int:
        return len(self.names)

    def index(self, article) -> int:
        if isinstance(article, str):
            idx = self.name_to_idx.get(article)
            if idx is None:
                raise UnknownArticleError(f"unknown article {article!r}")
            return idx
        idx = int(article)
        if not 0 <= idx < self.n_docs:
            raise UnknownArticleError(f"article index {idx} out of range")
        return idx


def _counts(tokens: Iterable[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    return counts


def build_corpus(
    token_docs: Iterable[tuple[str, Iterable[str]]],
    category_docs: Iterable[tuple[str, Iterable[str]]] | None = None,
) -> DocumentCorpus:
    """Assemble a corpus from (name, tokens) pairs and optional categories."""
    names: list[str] = []
    name_to_idx: dict[str, int] = {}
    token_counts: list[dict[str, int]] = []
    for name, tokens in token_docs:
        if name in name_to_idx:
            raise MalformedInputError(f"duplicate article {name!r} in corpus")
        name_to_idx[name] = len(names)
        names.append(name)
        token_counts.append(_counts(tokens))

    cats: list[frozenset[str]] = [frozenset()] * len(names)
    if category_docs is not None:
        for name, labels in category_docs:
            idx = name_to_idx.get(name)
            if idx is None:
                continue  # categories for unknown articles are irrelevant
            cats[idx] = frozenset(labels)

    vocabulary: dict[str, int] = {}
    df: list[int] = []
    for counts in token_counts:
        for term in counts:
            col = vocabulary.get(term)
            if col is None:
                vocabulary[term] = len(df)
                df.append(1)
            else:
                df[col] += 1
    return DocumentCorpus(
        names=tuple(names),
        name_to_idx=name_to_idx,
        token_counts=tuple(token_counts),
        categories=tuple(cats),
        vocabulary=vocabulary,
        doc_freq=np.asarray(df, dtype=np.int64),
    )


def corpus_from_lines(
    token_lines: Iterable[str],
    category_lines: Iterable[str] | None = None,
) -> DocumentCorpus:
    """Read ``name<TAB>token<TAB>token...`` and category files."""

    def parse(lines):
        for raw in lines:
            fields = raw.rstrip("\n").split("\t")
            if not fields or not fields[0]:
                continue
            yield fields[0], [f for f in fields[1:] if f]

    cats = parse(category_lines) if category_lines is not None else None
    return build_corpus(parse(token_lines), cats)


def corpus_digest(corpus: DocumentCorpus) -> str:
    """Stable fingerprint over article names and token counts."""
    h = hashlib.sha256()
    for name, counts in zip(corpus.names, corpus.token_counts):
        h.update(name.encode("utf-8"))
        for term in sorted(counts):
            h.update(f"\x00{term}\x01{counts[term]}".encode("utf-8"))
        h.update(b"\x02")
    return h.hexdigest()


def tfidf(corpus: DocumentCorpus) -> sp.csr_matrix:
    """Sublinear tf-idf: weight = (1 + ln tf) * ln(N / df), rows L2-normalized.

    Terms present in every document get weight 0; an all-zero row (e.g. a
    single-document corpus) stays zero rather than being normalized.
    """
    if corpus.n_docs == 0:
        raise MalformedInputError("empty corpus")
    n = corpus.n_docs
    idf = np.log(n / corpus.doc_freq)
    rows, cols, vals = [], [], []
    for i, counts in enumerate(corpus.token_counts):
        for term, tf in counts.items():
            col = corpus.vocabulary[term]
            w = (1.0 + np.log(tf)) * idf[col]
            if w != 0.0:
                rows.append(i)
                cols.append(col)
                vals.append(w)
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)),
        shape=(n, max(len(corpus.vocabulary), 1)),
    )
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
    scale = np.ones(n)
    nz = norms > 0
    scale[nz] = 1.0 / norms[nz]
    return sp.diags(scale) @ mat


@dataclass(frozen=True, eq=False)
class ProjectedVectors:
    """Dense projected article vectors, deterministic given (corpus, dim, seed)."""

    dim: int
    seed: int
    matrix: np.ndarray  # n_docs x dim
    name_to_idx: dict[str, int]

    def vector(self, article) -> np.ndarray:
        if isinstance(article, str):
            idx = self.name_to_idx.get(article)
            if idx is None:
                raise UnknownArticleError(f"unknown article {article!r}")
        else:
            idx = int(article)
            if not 0 <= idx < len(self.matrix):
                raise UnknownArticleError(f"article index {idx} out of range")
        return self.matrix[idx]


def projection_matrix(n_features: int, dim: int, seed: int) -> sp.csr_matrix:
    """Sparse sign matrix with density 1/sqrt(n_features).

    Nonzero entries are +-s with s = sqrt(1 / (density * dim)), which keeps
    squared norms (hence pairwise distances) preserved in expectation.  The
    matrix is generated in fixed-size row chunks so equal seeds give bitwise
    equal results regardless of platform.
    """
    if dim < 1:
        raise ValueError("projection dimension must be >= 1")
    density = 1.0 / np.sqrt(max(n_features, 1))
    s = np.sqrt(1.0 / (density * dim))
    rng = np.random.default_rng(seed)
    blocks = []
    for start in range(0, n_features, _PROJECTION_CHUNK):
        rows = min(_PROJECTION_CHUNK, n_features - start)
        u = rng.random((rows, dim))
        signs = rng.random((rows, dim)) < 0.5
        block = np.zeros((rows, dim))
        nz = u < density
        block[nz] = np.where(signs[nz], s, -s)
        blocks.append(sp.csr_matrix(block))
    if not blocks:
        return sp.csr_matrix((0, dim))
    return sp.vstack(blocks, format="csr")


def project(vectors: sp.csr_matrix, corpus: DocumentCorpus, dim: int = DEFAULT_DIM, seed: int = 0) -> ProjectedVectors:
    """Project tf-idf vectors down to ``dim`` with a seeded sparse sign matrix."""
    rmat = projection_matrix(vectors.shape[1], dim, seed)
    dense = np.asarray((vectors @ rmat).todense())
    return ProjectedVectors(dim=dim, seed=seed, matrix=dense, name_to_idx=dict(corpus.name_to_idx))


def save_projection(proj: ProjectedVectors, prefix, corpus_hash: str) -> None:
    """Cache projected vectors as {prefix}.npy plus a {prefix}.json key file.

    Plain .npy keeps the cache byte-stable across runs (no archive
    timestamps); the sidecar records (dim, seed, corpus hash) for validation.
    """
    prefix = str(prefix)
    np.save(prefix + ".npy", proj.matrix)
    names = sorted(proj.name_to_idx, key=proj.name_to_idx.get)
    meta = {"dim": proj.dim, "seed": proj.seed, "corpus_hash": corpus_hash, "names": names}
    with open(prefix + ".json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)


def load_projection(prefix, dim: int, seed: int, corpus_hash: str) -> ProjectedVectors | None:
    """Load a cached projection; returns None when the key does not match."""
    prefix = str(prefix)
    if not (os.path.exists(prefix + ".npy") and os.path.exists(prefix + ".json")):
        return None
    with open(prefix + ".json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta["dim"] != dim or meta["seed"] != seed or meta["corpus_hash"] != corpus_hash:
        return None
    matrix = np.load(prefix + ".npy")
    return ProjectedVectors(
        dim=dim, seed=seed, matrix=matrix,
        name_to_idx={n: i for i, n in enumerate(meta["names"])},
    )


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.dot(u, u))
    nv = float(np.dot(v, v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / np.sqrt(nu * nv))


def text_similarity(proj: ProjectedVectors, a, b) -> float:
    """Cosine of the projected vectors, clamped to [0, 1]."""
    sim = cosine(proj.vector(a), proj.vector(b))
    return min(max(sim, 0.0), 1.0)


def topic_similarity(corpus: DocumentCorpus, a, b) -> float:
    """Cosine of binary category indicators: |A & B| / sqrt(|A| |B|)."""
    ca = corpus.categories[corpus.index(a)]
    cb = corpus.categories[corpus.index(b)]
    if not ca or not cb:
        return 0.0
    return len(ca & cb) / np.sqrt(len(ca) * len(cb))


def edge_similarities(
    g,
    proj: ProjectedVectors,
    corpus: DocumentCorpus,
) -> tuple[np.ndarray, np.ndarray, int]:
    """text_sim and topic_sim per graph edge, by article name.

    Edges whose endpoints are missing from the corpus get similarity 0; the
    count of such edges is returned alongside.
    """
    if g.labels is None:
        raise MalformedInputError("graph carries no node labels")
    n = g.n_nodes
    doc_idx = np.full(n, -1, dtype=np.int64)
    for node, name in enumerate(g.labels):
        doc_idx[node] = proj.name_to_idx.get(name, -1)

    src = g.edge_sources
    trg = g.out_indices
    text = np.zeros(g.n_edges)
    topic = np.zeros(g.n_edges)
    missing = 0
    for e in range(g.n_edges):
        ia, ib = doc_idx[src[e]], doc_idx[trg[e]]
        if ia < 0 or ib < 0:
            missing += 1
            continue
        text[e] = min(max(cosine(proj.matrix[ia], proj.matrix[ib]), 0.0), 1.0)
        topic[e] = topic_similarity(corpus, int(ia), int(ib))
    return text, topic, missing
