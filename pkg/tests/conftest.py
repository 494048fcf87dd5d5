"""Shared fixtures: the 20-article toy input set used by the CLI tests."""

from __future__ import annotations

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make `helpers` importable

ARTICLES = [
    "Graph_theory", "Network_science", "Social_network", "Matrix_algebra",
    "Probability", "Statistics", "Markov_chain", "Random_walk",
    "Eigenvector", "Centrality", "Shortest_path", "Clustering",
    "Data_mining", "Machine_learning", "Information_retrieval", "Web_search",
    "Hyperlink", "World_Wide_Web", "Internet", "Encyclopedia",
]

WORDS = {
    "Graph_theory": "graph vertex edge theory discrete mathematics network path cycle",
    "Network_science": "network node edge degree science graph complex system",
    "Social_network": "social network people tie community node relation graph",
    "Matrix_algebra": "matrix algebra linear row column vector product eigenvalue",
    "Probability": "probability random event measure distribution chance outcome",
    "Statistics": "statistics data inference sample estimate distribution test",
    "Markov_chain": "markov chain state transition probability stochastic memoryless process",
    "Random_walk": "random walk step lattice probability path stochastic process",
    "Eigenvector": "eigenvector eigenvalue matrix linear transformation vector basis",
    "Centrality": "centrality node importance network degree rank measure graph",
    "Shortest_path": "shortest path distance graph algorithm weight route node",
    "Clustering": "clustering cluster group similarity partition data algorithm",
    "Data_mining": "data mining pattern discovery database knowledge large analysis",
    "Machine_learning": "machine learning model training data prediction algorithm feature",
    "Information_retrieval": "information retrieval document query search relevance ranking text",
    "Web_search": "web search engine query page result ranking crawler",
    "Hyperlink": "hyperlink link anchor page web document reference navigation",
    "World_Wide_Web": "web page hypertext link browser internet document www",
    "Internet": "internet network protocol packet global computer communication",
    "Encyclopedia": "encyclopedia knowledge article reference topic entry compendium",
}

CATEGORIES = {
    "Graph_theory": "mathematics graph_theory",
    "Network_science": "network_science graph_theory",
    "Social_network": "network_science sociology",
    "Matrix_algebra": "mathematics linear_algebra",
    "Probability": "mathematics probability",
    "Statistics": "mathematics statistics",
    "Markov_chain": "probability stochastic_processes",
    "Random_walk": "probability stochastic_processes",
    "Eigenvector": "linear_algebra mathematics",
    "Centrality": "network_science graph_theory",
    "Shortest_path": "graph_theory algorithms",
    "Clustering": "data_analysis algorithms",
    "Data_mining": "data_analysis computing",
    "Machine_learning": "computing data_analysis",
    "Information_retrieval": "computing information_science",
    "Web_search": "computing world_wide_web",
    "Hyperlink": "world_wide_web information_science",
    "World_Wide_Web": "world_wide_web computing",
    "Internet": "computing networks",
    "Encyclopedia": "reference information_science",
}


def write_toy_inputs(directory: str) -> dict[str, str]:
    """Deterministic 20-article input set: edges, clickstream, corpus, visual."""
    rng = np.random.default_rng(1234)
    n = len(ARTICLES)
    names = ARTICLES

    edges: set[tuple[int, int]] = set()
    for i in range(8):
        for j in range(8):
            if i != j and rng.random() < 0.55:
                edges.add((i, j))
    for i in range(8, n):
        for j in rng.choice(8, size=2, replace=False):
            edges.add((i, int(j)))
        k = int(rng.integers(8, n))
        if k != i:
            edges.add((i, k))
        edges.add((int(rng.integers(0, 8)), i))
    edge_list = sorted(edges)

    paths = {key: os.path.join(directory, fname) for key, fname in (
        ("edges", "edges.tsv"), ("clickstream", "clickstream.tsv"),
        ("corpus", "corpus.tsv"), ("categories", "categories.tsv"),
        ("visual", "visual.tsv"),
    )}

    with open(paths["edges"], "w", encoding="utf-8") as fh:
        for s, t in edge_list:
            fh.write(f"{names[s]}\t{names[t]}\n")

    lines = []
    used: list[tuple[int, int, int]] = []
    for s, t in edge_list:
        r = rng.random()
        if r < 0.45:
            c = int(rng.integers(10, 250))
            used.append((s, t, c))
            lines.append(f"{names[s]}\t{names[t]}\t{c}")
        elif r < 0.55:
            lines.append(f"{names[s]}\t{names[t]}\t{int(rng.integers(1, 10))}")
    s, t, _ = used[0]
    lines.append(f"{names[s]}\t{names[t]}\t7")              # duplicate pair, summed
    lines.append(f"other-search\t{names[3]}\t500")           # external referrer
    lines.append(f"{names[0]}\t{names[0]}\t50")              # not an edge
    lines.append(f"{names[1]}\t{names[2]}\tlink\t99")        # 4-column variant
    with open(paths["clickstream"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        for a in names:
            fh.write(a + "\t" + "\t".join(WORDS[a].split()) + "\n")
    with open(paths["categories"], "w", encoding="utf-8") as fh:
        for a in names:
            fh.write(a + "\t" + "\t".join(CATEGORIES[a].split()) + "\n")

    regions = ["lead", "body", "left-body", "right-body", "infobox", "navbox"]
    with open(paths["visual"], "w", encoding="utf-8") as fh:
        fh.write("src\ttrg\tx_coord\ty_coord\tregion\n")
        for s, t in edge_list:
            reg = regions[int(rng.integers(0, 6))]
            x = int(rng.integers(0, 1920))
            y = int(rng.integers(0, 4000))
            fh.write(f"{names[s]}\t{names[t]}\t{x}\t{y}\t{reg}\n")
    return paths


@pytest.fixture(scope="session")
def toy_inputs(tmp_path_factory) -> dict[str, str]:
    directory = tmp_path_factory.mktemp("toy-inputs")
    return write_toy_inputs(str(directory))
