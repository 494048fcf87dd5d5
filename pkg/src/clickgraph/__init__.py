"""clickgraph: what makes a link successful in an information network.

Ingests a directed link graph and aggregated click transitions, computes
link features, fits hurdle regression models, compares navigational
hypotheses by Bayesian evidence, and ranks pages with a hypothesis-weighted
PageRank evaluated against observed traffic.
"""

from .errors import ClickgraphError
from .graph import LinkGraph, build_graph, degrees, kcore, pagerank
from .ingest import (
    LinkFeatureTable,
    TransitionLog,
    load_feature_table,
    parse_clickstream,
    parse_edge_list,
)
from .evidence import (
    EvidenceCurve,
    HypothesisMatrix,
    bayes_factor_curve,
    combine,
    elicit_prior,
    kcore_hypothesis,
    log_evidence,
    structural_hypothesis,
    textsim_hypothesis,
    visual_hypothesis,
)
from .ranking import (
    RankEvaluation,
    evaluate_all,
    incoming_transition_sums,
    spearman,
    steiger_test,
    weighted_pagerank,
)

__version__ = "0.1.0"

__all__ = [
    "ClickgraphError",
    "LinkGraph",
    "build_graph",
    "degrees",
    "kcore",
    "pagerank",
    "TransitionLog",
    "LinkFeatureTable",
    "parse_edge_list",
    "parse_clickstream",
    "load_feature_table",
    "HypothesisMatrix",
    "EvidenceCurve",
    "structural_hypothesis",
    "kcore_hypothesis",
    "textsim_hypothesis",
    "visual_hypothesis",
    "combine",
    "elicit_prior",
    "log_evidence",
    "bayes_factor_curve",
    "RankEvaluation",
    "weighted_pagerank",
    "incoming_transition_sums",
    "spearman",
    "steiger_test",
    "evaluate_all",
    "__version__",
]
