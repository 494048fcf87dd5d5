"""Focus-of-attention statistics.

How strongly clicks concentrate on few links: the transition-count
distribution, out-degree comparison between the full link network and the
used subnetwork, per-article Gini coefficients, and maximum-likelihood fits
of candidate count distributions compared by AIC.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import (
    DegenerateInputError,
    InsufficientDataError,
    UndefinedGiniError,
)
from .graph import LinkGraph
from .ingest import TransitionLog

FAMILIES = ("power_law", "truncated_power_law", "lognormal", "exponential")

# Exact partial sum up to xmin + this many terms; the remaining tail of the
# normalization series is a midpoint-corrected integral.
_NORM_EXACT_TERMS = 20000


@dataclass(frozen=True)
class DegreeDistribution:
    """Out-degree histogram of one network, restricted to shared source nodes."""

    histogram: dict[int, int]
    source: str  # "wiki" | "trans"
    restriction: str

    @property
    def total(self) -> int:
        return sum(self.histogram.values())


@dataclass(frozen=True)
class ConcentrationStats:
    total_transitions: int
    top_k: int | None          # smallest k with top-k links >= half the transitions
    top_share: float | None    # share carried by those k links


def transition_histogram(log: TransitionLog) -> tuple[dict[int, int], ConcentrationStats]:
    """Frequency of each transition-count value plus concentration stats."""
    if len(log) == 0:
        return {}, ConcentrationStats(0, None, None)
    values, freqs = np.unique(log.count, return_counts=True)
    hist = {int(v): int(f) for v, f in zip(values, freqs)}
    desc = np.sort(log.count)[::-1]
    cum = np.cumsum(desc)
    total = int(cum[-1])
    k = int(np.searchsorted(cum, 0.5 * total) + 1)
    return hist, ConcentrationStats(total, k, float(cum[k - 1] / total))


def outdegree_comparison(
    g: LinkGraph, log: TransitionLog
) -> tuple[DegreeDistribution, DegreeDistribution]:
    """Out-degree histograms of the full network and of the used subnetwork.

    Only nodes appearing as transition sources enter either histogram, so the
    two distributions range over the same node set.
    """
    wiki_out = g.out_degrees()
    trans_out = np.bincount(log.src, minlength=g.n_nodes) if len(log) else np.zeros(g.n_nodes, dtype=np.int64)
    shared = trans_out > 0  # a transition source always has wiki out-links too
    note = "sources present in both networks"

    def hist(vec: np.ndarray) -> dict[int, int]:
        values, freqs = np.unique(vec[shared], return_counts=True)
        return {int(v): int(f) for v, f in zip(values, freqs)}

    return (
        DegreeDistribution(hist(wiki_out), "wiki", note),
        DegreeDistribution(hist(trans_out), "trans", note),
    )


def gini(values) -> float:
    """Gini coefficient of nonnegative counts, zeros included.

    Uses the sorted O(n log n) identity for sum_i sum_j |x_i - x_j| / (2 n^2 mu).
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise DegenerateInputError("gini of an empty vector")
    if (x < 0).any():
        raise DegenerateInputError("gini requires nonnegative values")
    total = x.sum()
    if total == 0:
        raise UndefinedGiniError("gini of an all-zero vector is undefined")
    n = x.size
    xs = np.sort(x)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * np.dot(ranks, xs) / (n * total) - (n + 1.0) / n)


def per_article_gini(g: LinkGraph, log: TransitionLog) -> tuple[np.ndarray, int]:
    """Gini of each source article's out-link count vector (zeros included).

    Articles whose links saw no transitions at all have an undefined Gini and
    are excluded; the second return value tallies them.
    """
    counts = log.aligned_counts(g)
    indptr = g.out_indptr
    ginis: list[float] = []
    skipped = 0
    for i in range(g.n_nodes):
        lo, hi = indptr[i], indptr[i + 1]
        if hi == lo:
            continue
        row = counts[lo:hi]
        if row.sum() == 0:
            skipped += 1
            continue
        ginis.append(gini(row))
    return np.asarray(ginis), skipped


# ---------------------------------------------------------------------------
# Discrete distribution fitting (support x >= xmin, integer x)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyFit:
    family: str
    params: dict[str, float]
    loglik: float
    aic: float
    n_params: int
    converged: bool
    message: str = ""


@dataclass(frozen=True)
class FitReport:
    xmin: int
    n_tail: int
    fits: dict[str, FamilyFit]
    winner: str
    delta_aic: dict[str, float]
    selection_rule: str = "AIC (2k - 2 lnL); smallest wins"


def _tail_integral(log_f, a: float) -> float:
    """Integral of f over [a, inf) for a smooth decaying log-density."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _err = integrate.quad(lambda t: math.exp(log_f(t)), a, np.inf, limit=200)
    return val


def _log_norm_pl(alpha: float, xmin: int) -> float:
    return float(np.log(special.zeta(alpha, xmin)))


def _log_norm_tpl(alpha: float, lam: float, xmin: int) -> float:
    # Z = sum_{x >= xmin} x^-alpha e^(-lam x): exact head plus midpoint tail.
    upper = xmin + _NORM_EXACT_TERMS
    x = np.arange(xmin, upper, dtype=np.float64)
    head = special.logsumexp(-alpha * np.log(x) - lam * x)
    tail = _tail_integral(lambda t: -alpha * math.log(t) - lam * t, upper - 0.5)
    return float(np.logaddexp(head, np.log(tail) if tail > 0 else -np.inf))


def _log_norm_lognormal(mu: float, sigma: float, xmin: int) -> float:
    upper = xmin + _NORM_EXACT_TERMS
    x = np.arange(xmin, upper, dtype=np.float64)
    lx = np.log(x)
    head = special.logsumexp(-lx - 0.5 * ((lx - mu) / sigma) ** 2)
    # Closed-form Gaussian tail: integral of (1/t) exp(-(ln t - mu)^2 / 2 s^2).
    z = (math.log(upper - 0.5) - mu) / sigma
    tail = math.sqrt(2.0 * math.pi) * sigma * special.ndtr(-z)
    return float(np.logaddexp(head, np.log(tail) if tail > 0 else -np.inf))


def family_loglik(family: str, params: dict[str, float], samples, xmin: int) -> float:
    """Log-likelihood of tail samples (>= xmin) under a fitted family.

    Exposed so reported likelihoods can be re-checked against reported
    parameters.
    """
    x = np.asarray(samples, dtype=np.float64)
    x = x[x >= xmin]
    n = len(x)
    if family == "power_law":
        alpha = params["alpha"]
        return float(-alpha * np.log(x).sum() - n * _log_norm_pl(alpha, xmin))
    if family == "truncated_power_law":
        alpha, lam = params["alpha"], params["lambda"]
        return float(
            -alpha * np.log(x).sum() - lam * x.sum() - n * _log_norm_tpl(alpha, lam, xmin)
        )
    if family == "lognormal":
        mu, sigma = params["mu"], params["sigma"]
        lx = np.log(x)
        return float(
            (-lx - 0.5 * ((lx - mu) / sigma) ** 2).sum()
            - n * _log_norm_lognormal(mu, sigma, xmin)
        )
    if family == "exponential":
        lam = params["lambda"]
        # Geometric on {xmin, xmin+1, ...}: p(x) = (1 - e^-lam) e^(-lam (x - xmin)).
        return float(n * math.log(-math.expm1(-lam)) - lam * (x - xmin).sum())
    raise ValueError(f"unknown family {family!r}")


def _fit_power_law(x: np.ndarray, xmin: int) -> FamilyFit:
    logs = np.log(x).sum()
    n = len(x)

    def nll(alpha: float) -> float:
        return alpha * logs + n * _log_norm_pl(alpha, xmin)

    res = optimize.minimize_scalar(nll, bounds=(1.0001, 20.0), method="bounded")
    params = {"alpha": float(res.x)}
    ll = -float(res.fun)
    return FamilyFit("power_law", params, ll, 2 * 1 - 2 * ll, 1, bool(res.success))


def _fit_truncated_power_law(x: np.ndarray, xmin: int) -> FamilyFit:
    logs = np.log(x).sum()
    total = x.sum()
    n = len(x)

    def nll(p: np.ndarray) -> float:
        alpha, lam = p[0], max(math.exp(p[1]), 1e-9)
        if alpha < 0.0:  # keep the family on its valid range
            return 1e18 * (1.0 + alpha * alpha)
        return alpha * logs + lam * total + n * _log_norm_tpl(alpha, lam, xmin)

    best = None
    for lam0 in (0.5, 0.05):
        res = optimize.minimize(
            nll,
            x0=np.array([1.5, math.log(lam0)]),
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000},
        )
        if best is None or res.fun < best.fun:
            best = res
    alpha, lam = float(best.x[0]), float(max(math.exp(best.x[1]), 1e-9))
    params = {"alpha": max(alpha, 0.0), "lambda": lam}
    ll = -float(best.fun)
    return FamilyFit("truncated_power_law", params, ll, 2 * 2 - 2 * ll, 2, bool(best.success))


def _fit_lognormal(x: np.ndarray, xmin: int) -> FamilyFit:
    lx = np.log(x)
    n = len(x)

    def nll(p: np.ndarray) -> float:
        mu, sigma = p[0], math.exp(p[1])
        return float(
            (lx + 0.5 * ((lx - mu) / sigma) ** 2).sum()
            + n * _log_norm_lognormal(mu, sigma, xmin)
        )

    res = optimize.minimize(
        nll,
        x0=np.array([float(lx.mean()), math.log(max(float(lx.std()), 0.1))]),
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000},
    )
    params = {"mu": float(res.x[0]), "sigma": float(math.exp(res.x[1]))}
    ll = -float(res.fun)
    return FamilyFit("lognormal", params, ll, 2 * 2 - 2 * ll, 2, bool(res.success))


def _fit_exponential(x: np.ndarray, xmin: int) -> FamilyFit:
    # Closed-form geometric MLE on the shifted tail.
    m = float((x - xmin).mean())
    lam = math.log((1.0 + m) / m)
    params = {"lambda": lam}
    ll = family_loglik("exponential", params, x, xmin)
    return FamilyFit("exponential", params, ll, 2 * 1 - 2 * ll, 1, True)


def fit_distributions(samples, xmin: int = 1) -> FitReport:
    """MLE fits of the four candidate families on samples >= xmin, AIC-compared.

    Families that fail to converge are recorded and excluded from the
    comparison; the winner is the smallest-AIC converged family.
    """
    x = np.asarray(samples, dtype=np.float64)
    x = x[x >= xmin]
    if len(x) < 50:
        raise InsufficientDataError(f"{len(x)} samples >= xmin={xmin}; need at least 50")
    if np.all(x == x[0]):
        raise DegenerateInputError("constant samples admit no distribution comparison")

    fits: dict[str, FamilyFit] = {}
    for family, fitter in (
        ("power_law", _fit_power_law),
        ("truncated_power_law", _fit_truncated_power_law),
        ("lognormal", _fit_lognormal),
        ("exponential", _fit_exponential),
    ):
        try:
            fits[family] = fitter(x, xmin)
        except Exception as exc:  # per-family failure; comparison proceeds
            fits[family] = FamilyFit(family, {}, math.nan, math.inf, 0, False, str(exc))

    converged = {f: fit for f, fit in fits.items() if fit.converged and math.isfinite(fit.aic)}
    if not converged:
        raise DegenerateInputError("no candidate family converged")
    winner = min(converged, key=lambda f: converged[f].aic)
    best_aic = converged[winner].aic
    delta = {f: (fit.aic - best_aic if math.isfinite(fit.aic) else math.inf) for f, fit in fits.items()}
    return FitReport(xmin=xmin, n_tail=len(x), fits=fits, winner=winner, delta_aic=delta)
