"""Pipeline orchestrator.

Every analysis stage is a subcommand writing plot-ready delimited files into
one output directory.  Writes are atomic (temp file + rename), a manifest
records config and input hashes so unchanged reruns are skipped, and every
output starts with a header naming the tool version, config hash, and seeds.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, asdict, fields

import numpy as np

from . import __version__
from . import attention as attmod
from . import evidence as evmod
from . import graph as graphmod
from . import hurdle as hurdlemod
from . import ingest
from . import ranking as rankmod
from . import semantics as semmod
from .errors import (
    ClickgraphError,
    ConfigError,
    DegenerateInputError,
    DependencyError,
    InsufficientDataError,
)

ARTIFACTS = {
    "graph": "graph.tsv",
    "transitions": "transitions.tsv",
    "features": "features.tsv",
    "features_report": "features_report.txt",
    "sample": "sample.tsv",
    "attention_transitions": "attention_transition_hist.tsv",
    "attention_outdegree": "attention_outdegree_hist.tsv",
    "attention_gini": "attention_gini_hist.tsv",
    "attention_fits": "attention_fits.txt",
    "hurdle": "hurdle_fits.tsv",
    "hyptrails": "hyptrails_evidence.tsv",
    "pagerank": "pagerank_eval.tsv",
}

MANIFEST = "manifest.json"


@dataclass(frozen=True)
class RunConfig:
    edges: str | None = None
    clickstream: str | None = None
    feature_file: str | None = None
    corpus: str | None = None
    categories: str | None = None
    visual: str | None = None
    threshold: int = 10
    fail_fast: bool = False
    recompute_network_features: bool = False
    damping: float = 0.85
    alphas: tuple[float, ...] = (0.80, 0.85, 0.90)
    kappa_multipliers: tuple[float, ...] = (1, 2, 3, 4, 5)
    log_spaced: bool = False
    projection_dim: int = 512
    projection_seed: int = 0
    sample_size: int = 10000
    seed: int = 0
    xmin_degrees: int = 1
    xmin_transitions: int = 10
    restrict_to_viewed: bool = False
    threads: int = 1
    out: str = "out"

    def hash(self) -> str:
        # out dir and thread count do not affect results; keep reruns into a
        # different directory byte-identical.
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        blob = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional JSON config file with command-line overrides."""
    values: dict = {}
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(raw)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    for key in ("alphas", "kappa_multipliers"):
        if key in values:
            values[key] = tuple(float(x) for x in values[key])
    return RunConfig(**values)


def _validate_inputs(cfg: RunConfig, required: tuple[str, ...]) -> None:
    problems = []
    for name in required:
        path = getattr(cfg, name)
        if not path:
            problems.append(f"--{name.replace('_', '-')} is required for this command")
        elif not os.path.exists(path):
            problems.append(f"{name} path does not exist: {path}")
    if problems:
        raise ConfigError("; ".join(problems))


def _require_artifact(cfg: RunConfig, key: str, producer: str) -> str:
    path = os.path.join(cfg.out, ARTIFACTS[key])
    if not os.path.exists(path):
        raise DependencyError(
            f"missing {ARTIFACTS[key]} in {cfg.out}; run `clickgraph {producer}` first"
        )
    return path


def _atomic_write(path: str, lines) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(cfg: RunConfig, stage: str, extra: tuple[str, ...] = ()) -> list[str]:
    lines = [
        f"# clickgraph {__version__}\n",
        f"# stage={stage} config={cfg.hash()} seed={cfg.seed} "
        f"projection_seed={cfg.projection_seed}\n",
    ]
    lines.extend(f"# {e}\n" for e in extra)
    return lines


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isnan(v):
        return "NA"
    return repr(v)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_manifest(outdir: str) -> dict:
    path = os.path.join(outdir, MANIFEST)
    if not os.path.exists(path):
        return {"tool": "clickgraph", "version": __version__, "stages": {}}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _stage_key(cfg: RunConfig, inputs: tuple[str, ...]) -> dict:
    # Artifacts inside the output directory are keyed by their relative name
    # so manifests stay identical across runs into different directories.
    out = os.path.abspath(cfg.out)
    keyed = {}
    for p in inputs:
        if not p or not os.path.exists(p):
            continue
        ap = os.path.abspath(p)
        name = os.path.relpath(ap, out) if ap.startswith(out + os.sep) else p
        keyed[name] = _sha256(p)
    return {"config": cfg.hash(), "inputs": keyed}


def _cache_hit(manifest: dict, stage: str, key: dict, cfg: RunConfig) -> bool:
    entry = manifest["stages"].get(stage)
    if entry is None or entry.get("key") != key:
        return False
    return all(os.path.exists(os.path.join(cfg.out, f)) for f in entry.get("outputs", []))


def _record_stage(manifest: dict, stage: str, key: dict, outputs: list[str], cfg: RunConfig) -> None:
    manifest["stages"][stage] = {"key": key, "outputs": outputs}
    path = os.path.join(cfg.out, MANIFEST)
    _atomic_write(path, [json.dumps(manifest, sort_keys=True, indent=1) + "\n"])


def _load_graph_and_log(cfg: RunConfig):
    gpath = _require_artifact(cfg, "graph", "build")
    tpath = _require_artifact(cfg, "transitions", "build")
    g = graphmod.load_graph(gpath)
    name_to_id = g.name_to_id() if g.labels else None
    src, trg, count = [], [], []
    with open(tpath, "r", encoding="utf-8") as fh:
        for raw in fh:
            if raw.startswith("#") or not raw.strip():
                continue
            a, b, c = raw.rstrip("\n").split("\t")
            if name_to_id is not None:
                src.append(name_to_id[a])
                trg.append(name_to_id[b])
            else:
                src.append(int(a))
                trg.append(int(b))
            count.append(int(c))
    log = ingest.TransitionLog.from_pairs(src, trg, count, threshold=cfg.threshold, graph=g)
    return g, log


def _load_features(cfg: RunConfig, g, log) -> ingest.LinkFeatureTable:
    path = _require_artifact(cfg, "features", "features")
    with open(path, "r", encoding="utf-8") as fh:
        table, _report = ingest.load_feature_table(fh, g, log)
    return table


# ---------------------------------------------------------------------------
# Stage commands
# ---------------------------------------------------------------------------


def cmd_build(cfg: RunConfig) -> int:
    _validate_inputs(cfg, ("edges", "clickstream"))
    manifest = _load_manifest(cfg.out)
    key = _stage_key(cfg, (cfg.edges, cfg.clickstream))
    if _cache_hit(manifest, "build", key, cfg):
        print("build: cache hit, outputs unchanged")
        return 0

    with open(cfg.edges, "r", encoding="utf-8") as fh:
        edges, name_to_id = ingest.parse_edge_list(fh)
    labels = [""] * len(name_to_id)
    for name, idx in name_to_id.items():
        labels[idx] = name
    g = graphmod.build_graph(edges, labels=labels)

    with open(cfg.clickstream, "r", encoding="utf-8") as fh:
        log, stats = ingest.parse_clickstream(
            fh, name_to_id, g, threshold=cfg.threshold, fail_fast=cfg.fail_fast
        )

    gpath = os.path.join(cfg.out, ARTIFACTS["graph"])
    os.makedirs(cfg.out, exist_ok=True)
    tmp = gpath + ".tmp"
    graphmod.save_graph(
        g, tmp,
        header_lines=[f"clickgraph {__version__}", f"stage=build config={cfg.hash()} seed={cfg.seed}"],
    )
    os.replace(tmp, gpath)

    stat_notes = (
        f"threshold={cfg.threshold}",
        f"lines={stats.lines} malformed={stats.malformed} external={stats.external} "
        f"non_edge={stats.non_edge} below_threshold_pairs={stats.below_threshold_pairs}",
        f"kept_pairs={stats.kept_pairs} kept_transitions={stats.kept_count}",
    )
    body = ingest.transition_lines(log, g.labels)
    _atomic_write(
        os.path.join(cfg.out, ARTIFACTS["transitions"]),
        [*_header(cfg, "build", stat_notes), *body],
    )
    _record_stage(manifest, "build", key, [ARTIFACTS["graph"], ARTIFACTS["transitions"]], cfg)
    print(
        f"build: {g.n_nodes} articles, {g.n_edges} links "
        f"({g.self_loops} self-loops); kept {stats.kept_pairs} transition pairs"
    )
    if stats.parse_errors:
        print(f"build: skipped {len(stats.parse_errors)} malformed lines", file=sys.stderr)
    return 0


def _read_visual_file(path: str, g) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    """Per-edge x, y, region arrays from a src/trg/x_coord/y_coord/region file."""
    name_to_id = g.name_to_id() if g.labels else None
    rows: list[tuple[int, int, float, float, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split("\t")
                pos = {name: i for i, name in enumerate(header)}
                for col in ("src", "trg", "x_coord", "y_coord", "region"):
                    if col not in pos:
                        raise ClickgraphError(f"visual file missing column {col}")
                continue
            fields_ = line.split("\t")
            s_name, t_name = fields_[pos["src"]], fields_[pos["trg"]]
            if name_to_id is not None:
                s = name_to_id.get(s_name, -1)
                t = name_to_id.get(t_name, -1)
            else:
                s, t = int(s_name), int(t_name)
            rows.append((s, t, float(fields_[pos["x_coord"]]),
                         float(fields_[pos["y_coord"]]), fields_[pos["region"]]))

    x = np.zeros(g.n_edges)
    y = np.zeros(g.n_edges)
    region = np.asarray([None] * g.n_edges, dtype=object)
    covered = np.zeros(g.n_edges, dtype=bool)
    non_edge = 0
    if rows:
        src = np.asarray([r[0] for r in rows], dtype=np.int64)
        trg = np.asarray([r[1] for r in rows], dtype=np.int64)
        slots = np.where((src >= 0) & (trg >= 0), g.edge_slots(src, trg), -1)
        for row, slot in zip(rows, slots):
            if slot < 0:
                non_edge += 1
                continue
            x[slot], y[slot], region[slot] = row[2], row[3], row[4]
            covered[slot] = True
    return x, y, region, covered, non_edge


def cmd_features(cfg: RunConfig) -> int:
    g, log = _load_graph_and_log(cfg)
    manifest = _load_manifest(cfg.out)
    inputs = [os.path.join(cfg.out, ARTIFACTS["graph"]), os.path.join(cfg.out, ARTIFACTS["transitions"])]
    for p in (cfg.feature_file, cfg.corpus, cfg.categories, cfg.visual):
        if p:
            inputs.append(p)
    key = _stage_key(cfg, tuple(inputs))
    if _cache_hit(manifest, "features", key, cfg):
        print("features: cache hit, outputs unchanged")
        return 0

    report_lines: list[str] = []
    if cfg.feature_file:
        _validate_inputs(cfg, ("feature_file",))
        with open(cfg.feature_file, "r", encoding="utf-8") as fh:
            table, report = ingest.load_feature_table(
                fh, g, log, recompute_network=cfg.recompute_network_features
            )
        report_lines.append(f"rows_read={report.rows_read} rows_kept={report.rows_kept}\n")
        for line_no, s, t, reason in report.rejected:
            report_lines.append(f"rejected line {line_no} ({s} -> {t}): {reason}\n")
        for col, (mism, maxdiff) in sorted(report.consistency.items()):
            report_lines.append(
                f"consistency {col}: {mism} mismatches, max abs diff {maxdiff:.3e}\n"
            )
        notes = (f"source=feature_file rows={len(table)}",)
    else:
        _validate_inputs(cfg, ("corpus", "categories", "visual"))
        with open(cfg.corpus, "r", encoding="utf-8") as tok_fh, \
                open(cfg.categories, "r", encoding="utf-8") as cat_fh:
            corpus = semmod.corpus_from_lines(tok_fh, cat_fh)
        digest = semmod.corpus_digest(corpus)
        cache_prefix = os.path.join(cfg.out, "projection")
        proj = semmod.load_projection(cache_prefix, cfg.projection_dim, cfg.projection_seed, digest)
        if proj is None:
            vectors = semmod.tfidf(corpus)
            proj = semmod.project(vectors, corpus, dim=cfg.projection_dim, seed=cfg.projection_seed)
            semmod.save_projection(proj, cache_prefix, digest)
        text_sim, topic_sim, missing = semmod.edge_similarities(g, proj, corpus)
        x, y, region, covered, non_edge = _read_visual_file(cfg.visual, g)
        table = ingest.build_feature_table(
            g, log, text_sim, topic_sim, x, y, region, covered=covered, alpha=cfg.damping
        )
        report_lines.append(f"edges_without_corpus_article={missing}\n")
        report_lines.append(f"visual_rows_not_edges={non_edge}\n")
        report_lines.append(f"edges_without_visual_row={int((~covered).sum())}\n")
        notes = (
            f"source=computed projection_dim={cfg.projection_dim} damping={cfg.damping}",
            f"rows={len(table)}",
        )

    _atomic_write(
        os.path.join(cfg.out, ARTIFACTS["features"]),
        [*_header(cfg, "features", notes), *ingest.feature_table_lines(table)],
    )
    _atomic_write(
        os.path.join(cfg.out, ARTIFACTS["features_report"]),
        [*_header(cfg, "features"), *report_lines],
    )
    _record_stage(
        manifest, "features", key,
        [ARTIFACTS["features"], ARTIFACTS["features_report"]], cfg,
    )
    print(f"features: {len(table)} link records written")
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    g, log = _load_graph_and_log(cfg)
    fpath = _require_artifact(cfg, "features", "features")
    manifest = _load_manifest(cfg.out)
    key = _stage_key(cfg, (os.path.join(cfg.out, ARTIFACTS["graph"]),
                           os.path.join(cfg.out, ARTIFACTS["transitions"]), fpath))
    if _cache_hit(manifest, "sample", key, cfg):
        print("sample: cache hit, outputs unchanged")
        return 0
    table = _load_features(cfg, g, log)

    eligible = np.unique(log.src)  # sources with at least one outgoing transition
    if cfg.sample_size > len(eligible):
        raise ClickgraphError(
            f"sample size {cfg.sample_size} exceeds the {len(eligible)} eligible articles"
        )
    rng = np.random.default_rng(cfg.seed)
    chosen = rng.choice(eligible, size=cfg.sample_size, replace=False)
    in_sample = np.isin(table.src, chosen)
    sub = ingest.LinkFeatureTable(
        src=table.src[in_sample],
        trg=table.trg[in_sample],
        data={k: v[in_sample] for k, v in table.data.items()},
        labels=table.labels,
    )
    notes = (f"sample_size={cfg.sample_size} eligible={len(eligible)} rows={len(sub)}",)
    _atomic_write(
        os.path.join(cfg.out, ARTIFACTS["sample"]),
        [*_header(cfg, "sample", notes), *ingest.feature_table_lines(sub)],
    )
    _record_stage(manifest, "sample", key, [ARTIFACTS["sample"]], cfg)
    print(f"sample: {cfg.sample_size} articles, {len(sub)} link records")
    return 0


def cmd_attention(cfg: RunConfig) -> int:
    g, log = _load_graph_and_log(cfg)
    manifest = _load_manifest(cfg.out)
    key = _stage_key(cfg, (os.path.join(cfg.out, ARTIFACTS["graph"]),
                           os.path.join(cfg.out, ARTIFACTS["transitions"])))
    if _cache_hit(manifest, "attention", key, cfg):
        print("attention: cache hit, outputs unchanged")
        return 0

    hist, conc = attmod.transition_histogram(log)
    lines = _header(
        cfg, "attention",
        (f"total_transitions={conc.total_transitions} "
         f"half_mass_links={_fmt(conc.top_k)} half_mass_share={_fmt(conc.top_share)}",),
    )
    lines.append("count\tfrequency\n")
    lines.extend(f"{c}\t{f}\n" for c, f in sorted(hist.items()))
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["attention_transitions"]), lines)

    wiki, trans = attmod.outdegree_comparison(g, log)
    lines = _header(cfg, "attention", (f"restriction={wiki.restriction}",))
    lines.append("network\tout_degree\tfrequency\n")
    for dist in (wiki, trans):
        lines.extend(f"{dist.source}\t{d}\t{f}\n" for d, f in sorted(dist.histogram.items()))
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["attention_outdegree"]), lines)

    ginis, skipped = attmod.per_article_gini(g, log)
    edges_bins = np.linspace(0.0, 1.0, 21)
    freq, _ = np.histogram(ginis, bins=edges_bins)
    lines = _header(
        cfg, "attention",
        (f"articles={len(ginis)} excluded_all_zero={skipped}",),
    )
    lines.append("bin_lo\tbin_hi\tfrequency\n")
    lines.extend(
        f"{_fmt(edges_bins[i])}\t{_fmt(edges_bins[i + 1])}\t{freq[i]}\n" for i in range(20)
    )
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["attention_gini"]), lines)

    wiki_out = g.out_degrees()
    trans_out = np.bincount(log.src, minlength=g.n_nodes) if len(log) else np.zeros(g.n_nodes, dtype=np.int64)
    shared = trans_out > 0
    sections = (
        ("wiki_out_degrees", wiki_out[shared], cfg.xmin_degrees),
        ("trans_out_degrees", trans_out[shared], cfg.xmin_degrees),
        ("transition_counts", log.count, cfg.xmin_transitions),
    )
    lines = _header(
        cfg, "attention",
        ("model selection: AIC (2k - 2 lnL), smallest wins; "
         "xmin fixed per section, not searched",),
    )
    for name, samples, xmin in sections:
        lines.append(f"[{name}] xmin={xmin}\n")
        try:
            rep = attmod.fit_distributions(samples, xmin=xmin)
        except (InsufficientDataError, DegenerateInputError) as exc:
            lines.append(f"  unavailable: {exc}\n")
            continue
        lines.append(f"  winner: {rep.winner} (n_tail={rep.n_tail})\n")
        for fam in attmod.FAMILIES:
            fit = rep.fits[fam]
            if not fit.converged:
                lines.append(f"  {fam}: failed ({fit.message})\n")
                continue
            pars = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(fit.params.items()))
            lines.append(
                f"  {fam}: {pars} loglik={_fmt(fit.loglik)} aic={_fmt(fit.aic)} "
                f"delta_aic={_fmt(rep.delta_aic[fam])}\n"
            )
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["attention_fits"]), lines)

    _record_stage(
        manifest, "attention", key,
        [ARTIFACTS["attention_transitions"], ARTIFACTS["attention_outdegree"],
         ARTIFACTS["attention_gini"], ARTIFACTS["attention_fits"]], cfg,
    )
    print(f"attention: {len(ginis)} article Gini values, {skipped} excluded")
    return 0


def cmd_hurdle(cfg: RunConfig) -> int:
    g, log = _load_graph_and_log(cfg)
    fpath = _require_artifact(cfg, "features", "features")
    manifest = _load_manifest(cfg.out)
    key = _stage_key(cfg, (fpath,))
    if _cache_hit(manifest, "hurdle", key, cfg):
        print("hurdle: cache hit, outputs unchanged")
        return 0
    table = _load_features(cfg, g, log)

    rows = hurdlemod.feature_battery(table, threshold=cfg.threshold)
    lines = _header(
        cfg, "hurdle",
        (f"threshold={cfg.threshold} rows={len(table)}",
         "fixed-effects fits; one feature per model vs intercept-only, "
         "LRT chi-square p-values"),
    )
    lines.append(
        "feature\ttransformation\tbinomial_coef\tbinomial_lrt\tbinomial_p\tbinomial_error\t"
        "ztnb_coef\tztnb_lrt\tztnb_p\tztnb_error\n"
    )
    for r in rows:
        lines.append(
            "\t".join([
                r.feature, r.transformation,
                _fmt(r.binomial_coef), _fmt(r.binomial_lrt), _fmt(r.binomial_p),
                r.binomial_error or "-",
                _fmt(r.ztnb_coef), _fmt(r.ztnb_lrt), _fmt(r.ztnb_p),
                r.ztnb_error or "-",
            ]) + "\n"
        )
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["hurdle"]), lines)
    _record_stage(manifest, "hurdle", key, [ARTIFACTS["hurdle"]], cfg)
    fitted = sum(1 for r in rows if r.binomial_coef is not None or r.ztnb_coef is not None)
    print(f"hurdle: {fitted}/{len(rows)} features fitted")
    return 0


def _build_hypotheses(cfg: RunConfig, g, table) -> list:
    cores = graphmod.kcore(g)
    text = table.edge_values(g, "text_sim", fill=np.nan)
    regions = table.edge_values(g, "region", fill=None)
    singles = [
        evmod.kcore_hypothesis(g, cores),
        evmod.textsim_hypothesis(g, np.asarray(text, dtype=np.float64)),
        evmod.visual_hypothesis(g, regions),
    ]
    by_name = {h.name: h for h in singles}
    combos = [
        evmod.combine([by_name["kcore"], by_name["text_sim"]]),
        evmod.combine([by_name["kcore"], by_name["visual"]]),
        evmod.combine([by_name["text_sim"], by_name["visual"]]),
        evmod.combine([by_name["kcore"], by_name["text_sim"], by_name["visual"]]),
    ]
    return singles + combos


def cmd_hyptrails(cfg: RunConfig) -> int:
    g, log = _load_graph_and_log(cfg)
    fpath = _require_artifact(cfg, "features", "features")
    manifest = _load_manifest(cfg.out)
    key = _stage_key(cfg, (os.path.join(cfg.out, ARTIFACTS["graph"]),
                           os.path.join(cfg.out, ARTIFACTS["transitions"]), fpath))
    if _cache_hit(manifest, "hyptrails", key, cfg):
        print("hyptrails: cache hit, outputs unchanged")
        return 0
    table = _load_features(cfg, g, log)

    baseline = evmod.structural_hypothesis(g)
    hyps = _build_hypotheses(cfg, g, table)
    grid = evmod.default_kappa_grid(g, cfg.kappa_multipliers, log_spaced=cfg.log_spaced)
    curves = evmod.bayes_factor_curve(hyps, baseline, log, grid)
    base_curve = evmod.bayes_factor_curve([baseline], baseline, log, grid)[0]

    lines = _header(
        cfg, "hyptrails",
        (f"kappa_grid={','.join(_fmt(k) for k in grid)}",
         f"smoothing=structural matrix, weight {evmod.SMOOTHING_WEIGHT}",
         "bayes_factor in log units vs structural baseline"),
    )
    lines.append("hypothesis\tkappa\tlog_evidence\tlog_bayes_factor\tverdict\n")
    for curve in [base_curve] + curves:
        for i, k in enumerate(curve.kappas):
            lines.append(
                f"{curve.hypothesis}\t{_fmt(k)}\t{_fmt(curve.log_evidence[i])}\t"
                f"{_fmt(curve.log_bayes_factor[i])}\t{curve.verdicts[i]}\n"
            )
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["hyptrails"]), lines)
    _record_stage(manifest, "hyptrails", key, [ARTIFACTS["hyptrails"]], cfg)
    best = max(curves, key=lambda c: c.log_bayes_factor[-1])
    print(f"hyptrails: {len(curves)} hypotheses; best at largest kappa: {best.hypothesis}")
    return 0


def cmd_pagerank(cfg: RunConfig) -> int:
    g, log = _load_graph_and_log(cfg)
    fpath = _require_artifact(cfg, "features", "features")
    manifest = _load_manifest(cfg.out)
    key = _stage_key(cfg, (os.path.join(cfg.out, ARTIFACTS["graph"]),
                           os.path.join(cfg.out, ARTIFACTS["transitions"]), fpath))
    if _cache_hit(manifest, "pagerank", key, cfg):
        print("pagerank: cache hit, outputs unchanged")
        return 0
    table = _load_features(cfg, g, log)

    hyps = _build_hypotheses(cfg, g, table)
    evals = rankmod.evaluate_all(
        g, hyps, log, alphas=cfg.alphas,
        restrict_to_viewed=cfg.restrict_to_viewed, threads=cfg.threads,
    )
    lines = _header(
        cfg, "pagerank",
        (f"alphas={','.join(_fmt(a) for a in cfg.alphas)} "
         f"universe={'viewed articles' if cfg.restrict_to_viewed else 'all articles'}",
         "steiger_p is one-tailed for weighted rho > baseline rho"),
    )
    lines.append("hypothesis\talpha\trho\tp\tsteiger_z\tsteiger_p\timproved\n")
    for r in evals:
        lines.append(
            f"{r.hypothesis}\t{_fmt(r.alpha)}\t{_fmt(r.rho)}\t{_fmt(r.p)}\t"
            f"{_fmt(r.steiger_z)}\t{_fmt(r.steiger_p)}\t{_fmt(r.improved)}\n"
        )
    _atomic_write(os.path.join(cfg.out, ARTIFACTS["pagerank"]), lines)
    _record_stage(manifest, "pagerank", key, [ARTIFACTS["pagerank"]], cfg)
    best = max((r for r in evals if r.hypothesis != "baseline"), key=lambda r: r.rho)
    print(f"pagerank: best hypothesis {best.hypothesis} (rho={best.rho:.3f} at alpha={best.alpha})")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument("--threads", type=int, help="worker threads for grid evaluations")
    p.add_argument("--threshold", type=int, help="minimum transition count (default 10)")


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clickgraph",
        description="Link-success analytics over a link graph and click transitions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="parse edge list + clickstream into graph artifacts")
    _add_common(p)
    p.add_argument("--edges", help="tab-separated src/trg article-name pairs")
    p.add_argument("--clickstream", help="referrer/resource/count transition rows")
    p.add_argument("--fail-fast", action="store_true", dest="fail_fast", default=None,
                   help="abort on the first malformed clickstream line")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("features", help="assemble the per-link feature table")
    _add_common(p)
    p.add_argument("--feature-file", dest="feature_file",
                   help="precomputed feature table to validate and pass through")
    p.add_argument("--corpus", help="article token file (name TAB token...)")
    p.add_argument("--categories", help="article category file (name TAB category...)")
    p.add_argument("--visual", help="per-link visual file (src trg x_coord y_coord region)")
    p.add_argument("--projection-dim", dest="projection_dim", type=int)
    p.add_argument("--projection-seed", dest="projection_seed", type=int)
    p.add_argument("--damping", type=float, help="damping for the pagerank feature")
    p.add_argument("--recompute-network-features", dest="recompute_network_features",
                   action="store_true", default=None,
                   help="recompute network columns from the graph and report mismatches")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("sample", help="seeded article sample of the feature table")
    _add_common(p)
    p.add_argument("--sample-size", dest="sample_size", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("attention", help="concentration statistics and distribution fits")
    _add_common(p)
    p.add_argument("--xmin-degrees", dest="xmin_degrees", type=int)
    p.add_argument("--xmin-transitions", dest="xmin_transitions", type=int)
    p.set_defaults(func=cmd_attention)

    p = sub.add_parser("hurdle", help="two-stage regression battery over link features")
    _add_common(p)
    p.set_defaults(func=cmd_hurdle)

    p = sub.add_parser("hyptrails", help="Bayesian evidence curves for navigation hypotheses")
    _add_common(p)
    p.add_argument("--kappa-multipliers", dest="kappa_multipliers", type=_csv_floats,
                   help="comma-separated multiples of the mean out-degree")
    p.add_argument("--log-spaced", dest="log_spaced", action="store_true", default=None)
    p.set_defaults(func=cmd_hyptrails)

    p = sub.add_parser("pagerank", help="weighted pagerank evaluation against views")
    _add_common(p)
    p.add_argument("--alphas", type=_csv_floats, help="comma-separated damping factors")
    p.add_argument("--viewed-only", dest="restrict_to_viewed", action="store_true", default=None,
                   help="correlate only over articles with at least one view")
    p.set_defaults(func=cmd_pagerank)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(cfg)
    except ClickgraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
