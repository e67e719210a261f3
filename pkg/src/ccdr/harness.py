"""Grid sweeps over embedding pipelines and classifiers, with CSV reports.

A sweep crosses pipelines {raw, pca, ccdr, lda, lapeig} with classifiers
{knn, linear} over grids of beta, target dimension m, graph degree k, and
classifier k. Per-pipeline irrelevant axes collapse to a single placeholder
so the report carries one row for each distinct experiment. Everything is
fitted on the training split only; test points reach an embedding through
the out-of-sample path (label 0 for CCDR), so no test information can leak
into any fitted parameter.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from . import classify as _classify
from .dataset import (
    LabeledDataset,
    apply_standardize,
    column_stats,
    gen_circles,
    load_statlog,
)
from .embedding import embed_many, fit as ccdr_fit, refit_embed
from .graph import heat_weights, kernel_rows, knn_graph, median_eps
from .baselines import lda_fit, pca_fit
from .spectral import generalized_eig

PIPELINES = ("raw", "pca", "ccdr", "lda", "lapeig")
CLASSIFIERS = ("knn", "linear")

CSV_HEADER = "pipeline,classifier,beta,m,graph_k,clf_k,error,ci_low,ci_high,wall_ms"

# Two-sided normal quantile for the default 80% confidence level.
Z80 = 1.2816


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs and grids for one sweep.

    Exactly one data source applies: statlog paths (train_path, test_path)
    or a synthetic spec (synth = dict with n_per_class, radii, noise_sd);
    synthetic test data uses seed + 1. remap=None means the satimage label
    table. eps=None selects the median heuristic scaled by eps_scale.
    """

    train_path: str | None = None
    test_path: str | None = None
    synth: dict | None = None
    remap: dict | None = None
    pipelines: tuple = ("ccdr",)
    classifiers: tuple = ("knn",)
    betas: tuple = (0.5,)
    ms: tuple = (2,)
    graph_ks: tuple = (4,)
    clf_ks: tuple = (1,)
    eps: float | None = None
    eps_scale: float = 1.0
    standardize: bool = False
    seed: int = 0
    ci_level: float = 0.8
    oos_full_kernel: bool = False
    oos_refit: bool = False
    measure_wall: bool = True


@dataclass(frozen=True)
class SweepRow:
    """One grid point's result; note holds the failure text for error rows."""

    pipeline: str
    classifier: str
    beta: float
    m: int
    graph_k: int
    clf_k: int
    error: float
    ci_low: float
    ci_high: float
    wall_ms: float
    note: str = ""


@dataclass(frozen=True)
class SweepReport:
    config: ExperimentConfig
    rows: tuple


@dataclass(frozen=True)
class PipelineFit:
    """A fitted embedding: training coordinates plus a transform for new points."""

    name: str
    train_embedding: np.ndarray
    transform: Callable
    detail: object = None


def confidence_interval(errors: int, n_test: int, level: float = 0.8):
    """Normal-approximation binomial interval for an error rate.

    Returns (low, high) clamped to [0, 1]; errors = 0 or errors = n_test
    collapse the interval onto the point estimate.
    """
    if n_test < 1:
        raise ValueError("n_test must be at least 1")
    if not 0 <= errors <= n_test:
        raise ValueError("errors must lie in {0, .., n_test}")
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    z = Z80 if level == 0.8 else float(norm.ppf((1.0 + level) / 2.0))
    p = errors / n_test
    half = z * np.sqrt(p * (1.0 - p) / n_test)
    return (float(max(0.0, p - half)), float(min(1.0, p + half)))


def load_split(cfg: ExperimentConfig):
    """Materialize (train, test) datasets from the config's data source."""
    if cfg.synth is not None:
        spec = dict(cfg.synth)
        train = gen_circles(seed=cfg.seed, **spec)
        test = gen_circles(seed=cfg.seed + 1, **spec)
    elif cfg.train_path and cfg.test_path:
        train = load_statlog(cfg.train_path, remap=cfg.remap)
        test = load_statlog(cfg.test_path, remap=cfg.remap)
    else:
        raise ValueError("config needs train_path and test_path, or synth")
    if cfg.standardize:
        mean, sd = column_stats(train)
        train = apply_standardize(train, mean, sd)
        test = apply_standardize(test, mean, sd)
    return train, test


def fit_pipeline(
    pipeline: str,
    train: LabeledDataset,
    m: int,
    graph_k: int = 4,
    beta: float = 1.0,
    eps: float | None = None,
    eps_scale: float = 1.0,
    oos_full_kernel: bool = False,
    oos_refit: bool = False,
) -> PipelineFit:
    """Fit one embedding pipeline on the training split only.

    The returned transform embeds arbitrary query points without touching
    any fitted parameter; for CCDR queries enter unlabeled (c = 0).
    """
    if pipeline == "raw":
        return PipelineFit("raw", train.points, lambda X: np.asarray(X, dtype=np.float64))
    if pipeline == "pca":
        emb = pca_fit(train.points, m)
        return PipelineFit("pca", emb.transform(train.points), emb.transform, emb)
    if pipeline == "lda":
        mask = train.labels > 0
        emb = lda_fit(train.points[mask], train.labels[mask], m)
        return PipelineFit("lda", emb.transform(train.points), emb.transform, emb)
    if pipeline == "lapeig":
        graph = knn_graph(train.points, graph_k)
        width = median_eps(graph, train.points) * eps_scale if eps is None else eps
        W = heat_weights(graph, train.points, width)
        if not 1 <= m <= train.n - 1:
            raise ValueError("m must satisfy 1 <= m <= n - 1 = %d" % (train.n - 1))
        sol = generalized_eig(
            np.diag(W.degrees()) - W.matrix.toarray(), W.degrees(), m,
            exclude_ones=True,
        )
        lam = sol.values
        if lam.max(initial=0.0) >= 1.0 - 1e-9:
            raise ValueError("retained eigenvalue reaches 1; decrease m")
        coords = sol.vectors.copy()
        pts = train.points.copy()

        def _extend(X, coords=coords, lam=lam, pts=pts, k=graph_k, width=width):
            K = kernel_rows(np.asarray(X, dtype=np.float64), pts, k, width)
            mass = K.sum(axis=1)
            bad = np.nonzero(mass <= 0.0)[0]
            if bad.size:
                raise ValueError(
                    "query %d outside model support: zero kernel mass" % int(bad[0])
                )
            return (K @ coords) / ((1.0 - lam)[None, :] * mass[:, None])

        return PipelineFit("lapeig", coords, _extend, (lam, width))
    if pipeline == "ccdr":
        model = ccdr_fit(train, k=graph_k, eps=eps, beta=beta, m=m, eps_scale=eps_scale)
        if oos_refit:
            def _transform(X, model=model):
                X = np.atleast_2d(np.asarray(X, dtype=np.float64))
                return np.vstack([refit_embed(model, x) for x in X])
        else:
            def _transform(X, model=model, full=oos_full_kernel):
                return embed_many(model, X, 0, full_kernel=full)
        return PipelineFit("ccdr", model.embedding, _transform, model)
    raise ValueError("unknown pipeline %r" % pipeline)


def _axis(values, relevant: bool, placeholder):
    return tuple(values) if relevant else (placeholder,)


def run_sweep(cfg: ExperimentConfig) -> SweepReport:
    """Run the full grid and return rows sorted by their grid coordinates.

    A grid point that violates a precondition becomes a row with nan
    metrics and the exception text in `note`; the sweep continues. Each
    embedding is computed independently per parameter key, so removing one
    grid point never changes another row. With measure_wall off, wall_ms is
    0 and a rerun with the same config and seed emits a byte-identical CSV.
    """
    for p in cfg.pipelines:
        if p not in PIPELINES:
            raise ValueError("unknown pipeline %r" % p)
    for c in cfg.classifiers:
        if c not in CLASSIFIERS:
            raise ValueError("unknown classifier %r" % c)
    if not (cfg.pipelines and cfg.classifiers and cfg.betas and cfg.ms
            and cfg.graph_ks and cfg.clf_ks):
        raise ValueError("all grids must be non-empty")
    train, test = load_split(cfg)
    if np.any(test.labels == 0):
        raise ValueError("test set must be fully labeled")
    if test.num_classes > train.num_classes:
        raise ValueError("test set has labels unseen in training")
    clock = time.perf_counter if cfg.measure_wall else (lambda: 0.0)

    emb_cache: dict = {}
    nbr_cache: dict = {}
    lin_cache: dict = {}
    k_max = max(cfg.clf_ks) if "knn" in cfg.classifiers else 1

    def embedded(pipeline, beta, m, graph_k):
        key = (pipeline, beta, m, graph_k)
        if key not in emb_cache:
            t0 = clock()
            try:
                pf = fit_pipeline(
                    pipeline, train, m=m, graph_k=graph_k, beta=beta,
                    eps=cfg.eps, eps_scale=cfg.eps_scale,
                    oos_full_kernel=cfg.oos_full_kernel, oos_refit=cfg.oos_refit,
                )
                test_emb = pf.transform(test.points)
                emb_cache[key] = (pf, test_emb, (clock() - t0) * 1e3)
            except (ValueError, np.linalg.LinAlgError) as exc:
                emb_cache[key] = (exc, None, (clock() - t0) * 1e3)
        return emb_cache[key]

    rows = []
    labeled = train.labels > 0
    for pipeline in cfg.pipelines:
        uses_graph = pipeline in ("ccdr", "lapeig")
        uses_m = pipeline != "raw"
        uses_beta = pipeline == "ccdr"
        for classifier in cfg.classifiers:
            for beta in _axis(cfg.betas, uses_beta, 0.0):
                for m in _axis(cfg.ms, uses_m, train.d):
                    for graph_k in _axis(cfg.graph_ks, uses_graph, 0):
                        for clf_k in _axis(cfg.clf_ks, classifier == "knn", 0):
                            rows.append(
                                _one_row(
                                    cfg, train, test, labeled, embedded,
                                    nbr_cache, lin_cache, k_max, clock,
                                    pipeline, classifier, beta, m, graph_k, clf_k,
                                )
                            )
    rows.sort(key=lambda r: (r.pipeline, r.classifier, r.beta, r.m, r.graph_k, r.clf_k))
    return SweepReport(config=cfg, rows=tuple(rows))


def _one_row(
    cfg, train, test, labeled, embedded, nbr_cache, lin_cache, k_max, clock,
    pipeline, classifier, beta, m, graph_k, clf_k,
):
    key = (pipeline, beta, m, graph_k)
    fit_res, test_emb, fit_ms = embedded(pipeline, beta, m, graph_k)
    if isinstance(fit_res, Exception):
        return SweepRow(
            pipeline, classifier, beta, m, graph_k, clf_k,
            float("nan"), float("nan"), float("nan"), fit_ms, note=str(fit_res),
        )
    t0 = clock()
    try:
        train_emb = fit_res.train_embedding[labeled]
        train_labs = train.labels[labeled]
        if classifier == "knn":
            if key not in nbr_cache:
                nbr_cache[key] = _classify.sorted_neighbor_labels(
                    train_emb, train_labs, test_emb, min(k_max, train_labs.size)
                )
            nbr = nbr_cache[key]
            if clf_k > nbr.shape[1]:
                raise ValueError("clf_k = %d exceeds labeled size" % clf_k)
            pred = _classify.vote(nbr, clf_k, train.num_classes)
        else:
            if key not in lin_cache:
                lin_cache[key] = _classify.linear_fit(
                    train_emb, train_labs, train.num_classes
                )
            pred = lin_cache[key].predict(test_emb)
        err_count = int(np.sum(pred != test.labels))
        err = err_count / test.n
        lo, hi = confidence_interval(err_count, test.n, cfg.ci_level)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return SweepRow(
            pipeline, classifier, beta, m, graph_k, clf_k,
            float("nan"), float("nan"), float("nan"),
            fit_ms + (clock() - t0) * 1e3, note=str(exc),
        )
    wall = fit_ms + (clock() - t0) * 1e3
    return SweepRow(
        pipeline, classifier, beta, m, graph_k, clf_k,
        err, lo, hi, wall,
    )


def _csv_num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_report(report: SweepReport, path) -> None:
    """Write the report as CSV; float fields round-trip at full precision."""
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(
            ",".join(
                [
                    r.pipeline,
                    r.classifier,
                    _csv_num(r.beta),
                    _csv_num(r.m),
                    _csv_num(r.graph_k),
                    _csv_num(r.clf_k),
                    _csv_num(r.error),
                    _csv_num(r.ci_low),
                    _csv_num(r.ci_high),
                    _csv_num(r.wall_ms),
                ]
            )
        )
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
