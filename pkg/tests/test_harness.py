"""Experiment harness: splits, pipelines, sweeps, and CSV reports."""

import math

import numpy as np
import pytest

from ccdr.classify import KnnClassifier
from ccdr.dataset import (
    LabeledDataset,
    gen_circles,
    identity_remap,
    save_statlog,
)
from ccdr.embedding import embed_many
from ccdr.harness import (
    CSV_HEADER,
    ExperimentConfig,
    SweepReport,
    SweepRow,
    confidence_interval,
    emit_report,
    fit_pipeline,
    load_split,
    run_sweep,
)


@pytest.fixture()
def circle_files(tmp_path):
    trn = tmp_path / "c.trn"
    tst = tmp_path / "c.tst"
    save_statlog(gen_circles(40, [1.0, 2.0], 0.02, seed=1), trn)
    save_statlog(gen_circles(10, [1.0, 2.0], 0.02, seed=2), tst)
    return str(trn), str(tst)


def test_confidence_interval_frozen_values():
    lo, hi = confidence_interval(50, 100, 0.8)
    # half width 1.2816 * sqrt(0.25 / 100) = 0.064080
    assert abs(lo - 0.43592) < 1e-12
    assert abs(hi - 0.56408) < 1e-12
    assert confidence_interval(0, 50) == (0.0, 0.0)
    assert confidence_interval(50, 50) == (1.0, 1.0)


def test_confidence_interval_level_and_clamping():
    p = 0.3
    lo, hi = confidence_interval(30, 100, 1e-12)
    assert abs(lo - p) < 1e-9 and abs(hi - p) < 1e-9
    # wide level clamps into [0, 1]
    lo, hi = confidence_interval(99, 100, 0.9999)
    assert hi == 1.0 and lo > 0.9
    lo95, hi95 = confidence_interval(20, 100, 0.95)
    z = 1.959963984540054
    half = z * math.sqrt(0.2 * 0.8 / 100)
    assert abs(lo95 - (0.2 - half)) < 1e-12
    assert abs(hi95 - (0.2 + half)) < 1e-12


def test_confidence_interval_validation():
    with pytest.raises(ValueError, match="n_test must be at least 1"):
        confidence_interval(0, 0)
    with pytest.raises(ValueError, match=r"errors must lie in \{0, .., n_test\}"):
        confidence_interval(11, 10)
    with pytest.raises(ValueError, match=r"level must lie in \[0, 1\)"):
        confidence_interval(1, 10, 1.0)


def test_load_split_synthetic_determinism():
    cfg = ExperimentConfig(synth={"n_per_class": 15, "radii": [1.0, 2.0], "noise_sd": 0.05}, seed=3)
    tr1, te1 = load_split(cfg)
    tr2, te2 = load_split(cfg)
    assert np.array_equal(tr1.points, tr2.points)
    assert np.array_equal(te1.points, te2.points)
    # the test split comes from an independent stream
    assert not np.array_equal(tr1.points, te1.points)
    assert np.array_equal(tr1.labels, te1.labels)


def test_load_split_standardize_uses_train_stats_only(circle_files):
    trn, tst = circle_files
    cfg = ExperimentConfig(train_path=trn, test_path=tst, remap=identity_remap(2), standardize=True)
    train, test = load_split(cfg)
    assert np.abs(train.points.mean(axis=0)).max() < 1e-12
    assert np.abs(train.points.std(axis=0) - 1.0).max() < 1e-12
    # the test split is mapped with the training statistics, so it need
    # not be centered itself
    assert np.all(np.isfinite(test.points))


def test_load_split_needs_a_source():
    with pytest.raises(ValueError, match="config needs train_path and test_path, or synth"):
        load_split(ExperimentConfig())


def test_fit_pipeline_each_kind():
    train = gen_circles(30, [1.0, 2.0], 0.02, seed=4)
    q = train.points[:5]
    raw = fit_pipeline("raw", train, 2)
    assert np.array_equal(raw.train_embedding, train.points)
    assert np.array_equal(raw.transform(q), q)
    pca = fit_pipeline("pca", train, 1)
    assert pca.train_embedding.shape == (60, 1)
    assert np.array_equal(pca.transform(q), pca.train_embedding[:5])
    lda = fit_pipeline("lda", train, 1)
    assert lda.train_embedding.shape == (60, 1)
    lap = fit_pipeline("lapeig", train, 2, graph_k=4)
    assert lap.train_embedding.shape == (60, 2)
    assert np.all(np.isfinite(lap.transform(q)))
    ccdr = fit_pipeline("ccdr", train, 2, graph_k=4, beta=0.05)
    assert np.array_equal(ccdr.train_embedding, ccdr.detail.embedding)
    assert np.array_equal(ccdr.transform(q), embed_many(ccdr.detail, q, 0))
    with pytest.raises(ValueError, match="unknown pipeline 'foo'"):
        fit_pipeline("foo", train, 2)


def test_fit_pipeline_lda_ignores_unlabeled_points():
    pts = np.array([
        [0.0, 0.0], [1.0, 0.2], [0.4, 1.0],
        [5.0, 0.0], [6.0, 0.3], [5.5, 1.0],
        [50.0, 50.0],
    ])
    labels = np.array([1, 1, 1, 2, 2, 2, 0])
    ds = LabeledDataset(pts, labels, 2)
    with_unlabeled = fit_pipeline("lda", ds, 1)
    ds_cut = LabeledDataset(pts[:6], labels[:6], 2)
    without = fit_pipeline("lda", ds_cut, 1)
    assert np.array_equal(with_unlabeled.detail.A, without.detail.A)


def test_fit_pipeline_refit_transform_is_deterministic():
    train = gen_circles(20, [1.0, 2.0], 0.02, seed=5)
    pf = fit_pipeline("ccdr", train, 2, graph_k=4, beta=0.05, oos_refit=True)
    q = np.array([[0.5, 0.5], [-1.2, 0.3]])
    a = pf.transform(q)
    b = pf.transform(q)
    assert np.array_equal(a, b)
    assert a.shape == (2, 2) and np.all(np.isfinite(a))


def test_run_sweep_rows_and_collapsed_axes(circle_files):
    trn, tst = circle_files
    cfg = ExperimentConfig(
        train_path=trn, test_path=tst, remap=identity_remap(2),
        pipelines=("ccdr", "raw"), classifiers=("knn", "linear"),
        betas=(0.05, 0.5), ms=(2,), graph_ks=(4,), clf_ks=(1, 3),
        measure_wall=False,
    )
    report = run_sweep(cfg)
    # ccdr/knn: 2 betas x 2 clf_k; ccdr/linear: 2 betas; raw/knn: 2 clf_k;
    # raw/linear: 1
    assert len(report.rows) == 9
    keys = [(r.pipeline, r.classifier, r.beta, r.m, r.graph_k, r.clf_k) for r in report.rows]
    assert keys == sorted(keys)
    for r in report.rows:
        if r.pipeline == "raw":
            assert r.beta == 0.0 and r.m == 2 and r.graph_k == 0
        if r.classifier == "linear":
            assert r.clf_k == 0
        assert 0.0 <= r.error <= 1.0
        assert r.ci_low <= r.error <= r.ci_high
        assert r.wall_ms == 0.0 and r.note == ""


def test_run_sweep_byte_identical_without_wall(circle_files, tmp_path):
    trn, tst = circle_files
    cfg = ExperimentConfig(
        train_path=trn, test_path=tst, remap=identity_remap(2),
        pipelines=("ccdr", "raw"), classifiers=("knn", "linear"),
        betas=(0.05, 0.5), ms=(2,), graph_ks=(4,), clf_ks=(1, 3),
        measure_wall=False,
    )
    p1 = tmp_path / "r1.csv"
    p2 = tmp_path / "r2.csv"
    emit_report(run_sweep(cfg), p1)
    emit_report(run_sweep(cfg), p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == CSV_HEADER


def test_run_sweep_error_rows_keep_note_and_continue(circle_files):
    trn, tst = circle_files
    cfg = ExperimentConfig(
        train_path=trn, test_path=tst, remap=identity_remap(2),
        pipelines=("ccdr",), classifiers=("knn",), betas=(0.5,), ms=(2,),
        graph_ks=(4, 500), clf_ks=(1,), measure_wall=False,
    )
    rows = run_sweep(cfg).rows
    assert len(rows) == 2
    ok = [r for r in rows if r.graph_k == 4][0]
    bad = [r for r in rows if r.graph_k == 500][0]
    assert ok.note == "" and np.isfinite(ok.error)
    assert math.isnan(bad.error) and math.isnan(bad.ci_low)
    assert "k must satisfy" in bad.note


def test_run_sweep_rows_are_independent(circle_files):
    trn, tst = circle_files
    base = dict(
        train_path=trn, test_path=tst, remap=identity_remap(2),
        pipelines=("ccdr", "raw"), classifiers=("knn", "linear"),
        ms=(2,), graph_ks=(4,), clf_ks=(1, 3), measure_wall=False,
    )
    full = run_sweep(ExperimentConfig(betas=(0.05, 0.5), **base)).rows
    small = run_sweep(ExperimentConfig(betas=(0.05,), **base)).rows
    sub = [r for r in full if r.beta in (0.05, 0.0)]
    assert len(sub) == len(small)
    for a, b in zip(sub, small):
        assert (a.pipeline, a.classifier, a.beta, a.m, a.graph_k, a.clf_k) == (
            b.pipeline, b.classifier, b.beta, b.m, b.graph_k, b.clf_k)
        assert a.error == b.error and a.ci_low == b.ci_low and a.ci_high == b.ci_high


def test_run_sweep_never_reads_test_statistics(circle_files, tmp_path):
    # scaling the test file by 100 must not change anything fitted: with
    # standardize on, the statistics come from the training split alone
    trn, tst = circle_files
    big = gen_circles(10, [1.0, 2.0], 0.02, seed=2)
    tst2 = tmp_path / "big.tst"
    save_statlog(LabeledDataset(big.points * 100.0, big.labels, 2), tst2)
    kw = dict(remap=identity_remap(2), pipelines=("ccdr",), classifiers=("linear",),
              betas=(0.5,), ms=(2,), graph_ks=(4,), clf_ks=(1,),
              standardize=True, measure_wall=False)
    trA, _ = load_split(ExperimentConfig(train_path=trn, test_path=tst, **kw))
    trB, _ = load_split(ExperimentConfig(train_path=trn, test_path=str(tst2), **kw))
    assert np.array_equal(trA.points, trB.points)
    pfA = fit_pipeline("ccdr", trA, 2, graph_k=4, beta=0.5)
    pfB = fit_pipeline("ccdr", trB, 2, graph_k=4, beta=0.5)
    assert np.array_equal(pfA.train_embedding, pfB.train_embedding)
    assert pfA.detail.eps == pfB.detail.eps


def test_run_sweep_with_refit_extension(circle_files):
    trn, tst = circle_files
    cfg = ExperimentConfig(
        train_path=trn, test_path=tst, remap=identity_remap(2),
        pipelines=("ccdr",), classifiers=("knn",), betas=(0.5,), ms=(2,),
        graph_ks=(4,), clf_ks=(1,), oos_refit=True, measure_wall=False,
    )
    rows = run_sweep(cfg).rows
    assert len(rows) == 1
    assert rows[0].note == "" and 0.0 <= rows[0].error <= 1.0


def test_run_sweep_validation(circle_files):
    trn, tst = circle_files
    base = dict(train_path=trn, test_path=tst, remap=identity_remap(2))
    with pytest.raises(ValueError, match="unknown pipeline 'mds'"):
        run_sweep(ExperimentConfig(pipelines=("mds",), **base))
    with pytest.raises(ValueError, match="unknown classifier 'svm'"):
        run_sweep(ExperimentConfig(classifiers=("svm",), **base))
    with pytest.raises(ValueError, match="all grids must be non-empty"):
        run_sweep(ExperimentConfig(betas=(), **base))


def test_run_sweep_rejects_bad_test_sets(circle_files, tmp_path):
    trn, _ = circle_files
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    t0 = tmp_path / "unlabeled.tst"
    save_statlog(LabeledDataset(pts, np.array([0, 2, 1, 1]), 2), t0)
    with pytest.raises(ValueError, match="test set must be fully labeled"):
        run_sweep(ExperimentConfig(train_path=trn, test_path=str(t0),
                                   remap=identity_remap(2), pipelines=("raw",)))
    t3 = tmp_path / "unseen.tst"
    save_statlog(LabeledDataset(pts, np.array([1, 2, 3, 3]), 3), t3)
    with pytest.raises(ValueError, match="test set has labels unseen in training"):
        run_sweep(ExperimentConfig(train_path=trn, test_path=str(t3),
                                   remap=identity_remap(3), pipelines=("raw",)))


def test_wall_clock_measurement(circle_files):
    trn, tst = circle_files
    base = dict(
        train_path=trn, test_path=tst, remap=identity_remap(2),
        pipelines=("ccdr",), classifiers=("knn",), betas=(0.5,), ms=(2,),
        graph_ks=(4,), clf_ks=(1,),
    )
    timed = run_sweep(ExperimentConfig(measure_wall=True, **base)).rows[0]
    frozen = run_sweep(ExperimentConfig(measure_wall=False, **base)).rows[0]
    assert timed.wall_ms > 0.0
    assert frozen.wall_ms == 0.0
    assert timed.error == frozen.error


def test_emit_report_empty_and_full_precision(tmp_path):
    empty = SweepReport(config=None, rows=())
    p = tmp_path / "empty.csv"
    emit_report(empty, p)
    assert p.read_text() == CSV_HEADER + "\n"
    row = SweepRow("ccdr", "knn", 0.5, 14, 4, 3, 0.08100000000000001, 0.07, 0.09, 12.5)
    one = SweepReport(config=None, rows=(row,))
    p2 = tmp_path / "one.csv"
    emit_report(one, p2)
    lines = p2.read_text().splitlines()
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "ccdr" and fields[1] == "knn"
    assert fields[3] == "14" and fields[4] == "4" and fields[5] == "3"
    # float fields survive a text round trip exactly
    assert float(fields[6]) == 0.08100000000000001
    assert float(fields[2]) == 0.5
