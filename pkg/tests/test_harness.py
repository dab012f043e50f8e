import numpy as np
import pytest

from convexkpca import harness
from convexkpca.datasets import load_dataset, mask_labels
from convexkpca.harness import (
    ExperimentConfig,
    ExperimentReport,
    SummaryRow,
    gamma_sweep,
    rank_and_format,
    rank_block,
    run_experiment,
    write_report,
    write_sweep,
)


def small_cfg(**kw):
    base = dict(datasets=("iris",), fractions=(0.05,), repetitions=2, grid_size=5)
    base.update(kw)
    return ExperimentConfig(**base)


def summary(model, mean, std, policy="best"):
    return SummaryRow("d", 5, model, policy, mean, std, 1, (1.0,))


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(repetitions=0)
    with pytest.raises(ValueError):
        ExperimentConfig(fractions=(0.0,))
    with pytest.raises(ValueError):
        ExperimentConfig(models=("svm",))
    with pytest.raises(ValueError):
        ExperimentConfig(gamma_policies=("median",))


def test_parse_model():
    assert harness.parse_model("semikpca-k3") == ("semikpca", 3)
    assert harness.parse_model("subs-lssvm") == ("subs-lssvm", None)
    with pytest.raises(ValueError):
        harness.parse_model("semikpca")


def test_report_shape():
    rep = run_experiment(small_cfg())
    assert not rep.errors
    assert len(rep.summary) == 4 * 2
    assert len(rep.rows) == 4 * 2 * 2
    for s in rep.summary:
        assert s.labels == 8 and s.repetitions == 2
        assert 0 <= s.mean <= 100
    assert {r.seed for r in rep.rows} == {0, 1}


def test_deterministic_rerun():
    a = run_experiment(small_cfg(repetitions=1))
    b = run_experiment(small_cfg(repetitions=1))
    assert a.rows == b.rows and a.summary == b.summary


def test_model_order_independent():
    a = run_experiment(small_cfg())
    b = run_experiment(small_cfg(models=tuple(reversed(harness.DEFAULT_MODELS))))
    assert a.rows == b.rows and a.summary == b.summary


def test_threads_do_not_change_results():
    cfg = dict(datasets=("iris", "heart"), repetitions=1)
    assert run_experiment(small_cfg(threads=1, **cfg)).rows == run_experiment(small_cfg(threads=2, **cfg)).rows


def test_best_policy_dominates_grid_and_matches_recompute():
    cfg = small_cfg(models=("semikpca-k1",), gamma_policies=("best",))
    rep = run_experiment(cfg)
    prep = harness.prepare(load_dataset("iris"), cfg)
    masks = [mask_labels(prep.dataset, 0.05, r) for r in range(2)]
    grid = harness.model_grid(prep, "semikpca-k1", 5)
    accs = harness.accuracy_grid(prep, "semikpca-k1", masks, grid)
    for r, row in enumerate(rep.rows):
        assert row.accuracy == accs[:, r].max()
        assert row.gamma == grid[int(np.argmax(accs[:, r]))]


def test_accuracy_denominator_and_pairing():
    cfg = small_cfg()
    prep = harness.prepare(load_dataset("iris"), cfg)
    masks = [mask_labels(prep.dataset, 0.05, r) for r in range(2)]
    # accuracies are multiples of 100/(N - labels)
    step = 100.0 / (150 - 8)
    for model in harness.DEFAULT_MODELS:
        acc = harness.accuracy_grid(prep, model, masks, [harness.model_fixed_gamma(prep, model)])
        np.testing.assert_allclose(acc / step, np.round(acc / step), atol=1e-9)
    # every model in the report used these same masks: recompute one fixed cell
    rep = run_experiment(small_cfg(models=("semi-lssvm",), gamma_policies=("fixed",)))
    expect = harness.accuracy_grid(prep, "semi-lssvm", masks, [harness.model_fixed_gamma(prep, "semi-lssvm")])[0]
    np.testing.assert_array_equal([r.accuracy for r in rep.rows], expect)


def test_semikpca_grid_inside_convex_range():
    cfg = small_cfg()
    prep = harness.prepare(load_dataset("iris"), cfg)
    for k in (0, 1):
        g = harness.model_grid(prep, f"semikpca-k{k}", 40)
        assert g.max() < 1.0 / prep.full.values[k]


def test_fixed_gammas():
    cfg = small_cfg()
    prep = harness.prepare(load_dataset("iris"), cfg)
    assert harness.model_fixed_gamma(prep, "semi-lssvm") == pytest.approx(10 * 4 / 150)
    assert harness.model_fixed_gamma(prep, "subs-lssvm") == pytest.approx(100 * 4 / 150)


def test_cell_errors_recorded():
    rep = run_experiment(small_cfg(fractions=(0.001, 0.05), repetitions=1))
    assert len(rep.errors) == 1 and "FractionOutOfRange" in rep.errors[0].error
    assert len([s for s in rep.summary if not s.error]) == 8


def test_rank_block_example():
    ranks = rank_block([summary("a", 72.2, 6.0), summary("b", 83.0, 0.7), summary("c", 71.3, 2.0)])
    assert ranks == {"b": 1, "a": 2, "c": 3}


def test_rank_ties():
    ranks = rank_block([summary("semi-lssvm", 80.0, 1.0), summary("subs-lssvm", 80.0, 1.0), summary("semikpca-k1", 80.0, 1.0)])
    assert ranks == {"semi-lssvm": 1, "semikpca-k1": 2, "subs-lssvm": 3}
    ranks = rank_block([summary("a", 80.0, 2.0), summary("b", 80.0, 1.0)])
    assert ranks == {"b": 1, "a": 2}


def test_rank_single_model():
    rep = ExperimentReport(summary=[summary("semikpca-k1", 90.0, 1.0), summary("semikpca-k1", 70.0, 1.0, "fixed")])
    text = rank_and_format(rep)
    assert text.count("(1)") == 2
    assert "90.0±1.0 (1)" in text


def test_format_one_decimal():
    rep = ExperimentReport(
        summary=[summary("semikpca-k1", 83.04, 0.66), summary("semi-lssvm", 72.2, 6.0), summary("subs-lssvm", 71.3, 2.0)]
    )
    text = rank_and_format(rep)
    assert "83.0±0.7 (1)" in text and "72.2±6.0 (2)" in text and "71.3±2.0 (3)" in text


def test_write_report(tmp_path):
    rep = run_experiment(small_cfg(repetitions=1))
    paths = write_report(rep, tmp_path)
    assert [p.name for p in paths] == ["results.csv", "summary.csv", "table.txt"]
    lines = (tmp_path / "results.csv").read_text().splitlines()
    assert lines[0] == "dataset,labels,model,policy,seed,gamma,accuracy"
    assert len(lines) == 1 + len(rep.rows)
    first = lines[1].split(",")
    assert float(first[5]) == rep.rows[0].gamma  # full precision round trip


def test_sweep_curves():
    curves = gamma_sweep("iris", 0.05, grid_size=6, repetitions=2)
    assert [c.model for c in curves] == list(harness.DEFAULT_MODELS)
    for c in curves:
        assert c.gammas.size == c.mean_acc.size == c.std_acc.size == 6
        assert np.all(np.diff(c.gammas) > 0)
        assert c.best_gamma in c.gammas
        assert c.baseline_acc == pytest.approx(100 * 100 / 150)
    k1 = curves[1]
    assert k1.gammas.max() < k1.inv_lambda2


def test_sweep_single_point(tmp_path):
    curves = gamma_sweep("iris", 0.05, grid_size=1, repetitions=1)
    paths = write_sweep(curves, tmp_path)
    assert len(paths) == 5
    for p in paths[:4]:
        assert len(p.read_text().splitlines()) == 2
    markers = paths[4].read_text().splitlines()
    assert markers[0] == "model,best_gamma,heuristic_gamma,inv_lambda1,inv_lambda2,baseline_acc"
