import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carrylab.addition import BaseNumber, add
from carrylab.carry import enumerate_carry_tables, one_carry, table_by_id
from carrylab.errors import ConfigError
from carrylab.experiments import (
    EvalRow,
    GeneralizationRow,
    RunRecord,
    Semantic,
    Symbolic,
    TrainConfig,
    aggregate_analysis,
    all_pairs,
    build_dataset,
    build_sequence,
    config_seed,
    embed_digit,
    embedding_matrix,
    eval_pairs,
    evaluate,
    fit_sigmoid,
    gaussian_kernel,
    semantic_scheme,
    sigmoid_model,
    spearman,
    train_run,
)
from carrylab.measures import measure_report
from carrylab.modnum import ordering_from_unit, units
from carrylab.rnn import init_params


# ----------------------------------------------------------------- embeddings

def test_symbolic_one_hot_anchor():
    assert np.array_equal(embed_digit(Symbolic(), 5, 1), [0, 1, 0, 0, 0])


def test_semantic_natural_ordering_anchor():
    vec = embed_digit(semantic_scheme(5, 1), 5, 1)
    assert np.array_equal(vec, [0.2, 0.5, 0.2, 0.05, 0.05])


def test_semantic_two_ordering_anchor():
    vec = embed_digit(semantic_scheme(5, 2), 5, 1)
    assert np.array_equal(vec, [0.05, 0.5, 0.05, 0.2, 0.2])


def test_symbolic_is_exact_identity_matrix():
    for b in (2, 3, 5, 7):
        assert np.array_equal(embedding_matrix(Symbolic(), b), np.eye(b))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8).flatmap(
    lambda b: st.tuples(st.just(b), st.sampled_from(units(b)),
                        st.integers(0, b - 1))))
def test_semantic_vectors_sum_to_one(args):
    b, u, d = args
    vec = embed_digit(semantic_scheme(b, u), b, d)
    assert vec.sum() == pytest.approx(1.0)
    assert np.all(vec > 0)


def test_unit_and_negated_unit_embed_identically():
    # the orderings of u and b-u walk the circle in opposite directions,
    # which circular distance cannot see
    for b in (3, 4, 5, 7, 8):
        for u in units(b):
            a = embedding_matrix(semantic_scheme(b, u), b)
            c = embedding_matrix(semantic_scheme(b, b - u), b)
            assert np.allclose(a, c, atol=0)


def test_gaussian_kernel_circle_sum():
    for b in (3, 4, 6, 7):
        k = gaussian_kernel(b)
        total = sum(k[min(j, b - j)] for j in range(b))
        assert total == pytest.approx(1.0)
        dists = sorted(k)
        assert all(k[dists[i]] >= k[dists[i + 1]] for i in range(len(dists) - 1))


def test_semantic_kernel_validation():
    ordering = ordering_from_unit(5, 1)
    with pytest.raises(ConfigError):
        Semantic(ordering, {0: 0.5, 1: 0.25})  # distance 2 missing
    with pytest.raises(ConfigError):
        Semantic(ordering, {0: 0.5, 1: 0.5, 2: 0.5})  # circle sum 2.5


def test_embed_rejects_base_mismatch():
    with pytest.raises(ValueError):
        embed_digit(semantic_scheme(5, 1), 4, 1)


# ------------------------------------------------------------------ sequences

def test_build_sequence_anchor():
    sb = build_sequence(one_carry(3), BaseNumber.from_msd(3, (1, 2)),
                        BaseNumber.from_msd(3, (2, 1)), Symbolic())
    assert sb.tokens.shape == (1, 6, 3)
    assert sb.answer_positions == (2, 5)
    # 12_3 + 21_3 = 110_3 -> kept digits (1,0) msd = targets (0,1) lsb first
    assert sb.targets.tolist() == [[0, 1]]


def test_build_sequence_single_digit():
    sb = build_sequence(one_carry(4), BaseNumber(one_carry(4).base, (3,)),
                        BaseNumber(one_carry(4).base, (2,)), Symbolic())
    assert sb.tokens.shape == (1, 3, 4)
    assert sb.answer_positions == (2,)
    assert sb.targets.tolist() == [[1]]


def test_build_sequence_interleaves_and_separates():
    F = one_carry(3)
    n = BaseNumber.from_msd(3, (2, 1))
    m = BaseNumber.from_msd(3, (0, 2))
    sb = build_sequence(F, n, m, Symbolic())
    for j, (nd, md) in enumerate(zip(n.digits, m.digits)):
        assert np.array_equal(sb.tokens[0, 3 * j], np.eye(3)[nd])
        assert np.array_equal(sb.tokens[0, 3 * j + 1], np.eye(3)[md])
        assert np.array_equal(sb.tokens[0, 3 * j + 2], np.zeros(3))


def test_build_sequence_pads_shorter_operand():
    F = one_carry(3)
    n = BaseNumber(F.base, (2, 2, 1))
    m = BaseNumber(F.base, (2,))
    sb = build_sequence(F, n, m, Symbolic())
    assert sb.tokens.shape == (1, 9, 3)
    padded = BaseNumber(F.base, (2, 0, 0))
    assert sb.targets.tolist() == [list(add(F, n, padded).digits)]


def test_build_sequence_base_mismatch():
    with pytest.raises(ValueError):
        build_sequence(one_carry(3), BaseNumber.from_msd(4, (1,)),
                       BaseNumber.from_msd(4, (1,)), Symbolic())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2), st.integers(0, 26), st.integers(0, 26))
def test_targets_match_addition_for_every_table(tid, i, j):
    F = table_by_id(3, tid)
    n = BaseNumber.from_int(3, i, 3)
    m = BaseNumber.from_int(3, j, 3)
    sb = build_sequence(F, n, m, semantic_scheme(3))
    assert tuple(sb.targets[0]) == add(F, n, m).digits


def test_build_dataset_matches_build_sequence():
    F = table_by_id(4, 9)
    scheme = semantic_scheme(4, 3)
    rng = np.random.default_rng(3)
    ns = rng.integers(0, 64, 20)
    ms = rng.integers(0, 64, 20)
    ds = build_dataset(F, 3, scheme, ns, ms)
    for row, (i, j) in enumerate(zip(ns, ms)):
        one = build_sequence(F, BaseNumber.from_int(4, int(i), 3),
                             BaseNumber.from_int(4, int(j), 3), scheme)
        assert np.array_equal(ds.tokens[row], one.tokens[0])
        assert np.array_equal(ds.targets[row], one.targets[0])


def test_all_pairs_enumerates_ordered_pairs():
    ns, ms = all_pairs(3, 3)
    assert len(ns) == 729  # every ordered pair of 3-digit base-3 codes
    assert len(set(zip(ns.tolist(), ms.tolist()))) == 729


def test_eval_pairs_fixed_and_in_range():
    a1 = eval_pairs(3, 6, 500)
    a2 = eval_pairs(3, 6, 500)
    assert np.array_equal(a1[0], a2[0]) and np.array_equal(a1[1], a2[1])
    assert a1[0].min() >= 0 and a1[0].max() < 3 ** 6
    b = eval_pairs(4, 6, 500)
    assert not np.array_equal(a1[0], b[0])


# ------------------------------------------------------------------- training

def test_train_config_defaults_and_validation():
    cfg = TrainConfig(base=3, carry_id=0)
    assert (cfg.epochs, cfg.batch_size, cfg.lr) == (2500, 32, 0.05)
    assert (cfg.eval_interval, cfg.eval_lengths, cfg.eval_sample) == (10, (3, 6), 1000)
    for bad in (dict(embedding="fourier"), dict(cell="elman"),
                dict(epochs=0), dict(batch_size=-1), dict(lr=0.0),
                dict(eval_lengths=(0,))):
        with pytest.raises(ConfigError):
            TrainConfig(base=3, carry_id=0, **bad)


def test_config_seed_stable_and_sensitive():
    a = TrainConfig(base=3, carry_id=0, seed=1)
    assert config_seed(a) == config_seed(TrainConfig(base=3, carry_id=0, seed=1))
    assert config_seed(a) != config_seed(dataclasses.replace(a, seed=2))
    assert config_seed(a) != config_seed(dataclasses.replace(a, carry_id=1))


QUICK = dict(epochs=20, eval_interval=10, eval_sample=200, seed=5)


def test_train_run_record_shape():
    rec = train_run(TrainConfig(base=3, carry_id=0, **QUICK))
    assert rec.status == "ok"
    assert [r.epoch for r in rec.rows] == [0, 10, 20]
    assert [g.k for g in rec.generalization] == list(range(3, 11))
    for g in rec.generalization:
        assert 0.0 <= g.exact <= g.per_digit <= 1.0
    for length in (3, 6):
        assert rec.max_test_acc[length] == max(r.test_acc[length] for r in rec.rows)
    assert rec.rows[0].train_loss == pytest.approx(math.log(3), abs=0.15)
    assert rec.params is not None and rec.wall_seconds > 0


def test_train_run_learns_the_easy_table():
    rec = train_run(TrainConfig(base=3, carry_id=0, epochs=60,
                                eval_interval=10, eval_sample=200, seed=0))
    assert rec.rows[-1].train_acc > 0.95
    assert rec.rows[-1].test_acc[6] > 0.5


def test_train_run_deterministic():
    cfg = TrainConfig(base=3, carry_id=1, **QUICK)
    a = train_run(cfg)
    b = train_run(cfg)
    assert a == b  # wall-clock and params are excluded from comparison
    assert a.rows == b.rows and a.generalization == b.generalization


def test_generalization_at_train_length_matches_final_eval():
    rec = train_run(TrainConfig(base=3, carry_id=2, **QUICK))
    gen3 = next(g for g in rec.generalization if g.k == 3)
    assert gen3.exact == rec.rows[-1].test_acc[3]


def test_train_run_aborts_on_non_finite_loss(monkeypatch):
    from carrylab.experiments import training as tr

    calls = {"n": 0}
    real = tr.loss_and_grads

    def poisoned(params, batch):
        calls["n"] += 1
        loss, grads = real(params, batch)
        if calls["n"] >= 30:
            return math.nan, grads
        return loss, grads

    monkeypatch.setattr(tr, "loss_and_grads", poisoned)
    rec = train_run(TrainConfig(base=3, carry_id=0, **QUICK))
    assert rec.status == "aborted"
    assert rec.abort["epoch"] == 2
    assert "non-finite" in rec.abort["message"]
    assert rec.generalization == ()


def test_untrained_accuracy_sits_at_chance():
    # argmax of a randomly initialized decoder is symmetric over digits, so
    # exact match concentrates near b^-k
    F = one_carry(3)
    sample = eval_pairs(3, 3, 400)
    hits = []
    for seed in range(12):
        params = init_params("gru", 3, seed)
        hits.append(evaluate(params, F, Symbolic(), 3, sample).exact)
    mean = float(np.mean(hits))
    chance = 3.0 ** -3
    se = math.sqrt(chance * (1 - chance) / (400 * len(hits)))
    assert abs(mean - chance) < 3 * se + 0.01


def test_evaluate_consistent_with_run_rows():
    cfg = TrainConfig(base=3, carry_id=0, **QUICK)
    rec = train_run(cfg)
    from carrylab.experiments import scheme_from_config
    acc = evaluate(rec.params, one_carry(3), scheme_from_config(cfg), 3,
                   all_pairs(3, 3))
    assert acc.exact == rec.rows[-1].test_acc[3]


# -------------------------------------------------------------------- fitting

def test_fit_sigmoid_noiseless_roundtrip():
    xs = np.arange(0, 501, 10, dtype=float)
    ys = sigmoid_model(0.9, 0.1, 100.0, xs)
    fit = fit_sigmoid(list(zip(xs, ys)))
    assert fit.ok
    assert fit.a == pytest.approx(0.9, rel=1e-6)
    assert fit.g == pytest.approx(0.1, rel=1e-6)
    assert fit.c0 == pytest.approx(100.0, rel=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_sigmoid_truncates_at_first_max():
    xs = np.arange(0, 201, 10, dtype=float)
    ys = sigmoid_model(0.8, 0.15, 60.0, xs)
    # degrade the curve after its plateau; the fit must ignore that region
    dirty = ys.copy()
    peak = int(np.argmax(dirty))
    dirty[peak + 1:] = 0.1
    clean_fit = fit_sigmoid(list(zip(xs[:peak + 1], ys[:peak + 1])))
    dirty_fit = fit_sigmoid(list(zip(xs, dirty)))
    assert dirty_fit.ok
    assert dirty_fit.a == pytest.approx(clean_fit.a, rel=1e-9)
    assert dirty_fit.c0 == pytest.approx(clean_fit.c0, rel=1e-9)


def test_fit_sigmoid_failures():
    with pytest.raises(ValueError):
        fit_sigmoid([(0, 0.1), (10, 0.2), (20, 0.3)])
    flat = fit_sigmoid([(x, 0.5) for x in range(0, 100, 10)])
    assert not flat.ok and math.isnan(flat.a)
    # max at the second point leaves too little curve to fit
    early_peak = fit_sigmoid([(0, 0.1), (10, 0.9), (20, 0.5), (30, 0.4)])
    assert not early_peak.ok


# ------------------------------------------------------------------- spearman

def test_spearman_monotone_anchors():
    rho, p = spearman([1, 2, 3, 4, 5], [10, 20, 30, 40, 50])
    assert rho == 1.0
    assert p == pytest.approx(2 / 120)  # two of 5! permutations reach |rho|=1
    rho, _ = spearman([1, 2, 3], [9, 5, 1])
    assert rho == -1.0


def test_spearman_tie_handling():
    rho, p = spearman([1, 2, 2, 3], [1, 3, 2, 4])
    assert rho == pytest.approx(0.9486832980505139, abs=1e-15)
    assert 0.0 < p <= 1.0


def test_spearman_matches_scipy_at_large_n():
    from scipy.stats import spearmanr
    rng = np.random.default_rng(8)
    xs = rng.normal(size=25)
    ys = 0.4 * xs + rng.normal(size=25)
    rho, p = spearman(xs, ys)
    ref = spearmanr(xs, ys)
    assert rho == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=1e-12)


def test_spearman_validation():
    with pytest.raises(ValueError):
        spearman([1, 2], [1, 2])
    with pytest.raises(ValueError):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        spearman([1, 1, 1], [1, 2, 3])


# ------------------------------------------------------------------- analysis

def fake_run(base, carry_id, seed, curve, status="ok"):
    cfg = TrainConfig(base=base, carry_id=carry_id, epochs=len(curve) * 10 - 10,
                      seed=seed, eval_sample=10)
    rows = tuple(EvalRow(10 * i, 0.5, acc, {3: acc, 6: acc})
                 for i, acc in enumerate(curve))
    return RunRecord(
        config=cfg, run_seed=config_seed(cfg), status=status, rows=rows,
        generalization=(GeneralizationRow(3, curve[-1], curve[-1]),),
        max_test_acc={3: max(curve), 6: max(curve)})


def sig_curve(a, g, c0, n=40):
    return [float(v) for v in sigmoid_model(a, g, c0, np.arange(n) * 10.0)]


def test_aggregate_single_run_passthrough():
    run = fake_run(3, 0, 0, sig_curve(0.95, 0.08, 120))
    report = measure_report(one_carry(3), max_depth=2)
    report = dataclasses.replace(report, table_id=0)
    summary = aggregate_analysis([run], [report])
    assert summary.eval_length == 6
    assert len(summary.carries) == 1
    agg = summary.carries[0]
    assert agg.mean_max_test_acc == run.max_test_acc[6]
    assert agg.n_runs == 1 and agg.n_fit_ok == 1
    assert agg.mean_asymptote == pytest.approx(0.95, rel=1e-4)
    assert agg.norm_critical_point == pytest.approx(1.0)
    assert agg.label == "single_value"
    assert summary.excluded_fits == 0
    assert summary.class_means[(3, "single_value")] == agg.mean_max_test_acc


def test_aggregate_requires_reports():
    run = fake_run(3, 0, 0, sig_curve(0.9, 0.1, 100))
    with pytest.raises(ConfigError):
        aggregate_analysis([run], [])


def test_aggregate_correlations_full_grid():
    reports = []
    runs = []
    # three carries with cleanly ordered accuracy
    for tid, peak in ((0, 0.95), (1, 0.7), (2, 0.9)):
        reports.append(dataclasses.replace(
            measure_report(table_by_id(3, tid), max_depth=2), table_id=tid))
        for seed in (0, 1):
            runs.append(fake_run(3, tid, seed, sig_curve(peak, 0.1, 100 + tid * 40)))
    summary = aggregate_analysis(runs, reports)
    assert len(summary.carries) == 3
    assert all(c.n_runs == 2 for c in summary.carries)
    assert len(summary.correlations) == 9
    by_key = {(c.metric, c.measure): c for c in summary.correlations}
    # all three b=3 tables associate perfectly at these depths, so that
    # column is constant and its correlation undefined
    assert math.isnan(by_key[("max_test_acc", "assoc_fraction")].rho)
    assert not math.isnan(by_key[("max_test_acc", "box_dim")].rho)
    mins = min(c.mean_critical_point for c in summary.carries)
    for c in summary.carries:
        assert c.norm_critical_point == pytest.approx(c.mean_critical_point / mins)


def test_aggregate_skips_aborted_and_counts_failed_fits():
    reports = [dataclasses.replace(measure_report(table_by_id(3, t), max_depth=2),
                                   table_id=t) for t in (0, 1, 2)]
    runs = [fake_run(3, 0, 0, sig_curve(0.9, 0.1, 150)),
            fake_run(3, 1, 0, [0.5] * 40),                  # flat: fit fails
            fake_run(3, 2, 0, sig_curve(0.8, 0.1, 150)),
            fake_run(3, 2, 1, [0.2] * 40, status="aborted")]
    summary = aggregate_analysis(runs, reports)
    assert summary.excluded_fits == 1
    flat = next(c for c in summary.carries if c.carry_id == 1)
    assert flat.n_fit_failed == 1 and math.isnan(flat.mean_asymptote)
    assert next(c for c in summary.carries if c.carry_id == 2).n_runs == 1
    with pytest.raises(ValueError):
        aggregate_analysis([fake_run(3, 0, 0, [0.2] * 40, status="aborted")],
                           reports)
