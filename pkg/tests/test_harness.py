import math

import numpy as np
import pytest

from ammsketch import PairedMatrices
from ammsketch.errors import ConfigError
from ammsketch.harness import (
    ExperimentConfig,
    MatrixSpec,
    TrialReport,
    compare_schemes,
    derive_seed,
    load_config,
    make_pair,
    nearest_rank_quantiles,
    run_experiment,
)


def test_nearest_rank_quantiles():
    v = list(range(1, 21))  # 1..20
    # ceil(q * 20)-th smallest
    assert nearest_rank_quantiles(v) == (1.0, 5.0, 10.0, 15.0, 19.0, 20.0)
    assert nearest_rank_quantiles([3.0]) == (3.0,) * 6


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert len({derive_seed(0, m, j) for m in (1, 2) for j in range(100)}) == 200
    assert 0 <= derive_seed(5) < 2**64


def test_make_pair_hits_target_stable_rank():
    P = make_pair(MatrixSpec(16, 12, 100, 4.0, 2.5, seed=1))
    assert P.A.shape == (16, 100) and P.B.shape == (12, 100)
    assert P.stats_a.stable_rank == pytest.approx(4.0, abs=1e-8)
    assert P.stats_b.stable_rank == pytest.approx(2.5, abs=1e-8)


def test_single_atom_errors_are_zero():
    P = PairedMatrices(np.array([[1.0], [2.0]]), np.array([[3.0], [4.0]]))
    cfg = ExperimentConfig(schemes=("proposed",), m_grid=(5,), trials=1)
    rep = run_experiment(cfg, pair=P)
    assert rep.cells[0].errors == (0.0,)
    assert set(rep.cells[0].quantiles) == {0.0}


def test_report_structure():
    cfg = ExperimentConfig(MatrixSpec(6, 5, 40, 2.0, 1.5, seed=3), ("proposed", "uniform"), (8, 32), 20, 4, (1.0, 8.0))
    rep = run_experiment(cfg)
    assert [(c.scheme, c.m) for c in rep.cells] == [("proposed", 8), ("proposed", 32), ("uniform", 8), ("uniform", 32)]
    for c in rep.cells:
        assert list(c.quantiles) == sorted(c.quantiles)
        assert len(c.errors) == 20
        for e in c.exceedance:
            assert 0.0 <= e.exceed_fraction <= 1.0
            assert e.exceed_fraction == np.mean(np.array(c.errors) > e.bound_deviation)
    assert rep.cell("uniform", 32) is rep.cells[3]
    with pytest.raises(KeyError):
        rep.cell("dkm", 8)


def test_determinism_and_roundtrip():
    cfg = ExperimentConfig(MatrixSpec(6, 6, 50, 3.0, 2.0, seed=9), ("proposed", "dkm"), (16, 64), 15, 11, (2.0, 5.0))
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.to_json() == b.to_json()
    assert a.quantiles_csv() == b.quantiles_csv()
    back = TrialReport.from_json(a.to_json())
    assert back.to_json() == a.to_json()
    assert back.cells == a.cells


def test_different_master_seed_changes_errors():
    cfg = ExperimentConfig(MatrixSpec(6, 6, 50, 3.0, 2.0, seed=9), m_grid=(16,), trials=10)
    other = ExperimentConfig(MatrixSpec(6, 6, 50, 3.0, 2.0, seed=9), m_grid=(16,), trials=10, master_seed=1)
    assert run_experiment(cfg).cells[0].errors != run_experiment(other).cells[0].errors


def test_trials_do_not_depend_on_trial_count():
    spec = MatrixSpec(6, 6, 50, 3.0, 2.0, seed=9)
    short = run_experiment(ExperimentConfig(spec, m_grid=(16,), trials=5))
    long = run_experiment(ExperimentConfig(spec, m_grid=(16,), trials=12))
    assert long.cells[0].errors[:5] == short.cells[0].errors


def test_csv_headers():
    rep = run_experiment(ExperimentConfig(MatrixSpec(4, 4, 10, 1.0, 1.0), m_grid=(4,), trials=3, t_grid=(1.0,)))
    q = rep.quantiles_csv().splitlines()
    e = rep.exceedance_csv().splitlines()
    assert q[0] == "scheme,m,quantile,value" and len(q) == 1 + 6
    assert e[0] == "scheme,m,t,exceed_fraction,bound_deviation,bound_failure" and len(e) == 2


def test_write_report(tmp_path):
    rep = run_experiment(ExperimentConfig(MatrixSpec(4, 4, 10, 1.0, 1.0), m_grid=(4,), trials=3))
    paths = rep.write(tmp_path / "out")
    assert TrialReport.from_json(paths["report"].read_text()).to_json() == rep.to_json()
    assert '"schema_version": 1' in paths["report"].read_text()


@pytest.mark.parametrize("bad", [
    dict(schemes=()),
    dict(schemes=("proposed", "proposed")),
    dict(schemes=("alias",)),
    dict(m_grid=()),
    dict(m_grid=(10, 5)),
    dict(m_grid=(0,)),
    dict(m_grid=(2.5,)),
    dict(trials=0),
    dict(t_grid=(0.0,)),
    dict(bound_form="minsker"),
    dict(master_seed=-1),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad)


def test_config_from_dict(tmp_path):
    cfg = ExperimentConfig.from_dict({"schemes": ["proposed", "DKM"], "m_grid": [4, 8], "matrices": {"n": 20}})
    assert cfg.schemes == ("proposed", "dkm") and cfg.matrices.n == 20
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"trails": 3})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"matrices": {"rows": 3}})
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_compare_needs_two_schemes():
    with pytest.raises(ConfigError):
        compare_schemes(ExperimentConfig(schemes=("proposed",)))


def test_proposed_and_dkm_coincide_on_equal_column_norms():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 30))
    B = rng.standard_normal((4, 30))
    A /= np.linalg.norm(A, axis=0)
    B /= np.linalg.norm(B, axis=0)
    rep = compare_schemes(ExperimentConfig(schemes=("proposed", "dkm"), m_grid=(10, 40), trials=25), pair=PairedMatrices(A, B))
    for m in (10, 40):
        np.testing.assert_allclose(rep.cell("proposed", m).errors, rep.cell("dkm", m).errors, rtol=1e-9)
    assert rep.mode == "compare"


@pytest.mark.slow
def test_proposed_beats_uniform_on_skewed_columns():
    spec = MatrixSpec(16, 16, 256, 4.0, 4.0, seed=2, column_decay=1.0)
    cfg = ExperimentConfig(spec, ("proposed", "uniform"), (64, 256, 1024), 200, 5, (5.0,))
    rep = compare_schemes(cfg)
    for m in cfg.m_grid:
        assert rep.cell("proposed", m).median <= rep.cell("uniform", m).median


@pytest.mark.slow
def test_scaling_and_domination_on_flat_spectrum():
    spec = MatrixSpec(16, 16, 512, 16.0, 16.0, seed=4)
    cfg = ExperimentConfig(spec, ("proposed",), (256, 1024), 200, 6, (3.0, 5.0, 8.0, 12.0))
    rep = run_experiment(cfg)
    ratio = rep.cell("proposed", 256).median / rep.cell("proposed", 1024).median
    assert 1.6 <= ratio <= 2.6
    assert rep.cell("proposed", 1024).quantile(0.95) <= rep.cell("proposed", 256).quantile(0.95)
    for c in rep.cells:
        for e in c.exceedance:
            if e.bound_failure < 0.5:
                assert e.exceed_fraction <= e.bound_failure + 3 * math.sqrt(e.bound_failure / cfg.trials) + 0.02


def test_proof_form_report_uses_proof_deviation():
    spec = MatrixSpec(6, 6, 40, 2.0, 2.0, seed=1)
    th = run_experiment(ExperimentConfig(spec, m_grid=(16,), trials=3, t_grid=(4.0,)))
    pf = run_experiment(ExperimentConfig(spec, m_grid=(16,), trials=3, t_grid=(4.0,), bound_form="proof"))
    assert pf.cells[0].exceedance[0].bound_deviation < th.cells[0].exceedance[0].bound_deviation
    assert pf.config.bound_form == "proof"


def test_planner_constant_achieves_epsilon():
    # c = 4 with the default log-scale t: eps-accuracy in >= 90% of trials
    from ammsketch import certificate, required_samples
    for sr, eps in [(4.0, 0.5), (1.0, 0.3), (8.0, 0.4)]:
        spec = MatrixSpec(16, 16, 512, sr, sr, seed=5)
        c = certificate(make_pair(spec))
        plan = required_samples(c.sr_a, c.sr_b, eps, 4.0)
        rep = run_experiment(ExperimentConfig(spec, m_grid=(plan.m_required,), trials=200, t_grid=(plan.t,)))
        assert np.mean(np.array(rep.cells[0].errors) <= eps) >= 0.9
        assert math.isfinite(plan.tail.failure_prob)
