import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lnnqec import experiments as ex
from lnnqec.error_models import ContinuousModel, DiscreteModel
from lnnqec.pauli_oracle import exact_epsilon_final, letter_weights
from lnnqec.statevector import prepare_test_state


def test_epsilon_step_examples():
    assert ex.epsilon_step(0.0, 17) == 0.0
    assert ex.epsilon_step(0.3, 1) == pytest.approx(0.3, abs=1e-15)
    assert ex.epsilon_step(0.3486, 25) == pytest.approx(1.70e-2, abs=5e-5)
    assert ex.epsilon_step(1.0, 9) == 1.0
    with pytest.raises(ValueError):
        ex.epsilon_step(0.1, 0)
    with pytest.raises(ValueError):
        ex.epsilon_step(1.5, 3)


@given(e=st.floats(0, 1), T=st.integers(1, 10**6))
def test_epsilon_step_inverts(e, T):
    s = ex.epsilon_step(e, T)
    assert 0 <= s <= 1
    assert 1 - (1 - s) ** T == pytest.approx(e, abs=1e-9)


def test_epsilon_step_precision_at_tiny_values():
    assert ex.epsilon_step(2e-7, 10_000) == pytest.approx(2e-11, rel=1e-6)


def test_mc_noiseless_and_validation():
    mean, se = ex.estimate_epsilon_final_mc(DiscreteModel(0.0), 3, 50, seed=1)
    assert mean < 1e-10 and se < 1e-10
    with pytest.raises(ValueError):
        ex.estimate_epsilon_final_mc(DiscreteModel(0.1), 3, 0, seed=1)


def test_mc_is_deterministic_and_worker_independent(monkeypatch):
    monkeypatch.setattr(ex, "CHUNK", 64)
    model = DiscreteModel(0.05)
    a = ex.mc_samples(model, 4, 300, seed=8, workers=1)
    b = ex.mc_samples(model, 4, 300, seed=8, workers=1)
    c = ex.mc_samples(model, 4, 300, seed=8, workers=3)
    for x, y in ((a, b), (a, c)):
        assert np.array_equal(x[0], y[0]) and np.array_equal(x[1], y[1])


def test_mc_trials_do_not_depend_on_batch_size(monkeypatch):
    model = ContinuousModel(0.05)
    monkeypatch.setattr(ex, "CHUNK", 7)
    small = ex.mc_samples(model, 2, 20, seed=4)[0]
    monkeypatch.setattr(ex, "CHUNK", 4096)
    big = ex.mc_samples(model, 2, 20, seed=4)[0]
    assert np.array_equal(small, big)


def test_mc_prefix_property():
    model = DiscreteModel(0.1)
    assert np.array_equal(ex.mc_samples(model, 1, 10, 3)[0], ex.mc_samples(model, 1, 25, 3)[0][:10])


def test_find_t_opt_zero_rate():
    rec = ex.find_t_opt(DiscreteModel(0.0), t_grid=[20, 14, 40])
    assert rec.T == 14 and rec.epsilon_step == 0.0 and rec.t_wait == 0


def test_find_t_opt_one_permille():
    rec = ex.find_t_opt(DiscreteModel(1e-3), t_grid=range(14, 201))
    assert rec.interior
    assert 25 <= rec.T <= 100
    assert rec.T == rec.t_wait + 14
    assert rec.improvement == pytest.approx(rec.epsilon_step / 1e-3, abs=1e-12)
    assert rec.epsilon_step == min(v for _, v in rec.curve)


def test_find_t_opt_tie_break_and_mc():
    ev = ex.Evaluator("montecarlo", trials=200, seed=2)
    rec = ex.find_t_opt(DiscreteModel(0.02), ev, t_grid=[14, 20, 30])
    assert rec.method == "montecarlo" and rec.trials == 200 and rec.std_err > 0


def test_find_t_opt_rejects_bad_grids():
    with pytest.raises(ValueError):
        ex.find_t_opt(DiscreteModel(0.01), t_grid=[])
    with pytest.raises(ValueError):
        ex.find_t_opt(DiscreteModel(0.01), t_grid=[10, 20])
    with pytest.raises(ValueError):
        ex.Evaluator("oracle").evaluate(ContinuousModel(0.1), 3)


def test_default_grid():
    g = ex.default_t_grid(DiscreteModel(1e-4))
    assert g[0] == 14 and g[-1] == 10_000 and g == sorted(set(g))
    assert ex.default_t_grid(ContinuousModel(0.1), 10)[-1] == 100


def test_discrete_baseline():
    p = 1e-3
    w = letter_weights(prepare_test_state())
    assert ex.single_qubit_baseline(DiscreteModel(p), 1) == pytest.approx(p / 3 * w[1:].sum(), rel=1e-12)
    assert ex.single_qubit_baseline(DiscreteModel(p), 1) == pytest.approx(2 * p / 3, rel=1e-3)


def test_continuous_baseline():
    assert ex.single_qubit_baseline(ContinuousModel(0.0), 10, trials=10) == 0.0
    from lnnqec.error_models import mean_infidelity_quadrature

    one = ex.single_qubit_baseline(ContinuousModel(0.1), 1, trials=50_000, seed=1)
    assert one == pytest.approx(mean_infidelity_quadrature(0.1), rel=0.03)
    a = ex.single_qubit_baseline(ContinuousModel(0.1), 5, trials=1000, seed=1)
    assert a == ex.single_qubit_baseline(ContinuousModel(0.1), 5, trials=1000, seed=1, workers=2)


def test_table2_rows_and_published_columns():
    rows = ex.reproduce_table2([1e-3])
    d = rows[0].as_dict()
    assert d["published_T_opt"] == 50 and d["published_epsilon_step"] == 8.4e-4
    assert d["T"] == d["t_wait"] + 14 and d["method"] == "oracle"
    with pytest.raises(ValueError):
        ex.reproduce_table2([0.0])


def test_improvement_monotone_over_table2_grid():
    ratios = [r.record.improvement for r in ex.reproduce_table2(sorted(ex.PUBLISHED_TABLE2))]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_table3_small_run():
    rows = ex.reproduce_table3([0.1], trials=300, seed=1, t_grid=[14, 25])
    d = rows[0].as_dict()
    assert d["method"] == "montecarlo" and d["std_err"] > 0 and d["published_epsilon_step"] == 6.9e-3
    assert d["baseline_p"] > 0


def test_csv_and_json_schema():
    rec = ex.find_t_opt(DiscreteModel(1e-2), t_grid=[14, 25])
    csv_text = ex.records_to_csv([rec.row()])
    header = csv_text.splitlines()[0].split(",")
    assert header[: len(ex.CSV_COLUMNS)] == ex.CSV_COLUMNS
    blob = json.loads(ex.records_to_json({"s": [rec.row()]}))
    assert set(ex.CSV_COLUMNS) <= set(blob["sweeps"]["s"][0])
