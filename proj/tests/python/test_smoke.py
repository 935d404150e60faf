import math

import pytest

import lacksim


def test_exponential_conditional_mean_is_memoryless():
    model = lacksim.DurationModel.exponential(117.31)
    for t in (0.0, 50.0, 300.0):
        assert lacksim.conditional_mean(model, t) == pytest.approx(t + 117.31, rel=1e-9)


def test_table_and_check():
    rows = lacksim.check_table1()
    assert len(rows) == 8
    assert all(r["ok"] for r in rows)
    k, lam, cv = lacksim.table1()[0]
    assert lacksim.DurationModel.weibull(k, lam).moments().cv == pytest.approx(cv, abs=0.01)


def test_insertion_rate_at_call_start():
    model = lacksim.DurationModel.weibull(0.4, 35.3)
    assert lacksim.insertion_rate(1000, model, 0.0) == pytest.approx(1000 / 117.31, rel=1e-3)


def test_tail_underflow_is_a_value_error():
    model = lacksim.DurationModel.exponential(117.31)
    with pytest.raises(ValueError):
        lacksim.conditional_mean(model, 1e5)
    assert lacksim.largest_valid_time(model) == pytest.approx(117.31 * -math.log(1e-12))


def test_validate_config_lists_every_violation():
    assert lacksim.validate_config("g711-baseline") == []
    problems = lacksim.validate_config("cf = 1.5\ncolour = red\n")
    assert len(problems) == 2


def test_simulate_is_deterministic():
    a = lacksim.simulate("g711-baseline", n_calls=20, seed=3)
    b = lacksim.simulate("g711-baseline", n_calls=20, seed=3)
    assert a["calls"] == 20
    assert a["calls_csv"] == b["calls_csv"]
    assert a["loss_violations"] == 0


def test_fig4_starts_at_s_over_mean():
    csv = lacksim.emit_figure("fig4").splitlines()
    assert csv[0] == "model,k,lambda,cv,t,ir_frozen,ir_depleted"
    starts = [float(r.split(",")[5]) for r in csv[1:] if r.split(",")[4] == "0"]
    assert len(starts) == 8
    assert all(abs(s - 8.525) / 8.525 < 1e-3 for s in starts)
