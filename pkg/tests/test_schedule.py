"""Tests for the learning-rate schedule."""

import pytest

from crosstalk.config import TrainConfig
from crosstalk.training.schedule import lr_at, warmup_steps

CFG = TrainConfig(max_lr=1e-3, min_lr=1e-4, lm_max_lr=1e-4, lm_min_lr=1e-5, warmup_fraction=0.1)


def test_warmup_steps():
    assert warmup_steps(100, 0.1) == 10
    assert warmup_steps(5, 0.0) == 1


def test_curve_endpoints():
    assert lr_at(0, 100, CFG) == 0.0
    assert lr_at(5, 100, CFG) == pytest.approx(5e-4)
    assert lr_at(10, 100, CFG) == pytest.approx(1e-3)
    assert lr_at(100, 100, CFG) == pytest.approx(1e-4)
    assert lr_at(55, 100, CFG) == pytest.approx((1e-3 + 1e-4) / 2)


def test_language_model_curve():
    assert lr_at(10, 100, CFG, lm=True) == pytest.approx(1e-4)
    assert lr_at(100, 100, CFG, lm=True) == pytest.approx(1e-5)


def test_monotone_after_warmup():
    rates = [lr_at(s, 50, CFG) for s in range(5, 51)]
    assert all(a >= b for a, b in zip(rates, rates[1:]))


def test_single_step_run():
    assert lr_at(1, 1, CFG) == pytest.approx(1e-4)


@pytest.mark.parametrize("step,total", [(-1, 10), (11, 10), (0, 0)])
def test_rejects_out_of_range(step, total):
    with pytest.raises(ValueError):
        lr_at(step, total, CFG)
