import numpy as np
import pytest

from roadlatent import mape, rmse


def test_mape_hand_values():
    assert mape([2.0, 3.0], [2.0, 3.0]) == 0.0
    assert mape([2.0], [1.0]) == 0.5
    assert mape([1.0, 2.0], [2.0, 4.0]) == 1.0


def test_rmse_hand_values():
    assert rmse([2.0, 3.0], [2.0, 3.0]) == 0.0
    assert rmse([2.0], [1.0]) == 1.0
    assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(np.sqrt(12.5))


def test_metric_errors():
    with pytest.raises(ValueError):
        mape([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        rmse([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        mape([0.0], [1.0])
    with pytest.raises(ValueError):
        mape([-1.0], [1.0])
    with pytest.raises(ValueError):
        mape([], [])


def test_scaling_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        y = rng.uniform(1.0, 10.0, size=30)
        yhat = rng.uniform(0.0, 10.0, size=30)
        c = float(rng.uniform(0.1, 9.0))
        assert mape(c * y, c * yhat) == pytest.approx(mape(y, yhat), rel=1e-12)
        assert rmse(c * y, c * yhat) == pytest.approx(c * rmse(y, yhat), rel=1e-12)
