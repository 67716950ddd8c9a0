"""Model assembly and serialization."""

import numpy as np
import pytest

from tailcast import ForecastModel
from tailcast.errors import ParameterError, ShapeError


def small_model(seed=0):
    return ForecastModel.init(n_features=3, window=4, hidden=8, heads=2,
                              seed=seed)


def test_init_deterministic():
    a, b = small_model(5), small_model(5)
    for (na, ta), (nb, tb) in zip(a.parameters(), b.parameters()):
        assert na == nb
        assert np.array_equal(ta.value, tb.value)
    c = small_model(6)
    assert not all(np.array_equal(ta.value, tc.value)
                   for (_, ta), (_, tc) in zip(a.parameters(), c.parameters()))


def test_parameter_names_unique():
    names = [n for n, _ in small_model().parameters()]
    assert len(names) == len(set(names))


def test_state_round_trip():
    a = small_model(1)
    b = small_model(2)
    b.load_state(a.state())
    for (_, ta), (_, tb) in zip(a.parameters(), b.parameters()):
        assert np.array_equal(ta.value, tb.value)


def test_load_state_validation():
    m = small_model()
    state = m.state()
    missing = {k: v for k, v in state.items() if k != "proj_w"}
    with pytest.raises(ParameterError):
        m.load_state(missing)
    bad = dict(state)
    bad["proj_w"] = np.zeros((2, 2))
    with pytest.raises(ShapeError):
        m.load_state(bad)


def test_json_round_trip_bit_exact():
    m = small_model(3)
    m.feature_mean = np.array([0.5, -1.0, 2.0])
    m.feature_std = np.array([1.0, 2.0, 0.5])
    text = m.to_json()
    again = ForecastModel.from_json(text)
    assert again.to_json() == text


def test_from_dict_rejects_unknown_version():
    doc = small_model().to_dict()
    doc["format_version"] = 2
    with pytest.raises(ParameterError):
        ForecastModel.from_dict(doc)


def test_predict_quantiles_in_unit_interval():
    m = small_model(4)
    rng = np.random.default_rng(0)
    q = m.predict_quantiles(rng.normal(size=(5, 4, 3)))
    assert q.shape == (5,)
    assert np.all((q > 0) & (q < 1))


def test_window_shape_check():
    m = small_model()
    with pytest.raises(ShapeError):
        m.encode(np.zeros((2, 9, 3)))
    with pytest.raises(ShapeError):
        m.encode(np.zeros((2, 4, 7)))


def test_hyperparameter_validation():
    with pytest.raises(ParameterError):
        ForecastModel.init(3, 4, 8, 2, seed=0, tau=1.5)
    with pytest.raises(ParameterError):
        ForecastModel.init(3, 4, 8, 2, seed=0, loss_weight=-0.1)
