import numpy as np
import pytest

from forecaster import (LstmConfig, read_predictions_csv, read_trace_csv,
                        train_predict_online, write_predictions_csv)


def test_constant_series_converges():
    u = np.full(400, 0.4)
    preds = train_predict_online(u, LstmConfig())
    tail = np.abs(preds[200:] - u[200:])
    assert tail.mean() < 0.02


def test_too_short_trace_rejected():
    with pytest.raises(ValueError, match="window"):
        train_predict_online(np.full(10, 0.3), LstmConfig(window=10))


def test_deterministic():
    rng = np.random.default_rng(0)
    u = 0.4 + 0.05 * np.sin(np.arange(300) / 7.0) + 0.01 * rng.standard_normal(300)
    a = train_predict_online(u, LstmConfig())
    b = train_predict_online(u, LstmConfig())
    assert np.array_equal(a, b)


def test_causality_prefix_invariance():
    # Predictions for the first k slots must not depend on anything after k.
    rng = np.random.default_rng(1)
    u = 0.5 + 0.05 * np.sin(np.arange(400) / 5.0) + 0.01 * rng.standard_normal(400)
    k = 250
    full = train_predict_online(u, LstmConfig())
    truncated = train_predict_online(u[:k], LstmConfig())
    assert np.array_equal(full[:k], truncated)


def test_config_validation():
    with pytest.raises(ValueError):
        LstmConfig(window=0)
    with pytest.raises(ValueError):
        LstmConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        LstmConfig(layers=2)


def test_predictions_csv_round_trip(tmp_path):
    preds = np.linspace(0.1, 0.9, 25)
    path = tmp_path / "preds.csv"
    write_predictions_csv(preds, path, comments=["seed=0"])
    back = read_predictions_csv(path)
    assert np.array_equal(back, preds)
    first = path.read_text().splitlines()[0]
    assert first.startswith("#")


def test_trace_reader_validation(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("slot,utilization\n0,1.7\n")
    with pytest.raises(ValueError, match="outside"):
        read_trace_csv(bad)
    missing_header = tmp_path / "head.csv"
    missing_header.write_text("a,b\n0,0.5\n")
    with pytest.raises(ValueError, match="header"):
        read_trace_csv(missing_header)
