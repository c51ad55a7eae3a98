import math
import os
import pathlib

import numpy as np
import pytest

import obskit

DATA = pathlib.Path(os.environ.get("OBSKIT_DATA_DIR", pathlib.Path(__file__).parents[2] / "data"))


def test_nla_half_max_and_slope():
    assert obskit.nla(0.5) == 0.5
    assert math.isclose(obskit.nla_derivative(0.5), 10.0 / 4, rel_tol=1e-12)
    assert obskit.nla(0.2, c=0.0) == 0.5
    assert obskit.sta_kernel(0.005) == 1.0


def test_differencing_double_integrator():
    ts = 0.1
    A = np.array([[1.0, ts], [0.0, 1.0]])
    B = np.array([[0.5 * ts * ts], [ts]])
    taps = [np.array([[1.0, 0.0]]), np.array([[-1.0, 0.0]])]
    np.testing.assert_allclose(obskit.effective_output_matrix(A, B, taps), [[0.0, ts]], atol=1e-15)
    assert obskit.delayed_observability_rank(A, B, taps) == 1
    assert obskit.delayed_observability_rank(A, B, [np.array([[1.0, 0.0]])]) == 2


def test_gramian_metrics_and_lyapunov():
    m = obskit.gramian_metrics(np.diag([4.0, 1.0]))
    assert math.isclose(m["kappa"], 4.0)
    assert math.isclose(m["det_root"], 2.0)
    assert not m["singular"]
    assert obskit.gramian_metrics(np.zeros((2, 2)))["singular"]
    # Scalar system dx = -x, y = x: W(T) = (1 - exp(-2T)) / 2.
    W = obskit.analytic_lti_gramian(np.array([[-1.0]]), np.array([[1.0]]), 1.0)
    assert math.isclose(W[0, 0], (1 - math.exp(-2.0)) / 2, rel_tol=1e-10)


def test_run_command_and_errors(tmp_path):
    assert "linear-delay" in obskit.command_names()
    summary = obskit.run_command("linear-delay", DATA / "config_default.json", out=tmp_path)
    assert summary["rank_delayed"] == 1
    assert (tmp_path / "linear_delay.json").exists()
    with pytest.raises(obskit.ConfigError):
        obskit.run_command("linear-delay", tmp_path / "missing.json")
    with pytest.raises(obskit.ConfigError):
        obskit.run_command("bogus", DATA / "config_default.json", out=tmp_path)
