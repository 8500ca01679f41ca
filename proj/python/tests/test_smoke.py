import math

import numpy as np
import pytest

import chfam


def test_version():
    assert chfam.version() == chfam.__version__
    assert chfam.__version__.count(".") == 2


def test_grid():
    g = chfam.Grid(64, math.pi)
    assert len(g) == 64
    assert g.nodes[0] == -math.pi
    assert g.spacing == pytest.approx(2 * math.pi / 64)
    with pytest.raises(ValueError):
        chfam.Grid(63, 1.0)


def test_spectral_operators():
    g = chfam.Grid(64, math.pi)
    u = np.sin(3 * g.nodes)
    assert np.max(np.abs(chfam.derivative(g, u) - 3 * np.cos(3 * g.nodes))) < 1e-12
    assert np.max(np.abs(chfam.helmholtz_inverse(g, u) - u / 10)) < 1e-14
    with pytest.raises(ValueError):
        chfam.derivative(g, np.zeros(10))


def test_green_oracle_agrees():
    g = chfam.Grid(2048, 32.0)
    u = chfam.random_smooth_field(g, 0, 1)
    a = chfam.helmholtz_inverse(g, u)
    b = chfam.green_convolve(g, u, "g")
    assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-6


def test_peakon_profile_and_rhs():
    g = chfam.Grid(256, 20.0)
    u = chfam.sample_profile(g, "peakon", n=2, amplitude=4.0)
    assert u.max() == pytest.approx(2.0)
    r = chfam.rhs(g, chfam.random_smooth_field(g, 1, 1), 3)
    assert r.shape == (256,)
    assert np.all(np.isfinite(r))


def test_evolve_conserves_H1():
    g = chfam.Grid(256, 20.0)
    u0 = chfam.dealias(g, np.exp(-g.nodes**2), "strict", 1)
    times, states = chfam.evolve(g, u0, 1, 0.5, output_interval=0.25)
    assert list(times) == [0.0, 0.25, 0.5]
    assert states.shape == (3, 256)
    h1 = [chfam.conserved_H1(g, s) for s in states]
    assert max(abs(h - h1[0]) for h in h1) < 1e-12


def test_diagnostics():
    g = chfam.Grid(4096, 60.0)
    fit = chfam.fit_tail(g, np.exp(-0.5 * g.nodes), 10, 30)
    assert fit["exponent"] == pytest.approx(0.5)
    assert chfam.s_kernel(0.0, 1.0, 2.0) > 0
    assert chfam.weight_convolution_identity(0.5) == pytest.approx(3.0, abs=1e-6)
    k = chfam.kernel_identity(g, chfam.random_smooth_field(g, 2, 1), 3, -1.0, 2.0)
    assert k["relative"] < 1e-6
    with pytest.raises(chfam.InsufficientData):
        chfam.fit_tail(g, np.zeros(4096), 10, 30)


CONFIG = """
[run]
scenario = conservation
name = smoke

[grid]
num_points = 128
half_length = 20

[control]
t_end = 0.2
output_interval = 0.1
"""


def test_run_config():
    res = chfam.run_config_text(CONFIG)
    assert res["status"] == "pass"
    assert res["exit_code"] == 0
    assert [v["name"] for v in res["verdicts"]] == ["H1 drift", "H drift"]
    assert len(res["records"]) == 3
    assert res == chfam.run_config_text(CONFIG)


def test_bad_config():
    with pytest.raises(chfam.ConfigError, match="unknown scenario"):
        chfam.run_config_text("[run]\nscenario = nope\n")
