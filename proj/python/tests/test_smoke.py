import math
from pathlib import Path

import numpy as np
import pytest

import irmc

CONFIGS = Path(__file__).resolve().parents[2] / "configs"

SHORT_FEDERICO = """
[model]
preset = federico
horizon = 1
[design]
scheme = lattice
lattice = linspace
lo = 1
hi = 90
n_unique = 90
n_rep = 20
[surrogate]
kind = tps
tps_kernel = cubic
[intervention]
mode = root
[forward]
n_paths = 2000
seed = 3
"""


@pytest.fixture(scope="module")
def short_stack(tmp_path_factory):
    cfg = tmp_path_factory.mktemp("cfg") / "short.toml"
    cfg.write_text(SHORT_FEDERICO)
    return irmc.solve(str(cfg))


def test_federico_oracle():
    sol = irmc.federico_solution()
    assert sol.s == pytest.approx(8.749, rel=5e-4)
    assert sol.S == pytest.approx(56.99, rel=5e-4)
    assert sol.v(sol.s) == pytest.approx(sol.v(sol.S) + sol.c0 * (sol.S - sol.s) + sol.c1)
    other = irmc.federico_solution(r=0.16)
    assert math.isfinite(other.S) and other.S != pytest.approx(sol.S, rel=1e-2)


def test_invalid_parameters_raise():
    with pytest.raises(irmc.InvalidParameters):
        irmc.federico_solution(gamma=1.0)
    with pytest.raises(irmc.Error):
        irmc.federico_solution(gamma=1.0)


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[design]\nn_rep = many\n")
    with pytest.raises(irmc.ConfigError, match="design.n_rep"):
        irmc.solve(str(bad))


def test_solve_and_forward(short_stack):
    assert short_stack.steps == 10
    assert short_stack.dim == 1
    assert short_stack.preset == "federico"
    rep = short_stack.forward(n_paths=2000, seed=5)
    assert rep["std_error"] > 0
    parts = rep["mean_running"] + rep["mean_impulse"] + rep["mean_terminal"]
    assert parts == pytest.approx(rep["value_estimate"], rel=1e-10)
    assert rep["event_pre_state"].shape == (len(rep["event_step"]), 1)
    again = short_stack.forward(n_paths=2000, seed=5)
    assert again["value_estimate"] == rep["value_estimate"]


def test_decisions_follow_the_policy(short_stack):
    act, z = short_stack.decide(0, [2.0])
    assert act and z[0] > 0
    act, z = short_stack.decide(0, [70.0])
    assert not act and z[0] == 0
    x = [40.0]
    assert short_stack.value(0, x) >= short_stack.q_value(0, x)
    b = short_stack.scan_boundary()
    assert b["s"].shape == (10,)
    assert np.all(b["S"] > b["s"])


def test_stack_round_trip(short_stack, tmp_path):
    path = tmp_path / "stack.bin"
    short_stack.save(str(path))
    loaded = irmc.load_stack(str(path))
    grid = np.linspace(1.0, 90.0, 100)
    for k in (0, 5, 9):
        a = np.array([short_stack.value(k, [x]) for x in grid])
        b = np.array([loaded.value(k, [x]) for x in grid])
        np.testing.assert_allclose(a, b, rtol=1e-12)
    data = path.read_bytes()
    assert data[:4] == b"IRMC"
    future = tmp_path / "future.bin"
    future.write_bytes(data[:4] + (irmc.STACK_FORMAT_VERSION + 1).to_bytes(4, "little") + data[8:])
    with pytest.raises(irmc.VersionMismatch):
        irmc.load_stack(str(future))


def test_grid_dp_shape():
    dp = irmc.brute_force_dp(str(CONFIGS / "faustmann.toml"), lo=-0.25, hi=2.5, n=50)
    assert dp["value"].shape == (51, 50)
    assert dp["act"].shape == (50, 50)
    assert dp["grid"][0] == pytest.approx(-0.25)
