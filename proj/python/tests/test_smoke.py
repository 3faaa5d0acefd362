# Copyright 2026 The eee-dynamics Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os

import numpy as np
import pytest

import eee_dynamics as eee

DATA = os.environ.get(
    "EEE_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def test_example_file_loads_and_validates():
    game = eee.load_game(os.path.join(DATA, "example1.json"))
    assert game.n_agents == 2
    assert game.n_joint_states == 64
    assert game.validate() == []


def test_greedy_run_reaches_sigma_star():
    game = eee.example1(0.9)
    out = eee.run(game)
    assert out["outcome"] == "converged"
    np.testing.assert_array_equal(out["sigma"][0][..., 1], np.ones((2, 2)))
    np.testing.assert_array_equal(out["sigma"][1][..., 0], np.ones((2, 2)))
    stated = np.array([[0.67, 0.54], [0.64, 0.55]])
    for i in range(2):
        assert np.max(np.abs(out["mu"][i][..., 0] - stated[i][:, None])) <= 0.01


def test_strong_coupling_cycles():
    out = eee.run(eee.example1(1.0), max_iter=200)
    assert out["outcome"] == "cycle"
    assert out["period"] >= 2
    assert 2 in out["cycle_agents"]


def test_softmax_and_verification():
    game = eee.example1(0.9)
    out = eee.run(game, policy="softmax", tau=[1.0, 1.0])
    assert out["outcome"] == "converged"
    report = eee.verify(game, out["sigma"], out["mu"], tol=1e-6, approx=True, tau=[1.0, 1.0])
    assert report["ok"]
    star = eee.constant_strategy(game, [2, 1])
    mu = eee.consistent_model(game, star)
    assert eee.verify(game, star, mu, tol=1e-8)["ok"]


def test_bounds_and_coupling():
    flat = eee.example1(0.0)
    assert eee.coupling(flat)["lambda"] == 0.0
    assert eee.bounds(flat)["rho"] == pytest.approx(0.7)
    full = eee.coupling(eee.example1(1.0))["lambda"]
    assert eee.coupling(eee.example1(0.9))["lambda"] == pytest.approx(0.9 * full, abs=1e-12)


def test_stationary_and_kappa():
    t = np.array([[0.9, 0.1], [0.5, 0.5]])
    np.testing.assert_allclose(eee.stationary(t), [5 / 6, 1 / 6], atol=1e-14)
    assert eee.meyer_kappa(np.full((2, 2), 0.5)) == pytest.approx(0.5)


def test_simulation_is_seeded():
    game = eee.example1(0.9)
    star = eee.constant_strategy(game, [2, 1])
    a = eee.simulate(game, star, 20000, seed=4)
    b = eee.simulate(game, star, 20000, seed=4)
    np.testing.assert_array_equal(a["frequency"][0], b["frequency"][0])
    assert a["undefined_situations"] == 0


def test_errors_map_to_exceptions():
    with pytest.raises(eee.IoError):
        eee.load_game("/nonexistent/game.json")
    game = eee.example1(0.9)
    with pytest.raises(eee.DomainError):
        eee.run(game, policy="softmax", tau=[0.0, 1.0])
    with pytest.raises(eee.EeeError):
        eee.example1(1.5)
