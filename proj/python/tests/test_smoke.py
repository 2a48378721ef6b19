import os
import subprocess

import numpy as np
import pytest

import stpod


def test_philox_known_answer():
    assert stpod.philox_block([0, 0, 0, 0], [0, 0]) == [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]


def test_hankel_example():
    h = stpod.build_embedded(np.array([[1.0, 2, 3, 4, 5]]), 2, 1)
    np.testing.assert_array_equal(h, [[1, 2, 3, 4], [2, 3, 4, 5]])
    spaced = stpod.build_embedded(np.array([[1.0, 2, 3, 4, 5]]), 2, 2)
    np.testing.assert_array_equal(spaced, [[1, 3], [2, 4]])


def test_weighted_modes_match_numpy_eig():
    rng = np.random.default_rng(3)
    y = rng.standard_normal((3, 5))
    w = np.array([2.0, 1.0, 1.0])
    modes = stpod.weighted_svd_modes(y, w)
    c = y @ y.T / y.shape[1]
    vals, vecs = np.linalg.eig(c @ np.diag(w))
    order = np.argsort(vals.real)[::-1]
    np.testing.assert_allclose(modes.energies, vals.real[order], rtol=1e-10)
    gram = modes.modes.T @ np.diag(w) @ modes.modes
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-10)
    for k in range(3):
        assert stpod.mode_similarity(modes.modes[:, k], vecs[:, order[k]].real, w) > 1 - 1e-10


def test_ou_generator_is_deterministic_and_stationary():
    a = stpod.generate_ou([[-1.0]], [[np.sqrt(2.0)]], 100000, 0.01, seed=11)
    b = stpod.generate_ou([[-1.0]], [[np.sqrt(2.0)]], 100000, 0.01, seed=11)
    assert np.array_equal(a, b)
    assert abs(a.var() - 1.0) < 0.15


def test_toeplitz_and_spod_shapes():
    q = stpod.generate_ou([[-0.1]], [[np.sqrt(0.2)]], 400, 1.0, seed=2)
    t = stpod.spacetime_pod_toeplitz(q, 1.0, 10, 3)
    assert t.method == "toeplitz" and t.modes.shape == (10, 3)
    assert np.all(np.diff(t.energies) <= 0)
    f = stpod.spod(q, 1.0, 32)
    assert len(f.bins) == 17
    assert f.blocks == 12


def test_round_trip(tmp_path):
    q = np.arange(15.0).reshape(3, 5)
    stpod.save_series(q, 0.25, str(tmp_path / "x.stpd"))
    back, dt = stpod.load_series(str(tmp_path / "x.stpd"))
    assert dt == 0.25 and np.array_equal(back, q)
    modes = stpod.spacetime_pod(q, 0.25, 2)
    stpod.save_modes(modes, str(tmp_path / "m.stpm"))
    loaded = stpod.load_modes(str(tmp_path / "m.stpm"))
    assert np.array_equal(loaded.modes, modes.modes)


def test_errors_map_to_value_error():
    with pytest.raises(ValueError, match="series shorter than embedding window"):
        stpod.build_embedded(np.ones((1, 3)), 5)


@pytest.mark.skipif("STPOD_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_generate(tmp_path):
    out = tmp_path / "x.stpd"
    cli = os.environ["STPOD_CLI"]
    subprocess.run([cli, "generate", "--kind", "ou", "--n", "64", "--dt", "0.1", "-o", str(out)], check=True)
    values, dt = stpod.load_series(str(out))
    assert values.shape == (1, 64) and dt == pytest.approx(0.1)
