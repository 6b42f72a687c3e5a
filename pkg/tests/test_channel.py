import math

import numpy as np
import pytest

from concatgmd.channel import (
    ChannelError,
    ChannelModel,
    ConvergenceError,
    binary_entropy,
    capacity,
    dump_channel_file,
    load_channel_file,
    mutual_information,
    parse_channel,
    preset_bsc,
    preset_dec,
    preset_qsc,
)


def test_presets():
    np.testing.assert_array_equal(preset_bsc(0.1).matrix, [[0.9, 0.1], [0.1, 0.9]])
    np.testing.assert_allclose(preset_qsc(4, 0.3).matrix[0], [0.7, 0.1, 0.1, 0.1])
    np.testing.assert_allclose(preset_dec(2, 0.2).matrix[0], [0.8, 0.0, 0.2])
    for bad in (lambda: preset_bsc(1.5), lambda: preset_qsc(1, 0.1), lambda: preset_dec(3, -0.1)):
        with pytest.raises(ChannelError):
            bad()


def test_validation():
    with pytest.raises(ChannelError):
        ChannelModel([[0.5, 0.6]])
    with pytest.raises(ChannelError):
        ChannelModel([[1.2, -0.2]])
    ChannelModel([[0.5, 0.5 + 5e-13]])


def test_parse_and_file_round_trip(tmp_path):
    assert parse_channel("bsc:0.1").matrix[0, 1] == 0.1
    assert parse_channel("qsc:3:0.2").output_size == 3
    assert parse_channel("dec:4:0.5").output_size == 5
    ch = ChannelModel([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    path = tmp_path / "ch.txt"
    dump_channel_file(ch, path)
    assert path.read_text().splitlines()[0] == "2 3"
    back = parse_channel(str(path))
    np.testing.assert_array_equal(back.matrix, ch.matrix)
    with pytest.raises(ChannelError):
        parse_channel("bsc:abc")
    with pytest.raises(ChannelError):
        parse_channel("no/such/file")
    (tmp_path / "bad.txt").write_text("2 2\n1 0\n")
    with pytest.raises(ChannelError):
        load_channel_file(tmp_path / "bad.txt")


def test_sampling_deterministic_channels():
    rng = np.random.default_rng(1)
    assert all(preset_bsc(0).sample(x, rng) == x for x in (0, 1) * 50)
    assert all(preset_bsc(1).sample(x, rng) == 1 - x for x in (0, 1) * 50)
    with pytest.raises(ChannelError):
        preset_bsc(0.1).sample(2, rng)


def test_bsc_flip_fraction():
    y = preset_bsc(0.1).transmit(np.zeros(10**6, dtype=int), np.random.default_rng(5))
    assert abs(y.mean() - 0.1) < 0.001


def test_transmit_matches_sample():
    ch = ChannelModel([[0.5, 0.3, 0.2], [0.1, 0.1, 0.8]])
    xs = np.random.default_rng(2).integers(0, 2, 500)
    a = ch.transmit(xs, np.random.default_rng(9))
    rng = np.random.default_rng(9)
    b = [ch.sample(int(x), rng) for x in xs]
    np.testing.assert_array_equal(a, b)


def test_capacity_closed_forms():
    C, p = capacity(preset_bsc(0.1), tol=1e-12)
    assert C == pytest.approx(math.log(2) - binary_entropy(0.1), abs=1e-10)
    assert abs(C - 0.368065) <= 1e-6
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-6)
    assert capacity(preset_bsc(0.5))[0] == pytest.approx(0.0, abs=1e-10)
    assert capacity(preset_bsc(0.0))[0] == pytest.approx(math.log(2), abs=1e-10)
    # erasure channel: (1 - e) log q
    assert capacity(preset_dec(3, 0.25))[0] == pytest.approx(0.75 * math.log(3), abs=1e-9)


def test_capacity_z_channel_against_grid():
    # Z channel: the grid over input distributions is an independent oracle
    ch = ChannelModel([[1.0, 0.0], [0.3, 0.7]])
    C, p = capacity(ch, tol=1e-12)
    grid = np.linspace(0, 1, 200001)
    best = max(mutual_information(ch, [1 - a, a]) for a in grid[::50])
    assert C >= best - 1e-9
    assert C == pytest.approx(mutual_information(ch, p), abs=1e-10)
    fine = np.linspace(max(p[1] - 1e-3, 0), min(p[1] + 1e-3, 1), 2001)
    assert C == pytest.approx(max(mutual_information(ch, [1 - a, a]) for a in fine), abs=1e-9)


def test_capacity_relabel_invariance(rng):
    ch = ChannelModel(rng.dirichlet(np.ones(4), size=3))
    C = capacity(ch, tol=1e-11)[0]
    for _ in range(3):
        perm = ch.relabel(rng.permutation(3), rng.permutation(4))
        assert capacity(perm, tol=1e-11)[0] == pytest.approx(C, abs=1e-9)


def test_symmetric_channels_have_uniform_optimum():
    for ch in (preset_bsc(0.2), preset_qsc(5, 0.4), preset_dec(3, 0.3)):
        _, p = capacity(ch, tol=1e-12)
        np.testing.assert_allclose(p, np.full(ch.input_size, 1 / ch.input_size), atol=1e-6)
        assert ch.is_symmetric()
    assert not ChannelModel([[1.0, 0.0], [0.3, 0.7]]).is_symmetric()


def test_capacity_nonconvergence_reported():
    ch = ChannelModel([[1.0, 0.0], [0.3, 0.7]])
    with pytest.raises(ConvergenceError):
        capacity(ch, tol=1e-15, max_iter=3)
    with pytest.raises(ValueError):
        capacity(ch, tol=0)
