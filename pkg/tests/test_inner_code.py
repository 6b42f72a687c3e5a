import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concatgmd.channel import ChannelModel, preset_bsc, preset_qsc
from concatgmd.inner_code import (
    InnerCode,
    InnerCodeError,
    decide,
    default_calibration,
    log_likelihoods,
    ml_decode,
    random_linear_codebook,
    repetition_code,
)


def test_forced_generator_repetition():
    code = random_linear_codebook(0, 3, 1, generator=[[1, 1, 1]])
    np.testing.assert_array_equal(code.codebook, [[0, 0, 0], [1, 1, 1]])
    np.testing.assert_array_equal(code.encode(1), [1, 1, 1])
    with pytest.raises(InnerCodeError):
        code.encode(2)


def test_determinism_and_linearity():
    a = random_linear_codebook(11, 8, 4, attempts=5)
    b = random_linear_codebook(11, 8, 4, attempts=5)
    np.testing.assert_array_equal(a.codebook, b.codebook)
    assert not a.codebook[0].any()
    # closed under addition
    rows = {tuple(r) for r in a.codebook}
    for i in range(16):
        for j in range(16):
            assert tuple((a.codebook[i] + a.codebook[j]) % 2) in rows


def test_min_distance_metadata_exhaustive():
    code = random_linear_codebook(3, 8, 4, attempts=50)
    cb = code.codebook
    d = min(int((cb[i] != cb[j]).sum()) for i in range(16) for j in range(i + 1, 16))
    assert code.min_distance == d >= 2


def test_codebook_validation(tmp_path):
    with pytest.raises(InnerCodeError):
        InnerCode([[0, 1], [0, 1]])
    with pytest.raises(InnerCodeError):
        InnerCode.from_generator([[1, 0, 1], [1, 0, 1]])
    code = random_linear_codebook(1, 6, 3)
    code.dump(tmp_path / "cb.txt")
    assert (tmp_path / "cb.txt").read_text().splitlines()[1] == "".join(map(str, code.codebook[1]))
    np.testing.assert_array_equal(InnerCode.load(tmp_path / "cb.txt").codebook, code.codebook)


def test_noiseless_decision():
    code = random_linear_codebook(2, 8, 4, attempts=10)
    ch = preset_bsc(0.0)
    for s in range(16):
        dec = ml_decode(code, code.encode(s), ch)
        assert dec.best == s and dec.alpha == 1.0 and dec.best != dec.second


def test_repetition_over_bsc():
    code = repetition_code(3)
    ch = preset_bsc(0.1)
    dec = ml_decode(code, [0, 0, 1], ch)
    assert dec.best == 0 and dec.second == 1
    assert dec.L1 - dec.L2 == pytest.approx(math.log(0.9 / 0.1), abs=1e-12)
    # direct arithmetic: L1 = 2 ln 0.9 + ln 0.1
    assert dec.L1 == pytest.approx(2 * math.log(0.9) + math.log(0.1))
    T = default_calibration(ch, 3)
    assert T == pytest.approx(3 * math.log(9))
    assert dec.alpha == pytest.approx(1 / 3)


def test_tie_gives_zero_alpha_and_smallest_index():
    code = InnerCode([[0, 0], [1, 1]])
    dec = ml_decode(code, [0, 1], preset_bsc(0.2))
    assert dec.L1 == dec.L2 and dec.alpha == 0.0 and dec.best == 0


def test_calibration_fallbacks():
    assert default_calibration(preset_bsc(0.0), 4) == 4.0
    assert default_calibration(preset_bsc(0.5), 4) == 4.0


def test_alpha_fuzz_in_unit_interval():
    rng = np.random.default_rng(4)
    ch = ChannelModel(rng.dirichlet(np.ones(3), size=2))
    code = random_linear_codebook(5, 10, 5)
    y = rng.integers(0, 3, size=(100_000, 10))
    best, second, L1, L2, alpha = decide(log_likelihoods(code.codebook, y, ch), 7.0)
    assert np.all((alpha >= 0) & (alpha <= 1))
    assert np.all(L1 >= L2) and np.all(best != second)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-50, 50))
def test_alpha_depends_only_on_gap(seed, shift):
    rng = np.random.default_rng(seed)
    ll = rng.normal(size=(5, 16)) * 4
    a = decide(ll, 3.0)
    b = decide(ll + shift, 3.0)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_allclose(a[4], b[4], atol=1e-9)


def test_labels_pick_best_other_label():
    ll = np.array([[-1.0, -1.5, -4.0, -6.0]])
    labels = np.array([[0, 0, 1, 1]])
    best, second, L1, L2, alpha = decide(ll, 10.0, labels)
    assert best[0] == 0 and second[0] == 2 and L2[0] == -4.0


def test_nonbinary_codebook_on_qsc():
    code = InnerCode([[0, 0, 0], [1, 2, 3], [2, 3, 1], [3, 1, 2]])
    ch = preset_qsc(4, 0.1)
    assert ml_decode(code, [1, 2, 0], ch).best == 1
    with pytest.raises(InnerCodeError):
        ml_decode(code, [1, 2, 4], ch)
