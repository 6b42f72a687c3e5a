import math
import warnings

import numpy as np
import pytest

from concatgmd.channel import ChannelModel, capacity, preset_bsc, preset_qsc
from concatgmd.exponents import (
    ExponentCalculator,
    ExponentDomainError,
    E_L,
    bz_Einf,
    bz_Em,
    forney_Ec,
    gallager_E,
    gallager_E0,
    gallager_Ex,
    golden_max,
    simplex_grid,
)

BSC = preset_bsc(0.1)
U2 = [0.5, 0.5]


@pytest.fixture(scope="module")
def calc():
    return ExponentCalculator(BSC)


def bsc_e0(rho, p):
    # closed form for the uniform input
    s = 1 / (1 + rho)
    return rho * math.log(2) - (1 + rho) * math.log(p**s + (1 - p) ** s)


def bsc_ex(rho, p):
    z = 2 * math.sqrt(p * (1 - p))
    return -rho * math.log((1 + z ** (1 / rho)) / 2)


def el_oracle(R, p=0.1):
    # dense rho grids, independent of the branch logic
    r1 = np.linspace(0, 1, 200001)
    best = max(bsc_e0(r, p) - r * R for r in r1[::50])
    fine = r1[max(0, int(np.argmax([bsc_e0(r, p) - r * R for r in r1[::50]])) * 50 - 100):][:201]
    best = max(best, max(bsc_e0(r, p) - r * R for r in fine))
    rx = np.linspace(1, 50, 49001)
    best = max(best, max(bsc_ex(r, p) - r * R for r in rx))
    return best


def test_golden_max_vectorized():
    x, v = golden_max(lambda t: -((t - np.array([0.3, 0.7])) ** 2), np.zeros(2), np.ones(2), 1e-10)
    assert np.allclose(x, [0.3, 0.7], atol=1e-8) and np.allclose(v, 0, atol=1e-15)
    x, v = golden_max(lambda t: t, np.zeros(1), np.ones(1), 1e-10)
    assert x[0] == 1.0


def test_simplex_grid():
    g = simplex_grid(3, 4)
    assert len(g) == 15 and np.allclose(g.sum(axis=1), 1) and (g >= 0).all()


def test_e0_closed_form(calc):
    assert calc.E0(0.0) == 0.0
    for rho in (0.1, 0.5, 1.0):
        assert calc.E0(rho) == pytest.approx(bsc_e0(rho, 0.1), abs=1e-12)
    assert calc.E0(1.0) == pytest.approx(-math.log(0.8), abs=1e-12)
    assert calc.Ex(1.0) == pytest.approx(calc.E0(1.0), abs=1e-12)
    assert calc.Ex(3.0) == pytest.approx(bsc_ex(3.0, 0.1), abs=1e-12)
    assert gallager_E0(1.0, U2, BSC) == pytest.approx(0.223144, abs=1e-6)
    assert gallager_Ex(1.0, U2, BSC) == pytest.approx(0.223144, abs=1e-6)


def test_e0_equals_ex_at_one_on_random_channels(rng):
    for _ in range(10):
        w = rng.dirichlet(np.ones(4), size=3)
        c = ExponentCalculator(ChannelModel(w))
        p = rng.dirichlet(np.ones(3))
        assert c.E0(1.0, p) == pytest.approx(c.Ex(1.0, p), abs=1e-12)


def test_noiseless_and_useless():
    c = ExponentCalculator(preset_bsc(0.0))
    assert c.Ex(1.0) == pytest.approx(math.log(2), abs=1e-12)
    c = ExponentCalculator(preset_bsc(0.5))
    for rho in (0.3, 1.0):
        assert c.E0(rho) == pytest.approx(0.0, abs=1e-12)
    assert c.C == pytest.approx(0.0, abs=1e-15)


def test_domain_errors(calc):
    with pytest.raises(ExponentDomainError):
        calc.E0(-0.1)
    with pytest.raises(ExponentDomainError):
        calc.Ex(0.5)
    for R in (0.0, calc.C, 0.5):
        with pytest.raises(ExponentDomainError):
            calc.E(R)
        with pytest.raises(ExponentDomainError):
            calc.Ec(R)
    with pytest.raises(ExponentDomainError):
        calc.Em(0.1, 0)


def test_rates_ordered(calc):
    assert calc.C == pytest.approx(math.log(2) - 0.3250829733914482, abs=1e-12)
    Rx, Rc = calc.expurgation_rate(), calc.critical_rate()
    assert 0 < Rx <= Rc < calc.C
    assert Rc == pytest.approx(0.1308, abs=1e-4)


@pytest.mark.parametrize("R", [0.01, 0.05, 0.12, 0.18, 0.3])
def test_el_matches_dense_grid(calc, R):
    assert calc.E_L(R).E == pytest.approx(el_oracle(R), abs=1e-5)


def test_el_behaviour_near_capacity_and_critical(calc):
    assert 0 <= calc.E_L(calc.C - 1e-4).E < 1e-3
    Rc = calc.critical_rate()
    below, above = calc.E_L(Rc - 1e-7).E, calc.E_L(Rc + 1e-7).E
    assert abs(below - above) < 1e-6
    assert calc.E_L(Rc + 1e-4).rho == pytest.approx(1.0, abs=5e-3)


def test_el_monotone_and_convex(calc):
    R = np.linspace(0.005, calc.C - 0.005, 60)
    E = np.array([calc.E_L(r).E for r in R])
    assert np.all(np.diff(E) < 0)
    # E_L is convex in R (maximum of affine functions)
    assert np.all(np.diff(E, 2) > -1e-7)


def test_general_optimizer_on_symmetric_channel():
    # a relabelled BSC that the symmetry test still recognises, plus a forced general path
    c = ExponentCalculator(BSC)
    c.symmetric = False
    pt = c.E(0.1)
    assert np.allclose(pt.p_X, U2, atol=1e-6)
    assert pt.E == pytest.approx(ExponentCalculator(BSC).E(0.1).E, abs=1e-8)


def test_z_channel_uses_nonuniform_input():
    z = ChannelModel([[1.0, 0.0], [0.3, 0.7]], "z")
    c = ExponentCalculator(z)
    assert not c.symmetric
    C, p = capacity(z)
    assert c.C == pytest.approx(C, abs=1e-10)
    pt = c.E(0.2)
    grid = np.linspace(0.01, 0.99, 981)
    oracle = max(c.E_L(0.2, [1 - q, q]).E if 0.2 < c.mutual_info_batch([1 - q, q])[0] else 0.0 for q in grid)
    assert pt.E >= oracle - 1e-6


def test_forney_exponent_grid_oracle(calc):
    R = 0.1
    E, r_o = forney_Ec(R, BSC)
    r = np.linspace(R / calc.C, 1, 4001)[1:-1]
    vals = [(1 - t) * el_oracle(R / t) for t in r[::40]]
    j = int(np.argmax(vals))
    fine = np.linspace(r[::40][max(j - 1, 0)], r[::40][min(j + 1, len(vals) - 1)], 201)
    oracle = max(max(vals), max((1 - t) * el_oracle(R / t) for t in fine[::10]))
    assert E == pytest.approx(oracle, abs=1e-5)
    assert R / calc.C < r_o < 1


def test_exponent_ordering(calc):
    for R in (0.05, 0.1, 0.2):
        E = calc.E(R).E
        Ec = calc.Ec(R).E
        Em = [calc.Em(R, m).E for m in (1, 2, 8)]
        Ei = calc.Einf(R).E
        assert Em[0] == pytest.approx(Ec, abs=1e-9)
        assert Ec < Em[1] < Em[2] <= Ei + 1e-9 < E


def test_multilevel_nondecreasing_in_levels(calc):
    vals = [calc.Em(0.1, m).E for m in (1, 2, 4, 8, 16)]
    assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))


def test_multilevel_approaches_limit(calc):
    R = 0.1
    e64, ei = calc.Em(R, 64).E, calc.Einf(R).E
    assert abs(e64 - ei) / ei < 0.05


def test_wrappers():
    assert gallager_E(0.1, BSC) == pytest.approx(E_L(0.1, U2, BSC), abs=1e-12)
    assert bz_Em(0.1, 1, BSC) == pytest.approx(forney_Ec(0.1, BSC)[0], abs=1e-9)
    assert bz_Einf(0.1, BSC) > bz_Em(0.1, 4, BSC)


def test_qary_symmetric(rng):
    c = ExponentCalculator(preset_qsc(4, 0.1))
    assert c.symmetric
    assert c.E(0.3).E > c.E(0.6).E > 0


def test_rho_cap_warning():
    c = ExponentCalculator(preset_bsc(1e-6), rho_max=2.0)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        c.E_L(1e-4)
    assert any("rho_max" in str(x.message) for x in w)
