import math

import numpy as np
import pytest

from radialgram.gram import check_cnd, check_psd, group_gram
from radialgram.profiles import (
    CndProfileZ,
    DiscreteMeasure,
    Radial,
    RadialProfileZ,
    RPlusCndProfile,
    RPlusPdProfile,
    eval_cnd_rplus,
    eval_cnd_z,
    eval_pd_rplus,
    eval_pd_z,
    gauss_legendre_measure,
    geometric_sum,
    nu_t_from_mu_t,
    profile_from_json,
    profile_to_json,
    schoenberg_measure,
    schoenberg_transform,
)
from radialgram.campaigns import random_cnd_z, random_pd_z
from radialgram.words import lp_length_pow, parse_word, random_word


def dm(*atoms, b=0.0):
    return DiscreteMeasure.from_atoms(atoms, b)


def test_measure_validation_and_json():
    with pytest.raises(ValueError):
        dm((0.5, -1.0))
    with pytest.raises(ValueError):
        dm((0.5, 1.0), b=-0.1)
    mu = dm((0.5, 1.0), b=0.25)
    assert mu.to_json() == {"atoms": [{"loc": 0.5, "w": 1.0}], "b": 0.25}
    assert DiscreteMeasure.from_json(mu.to_json()) == mu
    assert mu.mass == 1.25


def test_eval_pd_z_examples():
    assert eval_pd_z(RadialProfileZ(dm((0.5, 1.0))), 3) == 0.125
    half = RadialProfileZ(dm((0.5, 0.5), (-0.5, 0.5)))
    assert [eval_pd_z(half, n) for n in (0, 1, 2)] == [1.0, 0.0, 0.25]
    one = RadialProfileZ(dm((1.0, 1.0)))
    assert all(eval_pd_z(one, n) == 1.0 for n in range(20))
    zero = RadialProfileZ(dm((0.0, 1.0)))
    assert eval_pd_z(zero, 0) == 1.0 and eval_pd_z(zero, 4) == 0.0
    with pytest.raises(ValueError):
        RadialProfileZ(dm((1.5, 1.0)))
    assert not RadialProfileZ(dm((1.5, 1.0)), strict=False).in_domain


def test_eval_cnd_z_examples():
    lin = CndProfileZ(dm((1.0, 1.0)))
    assert [eval_cnd_z(lin, n) for n in range(5)] == [0, 1, 2, 3, 4]
    ind = CndProfileZ(dm((0.0, 1.0)))
    assert eval_cnd_z(ind, 0) == 0 and all(eval_cnd_z(ind, n) == 1 for n in range(1, 6))
    assert eval_cnd_z(CndProfileZ(dm((1.0, 0.5), (0.0, 0.5))), 4) == 2.5


def test_geometric_sum():
    assert geometric_sum(1.0, 7) == 7
    assert geometric_sum(0.3, 0) == 0
    assert geometric_sum(-1.0, 3) == 1
    assert geometric_sum(0.5, 3) == pytest.approx((1 - 0.5 ** 3) / 0.5)
    with pytest.raises(ValueError):
        geometric_sum(0.5, 1.5)


def test_eval_rplus_examples():
    assert eval_pd_rplus(RPlusPdProfile(dm((0.0, 1.0))), 3.7) == 1.0
    chi = RPlusPdProfile(DiscreteMeasure(), b=1.0)
    assert eval_pd_rplus(chi, 0.0) == 1.0 and eval_pd_rplus(chi, 1e-300) == 0.0
    assert eval_pd_rplus(RPlusPdProfile(dm((1.0, 1.0))), math.log(2)) == pytest.approx(0.5, abs=1e-15)
    assert eval_cnd_rplus(RPlusCndProfile(c=1.0), 2.5) == 2.5
    step = RPlusCndProfile(b=1.0)
    assert eval_cnd_rplus(step, 0.0) == 0.0 and eval_cnd_rplus(step, 1e-300) == 1.0
    assert eval_cnd_rplus(RPlusCndProfile(nu=dm((1.0, 1.0))), math.log(2)) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        RPlusCndProfile(nu=dm((0.0, 1.0)))
    with pytest.raises(ValueError):
        RPlusCndProfile(c=-1.0)


def test_schoenberg_transform_examples():
    psi = Radial(lambda s: np.asarray(s, dtype=float), 2)
    phi = schoenberg_transform(psi, math.log(2))
    half = RadialProfileZ(dm((0.5, 1.0)))
    for w in ("e", "g1", "g1^2 g2^-1", "g3^3 g1"):
        g = parse_word(w)
        assert phi(g) == pytest.approx(eval_pd_z(half, lp_length_pow(g, 2)), rel=1e-14)
    one = schoenberg_transform(lambda g: 0.0, 1.0)
    assert one(parse_word("g1")) == 1.0
    g = parse_word("g1^2")
    vals = [schoenberg_transform(psi, t)(g) for t in (0.1, 0.5, 1.0, 3.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        schoenberg_transform(psi, 0.0)


def test_nu_t_examples():
    assert len(nu_t_from_mu_t(dm((1.0, 1.0)), 0.5)) == 0
    assert nu_t_from_mu_t(dm((0.0, 1.0)), 1.0).atoms == [(0.0, 1.0)]
    assert nu_t_from_mu_t(dm((-1.0, 0.5), (1.0, 0.5)), 2.0).atoms == [(-1.0, 0.5)]


def test_cnd_vanishes_at_identity():
    rng = np.random.default_rng(4)
    for _ in range(100):
        assert eval_cnd_z(random_cnd_z(rng), 0) == 0.0


def test_schoenberg_measure_represents_exp():
    rng = np.random.default_rng(5)
    for _ in range(30):
        prof = random_cnd_z(rng)
        for t in (1.0, 0.1):
            mu_t = schoenberg_measure(prof, t)
            assert all(-1 <= x <= 1 for x in mu_t.locs)
            assert mu_t.mass == pytest.approx(1.0, abs=1e-14)
            n = np.arange(0, 30)
            assert np.allclose(RadialProfileZ(mu_t)(n), np.exp(-t * prof(n)), atol=1e-13)


def test_nu_t_chain():
    rng = np.random.default_rng(6)
    for _ in range(30):
        prof = random_cnd_z(rng)
        n = np.arange(0, 25)
        for t in (1.0, 0.1, 0.01):
            lhs = -np.expm1(-t * prof(n)) / t
            rhs = CndProfileZ(nu_t_from_mu_t(schoenberg_measure(prof, t), t))(n)
            assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_small_t_limit_is_linear():
    rng = np.random.default_rng(7)
    for _ in range(30):
        prof = random_cnd_z(rng)
        n = np.arange(1, 16)
        psi = prof(n)
        keep = psi > 0.05
        errs = [np.abs(psi - (-np.expm1(-t * psi) / t))[keep] for t in (1e-2, 1e-3)]
        ratio = errs[0] / errs[1]
        assert np.all((ratio >= 9) & (ratio <= 11))


def test_z_profiles_pass_gram_checks():
    rng = np.random.default_rng(9)
    for _ in range(50):
        words = [random_word(rng, 6) for _ in range(int(rng.integers(2, 11)))]
        assert check_psd(group_gram(words, random_pd_z(rng).radial(2))).accepted
        assert check_cnd(group_gram(words, random_cnd_z(rng).radial(2))).accepted


def test_rplus_bounded_by_mass():
    rng = np.random.default_rng(10)
    s = np.linspace(0, 20, 401)
    for _ in range(50):
        atoms = list(zip(rng.uniform(0, 3, 3), rng.uniform(0.1, 1, 3)))
        prof = RPlusPdProfile(DiscreteMeasure.from_atoms(atoms), b=float(rng.uniform(0, 1)))
        vals = prof(s)
        assert vals[0] == pytest.approx(prof.mass, rel=1e-15)
        assert np.all(np.abs(vals) <= prof.mass * (1 + 1e-15))


def test_gauss_legendre_measure():
    mu = gauss_legendre_measure(lambda x: 0.5 * np.ones_like(x), 12, -1.0, 1.0)
    # uniform probability on [-1, 1]: m_2 = 1/3, m_4 = 1/5
    prof = RadialProfileZ(mu)
    assert prof(0) == pytest.approx(1.0) and prof(2) == pytest.approx(1 / 3) and prof(4) == pytest.approx(0.2)


@pytest.mark.parametrize("prof", [
    RadialProfileZ(DiscreteMeasure.from_atoms([(0.5, 0.75), (-1.0, 0.25)])),
    CndProfileZ(DiscreteMeasure.from_atoms([(1.0, 1.0)])),
    RPlusPdProfile(DiscreteMeasure.from_atoms([(0.5, 0.8)]), b=0.2),
    RPlusCndProfile(0.1, 0.5, 0.25, DiscreteMeasure.from_atoms([(2.0, 0.3)])),
])
def test_profile_json_roundtrip(prof):
    back = profile_from_json(profile_to_json(prof))
    s = np.array([0.0, 1.0, 2.0, 5.0])
    assert type(back) is type(prof) and np.array_equal(back(s), prof(s))
    assert profile_to_json(prof)["kind"] == prof.kind


def test_profile_json_errors():
    with pytest.raises(ValueError):
        profile_from_json({"kind": "nope"})
    with pytest.raises(ValueError):
        profile_from_json({"kind": "pd-z", "mu": {"atoms": [{"loc": 2.0, "w": 1.0}]}})
    loose = profile_from_json({"kind": "pd-z", "mu": {"atoms": [{"loc": 2.0, "w": 1.0}]}}, strict=False)
    assert loose(3) == 8.0
