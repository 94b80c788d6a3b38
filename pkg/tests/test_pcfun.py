from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import heterobaker as hb
from heterobaker.pcfun import (NotInKLevel, inner_product_pa, pa_mean,
                               pcfun1d_from_json, pcfun1d_to_json,
                               pcfun3d_from_json, pcfun3d_to_json)

rational = st.fractions(min_value=-4, max_value=4, max_denominator=64)


def random_pc(values):
    return hb.PCFun1D.uniform([F(v) for v in values])


def test_refine_examples():
    one = hb.PCFun1D.constant(1)
    r = one.refine([F(1, 2)])
    assert r.breakpoints == (0, F(1, 2), 1) and r.values == (1, 1)
    chi = hb.wavelet(1, 0)
    r = chi.refine([F(1, 4)])
    assert r.values == (1, 1, -1)


@settings(max_examples=40, deadline=None)
@given(st.lists(rational, min_size=2, max_size=8),
       st.lists(rational, min_size=4, max_size=4),
       st.fractions(min_value=0, max_value=1, max_denominator=37))
def test_refinement_invariance(vals_f, vals_g, extra):
    f, g = random_pc(vals_f), random_pc(vals_g)
    fr = f.refine([extra])
    assert hb.inner_product(f, g) == hb.inner_product(fr, g)
    assert hb.mean(f) == hb.mean(fr)


def test_inner_product_examples():
    chi10, chi21 = hb.wavelet(1, 0), hb.wavelet(2, 1)
    assert hb.inner_product(chi10, chi10) == 1
    assert hb.inner_product(chi21, chi21) == F(1, 2)
    assert hb.inner_product(hb.PCFun1D.constant(1), chi21) == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(rational, min_size=2, max_size=8),
       st.lists(rational, min_size=3, max_size=6), rational, rational)
def test_bilinearity(vf, vg, s, t):
    f, g = random_pc(vf), random_pc(vg)
    lhs = hb.inner_product(f * s + g * t, g)
    assert lhs == s * hb.inner_product(f, g) + t * hb.inner_product(g, g)
    if any(v != 0 for v in f.values):
        assert hb.inner_product(f, f) > 0


def test_mean_project_axpy():
    f = hb.PCFun1D.build([0, F(1, 2), 1], [1, 0])
    assert hb.mean(f) == F(1, 2)
    assert hb.project_zero_mean(hb.PCFun1D.constant(F(3, 7))).equals(
        hb.PCFun1D.zero())
    chi = hb.wavelet(1, 0)
    assert hb.axpy(2, chi, chi).equals(chi * 3)


def test_from_affine():
    f = hb.from_affine(1, F(-1, 2), 1)
    assert f.values == (F(-1, 4), F(1, 4))
    assert hb.from_affine(0, F(2, 3), 3).equals(hb.PCFun1D.constant(F(2, 3)))
    for level in range(1, 6):
        assert hb.mean(hb.from_affine(1, F(-1, 2), level)) == 0


def test_osc_norm_star():
    assert hb.osc_norm_star(hb.wavelet(1, 0), 2, 1) == 2
    assert hb.osc_norm_star(hb.PCFun1D.constant(5), 2, 3) == 0
    # oscillation of chi_{2,0} on [0,1/2) is 2; the cell [1/2,1) is flat
    assert hb.osc_norm_star(hb.wavelet(2, 0), 2, 2) == 2
    with pytest.raises(NotInKLevel):
        hb.osc_norm_star(hb.PCFun1D.build([0, F(1, 3), 1], [1, 0]), 2, 2)


def test_common_refinement_cell_count():
    f = hb.PCFun1D.build([0, F(1, 3), 1], [1, 2])
    g = hb.PCFun1D.build([0, F(1, 2), 1], [3, 4])
    h = f + g
    assert h.breakpoints == (0, F(1, 3), F(1, 2), 1)


def test_pa_oracle_basics():
    pa = hb.PAFun1D.affine(1, F(-1, 2))
    assert inner_product_pa(pa, pa) == F(1, 12)
    assert pa_mean(pa) == 0
    assert pa(F(1, 4)) == F(-1, 4)


def test_json_round_trip():
    f = hb.PCFun1D.build([0, F(1, 4), 1], [F(-1, 3), F(1, 9)])
    assert pcfun1d_from_json(pcfun1d_to_json(f)).equals(f)
    G = hb.PCFun3D.build(["0", "1/2", "1"], ["0", "1"], ["0", "1/3", "1"],
                         [[[1, -1]], [["1/2", "-1/2"]]])
    assert pcfun3d_from_json(pcfun3d_to_json(G)).equals(G)


def test_evaluation_conventions():
    f = hb.PCFun1D.build([0, F(1, 2), 1], [1, 2])
    assert f(F(1, 2)) == 2      # right-hand cell at a breakpoint
    assert f(1) == 2            # last cell closed
    assert f(0) == 1
