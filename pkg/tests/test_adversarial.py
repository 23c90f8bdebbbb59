import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from advreg import perturbation as pert
from advreg.adversarial import (adversarial_loss, adversarial_loss_swapped, ideal_loss,
                                ideal_predictor, plug_in, standard_loss)
from advreg.checks import random_instance, random_piecewise_linear
from advreg.estimators import constant, exact, predict, tabulated
from advreg.functions import (custom_constant, custom_linear, isotropic, witness_iso_rough,
                              witness_iso_smooth)
from advreg.grid import unit_lattice

IDENT = custom_linear(1.0, 0.0, isotropic(1.0, 1.0, 1))


def linf(q, d=1):
    return pert.lp_ball(math.inf, q, d)


def test_no_attack_exact_predictor():
    X = unit_lattice(2, 17)
    f = witness_iso_smooth(1.0, 2)
    zero = pert.singleton0(2)
    assert adversarial_loss(f, exact(f), X, zero, pert.sample(zero, 1)).value == 0.0
    assert standard_loss(f, exact(f), X).value == 0.0


def test_identity_under_attack():
    X = unit_lattice(1, 101)
    pset = linf(0.1)
    rep = adversarial_loss(IDENT, exact(IDENT), X, pset, pert.grid_sample(pset, X.spacing))
    assert rep.value == pytest.approx(0.1, abs=1e-12)


def test_constant_zero_predictor():
    X = unit_lattice(1, 33)
    rep = standard_loss(IDENT, constant(0.0), X)
    assert rep.value == 1.0
    np.testing.assert_array_equal(rep.argmax_x, [1.0])


def test_constant_half_predictor():
    rep = standard_loss(IDENT, constant(0.5), unit_lattice(1, 33))
    assert rep.value == 0.5
    assert rep.argmax_x[0] in (0.0, 1.0)


def test_swapped_reduces_to_standard():
    X = unit_lattice(1, 65)
    zero = pert.singleton0(1)
    p = constant(0.3)
    f = witness_iso_rough(0.5)
    assert adversarial_loss_swapped(f, p, X, zero, pert.sample(zero, 1)).value == \
        standard_loss(f, p, X).value


@pytest.mark.parametrize("pset", [linf(0.1), pert.box([0.2]), pert.finite_points([[0.0], [0.05]])])
def test_ideal_loss_constant_is_zero(pset):
    X = unit_lattice(1, 101)
    f = custom_constant(1.5, isotropic(1.0, 1.0, 1))
    assert ideal_loss(f, X, pset, pert.grid_sample(pset, X.spacing)).value == 0.0


def test_ideal_loss_identity():
    X = unit_lattice(1, 101)
    pset = linf(0.1)
    assert ideal_loss(IDENT, X, pset, pert.grid_sample(pset, X.spacing)).value == \
        pytest.approx(0.1, abs=1e-12)


def test_ideal_loss_rough_witness():
    f = witness_iso_rough(0.5)
    pset = linf(0.08)
    X = unit_lattice(1, 101)
    rep = ideal_loss(f, X, pset, pert.grid_sample(pset, X.spacing))
    assert rep.value == pytest.approx(0.2, abs=1e-12)
    assert rep.argmax_x[0] == 0.0
    # on the default lattice the offsets stop at a multiple of the spacing
    Xd = unit_lattice(1)
    approx = ideal_loss(f, Xd, pset, pert.grid_sample(pset, Xd.spacing)).value
    assert 0.2 - math.sqrt(2 * Xd.grid_spacing) <= approx <= 0.2


@pytest.mark.parametrize("d", [1, 2])
def test_ideal_predictor_constant(d):
    X = unit_lattice(d, 9)
    pset = pert.lp_ball(2, 0.25, d)
    samp = pert.grid_sample(pset, X.spacing)
    star = ideal_predictor(custom_constant(-2.0, isotropic(1.0, 1.0, d)), pset, samp, X)
    np.testing.assert_array_equal(star.params["values"], -2.0)


def test_plug_in_of_exact_is_ideal():
    X = unit_lattice(1, 129)
    f = witness_iso_rough(0.5)
    pset = linf(0.0625)
    samp = pert.grid_sample(pset, X.spacing)
    a = plug_in(exact(f), pset, samp, X)
    b = ideal_predictor(f, pset, samp, X)
    np.testing.assert_array_equal(a.params["values"], b.params["values"])
    assert adversarial_loss(f, a, X, pset, samp).value == ideal_loss(f, X, pset, samp).value


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_exchange_of_suprema(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    xprime = pert.perturbed_domain(inst.X, inst.pset, inst.samp)
    p = tabulated(xprime, rng.normal(size=len(xprime)))
    a = adversarial_loss(inst.f, p, inst.X, inst.pset, inst.samp).value
    b = adversarial_loss_swapped(inst.f, p, inst.X, inst.pset, inst.samp).value
    assert abs(a - b) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_attack_dominates_standard(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    assume(inst.pset.contains_zero)
    p = exact(random_piecewise_linear(rng, inst.X.dim))
    adv = adversarial_loss(inst.f, p, inst.X, inst.pset, inst.samp).value
    assert adv >= standard_loss(inst.f, p, inst.X).value


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ideal_predictor_optimal(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    star = ideal_predictor(inst.f, inst.pset, inst.samp, inst.X)
    best = adversarial_loss(inst.f, star, inst.X, inst.pset, inst.samp).value
    assert best == pytest.approx(ideal_loss(inst.f, inst.X, inst.pset, inst.samp).value, abs=1e-12)
    vals = star.params["values"]
    for _ in range(10):
        g = tabulated(star.params["domain"], vals + 0.1 * rng.normal(size=len(vals)))
        assert best <= adversarial_loss(inst.f, g, inst.X, inst.pset, inst.samp).value + 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(-5, 5))
def test_shift_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    f = inst.f
    g = type(f)(lambda x: f.evaluator(x) + c, f.spec, "shifted")
    a = ideal_loss(f, inst.X, inst.pset, inst.samp).value
    b = ideal_loss(g, inst.X, inst.pset, inst.samp).value
    assert b == pytest.approx(a, abs=1e-9)
    pf = ideal_predictor(f, inst.pset, inst.samp, inst.X).params["values"]
    pg = ideal_predictor(g, inst.pset, inst.samp, inst.X).params["values"]
    np.testing.assert_allclose(pg, pf + c, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(L=st.floats(0.1, 5.0), q=st.floats(0.0, 0.3), p=st.sampled_from([1.0, 2.0, math.inf]),
       d=st.integers(1, 2))
def test_lipschitz_bound(L, q, p, d):
    X = unit_lattice(d, 33 if d == 1 else 9)
    f = witness_iso_smooth(L, d)  # Lipschitz constant L in the first coordinate
    pset = pert.lp_ball(p, q, d)
    samp = pert.grid_sample(pset, X.spacing)
    assert ideal_loss(f, X, pset, samp).value <= L * (pert.diameter(pset) / 2 + X.grid_spacing) + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), q=st.floats(0.01, 0.3))
def test_monotone_in_nested_samples(seed, q):
    rng = np.random.default_rng(seed)
    X = unit_lattice(1, 65)
    f = random_piecewise_linear(rng, 1)
    small, large = linf(q * 0.5), linf(q)
    a = ideal_loss(f, X, small, pert.grid_sample(small, X.spacing)).value
    b = ideal_loss(f, X, large, pert.grid_sample(large, X.spacing)).value
    assert a <= b + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_monotone_under_refinement(seed):
    rng = np.random.default_rng(seed)
    f = random_piecewise_linear(rng, 1)
    pset = linf(0.1)
    vals = []
    for res in (33, 65, 129):
        X = unit_lattice(1, res)
        vals.append(ideal_loss(f, X, pset, pert.grid_sample(pset, X.spacing)).value)
    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12


def test_plug_in_predict_outside_table_uses_nearest():
    X = unit_lattice(1, 33)
    pset = linf(0.125)
    pi = plug_in(exact(IDENT), pset, pert.grid_sample(pset, X.spacing), X)
    assert predict(pi, [0.5]) == pytest.approx(0.5)


def test_plug_in_identity_without_attack():
    X = unit_lattice(1, 65)
    zero = pert.singleton0(1)
    base = exact(witness_iso_rough(0.5))
    pi = plug_in(base, zero, pert.sample(zero, 1), X)
    np.testing.assert_array_equal(predict(pi, X.points), predict(base, X.points))


def test_plug_in_of_constant():
    X = unit_lattice(2, 9)
    pset = pert.lp_ball(1, 0.25, 2)
    pi = plug_in(constant(0.7, 2), pset, pert.grid_sample(pset, X.spacing), X)
    np.testing.assert_array_equal(pi.params["values"], 0.7)
