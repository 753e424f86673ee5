import json

import numpy as np
import pytest

from flagdyn import base_dynamics as bd
from flagdyn.cocycle_engine import CocycleSystem, ConstantField, SymbolTable
from flagdyn.conditions import (
    CheckSettings,
    check_bounded_section,
    check_pair_realization,
    check_refinement,
    continuity_experiment,
    demo_alphabet,
    lookback_for,
    run_check,
    unique_ergodic_analysis,
    word_label,
)
from flagdyn.errors import InvalidArgument
from flagdyn.lie_structure import ThetaSet
from flagdyn.morse_chain import Resolution
from flagdyn.flags import transversal
from flagdyn.oseledets import attractor_flag, estimate_polar_exponent, periodic_spectrum, repeller_flag

from conftest import BERNOULLI, rotation_system, shift_system

SHEAR = np.array([[2.0, 1.0], [0.0, 0.5]])


def rot(t):
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


def constant_system(g):
    return CocycleSystem(bd.PeriodicOrbit(1), SymbolTable(np.asarray(g, dtype=float)[None]))


def test_constant_cocycle_margin_is_the_eigenline_sine():
    c = constant_system(SHEAR)
    rho = bd.PeriodicOrbitMeasure((0,))
    spec = periodic_spectrum(c, rho)
    b = check_bounded_section(c, rho, spec, 8, 64)
    assert np.isclose(b.min_margin, 1.5 / np.sqrt(3.25), atol=1e-12)
    assert b.passed and b.excluded == 0
    d = constant_system(np.diag([2.0, 0.5]))
    assert np.isclose(check_bounded_section(d, rho, periodic_spectrum(d, rho), 4, 64).min_margin, 1.0)
    with pytest.raises(InvalidArgument):
        check_bounded_section(c, rho, spec, 4, 64, tau=0.0)


# parabolic shear: -I plus a nilpotent part, so the attracting and repelling lines can collide
PARABOLIC = np.array([[1.0, -2.0], [2.0, -3.0]])


def shear_pair():
    return shift_system(np.array([np.diag([2.0, 0.5]), PARABOLIC]))


@pytest.mark.parametrize("j", [1, 2, 5, 10])
def test_margin_along_a_targeted_shear_word(j):
    c = shear_pair()
    # symbol 1 on coordinates -j .. j-1, symbol 0 elsewhere
    x = bd.ShiftPoint(word=(0,), patch=(-j, (1,) * (2 * j)))
    att = attractor_flag(c, x, ThetaSet.empty(2), 80)
    rep = repeller_flag(c, x, ThetaSet.empty(2), 80)
    ok, margin = transversal(att, rep)
    # A1^j e1 against A1^-j e2, with A1^j = (-1)^j (I - jN)
    assert np.isclose(margin, abs(1 - 4 * j) / (8 * j * j - 4 * j + 1), rtol=1e-8)


def test_unbounded_section_margins_shrink_with_the_sample():
    mu = bd.ProductMeasure()
    c = shear_pair()
    spec = estimate_polar_exponent(c, mu, 2000, 64, seed=0)
    m = lookback_for(spec)
    small = check_bounded_section(c, mu, spec, 1000, m, tau=1e-3, seed=1)
    large = check_bounded_section(c, mu, spec, 10_000, m, tau=1e-3, seed=1)
    assert large.min_margin < small.min_margin
    assert not large.passed
    good = shift_system(BERNOULLI)
    gspec = estimate_polar_exponent(good, mu, 2000, 64, seed=0)
    assert check_bounded_section(good, mu, gspec, 10_000, 64, tau=1e-3, seed=1).min_margin > 0.5


def test_refinement_examples():
    mu = bd.ProductMeasure()
    good = shift_system(BERNOULLI)
    spec = estimate_polar_exponent(good, mu, 1000, 32, seed=0)
    r = check_refinement(good, spec, 3)
    assert r.passed and len(r.orbits) == 5
    bad = shift_system(np.array([np.diag([2.0, 0.5]), rot(1.0)]))
    r = check_refinement(bad, estimate_polar_exponent(bad, mu, 1000, 32, seed=0), 2, names=("a", "r"))
    # the product of a and r has trace 2.5 cos 1 < 2, so it is elliptic as well
    assert [o.label for o in r.violations] == ["(r)", "(a r)"]
    vac = check_refinement(rotation_system(SHEAR), spec, 3)
    assert vac.vacuous and vac.passed and not vac.orbits


def test_demo_alphabet_violates_refinement_at_h():
    mats, w, names = demo_alphabet()
    c = CocycleSystem(bd.FullShift(w, seed=1), SymbolTable(mats))
    spec = estimate_polar_exponent(c, bd.ProductMeasure(), 2000, 64, seed=0)
    assert spec.theta.is_empty()
    r = check_refinement(c, spec, 1, names)
    assert [o.label for o in r.violations] == ["(h)"]
    assert word_label((0, 1, 1), names) == "(h g g)"


def test_necessity_conditions_fail_when_types_differ():
    c = shift_system(np.array([np.diag([2.0, 0.5]), rot(1.0)]))
    s = CheckSettings(n=1000, k=32, section_samples=100, max_period=2, resolution=Resolution(cylinder=3, fiber=64))
    rep = run_check(c, bd.ProductMeasure(), s)
    assert rep.theta_mo is not None and rep.theta_mo.is_full()
    assert rep.spectrum.theta.is_empty()
    assert rep.equal == "no" and not rep.alarm
    assert not rep.refinement.passed


def test_bernoulli_passes_all_conditions_and_is_thread_independent(bernoulli):
    s = CheckSettings(n=1000, k=32, section_samples=400, max_period=3, resolution=Resolution(cylinder=4, fiber=128))
    one = run_check(bernoulli, bd.ProductMeasure(), s, workers=1)
    four = run_check(bernoulli, bd.ProductMeasure(), s, workers=4)
    assert one.equal == "yes" and not one.alarm
    assert one.bounded_section.passed and one.att_rep.passed and one.section_containment.passed
    dump = lambda r: json.dumps(r.to_dict(), sort_keys=True, default=str)
    assert dump(one) == dump(four)


def test_bracket_verdict_without_chain_graph(bernoulli):
    s = CheckSettings(n=500, k=16, section_samples=40, max_period=2, morse=False)
    rep = run_check(bernoulli, bd.ProductMeasure(), s)
    assert rep.theta_mo is None
    assert rep.equal == "undetermined"


def test_pair_realization_on_bernoulli(bernoulli):
    spec = estimate_polar_exponent(bernoulli, bd.ProductMeasure(), 1000, 32, seed=0)
    pr = check_pair_realization(bernoulli, bd.ProductMeasure(), spec, 0.03, flags=40)
    assert pr.passed
    assert pr.forward.max() < 1e-8 and pr.backward.max() < 1e-8


def test_unique_ergodic_equivalences():
    c = rotation_system(SHEAR)
    s = CheckSettings(n=500, k=16, section_samples=64, resolution=Resolution(circle=16, fiber=128))
    out = unique_ergodic_analysis(c, s)
    cond = out["conditions"]
    assert out["hull"]["singleton"] and out["hull"]["contains_H"]
    assert cond["bounded_section"]["verdict"] == "pass"
    assert cond["refinement"] == "vacuous pass" and cond["att_rep"] == "vacuous pass"
    elliptic = unique_ergodic_analysis(rotation_system(rot(1.0)), s)
    assert elliptic["theta_mo"] == [2]


def test_continuity_baseline_row_is_exact(bernoulli):
    sigma = lambda e: ConstantField(rot(e))
    t = continuity_experiment(bernoulli, sigma, [0.05, 0.1], [1], bd.ProductMeasure(), n=400, k=16, ks=(1, 4))
    assert t.eps[0] == 0.0 and t.change[0] == 0.0
    assert t.monotone and t.envelope_ok
    assert np.all(t.change <= t.fitted_C * t.eps + 1e-15)
