import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from homflow import torus as tc

F = Fraction
GOLDEN = (1 + math.sqrt(5)) / 2


def test_resonance_lattice_examples():
    assert tc.resonance_lattice([1, 2]).basis == [(2, -1)]
    assert tc.resonance_lattice([1, F(7, 5)]).basis == [(7, -5)]
    assert tc.resonance_lattice([1, F(14142, 10000)]).rank == 1
    assert tc.resonance_lattice([1, 2, 3]).rank == 2
    with pytest.raises(tc.TorusError):
        tc.resonance_lattice([0, 0])


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), min_size=2, max_size=4))
def test_resonance_basis_is_exact(omega):
    if not any(omega):
        return
    lat = tc.resonance_lattice(omega)
    assert lat.rank == len(omega) - 1
    for k in lat.basis:
        assert sum(a * b for a, b in zip(k, omega)) == 0


def test_invariant_distribution_examples():
    basis = tc.invariant_distributions(tc.TorusFlow.rational([1, 2]), 50)
    assert basis.count == 51
    assert set(basis.modes) == {(2 * m, -m) for m in range(-25, 26)}
    assert tc.invariant_distributions(tc.TorusFlow.rational([1, 2]), 0).modes == [(0, 0)]
    golden = tc.invariant_distributions(tc.TorusFlow.numeric([1.0, GOLDEN]), 1000)
    assert golden.modes == [(0, 0)]
    assert golden.min_nonresonant >= 1e-7 and golden.rounding_bound < golden.min_nonresonant


@pytest.mark.parametrize("cutoff", [3, 10, 24])
def test_resonant_count_grows_with_cutoff(cutoff):
    omega = [1, 2]
    b = tc.resonance_lattice(omega).basis[0]
    count = tc.invariant_distributions(tc.TorusFlow.rational(omega), cutoff).count
    assert count >= 2 * (cutoff // max(abs(v) for v in b)) + 1


def test_solve_examples():
    flow = tc.TorusFlow.rational([1, 2])
    sol = tc.solve_cohomological(flow, tc.FourierFunction({(1, 0): tc.QComplex(F(1))}), 5)
    assert sol.u.coeffs == {(1, 0): tc.QComplex(F(1))} and sol.u.twopi_i_power == -1
    assert abs(sol.u.value((1, 0)) - 1 / (2j * math.pi)) < 1e-15
    assert sol.obstructions == []
    sol = tc.solve_cohomological(flow, tc.FourierFunction({(2, -1): tc.QComplex(F(1))}), 5)
    assert sol.u.coeffs == {} and sol.obstructions == [((2, -1), tc.QComplex(F(1)))]
    sol = tc.solve_cohomological(flow, tc.FourierFunction({}), 5)
    assert sol.u.coeffs == {} and sol.obstructions == []
    with pytest.raises(tc.TorusError):
        tc.solve_cohomological(flow, tc.FourierFunction({(9, 0): tc.QComplex(F(1))}), 5)


def test_generator_inverts_solution_exactly():
    r = random.Random(3)
    flow = tc.TorusFlow.rational([1, F(3, 7)])
    coeffs = {}
    for _ in range(25):
        k = (r.randint(-8, 8), r.randint(-8, 8))
        coeffs[k] = tc.QComplex(F(r.randint(-9, 9), r.randint(1, 5)), F(r.randint(-9, 9), r.randint(1, 5)))
    f = tc.FourierFunction(coeffs)
    sol = tc.solve_cohomological(flow, f, 8)
    back = tc.apply_generator(flow, sol.u)
    assert back.twopi_i_power == 0
    resonant = {k for k in f.support if flow.pairing(k) == 0}
    assert {k for k, _ in sol.obstructions} == resonant
    assert back.coeffs == {k: c for k, c in f.coeffs.items() if k not in resonant}


def test_reality_flag():
    tc.FourierFunction({(1, 0): tc.QComplex(F(1), F(2)), (-1, 0): tc.QComplex(F(1), F(-2))}, real=True)
    with pytest.raises(tc.TorusError):
        tc.FourierFunction({(1, 0): tc.QComplex(F(1), F(2))}, real=True)


def test_json_roundtrip():
    f = tc.FourierFunction({(1, -2): tc.QComplex(F(1, 3), F(-2))})
    assert tc.FourierFunction.from_json(f.to_json()).coeffs == f.coeffs


def test_continued_fractions():
    assert tc.continued_fraction(F(415, 93)) == [4, 2, 6, 7]
    assert tc.convergents([4, 2, 6, 7])[-1] == (415, 93)
    assert tc.continued_fraction(GOLDEN, 20)[:15] == [1] * 15


def test_diophantine_type():
    gold = tc.diophantine_type([1, GOLDEN], 1000)
    assert abs(gold.tau - 1) < 0.05 and gold.C > 0
    assert gold.convergent_check["records_are_convergents"]
    assert tc.diophantine_type([1, 2], 50).resonance == (2, -1)
    liou = tc.diophantine_type([1, tc.liouville_truncations(3)[-1]], 1000)
    assert liou.tau > 1.5
    three = tc.diophantine_type([1.0, math.sqrt(2), math.sqrt(3)], 20)
    assert three.tau is not None and three.resonance is None
    with pytest.raises(tc.TorusError):
        tc.diophantine_type([1], 10)


def test_truncation_schedules():
    lt = tc.liouville_truncations(4)
    assert lt[0] == F(1, 10) and lt[1] == F(11, 100)
    assert lt[3] - lt[2] == F(1, 10**24)
    gt = tc.golden_truncations(3)
    assert gt[0] == F(16, 10) and gt[2] == F(1618033, 10**6)


def test_pullback_examples():
    assert tc.pullback_distribution([[1, 0]], [3], omega=[0, 1]) == (3, 0)
    assert tc.pullback_distribution([[1, 0]], [0]) == (0, 0)
    p = [[1, 0, 0], [0, 1, 0]]
    assert tc.pullback_distribution(p, [2, -1], omega=[1, 2, F(5, 7)]) == (2, -1, 0)
    with pytest.raises(tc.TorusError):
        tc.pullback_distribution([[2, 0]], [1])
    with pytest.raises(tc.TorusError):
        tc.pullback_distribution(p, [1, 0], omega=[1, 2, 3])
