import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from homflow import algebras, lie
from homflow import rational as rq

F = Fraction
fractions = st.fractions(min_value=-5, max_value=5, max_denominator=3)


def vec(n):
    return st.lists(fractions, min_size=n, max_size=n).map(tuple)


def e(alg, label):
    return alg.basis_element(alg.basis_labels.index(label))


@pytest.mark.parametrize("name", sorted(algebras.CORPUS))
def test_corpus_is_valid(name):
    assert lie.validate(algebras.CORPUS[name]()).valid


def test_sign_flip_breaks_jacobi_at_the_sl2_triple():
    bad = lie.from_table(
        ["a", "n+", "n-"],
        {("a", "n+"): {"n+": 1}, ("a", "n-"): {"n-": 1}, ("n+", "n-"): {"a": 1}},
    )
    rep = lie.validate(bad)
    assert not rep.valid
    assert rep.jacobi[0]["labels"] == ["a", "n+", "n-"]
    assert rep.jacobi[0]["value"] == ["2", "0", "0"]


def test_rescaled_triple_bracket_still_satisfies_jacobi():
    # [n+, n-] = c a is a Lie algebra for every c (it is sl2 rescaled)
    alg = lie.from_table(
        ["a", "n+", "n-"],
        {("a", "n+"): {"n+": 1}, ("a", "n-"): {"n-": -1}, ("n+", "n-"): {"a": 2}},
    )
    assert lie.validate(alg).valid


def test_raw_table_antisymmetry_check():
    alg = algebras.heisenberg()
    rep = lie.validate(alg, raw_pairs={(0, 1): [0, 0, 1], (1, 0): [0, 0, 1], (2, 2): [0, 0, 0]})
    assert rep.antisymmetry and rep.antisymmetry[0]["i"] == 0


def test_brackets_examples():
    s = algebras.sl2()
    assert lie.bracket(s, e(s, "a"), e(s, "n+")) == e(s, "n+")
    h = algebras.heisenberg()
    x, y, z = (e(h, t) for t in "xyz")
    assert lie.bracket(h, tuple(a + b for a, b in zip(x, y)), y) == z
    with pytest.raises(lie.LieAlgebraError):
        lie.bracket(h, (1, 0), y)


def test_ad_matrix_examples():
    s = algebras.sl2()
    assert lie.ad_matrix(s, e(s, "a")) == [[0, 0, 0], [0, 1, 0], [0, 0, -1]]
    assert rq.is_zero_matrix(lie.ad_matrix(s, s.zero()))
    h = algebras.heisenberg()
    m = lie.ad_matrix(h, (F(2), F(-3), F(5)))
    assert rq.is_zero_matrix(rq.matmul(m, m))


def test_killing_forms_and_semisimplicity():
    s = algebras.sl2()
    assert lie.killing_form(s) == [[2, 0, 0], [0, 0, 2], [0, 2, 0]]
    assert lie.is_semisimple(s) == (True, F(-8))
    assert rq.is_zero_matrix(lie.killing_form(algebras.heisenberg()))
    assert rq.is_zero_matrix(lie.killing_form(algebras.abelian(3)))
    assert not lie.is_semisimple(algebras.heisenberg())[0]
    assert not lie.is_semisimple(algebras.sl2_sum_heisenberg())[0]
    assert lie.is_semisimple(algebras.sl3())[0]


def test_series():
    assert not lie.is_solvable(algebras.sl2())
    assert lie.is_solvable(algebras.heisenberg()) and lie.is_solvable(algebras.abelian(2))
    assert lie.is_nilpotent_algebra(algebras.heisenberg())
    assert not lie.is_nilpotent_algebra(algebras.sl2())
    aff = algebras.aff1()
    assert lie.is_solvable(aff) and not lie.is_nilpotent_algebra(aff)
    assert lie.lower_central_series(aff)[-1].basis == ((0, 1),)


@pytest.mark.parametrize("name", sorted(algebras.CORPUS))
def test_semisimple_never_solvable(name):
    alg = algebras.CORPUS[name]()
    if lie.is_semisimple(alg)[0]:
        assert not lie.is_solvable(alg)


def test_centralizer_examples():
    s = algebras.sl2()
    assert lie.centralizer(s, e(s, "a")).basis == ((1, 0, 0),)
    assert lie.centralizer(s, s.zero()).dim == 3
    ss = algebras.sl2_sum_sl2()
    c = lie.centralizer(ss, e(ss, "a_1"))
    assert c.dim == 4 and c.contains(e(ss, "a_1"))
    assert all(c.contains(e(ss, f"{t}_2")) for t in ("a", "n+", "n-"))
    assert lie.center(algebras.heisenberg()).basis == ((0, 0, 1),)


CORPUS_VECTORS = st.sampled_from(sorted(algebras.CORPUS)).flatmap(
    lambda name: st.tuples(st.just(algebras.CORPUS[name]()), *[vec(algebras.CORPUS[name]().dim)] * 3)
)


@given(CORPUS_VECTORS)
def test_jacobi_on_random_elements(args):
    alg, x, y, z = args
    b = lambda u, v: lie.bracket(alg, u, v)  # noqa: E731
    total = [p + q + r for p, q, r in zip(b(x, b(y, z)), b(y, b(z, x)), b(z, b(x, y)))]
    assert not any(total)
    assert not any(b(x, x))


@given(CORPUS_VECTORS)
def test_killing_form_is_invariant(args):
    alg, x, y, z = args
    k = lie.killing_form(alg)
    form = lambda u, v: sum(u[i] * k[i][j] * v[j] for i in range(alg.dim) for j in range(alg.dim))  # noqa: E731
    assert form(x, lie.bracket(alg, y, z)) == form(lie.bracket(alg, x, y), z)


@given(CORPUS_VECTORS)
def test_centralizer_commutes_and_closes(args):
    alg, s, _, _ = args
    c = lie.centralizer(alg, s)
    assert all(not any(lie.bracket(alg, s, b)) for b in c.basis)
    assert c.is_closed()


def test_json_roundtrip_and_errors(tmp_path):
    alg = algebras.sl3()
    doc = lie.algebra_to_json(alg)
    path = tmp_path / "sl3.json"
    path.write_text(json.dumps(doc))
    back = lie.load_algebra(path)
    assert back.brackets == alg.brackets and back.basis_labels == alg.basis_labels
    with pytest.raises(lie.LieAlgebraError):
        lie.algebra_from_json({"dim": 2, "brackets": [{"i": 1, "j": 0, "coeffs": ["0", "1"]}]})
    with pytest.raises(lie.LieAlgebraError):
        lie.algebra_from_json({"dim": 2, "brackets": [{"i": 0, "j": 1, "coeffs": ["1"]}]})
    with pytest.raises(lie.LieAlgebraError):
        algebras.sl2().element([1, 2])


def test_parse_element():
    s = algebras.sl2()
    assert lie.parse_element(s, "1/2,0,3") == (F(1, 2), F(0), F(3))
