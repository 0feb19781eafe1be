import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _generators import CENTERLESS, classification_instances, float_counts, random_element
from homflow import algebras, classify as fc, lie
from homflow import rational as rq

F = Fraction


def poly_from_roots(real=(), imag=(), pairs=()):
    p = [F(1)]
    for r in real:
        p = rq.pmul(p, [F(-r), F(1)])
    for b in imag:  # x^2 + b^2
        p = rq.pmul(p, [F(b * b), F(0), F(1)])
    for a, b in pairs:  # (x - a)^2 + b^2
        p = rq.pmul(p, [F(a * a + b * b), F(-2 * a), F(1)])
    return p


def expected_counts(real=(), imag=(), pairs=()):
    n0 = sum(1 for r in real if r == 0) + 2 * len(imag)
    npos = sum(1 for r in real if r > 0) + 2 * sum(1 for a, _ in pairs if a > 0)
    nneg = sum(1 for r in real if r < 0) + 2 * sum(1 for a, _ in pairs if a < 0)
    n0 += 2 * sum(1 for a, _ in pairs if a == 0)
    return n0, npos, nneg


def test_halfplane_examples():
    assert fc.halfplane_root_counts([0, -1, 0, 1]) == (1, 1, 1)
    assert fc.halfplane_root_counts([0, 0, 0, 1]) == (3, 0, 0)
    assert fc.halfplane_root_counts(poly_from_roots(real=[2], imag=[1])) == (2, 1, 0)
    with pytest.raises(ValueError):
        fc.halfplane_root_counts([0, 0])


@given(
    st.lists(st.integers(-3, 3), max_size=4),
    st.lists(st.integers(1, 3), max_size=2),
    st.lists(st.tuples(st.integers(-2, 2), st.integers(1, 3)), max_size=2),
)
def test_halfplane_counts_with_multiplicity(real, imag, pairs):
    p = poly_from_roots(real, imag, pairs)
    counts = fc.halfplane_root_counts(p)
    assert counts == expected_counts(real, imag, pairs)
    assert sum(counts) == rq.pdeg(p)


def e(alg, label):
    return alg.basis_element(alg.basis_labels.index(label))


def test_classify_examples():
    s = algebras.sl2()
    c = fc.classify_flow(s, e(s, "a"))
    assert c.tag is fc.FlowTag.PARTIALLY_HYPERBOLIC and c.counts == (1, 1, 1)
    assert fc.classify_flow(s, e(s, "n+")).tag is fc.FlowTag.QUASI_UNIPOTENT
    # the compact direction n+ - n- rotates: purely imaginary spectrum
    assert fc.classify_flow(s, (0, 1, -1)).tag is fc.FlowTag.QUASI_UNIPOTENT
    h = algebras.heisenberg()
    assert fc.classify_flow(h, (F(3), F(-2), F(7))).counts == (3, 0, 0)


def _permuted(alg, perm):
    # new basis element i is old basis element perm[i]
    inv = {old: new for new, old in enumerate(perm)}
    table = {}
    for (i, j), v in alg.brackets.items():
        table[(alg.basis_labels[i], alg.basis_labels[j])] = {alg.basis_labels[k]: c for k, c in enumerate(v) if c}
    labels = [alg.basis_labels[p] for p in perm]
    return lie.from_table(labels, table), inv


@pytest.mark.parametrize("seed", range(8))
def test_classification_invariant_under_permutation_and_scaling(seed):
    r = random.Random(seed)
    name = ["sl2", "sl2+sl2", "h3", "aff1+h3"][seed % 4]
    alg = algebras.CORPUS[name]()
    x = random_element(name, r)
    base = fc.classify_flow(alg, x)
    assert fc.classify_flow(alg, tuple(2 * v for v in x)).tag is base.tag
    perm = list(range(alg.dim))
    r.shuffle(perm)
    palg, _ = _permuted(alg, perm)
    px = tuple(x[p] for p in perm)
    assert fc.classify_flow(palg, px).counts == base.counts


def test_float_oracle_agrees_on_a_small_sample():
    inst, _ = classification_instances(20, seed=7)
    for name, alg, x in inst:
        assert fc.classify_flow(alg, x).counts == float_counts(alg, x)[0], (name, x)


def test_spectral_splitting_examples():
    s = algebras.sl2()
    sp = fc.spectral_splitting(s, e(s, "a"))
    for sub, label in ((sp.p_zero, "a"), (sp.p_plus, "n+"), (sp.p_minus, "n-")):
        assert sub.shape[1] == 1
        v = sub[:, 0] / np.linalg.norm(sub[:, 0])
        assert abs(abs(v @ np.array(e(s, label), dtype=float)) - 1) < 1e-12
    assert max(sp.grading_residuals.values()) < 1e-8
    assert max(sp.invariance_residuals.values()) < 1e-8
    assert fc.spectral_splitting(s, s.zero()).p_zero.shape[1] == 3
    ss = algebras.sl2_sum_sl2()
    x = tuple(a + b for a, b in zip(e(ss, "a_1"), e(ss, "n+_2")))
    assert fc.spectral_splitting(ss, x).counts == (4, 1, 1)


def test_matrix_jordan_decomposition_on_a_jordan_block():
    a = rq.as_matrix([[2, 1, 0], [0, 2, 0], [0, 0, 3]])
    s, n = fc.matrix_jordan_decomposition(a)
    assert s == rq.as_matrix([[2, 0, 0], [0, 2, 0], [0, 0, 3]])
    assert n == rq.as_matrix([[0, 1, 0], [0, 0, 0], [0, 0, 0]])


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
def test_matrix_jordan_decomposition_properties(rows):
    a = rq.as_matrix(rows)
    s, n = fc.matrix_jordan_decomposition(a)
    assert rq.matadd(s, n) == a
    assert rq.matmul(s, n) == rq.matmul(n, s)
    assert rq.is_zero_matrix(rq.matpow(n, 3))
    f = rq.squarefree_part(rq.charpoly(s))
    assert rq.is_zero_matrix(rq.poly_at_matrix(f, s))


def test_jordan_chevalley_examples():
    s = algebras.sl2()
    x = (F(0), F(1), F(1))
    jp = fc.jordan_chevalley(s, x)
    assert jp.s == x and not any(jp.n)
    jp = fc.jordan_chevalley(s, e(s, "n+"))
    assert not any(jp.s) and jp.n == e(s, "n+")
    jp = fc.jordan_chevalley(s, e(s, "a"))
    assert jp.s == e(s, "a") and not any(jp.n)
    # a + n+ has distinct ad eigenvalues 0, 1, -1, so it is semisimple
    assert not any(fc.jordan_chevalley(s, (F(1), F(1), F(0))).n)
    ss = algebras.sl2_sum_sl2()
    x = tuple(u + v for u, v in zip(e(ss, "a_1"), e(ss, "n+_2")))
    gj = fc.group_jordan(ss, x)
    assert gj.c_generator == e(ss, "a_1") and gj.u_generator == e(ss, "n+_2")
    with pytest.raises(fc.ClassificationError):
        fc.jordan_chevalley(algebras.heisenberg(), (1, 0, 0))


@pytest.mark.parametrize("seed", range(6))
def test_jordan_chevalley_certificates(seed):
    r = random.Random(100 + seed)
    name = CENTERLESS[seed % 2]
    alg = algebras.CORPUS[name]()
    jp = fc.jordan_chevalley(alg, random_element(name, r))
    assert all(c["holds"] for c in jp.certificate.values() if isinstance(c, dict))


def test_sl2_embed_examples():
    s = algebras.sl2()
    t = fc.sl2_embed(s, e(s, "n+"))
    assert (t.a, t.n_plus, t.n_minus) == (e(s, "a"), e(s, "n+"), e(s, "n-"))

    ss = algebras.sl2_sum_sl2()
    t = fc.sl2_embed(ss, e(ss, "n+_1"), e(ss, "a_2"))
    assert all(c["holds"] for c in t.certificate.values() if isinstance(c, dict))
    assert not any(t.a[3:]) and not any(t.n_minus[3:])

    sl3 = algebras.sl3()
    t = fc.sl2_embed(sl3, e(sl3, "e3"))
    half = F(1, 2)
    assert t.a == tuple(half * (u + v) for u, v in zip(e(sl3, "h1"), e(sl3, "h2")))
    assert t.n_minus == tuple(half * v for v in e(sl3, "f3"))
    t = fc.sl2_embed(sl3, tuple(u + v for u, v in zip(e(sl3, "e1"), e(sl3, "e2"))))
    assert t.a == tuple(u + v for u, v in zip(e(sl3, "h1"), e(sl3, "h2")))


def test_sl2_embed_errors():
    s = algebras.sl2()
    with pytest.raises(fc.Sl2EmbedError):
        fc.sl2_embed(s, e(s, "a"))
    with pytest.raises(fc.Sl2EmbedError):
        fc.sl2_embed(algebras.heisenberg(), (1, 0, 0))
    with pytest.raises(fc.Sl2EmbedError):
        fc.sl2_embed(s, e(s, "n+"), e(s, "a"))
    with pytest.raises(fc.Sl2EmbedError):
        fc.sl2_embed(s, s.zero())
