"""A small corpus of standard Lie algebras used by the tests and the CLI."""

from __future__ import annotations

from fractions import Fraction

from . import rational as rq
from .lie import LieAlgebra, direct_sum, from_matrices, from_table


def sl2() -> LieAlgebra:
    """sl2 in the normalization ``[a, n+] = n+, [a, n-] = -n-, [n+, n-] = a``.

    With the usual ``(h, e, f)`` triple this is ``a = h/2, n+ = e, n- = f/2``.
    """
    return from_table(
        ["a", "n+", "n-"],
        {("a", "n+"): {"n+": 1}, ("a", "n-"): {"n-": -1}, ("n+", "n-"): {"a": 1}},
    )


def heisenberg() -> LieAlgebra:
    return from_table(["x", "y", "z"], {("x", "y"): {"z": 1}})


def aff1() -> LieAlgebra:
    """The two-dimensional non-abelian algebra ``[x, y] = y``."""
    return from_table(["x", "y"], {("x", "y"): {"y": 1}})


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(n, tuple(f"e{i}" for i in range(n)), {})


def _unit(n: int, i: int, j: int) -> rq.Matrix:
    m = rq.zeros(n)
    m[i][j] = Fraction(1)
    return m


def sl3() -> LieAlgebra:
    """sl3 in the Chevalley basis ``h1, h2, e1, e2, e3, f1, f2, f3``.

    ``e3 = E13`` spans the highest root space.
    """
    h1 = rq.matadd(_unit(3, 0, 0), _unit(3, 1, 1), -1)
    h2 = rq.matadd(_unit(3, 1, 1), _unit(3, 2, 2), -1)
    mats = [h1, h2, _unit(3, 0, 1), _unit(3, 1, 2), _unit(3, 0, 2), _unit(3, 1, 0), _unit(3, 2, 1), _unit(3, 2, 0)]
    return from_matrices(["h1", "h2", "e1", "e2", "e3", "f1", "f2", "f3"], mats)


def sl2_sum_sl2() -> LieAlgebra:
    return direct_sum(sl2(), sl2())


def aff1_sum_heisenberg() -> LieAlgebra:
    return direct_sum(aff1(), heisenberg())


def sl2_sum_heisenberg() -> LieAlgebra:
    return direct_sum(sl2(), heisenberg())


CORPUS = {
    "sl2": sl2,
    "h3": heisenberg,
    "aff1": aff1,
    "sl3": sl3,
    "sl2+sl2": sl2_sum_sl2,
    "aff1+h3": aff1_sum_heisenberg,
    "sl2+h3": sl2_sum_heisenberg,
}
