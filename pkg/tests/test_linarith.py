"""Exact linear arithmetic: canonical rows, satisfiability, projections."""

from fractions import Fraction

from chcelim.linarith import (EQ, LE, LT, NE, Lin, canon_rel, sat,
                              solve_equalities)


def test_lin_algebra():
    x, y = Lin.var("X"), Lin.var("Y")
    e = x + y.scale(2) - Lin.constant(3)
    assert e.coeff("Y") == 2 and e.const == -3
    assert e.subst("Y", Lin.constant(1)).const == -1
    assert (x - x).is_const()


def test_canon_rel_sign_normalization():
    a = canon_rel(EQ, Lin.var("Y") - Lin.var("X"))
    b = canon_rel(EQ, Lin.var("X") - Lin.var("Y"))
    assert a == b


def test_sat_basic():
    x = Lin.var("X")
    assert sat([canon_rel(LE, x - Lin.constant(3))])
    assert not sat([canon_rel(LT, x), canon_rel(LT, x.scale(-1))])
    # M = N + 1, M <= 0, N >= 0 is the dead rotate branch
    m, n = Lin.var("M"), Lin.var("N")
    assert not sat([canon_rel(EQ, m - n - Lin.constant(1)),
                    canon_rel(LE, m), canon_rel(LE, n.scale(-1)) ,
                    ][:2] + [canon_rel(LE, n.scale(-1))])


def test_sat_integrality_of_strict():
    # X < 1 and X > -1 has the single integer solution 0
    x = Lin.var("X")
    assert sat([canon_rel(LT, x - Lin.constant(1)),
                canon_rel(LT, x.scale(-1) - Lin.constant(1))])
    # X < 1 and X > 0 has none over Z
    assert not sat([canon_rel(LT, x - Lin.constant(1)),
                    canon_rel(LT, x.scale(-1))])


def test_sat_disequalities():
    x = Lin.var("X")
    assert not sat([canon_rel(EQ, x), canon_rel(NE, x)])
    assert sat([canon_rel(NE, x)])
    # X = Y, X != Y is unsat after substitution
    y = Lin.var("Y")
    assert not sat([canon_rel(EQ, x - y), canon_rel(NE, x - y)])


def test_solve_equalities():
    x, y, z = Lin.var("X"), Lin.var("Y"), Lin.var("Z")
    sols = solve_equalities([x - y - Lin.constant(1), z - x], ["Z", "X"])
    assert sols is not None
    assert sols["X"] == y + Lin.constant(1)
    assert sols["Z"] == y + Lin.constant(1)
    assert solve_equalities([Lin.constant(1)], []) is None
