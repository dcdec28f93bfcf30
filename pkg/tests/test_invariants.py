"""Affine invariants over list lengths and integer arguments."""

from fractions import Fraction

from chcelim.core import Atom, Var, ILIST, INT
from chcelim.invariants import analyze, atom_int_invariants, length_poly
from chcelim.linarith import Lin, sat, canon_rel, EQ, LE
from conftest import load_fixture


def eqs_as_sets(rows):
    return {tuple(sorted(r.coeffs)) + ((("const", r.const),) if r.const else ())
            for r in rows}


def test_length_poly():
    from chcelim.core import Cons, IntConst, NIL
    t = Cons(IntConst(1), Cons(IntConst(2), Var("T", ILIST)))
    p = length_poly(t)
    assert p.const == 2 and p.coeff("len$T") == 1
    assert length_poly(NIL).is_const()


def test_rotate_invariants():
    inv = analyze(load_fixture("rotate"))
    # append: l0 + l1 = l2
    row = inv.length_eqs["append"][0]
    assert abs(row.coeff("d0")) == 1 and row.coeff("d0") == row.coeff("d1") \
        == -row.coeff("d2")
    # len: l0 = x1, projecting to arg2 >= 0
    ints = inv.int_invariants["len"]
    assert len(ints) == 1 and ints[0].op == LE
    assert ints[0].lin.coeff("d1") == -1
    # rotate: l1 = l2, no integer invariant
    assert inv.int_invariants["rotate"] == []


def test_insertion_sort_invariants():
    inv = analyze(load_fixture("insertion_sort"))
    names = {p: [tuple(r.coeffs) for r in rows]
             for p, rows in inv.length_eqs.items()}
    # ins grows its list by one; insertionSort preserves length
    ins_row = inv.length_eqs["ins"][0]
    assert ins_row.coeff("d1") == -ins_row.coeff("d2")
    assert abs(ins_row.const) == 1
    iso_row = inv.length_eqs["insertionSort"][0]
    assert iso_row.coeff("d0") == -iso_row.coeff("d1") and iso_row.const == 0
    assert inv.length_eqs["sumlist"] == []


def test_atom_int_invariants_instantiation():
    prog = load_fixture("rotate")
    inv = analyze(prog)
    atom = Atom("len", (Var("T", ILIST), Var("N", INT)))
    rels = atom_int_invariants(atom, prog, inv)
    assert len(rels) == 1
    # N >= 0 conjoined with N <= -1 must be unsat
    assert not sat(rels + [canon_rel(LE, Lin.var("N") + Lin.constant(1))])
