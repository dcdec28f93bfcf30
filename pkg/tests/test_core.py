"""Substitution, renaming, matching, and canonical forms (the spec examples
for the clause/term data model)."""

import pytest

from chcelim.core import (ILIST, INT, Atom, ChcError, Clause, Cons, IntConst,
                          NIL, Subst, Var, apply_subst, canonical_clause,
                          free_vars, has_basic_types, invert_renaming,
                          match_atom, rename_apart, variant_renaming)
from chcelim.parser import parse_program

HEADER = """
:- declare sumlist(ilist:in, int:out) total_functional.
:- declare ins(int:in, ilist:in, ilist:out) total_functional.
:- declare insertionSort(ilist:in, ilist:out) total_functional.
:- declare new1(int, int).
:- declare diff(int, int, int).
"""


def clause(text: str, cid: str = "c"):
    p = parse_program(HEADER + text)
    return p.clauses[0]


def lv(n):
    return Var(n, ILIST)


def iv(n):
    return Var(n, INT)


# clause 9a renamed-apart definition, and clause 12 from the derivation
CLAUSE_9A = clause("new1(Ma,Na) :- sumlist(La,Ma), insertionSort(La,SLa), "
                   "sumlist(SLa,Na).")
CLAUSE_12 = clause("new1(M1,N1) :- M1=H+M, sumlist(T,M), insertionSort(T,ST),"
                   " ins(H,ST,SU), sumlist(SU,N1).")


def test_apply_subst_clause_9a_to_9m():
    sigma = Subst({"La": lv("T"), "Ma": iv("M"), "SLa": lv("ST")})
    out = apply_subst(sigma, CLAUSE_9A)
    want = clause("new1(M,Na) :- sumlist(T,M), insertionSort(T,ST), "
                  "sumlist(ST,Na).")
    assert canonical_clause(out) == canonical_clause(want)
    # body order and atom identity are literal, not just canonical
    assert [a.pred for a in out.body] == ["sumlist", "insertionSort",
                                          "sumlist"]
    assert out.body[0].args == (lv("T"), iv("M"))


def test_apply_subst_identity_and_ground():
    assert apply_subst(Subst(), CLAUSE_12) == CLAUSE_12
    c = clause("new1(X,X) :- sumlist([],X).")
    out = apply_subst(Subst({"X": IntConst(0)}), c)
    assert out.head.args == (IntConst(0), IntConst(0))


def test_apply_subst_rejects_sort_mismatch():
    with pytest.raises(ChcError):
        Subst().bind(iv("X"), NIL)


def test_rename_apart_examples():
    forbidden = {v.name for v in free_vars(CLAUSE_12)}
    renamed, sigma = rename_apart(CLAUSE_9A, forbidden)
    assert not ({v.name for v in free_vars(renamed)} & forbidden)
    # bijective renaming, deterministic, invertible
    renamed2, _ = rename_apart(CLAUSE_9A, forbidden)
    assert renamed == renamed2
    inv = invert_renaming(sigma)
    back = inv.clause(renamed)
    assert back.with_id(CLAUSE_9A.id) == CLAUSE_9A.with_id(CLAUSE_9A.id)


def test_rename_apart_no_vars():
    c = clause("new1(0,0).")
    renamed, sigma = rename_apart(c, {"X"})
    assert renamed == c and not sigma


def test_match_atom_inconsistent_extension():
    # pattern sumlist(SLa,Na) vs target sumlist(SU,N1) under {SLa/ST}
    partial = Subst({"SLa": lv("ST")})
    got = match_atom(Atom("sumlist", (lv("SLa"), iv("Na"))),
                     Atom("sumlist", (lv("SU"), iv("N1"))), partial)
    assert got is None


def test_match_atom_success_and_mismatch():
    got = match_atom(Atom("sumlist", (lv("La"), iv("Ma"))),
                     Atom("sumlist", (lv("T"), iv("M"))))
    assert got == Subst({"La": lv("T"), "Ma": iv("M")})
    assert match_atom(Atom("p", (iv("X"),)), Atom("q", (iv("X"),))) is None


def test_match_then_apply_round_trip():
    pattern = Atom("ins", (iv("I"), lv("Xs"), lv("Ys")))
    target = Atom("ins", (IntConst(3), Cons(IntConst(1), NIL), lv("Zs")))
    sigma = match_atom(pattern, target)
    assert sigma is not None and sigma.atom(pattern) == target


def test_has_basic_types():
    assert has_basic_types(clause("false :- M=\\=N, new1(M,N)."))
    assert not has_basic_types(CLAUSE_9A)
    assert has_basic_types(clause("new1(0,0)."))


def test_free_vars_order():
    nine = clause("new1(M,N) :- sumlist(L,M), insertionSort(L,SL), "
                  "sumlist(SL,N).")
    assert [v.name for v in free_vars(nine)] == ["M", "N", "L", "SL"]
    thirteen = clause("diff(H,Na,N1) :- ins(H,ST,SU), sumlist(SU,N1), "
                      "sumlist(ST,Na).")
    assert [v.name for v in free_vars(thirteen)] == \
        ["H", "Na", "N1", "ST", "SU"]
    assert free_vars(clause("new1(0,0).")) == []


def test_variant_renaming():
    a = clause("sumlist([X|Xs],M) :- M=X+N, sumlist(Xs,N).")
    b = clause("sumlist([A|As],K) :- K=A+B, sumlist(As,B).")
    assert variant_renaming(a, b) is not None
    c = clause("sumlist([X|Xs],M) :- M=X+X, sumlist(Xs,X).")
    assert variant_renaming(a, c) is None


def test_canonical_clause_modulo_renaming_and_derived_equalities():
    # {Na=X+N2, N1=H+X+N2} and {Na=X+N2, N1=H+Na} must compare equal
    a = clause("diff(H,Na,N1) :- H=<X, Na=X+N2, N1=H+X+N2, new1(N2,N2).")
    b = clause("diff(A,B,C) :- A=<Q, B=Q+R, C=A+B, new1(R,R).")
    assert canonical_clause(a) == canonical_clause(b)
    c = clause("diff(A,B,C) :- A=<Q, B=Q+R, C=A+B+1, new1(R,R).")
    assert canonical_clause(a) != canonical_clause(c)
