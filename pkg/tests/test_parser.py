"""Concrete-syntax parsing, error reporting, and print round-trips."""

import pytest

from chcelim.core import (Atom, Cons, IntConst, NIL, Var, ILIST, INT, IntRel,
                          ListRel, NEL)
from chcelim.parser import (ParseFailure, parse_program, print_program,
                            render_clause)

DECLS = """
:- declare sumlist(ilist:in, int:out) total_functional.
:- declare insertionSort(ilist:in, ilist:out) total_functional.
:- declare new1(int, int).
"""


def test_parse_fact_clause_2():
    p = parse_program(DECLS + "sumlist([],0).")
    c = p.clauses[0]
    assert c.head == Atom("sumlist", (NIL, IntConst(0)))
    assert c.constraint == () and c.body == ()


def test_parse_recursive_clause_3():
    p = parse_program(DECLS + "sumlist([X|Xs],M) :- M=X+N, sumlist(Xs,N).")
    c = p.clauses[0]
    assert c.head.args[0] == Cons(Var("X", INT), Var("Xs", ILIST))
    assert len(c.constraint) == 1 and isinstance(c.constraint[0], IntRel)
    assert [a.pred for a in c.body] == ["sumlist"]


def test_parse_query_clause_10():
    p = parse_program(DECLS + "false :- M=\\=N, new1(M,N).")
    c = p.clauses[0]
    assert c.is_query
    rel = c.constraint[0]
    assert isinstance(rel, IntRel) and rel.rel.op == "!="


def test_parse_list_disequality():
    p = parse_program(DECLS + ":- declare app(ilist,ilist,ilist).\n"
                      "false :- app(X,Y,Z), Z\\==Y.")
    rel = p.clauses[0].constraint[0]
    assert isinstance(rel, ListRel) and rel.op == NEL


def test_labels_numeric_and_comment():
    src = DECLS + "7. new1(0,0).\n% 12f.\nnew1(1,1).\nnew1(2,2).\n"
    p = parse_program(src)
    assert [c.id for c in p.clauses] == ["7", "12f", "c3"]


def test_undeclared_predicate_error_has_span():
    with pytest.raises(ParseFailure) as e:
        parse_program(DECLS + "false :- nope(X).")
    err = e.value.errors[0]
    assert "nope" in err.message and err.span.line >= 1


def test_arity_and_sort_errors():
    with pytest.raises(ParseFailure) as e:
        parse_program(DECLS + "false :- new1(X).")
    assert "expects 2" in str(e.value)
    with pytest.raises(ParseFailure) as e2:
        parse_program(DECLS + "false :- sumlist(X,Y), new1(X,Y).")
    assert "both as" in str(e2.value)


def test_lexical_error():
    with pytest.raises(ParseFailure) as e:
        parse_program(DECLS + "new1(0,0) ? true.")
    assert "unexpected" in str(e.value)


def test_multiple_errors_collected():
    with pytest.raises(ParseFailure) as e:
        parse_program(DECLS + "false :- a(X).\nfalse :- b(Y).\n")
    assert len(e.value.errors) == 2


def test_roundtrip_fixtures():
    import pathlib
    for name in ("insertion_sort", "rotate"):
        src = (pathlib.Path(__file__).parent.parent / "fixtures" /
               f"{name}.chc").read_text()
        p = parse_program(src)
        again = parse_program(print_program(p))
        assert p.clauses == again.clauses
        assert p.predicates == again.predicates
        assert [c.id for c in p.clauses] == [c.id for c in again.clauses]


def test_empty_program_prints_declarations_only():
    p = parse_program(DECLS)
    out = print_program(p)
    assert ":- declare sumlist(ilist:in, int:out) total_functional." in out
    again = parse_program(out)
    assert again.predicates == p.predicates and again.clauses == ()


def test_arithmetic_in_atom_argument_is_flattened():
    p = parse_program(DECLS + "new1(X+1,0) :- new1(X,0).")
    c = p.clauses[0]
    head_arg = c.head.args[0]
    assert isinstance(head_arg, Var)
    assert len(c.constraint) == 1  # fresh equality


def test_render_clause_stable():
    p = parse_program(DECLS + "sumlist([X|Xs],M) :- M=X+N, sumlist(Xs,N).")
    assert render_clause(p.clauses[0]) == \
        "sumlist([X|Xs],M) :- M=N+X, sumlist(Xs,N)."
