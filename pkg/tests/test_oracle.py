"""Bounded least models, totality/functionality checks, implication checks,
and solver-model validation."""

import pytest

from chcelim.core import (Atom, Cons, ILIST, INT, Lemma, ListRel, NEL, NIL,
                          Program, Var)
from chcelim.oracle import (Bounds, ModelCache, bounded_least_model,
                            check_implication, check_total_functional,
                            solve_ground, validate_model)
from chcelim.parser import parse_program
from chcelim.smt2 import parse_model
from conftest import load_fixture, split_queries


def test_bounded_model_examples(insertion_sort_program):
    base, _ = split_queries(insertion_sort_program)
    m = bounded_least_model(base, Bounds(2, (0, 1)))
    assert ((1, 1), 2) in m["sumlist"]          # sum exceeds the range
    assert ((), 0) in m["sumlist"]
    tiny = bounded_least_model(base, Bounds(0, (0, 0)))
    assert ((), 0) in tiny["sumlist"]
    empty = Program((), {})
    assert bounded_least_model(empty, Bounds(1, (0, 0))) == {}


def test_bounded_model_monotonicity(insertion_sort_program):
    base, _ = split_queries(insertion_sort_program)
    small = bounded_least_model(base, Bounds(1, (0, 1)))
    big = bounded_least_model(base, Bounds(2, (-1, 1)))
    for pred, rows in small.items():
        assert rows <= big[pred]


def test_check_total_functional(insertion_sort_program, rotate_program):
    base, _ = split_queries(insertion_sort_program)
    v = check_total_functional("ins", base, Bounds(3, (-2, 2)))
    assert v.holds and v.checked_instances == 5 * 156
    rbase, _ = split_queries(rotate_program)
    v = check_total_functional("rotate", rbase, Bounds(2, (-1, 1)))
    assert v.holds


def test_total_functional_counterexample():
    p = parse_program("""
:- declare p(int:in, int:out) total_functional.
p(0,1).
p(0,2).
""")
    v = check_total_functional("p", p, Bounds(0, (0, 0)))
    assert not v.holds
    pred, in_vals, outs = v.counterexample
    assert in_vals == (0,) and len(outs) == 2


def test_solve_ground_rotate(rotate_program):
    base, _ = split_queries(rotate_program)
    out = solve_ground(base, "rotate", (2, (7, 4, 5, 9, 1)))
    assert out == [((5, 9, 1, 7, 4),)]


def test_check_implication_vacuous(rotate_program):
    base, _ = split_queries(rotate_program)
    h = Var("H", INT)
    lem = Lemma((), (Atom("len", (Var("L", ILIST), Var("M", INT))),
                     Atom("len", (Var("L", ILIST), Var("K", INT))),),
                (), (), ())
    # premise nonempty, conclusion empty: trivially true
    v = check_implication(base, lem, Bounds(2, (0, 1)))
    assert v.holds and v.checked_instances > 0


def test_check_implication_counterexample(rotate_program):
    base, _ = split_queries(rotate_program)
    # claim: every append result differs from its second argument (false)
    xs, ys, zs = Var("Xs", ILIST), Var("Ys", ILIST), Var("Zs", ILIST)
    lem = Lemma((), (Atom("append", (xs, ys, zs)),), (),
                (ListRel(NEL, ys, zs),), ())
    v = check_implication(base, lem, Bounds(2, (0, 1)))
    assert not v.holds
    assert v.counterexample is not None


MODEL_D1_D3 = """
sat
(
  (define-fun new1 ((M Int) (N Int)) Bool (= M N))
  (define-fun diff ((H Int) (N1 Int) (Na Int)) Bool (= N1 (+ H Na)))
  (define-fun new2 ((N Int)) Bool true)
)
"""


def test_validate_model_paper_d1_d3(insertion_sort_result):
    out = insertion_sort_result.program_out
    model = parse_model(MODEL_D1_D3, out)
    v = validate_model(out, model, Bounds(2, (-2, 2)),
                       functional=[("diff", 1)])
    assert v.holds and v.checked_instances > 0


def test_validate_model_all_false(rotate_result):
    from chcelim.smt2 import Model
    out = rotate_result.program_out
    v = validate_model(out, Model({}), Bounds(2, (-1, 1)))
    assert v.holds


def test_validate_model_counterexample(insertion_sort_result):
    bad = """
(
  (define-fun new1 ((M Int) (N Int)) Bool true)
  (define-fun diff ((H Int) (N1 Int) (Na Int)) Bool (= N1 (+ H Na)))
  (define-fun new2 ((N Int)) Bool true)
)
"""
    out = insertion_sort_result.program_out
    model = parse_model(bad, out)
    v = validate_model(out, model, Bounds(2, (-2, 2)))
    assert not v.holds
    clause_id, env = v.counterexample
    # the query clause false :- M =/= N, new1(M,N) is violated
    assert dict(env)["M"] != dict(env)["N"]
