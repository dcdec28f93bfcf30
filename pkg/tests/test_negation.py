"""Constructor-complement synthesis of not_exists_* predicates."""

import itertools

import pytest

from chcelim.core import Program
from chcelim.negation import (NegSpec, UnsupportedShape, eliminate_negation,
                              not_exists_name, ordinal)
from chcelim.oracle import Bounds, solve_ground
from chcelim.parser import parse_program
from chcelim.core import IN, PredicateInfo
from conftest import load_fixture, split_queries
from helpers import programs_match

EXPECTED_15_17 = parse_program("""
:- declare not_exists_2nd_append(ilist, ilist).
15. not_exists_2nd_append([X|Xs],[]).
16. not_exists_2nd_append([X|Xs],[Y|Ys]) :- X=\\=Y.
17. not_exists_2nd_append([X|Xs],[Y|Ys]) :- X=Y, not_exists_2nd_append(Xs,Ys).
""").clauses


def test_names():
    assert not_exists_name("append", (1,)) == "not_exists_2nd_append"
    assert not_exists_name("append", (0,)) == "not_exists_1st_append"
    assert ordinal(3) == "3rd" and ordinal(11) == "11th"


def test_clauses_15_17_exact(rotate_program):
    base, _ = split_queries(rotate_program)
    spec = NegSpec("append", (0, 2), (1,), "not_exists_2nd_append")
    got = eliminate_negation(spec, base)
    assert len(got) == 3
    assert programs_match(got, EXPECTED_15_17)


def test_first_position_complement_is_correct(rotate_program):
    base, _ = split_queries(rotate_program)
    spec = NegSpec("append", (1, 2), (0,), "not_exists_1st_append")
    clauses = eliminate_negation(spec, base)
    info = PredicateInfo("not_exists_1st_append", ("ilist", "ilist"),
                         (IN, IN), False)
    prog = base.extended(clauses, [info])
    bounds = Bounds(3, (-1, 1))
    for c in bounds.lists():
        for d in bounds.lists():
            holds = bool(solve_ground(prog, "not_exists_1st_append", (c, d)))
            is_suffix = d[len(d) - len(c):] == c if len(c) <= len(d) else False
            assert holds == (not is_suffix), (c, d)


def test_total_projection_gives_empty_complement(rotate_program):
    base, _ = split_queries(rotate_program)
    spec = NegSpec("append", (0, 1), (2,), "not_exists_3rd_append")
    assert eliminate_negation(spec, base) == []


def test_unsupported_shapes(rotate_program):
    base, _ = split_queries(rotate_program)
    # rotate's clauses call append: not a pure self-recursive shape
    with pytest.raises(UnsupportedShape):
        eliminate_negation(NegSpec("rotate", (1, 2), (0,), "n"), base)
    # len hides an integer computed by a constraint
    with pytest.raises(UnsupportedShape):
        eliminate_negation(NegSpec("len", (0,), (1,), "n2"), base)


def test_mutual_exclusion_bounded(rotate_program):
    base, _ = split_queries(rotate_program)
    spec = NegSpec("append", (0, 2), (1,), "not_exists_2nd_append")
    info = PredicateInfo("not_exists_2nd_append", ("ilist", "ilist"),
                         (IN, IN), False)
    prog = base.extended(eliminate_negation(spec, base), [info])
    bounds = Bounds(2, (-1, 1))
    for c in bounds.lists():
        for g in bounds.lists():
            not_e = bool(solve_ground(prog, "not_exists_2nd_append", (c, g)))
            witness = len(c) <= len(g) and g[:len(c)] == c
            assert not_e == (not witness)
