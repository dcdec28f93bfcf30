import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(ROOT / "tests"))

from chcelim.core import Program
from chcelim.engine import EngineOptions, eliminate
from chcelim.oracle import ModelCache
from chcelim.parser import parse_program


def load_fixture(name: str) -> Program:
    return parse_program((FIXTURES / f"{name}.chc").read_text(), name)


def split_queries(p: Program):
    queries = [c for c in p.clauses if c.is_query]
    rest = tuple(c for c in p.clauses if not c.is_query)
    return Program(rest, p.predicates), queries


@pytest.fixture(scope="session")
def insertion_sort_program():
    return load_fixture("insertion_sort")


@pytest.fixture(scope="session")
def rotate_program():
    return load_fixture("rotate")


@pytest.fixture(scope="session")
def insertion_sort_result(insertion_sort_program):
    base, queries = split_queries(insertion_sort_program)
    return eliminate(base, queries, EngineOptions())


@pytest.fixture(scope="session")
def rotate_result(rotate_program):
    base, queries = split_queries(rotate_program)
    return eliminate(base, queries, EngineOptions())


@pytest.fixture(scope="session")
def oracle_cache():
    return ModelCache()
