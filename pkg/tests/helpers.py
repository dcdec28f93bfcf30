"""Golden-comparison helpers: structural program equality up to variable
renaming and a consistent permutation of designated predicates' arguments."""

import itertools

from chcelim.core import Atom, Clause, canonical_program


def permute_atom(a: Atom, perms: dict[str, tuple[int, ...]]) -> Atom:
    p = perms.get(a.pred)
    if p is None:
        return a
    return Atom(a.pred, tuple(a.args[i] for i in p))


def permute_clause(c: Clause, perms: dict[str, tuple[int, ...]]) -> Clause:
    return Clause(c.id,
                  permute_atom(c.head, perms) if c.head else None,
                  c.constraint,
                  tuple(permute_atom(a, perms) for a in c.body))


def programs_match(actual, expected, permutable: dict[str, int] | None = None
                   ) -> bool:
    """Clause-set equality modulo renaming, clause order, and one global
    argument permutation per predicate listed in `permutable`."""
    actual_key = canonical_program(actual)
    permutable = permutable or {}
    names = sorted(permutable)
    spaces = [list(itertools.permutations(range(permutable[n])))
              for n in names]
    for combo in itertools.product(*spaces) if names else [()]:
        perms = dict(zip(names, combo))
        cand = [permute_clause(c, perms) for c in expected]
        if canonical_program(cand) == actual_key:
            return True
    return False
