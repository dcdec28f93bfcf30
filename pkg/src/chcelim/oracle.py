"""Bounded ground semantics: least models over finite list/integer domains,
and the exhaustive checks used as the machine-checked soundness surrogate
(lemma implications, totality/functionality, solver-model validity).

Ground values are Python ints and tuples of ints (for lists).  Integer
arithmetic inside constraints is exact and unbounded; the bounds only limit
which ground list terms exist and which values free variables range over.

The fixpoint is semi-naive (delta-driven) and the conjunction solver uses a
single mutable environment with an undo trail, so the checks stay in the
seconds range at the default bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Union

from .core import (ILIST, INT, Atom, BoolLit, Clause, Cons, ConstraintAtom,
                   IntConst, IntRel, Lemma, ListRel, LinTerm, Nil, Program,
                   Term, Var, constraint_vars, free_vars, term_vars, EQL, NEL)
from .linarith import EQ, LE, LT, NE
from .smt2 import Model, feval

GroundVal = Union[int, tuple]
Env = dict[str, GroundVal]


@dataclass(frozen=True)
class Bounds:
    """max_list_len and int_range bound the term universe (list lengths and
    list elements / enumerated integers).  Derived integer arguments of facts
    are kept up to int_fact_cap in magnitude (None = a generous automatic cap)
    so that counter-carrying predicates like rotate stay finite."""

    max_list_len: int = 4
    int_range: tuple[int, int] = (-2, 2)
    fixpoint_cap: int = 2_000_000
    int_fact_cap: Optional[int] = None

    def __post_init__(self):
        if self.max_list_len < 0 or self.int_range[0] > self.int_range[1]:
            raise ValueError("empty bounds")

    def grown(self, extra: int = 1) -> "Bounds":
        return Bounds(self.max_list_len + extra, self.int_range,
                      self.fixpoint_cap, self.int_fact_cap)

    def fact_cap(self) -> int:
        if self.int_fact_cap is not None:
            return self.int_fact_cap
        m = max(abs(self.int_range[0]), abs(self.int_range[1]), 1)
        return m * (self.max_list_len + 1)

    def ints(self) -> list[int]:
        lo, hi = self.int_range
        return list(range(lo, hi + 1))

    def capped_ints(self) -> list[int]:
        c = self.fact_cap()
        return list(range(-c, c + 1))

    def lists(self) -> list[tuple]:
        return _lists_upto(self.max_list_len, self.int_range)

    def domain(self, sort: str) -> list[GroundVal]:
        if sort == INT:
            return self.ints()
        if sort == ILIST:
            return self.lists()
        return [False, True]


import functools


@functools.lru_cache(maxsize=32)
def _lists_upto(max_len: int, int_range: tuple[int, int]) -> list[tuple]:
    rng = range(int_range[0], int_range[1] + 1)
    out: list[tuple] = []
    for n in range(max_len + 1):
        out.extend(itertools.product(rng, repeat=n))
    return out


@dataclass
class Verdict:
    holds: bool
    counterexample: Optional[tuple] = None
    checked_instances: int = 0

    def __post_init__(self):
        if not self.holds and self.counterexample is None:
            raise ValueError("failing verdict requires a counterexample")


class OracleError(Exception):
    pass


class CapExceeded(OracleError):
    def __init__(self, partial):
        super().__init__("fixpoint cap exceeded")
        self.partial = partial


# ---------------------------------------------------------------------------
# Ground evaluation helpers
# ---------------------------------------------------------------------------

def eval_term(t: Term, env: Env) -> Optional[GroundVal]:
    if isinstance(t, Var):
        return env.get(t.name)
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, Nil):
        return ()
    if isinstance(t, Cons):
        h = eval_term(t.head, env)
        if h is None:
            return None
        tl = eval_term(t.tail, env)
        if tl is None:
            return None
        return (h,) + tl  # type: ignore[operator]
    total = t.lin.const
    for v, c in t.lin.coeffs:
        if v not in env:
            return None
        total += c * env[v]
    if total.denominator != 1:
        return None
    return int(total)


def match_ground(t: Term, val: GroundVal, env: Env,
                 trail: Optional[list[str]] = None) -> bool:
    """Extend env so t evaluates to val; records new bindings on the trail."""
    if isinstance(t, Var):
        if t.name in env:
            return env[t.name] == val
        env[t.name] = val
        if trail is not None:
            trail.append(t.name)
        return True
    if isinstance(t, IntConst):
        return val == t.value
    if isinstance(t, Nil):
        return val == ()
    if isinstance(t, Cons):
        if not isinstance(val, tuple) or not val:
            return False
        return match_ground(t.head, val[0], env, trail) and \
            match_ground(t.tail, val[1:], env, trail)
    got = eval_term(t, env)
    return got is not None and got == val


def _compile_rel(ca: IntRel) -> Optional[tuple[tuple[tuple[str, int], ...], int]]:
    """Integer coefficient view of an IntRel, or None when fractional."""
    coeffs = []
    for v, c in ca.rel.lin.coeffs:
        if c.denominator != 1:
            return None
        coeffs.append((v, int(c)))
    if ca.rel.lin.const.denominator != 1:
        return None
    return tuple(coeffs), int(ca.rel.lin.const)


_REL_CACHE: dict[int, tuple] = {}


def _compiled(ca: IntRel):
    key = id(ca)
    hit = _REL_CACHE.get(key)
    if hit is None or hit[0] is not ca:
        hit = (ca, _compile_rel(ca))
        _REL_CACHE[key] = hit
    return hit[1]


def eval_constraint(ca: ConstraintAtom, env: Env) -> Optional[bool]:
    """None when not yet fully bound."""
    if isinstance(ca, IntRel):
        comp = _compiled(ca)
        if comp is not None:
            coeffs, const = comp
            total = const
            for v, c in coeffs:
                val = env.get(v)
                if val is None:
                    return None
                total += c * val
        else:
            total = ca.rel.lin.const
            for v, c in ca.rel.lin.coeffs:
                if v not in env:
                    return None
                total += c * env[v]
        op = ca.rel.op
        if op == EQ:
            return total == 0
        if op == NE:
            return total != 0
        if op == LE:
            return total <= 0
        return total < 0
    if isinstance(ca, ListRel):
        a = eval_term(ca.lhs, env)
        if a is None:
            return None
        b = eval_term(ca.rhs, env)
        if b is None:
            return None
        return (a == b) if ca.op == EQL else (a != b)
    return ca.value if isinstance(ca, BoolLit) else None


def _solve_int_eq(ca: IntRel, env: Env) -> Optional[tuple[str, int]]:
    """If exactly one variable of an equality is unbound, solve for it."""
    if ca.rel.op != EQ:
        return None
    comp = _compiled(ca)
    if comp is None:
        return None
    coeffs, const = comp
    unbound = None
    rest = const
    for v, c in coeffs:
        val = env.get(v)
        if val is None:
            if unbound is not None:
                return None
            unbound = (v, c)
        else:
            rest += c * val
    if unbound is None:
        return None
    v, c = unbound
    if rest % c != 0:
        return None
    return v, -(rest // c)


# ---------------------------------------------------------------------------
# Relation store with incremental indexes
# ---------------------------------------------------------------------------

class RelStore:
    def __init__(self, preds: Sequence[str]):
        self.rows: dict[str, dict[tuple, None]] = {p: {} for p in preds}
        self._index: dict[tuple, dict] = {}

    @staticmethod
    def from_facts(facts: dict[str, set[tuple] | dict]) -> "RelStore":
        st = RelStore(list(facts))
        for p, rows in facts.items():
            for r in sorted(rows, key=_sortkey_tuple):
                st.add(p, r)
        return st

    def facts(self) -> dict[str, set[tuple]]:
        return {p: set(rows) for p, rows in self.rows.items()}

    def has(self, pred: str, row: tuple) -> bool:
        return row in self.rows.get(pred, ())

    def add(self, pred: str, row: tuple) -> bool:
        table = self.rows.setdefault(pred, {})
        if row in table:
            return False
        table[row] = None
        for (p, mask), ix in self._index.items():
            if p == pred:
                k = tuple(v for v, m in zip(row, mask) if m)
                ix.setdefault(k, []).append(row)
        return True

    def count(self) -> int:
        return sum(len(t) for t in self.rows.values())

    def all(self, pred: str) -> list[tuple]:
        return list(self.rows.get(pred, ()))

    def lookup(self, pred: str, mask: tuple[bool, ...], key: tuple
               ) -> list[tuple]:
        if not any(mask):
            return self.all(pred)
        ix_key = (pred, mask)
        ix = self._index.get(ix_key)
        if ix is None:
            ix = {}
            for row in self.rows.get(pred, ()):
                k = tuple(v for v, m in zip(row, mask) if m)
                ix.setdefault(k, []).append(row)
            self._index[ix_key] = ix
        return ix.get(key, [])


def _sortkey_val(v: GroundVal):
    if isinstance(v, tuple):
        return (1, len(v), v)
    return (0, 0, (v,))


def _sortkey_tuple(row: tuple):
    return tuple(_sortkey_val(v) for v in row)


# ---------------------------------------------------------------------------
# Conjunction solving (shared by model computation and lemma checking)
# ---------------------------------------------------------------------------

def _element_vars(atoms: Sequence[Atom],
                  constraints: Sequence[ConstraintAtom]) -> set[str]:
    """Integer variables occurring inside list constructors (these range over
    the integer range; other integer variables are computed when possible)."""
    out: set[str] = set()

    def walk(t: Term, inside: bool):
        if isinstance(t, Var):
            if inside and t.sort == INT:
                out.add(t.name)
        elif isinstance(t, Cons):
            walk(t.head, True)
            walk(t.tail, inside)

    for a in atoms:
        for t in a.args:
            walk(t, False)
    for ca in constraints:
        if isinstance(ca, ListRel):
            walk(ca.lhs, False)
            walk(ca.rhs, False)
    return out


def iter_solutions(atoms: Sequence[Atom], constraints: Sequence[ConstraintAtom],
                   env0: Env, store: RelStore, bounds: Bounds,
                   var_sorts: dict[str, str],
                   enumerate_free: bool = True,
                   wide_ints: bool = False) -> Iterator[Env]:
    """All extensions of env0 satisfying the conjunction, deterministically.

    Yields snapshots of the environment (copies); internally a single mutable
    environment with an undo trail is used.  With wide_ints, free non-element
    integer variables range over the capped fact range instead of int_range
    (used during model construction for counter arguments)."""
    elem_vars = _element_vars(atoms, constraints)
    wide_domain = bounds.capped_ints() if wide_ints else None
    env: Env = dict(env0)
    trail: list[str] = []

    def undo(mark: int):
        while len(trail) > mark:
            del env[trail.pop()]

    def bind(name: str, val: GroundVal):
        env[name] = val
        trail.append(name)

    def step(pending_atoms: tuple[Atom, ...],
             pending_cs: tuple[ConstraintAtom, ...]) -> Iterator[Env]:
        mark = len(trail)
        try:
            # propagate constraints to a fixpoint
            cs = list(pending_cs)
            changed = True
            while changed:
                changed = False
                for ca in list(cs):
                    val = eval_constraint(ca, env)
                    if val is True:
                        cs.remove(ca)
                        changed = True
                    elif val is False:
                        return
                    elif isinstance(ca, IntRel):
                        sol = _solve_int_eq(ca, env)
                        if sol is not None:
                            bind(*sol)
                            cs.remove(ca)
                            changed = True
                    elif isinstance(ca, ListRel) and ca.op == EQL:
                        a = eval_term(ca.lhs, env)
                        b = eval_term(ca.rhs, env)
                        if (a is None) != (b is None):
                            known = a if a is not None else b
                            patt = ca.rhs if a is not None else ca.lhs
                            if isinstance(known, tuple) and \
                                    len(known) <= bounds.max_list_len and \
                                    match_ground(patt, known, env, trail):
                                cs.remove(ca)
                                changed = True
                            else:
                                return
            if not pending_atoms:
                if not cs:
                    yield dict(env)
                    return
                if not enumerate_free:
                    return
                unbound: list[Var] = []
                for ca in cs:
                    for v in constraint_vars(ca):
                        if v.name not in env and all(
                                v.name != u.name for u in unbound):
                            unbound.append(v)
                if not unbound:
                    return
                unbound.sort(key=lambda v: (
                    v.sort == INT and v.name not in elem_vars, v.name))
                v = unbound[0]
                sort = var_sorts.get(v.name, v.sort)
                if sort == INT and wide_domain is not None \
                        and v.name not in elem_vars:
                    domain: Sequence[GroundVal] = wide_domain
                else:
                    domain = bounds.domain(sort)
                for val in domain:
                    m2 = len(trail)
                    bind(v.name, val)
                    yield from step((), tuple(cs))
                    undo(m2)
                return
            # pick the atom with the most bound argument positions
            best_i, best_score = 0, -1
            for i, a in enumerate(pending_atoms):
                score = sum(1 for t in a.args if eval_term(t, env) is not None)
                if score > best_score:
                    best_i, best_score = i, score
            atom = pending_atoms[best_i]
            rest = pending_atoms[:best_i] + pending_atoms[best_i + 1:]
            mask = tuple(eval_term(t, env) is not None for t in atom.args)
            key = tuple(v for t, m in zip(atom.args, mask)
                        if m for v in [eval_term(t, env)])
            for row in store.lookup(atom.pred, mask, key):
                m2 = len(trail)
                ok = True
                for t, v in zip(atom.args, row):
                    if not match_ground(t, v, env, trail):
                        ok = False
                        break
                if ok:
                    yield from step(rest, tuple(cs))
                undo(m2)
        finally:
            undo(mark)

    yield from step(tuple(atoms), tuple(constraints))


# ---------------------------------------------------------------------------
# Bounded least model (semi-naive)
# ---------------------------------------------------------------------------

def bounded_least_model(program: Program, bounds: Bounds
                        ) -> dict[str, set[tuple]]:
    store = _bounded_store(program, bounds)
    return store.facts()


def _spine_depths(head: Atom) -> dict[str, int]:
    """How many cons constructors sit above each variable of the head (list
    variables only; used to clip enumeration domains)."""
    out: dict[str, int] = {}

    def walk(t: Term, d: int):
        if isinstance(t, Var):
            if t.sort == ILIST:
                out[t.name] = min(out.get(t.name, 99), d)
        elif isinstance(t, Cons):
            walk(t.head, d + 1)
            walk(t.tail, d + 1)

    for t in head.args:
        walk(t, 0)
    return out


def _bounded_store(program: Program, bounds: Bounds) -> RelStore:
    store = RelStore(list(program.predicates))
    lo, hi = bounds.int_range
    cap = bounds.fact_cap()

    def row_within(row: tuple) -> bool:
        for v in row:
            if isinstance(v, tuple):
                if len(v) > bounds.max_list_len or \
                        any(not (lo <= x <= hi) for x in v):
                    return False
            elif v is None:
                return False
            elif isinstance(v, int) and abs(v) > cap:
                return False
        return True

    clause_info = []
    for c in program.clauses:
        if c.head is None:
            continue
        var_sorts = {v.name: v.sort for v in free_vars(c)}
        head_elems = _element_vars((c.head,), ())
        head_vars = []
        for t in c.head.args:
            for v in term_vars(t):
                if all(v.name != w.name for w in head_vars):
                    head_vars.append(v)
        depths = _spine_depths(c.head)
        clause_info.append((c, var_sorts, head_vars, head_elems, depths))

    def head_domain(v: Var, head_elems: set[str],
                    depths: dict[str, int]) -> list[GroundVal]:
        if v.sort == INT and v.name not in head_elems:
            return bounds.capped_ints()
        if v.sort == ILIST:
            room = bounds.max_list_len - depths.get(v.name, 0)
            return _lists_upto(max(room, 0), bounds.int_range)
        return bounds.domain(v.sort)

    def derive(c: Clause, var_sorts, head_vars, head_elems, depths,
               atoms: Sequence[Atom], env0: Env, out: list[tuple]):
        for env in iter_solutions(atoms, c.constraint, env0, store, bounds,
                                  var_sorts, wide_ints=True):
            missing = [v for v in head_vars if v.name not in env]
            if missing:
                for extra in itertools.product(
                        *[head_domain(v, head_elems, depths)
                          for v in missing]):
                    env2 = dict(env)
                    env2.update({v.name: x for v, x in zip(missing, extra)})
                    row = tuple(eval_term(t, env2) for t in c.head.args)
                    if row_within(row):
                        out.append(row)
            else:
                row = tuple(eval_term(t, env) for t in c.head.args)
                if row_within(row):
                    out.append(row)

    # round 0: all clauses against the empty store
    new_rows: list[tuple[str, tuple]] = []
    for c, var_sorts, head_vars, head_elems, depths in clause_info:
        out: list[tuple] = []
        derive(c, var_sorts, head_vars, head_elems, depths, c.body, {}, out)
        for row in out:
            new_rows.append((c.head.pred, row))
    total = 0
    while new_rows:
        delta: dict[str, list[tuple]] = {p: [] for p in program.predicates}
        for pred, row in new_rows:
            if store.add(pred, row):
                delta[pred].append(row)
                total += 1
                if total > bounds.fixpoint_cap:
                    raise CapExceeded(store.facts())
        if not any(delta.values()):
            break
        new_rows = []
        for c, var_sorts, head_vars, head_elems, depths in clause_info:
            if not c.body:
                continue
            for j, atom in enumerate(c.body):
                drows = delta.get(atom.pred)
                if not drows:
                    continue
                rest = c.body[:j] + c.body[j + 1:]
                for row in drows:
                    env: Env = {}
                    ok = True
                    for t, v in zip(atom.args, row):
                        if not match_ground(t, v, env):
                            ok = False
                            break
                    if not ok:
                        continue
                    out = []
                    derive(c, var_sorts, head_vars, head_elems, depths,
                           rest, env, out)
                    for r in out:
                        if not store.has(c.head.pred, r):
                            new_rows.append((c.head.pred, r))
    return store


# ---------------------------------------------------------------------------
# Ground functional evaluation (the "tiny evaluator")
# ---------------------------------------------------------------------------

class EvaluatorStuck(OracleError):
    pass


class NonTerminating(OracleError):
    pass


def solve_ground(program: Program, pred: str, in_vals: tuple,
                 _memo: Optional[dict] = None, _depth: int = 0,
                 max_depth: int = 400) -> list[tuple]:
    """All Out-position tuples derivable for the given ground In-position
    values, by clause-directed recursive evaluation.  Exact (no bounds)."""
    info = program.predicates[pred]
    if not info.modes:
        raise OracleError(f"{pred} has no declared modes")
    if _depth > max_depth:
        raise NonTerminating(f"evaluation depth exceeded for {pred}")
    memo = _memo if _memo is not None else {}
    key = (pred, in_vals)
    if key in memo:
        val = memo[key]
        if val is None:
            raise NonTerminating(f"cyclic evaluation of {pred}{in_vals}")
        return val
    memo[key] = None
    outs: list[tuple] = []
    in_pos = info.in_positions()
    out_pos = info.out_positions()
    for c in program.clauses_for(pred):
        env: Env = {}
        ok = True
        for p, v in zip(in_pos, in_vals):
            if not match_ground(c.head.args[p], v, env):
                ok = False
                break
        if not ok:
            continue
        for sol_env in _eval_body(program, c, env, memo, _depth):
            row = tuple(eval_term(c.head.args[p], sol_env) for p in out_pos)
            if any(v is None for v in row):
                raise EvaluatorStuck(
                    f"clause {c.id} leaves an output unbound for {pred}{in_vals}")
            if row not in outs:
                outs.append(row)
    memo[key] = outs
    return outs


def _eval_body(program: Program, c: Clause, env0: Env,
               memo: dict, depth: int) -> Iterator[Env]:
    items: list = list(c.constraint) + list(c.body)

    def step(pending: list, env: Env) -> Iterator[Env]:
        while True:
            progress = False
            for it in list(pending):
                if isinstance(it, (IntRel, ListRel, BoolLit)):
                    val = eval_constraint(it, env)
                    if val is True:
                        pending.remove(it)
                        progress = True
                    elif val is False:
                        return
                    elif isinstance(it, IntRel):
                        sol = _solve_int_eq(it, env)
                        if sol is not None:
                            env = dict(env)
                            env[sol[0]] = sol[1]
                            pending.remove(it)
                            progress = True
                    elif isinstance(it, ListRel) and it.op == EQL:
                        a = eval_term(it.lhs, env)
                        b = eval_term(it.rhs, env)
                        if (a is None) != (b is None):
                            env = dict(env)
                            known = a if a is not None else b
                            unk = it.rhs if a is not None else it.lhs
                            if match_ground(unk, known, env):
                                pending.remove(it)
                                progress = True
                            else:
                                return
            if not progress:
                break
        if not pending:
            yield env
            return
        for it in pending:
            if isinstance(it, Atom):
                info = program.predicates[it.pred]
                if not info.modes:
                    break
                ins = tuple(eval_term(it.args[p], env)
                            for p in info.in_positions())
                if any(v is None for v in ins):
                    continue
                rest = [x for x in pending if x is not it]
                for out_row in solve_ground(program, it.pred, ins, memo,
                                            depth + 1):
                    env2 = dict(env)
                    good = True
                    for p, v in zip(info.out_positions(), out_row):
                        if not match_ground(it.args[p], v, env2):
                            good = False
                            break
                    if good:
                        yield from step(list(rest), env2)
                return
        raise EvaluatorStuck(f"cannot schedule body of clause {c.id}")

    yield from step(items, dict(env0))


def check_total_functional(pred: str, program: Program, bounds: Bounds
                           ) -> Verdict:
    info = program.predicates[pred]
    if not info.modes:
        raise OracleError(f"{pred} declared without modes")
    in_domains = [bounds.domain(info.arg_sorts[p]) for p in info.in_positions()]
    checked = 0
    memo: dict = {}
    for in_vals in itertools.product(*in_domains):
        checked += 1
        try:
            outs = solve_ground(program, pred, in_vals, memo)
        except OracleError as e:
            return Verdict(False, (pred, in_vals, f"evaluation failed: {e}"),
                           checked)
        if len(outs) != 1:
            return Verdict(False, (pred, in_vals, tuple(outs)), checked)
    return Verdict(True, None, checked)


# ---------------------------------------------------------------------------
# Implication (lemma) checking
# ---------------------------------------------------------------------------

class ModelCache:
    """Shares bounded stores between repeated oracle checks of one program."""

    def __init__(self):
        self._stores: dict[tuple, RelStore] = {}
        self._pins: list[Program] = []

    def store(self, program: Program, bounds: Bounds) -> RelStore:
        key = (id(program), bounds)
        if key not in self._stores:
            self._pins.append(program)
            self._stores[key] = _bounded_store(program, bounds)
        return self._stores[key]


def _item_vars(item) -> set[str]:
    if isinstance(item, Atom):
        return {v.name for t in item.args for v in term_vars(t)}
    return {v.name for v in constraint_vars(item)}


def _symbolic_failing(v: str, dom: Sequence[GroundVal], wits: list[Env],
                      dep_cs: Sequence[ConstraintAtom]
                      ) -> Optional[list[GroundVal]]:
    """For a single free universal v with purely relational residue, compute
    the set of domain values for which NO witness satisfies the residue.
    Returns None when a constraint shape is unsupported (caller falls back).

    Per witness the residue either excludes finitely many values (badset) or
    admits finitely many (goodset); the failing set intersects them."""
    if not wits:
        return list(dom)
    per_wit: list[tuple[str, set]] = []
    for w in wits:
        bad: set = set()
        good: Optional[set] = None
        for ca in dep_cs:
            if isinstance(ca, ListRel):
                a = eval_term(ca.lhs, w)
                b = eval_term(ca.rhs, w)
                if (a is None) == (b is None):
                    return None
                side = ca.lhs if a is None else ca.rhs
                if not isinstance(side, Var) or side.name != v:
                    return None
                other = b if a is None else a
                if ca.op == NEL:
                    bad.add(other)
                else:
                    new_good = {other}
                    good = new_good if good is None else (good & new_good)
            elif isinstance(ca, IntRel):
                comp = _compile_rel(ca)
                if comp is None:
                    return None
                coeffs, const = comp
                cv, rest, ok = 0, const, True
                for name, c in coeffs:
                    if name == v:
                        cv = c
                    elif name in w:
                        rest += c * w[name]
                    else:
                        ok = False
                if not ok or cv == 0:
                    return None
                if ca.rel.op == EQ:
                    vals = {-(rest // cv)} if rest % cv == 0 else set()
                    good = vals if good is None else (good & vals)
                elif ca.rel.op == NE:
                    if rest % cv == 0:
                        bad.add(-(rest // cv))
                else:
                    return None  # inequalities: fall back
            else:
                return None
        if good is not None:
            per_wit.append(("good", {x for x in good if x in set(dom)} -
                            bad))
        else:
            per_wit.append(("bad", bad))
    failing: Optional[set] = None  # None means "all of dom"
    for kind, vals in per_wit:
        fail_w: set
        if kind == "bad":
            fail_w = vals
            if failing is None:
                failing = set(x for x in fail_w if x in set(dom))
            else:
                failing &= fail_w
        else:
            ok_w = vals
            if failing is None:
                failing = {x for x in dom if x not in ok_w}
            else:
                failing = {x for x in failing if x not in ok_w}
    return sorted(failing or set(), key=_sortkey_val)


def check_implication(program: Program, lem: Lemma, bounds: Bounds,
                      cache: Optional[ModelCache] = None) -> Verdict:
    cache = cache or ModelCache()
    base = cache.store(program, bounds)
    ext = cache.store(program, bounds.grown())
    exists = {v.name for v in lem.exists}
    var_sorts: dict[str, str] = {}
    for a in lem.premise_atoms + lem.conclusion_atoms:
        for t in a.args:
            for v in term_vars(t):
                var_sorts.setdefault(v.name, v.sort)
    for ca in lem.premise_constraint + lem.conclusion_constraint:
        for v in constraint_vars(ca):
            var_sorts.setdefault(v.name, v.sort)
    universals = [v for v in var_sorts if v not in exists]
    # premise variables bound by joining the premise atoms
    atom_bound: set[str] = set()
    for a in lem.premise_atoms:
        atom_bound |= _item_vars(a)
    early_cs = tuple(ca for ca in lem.premise_constraint
                     if _item_vars(ca) <= atom_bound)
    gate_cs = tuple(ca for ca in lem.premise_constraint
                    if not (_item_vars(ca) <= atom_bound))
    checked = 0
    gbounds = bounds.grown()
    for env in iter_solutions(lem.premise_atoms, early_cs, {}, base, bounds,
                              var_sorts, enumerate_free=False):
        missing = [v for v in universals if v not in env]
        start = {v: env[v] for v in universals if v in env}
        if not missing:
            checked += 1
            witness = next(iter_solutions(
                lem.conclusion_atoms, lem.conclusion_constraint, start,
                ext, gbounds, var_sorts), None)
            if witness is None:
                return Verdict(False, tuple(sorted(start.items())), checked)
            continue
        # split the conclusion into the part independent of the free
        # universals (solved once) and the residue (checked per assignment)
        miss_set = set(missing)
        dep_atoms = tuple(a for a in lem.conclusion_atoms
                          if _item_vars(a) & miss_set)
        indep_atoms = tuple(a for a in lem.conclusion_atoms
                            if not (_item_vars(a) & miss_set))
        dep_cs = tuple(ca for ca in lem.conclusion_constraint
                       if _item_vars(ca) & miss_set)
        indep_cs = tuple(ca for ca in lem.conclusion_constraint
                         if not (_item_vars(ca) & miss_set))
        wits = []
        for w in iter_solutions(indep_atoms, indep_cs, start, ext, gbounds,
                                var_sorts):
            wits.append(dict(w))  # missing universals are never bound here
            if len(wits) >= 256:
                break
        if len(missing) == 1 and not dep_atoms and len(wits) < 256:
            v = missing[0]
            dom = bounds.domain(var_sorts[v])
            gate = _symbolic_sat(v, dom, start, gate_cs)
            failing = _symbolic_failing(v, dom, wits, dep_cs)
            if failing is not None and gate is not None:
                checked += len(gate)
                hits = [x for x in failing if x in gate]
                if hits:
                    env2 = dict(start)
                    env2[v] = min(hits, key=_sortkey_val)
                    return Verdict(False, tuple(sorted(env2.items())), checked)
                continue
        for extra in itertools.product(
                *[bounds.domain(var_sorts[v]) for v in missing]):
            env_gate = dict(start)
            env_gate.update(zip(missing, extra))
            if not all(eval_constraint(ca, env_gate) is True
                       for ca in gate_cs):
                continue
            checked += 1
            found = False
            for env2 in wits:
                for k, x in zip(missing, extra):
                    env2[k] = x
                ok = all(eval_constraint(ca, env2) is True for ca in dep_cs)
                if ok and dep_atoms:
                    witness = next(iter_solutions(
                        dep_atoms, (), env2, ext, gbounds, var_sorts), None)
                    ok = witness is not None
                if ok:
                    found = True
                    break
            if not found and len(wits) >= 256:
                # the independent-witness list was truncated: full search
                found = next(iter_solutions(
                    lem.conclusion_atoms, lem.conclusion_constraint,
                    dict(env_gate), ext, gbounds, var_sorts), None) is not None
            if not found:
                return Verdict(False, tuple(sorted(env_gate.items())), checked)
    return Verdict(True, None, checked)


def _symbolic_sat(v: str, dom: Sequence[GroundVal], env: Env,
                  gate_cs: Sequence[ConstraintAtom]
                  ) -> Optional[set]:
    """Values of v (all other vars bound by env) satisfying all gate
    constraints; None when a shape is unsupported."""
    failing = _symbolic_failing(v, dom, [dict(env)], gate_cs)
    if failing is None:
        return None
    return {x for x in dom if x not in set(failing)}


# ---------------------------------------------------------------------------
# Solver-model validation
# ---------------------------------------------------------------------------

def _atom_truth(a: Atom, model: Model, env: Env) -> bool:
    d = model.formula_for(a.pred)
    if d is None:
        return False
    vals = [eval_term(t, env) for t in a.args]
    if any(v is None or isinstance(v, tuple) for v in vals):
        raise OracleError(f"non-integer argument in {a.pred}")
    return feval(d.body, dict(zip(d.params, vals)))  # type: ignore[arg-type]


def validate_model(program: Program, model: Model, bounds: Bounds,
                   functional: Sequence[tuple[str, int]] = ()) -> Verdict:
    """Check every clause of a list-free program under the model for all
    integer instantiations within bounds, plus functionality of designated
    predicates (pred, out_position)."""
    checked = 0
    for c in program.clauses:
        vs = free_vars(c)
        if any(v.sort == ILIST for v in vs):
            raise OracleError(f"clause {c.id} is not list-free")
        names = [v.name for v in vs]
        for vals in itertools.product(bounds.ints(), repeat=len(names)):
            env: Env = dict(zip(names, vals))
            checked += 1
            body_holds = all(
                (eval_constraint(ca, env) is True) for ca in c.constraint
            ) and all(_atom_truth(a, model, env) for a in c.body)
            if not body_holds:
                continue
            head_holds = (c.head is not None and
                          _atom_truth(c.head, model, env))
            if not head_holds:
                cex = (c.id, tuple(sorted(env.items())))
                return Verdict(False, cex, checked)
    lo, hi = bounds.int_range
    wide = list(range(2 * lo, 2 * hi + 1))
    for pred, out_pos in functional:
        d = model.formula_for(pred)
        if d is None:
            continue
        n = len(d.params)
        other = [i for i in range(n) if i != out_pos]
        for vals in itertools.product(bounds.ints(), repeat=len(other)):
            sols = []
            for out_v in wide:
                env = {}
                for i, v in zip(other, vals):
                    env[d.params[i]] = v
                env[d.params[out_pos]] = out_v
                if feval(d.body, env):
                    sols.append(out_v)
                if len(sols) > 1:
                    return Verdict(False, (pred, vals, tuple(sols)), checked)
            checked += 1
    return Verdict(True, None, checked)
