"""Clause/term data model for constrained Horn clauses over integer lists,
plus the pure symbolic machinery everything else builds on: substitution,
renaming apart, one-way matching, unification, and canonical forms.

All values are immutable after construction; operations are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

from .linarith import EQ, LE, LT, NE, Lin, LinRel, canon_rel

# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------

INT = "int"
BOOL = "bool"
ILIST = "ilist"

SORTS = (INT, BOOL, ILIST)


def is_basic(sort: str) -> bool:
    return sort in (INT, BOOL)


class ChcError(Exception):
    """Base error for model violations (sort clashes, undeclared predicates...)."""


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: str = INT

    def __repr__(self):
        return f"Var({self.name}:{self.sort})"


@dataclass(frozen=True)
class IntConst:
    value: int

    def __repr__(self):
        return f"IntConst({self.value})"


@dataclass(frozen=True)
class Nil:
    def __repr__(self):
        return "Nil"


@dataclass(frozen=True)
class Cons:
    head: "Term"
    tail: "Term"

    def __repr__(self):
        return f"Cons({self.head!r},{self.tail!r})"


@dataclass(frozen=True)
class LinTerm:
    """An integer-sorted linear expression used inside constraints."""

    lin: Lin

    def __repr__(self):
        return f"LinTerm({self.lin})"


Term = Union[Var, IntConst, Nil, Cons, LinTerm]

NIL = Nil()


def term_sort(t: Term) -> str:
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, (IntConst, LinTerm)):
        return INT
    return ILIST


def mk_list(items: Sequence[Term], tail: Term = NIL) -> Term:
    out = tail
    for x in reversed(items):
        out = Cons(x, out)
    return out


def spine(t: Term) -> tuple[list[Term], Optional[Term]]:
    """Decompose a list term into (explicit heads, var tail or None for nil)."""
    heads: list[Term] = []
    while isinstance(t, Cons):
        heads.append(t.head)
        t = t.tail
    if isinstance(t, Nil):
        return heads, None
    return heads, t


def term_vars(t: Term) -> list[Var]:
    """Variables in first-occurrence order (with duplicates removed)."""
    out: dict[str, Var] = {}

    def walk(x: Term):
        if isinstance(x, Var):
            out.setdefault(x.name, x)
        elif isinstance(x, Cons):
            walk(x.head)
            walk(x.tail)
        elif isinstance(x, LinTerm):
            for v, _ in x.lin.coeffs:
                out.setdefault(v, Var(v, INT))

    walk(t)
    return list(out.values())


def occurs(name: str, t: Term) -> bool:
    return any(v.name == name for v in term_vars(t))


def term_to_lin(t: Term) -> Lin:
    if isinstance(t, Var):
        if t.sort != INT:
            raise ChcError(f"non-integer variable {t.name} in arithmetic position")
        return Lin.var(t.name)
    if isinstance(t, IntConst):
        return Lin.constant(t.value)
    if isinstance(t, LinTerm):
        return t.lin
    raise ChcError(f"list term {t!r} in arithmetic position")


def lin_to_term(lin: Lin) -> Term:
    if not lin.coeffs:
        return IntConst(int(lin.const))
    if len(lin.coeffs) == 1 and lin.const == 0 and lin.coeffs[0][1] == 1:
        return Var(lin.coeffs[0][0], INT)
    return LinTerm(lin)


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntRel:
    """lin OP 0 with OP in {=, !=, <=, <} (canonical form)."""

    rel: LinRel

    @staticmethod
    def make(op: str, lhs: Term, rhs: Term) -> "IntRel":
        lin = term_to_lin(lhs) - term_to_lin(rhs)
        if op == ">":
            op, lin = LT, lin.scale(-1)
        elif op == ">=":
            op, lin = LE, lin.scale(-1)
        return IntRel(canon_rel(op, lin))

    def __repr__(self):
        return f"IntRel({self.rel.lin} {self.rel.op} 0)"


EQL = "=l"
NEL = "!=l"


@dataclass(frozen=True)
class ListRel:
    op: str  # EQL | NEL
    lhs: Term
    rhs: Term

    def flipped(self) -> "ListRel":
        return ListRel(self.op, self.rhs, self.lhs)

    def negated(self) -> "ListRel":
        return ListRel(EQL if self.op == NEL else NEL, self.lhs, self.rhs)


@dataclass(frozen=True)
class BoolLit:
    value: bool


ConstraintAtom = Union[IntRel, ListRel, BoolLit]


def constraint_vars(c: ConstraintAtom) -> list[Var]:
    if isinstance(c, IntRel):
        return [Var(v, INT) for v in c.rel.lin.vars]
    if isinstance(c, ListRel):
        out: dict[str, Var] = {}
        for v in term_vars(c.lhs) + term_vars(c.rhs):
            out.setdefault(v.name, v)
        return list(out.values())
    return []


# ---------------------------------------------------------------------------
# Atoms, clauses, programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __repr__(self):
        return f"Atom({self.pred}/{len(self.args)})"


@dataclass(frozen=True)
class Clause:
    """head = None denotes a query (head `false`)."""

    id: str
    head: Optional[Atom]
    constraint: tuple[ConstraintAtom, ...] = ()
    body: tuple[Atom, ...] = ()

    @property
    def is_query(self) -> bool:
        return self.head is None

    def with_id(self, new_id: str) -> "Clause":
        return Clause(new_id, self.head, self.constraint, self.body)


IN, OUT = "in", "out"


@dataclass(frozen=True)
class PredicateInfo:
    name: str
    arg_sorts: tuple[str, ...]
    modes: tuple[str, ...] = ()
    total_functional: bool = False

    def __post_init__(self):
        if self.modes and len(self.modes) != len(self.arg_sorts):
            raise ChcError(f"modes/arity mismatch for {self.name}")

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    def mode(self, i: int) -> str:
        return self.modes[i] if self.modes else IN

    def out_positions(self) -> list[int]:
        return [i for i in range(self.arity) if self.mode(i) == OUT]

    def in_positions(self) -> list[int]:
        return [i for i in range(self.arity) if self.mode(i) != OUT]


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...]
    predicates: dict[str, PredicateInfo] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for c in self.clauses:
            if c.id in seen:
                raise ChcError(f"duplicate clause id {c.id}")
            seen.add(c.id)
            for a in ((c.head,) if c.head else ()) + c.body:
                info = self.predicates.get(a.pred)
                if info is None:
                    raise ChcError(f"undeclared predicate {a.pred} in clause {c.id}")
                if len(a.args) != info.arity:
                    raise ChcError(
                        f"arity mismatch for {a.pred} in clause {c.id}: "
                        f"{len(a.args)} args, declared {info.arity}")
                for t, s in zip(a.args, info.arg_sorts):
                    if term_sort(t) != s:
                        raise ChcError(
                            f"sort mismatch for {a.pred} in clause {c.id}: "
                            f"{t!r} is {term_sort(t)}, declared {s}")

    def clauses_for(self, pred: str) -> list[Clause]:
        return [c for c in self.clauses if c.head and c.head.pred == pred]

    def extended(self, clauses: Iterable[Clause],
                 predicates: Iterable[PredicateInfo] = ()) -> "Program":
        preds = dict(self.predicates)
        for p in predicates:
            preds[p.name] = p
        return Program(self.clauses + tuple(clauses), preds)


def clause_atoms(c: Clause) -> tuple[Atom, ...]:
    return ((c.head,) if c.head else ()) + c.body


def free_vars(c: Clause) -> list[Var]:
    """First-occurrence order: head, then constraint, then body."""
    out: dict[str, Var] = {}
    if c.head:
        for t in c.head.args:
            for v in term_vars(t):
                out.setdefault(v.name, v)
    for ca in c.constraint:
        for v in constraint_vars(ca):
            out.setdefault(v.name, v)
    for a in c.body:
        for t in a.args:
            for v in term_vars(t):
                out.setdefault(v.name, v)
    return list(out.values())


def body_vars(c: Clause) -> list[Var]:
    """First-occurrence order over body atoms then list relations (the order
    used for the head arguments of new definitions)."""
    out: dict[str, Var] = {}
    for a in c.body:
        for t in a.args:
            for v in term_vars(t):
                out.setdefault(v.name, v)
    for ca in c.constraint:
        if isinstance(ca, ListRel):
            for v in constraint_vars(ca):
                out.setdefault(v.name, v)
    return list(out.values())


def has_basic_types(c: Clause) -> bool:
    return all(is_basic(v.sort) for v in free_vars(c))


# ---------------------------------------------------------------------------
# Lemmas (universally closed implications with existential conclusions)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lemma:
    """forall(premise -> exists(exists_vars). conclusion); the universal
    closure ranges over the premise variables."""

    premise_constraint: tuple[ConstraintAtom, ...]
    premise_atoms: tuple[Atom, ...]
    exists: tuple[Var, ...]
    conclusion_constraint: tuple[ConstraintAtom, ...]
    conclusion_atoms: tuple[Atom, ...]

    def all_premise_vars(self) -> list[Var]:
        out: dict[str, Var] = {}
        for a in self.premise_atoms:
            for t in a.args:
                for v in term_vars(t):
                    out.setdefault(v.name, v)
        for ca in self.premise_constraint:
            for v in constraint_vars(ca):
                out.setdefault(v.name, v)
        return list(out.values())


def canonical_lemma(lem: Lemma) -> str:
    """Renaming-invariant rendering: a lemma as a pair of pseudo-clauses.

    List relations compare modulo symmetry (handled by canonical_clause);
    atom order is preserved, constraint conjunctions are sorted."""
    prem = Clause("p", None, lem.premise_constraint, lem.premise_atoms)
    ex_marker = tuple(Atom("exists$", (v,)) for v in lem.exists)
    conc = Clause("c", None, lem.conclusion_constraint,
                  lem.conclusion_atoms + ex_marker)
    # Use a shared variable naming across premise and conclusion by packing
    # both into one clause; the separator atom keeps them apart.
    packed = Clause(
        "l", None, lem.premise_constraint + lem.conclusion_constraint,
        lem.premise_atoms + (Atom("then$", ()),) + lem.conclusion_atoms
        + ex_marker)
    del prem, conc
    return canonical_clause(packed)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

class Subst:
    """Sort-preserving, idempotent substitution (variable name -> Term)."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: Optional[dict[str, Term]] = None):
        self.bindings: dict[str, Term] = dict(bindings or {})

    def __repr__(self):
        inner = ", ".join(f"{k}/{v!r}" for k, v in self.bindings.items())
        return f"Subst({inner})"

    def __eq__(self, other):
        return isinstance(other, Subst) and self.bindings == other.bindings

    def __bool__(self):
        return bool(self.bindings)

    def copy(self) -> "Subst":
        return Subst(self.bindings)

    def bind(self, var: Var, term: Term) -> "Subst":
        """Functional extension; raises on sort mismatch."""
        if term_sort(term) != var.sort:
            raise ChcError(f"sort mismatch binding {var.name} to {term!r}")
        new = self.copy()
        new.bindings[var.name] = term
        return new

    def term(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self.bindings.get(t.name, t)
        if isinstance(t, Cons):
            return Cons(self.term(t.head), self.term(t.tail))
        if isinstance(t, LinTerm):
            return lin_to_term(self._lin(t.lin))
        return t

    def _lin(self, lin: Lin) -> Lin:
        out = Lin.constant(lin.const)
        for v, c in lin.coeffs:
            repl = self.bindings.get(v)
            if repl is None:
                out = out + Lin.of({v: c})
            else:
                out = out + term_to_lin(repl).scale(c)
        return out

    def atom(self, a: Atom) -> Atom:
        return Atom(a.pred, tuple(self.term(t) for t in a.args))

    def constraint_atom(self, ca: ConstraintAtom) -> ConstraintAtom:
        if isinstance(ca, IntRel):
            return IntRel(canon_rel(ca.rel.op, self._lin(ca.rel.lin)))
        if isinstance(ca, ListRel):
            return ListRel(ca.op, self.term(ca.lhs), self.term(ca.rhs))
        return ca

    def clause(self, c: Clause, id_suffix: str = "") -> Clause:
        return Clause(
            c.id + id_suffix,
            self.atom(c.head) if c.head else None,
            tuple(self.constraint_atom(x) for x in c.constraint),
            tuple(self.atom(a) for a in c.body),
        )


def apply_subst(s: Subst, c: Clause) -> Clause:
    """Spec operation: apply a substitution to a clause (id gets a marker)."""
    if not s:
        return c
    return s.clause(c, id_suffix="'")


# ---------------------------------------------------------------------------
# Renaming apart
# ---------------------------------------------------------------------------

_SUFFIXES = [chr(ord("a") + i) for i in range(26)]


def _gen_suffixes() -> Iterator[str]:
    for s in _SUFFIXES:
        yield "_" + s
    for a in _SUFFIXES:
        for b in _SUFFIXES:
            yield "_" + a + b


def rename_apart(c: Clause, forbidden: Iterable[str]) -> tuple[Clause, Subst]:
    """Rename every variable of c so none lands in `forbidden`.

    Deterministic: the first generation suffix (_a, _b, ...) under which all
    renamed names avoid both `forbidden` and each other is used for all
    variables, mirroring the paper's La/Ma/SLa convention.
    """
    forbidden = set(forbidden)
    vs = free_vars(c)
    if not vs:
        return c, Subst()
    base_names = {v.name for v in vs}
    for suf in _gen_suffixes():
        new_names = {v.name: v.name + suf for v in vs}
        targets = set(new_names.values())
        if len(targets) == len(new_names) and not (targets & forbidden) \
                and not (targets & base_names):
            s = Subst({v.name: Var(new_names[v.name], v.sort) for v in vs})
            return s.clause(c), s
    raise ChcError("ran out of rename suffixes")  # pragma: no cover


def invert_renaming(s: Subst) -> Subst:
    inv: dict[str, Term] = {}
    for name, t in s.bindings.items():
        if not isinstance(t, Var):
            raise ChcError("not a renaming")
        inv[t.name] = Var(name, t.sort)
    if len(inv) != len(s.bindings):
        raise ChcError("renaming is not injective")
    return Subst(inv)


# ---------------------------------------------------------------------------
# One-way matching and unification
# ---------------------------------------------------------------------------

def match_term(pattern: Term, target: Term, s: Subst) -> Optional[Subst]:
    """One-way matching: extend s so that s(pattern) == target syntactically.
    Target variables (and terms already in s's range) act as constants."""
    if isinstance(pattern, Var):
        bound = s.bindings.get(pattern.name)
        if bound is not None:
            return s if bound == target else None
        if term_sort(target) != pattern.sort:
            return None
        return s.bind(pattern, target)
    if isinstance(pattern, IntConst):
        return s if pattern == target else None
    if isinstance(pattern, Nil):
        return s if isinstance(target, Nil) else None
    if isinstance(pattern, Cons):
        if not isinstance(target, Cons):
            return None
        s2 = match_term(pattern.head, target.head, s)
        if s2 is None:
            return None
        return match_term(pattern.tail, target.tail, s2)
    if isinstance(pattern, LinTerm):
        return s if s.term(pattern) == target else None
    return None


def match_atom(pattern: Atom, target: Atom, partial: Optional[Subst] = None
               ) -> Optional[Subst]:
    """Spec operation: one-way matching of atoms, extending `partial`."""
    s = partial.copy() if partial else Subst()
    if pattern.pred != target.pred or len(pattern.args) != len(target.args):
        return None
    for p, t in zip(pattern.args, target.args):
        s2 = match_term(p, t, s)
        if s2 is None:
            return None
        s = s2
    return s


def _walk(t: Term, s: dict[str, Term]) -> Term:
    while isinstance(t, Var) and t.name in s:
        t = s[t.name]
    return t


def unify_terms(t1: Term, t2: Term, s: Optional[dict[str, Term]] = None
                ) -> Optional[dict[str, Term]]:
    """Two-way unification with occurs check (triangular bindings)."""
    s = dict(s or {})

    def uni(a: Term, b: Term) -> bool:
        a, b = _walk(a, s), _walk(b, s)
        if isinstance(a, Var):
            if isinstance(b, Var) and b.name == a.name:
                return True
            b_res = resolve(b, s)
            if occurs(a.name, b_res):
                return False
            if term_sort(b) != a.sort:
                return False
            s[a.name] = b
            return True
        if isinstance(b, Var):
            return uni(b, a)
        if isinstance(a, IntConst) and isinstance(b, IntConst):
            return a.value == b.value
        if isinstance(a, Nil) and isinstance(b, Nil):
            return True
        if isinstance(a, Cons) and isinstance(b, Cons):
            return uni(a.head, b.head) and uni(a.tail, b.tail)
        return False

    return s if uni(t1, t2) else None


def resolve(t: Term, s: dict[str, Term]) -> Term:
    t = _walk(t, s)
    if isinstance(t, Cons):
        return Cons(resolve(t.head, s), resolve(t.tail, s))
    if isinstance(t, LinTerm):
        out = Lin.constant(t.lin.const)
        for v, c in t.lin.coeffs:
            out = out + term_to_lin(resolve(Var(v, INT), s)).scale(c)
        return lin_to_term(out)
    return t


def triangular_to_subst(s: dict[str, Term]) -> Subst:
    return Subst({k: resolve(v, s) for k, v in s.items()})


def unify_atoms(a1: Atom, a2: Atom) -> Optional[Subst]:
    if a1.pred != a2.pred or len(a1.args) != len(a2.args):
        return None
    s: Optional[dict[str, Term]] = {}
    for x, y in zip(a1.args, a2.args):
        s = unify_terms(x, y, s)
        if s is None:
            return None
    return triangular_to_subst(s)


def is_instance_atom(pattern: Atom, target: Atom) -> bool:
    return match_atom(pattern, target) is not None


def variant_renaming(c1: Clause, c2: Clause) -> Optional[Subst]:
    """A variant is equal up to bijective variable renaming (ledgered choice)."""
    v1, v2 = free_vars(c1), free_vars(c2)
    if len(v1) != len(v2):
        return None
    s = Subst({a.name: Var(b.name, b.sort) for a, b in zip(v1, v2)
               if a.sort == b.sort})
    if len(s.bindings) != len(v1):
        return None
    if len({t.name for t in s.bindings.values()}) != len(v1):  # type: ignore
        return None
    if s.clause(c1).with_id(c2.id) == c2.with_id(c2.id):
        return s
    return None


# ---------------------------------------------------------------------------
# Canonical forms (for golden tests and determinism checks)
# ---------------------------------------------------------------------------

def _render_term(t: Term, names: dict[str, str]) -> str:
    if isinstance(t, Var):
        return names.get(t.name, "?" + t.name)
    if isinstance(t, IntConst):
        return str(t.value)
    if isinstance(t, Nil):
        return "[]"
    if isinstance(t, Cons):
        return f"[{_render_term(t.head, names)}|{_render_term(t.tail, names)}]"
    parts = [f"{c}*{names.get(v, '?' + v)}" for v, c in t.lin.coeffs]
    if t.lin.const or not parts:
        parts.append(str(t.lin.const))
    return "(" + "+".join(parts) + ")"


def _canon_constraints(conjs: Sequence[ConstraintAtom], names: dict[str, str],
                       main_names: set[str]) -> list[str]:
    """Canonical strings for a constraint conjunction.

    Equalities are first used to eliminate variables that occur nowhere
    outside the constraints (so {H>X, Na=X+N2} and {H=<Na-N2} compare equal);
    the remaining equalities form an RREF basis over the name-ordered
    variables, and inequalities are reduced to normal form modulo that
    basis."""
    eq_rows: list[Lin] = []
    ineqs: list[tuple[str, Lin]] = []
    others: list[str] = []
    order = {n: i for i, n in enumerate(names)}
    for ca in conjs:
        if isinstance(ca, IntRel) and ca.rel.op == EQ:
            eq_rows.append(ca.rel.lin)
        elif isinstance(ca, IntRel):
            ineqs.append((ca.rel.op, ca.rel.lin))
        elif isinstance(ca, ListRel):
            a = _render_term(ca.lhs, names)
            b = _render_term(ca.rhs, names)
            a, b = sorted((a, b))
            others.append(f"{a}{ca.op}{b}")
        else:
            others.append(f"bool:{ca.value}")
    # eliminate constraint-only variables from the equality space
    extras: list[str] = []
    for row in eq_rows:
        for v in row.vars:
            if v not in main_names and v not in extras:
                extras.append(v)
    rows = list(eq_rows)
    for v in extras:
        pick = next((r for r in rows if r.coeff(v) != 0), None)
        if pick is None:
            continue
        repl = _isolate(pick, v)
        rows = [r.subst(v, repl) for r in rows if r is not pick]
        ineqs = [(op, lin.subst(v, repl)) for op, lin in ineqs]
    # RREF over variables sorted by canonical-name order
    pivots: list[tuple[str, Lin]] = []
    for row in rows:
        for pv, prow in pivots:
            if row.coeff(pv) != 0:
                row = row.subst(pv, _isolate(prow, pv))
        row = row.primitive().normalized_sign()
        if row.coeffs:
            cand = sorted(row.vars, key=lambda v: order.get(v, 10 ** 6))
            pivots.append((cand[-1], row))
    rendered = []
    for pv, row in pivots:
        row = row.primitive().normalized_sign()
        body = "+".join(
            f"{c}*{names.get(v, '?' + v)}" for v, c in sorted(
                row.coeffs, key=lambda vc: order.get(vc[0], 10 ** 6)))
        rendered.append(f"{body}+{row.const}=0")
    for op, lin in ineqs:
        for pv, prow in pivots:
            if lin.coeff(pv) != 0:
                lin = lin.subst(pv, _isolate(prow, pv))
        lin = lin.primitive()
        if op in (EQ, NE):
            lin = lin.normalized_sign()
        body = "+".join(
            f"{c}*{names.get(v, '?' + v)}" for v, c in sorted(
                lin.coeffs, key=lambda vc: order.get(vc[0], 10 ** 6)))
        rendered.append(f"{body}+{lin.const}{op}0")
    return sorted(rendered + others)


def _isolate(row: Lin, var: str) -> Lin:
    c = row.coeff(var)
    rest = Lin(tuple((v, k) for v, k in row.coeffs if v != var), row.const)
    return rest.scale(Fraction(-1) / c)


def canonical_clause(c: Clause) -> str:
    """A renaming-invariant string for structural clause comparison.

    Variables named in first-occurrence order over head and body; variables
    occurring only in constraints are assigned by trying all orders and
    keeping the lexicographically least rendering (they are few).
    """
    main: dict[str, str] = {}
    ordered: list[Var] = []
    if c.head:
        for t in c.head.args:
            for v in term_vars(t):
                if v.name not in main:
                    main[v.name] = f"V{len(main)}"
                    ordered.append(v)
    for a in c.body:
        for t in a.args:
            for v in term_vars(t):
                if v.name not in main:
                    main[v.name] = f"V{len(main)}"
                    ordered.append(v)
    for ca in c.constraint:
        if isinstance(ca, ListRel):
            for v in constraint_vars(ca):
                if v.name not in main:
                    main[v.name] = f"V{len(main)}"
                    ordered.append(v)
    rest = [v for v in free_vars(c) if v.name not in main]
    best: Optional[str] = None
    for perm in itertools.permutations(rest) if len(rest) <= 5 else [tuple(rest)]:
        names = dict(main)
        for v in perm:
            names[v.name] = f"V{len(names)}"
        head = "false" if c.head is None else \
            f"{c.head.pred}({','.join(_render_term(t, names) for t in c.head.args)})"
        body = [f"{a.pred}({','.join(_render_term(t, names) for t in a.args)})"
                for a in c.body]
        cs = _canon_constraints(c.constraint, names, set(main))
        s = head + " :- " + " & ".join(cs) + " | " + ", ".join(body)
        if best is None or s < best:
            best = s
    return best or ""


def canonical_program(clauses: Iterable[Clause]) -> tuple[str, ...]:
    return tuple(sorted(canonical_clause(c) for c in clauses))
