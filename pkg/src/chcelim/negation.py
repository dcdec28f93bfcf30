"""Positive CHC definitions for not_exists_* predicates: the complement of
exists(hidden args). p(visible args, hidden args) for list-recursive
predicates, by constructor case analysis on the visible arguments.

Supported class: clauses structurally recursive over list arguments with at
most one recursive call and no other body atoms (the shapes arising from
translated terminating functions); everything else raises UnsupportedShape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import (ILIST, INT, Atom, ChcError, Clause, Cons, ConstraintAtom,
                   IntConst, IntRel, ListRel, Nil, NIL, Program, Subst, Term,
                   Var, rename_apart, resolve, term_sort, term_vars,
                   unify_terms, EQL, NEL)
from .linarith import EQ, Lin, LinRel


class UnsupportedShape(ChcError):
    pass


@dataclass(frozen=True)
class NegSpec:
    """Positions are 0-based; visible + hidden partition the argument list."""

    base_pred: str
    visible_positions: tuple[int, ...]
    hidden_positions: tuple[int, ...]
    new_name: str

    def __post_init__(self):
        both = sorted(self.visible_positions + self.hidden_positions)
        if both != list(range(len(both))):
            raise ChcError("visible/hidden positions must partition arity")


def ordinal(i: int) -> str:
    if i % 10 == 1 and i != 11:
        return f"{i}st"
    if i % 10 == 2 and i != 12:
        return f"{i}nd"
    if i % 10 == 3 and i != 13:
        return f"{i}rd"
    return f"{i}th"


def not_exists_name(base_pred: str, hidden: tuple[int, ...]) -> str:
    if len(hidden) != 1:
        raise UnsupportedShape(
            f"only single hidden positions are supported, got {hidden}")
    return f"not_exists_{ordinal(hidden[0] + 1)}_{base_pred}"


@dataclass
class _Cond:
    eqs: list[ConstraintAtom]
    rec: Optional[tuple[Term, ...]]  # visible args of the recursive call


def _negate_literal(lit: Union[ConstraintAtom, tuple], new_name: str
                    ) -> Union[ConstraintAtom, Atom]:
    if isinstance(lit, IntRel):
        return IntRel(lit.rel.negate())
    if isinstance(lit, ListRel):
        return lit.negated()
    return Atom(new_name, lit)  # negated recursive existence


def _trivially_false(lit) -> bool:
    if isinstance(lit, IntRel) and not lit.rel.lin.coeffs:
        return not lit.rel.eval({})
    if isinstance(lit, ListRel):
        return lit.op == NEL and lit.lhs == lit.rhs
    return False


def _trivially_true(lit) -> bool:
    if isinstance(lit, IntRel) and not lit.rel.lin.coeffs:
        return lit.rel.eval({})
    if isinstance(lit, ListRel):
        return lit.op == EQL and lit.lhs == lit.rhs
    return False


def eliminate_negation(spec: NegSpec, program: Program) -> list[Clause]:
    """Clauses defining spec.new_name(visible args) as the complement of the
    hidden-argument projection of spec.base_pred."""
    info = program.predicates[spec.base_pred]
    defining = program.clauses_for(spec.base_pred)
    visible_sorts = [info.arg_sorts[p] for p in spec.visible_positions]

    fresh = [0]

    def fresh_var(sort: str) -> Var:
        fresh[0] += 1
        base = "N" if sort == INT else "Ns"
        return Var(f"{base}{fresh[0]}", sort)

    out: list[Clause] = []
    emitted = [0]
    start_goal = tuple(fresh_var(s) for s in visible_sorts)
    worklist: list[tuple[Term, ...]] = [start_goal]
    guard = 0
    while worklist:
        guard += 1
        if guard > 64:
            raise UnsupportedShape("constructor case analysis does not settle")
        goal = worklist.pop(0)
        goal_vars = [v.name for t in goal for v in term_vars(t)]
        conds: list[_Cond] = []
        refine_var: Optional[Var] = None
        for c in defining:
            c_r, _ = rename_apart(c, set(goal_vars))
            s: Optional[dict[str, Term]] = {}
            for p, pat in zip(spec.visible_positions, goal):
                s = unify_terms(c_r.head.args[p], pat, s)
                if s is None:
                    break
            if s is None:
                continue
            # does this clause demand more structure on a goal variable?
            need = None
            for gv in goal_vars:
                r = resolve(Var(gv, _sort_of(goal, gv)), s)
                if not isinstance(r, Var):
                    need = Var(gv, _sort_of(goal, gv))
                    break
            if need is not None:
                if need.sort != ILIST:
                    raise UnsupportedShape(
                        f"cannot refine non-list argument {need.name}")
                if refine_var is None:
                    refine_var = need
                continue
            conds.append(_build_cond(spec, info, c_r, s, goal, goal_vars))
        if refine_var is not None:
            for repl in (NIL, Cons(fresh_var(INT), fresh_var(ILIST))):
                sub = Subst({refine_var.name: repl})
                worklist.append(tuple(sub.term(t) for t in goal))
            continue
        # complement of the disjunction of conds, in sequent form
        branches: list[list] = [[]]
        for cond in conds:
            parts: list = list(cond.eqs)
            if cond.rec is not None:
                parts.append(cond.rec)
            new_branches: list[list] = []
            for br in branches:
                for k in range(len(parts)):
                    neg = _negate_literal(parts[k], spec.new_name)
                    cand = br + parts[:k] + [neg]
                    new_branches.append(cand)
                if not parts:  # an unconditional clause: complement is empty
                    pass
            branches = new_branches
        for br in branches:
            constraint: list[ConstraintAtom] = []
            body: list[Atom] = []
            dead = False
            for lit in br:
                if isinstance(lit, Atom):
                    body.append(lit)
                elif isinstance(lit, tuple):
                    body.append(Atom(spec.base_pred + "$exists", lit))
                elif _trivially_false(lit):
                    dead = True
                    break
                elif not _trivially_true(lit):
                    constraint.append(lit)
            if dead:
                continue
            if any(a.pred.endswith("$exists") for a in body):
                raise UnsupportedShape(
                    "positive recursive existence inside a complement branch "
                    "(clause bodies share hidden witnesses)")
            emitted[0] += 1
            out.append(Clause(f"{spec.new_name}_{emitted[0]}",
                              Atom(spec.new_name, goal),
                              tuple(constraint), tuple(body)))
    # a complement with no base case is the empty relation: drop it
    if out and all(any(a.pred == spec.new_name for a in c.body)
                   for c in out):
        return []
    return out


def _sort_of(goal: tuple[Term, ...], name: str) -> str:
    for t in goal:
        for v in term_vars(t):
            if v.name == name:
                return v.sort
    return INT


def _build_cond(spec: NegSpec, info, c_r: Clause, s: dict[str, Term],
                goal: tuple[Term, ...], goal_vars: list[str]) -> _Cond:
    # residual equalities among goal variables merged by unification
    eqs: list[ConstraintAtom] = []
    groups: dict[str, list[str]] = {}
    for gv in goal_vars:
        r = resolve(Var(gv, _sort_of(goal, gv)), s)
        if isinstance(r, Var):
            groups.setdefault(r.name, []).append(gv)
    for rep in sorted(groups):
        members = sorted(set(groups[rep]) | ({rep} if rep in goal_vars else set()))
        for a, b in zip(members, members[1:]):
            sort = _sort_of(goal, a)
            if sort == INT:
                eqs.append(IntRel(LinRel(EQ, Lin.var(a) - Lin.var(b))))
            else:
                eqs.append(ListRel(EQL, Var(a, sort), Var(b, sort)))
    subst = Subst({k: resolve(Var(k, term_sort(v) if not isinstance(v, Var)
                                  else v.sort), s)
                   for k, v in s.items()})
    # clause constraints must land on goal variables only
    for ca in c_r.constraint:
        ca2 = subst.constraint_atom(ca)
        from .core import constraint_vars
        for v in constraint_vars(ca2):
            if v.name not in goal_vars:
                raise UnsupportedShape(
                    f"constraint on local variable {v.name} in clause {c_r.id}")
        eqs.append(ca2)
    rec: Optional[tuple[Term, ...]] = None
    for a in c_r.body:
        if a.pred != spec.base_pred:
            raise UnsupportedShape(
                f"non-recursive body atom {a.pred} in clause {c_r.id}")
        if rec is not None:
            raise UnsupportedShape(f"two recursive calls in clause {c_r.id}")
        vis_args = []
        for p in spec.visible_positions:
            t = subst.term(a.args[p])
            for v in term_vars(t):
                if v.name not in goal_vars:
                    raise UnsupportedShape(
                        f"local variable {v.name} at a visible position of "
                        f"the recursive call in clause {c_r.id}")
            vis_args.append(t)
        rec = tuple(vis_args)
    return _Cond(eqs, rec)
