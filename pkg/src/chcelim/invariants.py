"""Affine invariants over list-argument lengths and integer arguments.

A Karr-style forward analysis computes, for every predicate of the input
program, the affine hull of the reachable vectors
(length(list arg 1), ..., int arg 1, ...).  Two consumers:

  * instantiated per-atom equalities plus length nonnegativity let the
    replace step evaluate list (dis)equalities whose sides provably differ
    in length (append gives l1 + l2 = l3, len gives l1 = n, ...);
  * projecting the equalities and l >= 0 onto the integer arguments yields
    integer invariants (len gives arg2 >= 0) used to discard clauses whose
    constraints are unsatisfiable in the least model.

Everything is exact over Fractions; the domains are tiny.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (ILIST, INT, Atom, Clause, Cons, IntConst, IntRel, ListRel,
                   Nil, Program, Term, Var, term_to_lin)
from .linarith import EQ, LE, Lin, LinRel, canon_rel

LEN_PREFIX = "len$"


def length_poly(t: Term) -> Lin:
    """Length of a list term as a linear expression over len$<var> variables."""
    k = 0
    while isinstance(t, Cons):
        k += 1
        t = t.tail
    if isinstance(t, Nil):
        return Lin.constant(k)
    if isinstance(t, Var):
        return Lin.var(LEN_PREFIX + t.name) + Lin.constant(k)
    raise ValueError(f"not a list term: {t!r}")


def _dims(info_sorts: tuple[str, ...]) -> list[str]:
    return [f"d{i}" for i in range(len(info_sorts))]


def _arg_poly(t: Term, sort: str) -> Lin:
    if sort == ILIST:
        return length_poly(t)
    return term_to_lin(t)


# An affine subspace of Q^n given by equality rows over dim names; None = bottom.
AffEqs = Optional[list[Lin]]


def _gauss_eliminate(rows: list[Lin], keep: set[str]) -> list[Lin]:
    """Eliminate all variables not in `keep` from the equality rows; the
    result defines exactly the projection of the solution set."""
    rows = [r for r in rows]
    out: list[Lin] = []
    while rows:
        row = rows.pop()
        elim = next((v for v in row.vars if v not in keep), None)
        if elim is None:
            out.append(row)
            continue
        c = row.coeff(elim)
        repl = Lin(tuple((v, k) for v, k in row.coeffs if v != elim),
                   row.const).scale(Fraction(-1) / c)
        rows = [r.subst(elim, repl) for r in rows]
        out = [r.subst(elim, repl) for r in out]
    # canonical basis: RREF by first-seen variables
    basis: list[Lin] = []
    for row in out:
        for b in basis:
            if b.coeffs:
                pv = b.coeffs[0][0]
                if row.coeff(pv) != 0:
                    row = row - b.scale(row.coeff(pv) / b.coeffs[0][1])
        row = row.primitive().normalized_sign()
        if row.coeffs:
            basis.append(row)
        # rows with only a constant: contradictory system; caller handles
        elif row.const != 0:
            basis.append(row)
    return basis


def _solution_generators(rows: list[Lin], dims: list[str]
                         ) -> Optional[tuple[list[Fraction], list[list[Fraction]]]]:
    """Particular solution and nullspace basis of the equality system over dims."""
    import itertools
    # Build matrix over dims
    m = [[row.coeff(d) for d in dims] + [row.const] for row in rows]
    n = len(dims)
    # Gaussian elimination to RREF
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        pc = m[r][c]
        m[r] = [x / pc for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    for i in range(r, len(m)):
        if m[i][n] != 0:
            return None  # inconsistent
    point = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        point[c] = -m[i][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = -m[i][f]
        basis.append(vec)
    return point, basis


def _eqs_from_generators(point: list[Fraction], basis: list[list[Fraction]],
                         dims: list[str]) -> list[Lin]:
    """Linear forms vanishing on point + span(basis): solve for (a, b) with
    a . x + b = 0 for all generators."""
    n = len(dims)
    # unknowns: a_0..a_{n-1}, b ; constraints: a.v = 0 for v in basis,
    # a.point + b = 0
    unknowns = [f"a{i}" for i in range(n)] + ["b"]
    rows: list[Lin] = []
    for vec in basis:
        rows.append(Lin.of({f"a{i}": vec[i] for i in range(n)}, 0))
    rows.append(Lin.of({f"a{i}": point[i] for i in range(n)} | {"b": 1}, 0))
    gen = _solution_generators(rows, unknowns)
    assert gen is not None
    _, null = gen
    out = []
    for vec in null:
        coeffs = {dims[i]: vec[i] for i in range(n) if vec[i] != 0}
        const = vec[n]
        if coeffs or const:
            out.append(Lin.of(coeffs, const).primitive().normalized_sign())
    return out


def _join(a: AffEqs, b: AffEqs, dims: list[str]) -> AffEqs:
    if a is None:
        return b
    if b is None:
        return a
    ga = _solution_generators(a, dims)
    gb = _solution_generators(b, dims)
    if ga is None:
        return b
    if gb is None:
        return a
    pa, va = ga
    pb, vb = gb
    diff = [x - y for x, y in zip(pb, pa)]
    return _eqs_from_generators(pa, va + vb + [diff], dims)


def _same_space(a: AffEqs, b: AffEqs, dims: list[str]) -> bool:
    if (a is None) != (b is None):
        return False
    if a is None:
        return True

    def canon(rows):
        return sorted((tuple(r.coeffs), r.const) for r in _gauss_eliminate(
            [Lin(r.coeffs, r.const) for r in rows], set(dims)))
    return canon(a) == canon(b)


@dataclass
class InvariantInfo:
    length_eqs: dict[str, list[Lin]]       # pred -> eq rows over d0..dk
    int_invariants: dict[str, list[LinRel]]  # pred -> rels over int-arg dims


def analyze(program: Program) -> InvariantInfo:
    """Fixpoint of the affine-hull semantics over the program's predicates."""
    state: dict[str, AffEqs] = {p: None for p in program.predicates}
    dims_of = {p: _dims(info.arg_sorts)
               for p, info in program.predicates.items()}

    changed = True
    rounds = 0
    while changed and rounds < 3 * (len(program.predicates) + 4):
        changed = False
        rounds += 1
        for c in program.clauses:
            if c.head is None:
                continue
            info = program.predicates[c.head.pred]
            dims = dims_of[c.head.pred]
            rows: list[Lin] = []
            dead = False
            for i, (t, s) in enumerate(zip(c.head.args, info.arg_sorts)):
                rows.append(Lin.var(dims[i]) - _arg_poly(t, s))
            for ca in c.constraint:
                if isinstance(ca, IntRel) and ca.rel.op == EQ:
                    rows.append(ca.rel.lin)
            for a in c.body:
                ainfo = program.predicates[a.pred]
                ainv = state.get(a.pred)
                if ainv is None:
                    dead = True
                    break
                polys = [_arg_poly(t, s)
                         for t, s in zip(a.args, ainfo.arg_sorts)]
                adims = dims_of[a.pred]
                for row in ainv:
                    inst = Lin.constant(row.const)
                    for v, k in row.coeffs:
                        if v in adims:
                            inst = inst + polys[adims.index(v)].scale(k)
                        else:  # pragma: no cover
                            inst = inst + Lin.of({v: k})
                    rows.append(inst)
            if dead:
                continue
            proj = _gauss_eliminate(rows, set(dims))
            if any(not r.coeffs and r.const != 0 for r in proj):
                continue  # clause constraints contradictory: contributes nothing
            new = _join(state[c.head.pred], proj, dims)
            if not _same_space(state[c.head.pred], new, dims):
                state[c.head.pred] = new
                changed = True

    length_eqs: dict[str, list[Lin]] = {}
    int_invs: dict[str, list[LinRel]] = {}
    for p, info in program.predicates.items():
        inv = state[p]
        dims = dims_of[p]
        if inv is None:
            length_eqs[p] = []
            int_invs[p] = []
            continue
        length_eqs[p] = inv
        # project (inv, ldim >= 0) onto int dims
        list_dims = [dims[i] for i, s in enumerate(info.arg_sorts) if s == ILIST]
        int_dims = [dims[i] for i, s in enumerate(info.arg_sorts) if s == INT]
        rels = [canon_rel(EQ, r) for r in inv]
        rels += [canon_rel(LE, Lin.of({d: -1})) for d in list_dims]
        int_invs[p] = fm_project(rels, set(int_dims))
    return InvariantInfo(length_eqs, int_invs)


def fm_project(rels: list[LinRel], keep: set[str]) -> list[LinRel]:
    """Project a conjunction of =/<= rows onto `keep` by Gauss + Fourier-Motzkin."""
    eqs = [r.lin for r in rels if r.op == EQ]
    ineqs = [r.lin for r in rels if r.op == LE]
    solved = _gauss_eliminate(eqs, keep)
    # rewrite inequalities with the eliminated equalities: redo elimination
    # jointly (cheap): eliminate one var at a time
    all_vars: list[str] = []
    for r in eqs + ineqs:
        for v in r.vars:
            if v not in keep and v not in all_vars:
                all_vars.append(v)
    work_eqs = [Lin(r.coeffs, r.const) for r in eqs]
    work_ineqs = [Lin(r.coeffs, r.const) for r in ineqs]
    for v in all_vars:
        pick = next((r for r in work_eqs if r.coeff(v) != 0), None)
        if pick is not None:
            c = pick.coeff(v)
            repl = Lin(tuple((w, k) for w, k in pick.coeffs if w != v),
                       pick.const).scale(Fraction(-1) / c)
            work_eqs = [r.subst(v, repl) for r in work_eqs if r is not pick]
            work_ineqs = [r.subst(v, repl) for r in work_ineqs]
            continue
        lo, hi, rest = [], [], []
        for q in work_ineqs:
            cv = q.coeff(v)
            if cv > 0:
                hi.append(q.scale(Fraction(1) / cv))
            elif cv < 0:
                lo.append(q.scale(Fraction(-1) / cv))
            else:
                rest.append(q)
        work_ineqs = rest + [ql + qh for ql in lo for qh in hi]
    out: list[LinRel] = []
    seen = set()
    for r in _gauss_eliminate(work_eqs, keep):
        rel = canon_rel(EQ, r)
        if rel not in seen:
            seen.add(rel)
            out.append(rel)
    for q in work_ineqs:
        q = q.primitive()
        if not q.coeffs:
            continue  # 0 <= k rows carry no variable information
        rel = canon_rel(LE, q)
        if rel not in seen:
            seen.add(rel)
            out.append(rel)
    return out


def atom_int_invariants(atom: Atom, program: Program,
                        inv: InvariantInfo) -> list[LinRel]:
    """The predicate's integer-argument invariants instantiated at the atom."""
    info = program.predicates.get(atom.pred)
    rels = inv.int_invariants.get(atom.pred)
    if not info or not rels:
        return []
    dims = _dims(info.arg_sorts)
    out = []
    for r in rels:
        inst = Lin.constant(r.lin.const)
        ok = True
        for v, k in r.lin.coeffs:
            i = dims.index(v)
            t = atom.args[i]
            try:
                inst = inst + term_to_lin(t).scale(k)
            except Exception:
                ok = False
                break
        if ok:
            out.append(canon_rel(r.op, inst))
    return out


def length_system(c: Clause, program: Program, inv: InvariantInfo
                  ) -> list[LinRel]:
    """Clause-level LIA system: integer constraints plus instantiated length
    equalities for every body atom plus len$v >= 0 for every list variable."""
    rels: list[LinRel] = []
    for ca in c.constraint:
        if isinstance(ca, IntRel):
            rels.append(ca.rel)
    lvars: dict[str, None] = {}
    def note_list_vars(t: Term):
        while isinstance(t, Cons):
            t = t.tail
        if isinstance(t, Var):
            lvars.setdefault(LEN_PREFIX + t.name)
    for a in c.body:
        info = program.predicates.get(a.pred)
        if info is None:
            continue
        dims = _dims(info.arg_sorts)
        polys = []
        for t, s in zip(a.args, info.arg_sorts):
            if s == ILIST:
                note_list_vars(t)
            polys.append(_arg_poly(t, s))
        for row in inv.length_eqs.get(a.pred, []):
            inst = Lin.constant(row.const)
            for v, k in row.coeffs:
                inst = inst + polys[dims.index(v)].scale(k)
            rels.append(canon_rel(EQ, inst))
    for ca in c.constraint:
        if isinstance(ca, ListRel):
            for side in (ca.lhs, ca.rhs):
                note_list_vars(side)
    for lv in lvars:
        rels.append(LinRel(LE, Lin.of({lv: -1})))
    return rels
