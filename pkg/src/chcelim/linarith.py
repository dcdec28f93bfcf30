"""Exact linear integer arithmetic: canonical linear expressions, Gaussian
elimination for equalities, and Fourier-Motzkin satisfiability.

Everything here works over exact Fractions and is deliberately small: clause
constraints in this problem domain have a handful of variables, so no effort
is spent on sparse representations or incrementality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional


# ---------------------------------------------------------------------------
# Linear expressions:  sum(coeff * var) + const
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lin:
    """A linear expression with integer (Fraction) coefficients.

    coeffs is a tuple of (var, coeff) with coeff != 0, sorted by var name;
    that makes Lin hashable and canonical.
    """

    coeffs: tuple[tuple[str, Fraction], ...]
    const: Fraction

    @staticmethod
    def of(mapping: dict[str, int | Fraction] | None = None,
           const: int | Fraction = 0) -> "Lin":
        items = []
        for v, c in sorted((mapping or {}).items()):
            c = Fraction(c)
            if c != 0:
                items.append((v, c))
        return Lin(tuple(items), Fraction(const))

    @staticmethod
    def var(name: str) -> "Lin":
        return Lin(((name, Fraction(1)),), Fraction(0))

    @staticmethod
    def constant(k: int | Fraction) -> "Lin":
        return Lin((), Fraction(k))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def coeff(self, var: str) -> Fraction:
        for v, c in self.coeffs:
            if v == var:
                return c
        return Fraction(0)

    def is_const(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Lin") -> "Lin":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, Fraction(0)) + c
        return Lin.of(d, self.const + other.const)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + other.scale(-1)

    def scale(self, k: int | Fraction) -> "Lin":
        k = Fraction(k)
        if k == 0:
            return Lin((), Fraction(0))
        return Lin(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def subst(self, var: str, repl: "Lin") -> "Lin":
        c = self.coeff(var)
        if c == 0:
            return self
        d = self.as_dict()
        del d[var]
        base = Lin.of(d, self.const)
        return base + repl.scale(c)

    def eval(self, env: dict[str, int]) -> Fraction:
        total = self.const
        for v, c in self.coeffs:
            total += c * env[v]
        return total

    def normalized_sign(self) -> "Lin":
        """Scale so the leading coefficient is positive (for =, != rows)."""
        if not self.coeffs:
            return self if self.const >= 0 else self.scale(-1)
        return self if self.coeffs[0][1] > 0 else self.scale(-1)

    def primitive(self) -> "Lin":
        """Divide by the gcd of all numerators/denominators (canonical row)."""
        nums = [c for _, c in self.coeffs] + ([self.const] if self.const else [])
        if not nums:
            return self
        from math import gcd
        denom_lcm = 1
        for f in nums:
            denom_lcm = denom_lcm * f.denominator // gcd(denom_lcm, f.denominator)
        scaled = [f * denom_lcm for f in nums]
        g = 0
        for f in scaled:
            g = gcd(g, abs(int(f)))
        if g in (0, 1) and denom_lcm == 1:
            return self
        return self.scale(Fraction(denom_lcm, g if g else 1))


# Relations are normalized to  lin OP 0  with OP in {EQ, NE, LE, LT}.
EQ, NE, LE, LT = "=", "!=", "<=", "<"


@dataclass(frozen=True)
class LinRel:
    op: str
    lin: Lin

    def negate(self) -> "LinRel":
        if self.op == EQ:
            return LinRel(NE, self.lin)
        if self.op == NE:
            return LinRel(EQ, self.lin)
        if self.op == LE:          # not(l <= 0)  ==  -l < 0
            return LinRel(LT, self.lin.scale(-1))
        return LinRel(LE, self.lin.scale(-1))  # not(l < 0) == -l <= 0

    def eval(self, env: dict[str, int]) -> bool:
        v = self.lin.eval(env)
        if self.op == EQ:
            return v == 0
        if self.op == NE:
            return v != 0
        if self.op == LE:
            return v <= 0
        return v < 0


def canon_rel(op: str, lin: Lin) -> LinRel:
    """Canonicalize a relation: sign-normalize symmetric ops, make rows primitive."""
    lin = lin.primitive()
    if op in (EQ, NE):
        lin = lin.normalized_sign()
    return LinRel(op, lin)


# ---------------------------------------------------------------------------
# Satisfiability over the integers (conservative: rational FM plus integer
# tightening of strict inequalities; UNSAT answers are always sound).
# ---------------------------------------------------------------------------

def _tighten(rels: Iterable[LinRel]) -> list[LinRel]:
    """a < b over Z becomes a <= b - 1 when all coefficients are integral."""
    out = []
    for r in rels:
        if r.op == LT and all(c.denominator == 1 for _, c in r.lin.coeffs) \
                and r.lin.const.denominator == 1:
            out.append(LinRel(LE, Lin(r.lin.coeffs, r.lin.const + 1)))
        else:
            out.append(r)
    return out


def _gauss(eqs: list[Lin], ineqs: list[Lin]) -> Optional[tuple[list[Lin], list[Lin]]]:
    """Eliminate variables using the equalities.  Returns (residual-eq-consts,
    rewritten-ineqs) or None if an equality is plainly contradictory."""
    eqs = [e for e in eqs]
    solved: list[tuple[str, Lin]] = []
    while eqs:
        e = eqs.pop()
        for v, repl in solved:
            e = e.subst(v, repl)
        if not e.coeffs:
            if e.const != 0:
                return None
            continue
        v, c = e.coeffs[0]
        # v = -(rest)/c
        rest = Lin(e.coeffs[1:], e.const).scale(Fraction(-1) / c)
        solved.append((v, rest))
        eqs = [x.subst(v, rest) for x in eqs]
    new_ineqs = []
    for q in ineqs:
        for v, repl in solved:
            q = q.subst(v, repl)
        new_ineqs.append(q)
    return [], new_ineqs


def _fm_sat(ineqs: list[Lin]) -> bool:
    """Fourier-Motzkin over the rationals for conjunction of lin <= 0."""
    rows = [q for q in ineqs]
    while True:
        rows = [q for q in rows if q.coeffs or q.const > 0]
        if any(not q.coeffs and q.const > 0 for q in rows):
            return False
        if not rows:
            return True
        var = rows[0].coeffs[0][0]
        lo, hi, rest = [], [], []
        for q in rows:
            c = q.coeff(var)
            if c > 0:
                hi.append(q.scale(Fraction(1) / c))     # var <= -rest
            elif c < 0:
                lo.append(q.scale(Fraction(-1) / c))    # -var <= ... -> var >= rest
            else:
                rest.append(q)
        new = rest
        for ql in lo:
            for qh in hi:
                new.append(ql + qh)
        rows = new


def sat(rels: Iterable[LinRel], max_diseq_split: int = 8) -> bool:
    """Conjunction satisfiability over the integers (sound UNSAT, near-complete SAT).

    Disequalities are handled by case-splitting (lin <= -1 | lin >= 1); if
    there are more than max_diseq_split of them the check conservatively
    returns True.
    """
    rels = _tighten(rels)
    eqs = [r.lin for r in rels if r.op == EQ]
    ineqs = [r.lin for r in rels if r.op == LE]
    diseqs = [r.lin for r in rels if r.op == NE]
    strict = [r.lin for r in rels if r.op == LT]
    for s in strict:  # non-integral coefficients kept strict: approximate by <=
        ineqs.append(s)
    g = _gauss(eqs, ineqs + diseqs)
    if g is None:
        return False
    _, rewritten = g
    ineqs2 = rewritten[: len(ineqs)]
    diseqs2 = rewritten[len(ineqs):]
    live = []
    for d in diseqs2:
        if not d.coeffs:
            if d.const == 0:
                return False
            continue  # trivially true
        live.append(d)
    if len(live) > max_diseq_split:
        return _fm_sat(ineqs2)
    def rec(i: int, acc: list[Lin]) -> bool:
        if i == len(live):
            return _fm_sat(acc)
        d = live[i]
        below = Lin(d.coeffs, d.const + 1)           # d <= -1
        above = d.scale(-1)
        above = Lin(above.coeffs, above.const + 1)   # -d <= -1
        return rec(i + 1, acc + [below]) or rec(i + 1, acc + [above])
    return rec(0, ineqs2)


def entails_eq_zero_impossible(rels: list[LinRel], lin: Lin) -> bool:
    """True iff rels ∧ (lin = 0) is unsatisfiable, i.e. rels entail lin != 0."""
    return not sat(rels + [canon_rel(EQ, lin)])


# ---------------------------------------------------------------------------
# Equality closure utilities used by clause canonicalization
# ---------------------------------------------------------------------------

def solve_equalities(eqs: list[Lin], eliminate_order: list[str]
                     ) -> Optional[dict[str, Lin]]:
    """Solve the equality system for the variables in eliminate_order (greedy:
    each variable that can be isolated is mapped to an expression over the
    remaining ones).  Returns None on contradiction."""
    sols: dict[str, Lin] = {}
    rows = [e for e in eqs]
    for v in eliminate_order:
        rows = [r.subst(v, sols[v]) if v in sols else r for r in rows]
        pick = None
        for i, r in enumerate(rows):
            if r.coeff(v) != 0:
                pick = i
                break
        if pick is None:
            continue
        r = rows.pop(pick)
        c = r.coeff(v)
        rest = Lin(tuple((w, k) for w, k in r.coeffs if w != v), r.const)
        repl = rest.scale(Fraction(-1) / c)
        for w in list(sols):
            sols[w] = sols[w].subst(v, repl)
        sols[v] = repl
        rows = [x.subst(v, repl) for x in rows]
    for r in rows:
        if not r.coeffs and r.const != 0:
            return None
    return sols
