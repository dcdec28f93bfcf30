"""SMT-LIB 2 emission (logic HORN) and solver-model parsing.

The emitter produces one assert per clause, in clause order.  The model
parser accepts the conservative fragment: boolean combinations of linear
integer atoms plus let-bindings (inlined); anything else is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import (ILIST, INT, Atom, BoolLit, Clause, Cons, IntConst, IntRel,
                   ListRel, Nil, Program, Term, Var, free_vars, EQL)
from .linarith import EQ, LE, LT, NE, Lin


class Smt2Error(Exception):
    pass


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _sort_name(s: str) -> str:
    return {INT: "Int", ILIST: "IntList", "bool": "Bool"}[s]


def _emit_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntConst):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if isinstance(t, Nil):
        return "nil"
    if isinstance(t, Cons):
        return f"(cons {_emit_term(t.head)} {_emit_term(t.tail)})"
    return _emit_lin(t.lin)


def _emit_lin(lin: Lin) -> str:
    parts = []
    for v, c in lin.coeffs:
        if c.denominator != 1:
            raise Smt2Error(f"non-integer coefficient {c}")
        c = int(c)
        if c == 1:
            parts.append(v)
        else:
            k = str(c) if c >= 0 else f"(- {-c})"
            parts.append(f"(* {k} {v})")
    if lin.const != 0 or not parts:
        k = int(lin.const)
        parts.append(str(k) if k >= 0 else f"(- {-k})")
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _emit_constraint(ca) -> str:
    if isinstance(ca, IntRel):
        lhs = _emit_lin(ca.rel.lin)
        if ca.rel.op == EQ:
            return f"(= {lhs} 0)"
        if ca.rel.op == NE:
            return f"(not (= {lhs} 0))"
        if ca.rel.op == LE:
            return f"(<= {lhs} 0)"
        return f"(< {lhs} 0)"
    if isinstance(ca, ListRel):
        eq = f"(= {_emit_term(ca.lhs)} {_emit_term(ca.rhs)})"
        return eq if ca.op == EQL else f"(not {eq})"
    if isinstance(ca, BoolLit):
        return "true" if ca.value else "false"
    raise Smt2Error(f"cannot emit {ca!r}")


def _emit_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"({a.pred} " + " ".join(_emit_term(t) for t in a.args) + ")"


def _uses_lists(p: Program) -> bool:
    return any(ILIST in info.arg_sorts for info in p.predicates.values())


def emit_smt2(p: Program) -> str:
    """A complete HORN script: datatype (when needed), declarations, one
    assert per clause in order, (check-sat) and (get-model)."""
    lines = ["(set-logic HORN)", "(set-option :produce-models true)"]
    if _uses_lists(p):
        lines.append("(declare-datatypes ((IntList 0)) "
                     "(((nil) (cons (head Int) (tail IntList)))))")
    for info in p.predicates.values():
        args = " ".join(_sort_name(s) for s in info.arg_sorts)
        lines.append(f"(declare-fun {info.name} ({args}) Bool)")
    for c in p.clauses:
        vs = free_vars(c)
        antecedents = [_emit_constraint(x) for x in c.constraint] + \
                      [_emit_atom(a) for a in c.body]
        head = "false" if c.head is None else _emit_atom(c.head)
        if not antecedents:
            body = head
        elif len(antecedents) == 1:
            body = f"(=> {antecedents[0]} {head})"
        else:
            body = f"(=> (and {' '.join(antecedents)}) {head})"
        if vs:
            binders = " ".join(f"({v.name} {_sort_name(v.sort)})" for v in vs)
            lines.append(f"(assert (forall ({binders}) {body}))")
        else:
            lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Formulas (quantifier-free, linear integer arithmetic + booleans)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FBool:
    value: bool


@dataclass(frozen=True)
class FRel:
    op: str          # one of =, !=, <=, <
    lin: Lin         # relation is  lin OP 0


@dataclass(frozen=True)
class FNot:
    arg: "Formula"


@dataclass(frozen=True)
class FAnd:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class FOr:
    args: tuple["Formula", ...]


Formula = Union[FBool, FRel, FNot, FAnd, FOr]


def feval(f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, FBool):
        return f.value
    if isinstance(f, FRel):
        v = f.lin.eval(env)
        return {EQ: v == 0, NE: v != 0, LE: v <= 0, LT: v < 0}[f.op]
    if isinstance(f, FNot):
        return not feval(f.arg, env)
    if isinstance(f, FAnd):
        return all(feval(x, env) for x in f.args)
    return any(feval(x, env) for x in f.args)


def formula_vars(f: Formula) -> set[str]:
    if isinstance(f, FRel):
        return set(f.lin.vars)
    if isinstance(f, FNot):
        return formula_vars(f.arg)
    if isinstance(f, (FAnd, FOr)):
        out: set[str] = set()
        for x in f.args:
            out |= formula_vars(x)
        return out
    return set()


@dataclass
class ModelDef:
    params: tuple[str, ...]
    body: Formula


@dataclass
class Model:
    defs: dict[str, ModelDef]

    def formula_for(self, atom_pred: str) -> Optional[ModelDef]:
        return self.defs.get(atom_pred)


# ---------------------------------------------------------------------------
# S-expression and model parsing
# ---------------------------------------------------------------------------

Sexp = Union[str, list]


def parse_sexps(text: str) -> list[Sexp]:
    toks: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "() \t\r\n":
            if ch in "()":
                toks.append(ch)
            i += 1
            continue
        if ch == ";":
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        j = i
        while j < n and text[j] not in "() \t\r\n;":
            j += 1
        toks.append(text[i:j])
        i = j
    out: list[Sexp] = []
    stack: list[list] = []
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            if not stack:
                raise Smt2Error("unbalanced )")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(t)
    if stack:
        raise Smt2Error("unbalanced (")
    return out


def _sexp_to_lin(s: Sexp, env: dict[str, Sexp]) -> Lin:
    if isinstance(s, str):
        if s in env:
            return _sexp_to_lin(env[s], env)
        if s.lstrip("-").isdigit():
            return Lin.constant(int(s))
        return Lin.var(s)
    if not s:
        raise Smt2Error("empty arithmetic term")
    op = s[0]
    if op == "-" and len(s) == 2:
        return _sexp_to_lin(s[1], env).scale(-1)
    if op == "-":
        out = _sexp_to_lin(s[1], env)
        for x in s[2:]:
            out = out - _sexp_to_lin(x, env)
        return out
    if op == "+":
        out = Lin.constant(0)
        for x in s[1:]:
            out = out + _sexp_to_lin(x, env)
        return out
    if op == "*":
        lins = [_sexp_to_lin(x, env) for x in s[1:]]
        consts = [l for l in lins if l.is_const()]
        others = [l for l in lins if not l.is_const()]
        if len(others) > 1:
            raise Smt2Error("nonlinear multiplication in model")
        out = others[0] if others else Lin.constant(1)
        for c in consts:
            out = out.scale(c.const)
        return out
    raise Smt2Error(f"unsupported arithmetic operator {op!r}")


def _sexp_to_formula(s: Sexp, env: dict[str, Sexp]) -> Formula:
    if isinstance(s, str):
        if s == "true":
            return FBool(True)
        if s == "false":
            return FBool(False)
        if s in env:
            return _sexp_to_formula(env[s], env)
        raise Smt2Error(f"unsupported atom {s!r} in model formula")
    if not s:
        raise Smt2Error("empty formula")
    op = s[0]
    if op == "let":
        new_env = dict(env)
        for binding in s[1]:
            new_env[binding[0]] = _subst_sexp(binding[1], env)
        return _sexp_to_formula(s[2], new_env)
    if op == "and":
        return FAnd(tuple(_sexp_to_formula(x, env) for x in s[1:]))
    if op == "or":
        return FOr(tuple(_sexp_to_formula(x, env) for x in s[1:]))
    if op == "not":
        return FNot(_sexp_to_formula(s[1], env))
    if op == "=>":
        parts = [_sexp_to_formula(x, env) for x in s[1:]]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = FOr((FNot(p), out))
        return out
    if op in ("=", "<=", "<", ">=", ">"):
        lhs = _sexp_to_lin(s[1], env)
        rhs = _sexp_to_lin(s[2], env)
        d = lhs - rhs
        if op == "=":
            return FRel(EQ, d)
        if op == "<=":
            return FRel(LE, d)
        if op == "<":
            return FRel(LT, d)
        if op == ">=":
            return FRel(LE, d.scale(-1))
        return FRel(LT, d.scale(-1))
    raise Smt2Error(f"unsupported operator {op!r} in model formula")


def _subst_sexp(s: Sexp, env: dict[str, Sexp]) -> Sexp:
    if isinstance(s, str):
        return env.get(s, s)
    return [_subst_sexp(x, env) for x in s]


def parse_model(text: str, program: Optional[Program] = None) -> Model:
    """Parse the solver's define-fun block.  When `program` is given, every
    defined symbol must be one of its predicates (arity-checked)."""
    sexps = parse_sexps(text)
    # unwrap optional (model ...) wrapper and a leading `sat` token
    items: list[Sexp] = []
    for s in sexps:
        if isinstance(s, str):
            continue
        if s and s[0] == "model":
            items.extend(s[1:])
        elif s and s[0] == "define-fun":
            items.append(s)
        else:
            items.extend(x for x in s if isinstance(x, list)
                         and x and x[0] == "define-fun")
    defs: dict[str, ModelDef] = {}
    for s in items:
        if not (isinstance(s, list) and s and s[0] == "define-fun"):
            continue
        name = s[1]
        params = tuple(p[0] for p in s[2])
        ret = s[3]
        if ret != "Bool":
            # ignore non-predicate definitions (solver may define helpers)
            continue
        if program is not None:
            info = program.predicates.get(name)
            if info is None:
                raise Smt2Error(f"model defines unknown predicate {name}")
            if len(params) != info.arity:
                raise Smt2Error(f"model arity mismatch for {name}")
        defs[name] = ModelDef(params, _sexp_to_formula(s[4], {}))
    if not defs and "sat" not in text:
        raise Smt2Error("no define-fun entries found in model text")
    return Model(defs)
