"""Parser and pretty printer for the Prolog-like .chc concrete syntax.

Grammar (ASCII rendering of the paper's notation):

    program   := (decl | clause)*
    decl      := ":- declare" NAME "(" [sortmode ("," sortmode)*] ")"
                 ["total_functional"] "."
    sortmode  := ("int"|"bool"|"ilist") [":in"|":out"]
    clause    := [NUMBER "."] head [":-" bodyitem ("," bodyitem)*] "."
    head      := "false" | atom
    bodyitem  := relation | atom
    relation  := expr ("="|"=\\="|"<"|"=<"|">"|">="|"=="|"\\==") expr
    atom      := NAME ["(" expr ("," expr)* ")"]
    expr      := arithmetic over VAR, NUMBER, lists
    list      := "[]" | "[" expr ("," expr)* ["|" expr] "]"

`==` / `\\==` are list equality/disequality; the other operators are integer
relations.  A clause may be labelled either by a numeric prefix (`12. p :- q.`)
or by an immediately preceding comment of the form `% 12f.`; unlabelled
clauses get sequential ids c1, c2, ...  `%` starts a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import (BOOL, ILIST, INT, Atom, BoolLit, ChcError, Clause, Cons,
                   ConstraintAtom, IN, IntConst, IntRel, ListRel, Nil, NIL,
                   OUT, PredicateInfo, Program, Term, Var, lin_to_term,
                   LinTerm, EQL, NEL)
from .linarith import Lin


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass
class ParseError:
    span: SourceSpan
    message: str
    expected: Optional[str] = None

    def __post_init__(self):
        if not self.message:
            raise ValueError("ParseError message must be non-empty")

    def __str__(self):
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{self.span}: {self.message}{hint}"


class ParseFailure(Exception):
    def __init__(self, errors: list[ParseError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = [":-", "=\\=", "\\==", "==", "=<", ">=", "=", "<", ">",
          "(", ")", "[", "]", "|", ",", ".", "+", "-", "*"]


@dataclass
class Token:
    kind: str        # NAME VAR NUM PUNCT COMMENT EOF
    text: str
    span: SourceSpan


def tokenize(text: str, path: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        span = SourceSpan(path, line, col)
        if ch == "%":
            j = text.find("\n", i)
            j = n if j < 0 else j
            toks.append(Token("COMMENT", text[i + 1:j].strip(), span))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("NUM", text[i:j], span))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "VAR" if (word[0].isupper() or word[0] == "_") else "NAME"
            toks.append(Token(kind, word, span))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("PUNCT", p, span))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseFailure([ParseError(span, f"unexpected character {ch!r}")])
    toks.append(Token("EOF", "", SourceSpan(path, line, col)))
    return toks


# ---------------------------------------------------------------------------
# Raw syntax (before sort resolution)
# ---------------------------------------------------------------------------

RawTerm = Union["RVar", "RNum", "ROp", "RList"]


@dataclass
class RVar:
    name: str
    span: SourceSpan


@dataclass
class RNum:
    value: int
    span: SourceSpan


@dataclass
class ROp:
    op: str
    args: list[RawTerm]
    span: SourceSpan


@dataclass
class RList:
    items: list[RawTerm]
    tail: Optional[RawTerm]
    span: SourceSpan


@dataclass
class RAtom:
    pred: str
    args: list[RawTerm]
    span: SourceSpan


@dataclass
class RRel:
    op: str
    lhs: RawTerm
    rhs: RawTerm
    span: SourceSpan


@dataclass
class RClause:
    label: Optional[str]
    head: Optional[RAtom]
    items: list[Union[RAtom, RRel]]
    span: SourceSpan


_INT_RELS = {"=", "=\\=", "<", "=<", ">", ">="}
_LIST_RELS = {"==": EQL, "\\==": NEL}


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = [t for t in toks if t.kind != "COMMENT"]
        self.comments = [t for t in toks if t.kind == "COMMENT"]
        self.i = 0
        self.errors: list[ParseError] = []

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            raise ParseFailure([ParseError(
                t.span, f"unexpected {t.kind} {t.text!r}",
                expected=text or kind)])
        return self.next()

    def at_punct(self, p: str) -> bool:
        t = self.peek()
        return t.kind == "PUNCT" and t.text == p

    # -- declarations -------------------------------------------------------

    def parse_decl(self) -> PredicateInfo:
        self.expect("PUNCT", ":-")
        self.expect("NAME", "declare")
        name = self.expect("NAME").text
        self.expect("PUNCT", "(")
        sorts: list[str] = []
        modes: list[str] = []
        if not self.at_punct(")"):
            while True:
                s = self.expect("NAME").text
                if s not in (INT, BOOL, ILIST):
                    raise ParseFailure([ParseError(
                        self.peek().span, f"unknown sort {s!r}",
                        expected="int, bool or ilist")])
                mode = IN
                if self.at_punct(":"):
                    self.next()
                    m = self.expect("NAME")
                    if m.text not in (IN, OUT):
                        raise ParseFailure([ParseError(
                            m.span, f"bad mode {m.text!r}", expected="in or out")])
                    mode = m.text
                sorts.append(s)
                modes.append(mode)
                if self.at_punct(","):
                    self.next()
                    continue
                break
        self.expect("PUNCT", ")")
        total = False
        t = self.peek()
        if t.kind == "NAME" and t.text == "total_functional":
            self.next()
            total = True
        self.expect("PUNCT", ".")
        return PredicateInfo(name, tuple(sorts), tuple(modes), total)

    # -- clauses ------------------------------------------------------------

    def parse_clause(self, label: Optional[str]) -> RClause:
        span = self.peek().span
        if self.peek().kind == "NUM" and self.peek(1).kind == "PUNCT" \
                and self.peek(1).text == ".":
            label = self.next().text
            self.next()
        head: Optional[RAtom] = None
        t = self.peek()
        if t.kind == "NAME" and t.text == "false":
            self.next()
        else:
            head = self.parse_atom()
        items: list[Union[RAtom, RRel]] = []
        if self.at_punct(":-"):
            self.next()
            while True:
                items.append(self.parse_body_item())
                if self.at_punct(","):
                    self.next()
                    continue
                break
        self.expect("PUNCT", ".")
        return RClause(label, head, items, span)

    def parse_atom(self) -> RAtom:
        t = self.expect("NAME")
        args: list[RawTerm] = []
        if self.at_punct("("):
            self.next()
            while True:
                args.append(self.parse_expr())
                if self.at_punct(","):
                    self.next()
                    continue
                break
            self.expect("PUNCT", ")")
        return RAtom(t.text, args, t.span)

    def parse_body_item(self) -> Union[RAtom, RRel]:
        t = self.peek()
        if t.kind == "NAME":
            # atoms cannot occur inside expressions, so a NAME here always
            # starts an atom
            return self.parse_atom()
        lhs = self.parse_expr()
        op_t = self.peek()
        if op_t.kind == "PUNCT" and (op_t.text in _INT_RELS
                                     or op_t.text in _LIST_RELS):
            self.next()
            rhs = self.parse_expr()
            return RRel(op_t.text, lhs, rhs, op_t.span)
        raise ParseFailure([ParseError(op_t.span,
                                       f"unexpected {op_t.text!r} in body",
                                       expected="relational operator")])

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> RawTerm:
        t = self.parse_addend()
        while self.peek().kind == "PUNCT" and self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.parse_addend()
            t = ROp(op, [t, rhs], t.span if hasattr(t, "span") else self.peek().span)
        return t

    def parse_addend(self) -> RawTerm:
        t = self.parse_primary()
        while self.peek().kind == "PUNCT" and self.peek().text == "*":
            op = self.next().text
            rhs = self.parse_primary()
            t = ROp(op, [t, rhs], t.span)
        return t

    def parse_primary(self) -> RawTerm:
        t = self.peek()
        if t.kind == "NUM":
            self.next()
            return RNum(int(t.text), t.span)
        if t.kind == "VAR":
            self.next()
            return RVar(t.text, t.span)
        if t.kind == "PUNCT" and t.text == "-":
            self.next()
            inner = self.parse_primary()
            return ROp("neg", [inner], t.span)
        if t.kind == "PUNCT" and t.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect("PUNCT", ")")
            return inner
        if t.kind == "PUNCT" and t.text == "[":
            self.next()
            items: list[RawTerm] = []
            tail: Optional[RawTerm] = None
            if not self.at_punct("]"):
                items.append(self.parse_expr())
                while self.at_punct(","):
                    self.next()
                    items.append(self.parse_expr())
                if self.at_punct("|"):
                    self.next()
                    tail = self.parse_expr()
            self.expect("PUNCT", "]")
            return RList(items, tail, t.span)
        raise ParseFailure([ParseError(t.span, f"unexpected {t.text or t.kind!r}",
                                       expected="term")])


# ':' must be lexable for mode annotations
_PUNCT.insert(-3, ":")


# ---------------------------------------------------------------------------
# Sort resolution and elaboration to the core model
# ---------------------------------------------------------------------------

class _Elaborator:
    def __init__(self, preds: dict[str, PredicateInfo]):
        self.preds = preds
        self.errors: list[ParseError] = []

    def elaborate(self, rc: RClause, default_id: str) -> Clause:
        sorts: dict[str, str] = {}

        def constrain_var(name: str, sort: str, span: SourceSpan):
            old = sorts.get(name)
            if old is None:
                sorts[name] = sort
            elif old != sort:
                raise ParseFailure([ParseError(
                    span, f"variable {name} used both as {old} and {sort}")])

        def walk(t: RawTerm, sort: str):
            if isinstance(t, RVar):
                constrain_var(t.name, sort, t.span)
            elif isinstance(t, RNum):
                if sort != INT:
                    raise ParseFailure([ParseError(
                        t.span, f"integer literal in {sort} position")])
            elif isinstance(t, ROp):
                if sort != INT:
                    raise ParseFailure([ParseError(
                        t.span, f"arithmetic in {sort} position")])
                for a in t.args:
                    walk(a, INT)
            elif isinstance(t, RList):
                if sort != ILIST:
                    raise ParseFailure([ParseError(
                        t.span, f"list in {sort} position")])
                for x in t.items:
                    walk(x, INT)
                if t.tail is not None:
                    walk(t.tail, ILIST)

        def visit_atom(a: RAtom):
            info = self.preds.get(a.pred)
            if info is None:
                raise ParseFailure([ParseError(
                    a.span, f"undeclared predicate {a.pred}")])
            if len(a.args) != info.arity:
                raise ParseFailure([ParseError(
                    a.span, f"{a.pred} expects {info.arity} args, got {len(a.args)}")])
            for x, s in zip(a.args, info.arg_sorts):
                walk(x, s)

        for pass_no in (1, 2):
            # two passes so vars constrained late (e.g. only by a list rel)
            # still check consistently everywhere
            if rc.head:
                visit_atom(rc.head)
            for it in rc.items:
                if isinstance(it, RAtom):
                    visit_atom(it)
                elif it.op in _LIST_RELS:
                    for side in (it.lhs, it.rhs):
                        if isinstance(side, RVar):
                            constrain_var(side.name, ILIST, side.span)
                        else:
                            walk(side, ILIST)
                else:
                    walk(it.lhs, INT)
                    walk(it.rhs, INT)

        fresh_eqs: list[ConstraintAtom] = []
        fresh_count = [0]

        def build(t: RawTerm, sort: str) -> Term:
            if isinstance(t, RVar):
                return Var(t.name, sorts.get(t.name, INT))
            if isinstance(t, RNum):
                return IntConst(t.value)
            if isinstance(t, RList):
                tail: Term = build(t.tail, ILIST) if t.tail is not None else NIL
                out = tail
                for x in reversed(t.items):
                    out = Cons(build(x, INT), out)
                return out
            # arithmetic
            return lin_to_term(to_lin(t))

        def to_lin(t: RawTerm) -> Lin:
            if isinstance(t, RVar):
                return Lin.var(t.name)
            if isinstance(t, RNum):
                return Lin.constant(t.value)
            if isinstance(t, ROp):
                if t.op == "neg":
                    return to_lin(t.args[0]).scale(-1)
                a, b = to_lin(t.args[0]), to_lin(t.args[1])
                if t.op == "+":
                    return a + b
                if t.op == "-":
                    return a - b
                if a.is_const():
                    return b.scale(a.const)
                if b.is_const():
                    return a.scale(b.const)
                raise ParseFailure([ParseError(
                    t.span, "nonlinear multiplication")])
            raise ParseFailure([ParseError(t.span, "list term in arithmetic")])

        def build_atom_arg(t: RawTerm, sort: str) -> Term:
            built = build(t, sort)
            if isinstance(built, (LinTerm, IntConst)) and isinstance(t, ROp):
                fresh_count[0] += 1
                v = Var(f"_E{fresh_count[0]}", INT)
                fresh_eqs.append(IntRel.make("=", v, built))
                return v
            return built

        def build_atom(a: RAtom) -> Atom:
            info = self.preds[a.pred]
            return Atom(a.pred, tuple(
                build_atom_arg(x, s) for x, s in zip(a.args, info.arg_sorts)))

        head = build_atom(rc.head) if rc.head else None
        constraint: list[ConstraintAtom] = []
        body: list[Atom] = []
        for it in rc.items:
            if isinstance(it, RAtom):
                body.append(build_atom(it))
            elif it.op in _LIST_RELS:
                constraint.append(ListRel(_LIST_RELS[it.op],
                                          build(it.lhs, ILIST),
                                          build(it.rhs, ILIST)))
            else:
                op = {"=": "=", "=\\=": "!=", "<": "<", "=<": "<=",
                      ">": ">", ">=": ">="}[it.op]
                constraint.append(IntRel.make(op, build(it.lhs, INT),
                                              build(it.rhs, INT)))
        constraint.extend(fresh_eqs)
        return Clause(rc.label or default_id, head, tuple(constraint),
                      tuple(body))


def parse_program(text: str, path: str = "<string>") -> Program:
    """Parse a .chc source into a Program.  Raises ParseFailure carrying the
    list of ParseErrors on any lexical, syntactic, or sort error."""
    toks = tokenize(text, path)
    # attach comment labels: a comment like "12f." or "12f" right before a
    # clause labels it
    comment_labels: dict[int, str] = {}
    significant = []
    pending: Optional[str] = None
    for t in toks:
        if t.kind == "COMMENT":
            word = t.text.rstrip(".").strip()
            if word and all(ch.isalnum() or ch in "_." for ch in word):
                pending = word
            continue
        if pending is not None:
            comment_labels[len(significant)] = pending
            pending = None
        significant.append(t)

    p = _Parser(significant)
    decls: dict[str, PredicateInfo] = {}
    raw_clauses: list[tuple[Optional[str], int]] = []
    rclauses: list[RClause] = []
    errors: list[ParseError] = []
    while p.peek().kind != "EOF":
        try:
            if p.at_punct(":-"):
                d = p.parse_decl()
                if d.name in decls:
                    errors.append(ParseError(
                        p.peek().span, f"duplicate declaration of {d.name}"))
                decls[d.name] = d
            else:
                label = comment_labels.get(p.i)
                rclauses.append(p.parse_clause(label))
        except ParseFailure as e:
            errors.extend(e.errors)
            # recover: skip to just after next '.'
            while p.peek().kind != "EOF":
                t = p.next()
                if t.kind == "PUNCT" and t.text == ".":
                    break
    if errors:
        raise ParseFailure(errors)
    el = _Elaborator(decls)
    clauses: list[Clause] = []
    used_ids = set()
    for k, rc in enumerate(rclauses):
        try:
            c = el.elaborate(rc, default_id=f"c{k + 1}")
            if c.id in used_ids:
                errors.append(ParseError(rc.span, f"duplicate clause id {c.id}"))
            used_ids.add(c.id)
            clauses.append(c)
        except ParseFailure as e:
            errors.extend(e.errors)
    if errors:
        raise ParseFailure(errors)
    try:
        return Program(tuple(clauses), decls)
    except ChcError as e:
        raise ParseFailure([ParseError(SourceSpan(path, 1, 1), str(e))])


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntConst):
        return str(t.value)
    if isinstance(t, Nil):
        return "[]"
    if isinstance(t, Cons):
        items = []
        cur: Term = t
        while isinstance(cur, Cons):
            items.append(render_term(cur.head))
            cur = cur.tail
        if isinstance(cur, Nil):
            return "[" + ",".join(items) + "]"
        return "[" + ",".join(items) + "|" + render_term(cur) + "]"
    return render_lin(t.lin)


def render_lin(lin: Lin) -> str:
    parts: list[str] = []
    for v, c in lin.coeffs:
        if c == 1:
            term = v
        elif c == -1:
            term = "-" + v
        else:
            term = f"{c}*{v}" if c > 0 else f"-{-c}*{v}"
        if parts and not term.startswith("-"):
            parts.append("+" + term)
        else:
            parts.append(term)
    if lin.const != 0 or not parts:
        k = lin.const
        parts.append((("+" if parts and k > 0 else "") + str(k)))
    return "".join(parts)


def render_constraint(ca: ConstraintAtom) -> str:
    if isinstance(ca, IntRel):
        lin = ca.rel.lin
        pos = {v: c for v, c in lin.coeffs if c > 0}
        neg = {v: -c for v, c in lin.coeffs if c < 0}
        lc, rc = (lin.const, 0) if lin.const > 0 else (0, -lin.const)
        lhs = render_lin(Lin.of(pos, lc))
        rhs = render_lin(Lin.of(neg, rc))
        op = {"=": "=", "!=": "=\\=", "<=": "=<", "<": "<"}[ca.rel.op]
        return f"{lhs}{op}{rhs}"
    if isinstance(ca, ListRel):
        op = "==" if ca.op == EQL else "\\=="
        return f"{render_term(ca.lhs)}{op}{render_term(ca.rhs)}"
    return "true" if ca.value else "fail"


def render_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(render_term(t) for t in a.args)})"


def render_clause(c: Clause) -> str:
    head = "false" if c.head is None else render_atom(c.head)
    items = [render_constraint(x) for x in c.constraint] + \
            [render_atom(a) for a in c.body]
    if not items:
        return head + "."
    return head + " :- " + ", ".join(items) + "."


def print_program(p: Program) -> str:
    lines: list[str] = []
    for info in p.predicates.values():
        args = ", ".join(
            s + (":" + info.mode(i) if info.modes else "")
            for i, s in enumerate(info.arg_sorts))
        total = " total_functional" if info.total_functional else ""
        lines.append(f":- declare {info.name}({args}){total}.")
    if lines:
        lines.append("")
    for c in p.clauses:
        if c.id.isdigit():
            lines.append(f"{c.id}. {render_clause(c)}")
        else:
            lines.append(f"% {c.id}.")
            lines.append(render_clause(c))
    return "\n".join(lines) + "\n"
