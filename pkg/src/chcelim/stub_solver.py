"""A stand-in CHC "solver" for offline CI of the solver bridge.

Usage: python -m chcelim.stub_solver [--answer FILE] SCRIPT.smt2

With --answer (or CHC_STUB_ANSWER in the environment) the given canned
response is printed verbatim.  Otherwise the script is inspected: if the
interpretation assigning false to every predicate is a model (every assert
whose consequent is a predicate application or `false` has some predicate
application among its antecedents), it prints sat plus that model; facts or
anything else make it print unknown.  It never proves unsat.
"""

from __future__ import annotations

import argparse
import os
import sys

from .smt2 import Sexp, parse_sexps


def _unwrap_forall(body: Sexp) -> Sexp:
    while isinstance(body, list) and body and body[0] in ("forall", "exists"):
        body = body[2]
    return body


def _conjuncts(s: Sexp) -> list[Sexp]:
    if isinstance(s, list) and s and s[0] == "and":
        out = []
        for x in s[1:]:
            out.extend(_conjuncts(x))
        return out
    return [s]


def _mentions_predicate(s: Sexp, preds: set[str]) -> bool:
    if isinstance(s, str):
        return s in preds
    if not s:
        return False
    if isinstance(s[0], str) and s[0] in preds:
        return True
    return any(_mentions_predicate(x, preds) for x in s)


def all_false_is_model(text: str) -> tuple[bool, dict[str, int]]:
    preds: dict[str, int] = {}
    ok = True
    for s in parse_sexps(text):
        if not isinstance(s, list) or not s:
            continue
        if s[0] == "declare-fun" and s[3] == "Bool":
            preds[s[1]] = len(s[2])
    for s in parse_sexps(text):
        if not (isinstance(s, list) and s and s[0] == "assert"):
            continue
        body = _unwrap_forall(s[1])
        if isinstance(body, list) and body and body[0] == "=>":
            antecedent, consequent = body[1], body[2]
        else:
            antecedent, consequent = "true", body
        head_pred = consequent if isinstance(consequent, str) else \
            (consequent[0] if consequent else None)
        if head_pred == "false" or head_pred in preds:
            if not _mentions_predicate(antecedent, set(preds)):
                ok = False
        elif head_pred == "true":
            continue
        else:
            ok = False
    return ok, preds


_SORT_OF = {"Int": "Int", "Bool": "Bool", "IntList": "IntList"}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="chcelim-stub-solver")
    ap.add_argument("--answer", default=os.environ.get("CHC_STUB_ANSWER"))
    ap.add_argument("script")
    args = ap.parse_args(argv)
    if args.answer:
        sys.stdout.write(open(args.answer).read())
        return 0
    text = open(args.script).read()
    ok, preds = all_false_is_model(text)
    if not ok:
        print("unknown")
        return 0
    print("sat")
    print("(")
    for s in parse_sexps(text):
        if isinstance(s, list) and s and s[0] == "declare-fun" \
                and s[3] == "Bool":
            params = " ".join(f"(x{i} {t if isinstance(t, str) else 'Int'})"
                              for i, t in enumerate(s[2]))
            print(f"  (define-fun {s[1]} ({params}) Bool false)")
    print(")")
    return 0


if __name__ == "__main__":
    sys.exit(main())
