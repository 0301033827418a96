"""Tiny scalar expression language for right-hand sides in scenario files.

Grammar (standard precedence, ``^`` binds tightest and is right-associative,
then unary minus, then ``* /``, then ``+ -``)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Identifiers are the time variable ``t``, the state ``u``, the delayed state
``ud``, declared parameter names, or one of the built-in functions
``sin cos exp abs tanh sqrt min max sat`` (``sat`` clamps to [-1, 1]).
Unknown identifiers, arity mistakes and syntax errors raise
:class:`~fuzzyfrac.errors.ParseError` carrying the byte offset.

Evaluation works elementwise on numpy arrays as well as on floats, so a
parsed tree can drive a whole batch of endpoint trajectories at once.
Division by zero, roots/powers leaving the real line, and non-finite
intermediates raise :class:`~fuzzyfrac.errors.EvalError` instead of letting
NaN propagate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalError, ParseError

__all__ = ["Expr", "parse", "evaluate", "to_source", "VARIABLES", "FUNCTIONS"]

VARIABLES = ("t", "u", "ud")

_UNARY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "tanh": np.tanh,
}

FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "abs": 1,
    "tanh": 1,
    "sqrt": 1,
    "sat": 1,
    "min": 2,
    "max": 2,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Num, Name, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# lexer


_TOKEN_OPS = set("+-*/^(),")


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str):
    """Yield (kind, text, byte_offset); kind in {num, ident, op, end}."""
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        off = _byte_offset(source, i)
        if ch in _TOKEN_OPS:
            yield ("op", ch, off)
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ParseError(f"malformed number {text!r}", off, ("number",))
            yield ("num", value, off)
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            yield ("ident", source[i:j], off)
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", off, ("token",))
    yield ("end", "", _byte_offset(source, n))


class _Parser:
    def __init__(self, source: str, params):
        self.source = source
        self.params = frozenset(params)
        self.tokens = list(_tokenize(source))
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        if tok[0] != "end":
            self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ParseError(f"expected {op!r}", off, (op,))

    # grammar ---------------------------------------------------------------

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {text!r}", off, ("end of input",))
        return e

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, off = self.advance()
        if kind == "num":
            return Num(text)
        if kind == "ident":
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "(":
                return self.call(text, off)
            if text in VARIABLES or text in self.params:
                return Name(text)
            raise ParseError(
                f"unknown identifier {text!r}", off, ("t", "u", "ud", "parameter")
            )
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        shown = text if text else "end of input"
        raise ParseError(f"expected expression, found {shown!r}", off, ("expression",))

    def call(self, name: str, off: int) -> Expr:
        if name not in FUNCTIONS:
            raise ParseError(f"unknown function {name!r}", off, tuple(sorted(FUNCTIONS)))
        self.expect_op("(")
        args = [self.expr()]
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == ",":
                self.advance()
                args.append(self.expr())
            else:
                break
        self.expect_op(")")
        if len(args) != FUNCTIONS[name]:
            raise ParseError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}",
                off,
                (f"{FUNCTIONS[name]} argument(s)",),
            )
        return Call(name, tuple(args))


def parse(source: str, params=()) -> Expr:
    """Parse ``source`` into an immutable expression tree.

    ``params`` declares the parameter names that may appear besides the
    built-in variables.
    """
    if not isinstance(source, str):
        raise ParseError("expression source must be text", 0, ("text",))
    return _Parser(source, params).parse()


# ---------------------------------------------------------------------------
# evaluation


def _check_finite(value, what: str):
    if isinstance(value, np.ndarray):
        if not np.all(np.isfinite(value)):
            raise EvalError(f"non-finite value produced by {what}")
    elif not np.isfinite(value):
        raise EvalError(f"non-finite value produced by {what}")
    return value


def evaluate(e: Expr, env: dict):
    """Evaluate a tree under variable/parameter bindings.

    Values may be floats or numpy arrays (broadcast elementwise).
    """
    with np.errstate(all="ignore"):
        return _eval(e, env)


def _eval(e: Expr, env: dict):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Name):
        try:
            value = env[e.ident]
        except KeyError:
            raise EvalError(f"unbound variable {e.ident!r}") from None
        return _check_finite(value, f"binding {e.ident!r}")
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, env)
        b = _eval(e.right, env)
        if e.op == "+":
            r = a + b
        elif e.op == "-":
            r = a - b
        elif e.op == "*":
            r = a * b
        elif e.op == "/":
            if np.any(b == 0):
                raise EvalError("division by zero")
            r = a / b
        else:  # ^
            neg_base = np.any(np.asarray(a) < 0)
            if neg_base and np.any(np.asarray(b) != np.floor(b)):
                raise EvalError("negative base with non-integer exponent")
            r = np.power(a, b)
        return _check_finite(r, f"operator {e.op!r}")
    if isinstance(e, Call):
        args = [_eval(a, env) for a in e.args]
        if e.func == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise EvalError("sqrt of negative value")
            r = np.sqrt(args[0])
        elif e.func == "sat":
            r = np.clip(args[0], -1.0, 1.0)
        elif e.func == "min":
            r = np.minimum(args[0], args[1])
        elif e.func == "max":
            r = np.maximum(args[0], args[1])
        else:
            r = _UNARY_FUNCS[e.func](args[0])
        return _check_finite(r, f"function {e.func}")
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# pretty-printer (round-trips through parse)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(e: Expr) -> str:
    """Render a tree back to source; reparsing yields an identical tree."""
    return _render(e, 0)


def _render(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, Neg):
        inner = _render(e.operand, _PREC["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PREC["neg"] else text
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        if e.op == "^":
            # right-associative; the exponent re-enters at unary level
            left = _render(e.left, prec + 1)
            right = _render(e.right, _PREC["neg"])
            text = f"{left} ^ {right}"
        else:
            left = _render(e.left, prec)
            # parse is left-associative: parenthesize any same-precedence
            # right subtree so the tree shape survives a round-trip
            right = _render(e.right, prec + 1)
            text = f"{left} {e.op} {right}"
        return f"({text})" if parent_prec > prec else text
    if isinstance(e, Call):
        return f"{e.func}({', '.join(_render(a, 0) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")
