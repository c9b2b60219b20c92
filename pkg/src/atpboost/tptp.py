"""Reader and writer for the FOF fragment of TPTP, plus symbol features.

Only ``fof(name, role, formula).`` items are understood.  Formulas are
parsed into small immutable trees so they can be compared structurally,
printed back and walked for feature extraction.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import InputError, TPTPSyntaxError

# -- formula trees ---------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Fn:
    """Function application; constants have no arguments."""

    symbol: str
    args: tuple = ()


Term = Union[Var, Fn]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of & | => <=>
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quant:
    kind: str  # "!" or "?"
    variables: tuple
    body: "Formula"


Formula = Union[Atom, Eq, Not, BinOp, Quant]

ROLES = ("axiom", "conjecture")


@dataclass(frozen=True)
class Statement:
    name: str
    role: str
    formula: Formula
    source_text: str
    formula_text: str

    def same_as(self, other: "Statement") -> bool:
        return (self.name, self.role, self.formula) == (other.name, other.role, other.formula)


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<op><=>|<~>|=>|<=|~&|~\||!=)
  | (?P<punct>[(),.\[\]:!?~&|=])
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<dollar>\$[a-z][A-Za-z0-9_]*)
  | (?P<number>[0-9]+)
  | (?P<quoted>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise TPTPSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message, expected=None, tok=None):
        tok = tok or self.tok
        line, col = _line_col(self.text, tok.pos)
        return TPTPSyntaxError(message, line, col, expected)

    def expect(self, text):
        if self.tok.text != text or self.tok.kind in ("upper", "lower"):
            found = self.tok.text or "end of input"
            raise self.error(f"found {found!r}", expected=repr(text))
        self.i += 1

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "punct"):
            self.i += 1
            return True
        return False

    def items(self):
        while self.tok.kind != "eof":
            yield self.item()

    def item(self):
        start = self.tok
        if start.text != "fof":
            raise self.error(f"found {start.text!r}", expected="'fof'")
        self.i += 1
        self.expect("(")
        if self.tok.kind not in ("lower", "number"):
            raise self.error(f"found {self.tok.text!r}", expected="statement name")
        name_tok = self.tok
        self.i += 1
        self.expect(",")
        if self.tok.kind != "lower":
            raise self.error(f"found {self.tok.text!r}", expected="role")
        role_tok = self.tok
        self.i += 1
        self.expect(",")
        f_start = self.tok.pos
        self.bound = []
        formula = self.formula()
        f_end = self.toks[self.i - 1].pos + len(self.toks[self.i - 1].text)
        # optional annotations are tolerated and ignored
        if self.accept(","):
            depth = 0
            while not (depth == 0 and self.tok.text == ")"):
                if self.tok.kind == "eof":
                    raise self.error("unterminated annotation", expected="')'")
                if self.tok.text in ("(", "["):
                    depth += 1
                elif self.tok.text in (")", "]"):
                    depth -= 1
                self.i += 1
        self.expect(")")
        self.expect(".")
        end = self.toks[self.i - 1].pos + 1
        role = role_tok.text if role_tok.text == "conjecture" else "axiom"
        return (
            name_tok,
            role,
            formula,
            self.text[start.pos:end],
            self.text[f_start:f_end],
        )

    # formula := unitary (binop unitary)?   with & binding tighter than |
    def formula(self):
        left = self.disjunction()
        tok = self.tok
        if tok.kind == "op" and tok.text in ("=>", "<=>"):
            self.i += 1
            right = self.disjunction()
            return BinOp(tok.text, left, right)
        if tok.kind == "op" and tok.text in ("<=", "<~>", "~&", "~|"):
            raise self.error(f"unsupported connective {tok.text!r}")
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.accept("|"):
            left = BinOp("|", left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unitary()
        while self.accept("&"):
            left = BinOp("&", left, self.unitary())
        return left

    def unitary(self):
        tok = self.tok
        if tok.text in ("!", "?") and tok.kind == "punct":
            self.i += 1
            self.expect("[")
            variables = []
            while True:
                if self.tok.kind != "upper":
                    raise self.error(f"found {self.tok.text!r}", expected="variable")
                variables.append(self.tok.text)
                self.i += 1
                if not self.accept(","):
                    break
            self.expect("]")
            self.expect(":")
            self.bound.extend(variables)
            body = self.unitary()
            del self.bound[-len(variables):]
            return Quant(tok.text, tuple(variables), body)
        if self.accept("~"):
            return Not(self.unitary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        return self.atomic()

    def atomic(self):
        tok = self.tok
        if tok.kind == "quoted":
            raise self.error("quoted atoms are not supported")
        if tok.kind == "upper" or tok.kind in ("lower", "dollar", "number"):
            left = self.term()
            if self.accept("="):
                return Eq(left, self.term())
            if self.accept("!="):
                return Not(Eq(left, self.term()))
            if isinstance(left, Var):
                raise self.error("variable used as a formula", tok=tok)
            return Atom(left.symbol, left.args)
        raise self.error(f"found {tok.text or 'end of input'!r}", expected="formula")

    def term(self):
        tok = self.tok
        if tok.kind == "upper":
            self.i += 1
            if tok.text not in self.bound:
                line, col = _line_col(self.text, tok.pos)
                raise InputError(f"line {line}, column {col}: unbound variable {tok.text}")
            return Var(tok.text)
        if tok.kind in ("lower", "dollar", "number"):
            self.i += 1
            args = []
            if self.accept("("):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
            return Fn(tok.text, tuple(args))
        raise self.error(f"found {tok.text or 'end of input'!r}", expected="term")


def _symbol_arities(f, out: dict):
    def term(t):
        if isinstance(t, Fn):
            yield t.symbol, len(t.args)
            for a in t.args:
                yield from term(a)

    def form(f):
        if isinstance(f, Atom):
            yield f.pred, len(f.args)
            for a in f.args:
                yield from term(a)
        elif isinstance(f, Eq):
            yield from term(f.left)
            yield from term(f.right)
        elif isinstance(f, Not):
            yield from form(f.arg)
        elif isinstance(f, BinOp):
            yield from form(f.left)
            yield from form(f.right)
        else:
            yield from form(f.body)

    for sym, arity in form(f):
        out.setdefault(sym, set()).add(arity)


def parse_statements(text: str, check_arity: bool = True) -> list[Statement]:
    """Parse every ``fof`` item of ``text`` in file order.

    Roles other than ``conjecture`` are normalised to ``axiom``.  Raises
    :class:`TPTPSyntaxError` on malformed input and :class:`InputError` on
    duplicate names, unbound variables or symbols used with two arities.
    """
    parser = _Parser(text)
    statements = []
    seen = set()
    arities: dict = {}
    for name_tok, role, formula, source, ftext in parser.items():
        name = name_tok.text
        if name in seen:
            line, col = _line_col(text, name_tok.pos)
            raise InputError(f"line {line}, column {col}: duplicate statement name {name}")
        seen.add(name)
        _symbol_arities(formula, arities)
        statements.append(Statement(name, role, formula, source, ftext))
    if check_arity:
        bad = sorted(s for s, a in arities.items() if len(a) > 1)
        if bad:
            detail = ", ".join(f"{s}/{sorted(arities[s])}" for s in bad)
            raise InputError(f"inconsistent arity: {detail}")
    return statements


def parse_formula(text: str) -> Formula:
    """Parse a closed formula on its own (handy in tests and the REPL)."""
    parser = _Parser(text)
    f = parser.formula()
    if parser.tok.kind != "eof":
        raise parser.error(f"found {parser.tok.text!r}", expected="end of formula")
    return f


# -- printing ----------------------------------------------------------------


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.symbol
    return f"{t.symbol}({','.join(format_term(a) for a in t.args)})"


def format_formula(f: Formula) -> str:
    """Fully parenthesised TPTP text that reparses to the same tree."""
    if isinstance(f, Atom):
        return format_term(Fn(f.pred, f.args))
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Not):
        return f"~ ({format_formula(f.arg)})"
    if isinstance(f, BinOp):
        return f"({format_formula(f.left)}) {f.op} ({format_formula(f.right)})"
    return f"{f.kind}[{','.join(f.variables)}] : ({format_formula(f.body)})"


def format_statement(s: Statement, role: str | None = None) -> str:
    return f"fof({s.name}, {role or s.role}, {s.formula_text})."


def write_problem(conjecture: Statement, axioms: Iterable[Statement], sink) -> None:
    """Write an ATP problem: axioms in the given order, conjecture last."""
    axioms = list(axioms)
    names = [a.name for a in axioms] + [conjecture.name]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise InputError(f"duplicate names in problem: {', '.join(dup)}")
    for a in axioms:
        sink.write(format_statement(a, "axiom") + "\n")
    sink.write(format_statement(conjecture, "conjecture") + "\n")


# -- features ----------------------------------------------------------------


def extract_features(f: Formula) -> Counter:
    """Symbol unigrams and parent-child symbol walks of a formula.

    Variables are anonymised: they add no unigram and appear as ``V`` in
    walks.  Connectives and quantifiers add nothing.  Equality counts as
    the symbol ``=``.
    """
    bag: Counter = Counter()

    def term(parent, children):
        bag[f"sym:{parent}"] += 1
        for c in children:
            if isinstance(c, Var):
                bag[f"walk:{parent}-V"] += 1
            else:
                bag[f"walk:{parent}-{c.symbol}"] += 1
                term(c.symbol, c.args)

    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            term(g.pred, g.args)
        elif isinstance(g, Eq):
            term("=", (g.left, g.right))
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, BinOp):
            stack.append(g.right)
            stack.append(g.left)
        else:
            stack.append(g.body)
    return bag
