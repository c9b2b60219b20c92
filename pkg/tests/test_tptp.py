from collections import Counter
from io import StringIO

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atpboost.errors import InputError, TPTPSyntaxError
from atpboost.tptp import (
    Atom, BinOp, Not, Quant, Var, extract_features, format_formula, format_statement,
    parse_formula, parse_statements, write_problem,
)


def test_precedence_and_associativity():
    f = parse_formula("p | q & r => s")
    assert isinstance(f, BinOp) and f.op == "=>"
    assert f.left.op == "|" and f.left.right.op == "&"


def test_quantifier_and_negation():
    f = parse_formula("![X, Y]: ~ p(X, Y)")
    assert isinstance(f, Quant) and f.kind == "!"
    assert isinstance(f.body, Not)
    assert f.body.arg == Atom("p", (Var("X"), Var("Y")))


def test_statement_roles_and_annotations():
    text = """
    % comment
    fof(a1, axiom, p(c)).
    fof(t1, conjecture, ![X]: (p(X) => q(X)), file('x.p', t1)).
    fof(h1, hypothesis, q(c)).
    """
    stmts = parse_statements(text)
    assert [s.name for s in stmts] == ["a1", "t1", "h1"]
    assert [s.role for s in stmts] == ["axiom", "conjecture", "axiom"]


@pytest.mark.parametrize("bad", [
    "fof(a, axiom, p <= q).",
    "fof(a, axiom, p <~> q).",
    "fof(a, axiom, p ~& q).",
    "fof(a, axiom, p(X)).",
    "fof(a, axiom, p(c)",
    "fof(a, axiom, 'quoted'(c)).",
])
def test_rejects(bad):
    with pytest.raises(InputError):
        parse_statements(bad)


def test_syntax_error_position():
    with pytest.raises(TPTPSyntaxError) as exc:
        parse_statements("fof(a, axiom, p(c)).\nfof(b, axiom, & q).")
    assert exc.value.line == 2


def test_duplicate_and_arity():
    with pytest.raises(InputError):
        parse_statements("fof(a, axiom, p).\nfof(a, axiom, q).")
    with pytest.raises(InputError):
        parse_statements("fof(a, axiom, p(c)).\nfof(b, axiom, p(c, c)).")
    assert len(parse_statements("fof(a, axiom, p(c)).\nfof(b, axiom, p(c, c)).", check_arity=False)) == 2


def test_features():
    f = parse_formula("![X]: (p(f(X)) & X = c)")
    feats = extract_features(f)
    # variables only show up as walk targets, written V
    assert feats == Counter({
        "sym:p": 1, "sym:f": 1, "sym:=": 1, "sym:c": 1,
        "walk:p-f": 1, "walk:f-V": 1, "walk:=-V": 1, "walk:=-c": 1,
    })


def test_feature_variable_renaming_invariance():
    a = extract_features(parse_formula("![X]: p(X, f(X))"))
    b = extract_features(parse_formula("![Y]: p(Y, f(Y))"))
    assert a == b


def test_write_problem_puts_axioms_first():
    stmts = {s.name: s for s in parse_statements(
        "fof(a, axiom, p(c)).\nfof(b, axiom, q(c)).\nfof(t, conjecture, p(c) & q(c)).")}
    buf = StringIO()
    write_problem(stmts["t"], [stmts["a"], stmts["b"]], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("fof(a, axiom") and lines[-1].startswith("fof(t, conjecture")
    assert parse_statements(buf.getvalue())[-1].formula == stmts["t"].formula
    with pytest.raises(InputError):
        write_problem(stmts["t"], [stmts["a"], stmts["a"]], StringIO())


_atoms = st.sampled_from(["p(X)", "q(X, c)", "r", "X = f(X)", "s(g(c))"])


def _formulas():
    return st.recursive(
        _atoms,
        lambda inner: st.one_of(
            st.builds(lambda a: f"~ {a}", inner),
            st.builds(lambda a, op, b: f"({a} {op} {b})", inner, st.sampled_from(["&", "|", "=>", "<=>"]), inner),
        ),
        max_leaves=8,
    )


@settings(max_examples=150, deadline=None)
@given(_formulas())
def test_format_parse_roundtrip(body):
    f = parse_formula(f"![X]: ({body})")
    again = parse_formula(format_formula(f))
    assert again == f
    s = parse_statements(f"fof(x, axiom, ![X]: ({body})).")[0]
    assert parse_statements(format_statement(s))[0].formula == f
