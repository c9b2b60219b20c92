import numpy as np
import pytest

from atpboost.corpus import Corpus
from atpboost.proofdb import Proof, ProofDb
from atpboost.tptp import parse_statements


def random_corpus(rng, n=30, n_preds=6, theorem_frac=0.4):
    """A small corpus of one- or two-atom statements over ``q0..``."""
    names = [f"a{i:03d}" for i in range(n)]
    lines = []
    for name in names:
        atoms = [f"q{rng.integers(n_preds)}(X)" for _ in range(int(rng.integers(1, 3)))]
        lines.append(f"fof({name}, axiom, ![X]: ({' & '.join(atoms)})).")
    stmts = parse_statements("\n".join(lines))
    theorems = [p for i, p in enumerate(names) if i >= 3 and rng.random() < theorem_frac]
    if not theorems:
        theorems = [names[-1]]
    return Corpus(stmts, names, theorems)


def random_db(rng, corpus, max_proofs=3):
    """Random proofs with premises drawn from each theorem's allowed set."""
    proofs = []
    for t in corpus.theorems:
        allowed = corpus.available_premises(t)
        for _ in range(int(rng.integers(1, max_proofs + 1))):
            k = int(rng.integers(1, min(4, len(allowed)) + 1))
            proofs.append(Proof(t, rng.choice(allowed, size=k, replace=False).tolist()))
    return ProofDb().update(proofs, corpus)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_corpus(rng):
    return random_corpus(rng)


def tiny_world(seed=0, **kw):
    """A small synthetic corpus with its oracle and seed proofs."""
    from atpboost.atp import OracleTheory
    from atpboost.synthetic import SyntheticSpec, generate

    spec = SyntheticSpec(**{**dict(premises=120, theorems=40, topics=5, base_lemmas=5, max_axioms=16, seed=seed), **kw})
    text, order, theorems, oracle, seed_proofs = generate(spec)
    corpus = Corpus(parse_statements(text), order, theorems)
    db = ProofDb().update([Proof(t, s) for t, s in seed_proofs.items()], corpus)
    return corpus, oracle, db


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
