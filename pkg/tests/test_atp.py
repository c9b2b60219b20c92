import sys
from pathlib import Path

import numpy as np
import pytest

from atpboost.atp import (
    ERROR, PROVED, UNPROVED, OracleTheory, Prover, ProverConfig, atp_evaluate,
    make_slices, oracle_prove, parse_prover_output, proofs_from_results, pseudo_minimize,
)
from atpboost.errors import InputError

from conftest import random_corpus

STUB = Path(__file__).parent / "data" / "stub_prover.py"


@pytest.mark.parametrize("length, expected", [
    (0, []), (1, [1]), (5, [1, 2, 4, 5]), (600, [2 ** i for i in range(10)]),
    (1000, [2 ** i for i in range(10)]), (512, [2 ** i for i in range(10)]), (8, [1, 2, 4, 8]),
])
def test_slices(length, expected):
    assert make_slices(length) == expected


def theory():
    return OracleTheory.from_lines("t: a b | c\nu: a\n")


def test_oracle_prove():
    th = theory()
    assert oracle_prove("t", ["a", "b", "d"], th).used == frozenset("ab")
    assert oracle_prove("t", ["a", "b", "c"], th).used == frozenset("c")
    assert oracle_prove("t", ["a"], th).status == UNPROVED
    assert oracle_prove("zz", ["a"], th).status == UNPROVED
    capped = OracleTheory(th.sets, max_axioms=2)
    assert oracle_prove("t", ["a", "b", "d"], capped).status == UNPROVED
    assert oracle_prove("t", ["a", "b"], capped).status == PROVED


def test_oracle_file_roundtrip():
    th = OracleTheory.from_lines("t: b a | c\n# x\n")
    assert OracleTheory.from_lines(th.dumps()).sets == th.sets


def test_parse_prover_output():
    out = """# SZS status Theorem
fof(a1, axiom, p, file('x.p', a1)).
fof(c, conjecture, p, file('x.p', c)).
cnf(c_0, plain, $false, inference(x)).
"""
    assert parse_prover_output(out) == (PROVED, frozenset({"a1"}))
    assert parse_prover_output("# SZS status ResourceOut\n")[0] == UNPROVED
    assert parse_prover_output("# SZS status Theorem\n")[0] == ERROR
    assert parse_prover_output("")[0] == UNPROVED


def oracle_setup(seed, n=30):
    rng = np.random.default_rng(seed)
    corpus = random_corpus(rng, n=n)
    sets = {}
    for t in corpus.theorems:
        allowed = corpus.available_premises(t)
        fam = [frozenset(rng.choice(allowed, size=int(rng.integers(1, min(4, len(allowed)) + 1)), replace=False).tolist())
               for _ in range(int(rng.integers(1, 4)))]
        sets[t] = frozenset(fam)
    return rng, corpus, OracleTheory(sets)


def test_pseudo_minimize_reaches_fixpoint():
    for seed in range(30):
        rng, corpus, th = oracle_setup(seed)
        prover = Prover(ProverConfig(), corpus, th)
        for t in corpus.theorems:
            proof = pseudo_minimize(t, corpus.available_premises(t), prover)
            assert oracle_prove(t, proof.premises, th).used == proof.premises


def test_evaluate_orders_results_and_validates():
    _, corpus, th = oracle_setup(1)
    prover = Prover(ProverConfig(), corpus, th)
    rankings = {t: corpus.available_premises(t)[::-1] for t in corpus.theorems}
    results = atp_evaluate(rankings, corpus, prover)
    keys = [(corpus.position[r.theorem], r.slice_length) for r in results]
    assert keys == sorted(keys)
    for r in results:
        if r.status == PROVED:
            assert oracle_prove(r.theorem, r.used, th).used == r.used
    t = corpus.theorems[0]
    with pytest.raises(InputError):
        atp_evaluate({t: [t]}, corpus, prover)


def test_pool_size_does_not_change_results():
    _, corpus, th = oracle_setup(2, n=40)
    rankings = {t: corpus.available_premises(t) for t in corpus.theorems}
    one = atp_evaluate(rankings, corpus, Prover(ProverConfig(workers=1), corpus, th))
    many = atp_evaluate(rankings, corpus, Prover(ProverConfig(workers=8), corpus, th))
    assert [(r.theorem, r.slice_length, r.status, r.used) for r in one] == \
           [(r.theorem, r.slice_length, r.status, r.used) for r in many]


def test_proofs_from_results_dedups():
    _, corpus, th = oracle_setup(3)
    rankings = {t: corpus.available_premises(t) for t in corpus.theorems}
    proofs = proofs_from_results(atp_evaluate(rankings, corpus, Prover(ProverConfig(), corpus, th)))
    assert len(proofs) == len({(p.theorem, p.premises) for p in proofs})


def test_external_prover_matches_oracle(tmp_path, monkeypatch):
    _, corpus, th = oracle_setup(4, n=20)
    theory_file = tmp_path / "theory.txt"
    theory_file.write_text(th.dumps())
    monkeypatch.setenv("STUB_THEORY", str(theory_file))
    cfg = ProverConfig(kind="external", command=f"{sys.executable} {STUB} {{problem}}", cpu_limit=5,
                       workers=4, keep_problems=str(tmp_path / "problems"))
    ext = Prover(cfg, corpus)
    orc = Prover(ProverConfig(), corpus, th)
    rankings = {t: corpus.available_premises(t) for t in corpus.theorems[:4]}
    a = atp_evaluate(rankings, corpus, ext)
    b = atp_evaluate(rankings, corpus, orc)
    assert [(r.status, r.used) for r in a] == [(r.status, r.used) for r in b]
    assert any((tmp_path / "problems").iterdir())


def test_missing_prover_binary_is_error():
    _, corpus, th = oracle_setup(5, n=10)
    cfg = ProverConfig(kind="external", command="/nonexistent/prover {problem}")
    t = corpus.theorems[0]
    assert Prover(cfg, corpus).prove(t, corpus.available_premises(t)).status == ERROR


def test_oracle_problems_detect_bad_sets():
    _, corpus, _ = oracle_setup(6, n=10)
    t = corpus.theorems[0]
    bad = OracleTheory({t: frozenset([frozenset([t])]), "ghost": frozenset()})
    assert len(bad.problems(corpus)) == 2
