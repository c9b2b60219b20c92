import numpy as np
import pytest
from io import StringIO

from atpboost.dataset import MiningParams, create_training_set, mining_sets, negative_mining
from atpboost.errors import InputError
from atpboost.proofdb import Proof, ProofDb, short_proofs, useful_premises

from conftest import random_corpus, random_db
from oracles import brute_mined


@pytest.mark.parametrize("method", ["simple", "short"])
def test_cardinality_and_no_leakage(method):
    rng = np.random.default_rng(7)
    corpus = random_corpus(rng, n=40)
    db = random_db(rng, corpus)
    for ratio in (1, 2, 4, 16):
        ts = create_training_set(db, corpus, method, ratio, seed=1)
        for t in db.theorems():
            pos = {p for (tt, p) in ts.positives() if tt == t}
            neg = {p for (tt, p) in ts.negatives() if tt == t}
            useful = useful_premises(db, t)
            if method == "simple":
                assert pos == useful
            else:
                assert pos == set().union(*short_proofs(db, t))
            assert len(neg) == min(ratio * len(pos), len(corpus.available_premises(t)) - len(useful))
            assert not neg & useful
            assert all(corpus.precedes(p, t) for p in pos | neg)


def test_rows_are_pair_vectors():
    rng = np.random.default_rng(8)
    corpus = random_corpus(rng)
    db = random_db(rng, corpus)
    ts = create_training_set(db, corpus, "simple", 2, seed=0)
    for i, (t, p) in enumerate(ts.pairs):
        assert ts.row(i) == corpus.pair_vector(t, p)
    buf = StringIO()
    ts.dump(buf)
    assert len(buf.getvalue().splitlines()) == len(ts)


def test_seeded_and_per_theorem_streams():
    rng = np.random.default_rng(9)
    corpus = random_corpus(rng, n=40)
    db = random_db(rng, corpus)
    a = create_training_set(db, corpus, "simple", 4, seed=5)
    b = create_training_set(db, corpus, "simple", 4, seed=5)
    assert a.pairs == b.pairs
    # dropping a theorem leaves the others' negatives unchanged
    keep = db.theorems()[1:]
    c = create_training_set(db.restrict(keep), corpus, "simple", 4, seed=5)
    assert {pr for pr in a.negatives() if pr[0] in keep} == c.negatives()


def test_mining_variants_against_brute_force():
    rng = np.random.default_rng(10)
    for _ in range(30):
        corpus = random_corpus(rng, n=25)
        db = random_db(rng, corpus)
        rankings = {t: list(rng.permutation(corpus.available_premises(t))) for t in db.theorems()}
        all_ = mining_sets(db, rankings, "negmin_all")
        one = mining_sets(db, rankings, "negmin_1")
        rand = mining_sets(db, rankings, "negmin_rand", seed=3)
        for t in db.theorems():
            useful = useful_premises(db, t)
            assert set(all_[t]) == brute_mined(rankings[t], useful, "negmin_all")
            assert set(one[t]) == brute_mined(rankings[t], useful, "negmin_1")
            assert len(rand[t]) == len(all_[t]) // 2 and set(rand[t]) <= set(all_[t])


def test_negative_mining_adds_mined_pairs():
    rng = np.random.default_rng(11)
    corpus = random_corpus(rng, n=40)
    db = random_db(rng, corpus)
    rankings = {t: list(rng.permutation(corpus.available_premises(t))) for t in db.theorems()}
    params = MiningParams("negmin_all", "short", 2, seed=4)
    ts = negative_mining(db, rankings, corpus, params)
    base = create_training_set(db, corpus, "short", 2, seed=4)
    mined = mining_sets(db, rankings, "negmin_all")
    assert base.negatives() <= ts.negatives()
    assert ts.negatives() == base.negatives() | {(t, p) for t, ps in mined.items() for p in ps}
    assert len(ts.pairs) == len(set(ts.pairs))


def test_mining_rejects_bad_rankings():
    rng = np.random.default_rng(12)
    corpus = random_corpus(rng)
    db = random_db(rng, corpus)
    with pytest.raises(InputError):
        mining_sets(db, {}, "negmin_all")
    t = db.theorems()[0]
    later = corpus.premises[-1] if corpus.premises[-1] != t else corpus.premises[-2]
    bad = {u: [later] + sorted(useful_premises(db, u)) for u in db.theorems()}
    if not corpus.precedes(later, t):
        with pytest.raises(InputError):
            negative_mining(db, bad, corpus, MiningParams())


def test_unknown_theorem():
    rng = np.random.default_rng(13)
    corpus = random_corpus(rng)
    with pytest.raises(InputError):
        create_training_set(ProofDb().update([Proof("ghost", ["a000"])]), corpus)
