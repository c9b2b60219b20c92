import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from atpboost.proofdb import Proof, ProofDb, read_proofs, short_proofs, subsumption_reduce, useful_premises

sets_st = st.lists(st.frozensets(st.sampled_from("abcdefg"), max_size=4), max_size=12)


def brute_minimal(sets):
    sets = {frozenset(s) for s in sets}
    return frozenset(s for s in sets if not any(o < s for o in sets))


@settings(max_examples=300, deadline=None)
@given(sets_st)
def test_reduce_matches_brute_force(sets):
    assert subsumption_reduce(sets) == brute_minimal(sets)


@settings(max_examples=300, deadline=None)
@given(sets_st)
def test_reduce_is_antichain_and_idempotent(sets):
    r = subsumption_reduce(sets)
    assert all(not a < b for a, b in itertools.permutations(r, 2))
    assert subsumption_reduce(r) == r


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["t1", "t2", "t3"]), st.frozensets(st.sampled_from("abcde"), max_size=3)), max_size=15),
       st.randoms())
def test_update_order_free(batch, rnd):
    proofs = [Proof(t, s) for t, s in batch]
    shuffled = list(proofs)
    rnd.shuffle(shuffled)
    assert ProofDb().update(proofs) == ProofDb().update(shuffled)
    # one batch at a time is the same as all at once
    db = ProofDb()
    for p in proofs:
        db = db.update([p])
    assert db == ProofDb().update(proofs)


def test_useful_and_short():
    db = ProofDb().update([Proof("t", "ab"), Proof("t", "cde"), Proof("t", "fghij")])
    assert useful_premises(db, "t") == set("abcdefghij")
    assert sorted(map(sorted, short_proofs(db, "t"))) == [list("ab"), list("cde")]


def test_save_load_roundtrip(tmp_path):
    db = ProofDb().update([Proof("t", ["b", "a"]), Proof("u", [])])
    path = tmp_path / "p.txt"
    db.save(path)
    assert ProofDb.load(path) == db
    assert read_proofs("t: a b\n# c\n\nu:\n") == [Proof("t", "ab"), Proof("u", [])]


def test_proved_count_monotone():
    rng = np.random.default_rng(3)
    db = ProofDb()
    for _ in range(50):
        t = f"t{rng.integers(10)}"
        new = db.update([Proof(t, rng.choice(list("abcdef"), size=2, replace=False))])
        assert len(new) >= len(db)
        assert all(t in new for t in db.theorems())
        db = new
