"""Rankings and the three learning/proving loops.

``run_split`` trains once and evaluates a held-out part of the theorems.
``run_incremental`` keeps training on the training side while both sides
are re-evaluated every round.  ``run_scratch`` starts without any proofs
from random rankings and feeds every round's proofs back into learning.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .atp import Prover, atp_evaluate, proofs_from_results
from .dataset import MiningParams, create_training_set, negative_mining
from .errors import InputError
from .learner.gbdt import ModelParams, train_gbdt
from .learner.knn import KnnRanker
from .proofdb import ProofDb
from .rng import derive_rng

log = logging.getLogger(__name__)

METHODS = ("simple", "short", "negmin_all", "negmin_rand", "negmin_1", "knn")
TRAIN_FRACTION = 1000 / 1342


@dataclass(frozen=True)
class LoopParams:
    method: str = "simple"
    ratio: int = 16
    model: ModelParams = field(default_factory=ModelParams)
    k: int = 40
    max_rounds: int = 30
    seed: int = 0
    train_fraction: float = TRAIN_FRACTION
    record_wall_time: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.ratio < 1:
            raise ValueError("ratio must be >= 1")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")


@dataclass(frozen=True)
class RoundReport:
    round: int
    method: str
    proved: int
    total_theorems: int
    total_proofs: int
    new_proofs: int
    wall_s: float | None
    proved_names: tuple = ()


@dataclass
class RunResult:
    reports: list = field(default_factory=list)
    rankings: dict = field(default_factory=dict)
    model: object = None
    db: ProofDb = field(default_factory=ProofDb)
    train_db: ProofDb | None = None


# -- rankings ------------------------------------------------------------------


def create_rankings(conjectures, model, corpus, chunk_rows: int = 20000) -> dict:
    """Order each conjecture's allowed premises by predicted relevance.

    Premises are sorted by the model's log-odds (the same order as its
    probabilities, without ties from saturation), highest first; equal
    scores keep chronological order.
    """
    conjectures = list(conjectures)
    for c in conjectures:
        if c not in corpus:
            raise KeyError(f"unknown conjecture {c!r}")
    forest = model.compile()
    n = corpus.n_features
    cols = forest.columns
    left_cols, right_cols = cols[cols < n], cols[cols >= n] - n
    n_left = len(left_cols)
    premise_block = corpus.dense_block(corpus.premises, right_cols)
    conj_block = corpus.dense_block(conjectures, left_cols)
    out = {}

    def flush(batch):
        if not batch:
            return
        sizes = [corpus.position[c] for _, c in batch]
        X = np.empty((sum(sizes), len(cols)))
        r = 0
        for (i, c), m in zip(batch, sizes):
            X[r:r + m, :n_left] = conj_block[i]
            X[r:r + m, n_left:] = premise_block[:m]
            r += m
        raw = forest.raw(X)
        r = 0
        for (_, c), m in zip(batch, sizes):
            scores = raw[r:r + m]
            order = np.lexsort((np.arange(m), -scores))
            out[c] = [corpus.premises[j] for j in order]
            r += m

    batch, rows = [], 0
    for i, c in enumerate(conjectures):
        batch.append((i, c))
        rows += corpus.position[c]
        if rows >= chunk_rows:
            flush(batch)
            batch, rows = [], 0
    flush(batch)
    return {c: out[c] for c in conjectures}


def create_random_rankings(conjectures, corpus, seed=0) -> dict:
    """Uniform shuffles of the allowed premises, one named stream per conjecture."""
    out = {}
    for c in conjectures:
        allowed = corpus.available_premises(c)
        perm = derive_rng(seed, "shuffle", c).permutation(len(allowed))
        out[c] = [allowed[i] for i in perm]
    return out


def knn_rankings(conjectures, corpus, db, k) -> dict:
    ranker = KnnRanker(corpus, db, k)
    return {c: ranker.rank(c) for c in conjectures}


def rankings_valid(rankings, corpus) -> bool:
    return all(
        sorted(r, key=corpus.position.__getitem__) == corpus.available_premises(c)
        for c, r in rankings.items()
    )


# -- one learning step -----------------------------------------------------------


def _round_seed(seed, label, r) -> int:
    return int(derive_rng(seed, label, r).integers(2 ** 31))


def build_training_set(db, corpus, params: LoopParams, prev_rankings, round_seed):
    """``CreateTrainingSet`` or, when mining and rankings exist, ``NegativeMining``."""
    method = params.method
    if method.startswith("negmin"):
        if prev_rankings is None:
            return create_training_set(db, corpus, "short", params.ratio, round_seed)
        mp = MiningParams(method, "short", params.ratio, round_seed)
        return negative_mining(db, {t: prev_rankings[t] for t in db.theorems()}, corpus, mp)
    return create_training_set(db, corpus, method, params.ratio, round_seed)


def learn_and_rank(db, corpus, params: LoopParams, targets, prev_rankings, round_seed):
    """Returns ``(rankings per target, model or None, training set or None)``."""
    if params.method == "knn":
        return knn_rankings(targets, corpus, db, params.k), None, None
    ts = build_training_set(db, corpus, params, prev_rankings, round_seed)
    model = train_gbdt(ts, params.model)
    return create_rankings(targets, model, corpus), model, ts


def _evaluate(rankings, corpus, prover, db):
    results = atp_evaluate(rankings, corpus, prover)
    proofs = proofs_from_results(results)
    new_db = db.update(proofs, corpus)
    added = len(new_db.all_proofs() - db.all_proofs())
    return new_db, added


def _report(r, params, db, total, added, started, theorems):
    names = tuple(t for t in theorems if t in db)
    wall = time.monotonic() - started if params.record_wall_time else None
    return RoundReport(r, params.method, len(names), total, db.restrict(theorems).n_proofs(),
                       added, wall, names)


def _split(corpus, params):
    theorems = list(corpus.theorems)
    if not theorems:
        raise InputError("corpus has no theorems")
    perm = derive_rng(params.seed, "split").permutation(len(theorems))
    n_train = int(round(len(theorems) * params.train_fraction))
    n_train = min(max(n_train, 1), len(theorems))
    train = sorted((theorems[i] for i in perm[:n_train]), key=corpus.position.__getitem__)
    test = sorted((theorems[i] for i in perm[n_train:]), key=corpus.position.__getitem__)
    return train, test


# -- algorithms ------------------------------------------------------------------


def run_split(corpus, proofs: ProofDb, params: LoopParams, prover: Prover, observer=None) -> RunResult:
    """Train on the training side's proofs once and evaluate the test side."""
    started = time.monotonic()
    train, test = _split(corpus, params)
    train_db = proofs.restrict(train)
    if not len(train_db):
        raise InputError("no proofs for any training theorem")
    rankings, model, ts = learn_and_rank(
        train_db, corpus, params, test, None, _round_seed(params.seed, "dataset", 1)
    )
    test_db, added = _evaluate(rankings, corpus, prover, ProofDb())
    report = _report(1, params, test_db, len(test), added, started, test)
    if observer:
        observer(dict(round=1, training_set=ts, rankings=rankings, db=test_db, train_db=train_db))
    return RunResult([report], rankings, model, test_db, train_db)


def run_incremental(corpus, proofs: ProofDb, params: LoopParams, prover: Prover, observer=None) -> RunResult:
    """Feedback loop with a train/test split; test proofs never reach training."""
    train, test = _split(corpus, params)
    train_db = proofs.restrict(train)
    if not len(train_db):
        raise InputError("no proofs for any training theorem")
    test_db = ProofDb()
    result = RunResult(db=test_db, train_db=train_db)
    prev_train_rankings = None
    for r in range(1, params.max_rounds + 1):
        started = time.monotonic()
        rankings, model, ts = learn_and_rank(
            train_db, corpus, params, train + test, prev_train_rankings,
            _round_seed(params.seed, "dataset", r),
        )
        train_rankings = {t: rankings[t] for t in train}
        test_rankings = {t: rankings[t] for t in test}
        train_db, added_train = _evaluate(train_rankings, corpus, prover, train_db)
        test_db, added_test = _evaluate(test_rankings, corpus, prover, test_db)
        result.reports.append(_report(r, params, test_db, len(test), added_test, started, test))
        result.rankings, result.model = test_rankings, model
        result.db, result.train_db = test_db, train_db
        prev_train_rankings = train_rankings
        if observer:
            observer(dict(round=r, training_set=ts, rankings=rankings,
                          train_rankings=train_rankings, db=test_db, train_db=train_db))
        log.info("round %d: %d/%d test theorems proved", r, len(test_db), len(test))
        if added_train == 0 and added_test == 0:
            break
    return result


def run_scratch(corpus, params: LoopParams, prover: Prover, observer=None) -> RunResult:
    """Feedback loop over all theorems, starting from random rankings."""
    theorems = list(corpus.theorems)
    started = time.monotonic()
    rankings = create_random_rankings(theorems, corpus, params.seed)
    db, added = _evaluate(rankings, corpus, prover, ProofDb())
    result = RunResult(rankings=rankings, db=db)
    result.reports.append(_report(0, params, db, len(theorems), added, started, theorems))
    if observer:
        observer(dict(round=0, training_set=None, rankings=rankings, db=db))
    prev = None
    for r in range(1, params.max_rounds + 1):
        if not len(db) or added == 0:
            break
        started = time.monotonic()
        rankings, model, ts = learn_and_rank(
            db, corpus, params, theorems, prev, _round_seed(params.seed, "dataset", r)
        )
        db, added = _evaluate(rankings, corpus, prover, db)
        result.reports.append(_report(r, params, db, len(theorems), added, started, theorems))
        result.rankings, result.model, result.db = rankings, model, db
        prev = rankings
        if observer:
            observer(dict(round=r, training_set=ts, rankings=rankings, db=db))
        log.info("round %d: %d/%d theorems proved", r, len(db), len(theorems))
    return result


def run(algorithm, corpus, proofs, params, prover, observer=None) -> RunResult:
    if algorithm == "split":
        return run_split(corpus, proofs, params, prover, observer)
    if algorithm == "incremental":
        return run_incremental(corpus, proofs, params, prover, observer)
    if algorithm == "scratch":
        return run_scratch(corpus, params, prover, observer)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def with_method(params: LoopParams, method: str) -> LoopParams:
    return replace(params, method=method)
