"""Binary (theorem, premise) training sets and negative mining."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import SparseVector
from .errors import InputError
from .proofdb import ProofDb, short_proofs, useful_premises
from .rng import derive_rng

POSITIVE_METHODS = ("simple", "short")
MINING_VARIANTS = ("negmin_all", "negmin_rand", "negmin_1")


@dataclass(frozen=True)
class MiningParams:
    variant: str = "negmin_all"
    positive_method: str = "short"
    ratio: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.variant not in MINING_VARIANTS:
            raise ValueError(f"unknown mining variant {self.variant!r}")
        if self.positive_method not in POSITIVE_METHODS:
            raise ValueError(f"unknown positive method {self.positive_method!r}")
        if self.ratio < 1:
            raise ValueError("ratio must be >= 1")


class TrainingSet:
    """Labelled pair examples stored as a CSR matrix of width ``2n``."""

    def __init__(self, pairs, labels, indptr, indices, data, dim):
        self.pairs: list[tuple[str, str]] = list(pairs)
        self.labels = np.asarray(labels, dtype=np.int8)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        self.dim = int(dim)
        if not (len(self.pairs) == len(self.labels) == len(self.indptr) - 1):
            raise ValueError("pairs, labels and rows differ in length")

    def __len__(self):
        return len(self.pairs)

    @property
    def examples(self) -> list[SparseVector]:
        return [self.row(i) for i in range(len(self))]

    def row(self, i) -> SparseVector:
        a, b = self.indptr[i], self.indptr[i + 1]
        return SparseVector(self.indices[a:b], self.data[a:b], self.dim)

    def positives(self) -> set:
        return {pr for pr, y in zip(self.pairs, self.labels) if y == 1}

    def negatives(self) -> set:
        return {pr for pr, y in zip(self.pairs, self.labels) if y == 0}

    def dump(self, sink) -> None:
        """One line per example: ``label theorem premise col:val ...``."""
        for i, ((t, p), y) in enumerate(zip(self.pairs, self.labels)):
            a, b = self.indptr[i], self.indptr[i + 1]
            cols = " ".join(f"{c}:{v:g}" for c, v in zip(self.indices[a:b], self.data[a:b]))
            sink.write(f"{y} {t} {p} {cols}".rstrip() + "\n")


def _assemble(corpus, pairs, labels) -> TrainingSet:
    n = corpus.n_features
    pos = corpus.position
    indptr, ind, dat = corpus.csr_indptr, corpus.csr_indices, corpus.csr_data
    rows_idx, rows_dat, lengths = [], [], []
    for t, p in pairs:
        ta, tb = indptr[pos[t]], indptr[pos[t] + 1]
        pa, pb = indptr[pos[p]], indptr[pos[p] + 1]
        rows_idx.append(ind[ta:tb])
        rows_idx.append(ind[pa:pb] + n)
        rows_dat.append(dat[ta:tb])
        rows_dat.append(dat[pa:pb])
        lengths.append((tb - ta) + (pb - pa))
    out_ptr = np.concatenate([[0], np.cumsum(lengths, dtype=np.int64)])
    out_ind = np.concatenate(rows_idx) if rows_idx else np.zeros(0, dtype=np.int64)
    out_dat = np.concatenate(rows_dat) if rows_dat else np.zeros(0)
    return TrainingSet(pairs, labels, out_ptr, out_ind, out_dat, 2 * n)


def _positives(db, t, method, corpus):
    if method == "simple":
        chosen = useful_premises(db, t)
    elif method == "short":
        chosen = set().union(*short_proofs(db, t))
    else:
        raise ValueError(f"unknown positive method {method!r}")
    return sorted(chosen, key=corpus.position.__getitem__)


def _build(db: ProofDb, corpus, method, ratio, seed, extra_negatives=None) -> TrainingSet:
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    for t in db.theorems():
        if t not in corpus:
            raise InputError(f"theorem {t} from the proof db is not in the corpus")
    pairs, labels = [], []
    for t in sorted(db.theorems(), key=corpus.position.__getitem__):
        useful = useful_premises(db, t)
        positives = _positives(db, t, method, corpus)
        pool = [p for p in corpus.available_premises(t) if p not in useful]
        k = min(ratio * len(positives), len(pool))
        rng = derive_rng(seed, "negatives", t)
        chosen = np.sort(rng.choice(len(pool), size=k, replace=False)) if k else []
        negatives = [pool[i] for i in chosen]
        if extra_negatives and t in extra_negatives:
            already = set(negatives)
            for p in extra_negatives[t]:
                if not corpus.precedes(p, t):
                    raise InputError(f"ranking of {t} contains {p}, which does not precede it")
            negatives += [p for p in extra_negatives[t] if p not in already]
        pairs += [(t, p) for p in positives] + [(t, p) for p in negatives]
        labels += [1] * len(positives) + [0] * len(negatives)
    return _assemble(corpus, pairs, labels)


def create_training_set(db: ProofDb, corpus, method="simple", ratio=16, seed=0) -> TrainingSet:
    """Positives from proofs, plus ``ratio`` random negatives per positive.

    Negatives for ``t`` are drawn without replacement from the allowed
    premises that occur in no proof of ``t``; the count is capped by the
    size of that pool.  Each theorem samples from its own seeded stream.
    """
    return _build(db, corpus, method, ratio, seed)


def mining_sets(db: ProofDb, rankings, variant, seed=0) -> dict[str, list[str]]:
    """Highly ranked premises that no known proof of the theorem uses.

    ``rankings`` maps a theorem to its premise ranking (best first, 0-based
    ranks).  Keys are the theorems of ``db``; sets are listed in rank order.
    """
    if variant not in MINING_VARIANTS:
        raise ValueError(f"unknown mining variant {variant!r}")
    out = {}
    for t in db.theorems():
        if t not in rankings:
            raise InputError(f"theorem {t} has proofs but no ranking")
        ranking = list(rankings[t])
        useful = useful_premises(db, t)
        if variant == "negmin_1":
            cutoff = len(useful)
        else:
            ranks = [i for i, p in enumerate(ranking) if p in useful]
            cutoff = max(ranks) if ranks else 0
        mined = [p for p in ranking[:cutoff] if p not in useful]
        if variant == "negmin_rand":
            rng = derive_rng(seed, "mining", t)
            keep = np.sort(rng.choice(len(mined), size=len(mined) // 2, replace=False))
            mined = [mined[i] for i in keep]
        out[t] = mined
    return out


def negative_mining(db: ProofDb, rankings, corpus, params: MiningParams) -> TrainingSet:
    """``create_training_set`` plus the mined premises as extra negatives."""
    mined = mining_sets(db, rankings, params.variant, params.seed)
    return _build(db, corpus, params.positive_method, params.ratio, params.seed, mined)
