"""k-nearest-neighbours multilabel baseline.

Proved theorems vote for the premises of their proofs, weighted by the
cosine similarity of IDF-weighted feature vectors.
"""

from __future__ import annotations

import numpy as np

from ..proofdb import ProofDb, useful_premises


class KnnRanker:
    def __init__(self, corpus, db: ProofDb, k: int = 40):
        self.corpus = corpus
        self.k = k
        self.proved = sorted(db.theorems(), key=corpus.position.__getitem__)
        self.useful = {t: useful_premises(db, t) for t in self.proved}
        n_docs = len(self.proved)
        df = np.zeros(corpus.n_features)
        for t in self.proved:
            df[corpus.vectors[t].indices] += 1
        # features no proved theorem has get the weight of a df=1 feature
        self.idf = np.log(n_docs / np.maximum(df, 1.0)) if n_docs else np.zeros(corpus.n_features)
        if n_docs:
            rows = [self._weighted(t) for t in self.proved]
            self.matrix = np.vstack(rows)
            self.norms = np.linalg.norm(self.matrix, axis=1)
        else:
            self.matrix = np.zeros((0, corpus.n_features))
            self.norms = np.zeros(0)

    def _weighted(self, name) -> np.ndarray:
        v = self.corpus.vectors[name]
        out = np.zeros(self.corpus.n_features)
        out[v.indices] = v.values * self.idf[v.indices]
        return out

    def neighbours(self, c: str) -> list[tuple[str, float]]:
        """The ``k`` most similar proved theorems; ties go to earlier ones."""
        if not self.proved:
            return []
        q = self._weighted(c)
        qn = np.linalg.norm(q)
        denom = self.norms * qn
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = np.where(denom > 0, self.matrix @ q / denom, 0.0)
        k = min(self.k, len(self.proved))
        order = np.lexsort((np.arange(len(sims)), -sims))[:k]
        return [(self.proved[i], float(sims[i])) for i in order]

    def scores(self, c: str) -> dict[str, float]:
        allowed = self.corpus.available_premises(c)
        scores = dict.fromkeys(allowed, 0.0)
        for t, sim in self.neighbours(c):
            if sim <= 0:
                continue
            for p in self.useful[t]:
                if p in scores:
                    scores[p] += sim
        return scores

    def rank(self, c: str) -> list[str]:
        scores = self.scores(c)
        pos = self.corpus.position
        return sorted(scores, key=lambda p: (-scores[p], pos[p]))


def knn_rank(c: str, corpus, db: ProofDb, k: int = 40) -> dict[str, float]:
    """Scores of every premise allowed for ``c`` (0 for premises with no votes)."""
    return KnnRanker(corpus, db, k).scores(c)

