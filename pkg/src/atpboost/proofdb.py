"""Multiple proofs per theorem, stored as premise-sets.

For every theorem the stored sets form an antichain under inclusion: a
proof whose premises are a superset of another proof's premises is
dropped.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import InputError


@dataclass(frozen=True)
class Proof:
    theorem: str
    premises: frozenset

    def __init__(self, theorem, premises=()):
        object.__setattr__(self, "theorem", theorem)
        object.__setattr__(self, "premises", frozenset(premises))


def subsumption_reduce(sets: Iterable) -> frozenset:
    """Keep the inclusion-minimal sets, without duplicates."""
    unique = sorted({frozenset(s) for s in sets}, key=lambda s: (len(s), sorted(s)))
    kept: list[frozenset] = []
    for s in unique:
        if not any(k <= s for k in kept):
            kept.append(s)
    return frozenset(kept)


def _set_key(s):
    return (len(s), sorted(s))


class ProofDb:
    def __init__(self, proofs: dict | None = None):
        self._sets: dict[str, frozenset] = {}
        for t, family in (proofs or {}).items():
            reduced = subsumption_reduce(family)
            if reduced:
                self._sets[t] = reduced

    def __contains__(self, t):
        return t in self._sets

    def __len__(self):
        return len(self._sets)

    def __eq__(self, other):
        if not isinstance(other, ProofDb):
            return NotImplemented
        return self._sets == other._sets

    def __repr__(self):
        return f"ProofDb({len(self)} theorems, {self.n_proofs()} proofs)"

    def theorems(self) -> list[str]:
        return sorted(self._sets)

    def proofs_of(self, t) -> frozenset:
        return self._sets.get(t, frozenset())

    def items(self):
        for t in sorted(self._sets):
            yield t, self._sets[t]

    def n_proofs(self) -> int:
        return sum(len(f) for f in self._sets.values())

    def all_proofs(self) -> set:
        """Every stored (theorem, premise-set) pair."""
        return {(t, s) for t, f in self._sets.items() for s in f}

    def restrict(self, theorems) -> "ProofDb":
        keep = set(theorems)
        return ProofDb({t: f for t, f in self._sets.items() if t in keep})

    def update(self, new_proofs: Iterable[Proof], corpus=None) -> "ProofDb":
        """Union with ``new_proofs`` followed by subsumption reduction.

        With a corpus, every premise must precede its theorem.
        """
        merged = {t: set(f) for t, f in self._sets.items()}
        for proof in new_proofs:
            if corpus is not None:
                check_proof(proof, corpus)
            merged.setdefault(proof.theorem, set()).add(proof.premises)
        return ProofDb(merged)

    def save(self, path, order=None) -> None:
        """Atomically write the db as ``theorem: p1 p2`` lines."""
        path = Path(path)
        key = (lambda t: order[t]) if order else None
        lines = []
        for t in sorted(self._sets, key=key):
            for s in sorted(self._sets[t], key=_set_key):
                premises = sorted(s, key=key) if order else sorted(s)
                lines.append(f"{t}: {' '.join(premises)}".rstrip() + "\n")
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path, corpus=None) -> "ProofDb":
        return cls().update(read_proofs(Path(path).read_text(encoding="utf-8")), corpus)


def read_proofs(text: str) -> list[Proof]:
    proofs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        t, sep, rest = line.partition(":")
        t = t.strip()
        if not sep or not t or " " in t:
            raise InputError(f"proofs file line {lineno}: expected 'theorem: p1 p2 ...'")
        proofs.append(Proof(t, rest.split()))
    return proofs


def check_proof(proof: Proof, corpus) -> None:
    t = proof.theorem
    if t not in corpus:
        raise InputError(f"proof of unknown theorem {t}")
    for p in proof.premises:
        if p not in corpus:
            raise InputError(f"proof of {t} uses unknown premise {p}")
        if not corpus.precedes(p, t):
            raise InputError(f"proof of {t} uses {p}, which does not precede it")


def update(db: ProofDb, new_proofs: Iterable[Proof], corpus=None) -> ProofDb:
    return db.update(new_proofs, corpus)


def useful_premises(db: ProofDb, t: str) -> set:
    """Premises occurring in at least one proof of ``t`` (empty if unproved)."""
    return set().union(*db.proofs_of(t))


def short_proofs(db: ProofDb, t: str) -> list[frozenset]:
    """Proofs of ``t`` with at most one premise more than the shortest one."""
    family = db.proofs_of(t)
    if not family:
        raise KeyError(f"{t} has no proofs")
    m = min(len(s) for s in family)
    return sorted((s for s in family if len(s) <= m + 1), key=_set_key)
