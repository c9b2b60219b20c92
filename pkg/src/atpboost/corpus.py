"""The immutable theory: statements, features and the chronological order."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np

from .errors import InputError
from .tptp import Statement, extract_features, parse_statements


class SparseVector:
    """Sorted (column, count) pairs with a logical dimension."""

    __slots__ = ("indices", "values", "dim")

    def __init__(self, indices, values, dim: int):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.dim = int(dim)
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        if len(self.indices):
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("column ids must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("column id out of range")
            if np.any(self.values < 1):
                raise ValueError("counts must be >= 1")

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        pairs = ", ".join(f"{i}:{v:g}" for i, v in zip(self.indices, self.values))
        return f"SparseVector([{pairs}], dim={self.dim})"

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


def read_name_list(path) -> list[str]:
    names = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.append(line)
    return names


def parse_features_file(text: str) -> dict[str, Counter]:
    """Parse ``name: feat:count feat:count ...`` lines."""
    bags = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, sep, rest = line.partition(":")
        name = name.strip()
        if not sep or not name or " " in name:
            raise InputError(f"features file line {lineno}: expected 'name: feat:count ...'")
        bag: Counter = Counter()
        for item in rest.split():
            feat, sep, count = item.rpartition(":")
            if not sep or not feat or not count.isdigit() or int(count) < 1:
                raise InputError(f"features file line {lineno}: bad item {item!r}")
            bag[feat] += int(count)
        if name in bags:
            raise InputError(f"features file line {lineno}: duplicate name {name}")
        bags[name] = bag
    return bags


def format_features(bag: Counter) -> str:
    return " ".join(f"{f}:{bag[f]}" for f in sorted(bag))


def corpus_problems(statement_names, order, theorems) -> list[str]:
    """Every violation of the corpus input invariants, as messages."""
    problems = []
    stated = set(statement_names)
    seen = set()
    for name in order:
        if name in seen:
            problems.append(f"order: {name} listed more than once")
        seen.add(name)
        if name not in stated:
            problems.append(f"order: {name} has no statement")
    for name in statement_names:
        if name not in seen:
            problems.append(f"statements: {name} missing from order")
    tseen = set()
    for name in theorems:
        if name not in seen:
            problems.append(f"theorems: {name} not in order")
        if name in tseen:
            problems.append(f"theorems: {name} listed more than once")
        tseen.add(name)
    return problems


class Corpus:
    """Premises in chronological order with their statements and features.

    ``premises[i]`` has position ``i``; theorems are a subset of premises.
    Feature columns are numbered by lexicographic order of the feature
    strings, so the numbering does not depend on file order.
    """

    def __init__(self, statements, order, theorems, features=None):
        by_name = {s.name: s for s in statements}
        problems = corpus_problems([s.name for s in statements], order, theorems)
        if problems:
            raise InputError("; ".join(problems))
        self.premises: list[str] = list(order)
        self.position: dict[str, int] = {p: i for i, p in enumerate(self.premises)}
        tset = set(theorems)
        self.theorems: list[str] = [p for p in self.premises if p in tset]
        self.statements: dict[str, Statement] = {p: by_name[p] for p in self.premises}
        bags = {p: extract_features(by_name[p].formula) for p in self.premises}
        for name, bag in (features or {}).items():
            if name not in self.position:
                raise InputError(f"features file: unknown name {name}")
            bags[name] = Counter(bag)
        self.features: dict[str, Counter] = bags
        all_feats = sorted(set().union(*bags.values())) if bags else []
        self.feature_index: dict[str, int] = {f: i for i, f in enumerate(all_feats)}
        self.n_features = len(all_feats)
        self.vectors: dict[str, SparseVector] = {}
        for p in self.premises:
            cols = sorted((self.feature_index[f], c) for f, c in bags[p].items())
            self.vectors[p] = SparseVector(
                [c for c, _ in cols], [v for _, v in cols], self.n_features
            )
        # CSR over premise positions, used by batch code paths
        lengths = [len(self.vectors[p]) for p in self.premises]
        self.csr_indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        if self.premises:
            self.csr_indices = np.concatenate(
                [self.vectors[p].indices for p in self.premises]
            ).astype(np.int64)
            self.csr_data = np.concatenate([self.vectors[p].values for p in self.premises])
        else:
            self.csr_indices = np.zeros(0, dtype=np.int64)
            self.csr_data = np.zeros(0)

    def __contains__(self, name):
        return name in self.position

    def __len__(self):
        return len(self.premises)

    def _pos(self, name) -> int:
        try:
            return self.position[name]
        except KeyError:
            raise KeyError(f"unknown premise {name!r}") from None

    def available_premises(self, c: str) -> list[str]:
        """Premises strictly before ``c`` in chronological order."""
        return self.premises[: self._pos(c)]

    def precedes(self, p: str, t: str) -> bool:
        return self._pos(p) < self._pos(t)

    def pair_vector(self, t: str, p: str) -> SparseVector:
        """Theorem features in ``[0, n)`` followed by premise features in ``[n, 2n)``."""
        self._pos(t), self._pos(p)
        ft, fp = self.vectors[t], self.vectors[p]
        n = self.n_features
        return SparseVector(
            np.concatenate([ft.indices, fp.indices + n]),
            np.concatenate([ft.values, fp.values]),
            2 * n,
        )

    def dense_block(self, names, columns) -> np.ndarray:
        """Dense ``len(names) x len(columns)`` matrix of feature counts."""
        columns = np.asarray(columns, dtype=np.int64)
        lookup = np.full(self.n_features, -1, dtype=np.int64)
        lookup[columns] = np.arange(len(columns))
        out = np.zeros((len(names), len(columns)))
        for r, name in enumerate(names):
            v = self.vectors[name]
            j = lookup[v.indices]
            keep = j >= 0
            out[r, j[keep]] = v.values[keep]
        return out


def load_corpus(statements_path, order_path, theorems_path, features_path=None) -> Corpus:
    text = Path(statements_path).read_text(encoding="utf-8")
    statements = parse_statements(text)
    order = read_name_list(order_path)
    theorems = read_name_list(theorems_path)
    features = None
    if features_path:
        features = parse_features_file(Path(features_path).read_text(encoding="utf-8"))
    return Corpus(statements, order, theorems, features)
