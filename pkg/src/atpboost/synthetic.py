"""Seeded synthetic theories for desk-scale experiments.

Premises belong to topics, each with its own predicate and function
symbols.  A theorem's hidden sufficient premise-sets are drawn mostly from
earlier premises of its topic (plus a few widely used base lemmas), and
its statement reuses symbols from the premises of its first set, so the
features carry real signal about relevance.  The oracle prover's axiom cap
plays the role of the time limit that makes large problems fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .atp import OracleTheory
from .proofdb import subsumption_reduce
from .rng import derive_rng


@dataclass(frozen=True)
class SyntheticSpec:
    premises: int = 500
    theorems: int = 200
    topics: int = 20
    base_lemmas: int = 15
    max_axioms: int = 64
    seed: int = 0


def _atom(rng, preds, funcs, consts, var):
    pred, arity = preds[rng.integers(len(preds))]
    args = []
    for _ in range(arity):
        roll = rng.random()
        if roll < 0.4:
            args.append(var)
        elif roll < 0.7:
            args.append(f"{funcs[rng.integers(len(funcs))]}({var})")
        else:
            args.append(consts[rng.integers(len(consts))])
    return f"{pred}({','.join(args)})"


def _vocab(k):
    preds = [(f"p{k}_{j}", 1 + (j % 2)) for j in range(3)]
    funcs = [f"f{k}_{j}" for j in range(3)]
    consts = [f"c{k}_{j}" for j in range(2)]
    return preds, funcs, consts


BASE_VOCAB = ([("r_0", 2), ("r_1", 1), ("r_2", 2)], ["g_0", "g_1"], ["e_0", "e_1"])


def generate(spec: SyntheticSpec):
    """Returns ``(statements text, order, theorems, oracle theory, seed proofs)``."""
    rng = derive_rng(spec.seed, "synthetic")
    n = spec.premises
    names = [f"s{i:04d}" for i in range(n)]
    topic = rng.integers(spec.topics, size=n)
    base = set(range(spec.base_lemmas))
    candidates = np.arange(max(spec.base_lemmas + 10, n // 10), n)
    thm_idx = np.sort(rng.choice(candidates, size=min(spec.theorems, len(candidates)), replace=False))
    thm_set = set(thm_idx.tolist())

    formulas = {}
    sufficient = {}
    atoms_of = {}
    for i in range(n):
        if i in base:
            preds, funcs, consts = BASE_VOCAB
        else:
            preds, funcs, consts = _vocab(int(topic[i]))
        if i in thm_set:
            continue
        atoms = [_atom(rng, preds, funcs, consts, "X") for _ in range(int(rng.integers(1, 3)))]
        if i not in base and rng.random() < 0.3:
            atoms.append(_atom(rng, *BASE_VOCAB, "X"))
        atoms_of[i] = atoms
        formulas[i] = _close(atoms, rng)

    for i in thm_idx.tolist():
        k = int(topic[i])
        same = [j for j in range(i) if topic[j] == k and j not in base]
        near = [j for j in range(i) if topic[j] == (k + 1) % spec.topics and j not in base]
        pool_base = [j for j in range(min(i, spec.base_lemmas))]
        if not same:
            same = [j for j in range(i) if j not in base] or list(range(i))
        family = []
        size = int(rng.choice([1, 2, 3], p=[0.35, 0.4, 0.25]))
        first = set(_pick(rng, same, size, recent=True))
        if pool_base and rng.random() < 0.35:
            first.add(int(rng.choice(pool_base)))
        family.append(frozenset(first))
        for _ in range(int(rng.choice([0, 1, 2], p=[0.3, 0.45, 0.25]))):
            alt = set(_pick(rng, same, size + 1, recent=False))
            if near and rng.random() < 0.5:
                alt.add(int(rng.choice(near)))
            if rng.random() < 0.5:
                alt.add(int(rng.integers(i)))
            family.append(frozenset(alt))
        family = subsumption_reduce(family)
        sufficient[i] = family
        # the statement mixes symbols of its first set's premises with its topic
        src = sorted(min(family, key=lambda s: (len(s), sorted(s))))
        atoms = []
        for j in src:
            pool = atoms_of.get(j)
            if pool:
                atoms.append(pool[int(rng.integers(len(pool)))])
        atoms.append(_atom(rng, *_vocab(k), "X"))
        atoms_of[i] = atoms
        formulas[i] = _close(atoms, rng)

    lines = []
    for i in range(n):
        role = "conjecture" if i in thm_set else "axiom"
        lines.append(f"fof({names[i]}, {role}, {formulas[i]}).")
    oracle = OracleTheory(
        {names[i]: frozenset(frozenset(names[j] for j in s) for s in fam) for i, fam in sufficient.items()},
        spec.max_axioms,
    )
    seed_proofs = {
        names[i]: min(fam, key=lambda s: (len(s), sorted(s))) for i, fam in sufficient.items()
    }
    seed_proofs = {t: frozenset(names[j] for j in s) for t, s in seed_proofs.items()}
    theorems = [names[i] for i in thm_idx.tolist()]
    return "\n".join(lines) + "\n", names, theorems, oracle, seed_proofs


def _pick(rng, pool, size, recent):
    size = min(size, len(pool))
    if size == 0:
        return []
    pool = np.asarray(pool)
    if recent:
        w = np.linspace(1.0, 3.0, len(pool))
        w /= w.sum()
        return rng.choice(pool, size=size, replace=False, p=w).tolist()
    return rng.choice(pool, size=size, replace=False).tolist()


def _close(atoms, rng):
    if len(atoms) == 1:
        body = atoms[0]
    elif rng.random() < 0.5:
        body = f"({' & '.join(atoms[:-1])}) => {atoms[-1]}"
    else:
        body = " & ".join(atoms)
    return f"![X]: ({body})"


def write_synthetic(out_dir, spec: SyntheticSpec) -> dict:
    """Write a synthetic corpus and a matching config; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text, order, theorems, oracle, seed_proofs = generate(spec)
    position = {p: i for i, p in enumerate(order)}
    paths = {
        "statements": out / "statements.p",
        "order": out / "order.txt",
        "theorems": out / "theorems.txt",
        "oracle": out / "oracle.txt",
        "proofs": out / "proofs.txt",
    }
    paths["statements"].write_text(text, encoding="utf-8")
    paths["order"].write_text("\n".join(order) + "\n", encoding="utf-8")
    paths["theorems"].write_text("\n".join(theorems) + "\n", encoding="utf-8")
    paths["oracle"].write_text(oracle.dumps(position), encoding="utf-8")
    proof_lines = [
        f"{t}: {' '.join(sorted(s, key=position.__getitem__))}".rstrip()
        for t, s in sorted(seed_proofs.items(), key=lambda kv: position[kv[0]])
    ]
    paths["proofs"].write_text("\n".join(proof_lines) + "\n", encoding="utf-8")
    return paths
