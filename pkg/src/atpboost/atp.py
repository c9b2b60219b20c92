"""Prover-side evaluation of premise rankings.

A ranking is cut into top slices, each slice becomes a problem, and a
prover is run on every problem.  Proofs found are pseudo-minimised by
rerunning the prover on exactly the premises it used until that set stops
changing.  Two provers are available: an external binary driven through a
command template (E by default), and an oracle that simulates one from a
table of hidden sufficient premise-sets.
"""

from __future__ import annotations

import logging
import os
import re
import shlex
import subprocess
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError
from .proofdb import Proof, subsumption_reduce
from .tptp import write_problem

log = logging.getLogger(__name__)

DEFAULT_COMMAND = (
    "eprover --auto-schedule --free-numbers -s -R --cpu-limit={cpu_limit} "
    "--memory-limit=2000 --print-statistics -p --tstp-format {problem}"
)
MAX_SLICE = 512
MINIMIZE_ROUNDS = 10

PROVED, UNPROVED, ERROR = "proved", "unproved", "error"


@dataclass(frozen=True)
class ProverConfig:
    kind: str = "oracle"
    command: str = DEFAULT_COMMAND
    cpu_limit: float = 10
    memory_limit: int = 2000
    workers: int = 1
    keep_problems: str | None = None  # directory to retain problem files in

    def __post_init__(self):
        if self.kind not in ("oracle", "external"):
            raise ValueError(f"unknown prover kind {self.kind!r}")
        if self.kind == "external" and "{problem}" not in self.command:
            raise ValueError("external prover command needs a {problem} placeholder")
        if self.cpu_limit <= 0 or self.memory_limit <= 0:
            raise ValueError("limits must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class OracleTheory:
    """Hidden sufficient premise-sets per theorem.

    ``max_axioms`` caps problem size: a problem with more axioms than that
    fails, standing in for a prover running out of time on large problems.
    """

    sets: dict = field(default_factory=dict)
    max_axioms: int | None = None

    @classmethod
    def from_lines(cls, text: str, max_axioms=None) -> "OracleTheory":
        sets = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            t, sep, rest = line.partition(":")
            t = t.strip()
            if not sep or not t or " " in t:
                raise InputError(f"oracle file line {lineno}: expected 'theorem: a b | c d'")
            family = sets.setdefault(t, [])
            family.extend(frozenset(alt.split()) for alt in rest.split("|"))
        return cls({t: subsumption_reduce(f) for t, f in sets.items()}, max_axioms)

    @classmethod
    def load(cls, path, max_axioms=None) -> "OracleTheory":
        return cls.from_lines(Path(path).read_text(encoding="utf-8"), max_axioms)

    def dumps(self, order=None) -> str:
        key = order.__getitem__ if order else None
        lines = []
        for t in sorted(self.sets, key=key):
            alts = sorted(self.sets[t], key=lambda s: (len(s), sorted(s)))
            lines.append(f"{t}: " + " | ".join(" ".join(sorted(s, key=key)) for s in alts))
        return "\n".join(lines) + ("\n" if lines else "")

    def problems(self, corpus) -> list[str]:
        out = []
        for t, family in self.sets.items():
            if t not in corpus:
                out.append(f"oracle: unknown theorem {t}")
                continue
            for s in family:
                for p in sorted(s):
                    if p not in corpus or not corpus.precedes(p, t):
                        out.append(f"oracle: set for {t} uses {p}, which does not precede it")
        return out


@dataclass(frozen=True)
class ProverResult:
    theorem: str
    slice_length: int
    status: str
    used: frozenset = frozenset()
    wall_time: float = 0.0
    flagged: bool = False


def make_slices(length: int) -> list[int]:
    """Powers of two up to 512 that fit, plus the full length if below 512."""
    out = [k for k in (2 ** i for i in range(10)) if k <= length]
    if 0 < length < MAX_SLICE:
        out.append(length)
    return sorted(set(out))


def oracle_prove(theorem, axioms, theory: OracleTheory) -> ProverResult:
    """Proved iff a hidden sufficient set lies inside ``axioms``.

    The reported proof is the smallest such set, ties broken by the sorted
    premise names.
    """
    axioms = list(axioms)
    if theory.max_axioms is not None and len(axioms) > theory.max_axioms:
        return ProverResult(theorem, len(axioms), UNPROVED)
    supplied = set(axioms)
    contained = [s for s in theory.sets.get(theorem, ()) if s <= supplied]
    if not contained:
        return ProverResult(theorem, len(axioms), UNPROVED)
    used = min(contained, key=lambda s: (len(s), sorted(s)))
    return ProverResult(theorem, len(axioms), PROVED, used)


_SZS_THEOREM = re.compile(r"SZS status Theorem\b")
_PROOF_LINE = re.compile(r"^\s*(?:fof|cnf)\(")
_AXIOM_LINE = re.compile(
    r"^\s*fof\(\s*[^,\s]+\s*,\s*axiom\s*,.*file\(\s*[^,]*,\s*([^)\s]+)\s*\)\s*\)\s*\.\s*$"
)


def parse_prover_output(text: str):
    """``(status, used premise names)`` from a prover's TSTP output."""
    lines = text.splitlines()
    if not any(_SZS_THEOREM.search(ln) for ln in lines):
        return UNPROVED, frozenset()
    if not any(_PROOF_LINE.match(ln) for ln in lines):
        return ERROR, frozenset()
    used = set()
    for ln in lines:
        m = _AXIOM_LINE.match(ln)
        if m:
            used.add(m.group(1).strip("'"))
    return PROVED, frozenset(used)


class Prover:
    """Runs single problems with caching keyed by (theorem, axiom set)."""

    def __init__(self, cfg: ProverConfig, corpus, theory: OracleTheory | None = None):
        if cfg.kind == "oracle" and theory is None:
            raise ValueError("the oracle prover needs an oracle theory")
        self.cfg = cfg
        self.corpus = corpus
        self.theory = theory
        self._cache: dict = {}
        self._lock = threading.Lock()
        self._counter = 0

    def prove(self, theorem, axioms) -> ProverResult:
        key = (theorem, frozenset(axioms))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return ProverResult(theorem, len(axioms), hit.status, hit.used, hit.wall_time, hit.flagged)
        if self.cfg.kind == "oracle":
            res = oracle_prove(theorem, axioms, self.theory)
        else:
            res = self._run_external(theorem, list(axioms))
        if not res.used <= frozenset(axioms):
            res = ProverResult(theorem, len(axioms), ERROR, frozenset(), res.wall_time, True)
        with self._lock:
            self._cache[key] = res
        return res

    def _run_external(self, theorem, axioms) -> ProverResult:
        corpus = self.corpus
        with self._lock:
            self._counter += 1
            serial = self._counter
        keep = self.cfg.keep_problems
        tmpdir = None
        if keep:
            Path(keep).mkdir(parents=True, exist_ok=True)
            problem = Path(keep) / f"{theorem}__{len(axioms)}__{serial}.p"
        else:
            tmpdir = tempfile.mkdtemp(prefix="atpboost-")
            problem = Path(tmpdir) / f"{theorem}.p"
        try:
            with open(problem, "w", encoding="utf-8") as fh:
                write_problem(corpus.statements[theorem], [corpus.statements[a] for a in axioms], fh)
            cmd = self.cfg.command.format(
                problem=shlex.quote(str(problem)),
                cpu_limit=_fmt_limit(self.cfg.cpu_limit),
                memory_limit=self.cfg.memory_limit,
            )
            start = time.monotonic()
            try:
                proc = subprocess.run(
                    shlex.split(cmd),
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                    timeout=self.cfg.cpu_limit * 2 + 5,
                    cwd=problem.parent,
                )
            except subprocess.TimeoutExpired:
                return ProverResult(theorem, len(axioms), UNPROVED, wall_time=time.monotonic() - start)
            except OSError as exc:
                log.warning("prover launch failed for %s: %s", theorem, exc)
                return ProverResult(theorem, len(axioms), ERROR, wall_time=time.monotonic() - start)
            status, used = parse_prover_output(proc.stdout.decode("utf-8", "replace"))
            return ProverResult(theorem, len(axioms), status, used, time.monotonic() - start)
        finally:
            if tmpdir:
                for f in Path(tmpdir).iterdir():
                    f.unlink()
                os.rmdir(tmpdir)


def _fmt_limit(x) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


def _minimize(theorem, premises, prover: Prover):
    order = prover.corpus.position
    current = frozenset(premises)
    for _ in range(MINIMIZE_ROUNDS):
        res = prover.prove(theorem, sorted(current, key=order.__getitem__))
        if res.status != PROVED:
            log.warning("rerun of %s on its own proof premises failed", theorem)
            return current, True
        if res.used == current:
            return current, False
        current = res.used
    log.warning("pseudo-minimisation of %s did not converge", theorem)
    return current, True


def pseudo_minimize(theorem, premises, prover: Prover) -> Proof:
    """Rerun on exactly the used premises until the set stops changing."""
    used, _ = _minimize(theorem, premises, prover)
    return Proof(theorem, used)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def atp_evaluate(rankings, corpus, prover: Prover) -> list[ProverResult]:
    """Run the prover on every top slice of every ranking.

    Proved results carry pseudo-minimised premise sets.  Results are
    ordered by (theorem position, slice length) whatever the pool size.
    """
    jobs = []
    for t in sorted(rankings, key=corpus.position.__getitem__):
        ranking = list(rankings[t])
        for p in ranking:
            if not corpus.precedes(p, t):
                raise InputError(f"ranking of {t} contains {p}, which does not precede it")
        for k in make_slices(len(ranking)):
            jobs.append((t, ranking[:k]))

    workers = prover.cfg.workers
    raw = _map(lambda job: prover.prove(*job), jobs, workers)

    def finish(res):
        if res.status != PROVED:
            return res
        used, flagged = _minimize(res.theorem, res.used, prover)
        return ProverResult(res.theorem, res.slice_length, PROVED, used,
                            res.wall_time, res.flagged or flagged)

    return _map(finish, raw, workers)


def proofs_from_results(results) -> list[Proof]:
    """Distinct proofs among proved results, in result order."""
    seen = set()
    out = []
    for r in results:
        if r.status == PROVED and (r.theorem, r.used) not in seen:
            seen.add((r.theorem, r.used))
            out.append(Proof(r.theorem, r.used))
    return out
