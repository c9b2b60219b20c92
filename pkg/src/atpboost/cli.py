"""Command-line entry points: ``validate``, ``run``, ``report``, ``gen-synthetic``.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
import traceback
from pathlib import Path

from . import config as cfgmod
from .atp import OracleTheory, Prover, ProverConfig
from .corpus import Corpus, corpus_problems, parse_features_file, read_name_list
from .errors import InputError
from .learner.gbdt import ModelParams
from .loop import LoopParams, run
from .proofdb import ProofDb, check_proof, read_proofs
from .report import REPORT_HEADER, SWEEP_HEADER, make_report, report_rows, write_csv
from .synthetic import SyntheticSpec, write_synthetic
from .tptp import parse_statements

log = logging.getLogger("atpboost")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _input_paths(cfg, base_dir):
    return {k: cfg.resolve(k, base_dir) for k in cfgmod.PATH_KEYS}


def _read(path, what):
    if path is None:
        raise InputError(f"no {what} file configured")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc.strerror}") from None


def load_inputs(cfg, base_dir, need_proofs):
    paths = _input_paths(cfg, base_dir)
    statements = parse_statements(_read(paths["statements"], "statements"))
    order = read_name_list(paths["order"]) if paths["order"] else None
    if order is None:
        raise InputError("no order file configured")
    theorems = read_name_list(paths["theorems"]) if paths["theorems"] else None
    if theorems is None:
        raise InputError("no theorems file configured")
    features = parse_features_file(_read(paths["features"], "features")) if paths["features"] else None
    corpus = Corpus(statements, order, theorems, features)
    db = ProofDb()
    if paths["proofs"]:
        db = ProofDb().update(read_proofs(_read(paths["proofs"], "proofs")), corpus)
    elif need_proofs:
        raise InputError(f"algorithm {cfg.algorithm} needs a proofs file")
    theory = None
    if cfg.prover == "oracle":
        cap = cfg.oracle_max_axioms or None
        theory = OracleTheory.from_lines(_read(paths["oracle"], "oracle"), cap)
        problems = theory.problems(corpus)
        if problems:
            raise InputError("; ".join(problems))
    return corpus, db, theory


def cmd_validate(cfg, base_dir, out=None) -> int:
    """Print counts and every invariant violation; 0 iff the inputs are clean."""
    out = out or sys.stdout
    paths = _input_paths(cfg, base_dir)
    violations = []
    statements = parse_statements(_read(paths["statements"], "statements"))
    order = read_name_list(paths["order"]) if paths["order"] else []
    theorems = read_name_list(paths["theorems"]) if paths["theorems"] else []
    violations += corpus_problems([s.name for s in statements], order, theorems)
    features = None
    if paths["features"]:
        try:
            features = parse_features_file(_read(paths["features"], "features"))
        except InputError as exc:
            violations.append(str(exc))
    corpus = None
    if not violations:
        try:
            corpus = Corpus(statements, order, theorems, features)
        except InputError as exc:
            violations.append(str(exc))
    n_proofs = 0
    if paths["proofs"]:
        proofs = read_proofs(_read(paths["proofs"], "proofs"))
        n_proofs = len(proofs)
        if corpus is not None:
            for proof in proofs:
                try:
                    check_proof(proof, corpus)
                except InputError as exc:
                    violations.append(f"proofs: {exc}")
    n_oracle = 0
    if paths["oracle"]:
        theory = OracleTheory.from_lines(_read(paths["oracle"], "oracle"))
        n_oracle = len(theory.sets)
        if corpus is not None:
            violations += theory.problems(corpus)
    print(f"premises: {len(order)}", file=out)
    print(f"theorems: {len(theorems)}", file=out)
    print(f"features: {corpus.n_features if corpus else 'n/a'}", file=out)
    print(f"proofs: {n_proofs}", file=out)
    print(f"oracle theorems: {n_oracle}", file=out)
    print(f"violations: {len(violations)}", file=out)
    for v in violations:
        print(f"  {v}", file=out)
    return EXIT_OK if not violations else EXIT_INPUT


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_text(cfg, base_dir) -> str:
    """Config echo with absolute paths, then input content hashes as comments."""
    paths = _input_paths(cfg, base_dir)
    resolved = {k: str(p.resolve()) for k, p in paths.items() if p is not None}
    echo = cfgmod.format_config(cfgmod.replace(cfg, **resolved))
    lines = ["# atpboost run manifest", echo.rstrip("\n"), f"# seed {cfg.seed}"]
    for key in cfgmod.PATH_KEYS:
        p = paths[key]
        if key != "output" and p is not None and p.is_file():
            lines.append(f"# sha256 {key} {_sha256(p)}")
    return "\n".join(lines) + "\n"


def _loop_params(cfg, method) -> LoopParams:
    model = ModelParams(cfg.numberOfTrees, cfg.maxDepth, cfg.eta, cfg.lam,
                        cfg.min_child_weight, cfg.seed)
    return LoopParams(method, cfg.ratio, model, cfg.k, cfg.max_rounds, cfg.seed,
                      cfg.train_fraction, cfg.record_wall_time)


def _write_names(path, names):
    path.write_text("".join(f"{n}\n" for n in names), encoding="utf-8")


def _write_rankings(path, rankings, corpus):
    with open(path, "w", encoding="utf-8") as fh:
        for c in sorted(rankings, key=corpus.position.__getitem__):
            fh.write(f"{c}: {' '.join(rankings[c])}".rstrip() + "\n")


def cmd_run(cfg, base_dir) -> int:
    out = cfg.resolve("output", base_dir) or Path("out")
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "PARTIAL"
    marker.unlink(missing_ok=True)
    try:
        corpus, db, theory = load_inputs(cfg, base_dir, cfg.algorithm != "scratch")
        prover_cfg = ProverConfig(
            cfg.prover, cfg.prover_command, cfg.cpu_limit, cfg.memory_limit, cfg.workers,
            str(out / "problems") if cfg.keep_problems else None,
        )
        sweep = cfg.sweep_values()
        runs = []
        for method in cfg.methods():
            if sweep is None:
                runs.append((method, cfg))
            else:
                key, values = sweep
                for v in values:
                    runs.append((f"{method}@{key}={v}", cfgmod.replace(cfg, **{key: v})))
        rows, sweep_rows = [], []
        for label, run_cfg in runs:
            method = label.split("@")[0]
            log.info("running %s (%s)", label, cfg.algorithm)
            prover = Prover(prover_cfg, corpus, theory)
            result = run(cfg.algorithm, corpus, db, _loop_params(run_cfg, method), prover)
            rows += list(report_rows(result.reports, label))
            names_dir = out / "proved_names" / label
            names_dir.mkdir(parents=True, exist_ok=True)
            for old in names_dir.glob("round_*.txt"):
                old.unlink()
            for r in result.reports:
                _write_names(names_dir / f"round_{r.round:02d}.txt", r.proved_names)
            _write_rankings(out / f"rankings.{label}.txt", result.rankings, corpus)
            result.db.save(out / f"proofs.{label}.txt", corpus.position)
            if result.model is not None:
                result.model.save(out / f"model.{label}.txt")
            if sweep is not None and result.reports:
                last = result.reports[-1]
                pct = 100.0 * last.proved / last.total_theorems if last.total_theorems else 0.0
                sweep_rows.append([sweep[0], getattr(run_cfg, cfgmod._attr(sweep[0])), method,
                                   last.proved, last.total_theorems, f"{pct:.1f}"])
        write_csv(out / "report.csv", REPORT_HEADER, rows)
        if sweep is not None:
            write_csv(out / "sweep.csv", SWEEP_HEADER, sweep_rows)
        (out / "manifest.txt").write_text(manifest_text(cfg, base_dir), encoding="utf-8")
    except BaseException as exc:
        marker.write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        raise
    return EXIT_OK


def cmd_report(run_dir, out=None) -> int:
    out = out or sys.stdout
    for path in make_report(run_dir):
        print(path, file=out)
    return EXIT_OK


def cmd_gen_synthetic(out_dir, spec: SyntheticSpec, out=None) -> int:
    out = out or sys.stdout
    paths = write_synthetic(out_dir, spec)
    cfg = cfgmod.Config(
        statements="statements.p", order="order.txt", theorems="theorems.txt",
        proofs="proofs.txt", oracle="oracle.txt", output="run",
        algorithm="scratch", method="short", numberOfTrees=50, maxDepth=6,
        oracle_max_axioms=spec.max_axioms, max_rounds=5, seed=spec.seed,
    )
    cfg_path = Path(out_dir) / "synthetic.cfg"
    cfg_path.write_text(
        "# desk-scale settings for the synthetic corpus; see README for full-scale defaults\n"
        + cfgmod.format_config(cfg), encoding="utf-8",
    )
    for p in list(paths.values()) + [cfg_path]:
        print(p, file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atpboost", description="Premise selection with boosted trees and ATP feedback.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("validate", "run"):
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", help="key = value config file")
        for key in cfgmod.config_keys():
            p.add_argument(f"--{key}", dest=f"opt_{key}", metavar="VALUE")
    p = sub.add_parser("report")
    p.add_argument("run_dir")
    p = sub.add_parser("gen-synthetic")
    p.add_argument("out_dir")
    defaults = SyntheticSpec()
    p.add_argument("--premises", type=int, default=defaults.premises)
    p.add_argument("--theorems", type=int, default=defaults.theorems)
    p.add_argument("--topics", type=int, default=defaults.topics)
    p.add_argument("--base-lemmas", type=int, default=defaults.base_lemmas)
    p.add_argument("--max-axioms", type=int, default=defaults.max_axioms)
    p.add_argument("--seed", type=int, default=defaults.seed)
    return parser


def _config_from_args(args):
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("opt_") and v is not None}
    if args.config:
        path = Path(args.config)
        text = _read(path, "config")
        return cfgmod.parse_config(text, overrides), path.parent
    return cfgmod.parse_config("", overrides), Path.cwd()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"atpboost: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            cfg, base = _config_from_args(args)
            return cmd_validate(cfg, base)
        if args.command == "run":
            cfg, base = _config_from_args(args)
            return cmd_run(cfg, base)
        if args.command == "report":
            return cmd_report(args.run_dir)
        spec = SyntheticSpec(args.premises, args.theorems, args.topics, args.base_lemmas,
                             args.max_axioms, args.seed)
        return cmd_gen_synthetic(args.out_dir, spec)
    except InputError as exc:
        print(f"atpboost: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
