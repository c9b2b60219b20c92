"""Premise selection in the binary (theorem, premise) setting with ATP feedback."""

from .atp import OracleTheory, Prover, ProverConfig, atp_evaluate, make_slices, oracle_prove
from .corpus import Corpus, SparseVector, load_corpus
from .dataset import MiningParams, TrainingSet, create_training_set, negative_mining
from .learner import Model, ModelParams, predict, train_gbdt
from .loop import (
    LoopParams,
    create_random_rankings,
    create_rankings,
    run_incremental,
    run_scratch,
    run_split,
)
from .proofdb import Proof, ProofDb, subsumption_reduce
from .tptp import parse_statements

__version__ = "0.1.0"
