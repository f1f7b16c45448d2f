"""Weighted recursive trees: sampling, couplings, Ewens permutations and
exact/Monte Carlo checks of their limit laws."""
from .coupling import CoupledPair, CouplingViolation, couple_hoppe_to_wrt, couple_urt_to_mk
from .ewens import CyclePermutation, ewens_pmf, perm_to_tree, sample_hoppe_permutation, tree_to_perm
from .generator import RandomSource, attachment_prob, generate, generate_batch
from .montecarlo import ExperimentConfig, ExperimentReport, enumerate_exact, run_experiment, simulate
from .tree import RecursiveTree, TreeStats, compute_stats
from .weights import WeightSequence, WeightTableExhausted, parse_family

__all__ = [
    "CoupledPair", "CouplingViolation", "couple_hoppe_to_wrt", "couple_urt_to_mk",
    "CyclePermutation", "ewens_pmf", "perm_to_tree", "sample_hoppe_permutation", "tree_to_perm",
    "RandomSource", "attachment_prob", "generate", "generate_batch",
    "ExperimentConfig", "ExperimentReport", "enumerate_exact", "run_experiment", "simulate",
    "RecursiveTree", "TreeStats", "compute_stats",
    "WeightSequence", "WeightTableExhausted", "parse_family",
]
