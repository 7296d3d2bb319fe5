"""Random polymers: branched polymers, Brownian trees and lattice walks."""

from .branched import (BpConfig, gen_bp_mcmc, gen_bp_rejection, hastings_leaf_ratio, run_bp_chain,
                       run_bp_moves)
from .dla import DlaConfig, gen_brownian_tree
from .saw import SawConfig, gen_saw, gen_saw_walk, is_self_avoiding, pivot_step, saw_to_polymer

__all__ = [
    "BpConfig", "DlaConfig", "SawConfig", "gen_bp_mcmc", "gen_bp_rejection", "gen_brownian_tree",
    "gen_saw", "gen_saw_walk", "hastings_leaf_ratio", "is_self_avoiding", "pivot_step",
    "run_bp_chain", "run_bp_moves", "saw_to_polymer",
]
