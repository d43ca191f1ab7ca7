"""CS-UCB for sleeping combinatorial bandits with semi-bandit feedback."""

from .analysis import (
    GapSummary,
    RegretLedger,
    bound_thm1,
    bound_thm2,
    bound_thm3,
    bound_thm4,
    growth_exponent,
    instance_gaps,
    observation2_cap,
    record_round,
)
from .environment import InstanceConfig, RewardSpec, sample_exp_one, sample_exp_two
from .oracles import OracleSpec, brute_force_oracle, degrade, topk_oracle, util_oracle
from .policy import ArmState, PolicyState, step, ucb_index, update
from .rewards import RewardModel, TopKParams, UtilParams, topk_reward, util_reward

__version__ = "0.1.0"
