"""Inhomogeneous contact process on the non-negative integers.

Exact event-driven simulation plus the analytic tools used to read its
phase structure: the dominating front chain and two comparison couplings.
"""
from ._accel import JIT_ENABLED, backend_name
from .coupling import CoupledResult, coupled_run, embedded_chain_check, find_N
from .experiments import (CriticalEstimate, Regime, SurvivalEstimate, Verdict, emit_report,
                          estimate_lambda_c, estimate_survival, sweep, theorem1_verdict)
from .front_chain import (AbsorptionBracket, FrontChain, SeriesVerdict, absorption_probability,
                          series_test, simulate_front)
from .model import ModelParams, RateProfile, limit_ell, make_profile, profile_from_dict
from .simulator import (Configuration, Outcome, RunResult, StopRule, simulate_run,
                        simulate_trace, step_rates)

__version__ = "0.1.0"
