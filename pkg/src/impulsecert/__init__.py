"""impulsecert: simulation and stability certification for impulsive systems."""

from .compfun import (ComparisonFunction, KLFunction, eval_k, eval_kl,
                      invert_k, compose_k, validate_class)
from .hybrid_time import (ImpulseSequence, check_uib, count_impulses,
                          gen_dwell, hybrid_elapsed, partition_hybrid)
from .signals import InputSignal, energy_norm, exceedance, sup_norm, truncate
from .simulator import (IntegratorOptions, SystemModel, Trajectory, residual,
                        simulate, validate_assumptions)
from .gronwall import GronwallProblem, decay_envelope, domination_oracle, \
    h_bound, h_bound_const
from .gains import (AssumptionEnvelopes, IssCertificateData, estimate_kappa,
                    psi_from_iiss, rho_tilde, synthesize_ubebs_gain)
from .certify import (EstimateSpec, Scenario, check_estimate,
                      check_weak_strong_equiv, pipeline_iss_to_iiss,
                      probe_eps_delta)

__version__ = "0.1.0"

__all__ = [
    "ComparisonFunction", "KLFunction", "eval_k", "eval_kl", "invert_k",
    "compose_k", "validate_class",
    "ImpulseSequence", "check_uib", "count_impulses", "gen_dwell",
    "hybrid_elapsed", "partition_hybrid",
    "InputSignal", "energy_norm", "exceedance", "sup_norm", "truncate",
    "IntegratorOptions", "SystemModel", "Trajectory", "residual", "simulate",
    "validate_assumptions",
    "GronwallProblem", "decay_envelope", "domination_oracle", "h_bound",
    "h_bound_const",
    "AssumptionEnvelopes", "IssCertificateData", "estimate_kappa",
    "psi_from_iiss", "rho_tilde", "synthesize_ubebs_gain",
    "EstimateSpec", "Scenario", "check_estimate", "check_weak_strong_equiv",
    "pipeline_iss_to_iiss", "probe_eps_delta",
]
