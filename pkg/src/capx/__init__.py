"""Capital estimates for compound frequency-severity loss models.

Exact and Monte Carlo references plus first- and second-order single-loss
approximations of the compound tail, VaR, Expected Shortfall and spectral
risk measures, together with heavy-tail diagnostics.
"""

from .compound import (AnnualLossSample, CompoundModel, Estimate, McConfig, Method,
                       annual_loss_sample, exact_tail_poisson_ig, exact_var_poisson_ig,
                       mc_es, mc_srm, mc_tail, mc_var, simulate_annual_losses)
from .config import ExperimentConfig, load_config, parse_config
from .diagnostics import (DiagnosticReport, big_jump_check, rv_index_estimate, subexp_ratio,
                          two_fold_sf)
from .errors import (AtomError, CapxError, ConfigError, DegenerateSecondOrderError,
                     DivergentKernelError, DomainError, HazardOverflowError,
                     InsufficientTailSamplesError, NumericError, ParameterError,
                     UnsupportedRegimeError)
from .experiment import ResultRow, diagnose, run_experiment, sensitivity_sweep
from .frequency import NegativeBinomial, Poisson
from .severity import HeavyWeibull, InverseGaussian, LogNormal, Pareto, Regime, TailIndexInfo
from .sla import (SecondOrderAux, SpectralWeight, c_beta, sla1_es, sla1_srm, sla1_tail, sla1_var,
                  sla2_es, sla2_srm, sla2_tail, sla2_tail_alt, sla2_var, srm_kernel_K,
                  srm_kernel_M)

__version__ = "0.1.0"
