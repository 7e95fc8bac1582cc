"""Single-step multiple testing for weakly dependent Gaussian means.

Adjusted Bonferroni, Sidak and Lehmann-Romano cutoffs, their FWER, k-FWER and
power under factor correlation models, and the matching asymptotic limits.
"""

from .errors import (DegenerateModelError, DomainError, FactorizationError,
                     InfeasibleCutoffError, ModelError, ValidationError)
from .procedures import Cutoff, Family, ProcedureSpec, RejectionSet, Sided, apply, cutoff
from .depmodels import (Equicorrelated, Explicit, Independent, ProductFactor,
                        build_schedule, diagnose, sample)
from .mc import (Estimate, MeanConfig, fwer_bruteforce, fwer_conditional,
                 kfwer_conditional, power_conditional, verify_kth_max_limit)

__version__ = "0.1.0"
