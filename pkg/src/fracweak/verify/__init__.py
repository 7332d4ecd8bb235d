"""Reference oracles and residual checks for computed trajectories."""
from .laplace import LaplaceProbe, laplace_residual, laplace_transform
from .oracles import (eigenmode_oracle, eigenmode_step_response, mittag_leffler,
                      mittag_leffler_integral, mittag_leffler_series)
from .probes import b_operator_norm, norm_slope_probe, operator_matrices, power_norm
from .report import VerificationReport, digest
from .weak import TimeBump, weak_measures, weak_refinement, weak_residual

__all__ = [
    "LaplaceProbe", "TimeBump", "VerificationReport", "b_operator_norm", "digest",
    "eigenmode_oracle", "eigenmode_step_response", "laplace_residual", "laplace_transform",
    "mittag_leffler", "mittag_leffler_integral", "mittag_leffler_series", "norm_slope_probe",
    "operator_matrices", "power_norm", "weak_measures", "weak_refinement", "weak_residual",
]
