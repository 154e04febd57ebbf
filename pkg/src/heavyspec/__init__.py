"""Spectra of sample (auto)covariance matrices built from heavy-tailed linear fields.

Modules
-------
rand_heavy  noise laws, samplers, tail functions, normalizing sequences
linfield    coefficient arrays, M(s) matrices, field simulation
spectra     eigen- and singular values (Jacobi and LAPACK back ends)
approx      order-statistic approximation sets and sup errors
limits      limit laws, Gamma-point samplers, point-process and Nagaev checks
tracyw      Airy function, Painleve II, Tracy-Widom F1
estim       Hill estimates, rank transform, eigen-ratio and lag-sum reports
mc          Monte Carlo ensembles, KS distances, atom masses
cli         the ``heavyspec`` command
"""

__version__ = "0.1.0"

from . import approx, estim, limits, linfield, mc, rand_heavy, spectra, tracyw  # noqa: E402

__all__ = ["approx", "estim", "limits", "linfield", "mc", "rand_heavy", "spectra", "tracyw", "__version__"]
