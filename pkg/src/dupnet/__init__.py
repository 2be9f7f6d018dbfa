"""Simulation and limit-curve toolkit for a file-duplication network.

Each of ``f_n`` files lives on 0, 1 or 2 servers.  Copies fail at rate
``mu``; a shared bandwidth ``lam * n`` re-duplicates files that are down to
a single copy.  The package provides the exact Markov chain, its fluid and
critical diffusion limits, the slow decay curve of stable networks and the
checks that tie them together.
"""

from .core import AbsorbedError, ModelParams, NetworkState, Regime, classify_regime, transition_rates
from .ctmc import (
    CoupledRun,
    GridSample,
    JumpRecord,
    Kind,
    Mm1Params,
    Mm1Path,
    Trajectory,
    first_loss_fraction_time,
    replica_seeds,
    run_replicas,
    sample_at,
    simulate,
    simulate_coupled_domination,
    simulate_mm1,
    simulate_on_grid,
    step,
    trajectories_csv,
)
from .skorokhod import ConvergenceError, GridPath, GspResult, PathFunctional, complementarity_defect, cumtrapz, gsp_solve, reflect
from .fluid import FluidCurve, closed_form_curve, fluid_closed_form, fluid_functional, fluid_gsp
from .critical import CriticalParams, EnsembleMoments, ReflectedPath, ensemble_moments, simulate_reflected_sde
from .decay import DecayCurve, GeometricLaw, fixed_point_residual, local_equilibrium, psi, psi_curve, psi_ode, t_of_delta
from .stats import (
    EmpiricalDist,
    TestReport,
    chi2_cdf,
    chi2_quantile,
    chi_square_geometric,
    dispersion_index,
    empirical_marginal,
    gammainc_lower,
    ks_critical,
    ks_exponential,
    loss_rate,
    mean_ci,
    poisson_loss_check,
    reports_csv,
    sup_deviation,
)

__version__ = "0.1.0"
