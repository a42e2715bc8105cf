"""Hitting-time statistics for symbolic shifts and interval maps."""

import json as _json

from ._reclab import (
    BowenBall,
    BudgetExceeded,
    DomainError,
    MarkovShift,
    MetricSystem,
    ValidationError,
    ball_measure,
    ball_period,
    cli_main,
    cylinder_approximation,
    cylinder_measure,
    cylinder_measure_exact,
    default_cap,
    entropy_estimates,
    exact_hit_distribution,
    hamming_cluster,
    kac_length,
    lambda_bound,
    make_system,
    mixing_coefficient,
    period,
    poisson_law,
    poisson_pmf,
    recurrence_time,
    short_return_curve,
    stein_solve,
    tv_distance,
)
from . import _reclab

__version__ = "0.1.0"


def run_experiment(system, **kwargs):
    """Runs the hit-count harness and returns the report as a dict."""
    return _json.loads(_reclab.run_experiment(system, **kwargs))


def chen_stein_bound(mu, tau, alpha, short_return, m):
    return _json.loads(_reclab.chen_stein_bound(mu, tau, alpha, short_return, m))


def main(argv=None):
    import sys

    code, out, err = cli_main(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
