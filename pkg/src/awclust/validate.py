"""Self-check suites: closed forms, analytic bounds, derivative, inequalities.

These are the runtime-executable counterparts of the library's analytic
guarantees.  ``run_all_checks`` evaluates every family on a fixed grid and
reports the worst deviation per family, so a regression in the special
functions is caught without any external data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import kl_bernoulli
from .evaluation import lens_ratio_closed_form
from .special import (
    incomplete_beta,
    incomplete_beta_series,
    volume_coefficient,
    volume_coefficient_bounds,
    volume_coefficient_derivative,
)

__all__ = ["CheckResult", "run_all_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_closed_forms(q_fn) -> CheckResult:
    worst = 0.0
    for d in (1, 2, 3):
        for s in np.arange(0.05, 1.951, 0.05):
            worst = max(worst, abs(q_fn(d, float(s)) - lens_ratio_closed_form(d, float(s))))
    return CheckResult("closed_form_agreement", worst <= 1e-9, f"max abs err {worst:.3e} (tol 1e-9)")


def _check_decay_envelope(q_fn) -> CheckResult:
    violations = 0
    for d in range(1, 21):
        for s in np.arange(0.1, 1.901, 0.1):
            lower, upper = volume_coefficient_bounds(d, float(s))
            q = q_fn(d, float(s))
            if not (lower <= q <= upper):
                violations += 1
    return CheckResult("decay_envelope", violations == 0, f"{violations} grid violations (tol 0)")


def _check_derivative(q_fn) -> CheckResult:
    worst = 0.0
    step = 1e-6
    for d in (1, 2, 3, 5, 10):
        for t in np.arange(0.05, 1.901, 0.05):
            t = float(t)
            fd = (q_fn(d, t + step) - q_fn(d, t - step)) / (2.0 * step)
            exact = volume_coefficient_derivative(d, t)
            worst = max(worst, abs(fd - exact) / abs(exact))
    return CheckResult("derivative_fd", worst <= 1e-6, f"max rel err {worst:.3e} (tol 1e-6)")


def _check_pinsker() -> CheckResult:
    alphas = np.linspace(0.0, 1.0, 100)
    betas = np.linspace(0.01, 0.99, 99)
    a_grid, b_grid = np.meshgrid(alphas, betas, indexing="ij")
    kl = kl_bernoulli(a_grid.ravel(), b_grid.ravel())
    slack = kl - 2.0 * (a_grid.ravel() - b_grid.ravel()) ** 2
    worst = float(slack.min())
    return CheckResult("pinsker_inequality", worst >= -1e-12, f"min slack {worst:.3e}")


def _check_series() -> CheckResult:
    worst = 0.0
    for a in (0.5, 1.0, 1.5, 5.0, 10.5):
        for x in np.arange(0.1, 0.91, 0.1):
            direct = incomplete_beta(float(x), a, 0.5)
            series = incomplete_beta_series(float(x), a, 0.5)
            worst = max(worst, abs(direct - series) / series)
    return CheckResult("series_crosscheck", worst <= 1e-10, f"max rel err {worst:.3e} (tol 1e-10)")


def run_all_checks(perturb_q: float = 0.0) -> list[CheckResult]:
    """Run every check family; ``perturb_q`` is a test hook that injects an
    additive error into the volume coefficient as seen by the checks."""

    def q_fn(d: int, s: float) -> float:
        return volume_coefficient(d, s) + perturb_q

    return [
        _check_closed_forms(q_fn),
        _check_decay_envelope(q_fn),
        _check_derivative(q_fn),
        _check_pinsker(),
        _check_series(),
    ]
