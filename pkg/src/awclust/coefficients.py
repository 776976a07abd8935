"""Curvature/noise correction factors and the adjusted coefficient.

The plain volume coefficient compares ball overlaps under Lebesgue measure in
the flat intrinsic dimension.  For data concentrated near a curved manifold
with bounded ambient noise, the population overlap ratio can deviate from it
by a factor (1 + eps_manifold)(1 + eps_noise) in either direction, so the
test threshold coefficient is shrunk accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special import volume_coefficient

__all__ = [
    "GeometryParams",
    "AssumptionReport",
    "eps_manifold",
    "eps_noise",
    "adjusted_coefficient",
    "check_assumptions",
    "suggest_lambda",
]


@dataclass(frozen=True)
class GeometryParams:
    """Geometric side information for the coefficient adjustment.

    d        intrinsic dimension of the manifold (>= 1)
    kappa    curvature bound, the reciprocal of a lower bound on the reach
             (0 for flat supports; units 1/length)
    r_xi     bound on the ambient noise radius (0 for noiseless data)
    b_prime  cap for the bandwidth ratio, in (1, 2)
    """

    d: int = 1
    kappa: float = 0.0
    r_xi: float = 0.0
    b_prime: float = 1.5

    def __post_init__(self) -> None:
        if self.d < 1 or int(self.d) != self.d:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.r_xi < 0.0:
            raise ValueError(f"r_xi must be >= 0, got {self.r_xi}")
        if not (1.0 < self.b_prime < 2.0):
            raise ValueError(f"b_prime must lie in (1, 2), got {self.b_prime}")


@dataclass
class AssumptionReport:
    """Outcome of the standing-assumption checks; ok iff nothing violated."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "assumptions satisfied"
        return "; ".join(self.violations)


def _shape_factor(params: GeometryParams) -> float:
    # (1 - (b'/2)^2)^((d+1)/2), shared denominator of both corrections
    return (1.0 - (params.b_prime / 2.0) ** 2) ** ((params.d + 1) / 2.0)


def eps_manifold(params: GeometryParams, r: float):
    """Curvature correction 84 kappa (d+1) r / (1 - (b'/2)^2)^((d+1)/2).

    Zero for flat supports (kappa = 0); linear in the working radius r.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr <= 0.0):
        raise ValueError("radius must be positive")
    out = 84.0 * params.kappa * (params.d + 1) * r_arr / _shape_factor(params)
    return float(out) if np.isscalar(r) or r_arr.ndim == 0 else out


def eps_noise(params: GeometryParams, r: float):
    """Noise correction 80 (d+1) (r_xi/r) / (1 - (b'/2)^2)^((d+1)/2).

    Zero for noiseless data; scales with the noise-to-radius ratio.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr <= 0.0):
        raise ValueError("radius must be positive")
    out = 80.0 * (params.d + 1) * (params.r_xi / r_arr) / _shape_factor(params)
    return float(out) if np.isscalar(r) or r_arr.ndim == 0 else out


def adjusted_coefficient(params: GeometryParams, r: float, s):
    """Volume coefficient shrunk by both correction factors.

    Returns (1 + eps_manifold)^-1 (1 + eps_noise)^-1 q_d(s), which reduces to
    the plain volume coefficient when kappa = r_xi = 0.
    """
    shrink = (1.0 + eps_manifold(params, r)) * (1.0 + eps_noise(params, r))
    return volume_coefficient(params.d, s) / shrink


def check_assumptions(
    params: GeometryParams, r0: float, r1: float, b: float
) -> AssumptionReport:
    """Validate the standing assumptions at the working radii r0 <= r1.

    Checks the noise bound r_xi <= r0 / max(20, 5d), the reach bound
    r1 <= 1 / (max(48, 6d) kappa) (vacuous for kappa = 0), and the schedule
    ratio bound 1 < b <= b' / ((1 + 3 kappa r)(1 + 5 r_xi / r)).  The ratio
    bound depends on an unspecified working radius; it is evaluated at r = r1,
    the largest scheduled radius, where it is most binding.
    """
    if r0 <= 0.0 or r1 <= 0.0:
        raise ValueError("radii must be positive")
    report = AssumptionReport()
    noise_cap = r0 / max(20.0, 5.0 * params.d)
    if params.r_xi > noise_cap:
        report.violations.append(
            f"noise bound: r_xi={params.r_xi:.6g} exceeds r0/max(20,5d)={noise_cap:.6g}"
        )
    if params.kappa > 0.0:
        reach_cap = 1.0 / (max(48.0, 6.0 * params.d) * params.kappa)
        if r1 > reach_cap:
            report.violations.append(
                f"reach bound: r1={r1:.6g} exceeds 1/(max(48,6d) kappa)={reach_cap:.6g}"
            )
    b_cap = params.b_prime / ((1.0 + 3.0 * params.kappa * r1) * (1.0 + 5.0 * params.r_xi / r1))
    if not (1.0 < b <= b_cap):
        report.violations.append(
            f"ratio bound: b={b:.6g} outside (1, {b_cap:.6g}] (evaluated at r=r1={r1:.6g})"
        )
    return report


def suggest_lambda(n: int, alpha: float) -> float:
    """Test threshold (alpha/4) ln n, the rate-optimal scaling in n.

    ``alpha`` trades propagation accuracy against separation accuracy; the
    resulting misclassification rate decays like n^(-alpha/4).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return (alpha / 4.0) * float(np.log(n))
