"""Model kinematics: the coupled (kappa, beta^2, n, Q, c) parameter set,
Kac dimensions, operator-dimension tables, and degenerate fusion rules.

kappa is the single source of truth; every other parameter is derived from
it on construction so the five coupled values can never drift apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

__all__ = [
    "ModelParams",
    "KacLabel",
    "model_from_kappa",
    "delta_rs",
    "op_dimension",
    "fusion_legs",
    "delta_21",
    "delta_31",
    "delta_51",
]


@dataclass(frozen=True)
class ModelParams:
    """Coupled parameter record of a critical loop model / SLE_kappa.

    n and Q are None outside 2 <= kappa <= 8, where the loop-fugacity map
    does not apply.
    """

    kappa: float
    beta_sq: float
    n: float | None
    Q: float | None
    c: float
    phase: str  # "dilute" | "dense" | "boundary"


@dataclass(frozen=True)
class KacLabel:
    """Index pair (r, s) of a Kac dimension; arbitrary rationals allowed."""

    r: float | Fraction
    s: float | Fraction


def model_from_kappa(kappa: float) -> ModelParams:
    """Build the full parameter record from the SLE parameter kappa > 0."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    beta_sq = 4.0 / kappa
    c = 13.0 - 6.0 * beta_sq - 6.0 / beta_sq
    if 2.0 <= kappa <= 8.0:
        n = -2.0 * math.cos(4.0 * math.pi / kappa)
        Q = n * n
    else:
        n = None
        Q = None
    if kappa > 4.0:
        phase = "dense"
    elif kappa < 4.0:
        phase = "dilute"
    else:
        phase = "boundary"
    return ModelParams(kappa=kappa, beta_sq=beta_sq, n=n, Q=Q, c=c, phase=phase)


def delta_rs(label: KacLabel, beta_sq: float) -> float:
    """Kac dimension Delta_(r,s) = P_(r,s)^2 - P_(1,1)^2 with
    P_(r,s) = (r*beta - s/beta)/2."""
    if not beta_sq > 0:
        raise DomainError(f"beta_sq must be positive, got {beta_sq}")
    beta = math.sqrt(beta_sq)
    r = float(label.r)
    s = float(label.s)
    p_rs = 0.5 * (r * beta - s / beta)
    p_11 = 0.5 * (beta - 1.0 / beta)
    return p_rs * p_rs - p_11 * p_11


def op_dimension(kind: str, legs: int, kappa: float) -> float:
    """Conformal dimension of the spin, bulk leg, or boundary leg operator.

    kind: "spin" (legs ignored), "bulk_leg" (legs even), or "boundary_leg".
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    if kind == "spin":
        return 0.5 - 1.0 / kappa - 3.0 * kappa / 64.0
    if legs < 0:
        raise DomainError(f"legs must be >= 0, got {legs}")
    if kind == "bulk_leg":
        if legs % 2 != 0:
            raise DomainError(f"bulk leg count must be even, got {legs}")
        return (4.0 * legs * legs - (kappa - 4.0) ** 2) / (16.0 * kappa)
    if kind == "boundary_leg":
        return legs * (legs + 2.0) / kappa - legs / 2.0
    raise DomainError(f"unknown operator kind {kind!r}")


def fusion_legs(m: int, n: int) -> list[int]:
    """Leg counts produced by fusing the boundary m- and n-leg operators:
    { |m-n| + 2p : p = 0..min(m,n) }."""
    if m < 0 or n < 0:
        raise DomainError("leg counts must be non-negative")
    return [abs(m - n) + 2 * p for p in range(min(m, n) + 1)]


def delta_21(kappa: float) -> float:
    """Dimension of the boundary 1-leg operator, Delta_(2,1) = 3/kappa - 1/2."""
    return 3.0 / kappa - 0.5


def delta_31(kappa: float) -> float:
    """Dimension of the boundary 2-leg operator, Delta_(3,1) = 8/kappa - 1."""
    return 8.0 / kappa - 1.0


def delta_51(kappa: float) -> float:
    """Dimension of the boundary 4-leg operator, Delta_(5,1) = 24/kappa - 2."""
    return 24.0 / kappa - 2.0
