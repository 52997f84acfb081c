"""Closed-form solution blocks in the cross-ratio variable, crossing
matrices, crossing coefficients, and structure constants.

Pole handling: several constants are 0 * inf products of csc/sec factors
against Gamma poles at special rational kappa (percolation kappa = 6 being
the important case).  Raw evaluators detect proximity to any individual
pole and raise; the public entry points then evaluate the two-sided limit
kappa(1 +/- eps), averaged and Richardson-refined, and reject
non-cancelling poles by their odd part.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import bpz_ode
from .errors import CutError, DomainError, PoleError
from .params import delta_21, delta_31, delta_51
from .specfun import gamma_ratio, hyp2f1

__all__ = [
    "CrossingData",
    "StructureConstants",
    "block",
    "crossing_F",
    "cst1",
    "structure_constants",
    "structure_constants_exact_kappa6",
    "third_order_crossing",
    "second_order_crossing_check",
    "third_order_crossing_check",
]

_POLE_EPS = 1e-6  # relative two-sided perturbation of kappa
_DETECT_TOL = 1e-7  # pole proximity, in argument units


@dataclass(frozen=True)
class CrossingData:
    """Second- and third-order crossing data at one kappa."""

    F: np.ndarray  # 2x2, special case Delta_O = Delta_(2,1)
    c2: float
    c3: float
    d1: float
    lower_c1: complex
    lower_c2: complex


@dataclass(frozen=True)
class StructureConstants:
    C_112: float
    C_222: float
    C_224: float
    C_110: float = 1.0


# ---------------------------------------------------------------------------
# pole-aware scalar factors


def _csc(x: float) -> float:
    s = math.sin(x)
    if abs(s) < _DETECT_TOL:
        raise PoleError(f"csc pole at argument {x}")
    return 1.0 / s


def _sec(x: float) -> float:
    c = math.cos(x)
    if abs(c) < _DETECT_TOL:
        raise PoleError(f"sec pole at argument {x}")
    return 1.0 / c


def _gamma(x: float) -> float:
    if x <= 0.5 and abs(x - round(x)) < _DETECT_TOL and round(x) <= 0:
        raise PoleError(f"Gamma pole at argument {x}")
    return math.gamma(x)


def _limit_eval(f, kappa: float, eps: float = _POLE_EPS) -> float:
    """f(kappa), or the two-sided Richardson limit when f hits a pole factor.

    Averaging kappa(1+eps) with kappa(1-eps) cancels the odd part of a
    removable singularity; a surviving large odd part means the pole does
    not cancel and is an error.
    """
    try:
        return f(kappa)
    except PoleError:
        pass
    averages = []
    for e in (eps, 2.0 * eps):
        fp = f(kappa * (1.0 + e))
        fm = f(kappa * (1.0 - e))
        avg = 0.5 * (fp + fm)
        if abs(fp - fm) > 1e3 * max(abs(avg), 1e-12):
            raise PoleError(
                f"non-cancelling pole at kappa = {kappa}: f(k(1+/-{e})) = {fp}, {fm}"
            )
        averages.append(avg)
    rich = (4.0 * averages[0] - averages[1]) / 3.0
    if abs(averages[0] - averages[1]) > 1e-4 * max(1.0, abs(rich)):
        raise PoleError(f"two-sided limit did not stabilize at kappa = {kappa}")
    return rich


# ---------------------------------------------------------------------------
# printed constants


def cst1(kappa: float) -> float:
    """The transported second-order combination F_12 - F_11 F_22 / F_21;
    equals C_112^2."""
    return _limit_eval(_cst1_raw, kappa)


def _cst1_raw(k: float) -> float:
    trig = _csc(4.0 * math.pi / k) + _csc(12.0 * math.pi / k)
    num = _gamma(1.0 - 8.0 / k) * _gamma(2.0 - 8.0 / k)
    den = _gamma(2.0 - 12.0 / k) * _gamma(1.0 - 4.0 / k) ** 2 * _gamma(4.0 / k)
    return math.pi * trig * num / den


def _c2_raw(k: float) -> float:
    trig = (_csc(8.0 * math.pi / k) + _csc(16.0 * math.pi / k)) * _sec(8.0 * math.pi / k)
    num = (
        _gamma(2.0 - 8.0 / k)
        * _gamma(4.0 / k)
        * _gamma((k - 8.0) / k)
        * _gamma(2.0 * (k - 6.0) / k)
    )
    den = _gamma(8.0 / k) ** 2 * _gamma(2.0 * (k - 8.0) / k) ** 2 * _gamma((k - 4.0) / k) ** 2
    return math.pi * trig * num / (2.0 * den)


def _c3_raw(k: float) -> float:
    num = (k - 8.0) * _sec(8.0 * math.pi / k) * _gamma(20.0 / k - 1.0) * _gamma(
        2.0 * (k - 6.0) / k
    )
    den = 2.0 * (k - 16.0) * _gamma(12.0 / k) * _gamma((k - 4.0) / k)
    return -num / den


def _d1_raw(k: float) -> float:
    cos8 = math.cos(8.0 * math.pi / k)
    cos16 = math.cos(16.0 * math.pi / k)
    num = (
        (k - 8.0)
        * (2.0 * cos8 + 1.0) ** 2
        * _gamma((k - 12.0) / k)
        * _gamma(2.0 * (k - 6.0) / k)
    )
    den = (
        (k - 16.0)
        * (2.0 * cos8 + 2.0 * cos16 + 1.0)
        * _gamma(2.0 - 20.0 / k)
        * _gamma((k - 4.0) / k)
    )
    if abs(den) < 1e-300:
        raise PoleError("d1 denominator vanished")
    return num / den


def crossing_F(kappa: float) -> np.ndarray:
    """Second-order crossing matrix for the special case
    Delta_O = Delta_(2,1), as printed; Gamma poles in denominators give
    zero entries via the reciprocal gamma."""
    b2 = 4.0 / kappa
    c = math.cos(math.pi * b2)
    if abs(c) < 1e-8:
        raise PoleError(f"sec(pi beta^2) diverges at kappa = {kappa}")
    sec = 1.0 / c
    f12 = gamma_ratio((1.0 - 2.0 * b2, 2.0 - 2.0 * b2), (2.0 - 3.0 * b2, 1.0 - b2))
    f21 = gamma_ratio((2.0 * b2, 2.0 * b2 - 1.0), (b2, 3.0 * b2 - 1.0))
    return np.array(
        [[-0.5 * sec, f12.real], [f21.real, 0.5 * sec]], dtype=float
    )


def structure_constants(kappa: float) -> StructureConstants:
    """The three non-trivial boundary structure constants, as the radicals
    of the printed closed forms (limit evaluation at cancelling poles)."""
    radicands = {
        "C_112": _limit_eval(_cst1_raw, kappa),
        "C_222": -_limit_eval(_c2_raw, kappa),
        "C_224": _limit_eval(_d1_raw, kappa),
    }
    out = {}
    for name, r in radicands.items():
        if r < -1e-10 * max(1.0, abs(r)):
            raise DomainError(f"negative radicand for {name} at kappa = {kappa}: {r}")
        out[name] = math.sqrt(max(r, 0.0))
    return StructureConstants(**out)


def structure_constants_exact_kappa6() -> StructureConstants:
    """The exact percolation (kappa = 6) closed forms.

    C_224 here is 2^{3/2} 3^{-5/4} sqrt(pi/5); the commonly quoted radical
    with halved exponents is off by an extra square root against both its
    own decimal value 0.56785... and the generic-kappa limit.
    """
    c112 = math.sqrt(-math.gamma(-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
    c222 = math.sqrt(
        -96.0
        * math.pi**3.5
        / (
            math.gamma(-2.0 / 3.0)
            * math.gamma(1.0 / 6.0) ** 3
            * math.gamma(1.0 / 3.0) ** 2
        )
    )
    c224 = 2.0**1.5 * 3.0 ** (-1.25) * math.sqrt(math.pi / 5.0)
    return StructureConstants(C_112=c112, C_222=c222, C_224=c224)


def third_order_crossing(kappa: float) -> CrossingData:
    """Crossing data of the third-order equation: the combination
    coefficients c2, c3, the crossing constant d1, and the bubble
    lower-portion coefficients.

    A component whose pole does not cancel at this kappa (c3 at kappa = 6)
    comes back NaN.
    """
    if abs(math.cos(8.0 * math.pi / kappa)) < 1e-8:
        raise PoleError(f"cos(8 pi / kappa) vanishes at kappa = {kappa}")
    if abs(kappa - 16.0) < 1e-8:
        raise PoleError("kappa = 16 denominators vanish")

    def guarded(raw):
        try:
            return _limit_eval(raw, kappa)
        except PoleError:
            return math.nan

    c2 = guarded(_c2_raw)
    c3 = guarded(_c3_raw)
    d1 = guarded(_d1_raw)
    lower_c1 = (
        cmath.exp(-16j * math.pi / kappa)
        * (2.0 * math.pi * kappa / (kappa - 16.0))
        * _gamma(16.0 / kappa) ** 2
        / _gamma(8.0 / kappa) ** 4
    )
    lower_c2 = cmath.exp(-24j * math.pi / kappa) / math.cos(8.0 * math.pi / kappa)
    try:
        F = crossing_F(kappa)
    except PoleError:
        F = np.full((2, 2), math.nan)
    return CrossingData(F=F, c2=c2, c3=c3, d1=d1, lower_c1=lower_c1, lower_c2=lower_c2)


# ---------------------------------------------------------------------------
# closed-form blocks


def block(family: str, xi: complex, kappa: float, cut_side: int = 0):
    """Closed-form solution tuple for one family at cross-ratio xi.

    families: spin2nd -> (g1, g2); chordal2nd -> (G,); lpp2nd -> (g1, g2);
    pair3rd -> (h1, h2); pivotal3rd -> (H,).
    """
    xi = complex(xi)
    if xi.imag == 0.0 and xi.real >= 1.0:
        if cut_side == 0:
            raise CutError(
                f"xi = {xi} lies on the branch cut [1, inf); pass cut_side"
            )
        xi = complex(xi.real, math.copysign(1e-150 * max(1.0, abs(xi.real)), cut_side))
    d31 = delta_31(kappa)
    d51 = delta_51(kappa)
    if family == "spin2nd":
        s = (2.0 - xi) / (2.0 * cmath.sqrt(1.0 - xi))
        return ((1.0 + s) ** (d31 / 2.0), (1.0 - s) ** (d31 / 2.0))
    if family == "chordal2nd":
        return ((xi**2 / (1.0 - xi)) ** (d31 / 2.0),)
    if family == "lpp2nd":
        u = 1j * (xi - 2.0) / xi
        return (1.0 + 0.0j, u * hyp2f1(0.5, 4.0 / kappa, 1.5, -(u**2)))
    if family == "pair3rd":
        r = 8.0 / kappa
        h1 = (xi / (xi - 1.0)) ** d31 * hyp2f1(1.0 - r, 1.0 - r, 2.0 - 2.0 * r, xi)
        h2 = xi**d51 * (xi - 1.0) ** (-d31) * hyp2f1(r, r, 2.0 * r, xi)
        return (h1, h2)
    if family == "pivotal3rd":
        return ((xi**2 / (1.0 - xi)) ** (d51 / 2.0),)
    raise DomainError(f"unknown block family {family!r}")


# ---------------------------------------------------------------------------
# residual verification of every closed form

_FAMILY_ODE = {
    "spin2nd": ("second", "spin"),
    "chordal2nd": ("second", "psi2"),
    "lpp2nd": ("second", "zero"),
    "pair3rd": ("third", "psi2"),
    "pivotal3rd": ("third", "psi4"),
}


def _family_delta(tag: str, kappa: float) -> float:
    from .params import op_dimension

    if tag == "spin":
        return op_dimension("spin", 0, kappa)
    if tag == "psi2":
        return op_dimension("bulk_leg", 2, kappa)
    if tag == "psi4":
        return op_dimension("bulk_leg", 4, kappa)
    return 0.0


def family_spec(family: str, kappa: float):
    """The BPZ equation instance solved by one closed-form family."""
    order, tag = _FAMILY_ODE[family]
    return bpz_ode.build_spec(order, _family_delta(tag, kappa), kappa)


def _off_cuts(family: str, xi: complex, margin: float) -> bool:
    """Keep a safety margin to every branch cut the principal-branch closed
    form induces, so a residual stencil around xi stays analytic."""
    if abs(xi.imag) < 0.15 or abs(xi) < 0.2 or abs(xi) > 0.9 or abs(xi - 1.0) < 0.2:
        return False
    if family in ("chordal2nd", "pivotal3rd"):
        base = xi**2 / (1.0 - xi)
        return math.pi - abs(cmath.phase(base)) > margin
    if family == "spin2nd":
        s = (2.0 - xi) / (2.0 * cmath.sqrt(1.0 - xi))
        for b in (1.0 + s, 1.0 - s):
            if math.pi - abs(cmath.phase(b)) < margin or abs(b) < 0.05:
                return False
        return True
    if family == "lpp2nd":
        u = 1j * (xi - 2.0) / xi
        w = -(u * u)
        return not (abs(w.imag) < 0.1 and w.real > 0.7)
    if family == "pair3rd":
        return math.pi - abs(cmath.phase(xi)) > margin
    return True


def residual_points(family: str, kappa: float, n: int = 25, seed: int = 7):
    """n sample points inside {|xi| <= 0.9} minus the family's cuts."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        xi = complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
        if _off_cuts(family, xi, 0.45):
            pts.append(xi)
    return pts


def residual_suite(kappa: float, n: int = 25):
    """Yield (family, xi, component_index, residual) over every closed form."""
    for family in _FAMILY_ODE:
        spec = family_spec(family, kappa)
        for xi in residual_points(family, kappa, n):
            parts = block(family, xi, kappa)
            for idx in range(len(parts)):
                res = bpz_ode.residual(
                    spec, lambda w, i=idx: block(family, w, kappa)[i], xi, h=0.03
                )
                yield family, xi, idx, res


# ---------------------------------------------------------------------------
# numerical crossing checks (ODE transport adjudicates the printed data)


def _transport_combination(spec, weights, n_terms, xi_start, targets):
    """Combine unit Frobenius-at-0 solutions with `weights`, then transport
    the combination to each target (sorted ascending, real axis path)."""
    order = 2 if spec.order == "second" else 3
    exps = bpz_ode.indicial(spec, 0)
    state = np.zeros(order, dtype=complex)
    for w, e in zip(weights, exps):
        if w == 0:
            continue
        sol = bpz_ode.frobenius(spec, 0, e, n_terms)
        state += w * np.asarray(sol.eval_with_derivatives(xi_start, order - 1))
    vals, _err = bpz_ode.integrate(spec, xi_start, state, targets)
    return [v[0] for v in vals]


def second_order_crossing_check(kappa: float, n_points: int = 10):
    """Transport g1^(0) - (F11/F21) g2^(0) of the Delta_O = Delta_(2,1)
    equation to xi near 1 and fit the proportionality against the
    phi_2-channel Frobenius solution at 1.

    Returns (constant, max_deviation); the constant must reproduce the
    printed crossing combination cst1 = F12 - F11 F22 / F21.
    """
    spec = bpz_ode.build_spec("second", delta_21(kappa), kappa)
    F = crossing_F(kappa)
    weights = (1.0, -F[0, 0] / F[1, 0])
    targets = sorted(1.0 - np.logspace(-2.5, -1.0, n_points))
    vals = _transport_combination(spec, weights, 60, 0.1, targets)
    exp1 = max(bpz_ode.indicial(spec, 1))
    ref = bpz_ode.frobenius(spec, 1, exp1, 60)
    ratios = np.array([v / ref(t) for v, t in zip(vals, targets)])
    constant = float(np.mean(ratios.real))
    max_dev = float(np.max(np.abs(ratios - constant)))
    return constant, max_dev


def third_order_crossing_check(kappa: float, n_points: int = 10):
    """Transport h1 + c2 h2 + c3 h3 of the boundary 2-leg four-point
    equation (Delta_O = Delta_(3,1)) toward xi = 1.

    Returns (fitted_exponent, fitted_constant, channel_exponent).  The
    channel exponent is the largest indicial exponent at 1 (the 4-leg
    channel); the pure-power exponent is fitted on the window
    xi = 1 - 1e-3 ... 1 - 1e-2, and the constant is obtained by solving
    for the combination in the full Frobenius basis at 1 (well-conditioned
    at moderate xi).  The constant must reproduce d1.
    """
    data = third_order_crossing(kappa)
    spec = bpz_ode.build_spec("third", delta_31(kappa), kappa)
    weights = (1.0, data.c2, data.c3)
    targets = sorted(1.0 - np.logspace(-2.95, -2.0, n_points))
    vals = _transport_combination(spec, weights, 80, 0.1, targets)
    exp1 = max(bpz_ode.indicial(spec, 1))
    ref = bpz_ode.frobenius(spec, 1, exp1, 120)
    ts = 1.0 - np.array(targets)
    # ratio to the unit Frobenius solution strips its regular series, so the
    # residual slope measures the deviation from a pure power
    ratios = np.array([v / ref(t) for v, t in zip(vals, targets)])
    resid_slope, _ = np.polyfit(np.log(ts), np.log(np.abs(ratios)), 1)
    fitted_exponent = float(exp1 + resid_slope)
    # constant: express the transported state in the 3-solution basis at 1
    xi_mid = 0.6
    exps1 = bpz_ode.indicial(spec, 1)
    basis = [bpz_ode.frobenius(spec, 1, e, 120) for e in exps1]
    state = np.zeros(3, dtype=complex)
    for w, e0 in zip(weights, bpz_ode.indicial(spec, 0)):
        sol = bpz_ode.frobenius(spec, 0, e0, 120)
        state += w * np.asarray(sol.eval_with_derivatives(xi_mid, 2))
    A = np.array([s.eval_with_derivatives(xi_mid, 2) for s in basis]).T
    coeffs = np.linalg.solve(A, state)
    constant = float(coeffs[int(np.argmax(exps1))].real)
    return fitted_exponent, constant, float(exp1)
