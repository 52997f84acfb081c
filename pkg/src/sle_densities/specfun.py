"""Complex-argument special functions: log-gamma, reciprocal gamma, digamma,
and the Gauss hypergeometric function on the cut plane C \\ [1, inf).

Branch convention (shared by every module in this package): all fractional
powers and logarithms are principal-branch, cut along the negative real
axis of their argument.

hyp2f1 evaluates the Maclaurin series inside a safe disk and otherwise
applies the standard argument transformations

    z -> z/(z-1), 1-z, 1/z, 1/(1-z), (z-1)/z,

choosing the image of smallest modulus whose connection coefficients are
non-degenerate.  The logarithmic case of the z -> 1-z transformation
(c - a - b an integer) is implemented because the third-order solution
blocks hit c - a - b = 0 exactly.  Points whose every usable image lies
near the unit circle are reached by Taylor continuation of the
hypergeometric ODE along a ray.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import AccuracyError, CutError, PoleError

__all__ = [
    "HypParams",
    "log_gamma",
    "recip_gamma",
    "gamma_fn",
    "gamma_ratio",
    "digamma",
    "maclaurin_2f1",
    "hyp2f1",
]

_LN_2PI_HALF = 0.5 * math.log(2.0 * math.pi)
_LN_PI = math.log(math.pi)

# Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficients).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)

_SERIES_TOL = 1e-16
_SERIES_CAP = 20000
_SERIES_RADIUS = 0.80
# |c-a-b| (or |a-b|) must be at least this far from an integer for the
# two-term connection formulas; closer than _SNAP_TOL snaps to the
# logarithmic limit formula.
_DEGEN_TOL = 0.02
_SNAP_TOL = 1e-12


def _is_nonpos_int(z: complex, tol: float = 1e-12) -> bool:
    return (
        abs(z.imag) <= tol
        and z.real <= tol
        and abs(z.real - round(z.real)) <= tol
    )


def _near_int(x: complex, tol: float) -> bool:
    return abs(x.imag) <= tol and abs(x.real - round(x.real)) <= tol


def _log_sin_pi(z: complex) -> complex:
    """log(sin(pi z)), overflow-safe for large |Im z| (branch not tracked
    beyond a 2*pi*i multiple; every consumer exponentiates)."""
    w = cmath.pi * z
    if z.imag >= 0.0:
        # sin w = (i/2) e^{-iw} (1 - e^{2iw})
        return cmath.log(0.5j) - 1j * w + cmath.log(1.0 - cmath.exp(2j * w))
    return cmath.log(-0.5j) + 1j * w + cmath.log(1.0 - cmath.exp(-2j * w))


def log_gamma(z: complex) -> complex:
    """Principal-branch log Gamma via the Lanczos approximation, with the
    reflection formula for Re z < 1/2.  exp(log_gamma) is accurate to
    ~1e-14 relative for |z| <= 50."""
    z = complex(z)
    if _is_nonpos_int(z):
        raise PoleError(f"log_gamma pole at z = {z}")
    if z.real < 0.5:
        return _LN_PI - _log_sin_pi(z) - log_gamma(1.0 - z)
    zz = z - 1.0
    acc = _LANCZOS_C[0]
    for k in range(1, 15):
        acc += _LANCZOS_C[k] / (zz + k)
    t = zz + _LANCZOS_G + 0.5
    return _LN_2PI_HALF + (zz + 0.5) * cmath.log(t) - t + cmath.log(acc)


def gamma_fn(z: complex) -> complex:
    """Gamma(z) = exp(log_gamma(z)); raises PoleError at non-positive integers."""
    return cmath.exp(log_gamma(z))


def recip_gamma(z: complex) -> complex:
    """1/Gamma(z): entire, exactly 0 at non-positive integers."""
    z = complex(z)
    if _is_nonpos_int(z, tol=0.0):
        return 0.0 + 0.0j
    if z.real >= 0.5:
        return cmath.exp(-log_gamma(z))
    # reflection: 1/Gamma(z) = sin(pi z) Gamma(1-z) / pi
    return cmath.exp(_log_sin_pi(z) + log_gamma(1.0 - z) - _LN_PI)


def gamma_ratio(numerators, denominators) -> complex:
    """prod Gamma(n_i) / prod Gamma(d_j) with pole bookkeeping: a Gamma pole
    in a denominator yields a zero factor; a pole in a numerator raises
    PoleError unless it is cancelled by a denominator pole (not attempted)."""
    num_poles = [n for n in numerators if _is_nonpos_int(complex(n))]
    if num_poles:
        raise PoleError(f"Gamma pole in numerator at {num_poles[0]}")
    for d in denominators:
        if _is_nonpos_int(complex(d)):
            return 0.0 + 0.0j
    acc = 0.0 + 0.0j
    for n in numerators:
        acc += log_gamma(n)
    for d in denominators:
        acc -= log_gamma(d)
    return cmath.exp(acc)


_BERNOULLI_TERMS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(z: complex) -> complex:
    """Complex digamma via upward recurrence plus the asymptotic series."""
    z = complex(z)
    if _is_nonpos_int(z):
        raise PoleError(f"digamma pole at z = {z}")
    if z.real < 0.0:
        # psi(z) = psi(1-z) - pi cot(pi z)
        return digamma(1.0 - z) - cmath.pi / cmath.tan(cmath.pi * z)
    acc = 0.0 + 0.0j
    while z.real < 14.0:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    s = 0.0 + 0.0j
    p = inv2
    for b in _BERNOULLI_TERMS:
        s += b * p
        p *= inv2
    return acc + cmath.log(z) - 0.5 / z - s


@dataclass(frozen=True)
class HypParams:
    """Parameter triple of 2F1(a, b; c; z)."""

    a: complex
    b: complex
    c: complex


def _series_with_deriv(a, b, c, z) -> tuple[complex, complex]:
    """Maclaurin series of 2F1 and its z-derivative.  Stops once the term is
    below 1e-16 relative for three consecutive terms; >20000 terms is an
    AccuracyError, never silent degradation."""
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    deriv = 0.0 + 0.0j
    small = 0
    for k in range(_SERIES_CAP):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0))
        dterm = term * ratio * (k + 1.0)  # coefficient of z^k in F'
        deriv += dterm
        term = term * ratio * z
        total += term
        if abs(term) <= _SERIES_TOL * max(abs(total), 1e-300):
            small += 1
            if small >= 3:
                return total, deriv
        else:
            small = 0
    raise AccuracyError(
        f"2F1 series did not converge within {_SERIES_CAP} terms at z = {z}"
    )


def maclaurin_2f1(a: complex, b: complex, c: complex, z: complex) -> complex:
    """Plain Maclaurin summation of 2F1; the series oracle.  Requires |z|
    small enough for convergence (terminating series excepted)."""
    if _is_nonpos_int(c) and not (
        (_is_nonpos_int(a) and a.real > c.real) or (_is_nonpos_int(b) and b.real > c.real)
    ):
        raise PoleError(f"2F1 parameter c = {c} is a non-positive integer")
    apoly = _is_nonpos_int(a)
    bpoly = _is_nonpos_int(b)
    if apoly or bpoly:
        return _polynomial_2f1(a, b, c, z)
    return _series_with_deriv(a, b, c, z)[0]


def _polynomial_2f1(a, b, c, z) -> complex:
    """Terminating series when a or b is a non-positive integer."""
    na = -int(round(a.real)) if _is_nonpos_int(a) else None
    nb = -int(round(b.real)) if _is_nonpos_int(b) else None
    n = min(x for x in (na, nb) if x is not None)
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(n):
        denom = (c + k) * (k + 1.0)
        if denom == 0:
            raise PoleError(f"2F1 polynomial case hits c pole, c = {c}")
        term = term * (a + k) * (b + k) / denom * z
        total += term
    return total


def _log1m_side(z: complex) -> complex:
    """log(1 - z) on the principal branch."""
    return cmath.log(1.0 - z)


def _pow(base: complex, expo: complex) -> complex:
    if base == 0:
        if expo == 0:
            return 1.0 + 0.0j
        if expo.real > 0:
            return 0.0 + 0.0j
        raise PoleError(f"0 raised to power {expo}")
    return cmath.exp(expo * cmath.log(base))


def _one_minus_standard(a, b, c, z) -> complex:
    w = 1.0 - z
    f1 = _series_with_deriv(a, b, a + b - c + 1.0, w)[0]
    f2 = _series_with_deriv(c - a, c - b, c - a - b + 1.0, w)[0]
    t1 = gamma_ratio((c, c - a - b), (c - a, c - b)) * f1
    t2 = gamma_ratio((c, a + b - c), (a, b)) * _pow(w, c - a - b) * f2
    return t1 + t2


def _one_minus_log(a, b, c, z, m: int) -> complex:
    """z -> 1-z connection when c - a - b = m is an integer (DLMF 15.8.10/11
    with the m < 0 case reduced by Euler's transformation)."""
    if m < 0:
        # F(a,b;c;z) = (1-z)^{c-a-b} F(c-a, c-b; c; z); the new difference
        # c - (c-a) - (c-b) = a+b-c = -m > 0.
        return _pow(1.0 - z, c - a - b) * _one_minus_log(c - a, c - b, c, z, -m)
    w = 1.0 - z
    lw = _log1m_side(z)
    if m == 0:
        pref = gamma_ratio((c,), (a, b))
        total = 0.0 + 0.0j
        coef = 1.0 + 0.0j
        for s in range(_SERIES_CAP):
            bracket = (
                2.0 * digamma(s + 1.0)
                - digamma(a + s)
                - digamma(b + s)
                - lw
            )
            term = coef * bracket
            total += term
            if s > 2 and abs(term) <= _SERIES_TOL * max(abs(total), 1e-300):
                return pref * total
            coef = coef * (a + s) * (b + s) / ((s + 1.0) ** 2) * w
        raise AccuracyError("logarithmic 2F1 series (m=0) did not converge")
    # m >= 1
    first = 0.0 + 0.0j
    coef = 1.0 + 0.0j
    for s in range(m):
        first += coef
        if s + 1 < m:
            coef = coef * (a + s) * (b + s) / ((s + 1.0) * (1.0 - m + s)) * w
    first *= gamma_ratio((m, c), (a + m, b + m))
    second = 0.0 + 0.0j
    coef = complex(1.0 / math.factorial(m))  # 1/(s! (s+m)!) at s = 0
    for s in range(_SERIES_CAP):
        bracket = (
            lw
            - digamma(s + 1.0)
            - digamma(s + m + 1.0)
            + digamma(a + s + m)
            + digamma(b + s + m)
        )
        term = coef * bracket
        second += term
        if s > 2 and abs(term) <= _SERIES_TOL * max(abs(second), 1e-300):
            break
        coef = coef * (a + m + s) * (b + m + s) / ((s + 1.0) * (s + m + 1.0)) * w
    else:
        raise AccuracyError("logarithmic 2F1 series (m>0) did not converge")
    second *= -((-1.0) ** m) * gamma_ratio((c,), (a, b)) * _pow(w, complex(m))
    return first + second


def _taylor_continue(a, b, c, z) -> complex:
    """Analytic continuation of 2F1 by Taylor-stepping the hypergeometric ODE
    from an anchor toward z.  Parameter-degeneracy free.  Targets near the
    cut [1, inf) are approached on their own side through a lifted waypoint
    so no step disk touches the branch point."""
    r = abs(z)
    sigma = 1.0 if z.imag >= 0.0 else -1.0
    if z.real > 0.55 and abs(z.imag) < 0.45:
        anchor = complex(0.45, 0.45 * sigma)
        waypoints = [complex(z.real, 0.45 * sigma), z]
    else:
        anchor = 0.6 * z / r
        waypoints = [z]
    f, fp = _series_with_deriv(a, b, c, anchor)
    cur = anchor
    for leg in waypoints:
        f, fp, cur = _taylor_leg(a, b, c, f, fp, cur, leg)
    return f


def _taylor_leg(a, b, c, f, fp, cur, z):
    steps = 0
    while cur != z:
        steps += 1
        if steps > 200:
            raise AccuracyError("2F1 Taylor continuation took too many steps")
        rad = min(abs(cur), abs(cur - 1.0))
        step = 0.55 * rad
        rem = z - cur
        if abs(rem) <= step:
            nxt = z
        else:
            nxt = cur + step * rem / abs(rem)
        t = nxt - cur
        # Taylor coefficients about the ordinary point cur
        f0, f1 = f, fp
        w0 = cur
        q = w0 * (1.0 - w0)
        val = f0 + f1 * t
        dval = f1
        tp = t  # t^{n+1} while combining
        coeffs = [f0, f1]
        n = 0
        small = 0
        while n < 2000:
            fn = coeffs[n]
            fn1 = coeffs[n + 1]
            fn2 = (
                (n + a) * (n + b) * fn
                - (n + 1.0) * (n * (1.0 - 2.0 * w0) + c - (a + b + 1.0) * w0) * fn1
            ) / (q * (n + 2.0) * (n + 1.0))
            coeffs.append(fn2)
            tp = tp * t
            term = fn2 * tp
            val += term
            dval += (n + 2.0) * fn2 * tp / t
            if abs(term) <= _SERIES_TOL * max(abs(val), 1e-300):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
            n += 1
        else:
            raise AccuracyError("2F1 Taylor continuation step did not converge")
        f, fp = val, dval
        cur = nxt
    return f, fp, cur


def hyp2f1(a, b: complex = None, c: complex = None, z: complex = None,
           cut_side: int = 0) -> complex:
    """Principal-branch Gauss hypergeometric function 2F1(a, b; c; z).

    The first argument may be a HypParams triple, in which case the second
    positional argument is z.  z on the cut [1, inf) needs cut_side = +1 or
    -1 to select the limit from above or below; otherwise a CutError is
    raised.
    """
    if isinstance(a, HypParams):
        z = b
        a, b, c = a.a, a.b, a.c
    a = complex(a)
    b = complex(b)
    c = complex(c)
    z = complex(z)
    if z.imag == 0.0 and z.real >= 1.0:
        if cut_side == 0:
            raise CutError(
                f"2F1 argument z = {z} lies on the branch cut [1, inf); "
                "pass cut_side=+1 or -1"
            )
        z = complex(z.real, math.copysign(1e-150 * max(1.0, abs(z.real)), cut_side))
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _polynomial_2f1(a, b, c, z)
    if _is_nonpos_int(c):
        raise PoleError(f"2F1 parameter c = {c} is a non-positive integer")
    if z == 0:
        return 1.0 + 0.0j

    cab = c - a - b
    ab = a - b
    cab_int = _near_int(cab, _SNAP_TOL)
    cab_degen = _near_int(cab, _DEGEN_TOL)
    ab_int = _near_int(ab, _SNAP_TOL)
    ab_degen = _near_int(ab, _DEGEN_TOL)

    one_m = 1.0 - z
    candidates = [
        (abs(z), "id"),
        (abs(z / (z - 1.0)), "pfaff"),
        (abs(one_m), "one_minus"),
    ]
    if abs(z) > 1e-12:
        candidates.append((abs(1.0 / z), "recip"))
        candidates.append((abs((z - 1.0) / z), "zm1_over_z"))
    if abs(one_m) > 1e-12:
        candidates.append((abs(1.0 / one_m), "recip1m"))
    candidates.sort(key=lambda t: t[0])

    for mod, plan in candidates:
        if mod > _SERIES_RADIUS:
            break
        if plan == "id":
            return _series_with_deriv(a, b, c, z)[0]
        if plan == "pfaff":
            w = z / (z - 1.0)
            return _pow(one_m, -a) * _series_with_deriv(a, c - b, c, w)[0]
        if plan == "one_minus":
            if cab_int:
                return _one_minus_log(a, b, c, z, int(round(cab.real)))
            if cab_degen:
                continue
            return _one_minus_standard(a, b, c, z)
        if plan == "recip":
            if ab_degen:
                continue
            w = 1.0 / z
            t1 = (
                gamma_ratio((c, b - a), (b, c - a))
                * _pow(-z, -a)
                * _series_with_deriv(a, a - c + 1.0, a - b + 1.0, w)[0]
            )
            t2 = (
                gamma_ratio((c, a - b), (a, c - b))
                * _pow(-z, -b)
                * _series_with_deriv(b, b - c + 1.0, b - a + 1.0, w)[0]
            )
            return t1 + t2
        if plan == "recip1m":
            if ab_degen:
                continue
            w = 1.0 / one_m
            t1 = (
                gamma_ratio((c, b - a), (b, c - a))
                * _pow(one_m, -a)
                * _series_with_deriv(a, c - b, a - b + 1.0, w)[0]
            )
            t2 = (
                gamma_ratio((c, a - b), (a, c - b))
                * _pow(one_m, -b)
                * _series_with_deriv(b, c - a, b - a + 1.0, w)[0]
            )
            return t1 + t2
        if plan == "zm1_over_z":
            if cab_degen:
                continue
            w = 1.0 - 1.0 / z
            t1 = (
                gamma_ratio((c, c - a - b), (c - a, c - b))
                * _pow(z, -a)
                * _series_with_deriv(a, a - c + 1.0, a + b - c + 1.0, w)[0]
            )
            t2 = (
                gamma_ratio((c, a + b - c), (a, b))
                * _pow(one_m, c - a - b)
                * _pow(z, a - c)
                * _series_with_deriv(c - a, 1.0 - a, c - a - b + 1.0, w)[0]
            )
            return t1 + t2

    # Every usable image sits near the unit circle: continue the ODE along
    # the smaller of the direct and Pfaff rays.
    if abs(z) <= abs(z / (z - 1.0)):
        return _taylor_continue(a, b, c, z)
    w = z / (z - 1.0)
    return _pow(one_m, -a) * _taylor_continue(a, c - b, c, w)
