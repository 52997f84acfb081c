"""Independent ODE engine for the second- and third-order BPZ equations.

Everything downstream treats this module as the oracle: coefficients are
built exactly as printed, indicial exponents come out of the Frobenius
indicial polynomial (never hardcoded), series solutions out of the
recursion, and `residual` measures how well an arbitrary callable solves
the equation using stencil derivatives.

The singular points are {0, 1, infinity}; only 0 and 1 are expansion
points here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npp
from scipy.integrate import solve_ivp

from .errors import AccuracyError, CutError, DomainError, ResonanceError
from .params import delta_21, delta_31

__all__ = [
    "BpzSpec",
    "SeriesSolution",
    "build_spec",
    "indicial",
    "frobenius",
    "integrate",
    "residual",
]

_FROBENIUS_RADIUS = 0.5


@dataclass(frozen=True)
class BpzSpec:
    """One BPZ equation instance: order, bulk dimension Delta_O, and the
    kappa-derived boundary dimensions."""

    order: str  # "second" | "third"
    delta_O: float
    kappa: float
    beta_sq: float
    delta21: float
    delta31: float

    def coefficients(self, xi: complex):
        """Coefficients exactly as printed.

        second order: (p, q) of  G'' + p G' + q G = 0.
        third order:  (alpha, beta, gamma, delta) of
                      alpha H''' + beta H'' + gamma H' + delta H = 0.
        """
        if xi == 0 or xi == 1:
            raise DomainError(f"xi = {xi} is a singular point")
        d21, d31, dO = self.delta21, self.delta31, self.delta_O
        if self.order == "second":
            p = (2.0 + 4.0 * d21 * (xi - 2.0) - 4.0 * xi) / (3.0 * xi * (1.0 - xi))
            q = -(4.0 * d21 + 2.0) * dO / (3.0 * (1.0 - xi) ** 2)
            return p, q
        alpha = xi**2 * (xi - 1.0) ** 2
        beta = 2.0 * xi * (xi - 1.0) * (2.0 * xi - 1.0 - d31 * (xi - 2.0))
        gamma = (
            3.0 * d31 * (d31 - 1.0)
            - (3.0 * d31 - 1.0) * (d31 - 2.0) * xi
            + ((d31 - 1.0) * (d31 - 2.0) - 2.0 * dO * (d31 + 1.0)) * xi**2
        )
        delta = 2.0 * dO * d31 * (d31 + 1.0) * xi * (xi - 2.0) / (xi - 1.0)
        return alpha, beta, gamma, delta

    def polynomial_coefficients(self) -> list[np.ndarray]:
        """The equation with denominators cleared: ascending-coefficient
        polynomials [P_0, ..., P_K] of  sum_k P_k(xi) G^(k) = 0."""
        d21, d31, dO = self.delta21, self.delta31, self.delta_O
        if self.order == "second":
            # multiply the printed form by 3 xi (1-xi)^2
            n = np.array([2.0 - 8.0 * d21, 4.0 * d21 - 4.0])  # numerator of p * 3 xi (1-xi)
            one_m = np.array([1.0, -1.0])
            p2 = npp.polymul(np.array([0.0, 3.0]), npp.polymul(one_m, one_m))
            p1 = npp.polymul(n, one_m)
            p0 = np.array([0.0, -(4.0 * d21 + 2.0) * dO])
            return [p0, p1, p2]
        # multiply the printed form by (xi - 1)
        xm1 = np.array([-1.0, 1.0])
        xi_p = np.array([0.0, 1.0])
        alpha = npp.polymul(npp.polymul(xi_p, xi_p), npp.polymul(npp.polymul(xm1, xm1), xm1))
        inner = np.array([-1.0 + 2.0 * d31, 2.0 - d31])  # 2 xi - 1 - d31(xi-2)
        beta = npp.polymul(npp.polymul(np.array([0.0, 2.0]), npp.polymul(xm1, xm1)), inner)
        gamma_poly = np.array(
            [
                3.0 * d31 * (d31 - 1.0),
                -(3.0 * d31 - 1.0) * (d31 - 2.0),
                (d31 - 1.0) * (d31 - 2.0) - 2.0 * dO * (d31 + 1.0),
            ]
        )
        gamma = npp.polymul(xm1, gamma_poly)
        delta = 2.0 * dO * d31 * (d31 + 1.0) * np.array([0.0, -2.0, 1.0])  # xi(xi-2)
        return [delta, gamma, beta, alpha]


def build_spec(order: str, delta_O: float, kappa: float) -> BpzSpec:
    if order not in ("second", "third"):
        raise DomainError(f"order must be 'second' or 'third', got {order!r}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return BpzSpec(
        order=order,
        delta_O=float(delta_O),
        kappa=float(kappa),
        beta_sq=4.0 / kappa,
        delta21=delta_21(kappa),
        delta31=delta_31(kappa),
    )


def _falling_factorial_poly(k: int) -> np.ndarray:
    """Coefficients of r(r-1)...(r-k+1) as a polynomial in r (ascending)."""
    poly = np.array([1.0])
    for j in range(k):
        poly = npp.polymul(poly, np.array([-float(j), 1.0]))
    return poly


def _clean_poly(p: np.ndarray) -> np.ndarray:
    """Snap floating-point residue coefficients to exact zero; a fake
    nonzero entry would corrupt the singularity-order bookkeeping."""
    scale = float(np.max(np.abs(p))) if p.size else 0.0
    if scale == 0.0:
        return np.array([0.0])
    out = np.where(np.abs(p) < 1e-12 * scale, 0.0, p)
    return npp.polytrim(out, tol=0.0)


def _local_polynomials(spec: BpzSpec, point: int) -> list[np.ndarray]:
    """Polynomial coefficients in the local variable t (t = xi at 0,
    t = 1 - xi at 1, with the chain-rule sign absorbed)."""
    polys = spec.polynomial_coefficients()
    if point == 0:
        return [_clean_poly(p) for p in polys]
    if point != 1:
        raise DomainError(f"expansion point must be 0 or 1, got {point}")
    shifted = []
    sub = np.array([1.0, -1.0])  # xi = 1 - t
    for k, p in enumerate(polys):
        comp = np.array([0.0])
        for j, cj in enumerate(p):
            comp = npp.polyadd(comp, cj * npp.polypow(sub, j) if j else np.array([cj]))
        shifted.append(_clean_poly(((-1.0) ** k) * comp))
    return shifted


def _theta_form(spec: BpzSpec, point: int) -> list[np.ndarray]:
    """Rewrite the equation as sum_m t^m R_m(theta) G = 0 with theta = t d/dt.
    Returns [R_0, R_1, ...] as ascending polynomials in the exponent variable;
    R_0 is the Frobenius indicial polynomial."""
    polys = _local_polynomials(spec, point)
    table: dict[int, np.ndarray] = {}
    mu = None
    for k, p in enumerate(polys):
        for j, cj in enumerate(p):
            if cj == 0.0:
                continue
            shift = j - k
            if mu is None or shift < mu:
                mu = shift
    r_polys: dict[int, np.ndarray] = {}
    for k, p in enumerate(polys):
        ff = _falling_factorial_poly(k)
        for j, cj in enumerate(p):
            if cj == 0.0:
                continue
            m = j - k - mu
            r_polys[m] = npp.polyadd(r_polys.get(m, np.array([0.0])), cj * ff)
    max_m = max(r_polys)
    return [r_polys.get(m, np.array([0.0])) for m in range(max_m + 1)]


def indicial(spec: BpzSpec, point: int) -> list[float]:
    """Indicial exponents at the expansion point, from the roots of the
    Frobenius indicial polynomial of the coefficient functions."""
    r0 = _theta_form(spec, point)[0]
    roots = npp.polyroots(r0)
    if np.max(np.abs(roots.imag)) > 1e-9:
        raise AccuracyError(f"complex indicial roots at point {point}: {roots}")
    return sorted(float(r) for r in roots.real)


@dataclass(frozen=True)
class SeriesSolution:
    """Unit-normalized Frobenius solution t^exponent (1 + a_1 t + ...),
    t = xi at point 0 and t = 1 - xi at point 1."""

    expansion_point: int
    exponent: float
    coefficients: np.ndarray
    radius: float = _FROBENIUS_RADIUS
    tail_scale: float = field(default=0.0)

    def _t(self, xi: complex) -> complex:
        return complex(xi) if self.expansion_point == 0 else 1.0 - complex(xi)

    def __call__(self, xi: complex) -> complex:
        t = self._t(xi)
        acc = 0.0 + 0.0j
        for a in self.coefficients[::-1]:
            acc = acc * t + a
        if t == 0:
            if self.exponent == 0:
                return acc
            if self.exponent > 0:
                return 0.0 + 0.0j
            raise DomainError("series with negative exponent evaluated at its singular point")
        return acc * t**self.exponent

    def eval_with_derivatives(self, xi: complex, n_derivs: int) -> list[complex]:
        """[f, f', ..., f^(n)] with respect to xi."""
        t = self._t(xi)
        r = self.exponent
        out = []
        sign = 1.0 if self.expansion_point == 0 else -1.0
        for d in range(n_derivs + 1):
            acc = 0.0 + 0.0j
            for n_idx in range(len(self.coefficients) - 1, -1, -1):
                e = r + n_idx
                fall = 1.0
                for j in range(d):
                    fall *= e - j
                acc = acc * t + self.coefficients[n_idx] * fall
            val = acc * t ** (r - d)
            out.append(val * sign**d)
        return out

    def tail_estimate(self, xi: complex) -> float:
        t = abs(self._t(xi))
        if t >= self.radius:
            return math.inf
        geo = t / self.radius
        return self.tail_scale * t ** (len(self.coefficients)) / max(1e-300, 1.0 - geo)


def frobenius(spec: BpzSpec, point: int, exponent: float, n_terms: int = 40) -> SeriesSolution:
    """Frobenius series at a regular singular point for one indicial exponent.

    Refuses resonant cases (another exponent exceeds this one by a
    non-negative integer): no logarithmic solutions here, by design.
    """
    thetas = _theta_form(spec, point)
    r0 = thetas[0]
    roots = indicial(spec, point)
    if not any(abs(exponent - r) < 1e-8 for r in roots):
        raise DomainError(
            f"exponent {exponent} is not an indicial exponent at {point}: {roots}"
        )
    if sum(1 for r in roots if abs(r - exponent) < 1e-9) > 1:
        raise ResonanceError(f"repeated indicial exponent near {exponent}")
    for other in roots:
        gap = other - exponent
        if gap > 1e-9 and abs(gap - round(gap)) < 1e-9:
            raise ResonanceError(
                f"exponents {exponent} and {other} differ by a non-negative "
                "integer; perturb kappa or use integrate()"
            )
    coeffs = np.zeros(n_terms + 1, dtype=complex)
    coeffs[0] = 1.0
    jmax = len(thetas) - 1
    for m in range(1, n_terms + 1):
        acc = 0.0 + 0.0j
        for j in range(1, min(m, jmax) + 1):
            rj = thetas[j]
            if rj.size == 1 and rj[0] == 0.0:
                continue
            acc += npp.polyval(exponent + m - j, rj) * coeffs[m - j]
        denom = npp.polyval(exponent + m, r0)
        if abs(denom) < 1e-12:
            raise ResonanceError(
                f"indicial polynomial vanishes at exponent + {m}; resonant case"
            )
        coeffs[m] = -acc / denom
    tail = float(np.max(np.abs(coeffs[-3:]))) if n_terms >= 3 else float(abs(coeffs[-1]))
    return SeriesSolution(
        expansion_point=point,
        exponent=float(exponent),
        coefficients=coeffs,
        radius=_FROBENIUS_RADIUS,
        tail_scale=tail,
    )


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    """Distance from point p to segment [a, b]."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return abs(p - a)
    s = ((p - a) * ab.conjugate()).real / denom
    s = min(1.0, max(0.0, s))
    return abs(p - (a + s * ab))


def integrate(
    spec: BpzSpec,
    xi0: complex,
    y0,
    path,
    rtol: float = 1e-12,
) -> tuple[list[np.ndarray], float]:
    """Transport solution data y0 = [f, f', (f'')] at xi0 along a polyline.

    `path` is the list of waypoints (xi0 excluded).  Returns the state at
    every waypoint plus a crude global error estimate.  Every segment must
    stay at least 1e-3 away from the singular points 0 and 1.
    """
    order = 2 if spec.order == "second" else 3
    y = np.asarray(y0, dtype=complex)
    if y.shape != (order,):
        raise DomainError(f"initial data must have length {order}")
    vertices = [complex(xi0)] + [complex(p) for p in path]
    for a, b in zip(vertices[:-1], vertices[1:]):
        for s in (0.0, 1.0):
            if _segment_distance(a, b, s) < 1e-3:
                raise DomainError(
                    f"path segment [{a}, {b}] passes within 1e-3 of xi = {s}"
                )

    def rhs_factory(a: complex, b: complex):
        dxi = b - a

        def rhs(s, u):
            yc = u[:order] + 1j * u[order:]
            xi = a + s * dxi
            if spec.order == "second":
                p, q = spec.coefficients(xi)
                top = -(p * yc[1] + q * yc[0])
            else:
                al, be, ga, de = spec.coefficients(xi)
                top = -(be * yc[2] + ga * yc[1] + de * yc[0]) / al
            dy = np.empty(order, dtype=complex)
            dy[:-1] = yc[1:]
            dy[-1] = top
            dy *= dxi
            return np.concatenate([dy.real, dy.imag])

        return rhs

    out = []
    nsteps = 0
    for a, b in zip(vertices[:-1], vertices[1:]):
        if a == b:
            out.append(y.copy())
            continue
        scale = max(1.0, float(np.max(np.abs(y))))
        sol = solve_ivp(
            rhs_factory(a, b),
            (0.0, 1.0),
            np.concatenate([y.real, y.imag]),
            method="DOP853",
            rtol=rtol,
            atol=1e-14 * scale,
            dense_output=False,
        )
        if not sol.success:
            raise AccuracyError(f"integration failed on segment [{a}, {b}]: {sol.message}")
        nsteps += sol.t.size
        y = sol.y[:order, -1] + 1j * sol.y[order:, -1]
        out.append(y.copy())
    err = rtol * max(1.0, nsteps) * max(float(np.max(np.abs(y))), 1.0)
    return out, err


def _stencil_derivatives(f, xi: complex, h: float, m: int, kmax: int) -> list[complex]:
    """Derivatives f^(0..kmax) at xi from an m-point circle stencil of
    radius h (trigonometric polynomial fit)."""
    thetas = 2.0 * math.pi * np.arange(m) / m
    pts = xi + h * np.exp(1j * thetas)
    vals = np.array([complex(f(p)) for p in pts])
    coeffs = np.fft.fft(vals) / m  # c_k ~ f^(k) h^k / k!
    out = []
    fact = 1.0
    for k in range(kmax + 1):
        if k > 0:
            fact *= k
        out.append(coeffs[k] * fact / h**k)
    return out


def residual(spec: BpzSpec, f, xi: complex, h: float | None = None) -> float:
    """|L[f](xi)| / (largest term), with derivatives from a local polynomial
    fit on a circle stencil.

    The stencil radius adapts to the distance from the singular points; it
    is capped well above 1e-3 because double-precision noise in f would
    otherwise swamp the third derivative.  The stencil must not cross the
    principal-branch cuts on the real axis outside (0, 1).
    """
    xi = complex(xi)
    dist = min(abs(xi), abs(xi - 1.0))
    if h is None:
        h = min(0.05, 0.25 * dist)
    if h <= 0:
        raise DomainError("stencil radius must be positive")
    if abs(xi.imag) < h and not (xi.real - h > 0.0 and xi.real + h < 1.0):
        raise CutError(
            f"stencil of radius {h} at xi = {xi} crosses a real-axis branch cut"
        )
    kmax = 2 if spec.order == "second" else 3
    derivs = _stencil_derivatives(f, xi, h, 16, kmax)
    if spec.order == "second":
        p, q = spec.coefficients(xi)
        terms = [derivs[2], p * derivs[1], q * derivs[0]]
    else:
        al, be, ga, de = spec.coefficients(xi)
        terms = [al * derivs[3], be * derivs[2], ga * derivs[1], de * derivs[0]]
    total = sum(terms)
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(total) / scale
