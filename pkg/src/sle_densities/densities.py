"""Half-plane geometry to cross-ratio mapping and the physical densities:
anchored-cluster densities, the SLE path density, bubble boundary and
pivotal-point densities, Schramm's left-passage probability, and the
chordal Green's function, with deterministic grid sampling.

Geometry: anchors sit at -L/2 and +L/2, the bulk point z has Im z > 0, and

    xi = 4 L (z - zbar) / ((L + 2z)(L - 2zbar)).

The image of the whole upper half-plane is the circle |1 - xi| = 1:
|z| < L/2 maps to the upper arc, |z| > L/2 to the lower arc, and the
circle |z| = L/2 to xi = 2 (the two sides of the branch cut [1, inf)).

On that locus the solution blocks have constant phase, so real densities
are the modulus of the assembled expression; the bubble lower-portion
combination additionally needs the relative weight -|c2/c1| between the
phase-aligned basis functions, which reproduces the printed coefficient
magnitudes and is exactly the weight that makes the density C^1 across
|z| = L/2.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .errors import DomainError, PoleError, RealityError
from .params import delta_21, delta_31, delta_51, op_dimension
from .solutions import block, structure_constants, third_order_crossing
from .specfun import hyp2f1, recip_gamma

__all__ = [
    "CrossRatioGeometry",
    "DensityGrid",
    "DENSITY_KINDS",
    "cross_ratio",
    "density",
    "left_passage",
    "greens",
    "grid_eval",
]

DENSITY_KINDS = ("rho110", "rho112", "rho220", "rho222_lower", "rho224")
# rho222_upper is the variant with the boundary-exponent assignment flipped
DENSITY_VARIANTS = DENSITY_KINDS + ("rho222_upper",)


@dataclass(frozen=True)
class CrossRatioGeometry:
    """Marked points (-L/2, L/2), bulk point z, and the derived cross-ratio."""

    L: float
    z: complex
    xi: complex

    @property
    def x1(self) -> float:
        return -0.5 * self.L

    @property
    def x2(self) -> float:
        return 0.5 * self.L


def cross_ratio(L: float, z: complex) -> complex:
    """Cross-ratio of (-L/2, L/2, z, zbar); requires Im z > 0."""
    z = complex(z)
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    if not z.imag > 0:
        raise DomainError(f"z must lie in the open upper half-plane, got {z}")
    return 4.0 * L * (z - z.conjugate()) / ((L + 2.0 * z) * (L - 2.0 * z.conjugate()))


def geometry(L: float, z: complex) -> CrossRatioGeometry:
    return CrossRatioGeometry(L=float(L), z=complex(z), xi=cross_ratio(L, z))


# ---------------------------------------------------------------------------
# bubble lower-portion machinery


@lru_cache(maxsize=64)
def _lower_data(kappa: float):
    """Alignment phases, relative weight, and junction sign for the bubble
    boundary density at one kappa.

    On the inside arc the two third-order blocks carry the constant phases
    alpha1 = -pi d31 / 2 and alpha2 = pi (d51/2 - d31); outside, h2 carries
    -alpha2.  The inside weight is tau = -|c2/c1| (the printed magnitudes);
    the junction sign and scale stitch the two regimes continuously at
    xi = 2.  The assembled block is unit-normalized on the xi^{d31} channel.
    """
    d31 = delta_31(kappa)
    d51 = delta_51(kappa)
    data = third_order_crossing(kappa)
    tau = -abs(data.lower_c2 / data.lower_c1)
    a1 = -0.5 * math.pi * d31
    a2 = math.pi * (0.5 * d51 - d31)
    rot1 = cmath.exp(-1j * a1)
    rot2 = cmath.exp(-1j * a2)
    # junction: xi = 2 approached from Im > 0 (inside) and Im < 0 (outside)
    h1j, h2j = block("pair3rd", 2.0, kappa, cut_side=+1)
    inside_j = (rot1 * h1j).real + tau * (rot2 * h2j).real
    _, h2o = block("pair3rd", 2.0, kappa, cut_side=-1)
    outside_j = (rot2.conjugate() * h2o).real
    if inside_j == 0.0 or outside_j == 0.0:
        raise RealityError(f"degenerate lower-portion junction at kappa = {kappa}")
    scale_out = inside_j / outside_j
    return tau, rot1, rot2, scale_out


def _lower_block(kappa: float, xi: complex, inside: bool) -> float:
    """Piecewise lower-portion block, continuous and C^1 at xi = 2 and
    unit-normalized on the inside leading channel."""
    tau, rot1, rot2, scale_out = _lower_data(kappa)
    side = +1 if inside else -1
    if inside:
        h1, h2 = block("pair3rd", xi, kappa, cut_side=side)
        t1 = rot1 * h1
        t2 = rot2 * h2
        raw = t1 + tau * t2
        cap = max(abs(t1), abs(t2), abs(raw))
        if abs(raw.imag) > 1e-6 * max(cap, 1e-300):
            raise RealityError(
                f"lower-portion combination not real at xi = {xi}: {raw}"
            )
        return raw.real
    _, h2 = block("pair3rd", xi, kappa, cut_side=side)
    raw = rot2.conjugate() * h2
    if abs(raw.imag) > 1e-6 * max(abs(raw), 1e-300):
        raise RealityError(f"lower-portion outside branch not real at xi = {xi}: {raw}")
    return raw.real * scale_out


@lru_cache(maxsize=64)
def _upper_junction_scale(kappa: float) -> float:
    tau, rot1, rot2, _ = _lower_data(kappa)
    _, h2i = block("pair3rd", 2.0, kappa, cut_side=+1)
    inside_j = (rot2 * h2i).real
    h1o, h2o = block("pair3rd", 2.0, kappa, cut_side=-1)
    outside_j = (rot1.conjugate() * h1o).real + tau * (rot2.conjugate() * h2o).real
    if inside_j == 0.0 or outside_j == 0.0:
        raise RealityError(f"degenerate upper-portion junction at kappa = {kappa}")
    return inside_j / outside_j


def _upper_block(kappa: float, xi: complex, inside: bool) -> float:
    """Upper-portion variant: the boundary-exponent assignment of the lower
    portion with the two regimes swapped (combination outside, pure 4-leg
    channel inside), mirrored through complex conjugation of the arcs."""
    tau, rot1, rot2, _ = _lower_data(kappa)
    side = +1 if inside else -1
    if inside:
        _, h2 = block("pair3rd", xi, kappa, cut_side=side)
        raw = rot2 * h2
        if abs(raw.imag) > 1e-6 * max(abs(raw), 1e-300):
            raise RealityError(f"upper-portion inside branch not real at xi = {xi}")
        return raw.real
    h1, h2 = block("pair3rd", xi, kappa, cut_side=side)
    t1 = rot1.conjugate() * h1
    t2 = rot2.conjugate() * h2
    raw = t1 + tau * t2
    cap = max(abs(t1), abs(t2), abs(raw))
    if abs(raw.imag) > 1e-6 * max(cap, 1e-300):
        raise RealityError(f"upper-portion combination not real at xi = {xi}")
    return raw.real * _upper_junction_scale(kappa)


# ---------------------------------------------------------------------------
# densities


def _check_bulk_point(L: float, z: complex) -> complex:
    z = complex(z)
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    if not z.imag > 0:
        raise DomainError(f"Im z must be positive, got {z}")
    return z


@lru_cache(maxsize=256)
def _norm_constant(name: str, kappa: float) -> float:
    """Structure-constant normalization where it exists; the densities are
    only defined up to proportionality, so kappa values where the constant
    has a genuine pole or negative radicand (dilute phase) fall back to a
    unit-normalized shape function."""
    try:
        return getattr(structure_constants(kappa), name)
    except (PoleError, DomainError):
        return 1.0


def density(kind: str, L: float, z: complex, kappa: float) -> float:
    """One anchored density at a bulk point.

    Cluster-based kinds (rho110, rho220, rho224) require 4 < kappa <= 8;
    the interface kinds (rho112, rho222_lower) accept any kappa in (0, 8].
    """
    z = _check_bulk_point(L, z)
    if kind not in DENSITY_VARIANTS:
        raise DomainError(f"unknown density kind {kind!r}")
    if not 0.0 < kappa <= 8.0:
        raise DomainError(f"kappa must lie in (0, 8], got {kappa}")
    if kind in ("rho110", "rho220", "rho224") and not kappa > 4.0:
        raise DomainError(f"{kind} requires the dense phase 4 < kappa <= 8")
    xi = cross_ratio(L, z)
    two_y = 2.0 * z.imag
    d21 = delta_21(kappa)
    d31 = delta_31(kappa)
    d_sigma = op_dimension("spin", 0, kappa)
    d_psi2 = op_dimension("bulk_leg", 2, kappa)
    d_psi4 = op_dimension("bulk_leg", 4, kappa)
    inside = abs(z) < 0.5 * L

    if kind == "rho110":
        g1, g2 = block("spin2nd", xi, kappa, cut_side=+1 if inside else -1)
        val = abs(g1) if inside else abs(g2)
        return val / (L ** (2.0 * d21) * two_y ** (2.0 * d_sigma))
    if kind == "rho112":
        (g,) = block("chordal2nd", xi, kappa, cut_side=+1 if inside else -1)
        c = _norm_constant("C_112", kappa)
        return c * abs(g) / (L ** (2.0 * d21) * two_y ** (2.0 * d_psi2))
    if kind == "rho220":
        (g,) = block("chordal2nd", xi, kappa, cut_side=+1 if inside else -1)
        c = _norm_constant("C_222", kappa)
        return c * abs(g) / (L ** (2.0 * d31) * two_y ** (2.0 * d_sigma))
    if kind == "rho224":
        (g,) = block("pivotal3rd", xi, kappa, cut_side=+1 if inside else -1)
        c = _norm_constant("C_224", kappa)
        return c * abs(g) / (L ** (2.0 * d31) * two_y ** (2.0 * d_psi4))
    # rho222_lower / rho222_upper
    if kind == "rho222_lower":
        val = _lower_block(kappa, xi, inside)
    else:
        val = _upper_block(kappa, xi, inside)
    c = _norm_constant("C_222", kappa)
    return c * abs(val) / (L ** (2.0 * d31) * two_y ** (2.0 * d_psi2))


def left_passage(z: complex, kappa: float) -> float:
    """Schramm's left-passage probability for the chordal curve from 0 to
    infinity; at kappa = 8 the Gamma-pole prefactor vanishes and the
    probability is identically 1/2."""
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"Im z must be positive, got {z}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    u = -z.real / z.imag
    coef = (
        math.gamma(4.0 / kappa)
        * complex(recip_gamma(4.0 / kappa - 0.5)).real
        / math.sqrt(math.pi)
    )
    val = 0.5 - coef * u * complex(hyp2f1(0.5, 4.0 / kappa, 1.5, -(u * u))).real
    return min(1.0, max(0.0, val))


def greens(z: complex, kappa: float) -> float:
    """Chordal SLE Green's function, normalized to 1 at z = i."""
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"Im z must be positive, got {z}")
    if not 0.0 < kappa < 8.0:
        raise DomainError(f"greens requires 0 < kappa < 8, got {kappa}")
    return z.imag ** ((kappa - 8.0) ** 2 / (8.0 * kappa)) * abs(z) ** (1.0 - 8.0 / kappa)


# ---------------------------------------------------------------------------
# grid sampling


@dataclass(frozen=True)
class DensityGrid:
    """Row-major rectangular sampling of one density over the upper
    half-plane, with its run manifest."""

    kind: str
    kappa: float
    L: float
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    nx: int
    ny: int
    values: np.ndarray
    manifest: dict = field(compare=False)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(self.x_range[0], self.x_range[1], self.nx)
        ys = np.linspace(self.y_range[0], self.y_range[1], self.ny)
        return xs, ys


def _worker_count() -> int:
    raw = os.environ.get("SLE_DENSITIES_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(8, os.cpu_count() or 1)
    return n


def grid_eval(
    kind: str, kappa: float, L: float, region, nx: int, ny: int
) -> DensityGrid:
    """Sample a density on nx * ny points of region = (xmin, xmax, ymin, ymax).

    Per-point domain failures are recorded as NaN cells with a count in the
    manifest.  Rows are distributed over worker threads; results are placed
    by index so the output is bitwise independent of the worker count.
    """
    xmin, xmax, ymin, ymax = (float(v) for v in region)
    if not (ymin > 0 and ymax >= ymin and xmax >= xmin):
        raise DomainError("region must satisfy xmax >= xmin, 0 < ymin <= ymax")
    if nx < 1 or ny < 1:
        raise DomainError("grid must have at least one point per axis")
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    values = np.empty((ny, nx), dtype=float)

    def fill_row(j: int) -> int:
        bad = 0
        y = ys[j]
        for i, x in enumerate(xs):
            try:
                values[j, i] = density(kind, L, complex(x, y), kappa)
            except (DomainError, RealityError, ValueError, OverflowError):
                values[j, i] = math.nan
                bad += 1
        return bad

    workers = _worker_count()
    if workers == 1 or ny == 1:
        nan_count = sum(fill_row(j) for j in range(ny))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nan_count = sum(pool.map(fill_row, range(ny)))
    manifest = {
        "schema": "sle-densities/v1",
        "kind": kind,
        "kappa": kappa,
        "L": L,
        "x_range": [xmin, xmax],
        "y_range": [ymin, ymax],
        "nx": nx,
        "ny": ny,
        "normalization": "boundary-OPE unit coefficient; greens(i)=1",
        "code_version": __version__,
        "nan_count": int(nan_count),
    }
    return DensityGrid(
        kind=kind,
        kappa=kappa,
        L=L,
        x_range=(xmin, xmax),
        y_range=(ymin, ymax),
        nx=nx,
        ny=ny,
        values=values,
        manifest=manifest,
    )
