import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sle_densities import densities as D
from sle_densities.errors import DomainError
from sle_densities.params import delta_21, delta_31, delta_51, op_dimension


def test_cross_ratio_center_point():
    for L in (0.5, 1.0, 3.7):
        assert D.cross_ratio(L, 0.5j * L) == pytest.approx(2.0, abs=1e-14)


def test_cross_ratio_boundary_limit():
    xi = D.cross_ratio(1.0, complex(0.2, 1e-9))
    assert abs(xi) < 1e-7


def test_cross_ratio_domain():
    with pytest.raises(DomainError):
        D.cross_ratio(1.0, complex(0.2, -0.1))
    with pytest.raises(DomainError):
        D.cross_ratio(-1.0, 0.5j)


@given(
    st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=-5.0, max_value=5.0),
    st.floats(min_value=1e-3, max_value=5.0),
)
@settings(max_examples=500, deadline=None)
def test_cross_ratio_invariants(L, x, y):
    xi = D.cross_ratio(L, complex(x, y))
    assert abs(abs(1.0 - xi) - 1.0) < 1e-13
    q = xi * xi / (1.0 - xi)
    assert abs(q.imag) <= 1e-13 * max(1.0, abs(q))
    assert q.real <= 1e-13


def test_rho110_unit_at_center():
    assert D.density("rho110", 1.0, 0.5j, 6.0) == pytest.approx(1.0, rel=1e-13)


def test_rho112_center_value():
    sc = 0.752360738185585878097235605823  # C_112 at kappa = 6 (exact form)
    want = sc * 4.0 ** (1.0 / 6.0)
    got = D.density("rho112", 1.0, 0.5j, 6.0)
    assert got == pytest.approx(want, rel=1e-6)
    assert got == pytest.approx(0.94791, abs=1e-5)


@pytest.mark.parametrize("kind", D.DENSITY_KINDS)
def test_density_homogeneity(kind):
    kappa = 6.0
    d_bdry = 2 * delta_21(kappa) if kind in ("rho110", "rho112") else 2 * delta_31(kappa)
    d_bulk = {
        "rho110": op_dimension("spin", 0, kappa),
        "rho220": op_dimension("spin", 0, kappa),
        "rho112": op_dimension("bulk_leg", 2, kappa),
        "rho222_lower": op_dimension("bulk_leg", 2, kappa),
        "rho224": op_dimension("bulk_leg", 4, kappa),
    }[kind]
    lam = 2.31
    z = complex(0.3, 0.55)
    a = D.density(kind, lam * 1.0, lam * z, kappa)
    b = D.density(kind, 1.0, z, kappa)
    assert a == pytest.approx(lam ** (-(d_bdry + 2 * d_bulk)) * b, rel=1e-10)


def test_density_reflection_symmetry():
    for kind in D.DENSITY_KINDS:
        for z in (complex(0.4, 0.3), complex(1.2, 0.8)):
            a = D.density(kind, 1.0, z, 6.0)
            b = D.density(kind, 1.0, complex(-z.real, z.imag), 6.0)
            assert a == pytest.approx(b, rel=1e-11)


def test_density_regime_errors():
    with pytest.raises(DomainError):
        D.density("rho110", 1.0, 0.5j, 3.0)  # cluster density needs kappa > 4
    with pytest.raises(DomainError):
        D.density("rho110", 1.0, complex(0.5, 0.0), 6.0)  # boundary point
    with pytest.raises(DomainError):
        D.density("nope", 1.0, 0.5j, 6.0)


def test_rho110_reduces_to_z_space_form():
    """The xi-space assembly must equal the printed z-space percolation
    density (with the corrected -4L^2(z^2+zbar^2) middle term)."""

    def z_space(L, z, kappa):
        d21 = delta_21(kappa)
        dsig = op_dimension("spin", 0, kappa)
        d31 = delta_31(kappa)
        A = L * L - 4.0 * abs(z) ** 2
        B = L**4 - 4.0 * L * L * (z * z + (z.conjugate()) ** 2).real + 16.0 * abs(z) ** 4
        return (1.0 + A / math.sqrt(B)) ** (d31 / 2.0) / (
            L ** (2 * d21) * (2 * z.imag) ** (2 * dsig)
        )

    rng = np.random.default_rng(12)
    for _ in range(100):
        L = float(rng.uniform(0.2, 3.0))
        z = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3.0))
        a = D.density("rho110", L, z, 6.0)
        b = z_space(L, z, 6.0)
        assert a == pytest.approx(b, rel=1e-12)


def test_densities_nonnegative_and_finite():
    rng = np.random.default_rng(13)
    cases = [(k, 6.0) for k in D.DENSITY_KINDS] + [
        ("rho112", 8.0 / 3.0),
        ("rho222_lower", 8.0 / 3.0),
    ]
    for kind, kappa in cases:
        for _ in range(2000):
            L = float(rng.uniform(0.3, 2.0))
            z = complex(rng.uniform(-3, 3), rng.uniform(0.02, 3.0))
            v = D.density(kind, L, z, kappa)
            assert math.isfinite(v) and v >= 0.0


@pytest.mark.parametrize("kappa", [8.0 / 3.0, 6.0])
def test_rho222_lower_c1_matching(kappa):
    """Continuity and one-sided-derivative matching across |z| = L/2."""
    L = 1.0
    eps = 1e-9
    h = 2.5e-4
    for th in np.linspace(0.2, math.pi - 0.2, 7):
        ray = cmath.exp(1j * th)

        def f(r):
            return D.density("rho222_lower", L, r * ray, kappa)

        gap = abs(f(0.5 - eps) - f(0.5 + eps)) / abs(f(0.5 + eps))
        assert gap < 1e-6
        din = (3 * f(0.5 - eps) - 4 * f(0.5 - eps - h) + f(0.5 - eps - 2 * h)) / (2 * h)
        dout = -(3 * f(0.5 + eps) - 4 * f(0.5 + eps + h) + f(0.5 + eps + 2 * h)) / (2 * h)
        assert abs(din - dout) / max(abs(dout), 1e-12) < 1e-5


@pytest.mark.parametrize("kappa", [8.0 / 3.0, 6.0])
def test_rho222_lower_reality_residue(kappa):
    """The raw combination before taking the real part must be real to
    better than 1e-9 relative (the configured sheet is correct)."""
    from sle_densities.densities import _lower_data
    from sle_densities.solutions import block

    tau, rot1, rot2, _ = _lower_data(kappa)
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(300):
        z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 2.0))
        xi = D.cross_ratio(1.0, z)
        if abs(z) < 0.5:
            h1, h2 = block("pair3rd", xi, kappa, cut_side=+1)
            raw = rot1 * h1 + tau * rot2 * h2
            scale = max(abs(rot1 * h1), abs(tau * rot2 * h2))
        else:
            _, h2 = block("pair3rd", xi, kappa, cut_side=-1)
            raw = rot2.conjugate() * h2
            scale = abs(raw)
        worst = max(worst, abs(raw.imag) / max(scale, 1e-300))
    assert worst < 1e-9


def test_rho222_upper_variant_flips_exponents():
    """The upper-portion variant swaps the boundary-exponent assignment and
    stays continuous across |z| = L/2."""
    kappa = 6.0
    d10 = op_dimension("bulk_leg", 2, kappa)
    d31 = delta_31(kappa)
    d51 = delta_51(kappa)
    ys = np.array([10.0 ** (-e) for e in np.linspace(2.5, 5.0, 7)])
    design = np.column_stack([np.ones_like(ys), np.log(ys), ys])
    for x, expo in ((0.2, d51 - 2 * d10), (0.9, d31 - 2 * d10)):
        vals = np.array([D.density("rho222_upper", 1.0, complex(x, y), kappa) for y in ys])
        coef, *_ = np.linalg.lstsq(design, np.log(vals), rcond=None)
        assert abs(coef[1] - expo) < 1e-3
    eps = 1e-7
    for th in (0.5, 1.6, 2.6):
        ray = cmath.exp(1j * th)
        a = D.density("rho222_upper", 1.0, (0.5 - eps) * ray, kappa)
        b = D.density("rho222_upper", 1.0, (0.5 + eps) * ray, kappa)
        assert a == pytest.approx(b, rel=1e-5)


def test_left_passage_axis_and_boundary_limits():
    for kappa in (3.0, 4.0, 6.0, 7.5):
        for y in (0.3, 1.0, 4.0):
            assert D.left_passage(complex(0.0, y), kappa) == pytest.approx(0.5, abs=1e-14)
    # boundary limits: G -> 1 (x > 0) and 0 (x < 0) as power laws with the
    # 2-leg exponent, gap ~ (y/|x|)^{d31}
    d31 = delta_31(6.0)
    gaps_pos = [1.0 - D.left_passage(complex(1.0, y), 6.0) for y in (1e-2, 1e-4, 1e-6)]
    gaps_neg = [D.left_passage(complex(-1.0, y), 6.0) for y in (1e-2, 1e-4, 1e-6)]
    for gaps in (gaps_pos, gaps_neg):
        assert gaps[0] > gaps[1] > gaps[2] > 0
        assert gaps[1] / gaps[0] == pytest.approx(1e-2**d31, rel=1e-2)
        assert gaps[2] / gaps[1] == pytest.approx(1e-2**d31, rel=1e-2)


def test_left_passage_kappa4_closed_form():
    rng = np.random.default_rng(15)
    for _ in range(100):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3.0))
        want = 1.0 - cmath.phase(z) / math.pi
        assert D.left_passage(z, 4.0) == pytest.approx(want, abs=1e-12)


def test_left_passage_kappa8_is_half():
    for z in (complex(0.7, 0.2), complex(-2.0, 1.0)):
        assert D.left_passage(z, 8.0) == pytest.approx(0.5, abs=1e-14)


def test_left_passage_in_unit_interval():
    rng = np.random.default_rng(16)
    for _ in range(500):
        z = complex(rng.uniform(-10, 10), rng.uniform(1e-3, 5.0))
        kappa = float(rng.uniform(1.0, 8.0))
        v = D.left_passage(z, kappa)
        assert 0.0 <= v <= 1.0


def test_greens_normalization_and_scaling():
    for kappa in (3.0, 6.0, 7.9):
        assert D.greens(1j, kappa) == 1.0
        z = complex(0.4, 0.9)
        lam = 2.7
        assert D.greens(lam * z, kappa) / D.greens(z, kappa) == pytest.approx(
            lam ** (kappa / 8.0 - 1.0), rel=1e-12
        )


def test_greens_percolation_exponents():
    ys = np.logspace(-2, 1, 8)
    vals = np.array([D.greens(complex(0, y), 6.0) for y in ys])
    s, _ = np.polyfit(np.log(ys), np.log(vals), 1)
    assert s == pytest.approx(1.0 / 12.0 + (1.0 - 8.0 / 6.0), abs=1e-10)
    rs = np.logspace(-2, 1, 8)
    ray = cmath.exp(1j * math.pi / 4)
    vals = np.array([D.greens(r * ray, 6.0) for r in rs])
    s, _ = np.polyfit(np.log(rs), np.log(vals), 1)
    assert s == pytest.approx(6.0 / 8.0 - 1.0, abs=1e-10)


def test_greens_domain():
    with pytest.raises(DomainError):
        D.greens(1j, 8.0)
    with pytest.raises(DomainError):
        D.greens(complex(1.0, -0.5), 6.0)


def test_grid_eval_basics():
    grid = D.grid_eval("rho110", 6.0, 1.0, (-2, 2, 0.05, 2), 40, 30)
    assert grid.values.shape == (30, 40)
    assert grid.manifest["nan_count"] == 0
    assert np.all(np.isfinite(grid.values))
    assert np.all(grid.values >= 0)
    # maxima hug the wired interval
    j, i = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    xs, ys = grid.axes()
    assert abs(xs[i]) < 0.5
    assert ys[j] == ys[0]


def test_grid_symmetric_region_is_symmetric():
    for kind in D.DENSITY_KINDS:
        grid = D.grid_eval(kind, 6.0, 1.0, (-1.5, 1.5, 0.1, 1.2), 21, 8)
        assert np.allclose(grid.values, grid.values[:, ::-1], rtol=1e-10)


def test_single_cell_grid_matches_direct_call():
    grid = D.grid_eval("rho112", 6.0, 1.0, (0.3, 0.3, 0.7, 0.7), 1, 1)
    assert grid.values[0, 0] == D.density("rho112", 1.0, complex(0.3, 0.7), 6.0)


def test_grid_records_per_point_failures_as_nan(monkeypatch):
    real_density = D.density

    def flaky(kind, L, z, kappa):
        if abs(z - complex(0.5, 0.55)) < 1e-9:
            raise DomainError("synthetic per-point failure")
        return real_density(kind, L, z, kappa)

    monkeypatch.setattr(D, "density", flaky)
    grid = D.grid_eval("rho110", 6.0, 1.0, (0.0, 1.0, 0.05, 0.55), 3, 2)
    assert grid.manifest["nan_count"] == 1
    assert np.isnan(grid.values[1, 1])
    assert np.isfinite(grid.values).sum() == 5


def test_grid_worker_count_invariance(monkeypatch):
    monkeypatch.setenv("SLE_DENSITIES_THREADS", "1")
    g1 = D.grid_eval("rho220", 6.0, 1.0, (-1, 1, 0.2, 1.0), 16, 12)
    monkeypatch.setenv("SLE_DENSITIES_THREADS", "7")
    g7 = D.grid_eval("rho220", 6.0, 1.0, (-1, 1, 0.2, 1.0), 16, 12)
    assert np.array_equal(g1.values, g7.values)
