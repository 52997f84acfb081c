"""Command-line interface: evaluate constants and densities, emit grids,
run the verification suite, and run Monte Carlo comparisons, writing
deterministic CSV/JSON artifacts.

Exit codes: 0 success, 1 usage error, 2 domain/pole error, 3 verification
failure.  Errors are printed as single-line JSON diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .densities import (
    DENSITY_KINDS,
    DensityGrid,
    cross_ratio,
    density,
    greens,
    grid_eval,
    left_passage,
)
from .errors import SleDensitiesError
from .lattice_mc import McConfig, McEstimate, fit_shape, sample_connectivity, trace_interface_lpp
from .solutions import structure_constants

_SCHEMA = "sle-densities/v1"


def _parse_z(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from exc


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def _write_manifest(path: Path, command: str, parameters: dict, outputs, status="ok",
                    error_count=0) -> None:
    manifest = {
        "schema": _SCHEMA,
        "command": command,
        "parameters": parameters,
        "code_version": __version__,
        "outputs": [str(p) for p in outputs],
        "status": status,
        "error_count": int(error_count),
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")


def write_grid(grid: DensityGrid, path) -> None:
    """CSV with a schema-tagged header and x,y,value rows (row-major, 17
    significant digits), plus a sibling manifest file."""
    path = Path(path)
    xs, ys = grid.axes()
    lines = [f"# {_SCHEMA} kind={grid.kind} kappa={_fmt(grid.kappa)} L={_fmt(grid.L)}"]
    for j in range(grid.ny):
        for i in range(grid.nx):
            lines.append(f"{_fmt(xs[i])},{_fmt(ys[j])},{_fmt(grid.values[j, i])}")
    path.write_text("\n".join(lines) + "\n")
    _write_manifest(
        path.with_name(path.name + ".manifest.json"),
        "grid",
        grid.manifest,
        [path],
        status="ok" if grid.manifest.get("nan_count", 0) == 0 else "failed",
        error_count=grid.manifest.get("nan_count", 0),
    )


def read_grid(path) -> DensityGrid:
    """Parse a grid CSV back into a DensityGrid (inverse of write_grid)."""
    path = Path(path)
    lines = path.read_text().strip().split("\n")
    header = lines[0]
    if not header.startswith(f"# {_SCHEMA} "):
        raise SleDensitiesError(f"{path} does not carry the {_SCHEMA} header")
    fields = dict(part.split("=", 1) for part in header[2:].split()[1:])
    rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]]
    xs = sorted({r[0] for r in rows})
    ys = sorted({r[1] for r in rows})
    nx, ny = len(xs), len(ys)
    if nx * ny != len(rows):
        raise SleDensitiesError(f"{path} is not a rectangular grid")
    values = np.array([r[2] for r in rows]).reshape(ny, nx)
    return DensityGrid(
        kind=fields["kind"],
        kappa=float(fields["kappa"]),
        L=float(fields["L"]),
        x_range=(xs[0], xs[-1]),
        y_range=(ys[0], ys[-1]),
        nx=nx,
        ny=ny,
        values=values,
        manifest={"schema": _SCHEMA, "kind": fields["kind"],
                  "kappa": float(fields["kappa"]), "L": float(fields["L"])},
    )


# ---------------------------------------------------------------------------
# verification suite


def _verify_checks(kappa: float):
    """Yield (name, callable) pairs; each callable raises AssertionError on
    failure."""
    from . import solutions
    from .solutions import residual_suite

    def check_geometry():
        rng = np.random.default_rng(2024)
        for _ in range(10_000):
            L = float(rng.uniform(0.1, 5.0))
            z = complex(rng.uniform(-5, 5), rng.uniform(1e-3, 5.0))
            xi = cross_ratio(L, z)
            assert abs(abs(1.0 - xi) - 1.0) < 1e-13
            q = xi * xi / (1.0 - xi)
            assert abs(q.imag) < 1e-13 * max(1.0, abs(q))
            assert q.real <= 1e-13

    def check_residuals():
        for fam, xi, idx, res in residual_suite(kappa):
            assert res < 1e-7, f"{fam}[{idx}] residual {res:.2e} at {xi}"

    def check_crossing():
        const, dev = solutions.second_order_crossing_check(kappa)
        ref = solutions.cst1(kappa)
        assert abs(const - ref) < 1e-8, f"cst1 mismatch {const} vs {ref}"
        assert dev < 1e-8
        slope, d1_fit, exp1 = solutions.third_order_crossing_check(kappa)
        data = solutions.third_order_crossing(kappa)
        assert abs(slope - exp1) < 1e-3
        assert abs(d1_fit - data.d1) < 1e-6

    def check_exponents():
        for kind, x, expo in _ladder_cases(kappa):
            got = _ladder_fit(kind, kappa, x)
            assert abs(got - expo) < 1e-3, f"{kind} at x={x}: {got} vs {expo}"

    def check_constants6():
        sc = structure_constants(6.0)
        for got, want in ((sc.C_112, 0.752361), (sc.C_222, 1.02993), (sc.C_224, 0.56785)):
            assert abs(got - want) < 1e-5

    return [
        ("geometry-invariants", check_geometry),
        ("ode-residuals", check_residuals),
        ("crossing-checks", check_crossing),
        ("boundary-exponents", check_exponents),
        ("kappa6-constants", check_constants6),
    ]


def _ladder_cases(kappa: float):
    from .params import delta_31, delta_51, op_dimension

    dsig = op_dimension("spin", 0, kappa)
    d10 = op_dimension("bulk_leg", 2, kappa)
    d20 = op_dimension("bulk_leg", 4, kappa)
    d31 = delta_31(kappa)
    d51 = delta_51(kappa)
    cases = [
        ("rho112", 0.2, d31 - 2 * d10),
        ("rho222_lower", 0.2, d31 - 2 * d10),
        ("rho222_lower", 0.9, d51 - 2 * d10),
    ]
    if kappa > 4.0:
        cases += [
            ("rho110", 0.2, -2 * dsig),
            ("rho110", 0.9, d31 - 2 * dsig),
            ("rho220", 0.9, d31 - 2 * dsig),
            ("rho224", 0.2, d51 - 2 * d20),
        ]
    return cases


def _ladder_fit(kind: str, kappa: float, x: float, L: float = 1.0) -> float:
    """Boundary exponent from a y-ladder fit; an extra y regressor absorbs
    the leading regular correction of the solution blocks."""
    ys = np.array([10.0 ** (-e) for e in np.linspace(2.5, 5.0, 7)])
    vals = np.array([density(kind, L, complex(x, y), kappa) for y in ys])
    design = np.column_stack([np.ones_like(ys), np.log(ys), ys])
    coef, *_ = np.linalg.lstsq(design, np.log(vals), rcond=None)
    return float(coef[1])


# ---------------------------------------------------------------------------
# subcommands


def _cmd_constants(args) -> int:
    sc = structure_constants(args.kappa)
    _emit(
        {
            "schema": _SCHEMA,
            "kappa": args.kappa,
            "C_110": sc.C_110,
            "C_112": sc.C_112,
            "C_222": sc.C_222,
            "C_224": sc.C_224,
        }
    )
    return 0


def _cmd_density(args) -> int:
    val = density(args.kind, args.L, args.z, args.kappa)
    _emit({"schema": _SCHEMA, "kind": args.kind, "kappa": args.kappa,
           "L": args.L, "z": [args.z.real, args.z.imag], "value": val})
    return 0


def _cmd_grid(args) -> int:
    grid = grid_eval(
        args.kind, args.kappa, args.L,
        (args.xmin, args.xmax, args.ymin, args.ymax), args.nx, args.ny,
    )
    write_grid(grid, args.out)
    _emit({"schema": _SCHEMA, "written": str(args.out),
           "nan_count": grid.manifest["nan_count"]})
    return 0 if grid.manifest["nan_count"] == 0 else 2


def _cmd_lpp(args) -> int:
    _emit({"schema": _SCHEMA, "kappa": args.kappa,
           "z": [args.z.real, args.z.imag], "value": left_passage(args.z, args.kappa)})
    return 0


def _cmd_greens(args) -> int:
    _emit({"schema": _SCHEMA, "kappa": args.kappa,
           "z": [args.z.real, args.z.imag], "value": greens(args.z, args.kappa)})
    return 0


def _cmd_verify(args) -> int:
    from .errors import ResonanceError

    failures = []
    for name, run in _verify_checks(args.kappa):
        try:
            run()
        except AssertionError as exc:
            print(f"FAIL {name}: {exc}")
            failures.append(name)
        except ResonanceError as exc:
            # integer indicial gaps (e.g. kappa = 6) have no Frobenius
            # transport by design; the closed forms are still residual-checked
            print(f"skip {name}: resonant kappa ({exc})")
        except SleDensitiesError as exc:
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
            failures.append(name)
        else:
            print(f"ok   {name}")
    if failures:
        _emit({"schema": _SCHEMA, "status": "failed", "failing_checks": failures})
        return 3
    _emit({"schema": _SCHEMA, "status": "ok", "kappa": args.kappa})
    return 0


def _default_lpp_probes(config: McConfig):
    a = config.spacing
    radius = min(0.5 * config.box_width * a,
                 config.box_height * a * math.sqrt(3.0) / 2.0)
    r = radius / 8.25
    return [r * cmath.exp(1j * math.pi / 4), r * 1j, r * cmath.exp(3j * math.pi / 4)]


def _default_connectivity_probes(L: float):
    return [
        complex(x * L, y * L)
        for y in (0.2, 0.35, 0.5, 0.65, 0.8)
        for x in (-0.6, -0.3, 0.0, 0.3, 0.6)
    ]


def _cmd_mc(args) -> int:
    width, height = args.box
    if args.mode == "connectivity":
        spacing = args.L * 4.0 / width
        config = McConfig(
            box_width=width, box_height=height, spacing=spacing,
            wired_interval=(-args.L / 2.0, args.L / 2.0),
            seed=args.seed, n_samples=args.samples,
        )
        probes = args.probe or _default_connectivity_probes(args.L)
        est = sample_connectivity(config, probes)
    else:
        config = McConfig(
            box_width=width, box_height=height, spacing=1.0,
            wired_interval=(-1.0, 1.0), seed=args.seed, n_samples=args.samples,
        )
        probes = args.probe or _default_lpp_probes(config)
        est = trace_interface_lpp(config, probes)
    payload = est.to_dict()
    payload["mode"] = args.mode
    payload["kappa"] = 6.0
    payload["L"] = args.L
    payload["box"] = [width, height]
    out = Path(args.out)
    out.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        f"mc {args.mode}",
        {"seed": args.seed, "samples": args.samples, "box": [width, height],
         "L": args.L, "mode": args.mode},
        [out],
    )
    _emit({"schema": _SCHEMA, "written": str(out), "means": payload["means"]})
    return 0


def _cmd_compare(args) -> int:
    payload = json.loads(Path(args.mc).read_text())
    probes = [complex(p[0], p[1]) for p in payload["probes"]]
    est = McEstimate(
        probes=tuple(probes),
        means=np.asarray(payload["means"]),
        std_errors=np.asarray(payload["std_errors"]),
        n_samples=payload["n_samples"],
        seed=payload["seed"],
    )
    kappa = payload.get("kappa", args.kappa)
    L = payload.get("L", args.L)
    if args.kind == "lpp":
        formula = [left_passage(z, kappa) for z in probes]
    else:
        formula = [density(args.kind, L, z, kappa) for z in probes]
    constant, rms = fit_shape(est, formula)
    _emit({"schema": _SCHEMA, "kind": args.kind, "kappa": kappa, "L": L,
           "constant": constant, "rms_rel_error": rms})
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sle-densities",
        description="Anchored-cluster densities and SLE observables",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="structure constants at one kappa")
    p.add_argument("--kappa", type=float, required=True)
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("density", help="evaluate one density at one point")
    p.add_argument("--kind", choices=DENSITY_KINDS, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--z", type=_parse_z, required=True, metavar="RE,IM")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("grid", help="sample a density on a grid, write CSV")
    p.add_argument("--kind", choices=DENSITY_KINDS, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--ymin", type=float, required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("lpp", help="Schramm left-passage probability")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--z", type=_parse_z, required=True, metavar="RE,IM")
    p.set_defaults(func=_cmd_lpp)

    p = sub.add_parser("greens", help="chordal Green's function")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--z", type=_parse_z, required=True, metavar="RE,IM")
    p.set_defaults(func=_cmd_greens)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--kappa", type=float, default=5.3)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("mc", help="run a Monte Carlo estimate")
    p.add_argument("mode", choices=("connectivity", "lpp"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--box", type=int, nargs=2, required=True, metavar=("W", "H"))
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--probe", type=_parse_z, action="append", metavar="RE,IM")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("compare", help="fit a Monte Carlo estimate to a formula")
    p.add_argument("--mc", required=True)
    p.add_argument("--kind", required=True, choices=DENSITY_KINDS + ("lpp",))
    p.add_argument("--kappa", type=float, default=6.0)
    p.add_argument("--L", type=float, default=1.0)
    p.set_defaults(func=_cmd_compare)
    return parser


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except SleDensitiesError as exc:
        print(
            json.dumps({"schema": _SCHEMA, "error": type(exc).__name__,
                        "message": str(exc)}, sort_keys=True),
            file=sys.stderr,
        )
        return 2
    except OSError as exc:
        print(
            json.dumps({"schema": _SCHEMA, "error": "io", "message": str(exc)},
                       sort_keys=True),
            file=sys.stderr,
        )
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
