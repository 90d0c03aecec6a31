"""Batch front end: config-driven subcommands with CSV/JSON output.

Subcommands
-----------
bands        band intervals and the discriminant curve on a window
dirichlet    Dirichlet spectrum of the edge problem on a window
sigma        rotation-number table on a gap subinterval
eigenvalues  point spectrum in the gaps of a window, with oracle gaps
oracle       both truncation oracles at a single lambda
report       full spectral report (JSON + all CSVs)

Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 domain violation.
Angles in the config are in turns; CSV phase/rotation columns are radians
(column names carry the unit).  Floats in CSV use the shortest round-trip
decimal; report JSON prints 17 significant digits with sorted keys, so
identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, config_to_dict, load_config
from .errors import (ArithmeticClashError, BranchViolationError, DirichletPointError,
                     GapViolationError, InsideSpectrumError, OutOfRangeError)
from .green import TorusGrid, default_grid
from .hill import DEFAULT_SCAN_STEP, discriminant, dirichlet_points, hill_bands
from .spectrum import (primed_params, spectral_report, truncated_full_matrix,
                       truncated_surface_matrix)
from .surface import sigma_table

DOMAIN_ERRORS = (GapViolationError, DirichletPointError, InsideSpectrumError,
                 BranchViolationError, ArithmeticClashError)
NUMERIC_ERRORS = (OutOfRangeError, FloatingPointError, RuntimeError)


# ---------------------------------------------------------------- output


def format_float(value: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(value))


def json_dumps_stable(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  {json.dumps(str(k))}: {json_dumps_stable(v, indent + 2).lstrip()}'
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        if not items:
            return pad + "{}"
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        items = [json_dumps_stable(v, indent + 2) for v in obj]
        if not items:
            return pad + "[]"
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if obj is None:
        return pad + "null"
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite float in JSON output")
        return pad + format(obj, ".17g")
    if isinstance(obj, int):
        return pad + str(obj)
    if isinstance(obj, str):
        return pad + json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path: Path, obj) -> None:
    path.write_bytes((json_dumps_stable(obj) + "\n").encode("utf-8"))


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else str(v)
                             for v in row])


def _outdir(config: RunConfig) -> Path:
    path = Path(config.output.directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(config: RunConfig, stem: str, header: list[str], rows: list[list],
          json_obj=None) -> None:
    out = _outdir(config)
    if "csv" in config.output.formats:
        write_csv(out / f"{stem}.csv", header, rows)
    if "json" in config.output.formats and json_obj is not None:
        write_json(out / f"{stem}.json", json_obj)


# ---------------------------------------------------------------- commands


def _eta_curve(config: RunConfig, window: tuple[float, float]) -> list[list]:
    lam_min, lam_max = window
    n_steps = max(2, int(math.ceil((lam_max - lam_min) / DEFAULT_SCAN_STEP)))
    rows = []
    for i in range(n_steps + 1):
        lam = lam_min + (lam_max - lam_min) * i / n_steps
        rows.append([lam, float(discriminant(config.potential, lam).real)])
    return rows


def cmd_bands(config: RunConfig, args) -> int:
    window = (args.min, args.max)
    bands = hill_bands(config.potential, window, root_tol=config.numerics.bisect_tol)
    rows = [[i, band.lo, band.hi] for i, band in enumerate(bands)]
    _emit(config, "bands", ["band_index", "lambda_lo", "lambda_hi"], rows,
          json_obj={"window": list(window), "bands": [[b.lo, b.hi] for b in bands]})
    curve = _eta_curve(config, window)
    _emit(config, "eta_curve", ["lambda", "eta"], curve,
          json_obj={"window": list(window), "eta_curve": curve})
    print(f"bands: {len(bands)} in [{window[0]}, {window[1]}]")
    return 0


def cmd_dirichlet(config: RunConfig, args) -> int:
    window = (args.min, args.max)
    points = dirichlet_points(config.potential, window, root_tol=config.numerics.bisect_tol)
    rows = [[i, lam] for i, lam in enumerate(points)]
    _emit(config, "dirichlet", ["index", "lambda"], rows,
          json_obj={"window": list(window), "dirichlet": points})
    print(f"dirichlet points: {len(points)} in [{window[0]}, {window[1]}]")
    return 0


def cmd_sigma(config: RunConfig, args) -> int:
    numerics = config.numerics
    quad = numerics.quad_points_per_axis
    model = config.model
    grid = TorusGrid(model.d2, quad) if quad else default_grid(model.d2)
    green_grid = TorusGrid(model.d1, quad) if quad else default_grid(model.d1)
    p = primed_params(model)
    try:
        table = sigma_table(p, config.potential, args.min, args.max, args.steps,
                            grid, green_grid)
    except ValueError as exc:
        print(f"domain violation: {exc}", file=sys.stderr)
        return 4
    lams, sigmas = table.lambdas, table.sigmas
    rows = []
    for i, (lam, sig) in enumerate(zip(lams, sigmas)):
        if i == 0:
            deriv = (sigmas[1] - sigmas[0]) / (lams[1] - lams[0])
        elif i == len(lams) - 1:
            deriv = (sigmas[-1] - sigmas[-2]) / (lams[-1] - lams[-2])
        else:
            deriv = (sigmas[i + 1] - sigmas[i - 1]) / (lams[i + 1] - lams[i - 1])
        rows.append([lam, sig, deriv])
    _emit(config, "sigma", ["lambda", "sigma_radians", "sigma_prime_fd"], rows,
          json_obj={"interval": [args.min, args.max],
                    "samples": [[r[0], r[1], r[2]] for r in rows]})
    print(f"sigma: {len(rows)} samples on [{args.min}, {args.max}]")
    return 0


def _eigenvalue_rows(report) -> tuple[list[str], list[list]]:
    d2 = report.params.d2
    box_sizes = list(report.numerics.box_sizes)
    header = [f"m{j+1}" for j in range(d2)] + ["target_phase_rad", "lambda", "residual",
                                               "status"]
    header += [f"oracle_gap_L{L}" for L in box_sizes]
    rows: list[list] = []
    for record in report.eigenvalues:
        row = list(record.m) + [record.target_phase, record.lam, record.residual, "ok"]
        row += [record.oracle_gaps.get(L, "") for L in box_sizes]
        rows.append(row)
    for m, target in report.unresolved:
        rows.append(list(m) + [target, "", "", "no_root"] + ["" for _ in box_sizes])
    return header, rows


def _report_json(config: RunConfig, report, window) -> dict:
    eta = _eta_curve(config, window)
    return {
        "config": config_to_dict(config),
        "window": list(window),
        "bands": [[b.lo, b.hi] for b in report.bands],
        "dirichlet": list(report.dirichlet),
        "gap_subintervals": [list(iv) for iv in report.gap_subintervals],
        "eta_curve": eta,
        "eigenvalues": [
            {
                "m": list(r.m),
                "target_phase_rad": r.target_phase,
                "lambda": r.lam,
                "residual": r.residual,
                "oracle_gaps": {str(L): v for L, v in r.oracle_gaps.items()},
            }
            for r in report.eigenvalues
        ],
        "unresolved": [{"m": list(m), "target_phase_rad": t} for m, t in report.unresolved],
    }


def cmd_eigenvalues(config: RunConfig, args) -> int:
    report = spectral_report(config.model, config.potential, (args.min, args.max),
                             numerics=config.numerics, threads=args.threads)
    header, rows = _eigenvalue_rows(report)
    _emit(config, "eigenvalues", header, rows,
          json_obj=_report_json(config, report, (args.min, args.max)))
    print(f"eigenvalues: {len(report.eigenvalues)} solved, "
          f"{len(report.unresolved)} targets without a root")
    return 0


def cmd_oracle(config: RunConfig, args) -> int:
    lam, box = args.lam, args.box
    model, q = config.model, config.potential
    quad = config.numerics.quad_points_per_axis
    grid = TorusGrid(model.d2, quad) if quad else default_grid(model.d2)
    green_grid = TorusGrid(model.d1, quad) if quad else default_grid(model.d1)
    eta = float(discriminant(q, lam).real)
    full_value = truncated_full_matrix(model, q, lam, box)
    in_band = abs(eta) <= 2.0
    surface_value = None
    if not in_band:
        _, surface_value = truncated_surface_matrix(model, q, lam, box, grid, green_grid)
    payload = {
        "lambda": lam,
        "box": box,
        "eta": eta,
        "in_band": in_band,
        "full_smallest_singular_value": full_value,
        "surface_smallest_abs_eigenvalue": surface_value,
    }
    write_json(_outdir(config) / "oracle.json", payload)
    surface_text = "n/a (inside band)" if surface_value is None else f"{surface_value:.6e}"
    print(f"oracle at lambda={lam}, box={box}: full={full_value:.6e} surface={surface_text}")
    return 0


def cmd_report(config: RunConfig, args) -> int:
    window = (args.min, args.max)
    report = spectral_report(config.model, config.potential, window,
                             numerics=config.numerics, threads=args.threads)
    out = _outdir(config)
    write_json(out / "report.json", _report_json(config, report, window))
    write_csv(out / "bands.csv", ["band_index", "lambda_lo", "lambda_hi"],
              [[i, b.lo, b.hi] for i, b in enumerate(report.bands)])
    write_csv(out / "eta_curve.csv", ["lambda", "eta"], _eta_curve(config, window))
    write_csv(out / "dirichlet.csv", ["index", "lambda"],
              [[i, lam] for i, lam in enumerate(report.dirichlet)])
    header, rows = _eigenvalue_rows(report)
    write_csv(out / "eigenvalues.csv", header, rows)
    print(f"report: {len(report.bands)} bands, {len(report.eigenvalues)} eigenvalues, "
          f"{len(report.unresolved)} unresolved targets -> {out}")
    return 0


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgmaryland",
        description="Spectra of quasiperiodic surface Maryland models on Z^d "
                    "quantum lattice graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", help="path to the TOML run configuration")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent target solves (default 1)")

    p_bands = sub.add_parser("bands", help="Hill bands and discriminant curve")
    add_common(p_bands)
    p_bands.add_argument("--min", type=float, required=True, help="window lower end")
    p_bands.add_argument("--max", type=float, required=True, help="window upper end")
    p_bands.set_defaults(func=cmd_bands)

    p_dir = sub.add_parser("dirichlet", help="Dirichlet spectrum of the edge problem")
    add_common(p_dir)
    p_dir.add_argument("--min", type=float, required=True)
    p_dir.add_argument("--max", type=float, required=True)
    p_dir.set_defaults(func=cmd_dirichlet)

    p_sigma = sub.add_parser("sigma", help="rotation-number table on a gap interval")
    add_common(p_sigma)
    p_sigma.add_argument("--min", type=float, required=True)
    p_sigma.add_argument("--max", type=float, required=True)
    p_sigma.add_argument("--steps", type=int, default=50, help="number of subintervals")
    p_sigma.set_defaults(func=cmd_sigma)

    p_eig = sub.add_parser("eigenvalues", help="point spectrum in the window's gaps")
    add_common(p_eig)
    p_eig.add_argument("--min", type=float, required=True)
    p_eig.add_argument("--max", type=float, required=True)
    p_eig.set_defaults(func=cmd_eigenvalues)

    p_oracle = sub.add_parser("oracle", help="truncation oracles at one lambda")
    add_common(p_oracle)
    p_oracle.add_argument("--lambda", dest="lam", type=float, required=True,
                          help="spectral parameter")
    p_oracle.add_argument("--box", type=int, default=20, help="box radius L")
    p_oracle.set_defaults(func=cmd_oracle)

    p_report = sub.add_parser("report", help="full spectral report")
    add_common(p_report)
    p_report.add_argument("--min", type=float, required=True)
    p_report.add_argument("--max", type=float, required=True)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(config, args)
    except DOMAIN_ERRORS as exc:
        print(f"domain violation ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 4
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
