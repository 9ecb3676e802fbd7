"""Command-line surface.

Subcommands: scan, point, lattice-check, ed, validate, render.
Exit codes: 0 success, 1 configuration error, 2 validation failure.
All file output is UTF-8; CSV/JSON/SVG bytes are deterministic for a fixed
configuration regardless of the worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .errors import ConfigError, EmsymError
from .scan import (
    ScanConfig,
    emit_csv,
    emit_json,
    load_config,
    load_dataset_json,
    run_scan,
)


def _parse_axis(text: str, position: int) -> dict:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError("axis override must look like name:min:max:steps",
                          path=(f"axis{position}",))
    name, lo, hi, steps = parts
    try:
        return {"name": name, "min": float(lo), "max": float(hi), "steps": int(steps)}
    except ValueError as err:
        raise ConfigError(str(err), path=(f"axis{position}",)) from None


def _config_from_args(args) -> ScanConfig:
    if args.config:
        raw = load_config(args.config).to_dict()
    else:
        raw = {"model": args.model or "dicke", "axes": []}
    if args.model:
        raw["model"] = args.model
    if args.axis1:
        axes = raw.get("axes") or [None, None]
        axes = list(axes) + [None] * (2 - len(axes))
        axes[0] = _parse_axis(args.axis1, 1)
        raw["axes"] = [a for a in axes if a]
    if args.axis2:
        axes = list(raw.get("axes") or [])
        if not axes:
            raise ConfigError("--axis2 given without a first axis", path=("axes",))
        axes = axes[:1] + [_parse_axis(args.axis2, 2)]
        raw["axes"] = axes
    if args.threads:
        raw["workers"] = args.threads
    if args.param:
        params = dict(raw.get("params", {}))
        for item in args.param:
            if "=" not in item:
                raise ConfigError("-p expects name=value", path=("params",))
            key, val = item.split("=", 1)
            params[key] = json.loads(val)
        raw["params"] = params
    if not raw.get("axes"):
        raise ConfigError("no axes configured (use --config or --axis1)", path=("axes",))
    return ScanConfig.from_dict(raw)


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_scan(args) -> int:
    config = _config_from_args(args)
    dataset = run_scan(config)
    fmt = args.format
    out = args.out or config.output.get(fmt)
    if fmt == "csv":
        text = emit_csv(dataset)
    elif fmt == "json":
        text = emit_json(dataset)
    else:
        from .render import RenderStyle, render_dataset
        text = render_dataset(dataset, RenderStyle(log_scale=args.log_scale))
    if out:
        _write(out, text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)
    render_path = args.render or config.output.get("svg") if fmt != "svg" else args.render
    if render_path:
        from .render import RenderStyle, render_dataset
        _write(render_path, render_dataset(dataset, RenderStyle(log_scale=args.log_scale)))
        print(f"wrote {render_path}")
    return 0


def cmd_point(args) -> int:
    from .scan import _evaluate_cell, _DEFAULT_PARAMS

    model = args.model or "dicke"
    params = dict(_DEFAULT_PARAMS[model])
    for item in args.param or []:
        key, val = item.split("=", 1)
        params[key] = json.loads(val)
    geometry = json.loads(args.geometry) if args.geometry else None
    record = _evaluate_cell((model, params,
                             {"boundary": 1e-9, "symmetry": 1e-9}, None, geometry))
    payload = {
        "model": model,
        "params": params,
        "entropy_bits": record.entropy_bits,
        "phase": record.phase,
        "symmetry": record.symmetry,
        "boundary": record.boundary,
        "gap": record.gap,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_lattice_check(args) -> int:
    from .dicke import DickeParams
    from .lattice import (
        LatticeParams,
        critical_coupling,
        factorization_residual,
        verify_uniform_minimum,
    )
    from .scan import build_geometry

    geometry = build_geometry(json.loads(args.geometry))
    dp = DickeParams.from_couplings(args.omega0, args.omega_spin, args.g_plus, args.g_minus)
    params = LatticeParams(dp, args.hop_j, geometry)
    report = verify_uniform_minimum(params, n_starts=args.starts)
    payload = {
        "critical_coupling": critical_coupling(params),
        "factorization_residual": factorization_residual(params),
        "uniform_energy": report.uniform_energy,
        "best_nonuniform_energy": report.best_nonuniform_energy,
        "max_site_spread": report.max_site_spread,
        "n_starts": report.n_starts,
        "uniform_is_minimum": report.best_nonuniform_energy >= report.uniform_energy - 1e-8,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_ed(args) -> int:
    from . import ed
    from .dicke import DickeParams
    from .lmg import LmgParams

    if args.model == "dicke":
        params = DickeParams.from_couplings(args.omega0, args.omega_spin,
                                            args.g_plus, args.g_minus)
        result = ed.dicke_ed(params, args.n_atoms, args.cutoff,
                             compute_fidelity=not args.no_fidelity)
    elif args.model == "lmg":
        params = LmgParams(args.field_h, args.gamma_x, args.gamma_y)
        result = ed.lmg_ed(params, args.n_spins,
                           compute_fidelity=not args.no_fidelity)
    else:
        raise ConfigError(f"unknown ed model {args.model!r}", path=("model",))
    payload = {
        "model": result.model,
        "ground_energy": result.ground_energy,
        "entropy_bits": result.entropy_bits,
        "product_fidelity": None if math.isnan(result.product_fidelity)
        else result.product_fidelity,
        "converged": result.converged,
        "cutoff_used": result.cutoff_used,
        "parity_gap": result.parity_gap,
        "excitation_gap": result.excitation_gap,
        "branch_used": result.branch_used,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_validate(args) -> int:
    from .validation import run_validation_suite

    selection = args.only.split(",") if args.only else None
    if args.only == "":
        selection = []
    report = run_validation_suite(selection)
    for result in report.results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} ({result.runtime_s:.2f}s)")
    if args.out:
        _write(args.out, report.to_json())
        print(f"wrote {args.out}")
    return 0 if report.all_passed else 2


def cmd_render(args) -> int:
    from .render import RenderStyle, render_dataset

    dataset = load_dataset_json(args.dataset)
    text = render_dataset(dataset, RenderStyle(log_scale=args.log_scale))
    _write(args.out, text)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emsym",
        description="Phase diagrams, Gaussian fluctuations and ground-state "
                    "factorization for collective spin-boson models.")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="evaluate a parameter grid")
    scan.add_argument("--config", help="JSON config path")
    scan.add_argument("--model", choices=["landau", "dicke", "dicke_lattice", "lmg"])
    scan.add_argument("--axis1", help="axis override name:min:max:steps")
    scan.add_argument("--axis2", help="second axis override name:min:max:steps")
    scan.add_argument("-p", "--param", action="append",
                      help="parameter override name=value (JSON value)")
    scan.add_argument("--threads", type=int, help="worker process count")
    scan.add_argument("--out", help="output path (stdout if omitted)")
    scan.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    scan.add_argument("--render", help="also write an SVG figure to this path")
    scan.add_argument("--log-scale", action="store_true",
                      help="logarithmic color/y scale")
    scan.set_defaults(func=cmd_scan)

    point = sub.add_parser("point", help="evaluate a single parameter point")
    point.add_argument("--model", choices=["landau", "dicke", "dicke_lattice", "lmg"],
                       required=True)
    point.add_argument("-p", "--param", action="append",
                       help="parameter name=value (JSON value)")
    point.add_argument("--geometry", help="lattice geometry as JSON")
    point.set_defaults(func=cmd_point)

    lat = sub.add_parser("lattice-check",
                         help="uniform-minimum and factorization-line report")
    lat.add_argument("--geometry", required=True, help="geometry as JSON")
    lat.add_argument("--hop-j", dest="hop_j", type=float, required=True)
    lat.add_argument("--g-plus", dest="g_plus", type=float, required=True)
    lat.add_argument("--g-minus", dest="g_minus", type=float, required=True)
    lat.add_argument("--omega0", type=float, default=1.0)
    lat.add_argument("--omega-spin", dest="omega_spin", type=float, default=1.0)
    lat.add_argument("--starts", type=int, default=64)
    lat.set_defaults(func=cmd_lattice_check)

    edp = sub.add_parser("ed", help="finite-size exact diagonalization")
    edp.add_argument("--model", choices=["dicke", "lmg"], required=True)
    edp.add_argument("--g-plus", dest="g_plus", type=float, default=2.0)
    edp.add_argument("--g-minus", dest="g_minus", type=float, default=0.5)
    edp.add_argument("--omega0", type=float, default=1.0)
    edp.add_argument("--omega-spin", dest="omega_spin", type=float, default=1.0)
    edp.add_argument("--n-atoms", dest="n_atoms", type=int, default=16)
    edp.add_argument("--cutoff", type=int, default=None)
    edp.add_argument("--field-h", dest="field_h", type=float, default=1.0)
    edp.add_argument("--gamma-x", dest="gamma_x", type=float, default=2.0)
    edp.add_argument("--gamma-y", dest="gamma_y", type=float, default=0.5)
    edp.add_argument("--n-spins", dest="n_spins", type=int, default=32)
    edp.add_argument("--no-fidelity", action="store_true")
    edp.set_defaults(func=cmd_ed)

    val = sub.add_parser("validate", help="run the validation suite")
    val.add_argument("--only", help="comma-separated check names (empty for none)")
    val.add_argument("--out", help="write a JSON report here")
    val.set_defaults(func=cmd_validate)

    ren = sub.add_parser("render", help="render a JSON dataset to SVG")
    ren.add_argument("--dataset", required=True, help="JSON dataset path")
    ren.add_argument("--out", required=True, help="SVG output path")
    ren.add_argument("--log-scale", action="store_true")
    ren.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except EmsymError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
