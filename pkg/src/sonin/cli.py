"""Batch command-line front end.

Commands: eval, pair-verify, laplace-verify, gfi, gfd, construct, reductions.
Output is deterministic for a fixed invocation: floats are printed with 17
significant digits, rows keep a fixed order, and CSV always carries a header.
Exit codes: 0 all checks passed, 1 a verification failed, 2 invalid input
(with a machine-readable JSON error on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import catalog, engine, series, special, verify
from .catalog import KernelSpec, SampledFunction, pair_from_spec
from .errors import SoninError

_SPACINGS = ("linear", "sqrt", "log")


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: command, pair spec, grid, and output plan."""

    command: str
    kernel_json: dict | None
    grid: tuple[float, float, int, str] | None
    order: int
    tol: float
    out_format: str
    out_path: str | None
    f_name: str | None
    generator: str | None
    gen_order: int
    params: dict[str, float]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_grid(text: str) -> tuple[float, float, int, str]:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise SoninError(f"grid must be start:stop:count[:spacing], got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    spacing = parts[3] if len(parts) == 4 else "linear"
    if spacing not in _SPACINGS:
        raise SoninError(f"spacing must be one of {_SPACINGS}")
    if start <= 0.0:
        raise SoninError("grid start must be positive")
    if count < 1:
        raise SoninError("grid count must be >= 1")
    if stop < start:
        raise SoninError("grid stop must be >= start")
    return start, stop, count, spacing


def grid_points(spec: tuple[float, float, int, str]) -> np.ndarray:
    start, stop, count, spacing = spec
    if count == 1:
        return np.array([start])
    if spacing == "linear":
        return np.linspace(start, stop, count)
    if spacing == "sqrt":
        return np.linspace(math.sqrt(start), math.sqrt(stop), count) ** 2
    return np.geomspace(start, stop, count)


_TEST_FUNCTIONS = {
    "one": lambda: SampledFunction(
        evaluator=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        value_at_zero=1.0,
    ),
    "linear": lambda: SampledFunction(
        evaluator=lambda x: np.asarray(x, dtype=float),
        derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        value_at_zero=0.0,
    ),
    "square": lambda: SampledFunction(
        evaluator=lambda x: np.asarray(x, dtype=float) ** 2,
        derivative=lambda x: 2.0 * np.asarray(x, dtype=float),
        value_at_zero=0.0,
    ),
    "expneg": lambda: SampledFunction(
        evaluator=lambda x: np.exp(-np.asarray(x, dtype=float)),
        derivative=lambda x: -np.exp(-np.asarray(x, dtype=float)),
        value_at_zero=1.0,
    ),
}


def _load_samples_function(path: str) -> SampledFunction:
    """Monotone-cubic interpolant of a samples file.

    Accepts CSV with an ``x,f[,fprime]`` header or JSON with arrays under
    "x", "f", and optionally "fprime".
    """
    from scipy.interpolate import PchipInterpolator

    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        xs = np.asarray(obj["x"], dtype=float)
        fs = np.asarray(obj["f"], dtype=float)
        dfs = np.asarray(obj["fprime"], dtype=float) if "fprime" in obj else None
    else:
        rows = np.genfromtxt(path, delimiter=",", names=True)
        xs = np.asarray(rows["x"], dtype=float)
        fs = np.asarray(rows["f"], dtype=float)
        dfs = (
            np.asarray(rows["fprime"], dtype=float)
            if "fprime" in (rows.dtype.names or ())
            else None
        )
    if xs.size < 2:
        raise SoninError("samples file needs at least two points")
    spline = PchipInterpolator(xs, fs, extrapolate=True)
    if dfs is not None:
        dspline = PchipInterpolator(xs, dfs, extrapolate=True)
    else:
        dspline = spline.derivative()
    return SampledFunction(
        evaluator=lambda x: spline(np.asarray(x, dtype=float)),
        derivative=lambda x: dspline(np.asarray(x, dtype=float)),
        value_at_zero=float(spline(0.0)),
    )


_PARAM_FLAGS = (
    "alpha",
    "alpha1",
    "alpha2",
    "beta",
    "gamma",
    "gamma1",
    "gamma2",
    "rho",
    "lambda",
    "lambda1",
    "lambda2",
)

_FAMILY_PARAMS = {
    catalog.POWER: ("alpha",),
    catalog.TEMPERED: ("alpha", "rho"),
    catalog.ML_SUM: ("alpha", "beta"),
    catalog.WRIGHT: ("alpha", "beta", "lambda"),
    catalog.PRABHAKAR: ("alpha", "beta", "gamma", "lambda"),
    catalog.KUMMER: ("beta", "gamma", "lambda"),
    catalog.PHI3: ("alpha1", "alpha2", "beta", "gamma", "lambda1", "lambda2"),
    catalog.XI2: (
        "alpha1",
        "alpha2",
        "beta",
        "gamma1",
        "gamma2",
        "lambda1",
        "lambda2",
    ),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: A003 - argparse API
        _emit_error("InvalidArguments", message)
        raise SystemExit(2)


def _emit_error(code: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sonin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("eval", "tabulate kappa(x) and k(x) on a grid"),
        ("pair-verify", "check (kappa * k)(x) = 1 on a grid"),
        ("laplace-verify", "check the transforms against closed forms and 1/p"),
        ("gfi", "apply the fractional integral to a test function"),
        ("gfd", "apply the fractional derivative to a test function"),
        ("construct", "solve the triangular system from a generator series"),
        ("reductions", "run the special-function reduction identities"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--family", choices=sorted(_FAMILY_PARAMS), default=None)
        p.add_argument("--kernel-json", default=None, help="kernel spec as a JSON object")
        for flag in _PARAM_FLAGS:
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=float, default=None)
        p.add_argument("--grid", default=None, help="start:stop:count[:spacing]")
        p.add_argument("--order", type=int, default=32)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--format", dest="out_format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", dest="out_path", default=None)
        p.add_argument("--f", dest="f_name", default="one", help="one|linear|square|expneg|FILE")
        p.add_argument("--generator", choices=("exp", "binomial", "exp-binomial"), default=None)
        p.add_argument("--gen-order", dest="gen_order", type=int, default=40)
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {
        flag: getattr(args, flag.replace("-", "_"))
        for flag in _PARAM_FLAGS
        if getattr(args, flag.replace("-", "_")) is not None
    }
    kernel_json = None
    if args.kernel_json is not None:
        kernel_json = json.loads(args.kernel_json)
    elif args.family is not None:
        wanted = _FAMILY_PARAMS[args.family]
        missing = [name for name in wanted if name not in params]
        if missing:
            raise SoninError(
                f"family {args.family!r} needs --{', --'.join(missing)}"
            )
        kernel_json = {
            "family": args.family,
            "params": {name: params[name] for name in wanted},
        }
    grid = _parse_grid(args.grid) if args.grid is not None else None
    return RunConfig(
        command=args.command,
        kernel_json=kernel_json,
        grid=grid,
        order=args.order,
        tol=args.tol,
        out_format=args.out_format,
        out_path=args.out_path,
        f_name=args.f_name,
        generator=args.generator,
        gen_order=args.gen_order,
        params=params,
    )


def _write(config: RunConfig, payload: dict, csv_lines: list[str]) -> None:
    if config.out_format == "json":
        text = json.dumps(payload, sort_keys=True, separators=(", ", ": ")) + "\n"
    else:
        text = "\n".join(csv_lines) + "\n"
    if config.out_path is None:
        sys.stdout.write(text)
    else:
        with open(config.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _require_pair(config: RunConfig):
    if config.kernel_json is None:
        raise SoninError("this command needs --family plus parameters or --kernel-json")
    return pair_from_spec(config.kernel_json)


def _default_grid(config: RunConfig) -> np.ndarray:
    return grid_points(config.grid if config.grid is not None else (0.1, 5.0, 20, "sqrt"))


def _cmd_eval(config: RunConfig) -> int:
    pair = _require_pair(config)
    xs = _default_grid(config)
    rows = [
        {
            "x": float(x),
            "kappa": pair.kappa.evaluate(float(x)),
            "k": pair.k.evaluate(float(x)),
        }
        for x in xs
    ]
    csv_lines = ["x,kappa,k"] + [
        f"{_fmt(r['x'])},{_fmt(r['kappa'])},{_fmt(r['k'])}" for r in rows
    ]
    _write(config, {"command": "eval", "rows": rows}, csv_lines)
    return 0


def _report_output(config: RunConfig, report: verify.VerificationReport, extra: dict | None = None) -> int:
    payload = {"command": config.command, "rows": [
        {"point": p, "residual": r} for p, r in zip(report.points, report.residuals)
    ]}
    payload.update(report.to_json())
    if extra:
        payload.update(extra)
    csv_lines = ["point,residual"] + [
        f"{_fmt(p)},{_fmt(r)}" for p, r in zip(report.points, report.residuals)
    ]
    _write(config, payload, csv_lines)
    status = "passed" if report.passed else "FAILED"
    sys.stderr.write(
        f"{report.check_name}: {status}, max residual {report.max_abs_residual:.3e} "
        f"(tolerance {report.tolerance:.1e})\n"
    )
    return 0 if report.passed else 1


def _cmd_pair_verify(config: RunConfig) -> int:
    pair = _require_pair(config)
    xs = _default_grid(config)
    tol = config.tol if config.tol is not None else 1e-8
    report = verify.check_sonin(pair, xs.tolist(), order=config.order, tol=tol)
    return _report_output(config, report)


def _cmd_laplace_verify(config: RunConfig) -> int:
    pair = _require_pair(config)
    ps = (
        grid_points(config.grid).tolist()
        if config.grid is not None
        else [2.0, 4.0, 8.0]
    )
    tol = config.tol if config.tol is not None else 1e-7
    cfg = verify.LaplaceCheckConfig(p_values=tuple(ps))
    report = verify.check_laplace_pair(pair, cfg, tol=tol)
    return _report_output(config, report)


def _resolve_f(config: RunConfig) -> SampledFunction:
    if config.f_name in _TEST_FUNCTIONS:
        return _TEST_FUNCTIONS[config.f_name]()
    return _load_samples_function(config.f_name)


def _cmd_operator(config: RunConfig, derivative: bool) -> int:
    pair = _require_pair(config)
    f = _resolve_f(config)
    xs = _default_grid(config)
    if derivative:
        values = [engine.gfd_apply(pair, f, float(x), order=config.order) for x in xs]
    else:
        values = [engine.gfi_apply(pair, f, float(x), order=config.order) for x in xs]
    rows = [{"x": float(x), "value": float(v)} for x, v in zip(xs, values)]
    csv_lines = ["x,value"] + [f"{_fmt(r['x'])},{_fmt(r['value'])}" for r in rows]
    _write(config, {"command": config.command, "rows": rows}, csv_lines)
    return 0


_GENERATOR_RADIUS = {"exp": math.inf, "binomial": 1.0, "exp-binomial": 1.0}


def _cmd_construct(config: RunConfig) -> int:
    if config.generator is None:
        raise SoninError("construct needs --generator exp|binomial|exp-binomial")
    alpha = config.params.get("alpha")
    beta = config.params.get("beta")
    if alpha is None or beta is None:
        raise SoninError("construct needs --alpha and --beta")
    lam = config.params.get("lambda", 1.0)
    order = config.gen_order
    if config.generator == "exp":
        phi = series.coeffs_exp(order)
    else:
        gamma = config.params.get("gamma")
        if gamma is None:
            raise SoninError(f"generator {config.generator!r} needs --gamma")
        if config.generator == "binomial":
            phi = series.coeffs_binomial(gamma, order)
        else:
            phi = series.coeffs_exp_binomial(gamma, order)
    a = series.gamma_scaled(phi, alpha, beta)
    pair_coeffs = series.solve_sonin_triangular(a, alpha, beta)
    pair = catalog.from_series_pair(
        pair_coeffs, lam, radius=_GENERATOR_RADIUS[config.generator]
    )

    if config.grid is not None:
        xs = grid_points(config.grid)
    else:
        x_radius = min(pair.kappa.radius_x, pair.k.radius_x)
        x_hi = 4.0 if math.isinf(x_radius) else 0.9 * x_radius
        xs = grid_points((min(0.05, x_hi / 4.0), x_hi, 12, "sqrt"))
    xs = [float(x) for x in xs if x < min(pair.kappa.radius_x, pair.k.radius_x)]
    if not xs:
        raise SoninError("no grid point lies inside the series radius")
    tol = config.tol if config.tol is not None else 1e-8
    report = verify.check_sonin(pair, xs, order=config.order, tol=tol)

    rows = [
        {"n": n, "a": pair_coeffs.a.coeffs[n], "b": pair_coeffs.b.coeffs[n]}
        for n in range(order + 1)
    ]
    payload = {
        "command": "construct",
        "generator": config.generator,
        "rows": rows,
        "verification": report.to_json(),
    }
    csv_lines = ["n,a,b"] + [
        f"{r['n']},{_fmt(r['a'])},{_fmt(r['b'])}" for r in rows
    ]
    _write(config, payload, csv_lines)
    status = "passed" if report.passed else "FAILED"
    sys.stderr.write(
        f"construct[{config.generator}]: sonin check {status}, "
        f"max residual {report.max_abs_residual:.3e}\n"
    )
    return 0 if report.passed else 1


def _cmd_reductions(config: RunConfig) -> int:
    tol = config.tol if config.tol is not None else 1e-10
    draws = 200
    rng = np.random.default_rng(20240817)
    worst = {"prabhakar-ml": 0.0, "prabhakar-kummer": 0.0, "phi3-horn": 0.0, "xi2-horn": 0.0}
    for _ in range(draws):
        alpha = rng.uniform(0.2, 1.5)
        beta = rng.uniform(0.1, 0.9)
        g1 = rng.uniform(-2.0, 2.0)
        g2 = rng.uniform(-2.0, 2.0)
        y = rng.uniform(-2.0, 2.0)
        z = rng.uniform(-2.0, 2.0)
        gb = math.gamma(beta)

        def rel(a: float, b: float) -> float:
            return abs(a - b) / max(1.0, abs(a), abs(b))

        worst["prabhakar-ml"] = max(
            worst["prabhakar-ml"],
            rel(special.prabhakar(alpha, beta, 1.0, z), special.mittag_leffler2(alpha, beta, z)),
        )
        worst["prabhakar-kummer"] = max(
            worst["prabhakar-kummer"],
            rel(gb * special.prabhakar(1.0, beta, g1, z), special.kummer_1f1(g1, beta, z)),
        )
        worst["phi3-horn"] = max(
            worst["phi3-horn"],
            rel(
                gb * special.phi3_general(g1, 1.0, 1.0, beta, y, z),
                special.horn_phi3(g1, beta, y, z),
            ),
        )
        worst["xi2-horn"] = max(
            worst["xi2-horn"],
            rel(
                gb * special.xi2_general(g1, g2, 1.0, 1.0, beta, y, z),
                special.horn_xi2(g1, g2, beta, y, z),
            ),
        )
    rows = [
        {"identity": name, "draws": draws, "max_rel_error": err, "passed": err <= tol}
        for name, err in sorted(worst.items())
    ]
    payload = {"command": "reductions", "rows": rows, "tolerance": tol}
    csv_lines = ["identity,draws,max_rel_error,passed"] + [
        f"{r['identity']},{r['draws']},{_fmt(r['max_rel_error'])},{str(r['passed']).lower()}"
        for r in rows
    ]
    _write(config, payload, csv_lines)
    ok = all(r["passed"] for r in rows)
    sys.stderr.write(
        "reductions: " + ("passed" if ok else "FAILED")
        + f", worst {max(r['max_rel_error'] for r in rows):.3e}\n"
    )
    return 0 if ok else 1


def run(config: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit status."""
    if config.command == "eval":
        return _cmd_eval(config)
    if config.command == "pair-verify":
        return _cmd_pair_verify(config)
    if config.command == "laplace-verify":
        return _cmd_laplace_verify(config)
    if config.command == "gfi":
        return _cmd_operator(config, derivative=False)
    if config.command == "gfd":
        return _cmd_operator(config, derivative=True)
    if config.command == "construct":
        return _cmd_construct(config)
    if config.command == "reductions":
        return _cmd_reductions(config)
    raise SoninError(f"unknown command {config.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
        return run(config)
    except SystemExit as exc:
        return int(exc.code or 0)
    except SoninError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
