"""Command-line front end.

    torireform {poincare,lyapunov,sweep,duality-check,lindstedt-check} [--config FILE] [--key value ...]

Exit codes: 0 success, 1 domain error or failed check, 2 I/O error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from .duality import check_trajectory_duality
from .emit import (eps_label, emit_csv, emit_jobs_csv, emit_manifest, emit_svg_scatter,
                   section_points, write_csv)
from .lindstedt import composite_accuracy, constants_from_ic, leading_order_residual, loglog_slope
from .symplectic import IntegrationBlowup, Order, StepperConfig
from .sweep import RunConfig, compute_sections, run_sweep
from .system import DomainError, DualParams, PhaseState

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    text = text.strip()
    if text.startswith("["):
        return [float(x) for x in json.loads(text)]
    return [float(x) for x in text.split(",") if x.strip()]


def _json(text: str):
    return json.loads(text)


# flag -> (config key, parser)
OVERRIDES: dict[str, tuple[str, Callable]] = {
    "--omega0": ("omega0", float),
    "--omega": ("omega", float),
    "--epsilon-grid": ("epsilon_grid", _floats),
    "--lambda": ("lambda_for_duality", float),
    "--initial-conditions": ("initial_conditions", _json),
    "--momentum-scaling": ("momentum_scaling", str),
    "--dt": ("dt", float),
    "--order": ("order", str),
    "--horizon": ("horizon", float),
    "--renorm-interval": ("renorm_interval", float),
    "--n-periods": ("n_periods", int),
    "--seed": ("seed", int),
    "--jitter": ("jitter", float),
    "--output-dir": ("output_dir", str),
    "--workers": ("workers", int),
    "--duality-t-end": ("duality_t_end", float),
    "--duality-state": ("duality_state", _floats),
    "--duality-tolerance": ("duality_tolerance", float),
    "--lindstedt-alpha": ("lindstedt_alpha", float),
    "--lindstedt-lambdas": ("lindstedt_lambdas", _floats),
    "--lindstedt-q0": ("lindstedt_q0", float),
    "--lindstedt-p0": ("lindstedt_p0", float),
    "--lindstedt-tau-end": ("lindstedt_tau_end", float),
    "--lindstedt-dt": ("lindstedt_dt", float),
}

COMMANDS = {
    "poincare": "stroboscopic sections for every epsilon in the grid",
    "lyapunov": "maximal Lyapunov exponent and regime label per orbit",
    "sweep": "regime fractions over the epsilon grid, with sections and thresholds",
    "duality-check": "max deviation between original and mapped-back dual trajectories",
    "lindstedt-check": "leading-order residual and composite-series convergence",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="torireform", description="Tori-reforming numerical laboratory.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", type=Path, help="JSON RunConfig file")
        for flag, (key, conv) in OVERRIDES.items():
            p.add_argument(flag, dest=key, type=conv, default=None, metavar="VALUE")
    return parser


def load_config(args) -> RunConfig:
    data = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{args.config}: invalid JSON ({exc})") from exc
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    stepper = dict(data.pop("stepper", {}) or {})
    for flag, (key, _) in OVERRIDES.items():
        value = getattr(args, key)
        if value is None:
            continue
        if key in ("dt", "order"):
            stepper[key] = value
        else:
            data[key] = value
    if stepper:
        base = RunConfig().stepper
        data["stepper"] = {"dt": stepper.get("dt", base.dt), "order": stepper.get("order", base.order.value)}
    return RunConfig.from_dict(data)


def _manifest(cfg: RunConfig, out: Path, command: str, files: list[str], extra: dict) -> None:
    config = cfg.to_dict()
    # output location is not part of the result
    config.pop("output_dir", None)
    resolved = {eps_label(e): [[s.q, s.p] for s in cfg.initial_states(e)] for e in cfg.epsilon_grid}
    meta = {"command": command, "version": __version__, "resolved_initial_conditions": resolved}
    meta.update(extra)
    emit_manifest(out / "manifest.json", config, files + ["manifest.json"], meta)


def _sections(cfg: RunConfig, out: Path) -> list[str]:
    files = []
    for epsilon in cfg.epsilon_grid:
        sections = compute_sections(cfg, epsilon)
        label = eps_label(epsilon)
        emit_csv(sections, out / f"section_eps{label}.csv")
        emit_svg_scatter(section_points(sections), out / f"section_eps{label}.svg",
                         title=f"epsilon = {label}, omega0 = {cfg.omega0:g}, omega = {cfg.omega:g}",
                         allow_empty=True)
        files += [f"section_eps{label}.csv", f"section_eps{label}.svg"]
    return files


def cmd_poincare(cfg: RunConfig, out: Path) -> int:
    files = _sections(cfg, out)
    _manifest(cfg, out, "poincare", files, {})
    print(f"wrote {len(files)} section files to {out}")
    return EXIT_OK


def cmd_lyapunov(cfg: RunConfig, out: Path) -> int:
    report = run_sweep(cfg)
    emit_jobs_csv(report, out / "lyapunov.csv")
    for job in report.jobs:
        print(f"epsilon={job.epsilon:g} ic={job.ic_index:2d} exponent={job.exponent:.6g} {job.label.value}")
    _manifest(cfg, out, "lyapunov", ["lyapunov.csv"], {})
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    report = run_sweep(cfg)
    emit_csv(report, out / "report.csv")
    emit_jobs_csv(report, out / "jobs.csv")
    files = ["report.csv", "jobs.csv"] + _sections(cfg, out)
    for row in report.rows:
        print(f"epsilon={row.epsilon:g} fraction_chaotic={row.fraction_chaotic:.4f} "
              f"mean_exponent={row.mean_exponent:.5g}")
    print(f"eps_onset={report.eps_onset} eps_reform={report.eps_reform}")
    _manifest(cfg, out, "sweep", files, {"eps_onset": report.eps_onset, "eps_reform": report.eps_reform})
    return EXIT_OK


def cmd_duality(cfg: RunConfig, out: Path) -> int:
    rows = []
    ok = True
    q, p = cfg.duality_state
    for epsilon in cfg.epsilon_grid:
        if epsilon == 0:
            print("epsilon=0 skipped: no dual split")
            continue
        dev = check_trajectory_duality(cfg.params(epsilon), cfg.lambda_for_duality, PhaseState(q, p, 0.0),
                                       cfg.duality_t_end, cfg.stepper)
        passed = dev < cfg.duality_tolerance
        ok &= passed
        rows.append((epsilon, cfg.lambda_for_duality, dev, "pass" if passed else "fail"))
        print(f"epsilon={epsilon:g} lambda={cfg.lambda_for_duality:g} max_deviation={dev:.6e}")
    write_csv(out / "duality.csv", ["epsilon", "lambda", "max_deviation", "status"], rows)
    _manifest(cfg, out, "duality-check", ["duality.csv"], {"tolerance": cfg.duality_tolerance})
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_lindstedt(cfg: RunConfig, out: Path) -> int:
    step = StepperConfig(cfg.lindstedt_dt, Order.YOSHIDA4)
    base = DualParams(cfg.lindstedt_alpha, cfg.omega0, cfg.omega, cfg.lindstedt_lambdas[0])
    consts = constants_from_ic(base, cfg.lindstedt_q0, cfg.lindstedt_p0)
    h = 1e-3
    n = int(round(20.0 / h))
    residual = leading_order_residual(base, consts, [i * h for i in range(n + 1)])
    pairs = composite_accuracy(base, cfg.lindstedt_lambdas, cfg.lindstedt_q0, cfg.lindstedt_p0,
                               cfg.lindstedt_tau_end, step, workers=cfg.workers)
    slope = loglog_slope(pairs) if len(pairs) > 1 else math.nan
    decreasing = all(b[1] < a[1] for a, b in zip(pairs, pairs[1:]))
    print(f"A={consts.A:.12g} phi={consts.phi:.12g} k={consts.k.k:.12g} Omega={consts.Omega:.12g}")
    print(f"leading_order_residual(h=1e-3, tau in [0, 20]) = {residual:.3e}")
    for lam, err in pairs:
        print(f"lambda={lam:g} composite_error={err:.6e}")
    print(f"loglog_slope={slope:.4f} decreasing={decreasing}")
    write_csv(out / "lindstedt.csv", ["lambda", "composite_error"], pairs)
    _manifest(cfg, out, "lindstedt-check", ["lindstedt.csv"],
              {"residual": residual, "loglog_slope": slope, "A": consts.A, "phi": consts.phi})
    return EXIT_OK if decreasing and slope <= -1.5 else EXIT_DOMAIN


HANDLERS = {
    "poincare": cmd_poincare,
    "lyapunov": cmd_lyapunov,
    "sweep": cmd_sweep,
    "duality-check": cmd_duality,
    "lindstedt-check": cmd_lindstedt,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        out = cfg.resolved_output_dir()
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[args.command](cfg, out)
    except (DomainError, IntegrationBlowup, ValueError, TypeError) as exc:
        print(f"torireform {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"torireform {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
