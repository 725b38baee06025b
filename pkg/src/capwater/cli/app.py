"""Command-line entry point."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from typing import Any, TextIO

from loguru import logger
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from capwater import __version__
from capwater.core.errors import CapacityError
from capwater.io.records import emit

from .config import THREADS_ENV, RunConfig
from .runner import RunResult, run

EPILOG = f"""\
columns:
  one-mode   nbar,regime,gq,gp,lambda,gin_q,gin_p,gmod_q,gmod_p,mu,nu_bar,nu_out,chi
  finite     mode,set,regime,...,chi,c1
  spectral   nbar,mu,capacity,global_wf,threshold_nbar,n1,n2,n3
  gain       nbar,snr,phi,capacity,rate,gain
  input-cov  k,q,p,truncation_error
  sweep      N,phi,nbar,capacity,threshold_nbar
  verify     instance,gq,gp,lambda,regime,chi,oracle_chi,chi_gap,stationarity,hessian_negative,passed

{THREADS_ENV} bounds the worker pool (0 or unset picks automatically).
exit status: 0 success, 1 invalid input or model, 2 solver failure.
"""

LOG_FORMAT = "<level>{level: <8}</level> {name}:{function} - {message}"


def _common(parser: argparse.ArgumentParser) -> None:
    source = parser.add_argument_group("noise")
    source.add_argument("--model", dest="model_path", help="JSON noise model file")
    source.add_argument("--gq", type=float, help="q noise variance of a single mode")
    source.add_argument("--gp", type=float, help="p noise variance of a single mode")
    source.add_argument("--N", type=float, help="Gauss-Markov noise variance")
    source.add_argument("--phi", type=float, help="Gauss-Markov correlation in [0, 1)")

    energy = parser.add_argument_group("energy")
    energy.add_argument("--nbar", type=float, help="mean photon number per mode")
    energy.add_argument("--lambda", dest="lambda_", type=float, help="input energy 2 nbar + 1 (total for finite)")
    energy.add_argument("--nbar-grid", help="lo:hi:steps grid of nbar values")
    energy.add_argument("--log", action="store_true", help="log-space lo:hi:steps grids")

    numerics = parser.add_argument_group("numerics")
    numerics.add_argument("--root-tol", type=float)
    numerics.add_argument("--mu-tol", type=float)
    numerics.add_argument("--grid-size", type=int, help="quadrature panels on [0, pi]")
    numerics.add_argument("--max-iter", type=int)

    output = parser.add_argument_group("output")
    output.add_argument("--format", choices=("csv", "json"))
    output.add_argument("--output", "-o", help="write here instead of standard output")
    output.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capwater",
        description="Gaussian capacity of bosonic channels with correlated additive noise.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    _common(commands.add_parser("one-mode", help="one phase-dependent mode"))

    finite = commands.add_parser("finite", help="finite ensemble of modes at a common multiplier")
    _common(finite)
    finite.add_argument("--modes", type=int, help="number of modes sampled from a spectral model")

    _common(commands.add_parser("spectral", help="infinitely many correlated modes"))

    gain_parser = commands.add_parser("gain", help="capacity over the coherent-state rate")
    _common(gain_parser)
    gain_parser.add_argument("--snr", type=float, help="fix nbar / N; N follows each nbar")
    gain_parser.add_argument("--channel", choices=("infinite", "two_mode"))

    input_cov = commands.add_parser("input-cov", help="Toeplitz diagonals of the optimal input")
    _common(input_cov)
    input_cov.add_argument("--k-max", type=int)

    sweep = commands.add_parser("sweep", help="Gauss-Markov capacity over phi or N")
    _common(sweep)
    sweep.add_argument("--param", choices=("phi", "N"))
    sweep.add_argument("--values", help="lo:hi:steps grid of the swept parameter")

    verify = commands.add_parser("verify", help="solver against oracle on seeded instances")
    _common(verify)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--instances", type=int)
    return parser


def _configure_logging(verbose: bool, sink: TextIO) -> None:
    logger.remove()
    logger.add(sink, level="DEBUG" if verbose else "WARNING", format=LOG_FORMAT)


def _verify_table(result: RunResult) -> Table:
    table = Table(title="optimality checks")
    for name in ("instance", "gq", "gp", "lambda", "regime", "chi_gap", "stationarity", "passed"):
        table.add_column(name, justify="right" if name not in ("regime", "passed") else "left")
    for record in result.records:
        table.add_row(
            str(record["instance"]),
            f"{record['gq']:.4g}",
            f"{record['gp']:.4g}",
            f"{record['lambda']:.4g}",
            str(record["regime"]),
            f"{record['chi_gap']:.2e}",
            f"{record['stationarity']:.2e}",
            "[green]yes[/green]" if record["passed"] else "[red]no[/red]",
        )
    return table


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the command and return the process exit status."""
    args = build_parser().parse_args(argv)
    options: dict[str, Any] = vars(args)
    verbose = bool(options.pop("verbose"))
    errors = Console(stderr=True)
    _configure_logging(verbose, sys.stderr)

    try:
        config = RunConfig.build(**options)
        result = run(config)
        text = emit(result.records, config.format, config.output, result.columns)
    except CapacityError as exc:
        errors.print(f"[bold red]error[/bold red] {exc.code}: {escape(str(exc))}")
        errors.print_json(data=exc.as_dict())
        return exc.exit_code
    except OSError as exc:
        errors.print(f"[bold red]error[/bold red] io_error: {escape(str(exc))}")
        return 1

    if config.output is None:
        sys.stdout.write(text)
    if config.command == "verify":
        errors.print(_verify_table(result))
    return 0 if result.passed else 1
