"""Command-line front end."""

from .app import build_parser, main
from .config import RunConfig, parse_grid, worker_count
from .runner import COMMANDS, RunResult, run

__all__ = ["COMMANDS", "RunConfig", "RunResult", "build_parser", "main", "parse_grid", "run", "worker_count"]
