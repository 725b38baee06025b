"""Deterministic bisection and fixed-node composite Gauss-Legendre quadrature."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import numpy.typing as npt
from loguru import logger
from scipy.special import roots_legendre

from .errors import BracketError, ConvergenceError, DomainError

FloatArray = npt.NDArray[np.float64]

PANEL_ORDER = 4


@dataclass(frozen=True, slots=True)
class SolverTolerances:
    """Tolerances and iteration caps shared by all solvers."""

    root_tol: float = 1e-12
    mu_tol: float = 1e-10
    grid_size: int = 2048
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not (self.root_tol > 0.0 and self.mu_tol > 0.0):
            raise DomainError("tolerances must be positive", root_tol=self.root_tol, mu_tol=self.mu_tol)
        if self.grid_size < 2:
            raise DomainError("grid_size must be at least 2", grid_size=self.grid_size)
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1", max_iter=self.max_iter)

    def with_grid_size(self, grid_size: int) -> SolverTolerances:
        return replace(self, grid_size=grid_size)


DEFAULT_TOLERANCES = SolverTolerances()


@dataclass(frozen=True, slots=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError("bracket requires lo < hi", lo=self.lo, hi=self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, slots=True)
class QuadratureRule:
    """Nodes and weights of a composite rule on [a, b]."""

    a: float
    b: float
    nodes: FloatArray = field(repr=False)
    weights: FloatArray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def integrate(self, values: npt.ArrayLike) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))

    def mean(self, values: npt.ArrayLike) -> float:
        """Average of sampled values over [a, b], i.e. the integral divided by b - a."""
        return self.integrate(values) / (self.b - self.a)


@lru_cache(maxsize=32)
def composite_gauss_legendre(a: float, b: float, panels: int, order: int = PANEL_ORDER) -> QuadratureRule:
    """Split [a, b] into ``panels`` equal panels with an ``order``-point Gauss-Legendre rule each."""
    if not a < b:
        raise DomainError("quadrature requires a < b", a=a, b=b)
    if panels < 1 or order < 1:
        raise DomainError("panels and order must be positive", panels=panels, order=order)
    ref_nodes, ref_weights = roots_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    nodes = (centers[:, None] + half[:, None] * ref_nodes[None, :]).reshape(-1)
    weights = (half[:, None] * ref_weights[None, :]).reshape(-1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(a=float(a), b=float(b), nodes=nodes, weights=weights)


def integrate(
    f: Callable[[FloatArray], npt.ArrayLike],
    a: float,
    b: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> float:
    """Integrate ``f`` over [a, b] with ``tol.grid_size`` Gauss-Legendre panels.

    ``f`` is called once on the array of all nodes; scalar-only callables are vectorized.
    """
    if not a < b:
        raise DomainError("integration requires a < b", a=a, b=b)
    rule = composite_gauss_legendre(float(a), float(b), tol.grid_size)
    try:
        values = np.asarray(f(rule.nodes), dtype=np.float64)
    except TypeError:
        values = np.asarray([f(float(node)) for node in rule.nodes], dtype=np.float64)  # type: ignore[arg-type]
    if values.shape != rule.nodes.shape:
        values = np.asarray([f(float(node)) for node in rule.nodes], dtype=np.float64)  # type: ignore[arg-type]
    return rule.integrate(values)


def bisect(f: Callable[[float], float], bracket: Bracket, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Locate a sign change of ``f`` inside ``bracket`` to an interval of width ``tol.root_tol``."""
    lo, hi = bracket.lo, bracket.hi
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.isnan(f_lo) or math.isnan(f_hi) or f_lo * f_hi > 0.0:
        raise BracketError("no sign change in bracket", lo=lo, hi=hi, f_lo=f_lo, f_hi=f_hi)

    for _ in range(tol.max_iter):
        if hi - lo <= tol.root_tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    if hi - lo <= tol.root_tol:
        return 0.5 * (lo + hi)
    raise ConvergenceError("bisection hit the iteration cap", lo=lo, hi=hi, max_iter=tol.max_iter)


def bisect_vectorized(
    f: Callable[[FloatArray], FloatArray],
    lo: npt.ArrayLike,
    hi: npt.ArrayLike,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> FloatArray:
    """Elementwise bisection over arrays of brackets.

    ``f(lo) > 0 >= f(hi)`` is assumed for every element; NaN values of ``f`` count as positive.
    """
    lo_arr = np.array(lo, dtype=np.float64, copy=True)
    hi_arr = np.array(hi, dtype=np.float64, copy=True)
    if lo_arr.size == 0:
        return lo_arr
    width = float(np.max(hi_arr - lo_arr))
    iterations = 0
    while width > tol.root_tol:
        if iterations >= tol.max_iter:
            raise ConvergenceError("vectorized bisection hit the iteration cap", width=width, max_iter=tol.max_iter)
        mid = 0.5 * (lo_arr + hi_arr)
        values = f(mid)
        positive = np.isnan(values) | (values > 0.0)
        lo_arr = np.where(positive, mid, lo_arr)
        hi_arr = np.where(positive, hi_arr, mid)
        iterations += 1
        new_width = float(np.max(hi_arr - lo_arr))
        if new_width >= width:
            break
        width = new_width
    logger.trace("vectorized bisection finished after {} iterations (width {:.3e})", iterations, width)
    return 0.5 * (lo_arr + hi_arr)
