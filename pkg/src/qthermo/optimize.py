"""Maximisation of the Fisher information over interaction time and parameter sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .metrics import fisher_population, qfi_bloch
from .probe import DomainError, ModelParams, bloch, probe_state, probe_states_over_tau

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TIE_RTOL = 1e-10


class Objective(str, Enum):
    FI = "fi"
    QFI = "qfi"
    PE = "p_e"


def evaluate_objective(objective, ps):
    objective = Objective(objective)
    if objective is Objective.FI:
        return fisher_population(ps)
    if objective is Objective.QFI:
        return qfi_bloch(bloch(ps))
    return ps.rho_ee


def objective_over_tau(objective, params: ModelParams, taus) -> np.ndarray:
    return np.asarray(evaluate_objective(objective, probe_states_over_tau(params, taus)), dtype=float)


def objective_at(objective, params: ModelParams) -> float:
    return float(evaluate_objective(objective, probe_state(params)))


def default_tau_interval(params: ModelParams) -> Tuple[float, float]:
    return (0.0, 4 * math.pi) if params.dec_b > 0 else (0.0, 2 * math.pi)


@dataclass(frozen=True)
class OptimizeRequest:
    objective: Objective
    fixed: ModelParams
    interval: Optional[Tuple[float, float]] = None
    tol: float = 1e-6
    grid_points: int = 2001
    candidates: int = 4

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        lo, hi = self.search_interval
        if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo <= hi):
            raise DomainError(f"invalid search interval {(lo, hi)}")
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")
        if self.grid_points < 3:
            raise DomainError("need at least 3 coarse grid points")

    @property
    def search_interval(self) -> Tuple[float, float]:
        return self.interval if self.interval is not None else default_tau_interval(self.fixed)


@dataclass(frozen=True)
class OptimumResult:
    arg: float
    value: float
    evaluations: int
    bracket: Tuple[float, float]
    degenerate: bool = False


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Maximise a unimodal ``f`` on [lo, hi]; returns (x, f(x), evaluations, (a, b))."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc >= fd:  # ties keep the left part
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        evals += 1
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return x, fx, evals, (a, b)


def maximize_over_time(req: OptimizeRequest) -> OptimumResult:
    """Global maximum over tau: coarse grid, then golden-section on the best peaks.

    The ``candidates`` highest local maxima of the grid are refined and the
    best refined peak wins; peaks within ``TIE_RTOL`` of it are treated as
    tied and the earliest one is returned.
    """
    lo, hi = req.search_interval
    if hi == lo:
        return OptimumResult(arg=lo, value=0.0, evaluations=0, bracket=(lo, hi), degenerate=True)
    taus = np.linspace(lo, hi, req.grid_points)
    values = objective_over_tau(req.objective, req.fixed, taus)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("objective is not finite on the coarse grid")
    evals = len(taus)
    if np.max(values) <= 0.0:
        return OptimumResult(arg=lo, value=0.0, evaluations=evals, bracket=(lo, hi), degenerate=True)

    left = np.concatenate([[-np.inf], values[:-1]])
    right = np.concatenate([values[1:], [-np.inf]])
    peaks = np.flatnonzero((values >= left) & (values >= right))
    order = peaks[np.argsort(-values[peaks], kind="stable")][: req.candidates]

    def f(t):
        return objective_at(req.objective, req.fixed.with_(tau=t))

    refined = []
    for i in sorted(order):
        a, b = taus[max(i - 1, 0)], taus[min(i + 1, len(taus) - 1)]
        x, fx, k, br = golden_section_max(f, a, b, req.tol)
        evals += k
        if values[i] > fx:  # refinement must never lose the grid value
            x, fx = taus[i], values[i]
        refined.append((float(x), float(fx), (float(br[0]), float(br[1]))))

    best = max(v for _, v, _ in refined)
    for x, v, br in refined:  # ascending tau
        if v >= best * (1.0 - TIE_RTOL):
            return OptimumResult(arg=x, value=v, evaluations=evals, bracket=br)
    raise AssertionError("unreachable")


AXES = ("beta", "tau", "theta", "gamma", "b")
_PARAM_NAME = {"beta": "beta", "tau": "tau", "theta": "theta", "gamma": "gamma", "b": "dec_b"}


@dataclass
class SweepTable:
    axes: List[Tuple[str, np.ndarray]]
    values: np.ndarray
    metadata: Dict = field(default_factory=dict)
    value_name: str = "value"

    def __post_init__(self):
        self.axes = [(name, np.asarray(grid, dtype=float)) for name, grid in self.axes]
        self.values = np.asarray(self.values, dtype=float).reshape(self.shape)
        if not np.all(np.isfinite(self.values)):
            raise ArithmeticError("sweep produced non-finite values")

    @property
    def shape(self):
        return tuple(len(g) for _, g in self.axes)

    def rows(self):
        """Long-format rows (axis values..., value) in row-major order."""
        grids = [g for _, g in self.axes]
        for idx in product(*(range(len(g)) for g in grids)):
            yield tuple(float(g[i]) for g, i in zip(grids, idx)) + (float(self.values[idx]),)


def _validate_grid(name, grid):
    if name not in AXES:
        raise DomainError(f"unknown sweep axis {name!r}; choose from {AXES}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise DomainError(f"grid for {name} must be a finite 1-d array")
    return grid


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))  # ordered by index
    return [fn(x) for x in items]


def sweep(grids: Sequence[Tuple[str, Sequence[float]]], objective, base: ModelParams,
          workers: int = 1) -> SweepTable:
    """Evaluate ``objective`` on the Cartesian product of ``grids``.

    The tau axis, if present, is evaluated vectorised; other axes cell by cell.
    """
    objective = Objective(objective)
    grids = [(name, _validate_grid(name, g)) for name, g in grids]
    names = [n for n, _ in grids]
    if len(set(names)) != len(names):
        raise DomainError("repeated sweep axis")
    outer = [(n, g) for n, g in grids if n != "tau"]
    tau_grid = dict(grids).get("tau")

    def cell(values):
        params = base.with_(**{_PARAM_NAME[n]: float(v) for (n, _), v in zip(outer, values)})
        if tau_grid is None:
            return np.array([objective_at(objective, params)])
        return objective_over_tau(objective, params, tau_grid)

    combos = list(product(*(g for _, g in outer)))
    results = _map(cell, combos, workers)
    full = np.stack(results).reshape([len(g) for _, g in outer] + ([len(tau_grid)] if tau_grid is not None else []))
    # restore the caller's axis order
    current = [n for n, _ in outer] + (["tau"] if tau_grid is not None else [])
    full = np.transpose(full, [current.index(n) for n in names])
    meta = sweep_metadata(objective, base)
    for n in names:
        meta["fixed"].pop(_PARAM_NAME[n])
    return SweepTable(axes=grids, values=full, metadata=meta, value_name=objective.value)


def qfi_landscape(grids, base: ModelParams, workers: int = 1) -> SweepTable:
    return sweep(grids, Objective.QFI, base, workers=workers)


def sweep_metadata(objective, base: ModelParams) -> Dict:
    return {
        "objective": Objective(objective).value,
        "fixed": {k: getattr(base, k) for k in ("beta", "theta", "phi", "tau", "gamma", "dec_a", "dec_b")},
        "truncation": {"tail_eps": base.trunc.tail_eps, "n_cap": base.trunc.n_cap},
        "tool_version": __version__,
    }


def default_beta_grid(n: int = 60, lo: float = 1.0, hi: float = 15.0) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def optimum_curve(betas, base: ModelParams, objective=Objective.FI,
                  interval: Optional[Tuple[float, float]] = None, workers: int = 1, **kw):
    """F_M(beta) and tau_max(beta) for each beta in ``betas``."""
    def one(beta):
        res = maximize_over_time(OptimizeRequest(objective, base.with_(beta=float(beta)), interval, **kw))
        return res.value, res.arg
    out = _map(one, list(betas), workers)
    return np.array([v for v, _ in out]), np.array([a for _, a in out])
