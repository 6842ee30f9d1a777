"""Monte Carlo check of the Cramer-Rao bound with maximum-likelihood estimates of beta."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import xlog1py, xlogy

from .metrics import fisher_population
from .optimize import golden_section_max
from .probe import DomainError, ModelParams, probe_state

RNG_NAME = "numpy Philox4x64-10, SeedSequence(seed, spawn_key=(rep,))"
LIKELIHOOD_GRID = 401


class IdentifiabilityError(ValueError):
    """The excited-state probability does not depend on beta over the window."""


def rep_stream(seed: int, rep: int) -> np.random.Generator:
    """Independent counter-based stream for repetition ``rep``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(rep,))
    return np.random.Generator(np.random.Philox(ss))


def sample_outcomes(params: ModelParams, shots: int, stream: np.random.Generator) -> int:
    """Number of excited outcomes in ``shots`` population measurements."""
    return _draw(probe_state(params).rho_ee, shots, stream)


def _draw(p_e: float, shots: int, stream: np.random.Generator) -> int:
    return int(stream.binomial(shots, min(max(p_e, 0.0), 1.0)))


class PopulationLikelihood:
    """Binomial log-likelihood of beta with p_e(beta) tabulated on a grid.

    The table does not depend on the data and is shared across repetitions.
    """

    def __init__(self, template: ModelParams, window: Tuple[float, float],
                 grid_points: int = LIKELIHOOD_GRID):
        lo, hi = window
        if not (0 < lo < hi < math.inf):
            raise DomainError(f"beta window must be a proper positive interval, got {window}")
        self.template = template
        self.window = (float(lo), float(hi))
        self.grid = np.linspace(lo, hi, grid_points)
        self.p_grid = np.array([self.p_e(b) for b in self.grid])
        if np.ptp(self.p_grid) <= 1e-15 * max(np.max(self.p_grid), 1e-300):
            raise IdentifiabilityError("p_e is constant on the window: beta is not identifiable")

    def p_e(self, beta: float) -> float:
        return probe_state(self.template.with_(beta=float(beta))).rho_ee

    @staticmethod
    def loglik(k, shots, p):
        p = np.clip(p, 0.0, 1.0)
        return xlogy(k, p) + xlog1py(shots - k, -p)

    def mle(self, k: int, shots: int, tol: float = 1e-7):
        """Return ``(beta_hat, boundary_hit)``."""
        if not (0 <= k <= shots):
            raise DomainError("need 0 <= k <= shots")
        ll = self.loglik(k, shots, self.p_grid)
        i = int(np.argmax(ll))
        last = len(self.grid) - 1
        if i in (0, last):
            return float(self.grid[i]), True
        f = lambda b: float(self.loglik(k, shots, self.p_e(b)))
        x, fx, _, _ = golden_section_max(f, self.grid[i - 1], self.grid[i + 1], tol)
        if ll[i] > fx:
            x = self.grid[i]
        return float(x), False


def mle_beta(k: int, shots: int, template: ModelParams, window: Tuple[float, float]):
    """Maximum-likelihood beta from k excited outcomes in ``shots``.

    Returns ``(beta_hat, boundary_hit)``. ``template.beta`` is ignored.
    """
    return PopulationLikelihood(template, window).mle(k, shots)


@dataclass(frozen=True)
class ExperimentSpec:
    true_params: ModelParams
    shots: int
    reps: int
    seed: int
    beta_window: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.shots < 1 or self.reps < 1:
            raise DomainError("shots and reps must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        lo, hi = self.window
        if not (lo < self.true_params.beta < hi):
            raise DomainError("beta window must contain the true beta")

    @property
    def window(self) -> Tuple[float, float]:
        if self.beta_window is not None:
            return self.beta_window
        b = self.true_params.beta
        return (b / 4, 4 * b)


@dataclass(frozen=True)
class EstimationReport:
    estimates: np.ndarray
    boundary: np.ndarray
    counts: np.ndarray
    mean: float
    variance: float
    fisher: float
    cr_ratio: float
    shots: int
    metadata: Dict = field(default_factory=dict)

    @property
    def boundary_hits(self) -> int:
        return int(self.boundary.sum())

    @property
    def accepted(self) -> int:
        return int((~self.boundary).sum())

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.variance / self.accepted) if self.accepted else math.nan


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> EstimationReport:
    """R repetitions of M shots each; boundary-censored estimates are excluded from the moments."""
    truth = spec.true_params
    like = PopulationLikelihood(truth, spec.window)
    state = probe_state(truth)
    fisher = float(fisher_population(state))

    def one(rep):
        k = _draw(state.rho_ee, spec.shots, rep_stream(spec.seed, rep))
        est, hit = like.mle(k, spec.shots)
        return k, est, hit

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(one, range(spec.reps)))
    else:
        out = [one(r) for r in range(spec.reps)]
    counts = np.array([k for k, _, _ in out])
    est = np.array([e for _, e, _ in out])
    hit = np.array([h for _, _, h in out], dtype=bool)
    kept = est[~hit]
    mean = float(kept.mean()) if kept.size else math.nan
    var = float(kept.var(ddof=1)) if kept.size > 1 else math.nan
    meta = {
        "rng": RNG_NAME,
        "seed": spec.seed,
        "beta_window": list(like.window),
        "likelihood_grid": len(like.grid),
        "shots": spec.shots,
        "reps": spec.reps,
    }
    return EstimationReport(
        estimates=est, boundary=hit, counts=counts, mean=mean, variance=var,
        fisher=fisher, cr_ratio=var * spec.shots * fisher, shots=spec.shots, metadata=meta,
    )
