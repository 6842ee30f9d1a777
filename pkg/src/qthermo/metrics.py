"""Fisher information of the population measurement and quantum Fisher information."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .probe import (BlochVector, ProbeState, TruncationPolicy, bloch,
                    choose_truncation, _check_beta)

PURE_TOL = 1e-12        # on 1 - |r|^2
DEGENERATE_TOL = 1e-12  # on |r|, for the Bloch form
EIGEN_GAP_TOL = 1e-8    # on rho_+ - rho_-, for the eigen/SLD forms


class NumericalInconsistencyError(ArithmeticError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class FisherReport:
    fi: float
    qfi: float
    crb: float
    qcrb: float
    degenerate: bool
    pure: bool
    n_used: int = 0
    truncated: bool = False

    def bounds(self, shots: int = 1):
        """Cramer-Rao bounds on Var(beta) for ``shots`` independent measurements."""
        return self.crb / shots, self.qcrb / shots


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _info_term(dp, p):
    # 0/0 -> 0: the model pins p at 0 or 1 only where its derivative vanishes
    dp = np.asarray(dp, dtype=float)
    p = np.asarray(p, dtype=float)
    safe = np.where(p > 0, p, 1.0)
    out = np.where(p > 0, dp * dp / safe, np.where(dp == 0, 0.0, np.inf))
    return out


def fisher_population(ps: ProbeState):
    """F = (d p_e)^2 / p_e + (d p_g)^2 / p_g for the sigma_z measurement.

    Returns ``inf`` where a probability is 0 or 1 with a nonzero derivative.
    """
    d = ps.d_rho_ee
    return _scalar(_info_term(d, ps.rho_ee) + _info_term(d, ps.rho_gg))


def qfi_bloch(bv: BlochVector):
    """G = |dr|^2 + (r.dr)^2 / (1 - |r|^2), with the pure and degenerate limits."""
    dr2 = np.sum(bv.dr * bv.dr, axis=0)
    m = np.asarray(bv.mixedness, dtype=float)
    rd = np.asarray(bv.r_dot_dr, dtype=float)
    norm = np.asarray(bv.norm)
    near_pure = m < PURE_TOL
    if np.any(near_pure & (np.abs(rd) >= 1e-8)):
        raise NumericalInconsistencyError(
            "nearly pure state with |r.dr| >= 1e-8: |r| must be constant on pure families")
    mixed_term = np.where(m > 0, rd * (rd / np.where(m > 0, m, 1.0)), 0.0)  # no underflow
    out = np.where(norm < DEGENERATE_TOL, dr2, dr2 + mixed_term)
    return _scalar(out)


def _eigensystem(ps: ProbeState):
    a, d, b = float(ps.rho_ee), float(ps.rho_gg), complex(ps.rho_eg)
    gap = math.hypot(a - d, 2.0 * abs(b))
    if gap <= EIGEN_GAP_TOL:
        raise PreconditionError(
            f"degenerate spectrum (gap {gap:.3g}); use qfi_bloch instead")
    lam_p = 0.5 * (a + d + gap)
    lam_m = 0.25 * float(ps.mixedness) / lam_p  # det / lam_p, accurate for tiny lam_m
    if a >= d:
        v = np.array([lam_p - d, np.conj(b)], dtype=complex)
    else:
        v = np.array([b, lam_p - a], dtype=complex)
    v /= np.linalg.norm(v)
    u = np.array([-np.conj(v[1]), np.conj(v[0])])
    return lam_p, max(lam_m, 0.0), v, u


def _eigval_derivatives(ps, lam_p, lam_m):
    # r+ r- = m / 4 and r+ + r- = 1 give d r- = (dm / 4) / (r+ - r-); this stays
    # accurate when <-|d rho|-> would cancel for a nearly pure state
    d_lm = 0.25 * float(ps.d_mixedness) / (lam_p - lam_m)
    return -d_lm, d_lm


def qfi_eigen(ps: ProbeState) -> float:
    """G from the spectral decomposition rho = r+ |+><+| + r- |-><-|.

    Eigenvector derivatives come from first-order perturbation theory,
    <-|d+> = <-|d rho|+> / (r+ - r-); eigenvalue derivatives from the
    accumulated mixedness.
    """
    lam_p, lam_m, vp, vm = _eigensystem(ps)
    drho = ps.d_matrix()
    d_lp, d_lm = _eigval_derivatives(ps, lam_p, lam_m)
    off = np.vdot(vm, drho @ vp)
    split = lam_p - lam_m
    overlap_sq = abs(off) ** 2 / split ** 2   # |<-|d+>|^2 == |<+|d->|^2
    kappa = split ** 2 / (lam_p + lam_m)
    g = d_lp * (d_lp / lam_p) + 2.0 * kappa * (2.0 * overlap_sq)
    if lam_m > 0:
        g += d_lm * (d_lm / lam_m)
    return float(g)


@dataclass(frozen=True)
class SldOperator:
    eigvals: tuple
    sld_matrix: np.ndarray

    def residual(self, ps: ProbeState) -> float:
        """Norm of (L rho + rho L) / 2 - d rho."""
        rho, L = ps.matrix(), self.sld_matrix
        return float(np.linalg.norm(0.5 * (L @ rho + rho @ L) - ps.d_matrix()))


def sld(ps: ProbeState) -> SldOperator:
    """Symmetric logarithmic derivative L_beta in the {|e>, |g>} basis."""
    lam_p, lam_m, vp, vm = _eigensystem(ps)
    drho = ps.d_matrix()
    Pp = np.outer(vp, vp.conj())
    Pm = np.outer(vm, vm.conj())
    d_lp, d_lm = _eigval_derivatives(ps, lam_p, lam_m)
    L = d_lp / lam_p * Pp
    if lam_m > 0:
        L = L + d_lm / lam_m * Pm
    cross = np.vdot(vp, drho @ vm) * np.outer(vp, vm.conj())
    L = L + 2.0 / (lam_p + lam_m) * (cross + cross.conj().T)
    return SldOperator(eigvals=(lam_p, lam_m), sld_matrix=0.5 * (L + L.conj().T))


def rho_plus_closed_form(beta: float, tau: float, gamma: float,
                         trunc: TruncationPolicy = TruncationPolicy()) -> float:
    """Excited population for a ground-state preparation, summed independently.

    sum_n p_n sin^2(sqrt(gamma^2 + 4n) tau / 2) n / (n + gamma^2 / 4)
    """
    _check_beta(beta)
    n_max, _ = choose_truncation(beta, trunc)
    q = -math.expm1(-beta)
    terms = []
    for n in range(1, n_max + 1):
        w = math.exp(-beta * n) * q
        terms.append(w * math.sin(math.sqrt(gamma * gamma + 4 * n) * tau / 2) ** 2
                     * n / (n + gamma * gamma / 4))
    return math.fsum(terms)


def fisher_report(ps: ProbeState) -> FisherReport:
    fi = float(fisher_population(ps))
    bv = bloch(ps)
    qfi = float(qfi_bloch(bv))
    return FisherReport(
        fi=fi,
        qfi=qfi,
        crb=1.0 / fi if fi > 0 else math.inf,
        qcrb=1.0 / qfi if qfi > 0 else math.inf,
        degenerate=bool(bv.norm < DEGENERATE_TOL),
        pure=bool(bv.mixedness < PURE_TOL),
        n_used=ps.n_used,
        truncated=ps.truncated,
    )
