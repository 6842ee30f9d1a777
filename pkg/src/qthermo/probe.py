"""Qubit probe state after Jaynes-Cummings coupling to a thermal phonon mode.

Everything is dimensionless: ``beta`` is the inverse temperature in units of
the phonon quantum, ``tau`` the interaction time and ``gamma`` the detuning in
units of the coupling, ``dec_b`` the decoherence scale in the same units.

The probe state is a thermal mixture over Fock states ``n`` of per-manifold
qubit states whose matrix elements do not depend on ``beta``; the
``beta``-derivative therefore only acts on the thermal weights and is computed
exactly alongside the state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .summation import compensated_sum


class DomainError(ValueError):
    """Parameter outside the domain of the model."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Adaptive Fock cutoff: smallest N with p_N (N+1)^2 < tail_eps, at most n_cap."""

    tail_eps: float = 1e-14
    n_cap: int = 4096

    def __post_init__(self):
        if not (self.tail_eps > 0):
            raise DomainError(f"tail_eps must be positive, got {self.tail_eps}")
        if int(self.n_cap) != self.n_cap or self.n_cap < 1:
            raise DomainError(f"n_cap must be a positive integer, got {self.n_cap}")


@dataclass(frozen=True)
class ModelParams:
    beta: float
    theta: float = math.pi
    phi: float = 0.0
    tau: float = 0.0
    gamma: float = 0.0
    dec_a: float = 0.0
    dec_b: float = 0.0
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        _check_beta(self.beta)
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < 2 * math.pi):
            raise DomainError(f"phi must lie in [0, 2pi), got {self.phi}")
        if not (0.0 <= self.tau < math.inf):
            raise DomainError(f"tau must be finite and >= 0, got {self.tau}")
        if not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma}")
        if not (0.0 <= self.dec_a <= 1.0):
            raise DomainError(f"dec_a must lie in [0, 1], got {self.dec_a}")
        if not (0.0 <= self.dec_b < math.inf):
            raise DomainError(f"dec_b must be finite and >= 0, got {self.dec_b}")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ProbeState:
    """Qubit state in the {|e>, |g>} basis and its beta-derivative.

    Fields may be floats or arrays over a batch of interaction times.
    ``rho_gg`` and ``mixedness`` (= 1 - |r|^2 = 4 det rho) are accumulated
    from non-negative per-manifold terms when the state comes from the model,
    which keeps them accurate when the excited population or the distance to
    a pure state is far below machine epsilon. If omitted they are derived
    from the other fields.
    """

    rho_ee: float
    rho_eg: complex
    d_rho_ee: float = 0.0
    d_rho_eg: complex = 0.0
    n_used: int = 0
    rho_gg: Optional[float] = None
    mixedness: Optional[float] = None
    d_mixedness: Optional[float] = None
    truncated: bool = False

    def __post_init__(self):
        if self.rho_gg is None:
            object.__setattr__(self, "rho_gg", 1.0 - self.rho_ee)
        if self.mixedness is None:
            m = 4.0 * (self.rho_ee * self.rho_gg - np.abs(self.rho_eg) ** 2)
            object.__setattr__(self, "mixedness", m)
        if self.d_mixedness is None:
            dm = 4.0 * (self.d_rho_ee * (self.rho_gg - self.rho_ee)
                        - 2.0 * np.real(np.conj(self.rho_eg) * self.d_rho_eg))
            object.__setattr__(self, "d_mixedness", dm)

    @property
    def d_rho_gg(self):
        return -self.d_rho_ee

    def matrix(self) -> np.ndarray:
        return np.array([[self.rho_ee, self.rho_eg],
                         [np.conj(self.rho_eg), self.rho_gg]], dtype=complex)

    def d_matrix(self) -> np.ndarray:
        return np.array([[self.d_rho_ee, self.d_rho_eg],
                         [np.conj(self.d_rho_eg), -self.d_rho_ee]], dtype=complex)


@dataclass(frozen=True)
class BlochVector:
    """r = (2 Re rho_eg, -2 Im rho_eg, rho_ee - rho_gg) and dr = d r / d beta.

    ``mixedness`` is 1 - |r|^2 and ``r_dot_dr`` is r . dr; both default to
    their direct evaluation from ``r`` and ``dr``.
    """

    r: np.ndarray
    dr: np.ndarray
    mixedness: Optional[float] = None
    r_dot_dr: Optional[float] = None

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        dr = np.asarray(self.dr, dtype=float)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "dr", dr)
        if self.mixedness is None:
            object.__setattr__(self, "mixedness", 1.0 - np.sum(r * r, axis=0))
        if self.r_dot_dr is None:
            object.__setattr__(self, "r_dot_dr", np.sum(r * dr, axis=0))

    @property
    def norm(self):
        return np.sqrt(np.sum(self.r * self.r, axis=0))

    def to_probe_state(self) -> ProbeState:
        rx, ry, rz = self.r
        drx, dry, drz = self.dr
        return ProbeState(
            rho_ee=0.5 * (1.0 + rz),
            rho_eg=0.5 * (rx - 1j * ry),
            d_rho_ee=0.5 * drz,
            d_rho_eg=0.5 * (drx - 1j * dry),
            rho_gg=0.5 * (1.0 - rz),
            mixedness=self.mixedness,
            d_mixedness=-2.0 * self.r_dot_dr,
        )


def _check_beta(beta):
    if not (0.0 < beta < math.inf):
        raise DomainError(f"beta must be positive and finite, got {beta}")


def thermal_weight(n, beta):
    """Boltzmann weight p_n = e^{-beta n} (1 - e^{-beta}) of Fock state n."""
    _check_beta(beta)
    n = np.asarray(n)
    if np.any(n < 0):
        raise DomainError("Fock index must be nonnegative")
    out = np.exp(-beta * n) * -math.expm1(-beta)
    return float(out) if out.ndim == 0 else out


def d_thermal_weight(n, beta):
    """d p_n / d beta = p_n (e^{-beta} / (1 - e^{-beta}) - n)."""
    p = thermal_weight(n, beta)
    return p * (1.0 / math.expm1(beta) - np.asarray(n))


def rabi_half_freq(n, gamma):
    """theta_n = sqrt(gamma^2 + 4(n+1)) / 2 for the {|e,n>, |g,n+1>} manifold."""
    n = np.asarray(n)
    if np.any(n < -1):
        raise DomainError("manifold index must be >= -1")
    out = 0.5 * np.sqrt(gamma * gamma + 4.0 * (n + 1))
    return float(out) if out.ndim == 0 else out


def choose_truncation(beta: float, policy: TruncationPolicy = TruncationPolicy()):
    """Return ``(n_max, capped)``; terms n = 0..n_max are summed."""
    _check_beta(beta)
    n = np.arange(policy.n_cap + 1)
    log_w = -beta * n + math.log(-math.expm1(-beta)) + 2.0 * np.log1p(n)
    ok = np.flatnonzero(log_w < math.log(policy.tail_eps))
    if ok.size == 0:
        return policy.n_cap, True
    return int(ok[0]), False


def _ratio(num, den):
    """num / den with 0 where den == 0 (only hit by the n=0, gamma=0 vacuum term)."""
    den = np.broadcast_to(den, np.broadcast(num, den).shape)
    return np.divide(num, den, out=np.zeros(den.shape), where=den != 0)


def _evaluate(p: ModelParams, tau, decohere: bool) -> ProbeState:
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))[:, None]
    n_max, capped = choose_truncation(p.beta, p.trunc)
    n = np.arange(n_max + 1, dtype=float)
    w = np.exp(-p.beta * n) * -math.expm1(-p.beta)
    dw = w * (1.0 / math.expm1(p.beta) - n)

    g2 = p.gamma * p.gamma
    th = 0.5 * np.sqrt(g2 + 4.0 * (n + 1.0))  # manifold {|e,n>, |g,n+1>}
    thm = 0.5 * np.sqrt(g2 + 4.0 * n)          # manifold {|e,n-1>, |g,n>}
    r = p.gamma / (2.0 * th)
    rm = _ratio(np.full_like(thm, p.gamma), 2.0 * thm)

    s, c = np.sin(th * tau_arr), np.cos(th * tau_arr)
    sm, cm = np.sin(thm * tau_arr), np.cos(thm * tau_arr)
    # |e,n> -> A|e,n> + B|g,n+1>,  |g,n> -> C|e,n-1> + D|g,n>
    a_sq = c * c + (r * r) * (s * s)
    b_sq = (1.0 - r * r) * (s * s)
    c_sq = _ratio(n * (sm * sm), thm * thm)
    d_sq = cm * cm + (rm * rm) * (sm * sm)
    # A conj(D) = X + iY
    x_n = c * cm - (r * rm) * (s * sm)
    y_n = -(r * s * cm + rm * c * sm)

    ce = 0.5 * (1.0 + math.cos(p.theta))  # cos^2(theta/2)
    cg = 0.5 * (1.0 - math.cos(p.theta))  # sin^2(theta/2)
    sin_t = math.sin(p.theta)

    if decohere and p.dec_b > 0.0:
        rate = p.dec_b * (1.0 + n) ** p.dec_a * tau_arr
        e = np.exp(-rate)
        half = -0.5 * np.expm1(-rate)
        one_minus_e2 = -np.expm1(-2.0 * rate)
    else:
        e = np.ones_like(a_sq)
        half = np.zeros_like(a_sq)
        one_minus_e2 = np.zeros_like(a_sq)

    terms = np.stack([a_sq, c_sq, b_sq, d_sq, x_n, y_n]) * e
    terms = np.concatenate([terms, half[None] * np.ones_like(a_sq)])
    # sum_n dp_n = 0, so derivatives are taken relative to the n = 0 element;
    # this makes them exactly zero whenever all manifolds agree (e.g. tau = 0)
    sums = compensated_sum(np.concatenate([terms * w, (terms - terms[..., :1]) * dw]))
    S, dS = sums[:7], sums[7:]

    rho_ee = ce * S[0] + cg * S[1] + S[6]
    rho_gg = ce * S[2] + cg * S[3] + S[6]
    # differentiate the smaller population: its terms carry full relative precision
    d_from_ee = ce * dS[0] + cg * dS[1] + dS[6]
    d_from_gg = ce * dS[2] + cg * dS[3] + dS[6]
    d_rho_ee = np.where(rho_ee <= rho_gg, d_from_ee, -d_from_gg)
    phase = complex(math.cos(p.phi), -math.sin(p.phi))
    coh = 0.5 * sin_t * (S[4] + 1j * S[5])
    d_coh = 0.5 * sin_t * (dS[4] + 1j * dS[5])

    # 1 - |R|^2 = sum_n p_n [(1 - |r_n|^2) + |r_n - R|^2] with every term >= 0
    det_n = (ce * ce) * a_sq * b_sq + (ce * cg) * b_sq * c_sq + (cg * cg) * c_sq * d_sq
    impurity_n = one_minus_e2 + (e * e) * (4.0 * det_n)
    z_n = e * (ce * (a_sq - b_sq) + cg * (c_sq - d_sq))
    wx_n = e * sin_t * x_n
    wy_n = e * sin_t * y_n
    # spread about the weighted mean, measured from the n = 0 vector so that
    # identical manifolds contribute exactly zero (the weights do not sum to
    # exactly one in floating point)
    dev = np.stack([z_n, wx_n, wy_n])
    dev = dev - dev[..., :1]
    mean = compensated_sum(dev * w) / compensated_sum(w)
    spread_n = np.sum((dev - mean[..., None]) ** 2, axis=0)
    q_n = impurity_n + spread_n
    mix = compensated_sum(np.stack([w * q_n, dw * (q_n - q_n[..., :1])]))

    out = dict(
        rho_ee=rho_ee, rho_eg=phase * coh, d_rho_ee=d_rho_ee, d_rho_eg=phase * d_coh,
        rho_gg=rho_gg, mixedness=mix[0], d_mixedness=mix[1],
    )
    if np.ndim(tau) == 0:
        out = {k: v[0].item() for k, v in out.items()}
    return ProbeState(n_used=n_max, truncated=capped, **out)


def probe_state_unitary(p: ModelParams) -> ProbeState:
    """Probe state under the ideal Jaynes-Cummings evolution (``dec_b`` ignored)."""
    return _evaluate(p, p.tau, decohere=False)


def probe_state_decohered(p: ModelParams) -> ProbeState:
    """Probe state with non-dissipative decoherence at rates b (1+n)^a.

    Each manifold is damped towards the maximally mixed state by
    exp(-b (1+n)^a tau); ``dec_b == 0`` reproduces the unitary result exactly.
    """
    return _evaluate(p, p.tau, decohere=True)


def probe_state(p: ModelParams) -> ProbeState:
    return probe_state_decohered(p)


def probe_states_over_tau(p: ModelParams, taus) -> ProbeState:
    """Vectorised probe states for an array of interaction times (p.tau unused)."""
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1:
        raise DomainError("taus must be one-dimensional")
    if np.any(~np.isfinite(taus)) or np.any(taus < 0):
        raise DomainError("taus must be finite and >= 0")
    return _evaluate(p, taus, decohere=True)


def bloch(ps: ProbeState) -> BlochVector:
    """Bloch vector and its beta-derivative, carrying the accurate mixedness."""
    r = np.array([2.0 * np.real(ps.rho_eg), -2.0 * np.imag(ps.rho_eg),
                  ps.rho_ee - ps.rho_gg])
    dr = np.array([2.0 * np.real(ps.d_rho_eg), -2.0 * np.imag(ps.d_rho_eg),
                   2.0 * ps.d_rho_ee])
    return BlochVector(r=r, dr=dr, mixedness=ps.mixedness, r_dot_dr=-0.5 * ps.d_mixedness)
