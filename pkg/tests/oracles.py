"""Independent reference implementations used only by the tests.

``propagated_state`` builds the full qubit-oscillator Hamiltonian, exponentiates
it and takes the partial trace, so it shares no formulas with the package.
``direct_state`` sums the per-manifold amplitudes term by term in x87 extended
precision (64-bit mantissa), which makes central differences at h = 1e-6 beta
accurate well below the tolerances the tests check.
"""
import math

import numpy as np
from scipy.linalg import expm

from qthermo import ModelParams

LD = np.longdouble


def propagated_state(beta, theta, phi, tau, gamma, n_levels=60):
    """Qubit density matrix [[ee, eg], [ge, gg]] by brute-force propagation."""
    a = np.diag(np.sqrt(np.arange(1, n_levels)), 1)
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])
    sz = np.diag([1.0, -1.0])
    eye = np.eye(n_levels)
    H = 0.5 * gamma * np.kron(sz, eye) + np.kron(sp, a) + np.kron(sp.T, a.T)
    U = expm(-1j * tau * H)
    psi = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    n = np.arange(n_levels)
    p = np.exp(-beta * n) * -math.expm1(-beta)
    rho = np.kron(np.outer(psi, psi.conj()), np.diag(p))
    out = U @ rho @ U.conj().T
    return out.reshape(2, n_levels, 2, n_levels).trace(axis1=1, axis2=3)


def _levels(beta):
    # tail e^{-beta N} (N+1)^2 below ~1e-30
    return int(min(8000, math.ceil(80.0 / float(beta)) + 20))


def direct_state(beta, theta, phi, tau, gamma, dec_a=0.0, dec_b=0.0, n_levels=None):
    """(rho_ee, rho_eg) from the defining sum over Fock manifolds, in long double.

    Each manifold contributes e_n rho^(n) + (1 - e_n) / 2 on the diagonal and
    e_n rho^(n) off the diagonal, with e_n = exp(-b (1 + n)^a tau).
    """
    beta, theta, phi, tau, gamma = (LD(x) for x in (beta, theta, phi, tau, gamma))
    N = n_levels or _levels(beta)
    n = np.arange(N, dtype=LD)
    p = np.exp(-beta * n) * -np.expm1(-beta)
    w = 0.5 * np.sqrt(gamma * gamma + 4 * (n + 1))    # manifold {e,n ; g,n+1}
    wm = 0.5 * np.sqrt(gamma * gamma + 4 * n)         # manifold {e,n-1 ; g,n}
    A_re, A_im = np.cos(w * tau), -gamma / (2 * w) * np.sin(w * tau)
    safe = np.where(wm > 0, wm, 1)
    D_re = np.where(wm > 0, np.cos(wm * tau), 1)
    D_im = np.where(wm > 0, gamma / (2 * safe) * np.sin(wm * tau), 0)
    C_sq = np.where(wm > 0, n / (safe * safe) * np.sin(wm * tau) ** 2, 0)
    c2, s2 = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
    ee_n = c2 * (A_re ** 2 + A_im ** 2) + s2 * C_sq
    # A * conj(D)
    x_n = A_re * D_re + A_im * D_im
    y_n = A_im * D_re - A_re * D_im
    e = np.exp(-LD(dec_b) * (1 + n) ** LD(dec_a) * tau)
    rho_ee = np.sum(p * (e * ee_n + (1 - e) / 2))
    pref = 0.5 * np.sin(theta)
    re = pref * np.sum(p * e * x_n)
    im = pref * np.sum(p * e * y_n)
    cphi, sphi = np.cos(LD(phi)), np.sin(LD(phi))
    # multiply by e^{-i phi}
    return rho_ee, (re * cphi + im * sphi, im * cphi - re * sphi)


def fd_derivative(beta, theta, phi, tau, gamma, dec_a=0.0, dec_b=0.0, rel_step=1e-6):
    """Central differences of (rho_ee, Re rho_eg, Im rho_eg) with h = rel_step * beta."""
    b = LD(beta)
    h = LD(rel_step) * b
    N = _levels(b - h)
    hi = direct_state(b + h, theta, phi, tau, gamma, dec_a, dec_b, N)
    lo = direct_state(b - h, theta, phi, tau, gamma, dec_a, dec_b, N)
    d_ee = (hi[0] - lo[0]) / (2 * h)
    d_re = (hi[1][0] - lo[1][0]) / (2 * h)
    d_im = (hi[1][1] - lo[1][1]) / (2 * h)
    return float(d_ee), complex(float(d_re), float(d_im))


def direct_qfi(rho, drho):
    """QFI from numpy's eigendecomposition: sum 2 |<i|drho|j>|^2 / (l_i + l_j)."""
    lam, vec = np.linalg.eigh(rho)
    m = vec.conj().T @ drho @ vec
    g = 0.0
    for i in range(2):
        for j in range(2):
            s = lam[i] + lam[j]
            if s > 1e-300:
                g += 2.0 * abs(m[i, j]) ** 2 / s
    return g


def random_params(n, seed=0, decoherence=True):
    """Random points over the physically relevant parameter box."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        out.append(ModelParams(
            beta=float(rng.uniform(0.1, 20.0)),
            theta=float(rng.uniform(0.0, math.pi)),
            phi=float(rng.uniform(0.0, 2 * math.pi)),
            tau=float(rng.uniform(0.0, 4 * math.pi)),
            gamma=float(rng.uniform(-1.5, 1.5)),
            dec_a=float(rng.uniform(0.0, 1.0)),
            dec_b=float(rng.choice([0.0, 1e-5, 1e-4])) if decoherence else 0.0,
        ))
    return out
