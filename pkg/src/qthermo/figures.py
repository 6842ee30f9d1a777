"""Named recipes reproducing the published figure datasets, with their shape checks.

Every recipe has the caption parameters as defaults; keyword overrides change
grids or fixed parameters. ``check_figure`` turns the qualitative caption
claims into assertions on a dataset.
"""
from __future__ import annotations

import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import __version__
from .dataset import DatasetFile
from .metrics import fisher_population, qfi_bloch
from .optimize import default_beta_grid, objective_over_tau, optimum_curve
from .probe import DomainError, ModelParams, TruncationPolicy, bloch, probe_state

PI = math.pi
THETAS = (("pi", PI), ("0.95pi", 0.95 * PI), ("0", 0.0))
GAMMAS = (("0", 0.0), ("1", 1.0), ("1.5", 1.5))
DEC_BS = (("0", 0.0), ("1e-05", 1e-5), ("0.0001", 1e-4))
BETAS_FIG2 = (("15", 15.0), ("10", 10.0), ("5", 5.0), ("1", 1.0))


def _tau_cuts(eps):
    return (("pi/2", PI / 2), ("pi/2+eps", PI / 2 + eps), ("pi", PI), ("pi+eps", PI + eps))


def _meta(name, **params):
    trunc = TruncationPolicy()
    return {
        "figure": name,
        "params": params,
        "truncation": {"tail_eps": trunc.tail_eps, "n_cap": trunc.n_cap},
        "tool_version": __version__,
    }


def _tau_panel(name, objective_names, beta, thetas, tau_range, points, gamma=0.0,
               dec_a=0.0, dec_b=0.0):
    taus = np.linspace(tau_range[0], tau_range[1], points)
    cols = {"tau": taus}
    for obj in objective_names:
        for label, theta in thetas:
            p = ModelParams(beta=beta, theta=theta, gamma=gamma, dec_a=dec_a, dec_b=dec_b)
            cols[f"{obj}_theta={label}"] = objective_over_tau(obj, p, taus)
    meta = _meta(name, beta=beta, gamma=gamma, dec_a=dec_a, dec_b=dec_b,
                 thetas={k: v for k, v in thetas}, tau_range=list(tau_range), points=points)
    return DatasetFile.from_columns(cols, meta)


def _theta_panel(name, with_qfi, beta, eps, points, gamma=0.0):
    thetas = np.linspace(0.0, PI, points)
    cols = {"theta": thetas}
    for label, tau in _tau_cuts(eps):
        fi, qfi = [], []
        for th in thetas:
            ps = probe_state(ModelParams(beta=beta, theta=float(th), tau=tau, gamma=gamma))
            fi.append(fisher_population(ps))
            if with_qfi:
                qfi.append(qfi_bloch(bloch(ps)))
        if with_qfi:
            cols[f"qfi_tau={label}"] = qfi
        cols[f"fi_tau={label}"] = fi
    meta = _meta(name, beta=beta, gamma=gamma, eps=eps, points=points,
                 taus={k: v for k, v in _tau_cuts(eps)})
    return DatasetFile.from_columns(cols, meta)


def fig1a(beta=10.0, tau_range=(0.0, PI), points=2001, gamma=0.0):
    return _tau_panel("fig1a", ["fi"], beta, THETAS, tau_range, points, gamma)


def fig1b(beta=10.0, eps=0.01, points=1001, gamma=0.0):
    return _theta_panel("fig1b", False, beta, eps, points, gamma)


def fig2(tau_range=(0.0, 2 * PI), points=2001, gamma=0.0):
    taus = np.linspace(tau_range[0], tau_range[1], points)
    cols = {"tau": taus}
    for label, beta in BETAS_FIG2:
        cols[f"fi_beta={label}"] = objective_over_tau("fi", ModelParams(beta=beta, theta=PI, gamma=gamma), taus)
    meta = _meta("fig2", theta=PI, gamma=gamma, betas={k: v for k, v in BETAS_FIG2},
                 tau_range=list(tau_range), points=points)
    return DatasetFile.from_columns(cols, meta)


def fig3(beta_range=(1.0, 15.0), beta_points=60, tau_range=(0.0, 2 * PI), workers=1):
    betas = default_beta_grid(beta_points, *beta_range)
    cols = {"beta": betas}
    taumax = {}
    for label, gamma in GAMMAS:
        fm, tm = optimum_curve(betas, ModelParams(beta=1.0, theta=PI, gamma=gamma),
                               interval=tuple(tau_range), workers=workers)
        cols[f"fm_gamma={label}"] = fm
        taumax[f"taumax_gamma={label}"] = tm
    cols.update(taumax)
    meta = _meta("fig3", theta=PI, gammas={k: v for k, v in GAMMAS}, beta_range=list(beta_range),
                 beta_points=beta_points, tau_range=list(tau_range))
    return DatasetFile.from_columns(cols, meta)


def fig4a(beta=10.0, tau_range=(0.0, PI), points=2001, gamma=0.0):
    return _tau_panel("fig4a", ["qfi", "fi"], beta, THETAS, tau_range, points, gamma)


def fig4b(beta=10.0, eps=0.01, points=1001, gamma=0.0):
    return _theta_panel("fig4b", True, beta, eps, points, gamma)


def fig5a(beta=10.0, dec_a=0.1, dec_b=1e-5, tau_range=(0.0, 2 * PI), points=2001):
    return _tau_panel("fig5a", ["fi"], beta, THETAS, tau_range, points, 0.0, dec_a, dec_b)


def fig5b(dec_a=0.1, beta_range=(1.0, 15.0), beta_points=60, tau_range=(0.0, 2 * PI), workers=1):
    # one common window for all b so the maxima are comparable
    betas = default_beta_grid(beta_points, *beta_range)
    cols = {"beta": betas}
    taumax = {}
    for label, b in DEC_BS:
        fm, tm = optimum_curve(betas, ModelParams(beta=1.0, theta=PI, dec_a=dec_a, dec_b=b),
                               interval=tuple(tau_range), workers=workers)
        cols[f"fm_b={label}"] = fm
        taumax[f"taumax_b={label}"] = tm
    cols.update(taumax)
    meta = _meta("fig5b", theta=PI, dec_a=dec_a, dec_bs={k: v for k, v in DEC_BS},
                 beta_range=list(beta_range), beta_points=beta_points, tau_range=list(tau_range))
    return DatasetFile.from_columns(cols, meta)


RECIPES: Dict[str, Callable[..., DatasetFile]] = {
    "fig1a": fig1a, "fig1b": fig1b, "fig2": fig2, "fig3": fig3,
    "fig4a": fig4a, "fig4b": fig4b, "fig5a": fig5a, "fig5b": fig5b,
}


def build_figure(name: str, **overrides) -> DatasetFile:
    if name not in RECIPES:
        raise DomainError(f"unknown figure {name!r}; choose from {sorted(RECIPES)}")
    recipe = RECIPES[name]
    allowed = recipe.__code__.co_varnames[: recipe.__code__.co_argcount]
    bad = set(overrides) - set(allowed)
    if bad:
        raise DomainError(f"{name} does not accept {sorted(bad)}; allowed: {list(allowed)}")
    return recipe(**overrides)


# -- shape checks -----------------------------------------------------------

def _argmax(ds, x, y):
    return float(ds.column(x)[np.argmax(ds.column(y))])


def _spacing(ds, x):
    v = ds.column(x)
    return float(v[1] - v[0])


def _fwhm(x, y):
    """Width of the contiguous region around the maximum where y >= max / 2."""
    i = int(np.argmax(y))
    half = y[i] / 2
    lo = i
    while lo > 0 and y[lo - 1] >= half:
        lo -= 1
    hi = i
    while hi < len(y) - 1 and y[hi + 1] >= half:
        hi += 1
    return float(x[hi] - x[lo])


def _info_le(fi, qfi):
    return bool(np.all(fi <= qfi + 1e-9 * np.maximum(1.0, qfi)))


def _close(a, b, rtol=1e-9):
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(np.abs(b), 1e-300)))


def _strictly_dec(v):
    return bool(np.all(np.diff(v) < 0))


def check_figure(name: str, ds: DatasetFile) -> List[Tuple[str, bool]]:
    """Caption claims as (description, passed) pairs."""
    c = ds.column
    out = []
    if name in ("fig1a", "fig4a"):
        obj = "fi" if name == "fig1a" else "qfi"
        h = _spacing(ds, "tau")
        pi_col, mid, zero = (f"{obj}_theta={k}" for k in ("pi", "0.95pi", "0"))
        out.append(("theta=pi maximum at tau=pi/2",
                    abs(_argmax(ds, "tau", pi_col) - PI / 2) <= h))
        out.append(("theta=pi maximum is the global one",
                    bool(c(pi_col).max() >= max(c(mid).max(), c(zero).max()))))
        out.append(("theta=0 maximum at tau=pi within 1e-2",
                    abs(_argmax(ds, "tau", zero) - PI) <= 1e-2))
        if name == "fig1a":
            out.append(("theta=0 peak sharper than theta=pi peak",
                        _fwhm(c("tau"), c(zero)) < _fwhm(c("tau"), c(pi_col))))
        else:
            out.append(("QFI equals FI at theta=pi", _close(c("qfi_theta=pi"), c("fi_theta=pi"))))
            out.append(("QFI >= FI for every preparation",
                        all(_info_le(c(f"fi_theta={k}"), c(f"qfi_theta={k}")) for k, _ in THETAS)))
            i = int(np.argmin(np.abs(c("tau") - PI / 2)))
            out.append(("QFI > FI at theta=0.95pi, tau=pi/2",
                        bool(c("qfi_theta=0.95pi")[i] > c("fi_theta=0.95pi")[i])))
            out.append(("QFI profile smoother than FI for theta=0.95pi",
                        _fwhm(c("tau"), c("qfi_theta=0.95pi")) > _fwhm(c("tau"), c("fi_theta=0.95pi"))))
    elif name in ("fig1b", "fig4b"):
        out.append(("FI at tau=pi/2 decreases monotonically as theta departs from pi",
                    bool(np.all(np.diff(c("fi_tau=pi/2")) >= 0))))
        fi_cols = [f"fi_tau={k}" for k, _ in _tau_cuts(0.0)]
        best = max(c(k).max() for k in fi_cols)
        out.append(("global FI maximum at (theta, tau) = (pi, pi/2)",
                    bool(c("fi_tau=pi/2")[-1] == best)))
        if name == "fig4b":
            out.append(("QFI >= FI on every cut",
                        all(_info_le(c(f"fi_tau={k}"), c(f"qfi_tau={k}")) for k, _ in _tau_cuts(0.0))))
            out.append(("QFI equals FI at theta=pi",
                        all(_close(c(f"qfi_tau={k}")[-1:], c(f"fi_tau={k}")[-1:]) for k, _ in _tau_cuts(0.0))))
            th = c("theta")
            out.append(("theta=0 maximum on the tau=pi cut broader for QFI than FI",
                        _fwhm(th, c("qfi_tau=pi")) > _fwhm(th, c("fi_tau=pi"))))
    elif name == "fig2":
        maxima = [c(f"fi_beta={k}").max() for k in ("1", "5", "10", "15")]
        out.append(("maxima ordered beta=1 > 5 > 10 > 15", _strictly_dec(np.array(maxima))))
        out.append(("maximum comes earlier at higher temperature",
                    _argmax(ds, "tau", "fi_beta=1") < _argmax(ds, "tau", "fi_beta=15")))
        out.append(("beta=15 maximum at tau=pi/2",
                    abs(_argmax(ds, "tau", "fi_beta=15") - PI / 2) <= _spacing(ds, "tau")))
    elif name == "fig3":
        beta = c("beta")
        fm = [c(f"fm_gamma={k}") for k, _ in GAMMAS]
        tm = [c(f"taumax_gamma={k}") for k, _ in GAMMAS]
        out.append(("F_M decreases with beta for every detuning", all(_strictly_dec(f) for f in fm)))
        out.append(("F_M decreases with detuning at every beta",
                    bool(np.all((fm[0] > fm[1]) & (fm[1] > fm[2])))))
        out.append(("tau_max decreases with detuning at every beta",
                    bool(np.all((tm[0] > tm[1]) & (tm[1] > tm[2])))))
        out.append(("tau_max plateaus at pi/2 for beta >= 10 at resonance",
                    bool(np.all(np.abs(tm[0][beta >= 10] - PI / 2) <= 1e-2))))
        out.append(("tau_max comes earlier at high temperature", all(t[0] < t[-1] for t in tm)))
        out.append(("F_M curves nearly superposed (within a factor 2)",
                    bool(np.all(fm[0] / fm[2] <= 2.0))))
    elif name == "fig5a":
        tau = c("tau")
        pi_col = c("fi_theta=pi")
        unitary = objective_over_tau("fi", ModelParams(beta=ds.metadata["params"]["beta"], theta=PI), tau)
        out.append(("theta=pi maximum still near tau=pi/2", abs(_argmax(ds, "tau", "fi_theta=pi") - PI / 2) <= 0.1))
        out.append(("maximum slightly below the unitary one",
                    bool(0.5 * unitary.max() < pi_col.max() < unitary.max())))
        out.append(("FI decays at later times", bool(pi_col[tau > PI].max() < pi_col[tau <= PI].max())))
    elif name == "fig5b":
        fm = [c(f"fm_b={k}") for k, _ in DEC_BS]
        out.append(("F_M decreases with b at every beta", bool(np.all((fm[0] > fm[1]) & (fm[1] > fm[2])))))
        out.append(("decoherence negligible at high temperature", bool(fm[2][0] / fm[0][0] >= 0.99)))
        out.append(("decoherence more relevant at low temperature",
                    bool(fm[2][-1] / fm[0][-1] < fm[2][0] / fm[0][0])))
    else:
        raise DomainError(f"unknown figure {name!r}")
    return [(desc, bool(ok)) for desc, ok in out]
