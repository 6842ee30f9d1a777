import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qthermo import DomainError, ModelParams, fisher_population, probe_state
from qthermo.estimation import (LIKELIHOOD_GRID, ExperimentSpec, IdentifiabilityError,
                                PopulationLikelihood, _draw, mle_beta, rep_stream, run_experiment,
                                sample_outcomes)

PI = math.pi
WORKING_POINT = ModelParams(beta=1.0, theta=PI, tau=PI / 2)


def test_sampling_extremes():
    stream = rep_stream(7, 0)
    ground = ModelParams(beta=50.0, theta=PI, tau=0.0)
    assert all(sample_outcomes(ground, 1000, stream) == 0 for _ in range(20))
    assert all(_draw(1.0, 1000, stream) == 1000 for _ in range(20))


def test_sampling_concentration():
    M = 10 ** 6
    k = _draw(0.3, M, rep_stream(11, 3))
    assert abs(k / M - 0.3) <= 5 * math.sqrt(0.3 * 0.7 / M)


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 10 ** 6))
@settings(max_examples=25)
def test_streams_are_reproducible(seed, rep):
    a = rep_stream(seed, rep).integers(0, 2 ** 62, size=4)
    b = rep_stream(seed, rep).integers(0, 2 ** 62, size=4)
    c = rep_stream(seed, rep + 1).integers(0, 2 ** 62, size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_mle_recovers_matching_probability():
    M = 10 ** 6
    p_true = probe_state(WORKING_POINT).rho_ee
    k = round(p_true * M)
    est, hit = mle_beta(k, M, WORKING_POINT, (0.25, 4.0))
    assert not hit
    assert est == pytest.approx(1.0, abs=1e-4)


def test_mle_zero_count_hits_upper_boundary():
    est, hit = mle_beta(0, 1000, WORKING_POINT, (0.25, 4.0))
    assert hit and est == 4.0


def test_mle_rejects_constant_probability():
    with pytest.raises(IdentifiabilityError):
        PopulationLikelihood(WORKING_POINT.with_(tau=0.0), (0.5, 2.0))


@pytest.mark.parametrize("window", [(0.0, 1.0), (2.0, 1.0), (1.0, math.inf)])
def test_likelihood_window_validation(window):
    with pytest.raises(DomainError):
        PopulationLikelihood(WORKING_POINT, window)


def test_mle_count_validation():
    like = PopulationLikelihood(WORKING_POINT, (0.5, 2.0))
    with pytest.raises(DomainError):
        like.mle(11, 10)


def test_median_error_scales_with_fisher_information():
    M = 10 ** 4
    like = PopulationLikelihood(WORKING_POINT, (0.25, 4.0))
    p = probe_state(WORKING_POINT).rho_ee
    ests = [like.mle(_draw(p, M, rep_stream(5, r)), M)[0] for r in range(60)]
    F = fisher_population(probe_state(WORKING_POINT))
    assert np.median(np.abs(np.array(ests) - 1.0)) <= 3 / math.sqrt(M * F)


@pytest.mark.parametrize("kw", [dict(shots=0), dict(reps=0), dict(seed=-1), dict(seed=2 ** 64),
                                dict(beta_window=(2.0, 3.0))])
def test_experiment_spec_validation(kw):
    base = dict(true_params=WORKING_POINT, shots=10, reps=10, seed=1)
    base.update(kw)
    with pytest.raises(DomainError):
        ExperimentSpec(**base)


def test_run_experiment_is_reproducible_and_schedule_independent():
    spec = ExperimentSpec(WORKING_POINT, shots=2000, reps=24, seed=99)
    a = run_experiment(spec)
    b = run_experiment(spec, workers=4)
    assert np.array_equal(a.estimates, b.estimates)
    assert np.array_equal(a.counts, b.counts)
    assert a.variance == b.variance and a.cr_ratio == b.cr_ratio
    assert a.variance >= 0
    assert a.metadata["likelihood_grid"] == LIKELIHOOD_GRID
    assert a.metadata["beta_window"] == [0.25, 4.0]
    assert "Philox" in a.metadata["rng"]


def test_efficiency_improves_with_shots():
    ratios = [run_experiment(ExperimentSpec(WORKING_POINT, shots=M, reps=300, seed=42)).cr_ratio
              for M in (10 ** 4, 10 ** 5)]
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1)
    assert 0.8 <= ratios[0] <= 1.3


def test_low_temperature_mostly_censored():
    rep = run_experiment(ExperimentSpec(WORKING_POINT.with_(beta=10.0), shots=10 ** 4, reps=100,
                                        seed=42))
    assert rep.boundary_hits >= 50
    assert rep.boundary_hits + rep.accepted == 100
    # P(k = 0) = (1 - p_e)^M
    p0 = (1 - probe_state(WORKING_POINT.with_(beta=10.0)).rho_ee) ** 10 ** 4
    assert p0 == pytest.approx(math.exp(-0.454), rel=0.01)
