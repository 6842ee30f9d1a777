import math

import numpy as np
import pytest

from qthermo import DomainError
from qthermo.dataset import serialize
from qthermo.figures import RECIPES, build_figure, check_figure

PI = math.pi
FAST = ["fig1a", "fig2", "fig4a", "fig5a"]


def test_recipe_names():
    assert sorted(RECIPES) == ["fig1a", "fig1b", "fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b"]


@pytest.mark.parametrize("name", FAST)
def test_fast_figures_pass_shape_checks(name):
    ds = build_figure(name)
    results = check_figure(name, ds)
    assert results and all(ok for _, ok in results), results


def test_fig2_columns_follow_caption():
    ds = build_figure("fig2")
    assert ds.columns == ["tau", "fi_beta=15", "fi_beta=10", "fi_beta=5", "fi_beta=1"]
    assert ds.column("tau")[0] == 0.0 and ds.column("tau")[-1] == 2 * PI
    assert ds.metadata["params"]["theta"] == PI and ds.metadata["params"]["gamma"] == 0.0


def test_overrides_change_grid():
    ds = build_figure("fig1a", points=11, beta=12.0)
    assert ds.rows.shape == (11, 4)
    assert ds.metadata["params"]["beta"] == 12.0


def test_small_fig3_and_fig5b():
    ds = build_figure("fig3", beta_points=6)
    assert ds.columns[0] == "beta" and len(ds.columns) == 7
    assert all(ok for _, ok in check_figure("fig3", ds))
    ds = build_figure("fig5b", beta_points=5)
    assert set(ds.columns) >= {"fm_b=0", "fm_b=1e-05", "fm_b=0.0001"}
    assert all(ok for _, ok in check_figure("fig5b", ds))


def test_theta_cuts():
    ds = build_figure("fig4b", points=41)
    assert ds.columns[0] == "theta"
    assert ds.metadata["params"]["taus"]["pi/2+eps"] == PI / 2 + 0.01
    assert all(ok for _, ok in check_figure("fig4b", ds))


def test_checks_detect_violations():
    ds = build_figure("fig2", points=201)
    ds.rows[:, ds.columns.index("fi_beta=1")] = 0.0
    assert not all(ok for _, ok in check_figure("fig2", ds))


def test_unknown_figure_and_override():
    with pytest.raises(DomainError):
        build_figure("fig6")
    with pytest.raises(DomainError):
        build_figure("fig2", beta=3.0)
    with pytest.raises(DomainError):
        check_figure("fig6", build_figure("fig2", points=5))


def test_repeat_runs_are_byte_identical():
    assert serialize(build_figure("fig5a", points=101)) == serialize(build_figure("fig5a", points=101))
