import numpy as np
import pytest

from gausscauchy.exact_bench import (AGGREGATED_COLUMNS, PER_DESIGN_COLUMNS, GridEscapeError,
                                     GridSpec, correction_diagnostics, design_params,
                                     design_sweep, exact_filter, kl_diagnostics)
from gausscauchy.ssm import SsmParams, gcc_filter, simulate_ssm


def kalman_moments(y, p: SsmParams):
    a, h = p.mu, p.stationary_variance
    xp, hp = [], []
    for v in y:
        xp.append(a)
        hp.append(h)
        k = h / (h + p.sigma ** 2)
        a, h = p.mu + p.phi * (a + k * (v - a) - p.mu), p.phi ** 2 * h * (1 - k) + p.tau ** 2
    return np.array(xp), np.array(hp)


@pytest.fixture(scope="module")
def reference_design():
    p = design_params(0.10, 0.97, 0.50)
    y = simulate_ssm(p, 500, 0, stream=4).y
    return p, y, exact_filter(y, p)


def test_gaussian_case_matches_kalman():
    p = design_params(0.0, 0.9, 0.5)
    assert p.gamma == pytest.approx(1e-12)
    y = simulate_ssm(p.with_values(family="gaussian", gamma=0.0), 200, 1).y
    ex = exact_filter(y, p)
    xp, hp = kalman_moments(y, p)
    assert np.max(np.abs(ex.x_pred - xp)) <= 1e-10
    assert np.max(np.abs(ex.h_pred - hp)) <= 1e-10
    op = gcc_filter(y, p)
    assert np.max(np.abs(ex.x_filt - op.x_filt)) <= 1e-10
    kl = kl_diagnostics(ex, p).means()
    assert max(kl.values()) <= 1e-12
    cd = correction_diagnostics(ex, p)
    assert cd.mae_op <= 1e-12 and cd.rmse_op <= 1e-12


def test_uninformative_past_gives_gaussian_prediction():
    p = SsmParams(0.0, 0.5, 50.0, "gcc", sigma=0.1, gamma=0.01)
    y = simulate_ssm(p, 30, 2).y
    ex = exact_filter(y, p)
    t = 20
    dens = ex.pred[t]
    m, v = ex.x_pred[t], ex.h_pred[t]
    q = np.exp(-0.5 * (ex.nodes - m) ** 2 / v) / np.sqrt(2 * np.pi * v)
    mask = dens > 1e-300
    kl = np.dot(ex.weights[mask], dens[mask] * np.log(dens[mask] / np.maximum(q[mask], 1e-300)))
    assert kl <= 1e-8
    # the transition dominates: predictive variance ~ phi^2 * (small) + tau^2
    assert v == pytest.approx(p.tau ** 2, rel=1e-3)


def test_mass_conservation(reference_design):
    _, _, ex = reference_design
    assert np.all(ex.mass_change < 1e-6)
    assert np.allclose(ex.weights @ ex.pred.T, 1.0, atol=1e-12)


def test_kl_non_negative_and_observation_smaller(reference_design):
    p, _, ex = reference_design
    kl = kl_diagnostics(ex, p)
    for a in (kl.kl_x_shape, kl.kl_x_op, kl.kl_y_shape, kl.kl_y_op):
        assert np.all(a >= -1e-12) and np.all(np.isfinite(a))
    m = kl.means()
    assert m["kl_y_op"] < m["kl_x_op"] and m["kl_y_shape"] < m["kl_x_shape"]
    assert kl.max_kl_x_op() >= m["kl_x_op"]


def test_reference_design_corrections(reference_design):
    p, _, ex = reference_design
    cd = correction_diagnostics(ex, p)
    assert 0.5 <= cd.mae_op / 5.35e-3 <= 2.0
    assert 0.5 <= cd.rmse_op / 1.21e-2 <= 2.0
    assert np.all(np.isfinite(cd.D_op)) and np.all(np.isfinite(cd.D_shape))
    assert cd.mae_shape <= cd.mae_op


def test_grid_refinement_self_convergence(reference_design):
    p, y, ex = reference_design
    coarse = kl_diagnostics(ex, p).means()
    fine = kl_diagnostics(exact_filter(y, p, GridSpec(n_nodes=8001)), p).means()
    for k in coarse:
        assert abs(fine[k] - coarse[k]) <= 0.1 * abs(fine[k])


def test_single_design_sweep_equals_direct_calls():
    sweep = design_sweep([0.1], [0.9], [1.0], T=150, seed=3)
    p = design_params(0.1, 0.9, 1.0)
    y = simulate_ssm(p, 150, 3, stream=0).y
    ex = exact_filter(y, p)
    kl = kl_diagnostics(ex, p)
    cd = correction_diagnostics(ex, p)
    row = sweep.aggregated[0]
    for k, v in {**kl.means(), **cd.summary(), "max_kl_x_op": kl.max_kl_x_op()}.items():
        assert row[k] == v
    assert tuple(row) == AGGREGATED_COLUMNS
    assert tuple(sweep.per_design[0]) == PER_DESIGN_COLUMNS
    assert not sweep.failures


def test_sweep_shape_and_worker_invariance():
    kw = dict(lambdas=[0.0, 0.5], phis=[0.9], tau_ratios=[0.5, 1.0], T=120, seed=1)
    a = design_sweep(**kw, workers=1)
    b = design_sweep(**kw, workers=2)
    assert a.aggregated == b.aggregated and a.per_design == b.per_design
    assert [r["lambda"] for r in a.aggregated] == [0.0, 0.5]
    assert len(a.per_design) == 4


def test_grid_escape_raises():
    p = design_params(0.1, 0.9, 1.0)
    y = simulate_ssm(p, 50, 0).y + np.linspace(0, 200, 50)
    with pytest.raises(GridEscapeError):
        exact_filter(y, p, GridSpec(n_nodes=401, half_width=3.0, max_expansions=1))


def test_validation():
    with pytest.raises(ValueError):
        design_sweep([0.1], [1.0], [0.5], T=10)
    with pytest.raises(ValueError):
        exact_filter([0.0], SsmParams(0, 0.5, 1, "gaussian", sigma=1))
    with pytest.raises(ValueError):
        GridSpec(n_nodes=100)
