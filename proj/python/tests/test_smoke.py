import numpy as np
import pytest

import uvms_id


@pytest.fixture(scope="module")
def model():
    return uvms_id.reference_model()


def random_state(rng):
    return uvms_id.State(
        rng.uniform(-0.5, 0.5, 6), rng.uniform(-0.5, 0.5, 6), rng.uniform(-0.5, 0.5, 6),
        rng.uniform(-2, 2, 4), rng.uniform(-1, 1, 4), rng.uniform(-2, 2, 4),
    )


def test_layout(model):
    pi = model.lumped_parameters()
    assert pi.shape == (75,)
    assert len(uvms_id.parameter_names(4)) == 75
    assert uvms_id.channel_names(4)[-1] == "joint4"
    assert uvms_id.feasibility_report(pi, model) == []


def test_regressor_matches_inverse_dynamics(model):
    rng = np.random.default_rng(0)
    pi = model.lumped_parameters()
    for _ in range(10):
        s = random_state(rng)
        tau, tau_mv = uvms_id.inverse_dynamics(model, s)
        lhs = tau.copy()
        lhs[:6] += tau_mv
        y = uvms_id.regressor(model, s)
        np.testing.assert_allclose(y @ pi, lhs, rtol=1e-9, atol=1e-9)


def test_forward_inverse_round_trip(model):
    s = random_state(np.random.default_rng(1))
    tau, _ = uvms_id.inverse_dynamics(model, s)
    acc = uvms_id.forward_dynamics(model, s, tau)
    np.testing.assert_allclose(acc, np.concatenate([s.nu_dot, s.mu_ddot]), atol=1e-9)


def test_estimator_stays_feasible_and_tracks(model):
    data = uvms_id.simulate(model, 3.0, seed=2, staged=False)
    assert data["tau"].shape == (150, 10)
    truth = model.lumped_parameters()
    init = uvms_id.perturb_parameters(truth, model, seed=3, min_fraction=0.1)
    cfg = uvms_id.EstimatorConfig()
    cfg.q0 = 0.1
    est = uvms_id.Estimator(model, cfg, init)
    for k, t in enumerate(data["t"]):
        est.push(t, uvms_id.state_at(data, k), data["tau"][k], data["tau_mv"][k])
        out = est.step(t)
        assert uvms_id.feasibility_report(out["pi"], model) == []
    pred = np.array([
        uvms_id.inverse_dynamics(model.with_parameters(est.pi), uvms_id.state_at(data, k))[0]
        for k in range(len(data["t"]))
    ])
    report = uvms_id.metrics(pred, data["tau"], uvms_id.channel_names(4))
    assert all(report[f"joint{j}"]["r2"] > 0.99 for j in range(1, 5))


def test_errors(model):
    cfg = uvms_id.EstimatorConfig()
    with pytest.raises(ValueError):
        cfg.huber_scope = "rows"
    est = uvms_id.Estimator(model, cfg, model.lumped_parameters())
    s = random_state(np.random.default_rng(4))
    tau, _ = uvms_id.inverse_dynamics(model, s)
    est.push(1.0, s, tau)
    with pytest.raises(uvms_id.DataError):
        est.push(1.0, s, tau)


def test_yaml_round_trip(model):
    text = model.to_yaml()
    assert uvms_id.Model.from_yaml(text).to_yaml() == text
