"""Surrogate network tests: hand-evaluated forwards, finite-difference
gradient oracles, metric recomputation, determinism, serialization."""

import math

import numpy as np
import pytest

from vsuq.errors import ConfigError, TrainingError
from vsuq.surrogate import (
    SurrogateNet,
    TrainConfig,
    forward,
    gradient_check,
    load_net,
    metrics,
    save_net,
    train,
)


def tiny_net(n_in=2, hidden=1, n_out=1):
    return SurrogateNet(
        w1=np.zeros((hidden, n_in)), b1=np.zeros(hidden),
        w2=np.zeros((n_out, hidden)), b2=np.zeros(n_out),
        x_center=np.zeros(n_in), x_half=np.ones(n_in),
        y_center=np.zeros(n_out), y_half=np.ones(n_out),
    )


# ---------------------------------------------------------------------------
# forward pass
# ---------------------------------------------------------------------------


def test_zero_net_outputs_denormalized_zero():
    net = tiny_net()
    net.y_center[:] = 3.5
    assert forward(net, [0.2, -0.4]) == pytest.approx([3.5])


def test_transfer_limits():
    net = tiny_net(1, 1, 1)
    net.w1[0, 0] = 1.0
    net.w2[0, 0] = 1.0
    assert forward(net, [0.0])[0] == 0.0
    assert forward(net, [80.0])[0] == pytest.approx(1.0, abs=1e-12)
    # (1 - e^-x) / (1 + e^-x) at x = 1
    assert forward(net, [1.0])[0] == pytest.approx(
        (1 - math.exp(-1)) / (1 + math.exp(-1)), rel=1e-15)


def test_single_hidden_unit_hand_computation():
    net = tiny_net(2, 1, 1)
    net.w1[0] = [0.3, -0.7]
    net.b1[0] = 0.1
    net.w2[0, 0] = 1.5
    net.b2[0] = -0.2
    net.x_center[:] = [1.0, 2.0]
    net.x_half[:] = [2.0, 4.0]
    net.y_center[0] = 10.0
    net.y_half[0] = 5.0
    x = np.array([2.0, 1.0])
    xn = (x - net.x_center) / net.x_half
    z = 0.3 * xn[0] - 0.7 * xn[1] + 0.1
    f = (1 - math.exp(-z)) / (1 + math.exp(-z))
    expected = (1.5 * f - 0.2) * 5.0 + 10.0
    assert forward(net, x)[0] == pytest.approx(expected, rel=1e-15)


def test_forward_pure_and_bitwise_repeatable(rng):
    x = rng.uniform(-1, 1, (50, 3))
    y = x @ np.array([[1.0], [2.0], [-0.5]])
    net, _ = train(np.vstack([x] * 5), np.vstack([y] * 5),
                   TrainConfig(hidden=4, epochs=50, seed=3))
    a = forward(net, x)
    b = forward(net, x)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def test_learns_linear_map_to_high_r2(rng):
    x = rng.uniform(-1.0, 1.0, (1000, 2))
    y = 2.0 * x[:, 0] - x[:, 1]
    net, report = train(x, y, TrainConfig(hidden=8, epochs=500,
                                          learning_rate=0.3, seed=1))
    assert report.test_r2[0] > 0.999


def test_training_deterministic_given_seed(rng):
    x = rng.uniform(-1, 1, (400, 2))
    y = np.sin(x[:, 0]) + x[:, 1] ** 2
    cfg = TrainConfig(hidden=6, epochs=200, seed=11)
    net1, rep1 = train(x, y, cfg)
    net2, rep2 = train(x, y, cfg)
    assert np.array_equal(net1.w1, net2.w1)
    assert np.array_equal(net1.w2, net2.w2)
    assert rep1.best_epoch == rep2.best_epoch


def test_training_input_validation(rng):
    with pytest.raises(ConfigError):
        train(rng.uniform(size=(50, 2)), rng.uniform(size=50))  # too few


def test_divergence_raises_training_error(rng):
    x = rng.uniform(-1, 1, (300, 2))
    y = x[:, 0]
    with np.errstate(over="ignore"), pytest.raises(TrainingError,
                                                   match="learning rate"):
        train(x, y, TrainConfig(hidden=8, epochs=500, learning_rate=500.0,
                                lr_decay=1.0, seed=0))


def test_epoch_best_checkpoint_val_loss_nonincreasing(rng):
    x = rng.uniform(-1, 1, (500, 2))
    y = x[:, 0] * x[:, 1]
    net, report = train(x, y, TrainConfig(hidden=8, epochs=300, seed=5))
    vals = np.array(report.val_loss)
    best_so_far = np.minimum.accumulate(vals)
    assert vals[report.best_epoch] == best_so_far[-1]
    # training loss at the checkpoints of successive improvements
    improving = vals == best_so_far
    tr = np.array(report.train_loss)[improving]
    assert np.all(np.diff(tr) <= 1e-12)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def test_perfect_predictions_metrics(rng):
    x = rng.uniform(-1, 1, (300, 2))
    y = 3.0 + x[:, 0]
    net, _ = train(x, y, TrainConfig(hidden=6, epochs=400, seed=2))
    y_hat = forward(net, x).ravel()
    acc, r2, excluded = metrics(net, x, y_hat)
    assert acc[0] == pytest.approx(1.0, abs=1e-12)
    assert r2[0] == pytest.approx(1.0, abs=1e-12)
    assert excluded == 0


def test_constant_predictor_r2_zero(rng):
    net = tiny_net(2, 1, 1)
    y = rng.uniform(1.0, 2.0, 200)
    net.y_center[0] = float(y.mean())
    _, r2, _ = metrics(net, rng.uniform(-1, 1, (200, 2)), y)
    assert r2[0] == pytest.approx(0.0, abs=1e-12)


def test_metrics_match_independent_recomputation(rng):
    x = rng.uniform(-1, 1, (100, 2))
    y = 1.5 + x[:, 0] - 0.3 * x[:, 1]
    net, _ = train(x.repeat(3, axis=0), y.repeat(3), TrainConfig(
        hidden=4, epochs=100, seed=9))
    acc, r2, _ = metrics(net, x, y)
    y_hat = forward(net, x).ravel()
    acc_ref = np.mean(1.0 - np.abs(y_hat - y) / y)
    r2_ref = 1.0 - np.sum((y_hat - y) ** 2) / np.sum((y - y.mean()) ** 2)
    assert acc[0] == pytest.approx(acc_ref, rel=1e-12)
    assert r2[0] == pytest.approx(r2_ref, rel=1e-12)


def test_near_zero_labels_excluded_and_counted(rng):
    net = tiny_net(2, 1, 1)
    y = np.array([1.0, 2.0, 0.0, 3.0, 1e-16])
    acc, _, excluded = metrics(net, np.zeros((5, 2)), y)
    assert excluded == 2
    assert math.isfinite(acc[0])


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def test_gradient_check_zero_net_on_zero_input():
    net = tiny_net(2, 3, 1)
    x = np.zeros((4, 2))
    y = np.ones((4, 1))
    assert gradient_check(net, x, y) < 1e-9  # loss quadratic in the live bias


def test_gradient_check_small_random_nets(rng):
    for seed in range(10):
        g = np.random.default_rng(seed)
        net = tiny_net(2, 3, 1)
        net.w1[:] = g.normal(0, 0.5, net.w1.shape)
        net.b1[:] = g.normal(0, 0.2, net.b1.shape)
        net.w2[:] = g.normal(0, 0.5, net.w2.shape)
        net.b2[:] = g.normal(0, 0.2, net.b2.shape)
        x = g.uniform(-1, 1, (6, 2))
        y = g.uniform(-1, 1, (6, 1))
        assert gradient_check(net, x, y) < 1e-4


def test_gradient_check_step_refinement(rng):
    g = np.random.default_rng(7)
    net = tiny_net(2, 3, 1)
    net.w1[:] = g.normal(0, 0.5, net.w1.shape)
    net.w2[:] = g.normal(0, 0.5, net.w2.shape)
    x = g.uniform(-1, 1, (6, 2))
    y = g.uniform(-1, 1, (6, 1))
    coarse = gradient_check(net, x, y, step=1e-3)
    fine = gradient_check(net, x, y, step=1e-5)
    assert fine < coarse  # truncation error shrinks with the step


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_json_roundtrip_exact(tmp_path, rng):
    x = rng.uniform(-1, 1, (300, 3))
    y = np.column_stack([x[:, 0], x.sum(axis=1)])
    net, report = train(x, y, TrainConfig(hidden=5, epochs=100, seed=4))
    path = tmp_path / "net.json"
    save_net(net, path, seed=4, metrics_dict={"test_r2": list(report.test_r2)})
    loaded = load_net(path)
    assert np.array_equal(loaded.w1, net.w1)
    assert np.array_equal(loaded.b2, net.b2)
    probe = rng.uniform(-1, 1, (10, 3))
    assert np.array_equal(forward(loaded, probe), forward(net, probe))
