"""One-hidden-layer feedforward surrogate trained by backpropagation.

The hidden transfer is f(x) = (1 - e^-x)/(1 + e^-x)  (= tanh(x/2)); the
output layer is linear.  Inputs and outputs are affinely normalized to
[-1, 1] from training ranges.  Training is full-batch gradient descent with
momentum and geometric learning-rate decay; the returned network is the
epoch-best by validation loss.  Everything is seeded and deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrainingError

__all__ = ["SurrogateNet", "TrainConfig", "TrainingReport", "train", "forward",
           "metrics", "gradient_check", "save_net", "load_net"]


def _transfer(x):
    # (1 - e^-x)/(1 + e^-x) == tanh(x/2)
    return np.tanh(0.5 * x)


def _transfer_grad(f):
    return 0.5 * (1.0 - f * f)


@dataclass
class SurrogateNet:
    """Weights, thresholds and input/output normalizers."""

    w1: np.ndarray      # (hidden, n_in)
    b1: np.ndarray      # (hidden,)
    w2: np.ndarray      # (n_out, hidden)
    b2: np.ndarray      # (n_out,)
    x_center: np.ndarray
    x_half: np.ndarray
    y_center: np.ndarray
    y_half: np.ndarray

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.w2.shape[0]


def forward(net: SurrogateNet, x) -> np.ndarray:
    """Evaluate the network on (n, n_in) or (n_in,) inputs."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xn = (np.atleast_2d(x) - net.x_center) / net.x_half
    hidden = _transfer(xn @ net.w1.T + net.b1)
    yn = hidden @ net.w2.T + net.b2
    y = yn * net.y_half + net.y_center
    return y[0] if single else y


def _normalized_forward(net, xn):
    hidden = _transfer(xn @ net.w1.T + net.b1)
    return hidden, hidden @ net.w2.T + net.b2


def _loss_and_grads(net, xn, yn):
    """Mean-squared error on normalized outputs plus analytic gradients."""
    n = xn.shape[0]
    hidden, pred = _normalized_forward(net, xn)
    diff = pred - yn
    loss = float(np.mean(diff * diff))
    dpred = 2.0 * diff / (n * yn.shape[1])
    gw2 = dpred.T @ hidden
    gb2 = dpred.sum(axis=0)
    dhid = (dpred @ net.w2) * _transfer_grad(hidden)
    gw1 = dhid.T @ xn
    gb1 = dhid.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 34
    epochs: int = 3000
    learning_rate: float = 0.2
    momentum: float = 0.9
    lr_decay: float = 0.9995
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0


@dataclass
class TrainingReport:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    test_acc: tuple[float, ...] = ()
    test_r2: tuple[float, ...] = ()
    excluded_acc_terms: int = 0
    seed: int = 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("epoch,train_loss,val_loss\n")
            for e, (tr, va) in enumerate(zip(self.train_loss, self.val_loss)):
                fh.write(f"{e},{tr:.17g},{va:.17g}\n")


def _split_indices(n, split, rng):
    idx = rng.permutation(n)
    n_tr = int(round(split[0] * n))
    n_va = int(round(split[1] * n))
    return idx[:n_tr], idx[n_tr:n_tr + n_va], idx[n_tr + n_va:]


def train(x, y, config: TrainConfig = TrainConfig()) -> tuple[SurrogateNet, TrainingReport]:
    """Fit the surrogate; deterministic given the config seed."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0] or x.shape[0] < 200:
        raise ConfigError("need >= 200 labeled samples with matching shapes")
    rng = np.random.default_rng(config.seed)
    i_tr, i_va, i_te = _split_indices(x.shape[0], config.split, rng)

    x_center = 0.5 * (x[i_tr].max(axis=0) + x[i_tr].min(axis=0))
    x_half = np.maximum(0.5 * (x[i_tr].max(axis=0) - x[i_tr].min(axis=0)), 1e-12)
    y_center = 0.5 * (y[i_tr].max(axis=0) + y[i_tr].min(axis=0))
    y_half = np.maximum(0.5 * (y[i_tr].max(axis=0) - y[i_tr].min(axis=0)), 1e-300)

    n_in = x.shape[1]
    n_out = y.shape[1]
    m = config.hidden
    net = SurrogateNet(
        w1=rng.normal(0.0, 1.0 / math.sqrt(n_in), (m, n_in)),
        b1=np.zeros(m),
        w2=rng.normal(0.0, 1.0 / math.sqrt(m), (n_out, m)),
        b2=np.zeros(n_out),
        x_center=x_center, x_half=x_half, y_center=y_center, y_half=y_half,
    )
    xn_tr = (x[i_tr] - x_center) / x_half
    yn_tr = (y[i_tr] - y_center) / y_half
    xn_va = (x[i_va] - x_center) / x_half
    yn_va = (y[i_va] - y_center) / y_half

    vel = [np.zeros_like(net.w1), np.zeros_like(net.b1),
           np.zeros_like(net.w2), np.zeros_like(net.b2)]
    report = TrainingReport(seed=config.seed)
    best = None
    best_val = math.inf
    lr = config.learning_rate
    for epoch in range(config.epochs):
        loss, grads = _loss_and_grads(net, xn_tr, yn_tr)
        if not math.isfinite(loss):
            raise TrainingError(
                f"training diverged at epoch {epoch}; lower the learning rate")
        for vslot, g, w in zip(vel, grads, (net.w1, net.b1, net.w2, net.b2)):
            vslot *= config.momentum
            vslot -= lr * g
            w += vslot
        lr *= config.lr_decay
        _, val_pred = _normalized_forward(net, xn_va)
        val_loss = float(np.mean((val_pred - yn_va) ** 2))
        report.train_loss.append(loss)
        report.val_loss.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            report.best_epoch = epoch
            best = SurrogateNet(net.w1.copy(), net.b1.copy(), net.w2.copy(),
                                net.b2.copy(), x_center, x_half, y_center, y_half)
    net = best if best is not None else net
    acc, r2, excluded = metrics(net, x[i_te], y[i_te])
    report.test_acc = tuple(acc)
    report.test_r2 = tuple(r2)
    report.excluded_acc_terms = excluded
    return net, report


def metrics(net: SurrogateNet, x_test, y_test):
    """Per-output mean relative accuracy and determination coefficient.

    acc = mean(1 - |y - yref| / yref); terms with |yref| < 1e-15 are excluded
    from the mean and counted.  r2 = 1 - SS_res / SS_tot.
    """
    y_ref = np.asarray(y_test, dtype=np.float64)
    if y_ref.ndim == 1:
        y_ref = y_ref[:, None]
    y_hat = np.atleast_2d(forward(net, x_test))
    accs = []
    r2s = []
    excluded = 0
    for k in range(y_ref.shape[1]):
        ref = y_ref[:, k]
        hat = y_hat[:, k]
        ok = np.abs(ref) >= 1e-15
        excluded += int(np.sum(~ok))
        accs.append(float(np.mean(1.0 - np.abs(hat[ok] - ref[ok]) / ref[ok])))
        ss_res = float(np.sum((hat - ref) ** 2))
        ss_tot = float(np.sum((ref - ref.mean()) ** 2))
        r2s.append(1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0 - ss_res)
    return accs, r2s, excluded


def gradient_check(net: SurrogateNet, x, y, step: float = 1e-6) -> float:
    """Max relative deviation of analytic loss gradients vs central differences."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    xn = (x - net.x_center) / net.x_half
    yn = (y - net.y_center) / net.y_half
    _, grads = _loss_and_grads(net, xn, yn)
    worst = 0.0
    for w, g in zip((net.w1, net.b1, net.w2, net.b2), grads):
        flat_w = w.ravel()
        flat_g = g.ravel()
        for i in range(flat_w.size):
            orig = flat_w[i]
            flat_w[i] = orig + step
            lp, _ = _loss_and_grads(net, xn, yn)
            flat_w[i] = orig - step
            lm, _ = _loss_and_grads(net, xn, yn)
            flat_w[i] = orig
            fd = (lp - lm) / (2.0 * step)
            denom = max(abs(fd), abs(flat_g[i]), 1e-8)
            worst = max(worst, abs(fd - flat_g[i]) / denom)
    return worst


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def save_net(net: SurrogateNet, path, *, seed: int | None = None,
             metrics_dict: dict | None = None) -> None:
    doc = {
        "layers": [net.n_inputs, net.n_hidden, net.n_outputs],
        "w1": net.w1.ravel().tolist(),
        "b1": net.b1.tolist(),
        "w2": net.w2.ravel().tolist(),
        "b2": net.b2.tolist(),
        "x_center": net.x_center.tolist(),
        "x_half": net.x_half.tolist(),
        "y_center": net.y_center.tolist(),
        "y_half": net.y_half.tolist(),
        "seed": seed,
        "metrics": metrics_dict or {},
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_net(path) -> SurrogateNet:
    with open(path) as fh:
        doc = json.load(fh)
    n_in, m, n_out = doc["layers"]
    return SurrogateNet(
        w1=np.asarray(doc["w1"]).reshape(m, n_in),
        b1=np.asarray(doc["b1"]),
        w2=np.asarray(doc["w2"]).reshape(n_out, m),
        b2=np.asarray(doc["b2"]),
        x_center=np.asarray(doc["x_center"]),
        x_half=np.asarray(doc["x_half"]),
        y_center=np.asarray(doc["y_center"]),
        y_half=np.asarray(doc["y_half"]),
    )
