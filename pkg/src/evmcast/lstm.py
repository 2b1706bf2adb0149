"""Single-output LSTM regressor implemented from scratch in numpy:
sliding-window supervised framing, batched forward/backward through
time, sgd/adam training with gradient clipping and early stopping, and
recursive multi-step forecasting.

Gate equations per step (sigma = logistic):

    i = sigma(W_i x + U_i h + b_i)      f = sigma(W_f x + U_f h + b_f)
    o = sigma(W_o x + U_o h + b_o)      g = tanh(W_g x + U_g h + b_g)
    c <- f*c + i*g                      h <- o*tanh(c)

The scalar head reads the last hidden state: prediction = w_out.h + b_out.
Training loss is squared error; the per-sample gradient convention is
d/db_out (pred - target)^2 = 2 (pred - target).

Initialization is Glorot-uniform drawn from the SplitMix64 reference
stream in a fixed documented order (per layer: W_i, W_f, W_o, W_g,
U_i, U_f, U_o, U_g row-major, then w_out), forget-gate bias 1.0, other
biases 0, so identical (seed, config) always yields bit-identical
parameters.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import NormParams, denormalize, normalize_minmax
from .errors import (
    EmptyDataset,
    MissingFutureExog,
    NonFiniteLoss,
    ShapeMismatch,
    TooShort,
)
from .features import ROLLING_SOURCES, FeatureTable
from .rng import SplitMix64


@dataclass(frozen=True)
class WindowSpec:
    window: int
    features: tuple[str, ...]
    target: str
    horizon: int = 1

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.features:
            raise ValueError("need at least one input feature")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    optimizer: str = "adam"  # or "sgd"
    seed: int = 0
    validation_fraction: float = 0.2
    patience: int = 25
    clip_norm: float = 5.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be > 0")
        if not 0 <= self.validation_fraction < 1:
            raise ValueError("validation fraction must be in [0, 1)")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


_GATES = ("i", "f", "o", "g")


@dataclass(eq=False)
class LstmParams:
    """All weights as a flat name->array dict; names are layer-scoped
    ("0.W_i", "0.U_f", "0.b_g", ...) plus "w_out" and "b_out" (shape (1,))."""

    tensors: dict[str, np.ndarray]
    hidden: int
    layers: int
    n_features: int

    def copy(self) -> "LstmParams":
        return LstmParams(
            tensors={k: v.copy() for k, v in self.tensors.items()},
            hidden=self.hidden,
            layers=self.layers,
            n_features=self.n_features,
        )


def _glorot(gen: SplitMix64, rows: int, cols: int, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    out = np.empty((rows, cols))
    for r in range(rows):
        for c in range(cols):
            out[r, c] = (2.0 * gen.next_float() - 1.0) * limit
    return out


def init_params(n_features: int, hidden: int = 16, layers: int = 1, seed: int = 0) -> LstmParams:
    gen = SplitMix64(seed)
    tensors: dict[str, np.ndarray] = {}
    for layer in range(layers):
        d_in = n_features if layer == 0 else hidden
        for gate in _GATES:
            tensors[f"{layer}.W_{gate}"] = _glorot(gen, hidden, d_in, d_in, hidden)
        for gate in _GATES:
            tensors[f"{layer}.U_{gate}"] = _glorot(gen, hidden, hidden, hidden, hidden)
        for gate in _GATES:
            bias = np.ones(hidden) if gate == "f" else np.zeros(hidden)
            tensors[f"{layer}.b_{gate}"] = bias
    tensors["w_out"] = _glorot(gen, 1, hidden, hidden, 1)[0]
    tensors["b_out"] = np.zeros(1)
    return LstmParams(tensors=tensors, hidden=hidden, layers=layers, n_features=n_features)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # exp overflow saturates to exactly 0/1, which is the right limit
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _forward_batch(params: LstmParams, x: np.ndarray):
    """x: (N, w, F) -> (predictions (N,), cache for backward)."""
    n, w, _ = x.shape
    h_size = params.hidden
    t = params.tensors
    layer_caches = []
    seq = x
    for layer in range(params.layers):
        h = np.zeros((n, h_size))
        c = np.zeros((n, h_size))
        steps = []
        outputs = np.empty((n, w, h_size))
        for step in range(w):
            xt = seq[:, step, :]
            gi = _sigmoid(xt @ t[f"{layer}.W_i"].T + h @ t[f"{layer}.U_i"].T + t[f"{layer}.b_i"])
            gf = _sigmoid(xt @ t[f"{layer}.W_f"].T + h @ t[f"{layer}.U_f"].T + t[f"{layer}.b_f"])
            go = _sigmoid(xt @ t[f"{layer}.W_o"].T + h @ t[f"{layer}.U_o"].T + t[f"{layer}.b_o"])
            gg = np.tanh(xt @ t[f"{layer}.W_g"].T + h @ t[f"{layer}.U_g"].T + t[f"{layer}.b_g"])
            c_new = gf * c + gi * gg
            tanh_c = np.tanh(c_new)
            h_new = go * tanh_c
            steps.append((xt, h, c, gi, gf, go, gg, c_new, tanh_c))
            outputs[:, step, :] = h_new
            h, c = h_new, c_new
        layer_caches.append(steps)
        seq = outputs
    preds = seq[:, -1, :] @ t["w_out"] + t["b_out"][0]
    cache = (x, layer_caches, seq[:, -1, :], preds)
    return preds, cache


def _backward_batch(params: LstmParams, cache, targets: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of sum_i (pred_i - target_i)^2 over the batch."""
    x, layer_caches, h_last, preds = cache
    n, w, _ = x.shape
    h_size = params.hidden
    t = params.tensors

    dpred = 2.0 * (preds - targets)  # (N,)
    grads = {name: np.zeros_like(arr) for name, arr in t.items()}
    grads["w_out"] = dpred @ h_last
    grads["b_out"] = np.array([dpred.sum()])

    # dh flowing into each step of the top layer from the head
    dh_above = np.zeros((n, w, h_size))
    dh_above[:, -1, :] = dpred[:, None] * t["w_out"][None, :]

    for layer in range(params.layers - 1, -1, -1):
        steps = layer_caches[layer]
        d_in = params.n_features if layer == 0 else h_size
        dx_seq = np.zeros((n, w, d_in))
        dh_next = np.zeros((n, h_size))
        dc_next = np.zeros((n, h_size))
        for step in range(w - 1, -1, -1):
            xt, h_prev, c_prev, gi, gf, go, gg, c_new, tanh_c = steps[step]
            dh = dh_above[:, step, :] + dh_next
            do = dh * tanh_c
            dc = dh * go * (1.0 - tanh_c * tanh_c) + dc_next
            di = dc * gg
            df = dc * c_prev
            dg = dc * gi
            da_i = di * gi * (1.0 - gi)
            da_f = df * gf * (1.0 - gf)
            da_o = do * go * (1.0 - go)
            da_g = dg * (1.0 - gg * gg)
            for gate, da in zip(_GATES, (da_i, da_f, da_o, da_g)):
                grads[f"{layer}.W_{gate}"] += da.T @ xt
                grads[f"{layer}.U_{gate}"] += da.T @ h_prev
                grads[f"{layer}.b_{gate}"] += da.sum(axis=0)
            dh_next = (
                da_i @ t[f"{layer}.U_i"]
                + da_f @ t[f"{layer}.U_f"]
                + da_o @ t[f"{layer}.U_o"]
                + da_g @ t[f"{layer}.U_g"]
            )
            dc_next = dc * gf
            dx_seq[:, step, :] = (
                da_i @ t[f"{layer}.W_i"]
                + da_f @ t[f"{layer}.W_f"]
                + da_o @ t[f"{layer}.W_o"]
                + da_g @ t[f"{layer}.W_g"]
            )
        dh_above = dx_seq
    return grads


def forward(params: LstmParams, window) -> tuple[float, object]:
    """Single-window prediction; the cache feeds `backward`."""
    x = np.asarray(window, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.n_features:
        raise ShapeMismatch(
            f"window shape {x.shape} incompatible with {params.n_features} features"
        )
    preds, cache = _forward_batch(params, x[None, :, :])
    return float(preds[0]), cache


def backward(params: LstmParams, cache, target: float) -> dict[str, np.ndarray]:
    """Gradients of (prediction - target)^2 for the cached forward pass."""
    return _backward_batch(params, cache, np.array([float(target)]))


# --- supervised framing -------------------------------------------------------

@dataclass(eq=False)
class WindowDataset:
    x: np.ndarray  # (N, w, F) normalized
    y: np.ndarray  # (N,) normalized targets
    n_train: int
    norm: dict[str, NormParams]
    spec: WindowSpec

    def __len__(self) -> int:
        return self.x.shape[0]


def make_windows(table: FeatureTable, spec: WindowSpec, validation_fraction: float = 0.0) -> WindowDataset:
    """Sliding-window dataset: sample k has inputs from periods
    k..k+w-1 and target at period k+w. Min-max normalization parameters
    are fitted on the training span only (the periods reachable by
    training samples); the most recent `validation_fraction` of samples
    is the validation split."""
    length = len(table)
    w = spec.window
    if length <= w:
        raise TooShort(f"table length {length} <= window {w}")
    n = length - w
    n_val = int(validation_fraction * n)
    n_train = n - n_val
    if n_train < 1:
        raise TooShort("validation fraction leaves no training samples")
    train_span = w + n_train  # periods touched by training inputs/targets

    names = list(dict.fromkeys(list(spec.features) + [spec.target]))
    norm: dict[str, NormParams] = {}
    scaled: dict[str, np.ndarray] = {}
    for name in names:
        col = table.column(name)
        _, params = normalize_minmax(col[:train_span])
        norm[name] = params
        if params.max == params.min:
            scaled[name] = np.full(col.shape, 0.5)
        else:
            scaled[name] = (col - params.min) / (params.max - params.min)

    x = np.empty((n, w, len(spec.features)))
    for j, name in enumerate(spec.features):
        for k in range(n):
            x[k, :, j] = scaled[name][k : k + w]
    y = np.array([scaled[spec.target][k + w] for k in range(n)])
    return WindowDataset(x=x, y=y, n_train=n_train, norm=norm, spec=spec)


# --- training -----------------------------------------------------------------

@dataclass(eq=False)
class LstmModel:
    params: LstmParams
    spec: WindowSpec
    norm: dict[str, NormParams]
    config: TrainConfig
    history: list[tuple[float, float | None]] = field(default_factory=list)


def _clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> None:
    with np.errstate(over="ignore"):
        total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale


def train(
    dataset: WindowDataset,
    config: TrainConfig | None = None,
    hidden: int = 16,
    layers: int = 1,
) -> LstmModel:
    """Full-batch training with the configured optimizer.

    The split is chronological: the most recent fraction of samples is
    validation. Early stopping restores the best-validation parameters.
    Raises NonFiniteLoss if the loss diverges (try a lower learning rate).
    """
    config = config or TrainConfig()
    n = len(dataset)
    if n == 0:
        raise EmptyDataset("no training samples")
    n_train = dataset.n_train
    x_train, y_train = dataset.x[:n_train], dataset.y[:n_train]
    x_val, y_val = dataset.x[n_train:], dataset.y[n_train:]

    params = init_params(
        n_features=dataset.x.shape[2], hidden=hidden, layers=layers, seed=config.seed
    )
    lr = config.learning_rate
    adam_m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.tensors.items()}

    history: list[tuple[float, float | None]] = []
    best_val = math.inf
    best_params = None
    stale = 0

    for epoch in range(config.epochs):
        preds, cache = _forward_batch(params, x_train)
        with np.errstate(over="ignore", invalid="ignore"):
            train_loss = float(np.mean((preds - y_train) ** 2))
        if not math.isfinite(train_loss):
            raise NonFiniteLoss(
                f"training loss non-finite at epoch {epoch}; lower the learning rate"
            )
        val_loss = None
        if x_val.shape[0]:
            val_preds, _ = _forward_batch(params, x_val)
            val_loss = float(np.mean((val_preds - y_val) ** 2))
            if not math.isfinite(val_loss):
                raise NonFiniteLoss(
                    f"validation loss non-finite at epoch {epoch}; lower the learning rate"
                )
        history.append((train_loss, val_loss))

        if val_loss is not None:
            if val_loss < best_val:
                best_val, best_params, stale = val_loss, params.copy(), 0
            else:
                stale += 1
                if stale > config.patience:
                    break

        grads = _backward_batch(params, cache, y_train)
        for g in grads.values():
            g /= n_train  # gradient of the mean loss
        _clip_gradients(grads, config.clip_norm)

        if config.optimizer == "sgd":
            for k, g in grads.items():
                params.tensors[k] -= lr * g
        else:
            t_step = epoch + 1
            b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_eps
            for k, g in grads.items():
                adam_m[k] = b1 * adam_m[k] + (1 - b1) * g
                adam_v[k] = b2 * adam_v[k] + (1 - b2) * g * g
                m_hat = adam_m[k] / (1 - b1 ** t_step)
                v_hat = adam_v[k] / (1 - b2 ** t_step)
                params.tensors[k] -= lr * m_hat / (np.sqrt(v_hat) + eps)

    if best_params is not None:
        params = best_params
    return LstmModel(params=params, spec=dataset.spec, norm=dataset.norm, config=config, history=history)


# --- serialization --------------------------------------------------------------

def model_to_json(model: LstmModel) -> str:
    """Self-describing JSON: weight tensors as row-major nested lists
    (Python float repr round-trips exactly), window spec, normalization
    parameters, training config and per-epoch history."""
    doc = {
        "model": "lstm",
        "spec": {
            "window": model.spec.window,
            "features": list(model.spec.features),
            "target": model.spec.target,
            "horizon": model.spec.horizon,
        },
        "hidden": model.params.hidden,
        "layers": model.params.layers,
        "n_features": model.params.n_features,
        "norm": {k: {"min": v.min, "max": v.max} for k, v in model.norm.items()},
        "config": {
            "epochs": model.config.epochs,
            "learning_rate": model.config.learning_rate,
            "optimizer": model.config.optimizer,
            "seed": model.config.seed,
            "validation_fraction": model.config.validation_fraction,
            "patience": model.config.patience,
            "clip_norm": model.config.clip_norm,
        },
        "weights": {k: np.asarray(v).tolist() for k, v in model.params.tensors.items()},
        "history": [[t, v] for t, v in model.history],
    }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> LstmModel:
    doc = json.loads(text)
    spec = WindowSpec(
        window=doc["spec"]["window"],
        features=tuple(doc["spec"]["features"]),
        target=doc["spec"]["target"],
        horizon=doc["spec"]["horizon"],
    )
    params = LstmParams(
        tensors={k: np.array(v, dtype=float) for k, v in doc["weights"].items()},
        hidden=doc["hidden"],
        layers=doc["layers"],
        n_features=doc["n_features"],
    )
    norm = {k: NormParams(v["min"], v["max"]) for k, v in doc["norm"].items()}
    config = TrainConfig(**doc["config"])
    history = [(t, v) for t, v in doc["history"]]
    return LstmModel(params=params, spec=spec, norm=norm, config=config, history=history)


# --- forecasting --------------------------------------------------------------

def normalize_value(value: float, params: NormParams) -> float:
    """Min-max scale one value with stored parameters (constant -> 0.5)."""
    if params.max == params.min:
        return 0.5
    return (value - params.min) / (params.max - params.min)


def forecast(
    model: LstmModel,
    table: FeatureTable,
    horizon: int,
    future_exog: dict[str, np.ndarray] | None = None,
) -> np.ndarray:
    """Recursive multi-step forecast in original target units.

    Each step predicts the next target, denormalizes it, appends it to
    the target history, recomputes target-derived rolling averages, and
    rolls the window forward. Every input feature that is neither the
    target nor derived from it must be supplied for `horizon` periods in
    `future_exog` (column -> values)."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if horizon == 0:
        return np.empty(0)
    future_exog = {k: np.asarray(v, dtype=float) for k, v in (future_exog or {}).items()}
    spec = model.spec
    target = spec.target

    def source_history(source: str) -> list[float]:
        if source in table.columns:
            return list(table.column(source))
        if source == "actual_cost_cum":
            # identity AC = EV - CV reconstructs the cumulative curve
            return list(table.column("earned_value") - table.column("cost_variance"))
        raise MissingFutureExog(f"table lacks source column {source!r}")

    # columns that must be extended each step: the target comes from the
    # prediction; everything else needs supplied future values
    supplied: list[str] = []
    histories: dict[str, list[float]] = {target: source_history(target)}
    for name in spec.features:
        source = ROLLING_SOURCES.get(name, name)
        if source not in histories:
            histories[source] = source_history(source)
            if source != target:
                if source not in future_exog:
                    raise MissingFutureExog(
                        f"feature {name!r} needs future values of {source!r} for recursive forecasting"
                    )
                if future_exog[source].size < horizon:
                    raise MissingFutureExog(
                        f"future values of {source!r}: need {horizon}, got {future_exog[source].size}"
                    )
                supplied.append(source)
        if name not in histories:
            histories[name] = list(table.column(name))

    rolling_features = [n for n in spec.features if n in ROLLING_SOURCES]
    w = spec.window
    roll_w = table.rolling_window
    out = np.empty(horizon)
    for h in range(horizon):
        window = np.empty((w, len(spec.features)))
        for j, name in enumerate(spec.features):
            vals = histories[name][-w:]
            window[:, j] = [normalize_value(v, model.norm[name]) for v in vals]
        pred_norm, _ = forward(model.params, window)
        pred = float(denormalize(np.array([pred_norm]), model.norm[target])[0])
        out[h] = pred

        histories[target].append(pred)
        for source in supplied:
            histories[source].append(float(future_exog[source][h]))
        for name in rolling_features:
            source = ROLLING_SOURCES[name]
            histories[name].append(float(np.mean(histories[source][-roll_w:])))
    return out
