"""Small scoring MLP built on numpy: linear / batch-norm / ReLU / dropout blocks.

The network maps an embedding vector to a scalar ranking score. Hidden blocks
are linear -> batch norm -> ReLU -> dropout; the output layer is linear and,
by default, bias-free (Bradley-Terry training is translation invariant, so an
output bias would be unidentifiable anyway). Backward passes are exact,
including the batch-statistics path through batch norm, which lets tests
verify gradients against finite differences.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

BN_EPS = 1e-5
BN_MOMENTUM = 0.1

CHECKPOINT_MAGIC = b"FLDM1"
ENSEMBLE_MAGIC = b"FLDN1"


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    hidden_dims: tuple[int, ...] = (100, 50)
    dropout_p: float = 0.2
    final_bias: bool = False
    seed: int = 0
    dtype: str = "float32"  # weights; losses always accumulate in float64

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError(f"hidden sizes must be positive, got {self.hidden_dims}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0,1), got {self.dropout_p}")
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))


class MlpModel:
    """Feed-forward scorer with per-layer batch-norm running statistics.

    Parameters live in ``params`` (ordered dict of numpy arrays) and the
    batch-norm running statistics in ``running``; eval-mode prediction is a
    pure function of both, so two calls always agree bit for bit.
    """

    def __init__(self, config: MlpConfig):
        self.config = config
        dtype = np.dtype(config.dtype)
        rng = np.random.default_rng(config.seed)
        self.params: dict[str, np.ndarray] = {}
        self.running: dict[str, np.ndarray] = {}
        fan_in = config.input_dim
        for i, width in enumerate(config.hidden_dims):
            bound = np.sqrt(6.0 / fan_in)
            self.params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_in, width)).astype(dtype)
            self.params[f"b{i}"] = np.zeros(width, dtype=dtype)
            self.params[f"gamma{i}"] = np.ones(width, dtype=dtype)
            self.params[f"beta{i}"] = np.zeros(width, dtype=dtype)
            self.running[f"mean{i}"] = np.zeros(width, dtype=dtype)
            self.running[f"var{i}"] = np.ones(width, dtype=dtype)
            fan_in = width
        bound = np.sqrt(6.0 / fan_in)
        self.params["Wout"] = rng.uniform(-bound, bound, size=(fan_in, 1)).astype(dtype)
        if config.final_bias:
            self.params["bout"] = np.zeros(1, dtype=dtype)

    @property
    def n_hidden(self) -> int:
        return len(self.config.hidden_dims)

    def clone(self) -> "MlpModel":
        other = MlpModel.__new__(MlpModel)
        other.config = self.config
        other.params = {k: v.copy() for k, v in self.params.items()}
        other.running = {k: v.copy() for k, v in self.running.items()}
        return other

    def forward(
        self, inputs: np.ndarray, train: bool = False, rng: np.random.Generator | None = None
    ) -> tuple[np.ndarray, dict]:
        """Scores for a batch of inputs plus the cache needed by backward().

        Train mode normalizes with batch statistics (updating the running
        ones) and applies inverted dropout from ``rng``; eval mode is
        deterministic.
        """
        x = np.asarray(inputs, dtype=self.config.dtype)
        if x.ndim != 2 or x.shape[1] != self.config.input_dim:
            raise ValueError(f"inputs must be (n, {self.config.input_dim}), got {x.shape}")
        if train and x.shape[0] < 2:
            raise ValueError("train-mode batch norm needs at least 2 rows")
        if train and self.config.dropout_p > 0 and rng is None:
            raise ValueError("train-mode dropout needs an rng")
        cache: dict = {"inputs": x, "train": train, "layers": []}
        h = x
        for i in range(self.n_hidden):
            layer: dict = {}
            z = h @ self.params[f"W{i}"] + self.params[f"b{i}"]
            layer["lin_in"] = h
            if train:
                mu = z.mean(axis=0)
                var = z.var(axis=0)
                inv_std = 1.0 / np.sqrt(var + BN_EPS)
                xhat = (z - mu) * inv_std
                m = z.shape[0]
                unbiased = var * m / (m - 1) if m > 1 else var
                self.running[f"mean{i}"] = (
                    (1 - BN_MOMENTUM) * self.running[f"mean{i}"] + BN_MOMENTUM * mu
                ).astype(self.config.dtype)
                self.running[f"var{i}"] = (
                    (1 - BN_MOMENTUM) * self.running[f"var{i}"] + BN_MOMENTUM * unbiased
                ).astype(self.config.dtype)
            else:
                inv_std = 1.0 / np.sqrt(self.running[f"var{i}"] + BN_EPS)
                xhat = (z - self.running[f"mean{i}"]) * inv_std
            layer["xhat"] = xhat
            layer["inv_std"] = inv_std
            a = self.params[f"gamma{i}"] * xhat + self.params[f"beta{i}"]
            relu_mask = a > 0
            layer["relu_mask"] = relu_mask
            h = a * relu_mask
            if train and self.config.dropout_p > 0:
                keep = rng.random(h.shape) >= self.config.dropout_p
                h = h * keep / (1.0 - self.config.dropout_p)
                layer["dropout_keep"] = keep
            cache["layers"].append(layer)
        scores = h @ self.params["Wout"]
        if self.config.final_bias:
            scores = scores + self.params["bout"]
        cache["final_in"] = h
        return scores[:, 0].astype(np.float64), cache

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        """Deterministic eval-mode scores."""
        scores, _ = self.forward(inputs, train=False)
        return scores

    def backward(self, cache: dict, grad_scores: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss given d(loss)/d(scores)."""
        dtype = np.dtype(self.config.dtype)
        grads: dict[str, np.ndarray] = {}
        dh = np.asarray(grad_scores, dtype=dtype)[:, None] @ self.params["Wout"].T
        grads["Wout"] = cache["final_in"].T @ np.asarray(grad_scores, dtype=dtype)[:, None]
        if self.config.final_bias:
            grads["bout"] = np.asarray(grad_scores, dtype=dtype).sum(keepdims=True)
        for i in reversed(range(self.n_hidden)):
            layer = cache["layers"][i]
            if "dropout_keep" in layer:
                dh = dh * layer["dropout_keep"] / (1.0 - self.config.dropout_p)
            da = dh * layer["relu_mask"]
            xhat = layer["xhat"]
            grads[f"gamma{i}"] = (da * xhat).sum(axis=0)
            grads[f"beta{i}"] = da.sum(axis=0)
            dxhat = da * self.params[f"gamma{i}"]
            if cache["train"]:
                m = xhat.shape[0]
                dz = (
                    dxhat
                    - dxhat.mean(axis=0)
                    - xhat * (dxhat * xhat).mean(axis=0)
                ) * layer["inv_std"]
            else:
                dz = dxhat * layer["inv_std"]
            grads[f"W{i}"] = layer["lin_in"].T @ dz
            grads[f"b{i}"] = dz.sum(axis=0)
            dh = dz @ self.params[f"W{i}"].T
        return grads

    def snapshot(self) -> dict[str, np.ndarray]:
        state = {f"p:{k}": v.copy() for k, v in self.params.items()}
        state.update({f"r:{k}": v.copy() for k, v in self.running.items()})
        return state

    def restore(self, state: dict[str, np.ndarray]) -> None:
        for k, v in state.items():
            kind, name = k.split(":", 1)
            target = self.params if kind == "p" else self.running
            target[name] = v.copy()


class Adam:
    """Adam with classic (gradient-additive) weight decay."""

    def __init__(
        self,
        params: dict[str, np.ndarray],
        learning_rate: float = 3e-4,
        weight_decay: float = 1e-5,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        bc1 = 1.0 - self.beta1**self.step_count
        bc2 = 1.0 - self.beta2**self.step_count
        for key, p in params.items():
            g = grads[key].astype(p.dtype)
            if self.weight_decay:
                g = g + self.weight_decay * p
            self.m[key] = self.beta1 * self.m[key] + (1 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1 - self.beta2) * g * g
            mhat = self.m[key] / bc1
            vhat = self.v[key] / bc2
            p -= (self.learning_rate * mhat / (np.sqrt(vhat) + self.eps)).astype(p.dtype)


def _config_to_json(config: MlpConfig) -> dict:
    return {
        "input_dim": config.input_dim,
        "hidden_dims": list(config.hidden_dims),
        "dropout_p": config.dropout_p,
        "final_bias": config.final_bias,
        "seed": config.seed,
        "dtype": config.dtype,
    }


def _config_from_json(data: dict) -> MlpConfig:
    return MlpConfig(
        input_dim=data["input_dim"],
        hidden_dims=tuple(data["hidden_dims"]),
        dropout_p=data["dropout_p"],
        final_bias=data["final_bias"],
        seed=data["seed"],
        dtype=data["dtype"],
    )


def _model_to_bytes(model: MlpModel) -> bytes:
    arrays = [(f"p:{k}", v) for k, v in model.params.items()]
    arrays += [(f"r:{k}", v) for k, v in model.running.items()]
    header = {
        "config": _config_to_json(model.config),
        "arrays": [
            {"name": name, "dtype": str(arr.dtype), "shape": list(arr.shape)}
            for name, arr in arrays
        ],
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [CHECKPOINT_MAGIC, struct.pack("<I", len(head)), head]
    for _, arr in arrays:
        parts.append(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes())
    return b"".join(parts)


def _model_from_bytes(blob: bytes) -> MlpModel:
    if blob[:5] != CHECKPOINT_MAGIC:
        raise ValueError(f"bad checkpoint magic {blob[:5]!r}")
    (head_len,) = struct.unpack_from("<I", blob, 5)
    header = json.loads(blob[9:9 + head_len].decode("utf-8"))
    model = MlpModel(_config_from_json(header["config"]))
    offset = 9 + head_len
    for spec in header["arrays"]:
        dtype = np.dtype(spec["dtype"]).newbyteorder("<")
        count = int(np.prod(spec["shape"])) if spec["shape"] else 1
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
        arr = arr.reshape(spec["shape"]).astype(spec["dtype"])
        offset += dtype.itemsize * count
        kind, name = spec["name"].split(":", 1)
        (model.params if kind == "p" else model.running)[name] = arr.copy()
    if offset != len(blob):
        raise ValueError(f"{len(blob) - offset} trailing bytes in checkpoint")
    return model


def save_model(model: MlpModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_model_to_bytes(model))


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        return _model_from_bytes(fh.read())
