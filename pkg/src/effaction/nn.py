"""Small dense-network substrate in float64 numpy.

Multilayer perceptrons and a single-layer LSTM with hand-written reverse-mode
gradients, Adam, Xavier initialization, a central-difference gradient checker
and the flat checkpoint format.

Layout conventions: a batch is a ``(batch, features)`` array, a weight matrix
is ``(out, in)``, so a layer computes ``x @ W.T + b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

ACTIVATIONS = ("linear", "relu")


class DivergenceError(FloatingPointError):
    """Raised when a loss or gradient stops being finite."""


class StaleCacheError(ValueError):
    pass


@dataclass
class Layer:
    weight: np.ndarray
    bias: np.ndarray
    activation: str = "linear"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValueError(f"bad layer shapes {self.weight.shape} / {self.bias.shape}")


@dataclass
class MlpParams:
    layers: list
    version: int = 0

    def __post_init__(self):
        for a, b in zip(self.layers, self.layers[1:]):
            if a.weight.shape[0] != b.weight.shape[1]:
                raise ValueError("consecutive layer dimensions do not chain")

    @property
    def in_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weight.shape[0]

    def arrays(self) -> list:
        out = []
        for layer in self.layers:
            out += [layer.weight, layer.bias]
        return out

    def copy(self) -> "MlpParams":
        return MlpParams([Layer(l.weight.copy(), l.bias.copy(), l.activation) for l in self.layers])


@dataclass
class MlpCache:
    inputs: list
    preacts: list
    version: int


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def mlp_forward(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, MlpCache]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != params.in_dim:
        raise ValueError(f"input has {x.shape[1]} features, network expects {params.in_dim}")
    inputs, preacts = [], []
    h = x
    for layer in params.layers:
        inputs.append(h)
        z = h @ layer.weight.T + layer.bias
        preacts.append(z)
        h = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return h, MlpCache(inputs, preacts, params.version)


def mlp_backward(params: MlpParams, cache: MlpCache, grad_out: np.ndarray) -> tuple[list, np.ndarray]:
    """Gradients in ``params.arrays()`` order, plus the gradient w.r.t. the input batch."""
    if cache.version != params.version or len(cache.inputs) != len(params.layers):
        raise StaleCacheError("cache does not come from the current parameters")
    g = np.asarray(grad_out, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    grads = [None] * (2 * len(params.layers))
    for i in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[i]
        if layer.activation == "relu":
            g = g * (cache.preacts[i] > 0.0)
        grads[2 * i] = g.T @ cache.inputs[i]
        grads[2 * i + 1] = g.sum(axis=0)
        g = g @ layer.weight
    return grads, g


# --- LSTM -----------------------------------------------------------------------

@dataclass
class LstmParams:
    """Gate weights stacked as ``[W_f; W_i; W_o; W_g]`` acting on ``[x; h_prev]``."""

    input_dim: int
    hidden_dim: int
    weight: np.ndarray
    bias: np.ndarray
    version: int = 0

    def __post_init__(self):
        h, n = self.hidden_dim, self.input_dim + self.hidden_dim
        if self.weight.shape != (4 * h, n) or self.bias.shape != (4 * h,):
            raise ValueError(f"LSTM shapes {self.weight.shape}/{self.bias.shape} do not match "
                             f"input_dim={self.input_dim}, hidden_dim={self.hidden_dim}")

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        k = "fiog".index(name)
        h = self.hidden_dim
        return self.weight[k * h:(k + 1) * h], self.bias[k * h:(k + 1) * h]

    W_f = property(lambda self: self.gate("f")[0])
    W_i = property(lambda self: self.gate("i")[0])
    W_o = property(lambda self: self.gate("o")[0])
    W_g = property(lambda self: self.gate("g")[0])

    def arrays(self) -> list:
        return [self.weight, self.bias]

    def copy(self) -> "LstmParams":
        return LstmParams(self.input_dim, self.hidden_dim, self.weight.copy(), self.bias.copy())


@dataclass
class LstmCache:
    x: np.ndarray
    h_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c_prev: np.ndarray
    tanh_c: np.ndarray
    version: int


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def _cell(params: LstmParams, a: np.ndarray, x, h_prev, c_prev):
    H = params.hidden_dim
    s = sigmoid(a[:, :3 * H])
    f, i, o = s[:, :H], s[:, H:2 * H], s[:, 2 * H:]
    g = np.tanh(a[:, 3 * H:])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    return h, c, LstmCache(x, h_prev, f, i, o, g, c_prev, tanh_c, params.version)


def lstm_step(params: LstmParams, x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
    """One cell step on a batch. Returns ``(h, c, cache)``.

    f, i, o = sigmoid(W_{f,i,o} [x; h_prev] + b), g = tanh(W_g [x; h_prev] + b_g),
    c = f * c_prev + i * g, h = o * tanh(c).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    h_prev = np.atleast_2d(h_prev)
    c_prev = np.atleast_2d(c_prev)
    I, H = params.input_dim, params.hidden_dim
    if x.shape[1] != I or h_prev.shape[1] != H or c_prev.shape[1] != H:
        raise ValueError("lstm_step: shape mismatch")
    a = x @ params.weight[:, :I].T + h_prev @ params.weight[:, I:].T + params.bias
    return _cell(params, a, x, h_prev, c_prev)


def lstm_unroll(params: LstmParams, xs, h0=None, c0=None):
    """Run the cell over ``xs`` (time-major, ``(L, B, input_dim)``) from zero state unless given.

    Input projections for all steps are computed in one product; only the
    recurrent term is sequential.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 3 or xs.shape[0] == 0:
        raise ValueError("empty unroll" if xs.size == 0 else "xs must be (L, B, input_dim)")
    L, B, I = xs.shape
    if I != params.input_dim:
        raise ValueError("lstm_unroll: input dim mismatch")
    H = params.hidden_dim
    proj = (xs.reshape(L * B, I) @ params.weight[:, :I].T + params.bias).reshape(L, B, 4 * H)
    w_h = params.weight[:, I:].T
    h = np.zeros((B, H)) if h0 is None else h0
    c = np.zeros((B, H)) if c0 is None else c0
    hs, caches = [], []
    for t in range(L):
        h, c, cache = _cell(params, proj[t] + h @ w_h, xs[t], h, c)
        hs.append(h)
        caches.append(cache)
    return hs, caches


def lstm_backward_through_time(params: LstmParams, caches: Sequence[LstmCache], dh: Sequence):
    """BPTT over a contiguous unroll.

    ``dh[t]`` is the loss gradient w.r.t. the hidden output of step ``t`` (``None``
    for none). Returns ``([dW, db], dxs)`` with ``dxs`` time-major.
    """
    if len(caches) == 0:
        raise ValueError("empty unroll")
    if len(dh) != len(caches):
        raise ValueError("need one output gradient (or None) per step")
    I = params.input_dim
    w_h = params.weight[:, I:]
    das = [None] * len(caches)
    dh_next = None
    dc_next = None
    for t in range(len(caches) - 1, -1, -1):
        k = caches[t]
        if k.version != params.version:
            raise StaleCacheError("cache does not come from the current parameters")
        g_h = dh[t]
        if g_h is None:
            g_h = dh_next if dh_next is not None else np.zeros_like(k.c_prev)
        elif dh_next is not None:
            g_h = g_h + dh_next
        do = g_h * k.tanh_c
        g_c = g_h * k.o * (1.0 - k.tanh_c * k.tanh_c)
        if dc_next is not None:
            g_c = g_c + dc_next
        da = np.concatenate([g_c * k.c_prev * k.f * (1.0 - k.f), g_c * k.g * k.i * (1.0 - k.i),
                             do * k.o * (1.0 - k.o), g_c * k.i * (1.0 - k.g * k.g)], axis=1)
        das[t] = da
        dh_next = da @ w_h
        dc_next = g_c * k.f
    DA = np.concatenate(das)
    X = np.concatenate([k.x for k in caches])
    HP = np.concatenate([k.h_prev for k in caches])
    dW = np.concatenate([DA.T @ X, DA.T @ HP], axis=1)
    db = DA.sum(axis=0)
    dX = DA @ params.weight[:, :I]
    B = caches[0].x.shape[0]
    dxs = [dX[t * B:(t + 1) * B] for t in range(len(caches))]
    return [dW, db], dxs


# --- optimizer / init -------------------------------------------------------------

@dataclass
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def arrays(self) -> list:
        return list(self.m) + list(self.v)


def adam_update(state: AdamState, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
    """In-place Adam step with bias correction."""
    if len(params) != len(grads):
        raise ValueError("params and grads differ in length")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise DivergenceError("non-finite gradient")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    step = state.learning_rate * math.sqrt(1.0 - b2 ** state.t) / (1.0 - b1 ** state.t)
    eps_hat = state.eps * math.sqrt(1.0 - b2 ** state.t)
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= step * m / (np.sqrt(v) + eps_hat)


def xavier_uniform(fan_out: int, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def init_mlp(dims: Sequence[int], activations: Sequence[str], rng: np.random.Generator) -> MlpParams:
    """``dims = [in, h1, ..., out]``; one activation per layer."""
    if len(dims) < 2 or len(activations) != len(dims) - 1 or min(dims) < 1:
        raise ValueError(f"bad MLP spec dims={dims} activations={activations}")
    layers = [Layer(xavier_uniform(o, i, rng), np.zeros(o), act)
              for i, o, act in zip(dims[:-1], dims[1:], activations)]
    return MlpParams(layers)


def init_lstm(input_dim: int, hidden_dim: int, rng: np.random.Generator) -> LstmParams:
    if input_dim < 1 or hidden_dim < 1:
        raise ValueError("LSTM dims must be positive")
    w = np.concatenate([xavier_uniform(hidden_dim, input_dim + hidden_dim, rng) for _ in range(4)])
    return LstmParams(input_dim, hidden_dim, w, np.zeros(4 * hidden_dim))


# --- gradient checking ---------------------------------------------------------------

@dataclass
class GradCheckReport:
    max_rel_error: float
    max_abs_error: float
    worst: tuple
    checked: int

    def ok(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def relative_error(a: float, n: float, floor: float = 1e-7) -> float:
    return abs(a - n) / max(abs(a), abs(n), floor)


def finite_diff_check(loss_fn: Callable[[], float], params: Sequence[np.ndarray],
                      analytic: Sequence[np.ndarray], h: float = 1e-5,
                      floor: float = 1e-7) -> GradCheckReport:
    """Compare ``analytic`` against central differences of ``loss_fn`` over every entry.

    ``loss_fn`` takes no arguments and must read ``params`` in place; each entry
    is perturbed and restored.
    """
    worst_rel, worst_abs, worst, n = 0.0, 0.0, (), 0
    for k, (p, g) in enumerate(zip(params, analytic)):
        flat = p.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            fp = loss_fn()
            flat[j] = orig - h
            fm = loss_fn()
            flat[j] = orig
            num = (fp - fm) / (2.0 * h)
            rel = relative_error(gflat[j], num, floor)
            worst_abs = max(worst_abs, abs(gflat[j] - num))
            if rel > worst_rel:
                worst_rel, worst = rel, (k, j)
            n += 1
    return GradCheckReport(worst_rel, worst_abs, worst, n)


# --- checkpoints ----------------------------------------------------------------------

def save_checkpoint(path: str | Path, named: Sequence[tuple[str, np.ndarray]], meta: dict) -> Path:
    """Write ``<path>.manifest`` (key = value text) and ``<path>.bin`` (little-endian float64).

    Arrays are concatenated in the order given; the manifest lists each array
    as ``array.<k> = name shape`` so the blob can be split without the code
    that produced it.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{k} = {v}" for k, v in meta.items()]
    lines.append(f"arrays = {len(named)}")
    total = 0
    for k, (name, arr) in enumerate(named):
        shape = "x".join(str(d) for d in arr.shape) or "scalar"
        lines.append(f"array.{k} = {name} {shape}")
        total += arr.size
    lines.append(f"values = {total}")
    blob = np.concatenate([np.asarray(a, dtype="<f8").reshape(-1) for _, a in named]) if named else np.zeros(0)
    path.with_suffix(".bin").write_bytes(blob.astype("<f8").tobytes())
    path.with_suffix(".manifest").write_text("\n".join(lines) + "\n")
    return path


def load_checkpoint(path: str | Path) -> tuple[dict, list]:
    path = Path(path)
    meta, specs = {}, []
    for line in path.with_suffix(".manifest").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key.startswith("array."):
            name, shape = value.rsplit(" ", 1)
            dims = () if shape == "scalar" else tuple(int(d) for d in shape.split("x"))
            specs.append((name, dims))
        else:
            meta[key] = value
    flat = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<f8")
    expected = int(meta.pop("values"))
    meta.pop("arrays", None)
    if flat.size != expected:
        raise ValueError(f"checkpoint blob has {flat.size} values, manifest declares {expected}")
    out, off = [], 0
    for name, dims in specs:
        n = int(np.prod(dims)) if dims else 1
        out.append((name, flat[off:off + n].reshape(dims).copy()))
        off += n
    return meta, out
