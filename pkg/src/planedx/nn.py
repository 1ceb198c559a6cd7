"""Minimal differentiable-computation layer.

Dense layers, pointwise nonlinearities, a bidirectional gated recurrent
encoder (GRU by default, LSTM selectable), softmax cross-entropy, the
AdamW update, and a central-finite-difference gradient checker. Double
precision throughout; parameters live in a ParamStore that owns the
gradient buffers and optimizer state, so layers can share one optimizer
step and one checkpoint file.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np


@dataclass
class TrainConfig:
    learning_rate: float = 5e-4
    weight_decay: float = 1e-4
    betas: tuple = (0.9, 0.999)
    epsilon: float = 1e-8
    seed: int = 0
    iterations: int = 0

    def validate(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        for b in self.betas:
            if not 0.0 < b < 1.0:
                raise ValueError("betas must lie in (0, 1)")


class ParamStore:
    """Named parameter arrays with paired gradients and AdamW state."""

    def __init__(self, seed=0):
        self.params = {}
        self.grads = {}
        self._m = {}
        self._v = {}
        self.step_count = 0
        self.rng = np.random.default_rng(seed)

    def add_weight(self, name, shape, fan_in=None):
        if name in self.params:
            raise ValueError(f"duplicate parameter {name!r}")
        if fan_in is None:
            fan_in = shape[0]
        bound = 1.0 / np.sqrt(fan_in)
        value = self.rng.uniform(-bound, bound, size=shape)
        self._register(name, value)
        return value

    def add_bias(self, name, size):
        if name in self.params:
            raise ValueError(f"duplicate parameter {name!r}")
        self._register(name, np.zeros(size))
        return self.params[name]

    def _register(self, name, value):
        self.params[name] = np.asarray(value, dtype=np.float64)
        self.grads[name] = np.zeros_like(self.params[name])
        self._m[name] = np.zeros_like(self.params[name])
        self._v[name] = np.zeros_like(self.params[name])

    def zero_grads(self):
        for g in self.grads.values():
            g.fill(0.0)

    def adamw_step(self, cfg: TrainConfig):
        """Decoupled-weight-decay Adam update; zeroes gradients afterwards."""
        cfg.validate()
        for name, g in self.grads.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient in {name!r}")
        self.step_count += 1
        b1, b2 = cfg.betas
        t = self.step_count
        for name, p in self.params.items():
            g = self.grads[name]
            m = self._m[name]
            v = self._v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1 ** t)
            v_hat = v / (1.0 - b2 ** t)
            p -= cfg.learning_rate * (m_hat / (np.sqrt(v_hat) + cfg.epsilon)
                                      + cfg.weight_decay * p)
        self.zero_grads()

    def sgd_step(self, rate, l2=0.0):
        """Plain gradient descent with explicit L2 shrinkage: p -= rate*(2*l2*p + g)."""
        for name, p in self.params.items():
            g = self.grads[name]
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient in {name!r}")
            p -= rate * (2.0 * l2 * p + g)
        self.zero_grads()

    def value_hash(self):
        h = hashlib.sha256()
        for name in self.params:
            h.update(name.encode())
            h.update(self.params[name].tobytes())
        return h.hexdigest()

    def snapshot(self):
        return {name: p.copy() for name, p in self.params.items()}

    def restore(self, snap):
        for name, p in self.params.items():
            np.copyto(p, snap[name])


def save_store(store: ParamStore, path, header=None):
    """Checkpoint: one JSON header line, then f64 little-endian arrays in order."""
    meta = {
        "params": [[name, list(p.shape)] for name, p in store.params.items()],
        "header": header or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(meta, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for p in store.params.values():
            fh.write(p.astype("<f8").tobytes())


def load_store(path):
    """Load a checkpoint; returns (ParamStore, header dict)."""
    with open(path, "rb") as fh:
        line = fh.readline()
        meta = json.loads(line.decode("utf-8"))
        store = ParamStore()
        for name, shape in meta["params"]:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"checkpoint truncated at parameter {name!r}")
            store._register(name, np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
    return store, meta["header"]


class Dense:
    """y = x @ W + b for x of shape (B, n_in) or (n_in,)."""

    def __init__(self, store, name, n_in, n_out):
        self.store = store
        self.name = name
        self.w = store.add_weight(f"{name}.w", (n_in, n_out))
        self.b = store.add_bias(f"{name}.b", n_out)
        self._x = None

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.w.shape[0]:
            raise ValueError(f"{self.name}: input dim {x.shape[-1]} != {self.w.shape[0]}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy):
        x = self._x
        if x.ndim == 1:
            self.store.grads[f"{self.name}.w"] += np.outer(x, dy)
            self.store.grads[f"{self.name}.b"] += dy
        else:
            self.store.grads[f"{self.name}.w"] += x.T @ dy
            self.store.grads[f"{self.name}.b"] += dy.sum(axis=0)
        return dy @ self.w.T


class Relu:
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class Sigmoid:
    def forward(self, x):
        self._y = sigmoid(x)
        return self._y

    def backward(self, dy):
        return dy * self._y * (1.0 - self._y)


class Tanh:
    def forward(self, x):
        self._y = np.tanh(x)
        return self._y

    def backward(self, dy):
        return dy * (1.0 - self._y * self._y)


def sigmoid(x):
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos])) if np.ndim(x) else 0.0
    if np.ndim(x) == 0:
        return 1.0 / (1.0 + np.exp(-x)) if x >= 0 else np.exp(x) / (1.0 + np.exp(x))
    neg = ~pos
    ex = np.exp(x[neg])
    out[neg] = ex / (1.0 + ex)
    return out


def softmax(logits):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_crossentropy(logits, onehot):
    """Mean cross-entropy over the leading axis; returns (loss, dlogits)."""
    probs = softmax(logits)
    onehot = np.asarray(onehot, dtype=np.float64)
    if probs.shape != onehot.shape:
        raise ValueError("logit / target shape mismatch")
    n = probs.shape[0] if probs.ndim == 2 else 1
    loss = -np.sum(onehot * np.log(probs + 1e-12)) / n
    dlogits = (probs - onehot) / n
    return loss, dlogits


class _GRUCell:
    def __init__(self, store, name, n_in, n_hidden):
        self.store = store
        self.name = name
        self.h = n_hidden
        for gate in ("z", "r", "h"):
            store.add_weight(f"{name}.w{gate}", (n_in, n_hidden))
            store.add_weight(f"{name}.u{gate}", (n_hidden, n_hidden))
            store.add_bias(f"{name}.b{gate}", n_hidden)

    def _p(self, key):
        return self.store.params[f"{self.name}.{key}"]

    def _g(self, key):
        return self.store.grads[f"{self.name}.{key}"]

    def forward(self, xs):
        h = np.zeros(self.h)
        states, caches = [], []
        for x in xs:
            z = sigmoid(x @ self._p("wz") + h @ self._p("uz") + self._p("bz"))
            r = sigmoid(x @ self._p("wr") + h @ self._p("ur") + self._p("br"))
            c = np.tanh(x @ self._p("wh") + (r * h) @ self._p("uh") + self._p("bh"))
            h_new = (1.0 - z) * h + z * c
            caches.append((x, h, z, r, c))
            states.append(h_new)
            h = h_new
        self._caches = caches
        return np.array(states)

    def backward(self, dstates):
        dxs = np.zeros((len(dstates), self._caches[0][0].shape[0]))
        dh = np.zeros(self.h)
        for t in range(len(dstates) - 1, -1, -1):
            x, h_prev, z, r, c = self._caches[t]
            dh = dh + dstates[t]
            dz = dh * (c - h_prev)
            dc = dh * z
            dh_prev = dh * (1.0 - z)
            dc_pre = dc * (1.0 - c * c)
            self._g("wh") += np.outer(x, dc_pre)
            self._g("uh") += np.outer(r * h_prev, dc_pre)
            self._g("bh") += dc_pre
            drh = dc_pre @ self._p("uh").T
            dr = drh * h_prev
            dh_prev = dh_prev + drh * r
            dr_pre = dr * r * (1.0 - r)
            self._g("wr") += np.outer(x, dr_pre)
            self._g("ur") += np.outer(h_prev, dr_pre)
            self._g("br") += dr_pre
            dh_prev = dh_prev + dr_pre @ self._p("ur").T
            dz_pre = dz * z * (1.0 - z)
            self._g("wz") += np.outer(x, dz_pre)
            self._g("uz") += np.outer(h_prev, dz_pre)
            self._g("bz") += dz_pre
            dh_prev = dh_prev + dz_pre @ self._p("uz").T
            dxs[t] = dc_pre @ self._p("wh").T + dr_pre @ self._p("wr").T \
                + dz_pre @ self._p("wz").T
            dh = dh_prev
        return dxs


class _LSTMCell:
    def __init__(self, store, name, n_in, n_hidden):
        self.store = store
        self.name = name
        self.h = n_hidden
        for gate in ("i", "f", "o", "g"):
            store.add_weight(f"{name}.w{gate}", (n_in, n_hidden))
            store.add_weight(f"{name}.u{gate}", (n_hidden, n_hidden))
            store.add_bias(f"{name}.b{gate}", n_hidden)

    def _p(self, key):
        return self.store.params[f"{self.name}.{key}"]

    def _g(self, key):
        return self.store.grads[f"{self.name}.{key}"]

    def forward(self, xs):
        h = np.zeros(self.h)
        c = np.zeros(self.h)
        states, caches = [], []
        for x in xs:
            i = sigmoid(x @ self._p("wi") + h @ self._p("ui") + self._p("bi"))
            f = sigmoid(x @ self._p("wf") + h @ self._p("uf") + self._p("bf"))
            o = sigmoid(x @ self._p("wo") + h @ self._p("uo") + self._p("bo"))
            g = np.tanh(x @ self._p("wg") + h @ self._p("ug") + self._p("bg"))
            c_new = f * c + i * g
            h_new = o * np.tanh(c_new)
            caches.append((x, h, c, i, f, o, g, c_new))
            states.append(h_new)
            h, c = h_new, c_new
        self._caches = caches
        return np.array(states)

    def backward(self, dstates):
        dxs = np.zeros((len(dstates), self._caches[0][0].shape[0]))
        dh = np.zeros(self.h)
        dc = np.zeros(self.h)
        for t in range(len(dstates) - 1, -1, -1):
            x, h_prev, c_prev, i, f, o, g, c_new = self._caches[t]
            dh = dh + dstates[t]
            tc = np.tanh(c_new)
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dc_prev = dc * f
            dh_prev = np.zeros(self.h)
            dx = np.zeros_like(dxs[t])
            for name, dgate, act in (("i", di, i), ("f", df, f), ("o", do, o)):
                dpre = dgate * act * (1.0 - act)
                self._g(f"w{name}") += np.outer(x, dpre)
                self._g(f"u{name}") += np.outer(h_prev, dpre)
                self._g(f"b{name}") += dpre
                dh_prev += dpre @ self._p(f"u{name}").T
                dx += dpre @ self._p(f"w{name}").T
            dpre = dg * (1.0 - g * g)
            self._g("wg") += np.outer(x, dpre)
            self._g("ug") += np.outer(h_prev, dpre)
            self._g("bg") += dpre
            dh_prev += dpre @ self._p("ug").T
            dx += dpre @ self._p("wg").T
            dxs[t] = dx
            dh = dh_prev
            dc = dc_prev
        return dxs


class BiRNN:
    """Bidirectional recurrent encoder: (T, D) -> (T, 2H), [forward | backward]."""

    def __init__(self, store, name, n_in, n_hidden, cell="gru"):
        cell_cls = {"gru": _GRUCell, "lstm": _LSTMCell}.get(cell)
        if cell_cls is None:
            raise ValueError(f"unknown cell type {cell!r}")
        self.cell_type = cell
        self.fwd = cell_cls(store, f"{name}.fwd", n_in, n_hidden)
        self.bwd = cell_cls(store, f"{name}.bwd", n_in, n_hidden)
        self.h = n_hidden

    def forward(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[0] == 0:
            raise ValueError("BiRNN expects a non-empty (T, D) sequence")
        f = self.fwd.forward(xs)
        b = self.bwd.forward(xs[::-1])[::-1]
        return np.concatenate([f, b], axis=1)

    def backward(self, dy):
        h = self.h
        dxs = self.fwd.backward(dy[:, :h])
        dxs = dxs + self.bwd.backward(dy[::-1, h:])[::-1]
        return dxs


def grad_check(loss_fn, store: ParamStore, names=None, sample=None,
               step=1e-4, seed=0):
    """Central finite differences vs the gradients currently in `store`.

    The caller runs one forward+backward before calling. Coordinates with
    both gradients below 1e-6 in magnitude count as matching. When
    `sample` is given, at most that many seeded random coordinates are
    checked per parameter; otherwise all of them.
    """
    rng = np.random.default_rng(seed)
    names = list(names) if names is not None else list(store.params)
    worst = 0.0
    worst_name = None
    for name in names:
        p = store.params[name]
        analytic = store.grads[name]
        flat_idx = np.arange(p.size)
        if sample is not None and p.size > sample:
            flat_idx = rng.choice(p.size, size=sample, replace=False)
        flat = p.reshape(-1)
        for idx in flat_idx:
            orig = flat[idx]
            flat[idx] = orig + step
            up = loss_fn()
            flat[idx] = orig - step
            down = loss_fn()
            flat[idx] = orig
            fd = (up - down) / (2.0 * step)
            an = analytic.reshape(-1)[idx]
            scale = max(abs(fd), abs(an))
            err = 0.0 if scale < 1e-6 else abs(fd - an) / scale
            if err > worst:
                worst = err
                worst_name = f"{name}[{idx}]"
    return worst, worst_name
