"""Fully connected ReLU network with hand-written backprop and Adam updates.

Default topology is state_size -> 256 -> 128 -> 64 -> action_size with ReLU on
the hidden layers and a linear output.  Everything is float64.  Inputs may be a
single vector or a batch (rows are samples).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractViolation, NonFiniteGradientError

HIDDEN_SIZES = (256, 128, 64)


class Gradients(list):
    """Per-parameter gradient list whose entries are views into ``flat``."""

    flat: np.ndarray


class Network:
    def __init__(self, dims: Sequence[int], seed: int | None = 0):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2 or min(dims) < 1:
            raise ContractViolation(f"invalid layer dimensions {dims}")
        self.dims = dims
        self._allocate()
        rng = np.random.default_rng(seed)
        for w, b in zip(self.weights, self.biases):
            fan_in, fan_out = w.shape
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            w[...] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            b[...] = 0.0

    def _allocate(self, flat: np.ndarray | None = None) -> None:
        # all parameters live in one contiguous vector; weights/biases are views into it
        sizes = [a * b + b for a, b in zip(self.dims[:-1], self.dims[1:])]
        self.flat = np.zeros(sum(sizes)) if flat is None else flat
        views = self._views(self.flat)
        self.weights: list[np.ndarray] = views[0::2]
        self.biases: list[np.ndarray] = views[1::2]
        self._cache: tuple | None = None

    @classmethod
    def q_network(cls, state_size: int, action_size: int, seed: int | None = 0,
                  hidden: Sequence[int] = HIDDEN_SIZES) -> "Network":
        return cls((state_size, *hidden, action_size), seed)

    @property
    def state_size(self) -> int:
        return self.dims[0]

    @property
    def action_size(self) -> int:
        return self.dims[-1]

    def parameters(self) -> list[np.ndarray]:
        """Parameters in a fixed order: W1, b1, W2, b2, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def set_parameters(self, params: Sequence[np.ndarray]) -> None:
        params = list(params)
        if len(params) != 2 * len(self.weights):
            raise ContractViolation("parameter list length does not match the network")
        for dst, src in zip(self.parameters(), params):
            if dst.shape != np.shape(src):
                raise ContractViolation("parameter shapes do not match the network")
            dst[...] = src

    def copy(self) -> "Network":
        twin = Network.__new__(Network)
        twin.dims = self.dims
        twin._allocate(self.flat.copy())
        return twin

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        a = x[None, :] if single else x
        if a.ndim != 2 or a.shape[1] != self.dims[0]:
            raise ContractViolation(f"expected input width {self.dims[0]}, got shape {x.shape}")
        acts = [a]
        pre = []
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            pre.append(z)
            a = z if k == last else np.maximum(z, 0.0)
            acts.append(a)
        if cache:
            self._cache = (single, acts, pre)
        return a[0] if single else a

    __call__ = forward

    def backward(self, output_grad: np.ndarray) -> list[np.ndarray]:
        """Gradients of a scalar loss w.r.t. every parameter, given dL/d(output).

        Uses the activations cached by the most recent ``forward`` call.  For a
        batch, gradients are summed over rows.
        """
        if self._cache is None:
            raise ContractViolation("backward called without a cached forward pass")
        single, acts, pre = self._cache
        g = np.asarray(output_grad, dtype=float)
        g = g[None, :] if single else g
        if g.shape != acts[-1].shape:
            raise ContractViolation(f"output_grad shape {g.shape} != output shape {acts[-1].shape}")
        flat = np.empty_like(self.flat)
        grads = Gradients(self._views(flat))
        grads.flat = flat
        for k in range(len(self.weights) - 1, -1, -1):
            if k != len(self.weights) - 1:
                g = g * (pre[k] > 0)
            np.matmul(acts[k].T, g, out=grads[2 * k])
            np.sum(g, axis=0, out=grads[2 * k + 1])
            if k:
                g = g @ self.weights[k].T
        return grads

    def _views(self, flat: np.ndarray) -> list[np.ndarray]:
        out = []
        off = 0
        for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:]):
            out.append(flat[off:off + fan_in * fan_out].reshape(fan_in, fan_out))
            off += fan_in * fan_out
            out.append(flat[off:off + fan_out])
            off += fan_out
        return out

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.flat).all())

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        net = cls.__new__(cls)
        net.dims = tuple(int(d) for d in doc["dims"])
        net._allocate()
        for w, data in zip(net.weights, doc["weights"]):
            w[...] = np.array(data, dtype=float).reshape(w.shape)
        for b, data in zip(net.biases, doc["biases"]):
            b[...] = np.array(data, dtype=float).reshape(b.shape)
        return net


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def backward(net: Network, x: np.ndarray, output_grad: np.ndarray) -> list[np.ndarray]:
    net.forward(x)
    return net.backward(output_grad)


@dataclass
class OptimizerState:
    """Adam state; moments are flat vectors aligned with ``Network.flat``."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default_factory=lambda: np.zeros(0))
    v: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def for_network(cls, net: Network, lr: float = 0.001) -> "OptimizerState":
        return cls(lr=lr, m=np.zeros_like(net.flat), v=np.zeros_like(net.flat))

    def to_dict(self) -> dict:
        return {
            "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps,
            "step": self.step, "m": self.m.tolist(), "v": self.v.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict, net: Network) -> "OptimizerState":
        m = np.array(doc["m"], dtype=float)
        v = np.array(doc["v"], dtype=float)
        if m.shape != net.flat.shape or v.shape != net.flat.shape:
            raise ContractViolation("optimizer moments do not match the network")
        return cls(lr=doc["lr"], beta1=doc["beta1"], beta2=doc["beta2"], eps=doc["eps"],
                   step=int(doc["step"]), m=m, v=v)


def flatten(grads: Sequence[np.ndarray]) -> np.ndarray:
    flat = getattr(grads, "flat", None)
    if flat is not None:
        return flat
    return np.concatenate([np.ravel(g) for g in grads])


def update(net: Network, grads: Sequence[np.ndarray], opt: OptimizerState) -> Network:
    """One Adam step in place.  Non-finite gradients leave everything untouched."""
    params = net.parameters()
    if len(grads) != len(params) or any(np.shape(g) != p.shape for g, p in zip(grads, params)):
        raise ContractViolation("gradient shapes do not match the network")
    g = flatten(grads)
    if not math.isfinite(float(g.sum())):
        bad = next((i for i, gi in enumerate(grads) if not np.isfinite(gi).all()), None)
        if bad is not None:
            raise NonFiniteGradientError(f"non-finite gradient in parameter block {bad}; update rejected")
    opt.step += 1
    t = opt.step
    c1 = 1.0 - opt.beta1 ** t
    c2 = math.sqrt(1.0 - opt.beta2 ** t)
    buf = np.multiply(g, 1.0 - opt.beta1)
    opt.m *= opt.beta1
    opt.m += buf
    np.multiply(g, g, out=buf)
    buf *= 1.0 - opt.beta2
    opt.v *= opt.beta2
    opt.v += buf
    # bias corrections folded into the step size; eps is rescaled so this equals
    # lr * m_hat / (sqrt(v_hat) + eps)
    np.sqrt(opt.v, out=buf)
    buf += opt.eps * c2
    np.divide(opt.m, buf, out=buf)
    buf *= opt.lr * c2 / c1
    net.flat -= buf
    return net


def soft_update(target: Network, online: Network, tau: float) -> Network:
    """target <- tau * online + (1 - tau) * target, in place."""
    if target.dims != online.dims:
        raise ContractViolation(f"shape mismatch {target.dims} vs {online.dims}")
    if not 0.0 < tau <= 1.0:
        raise ContractViolation("tau_soft must lie in (0, 1]")
    if tau == 1.0:
        target.flat[...] = online.flat
    else:
        target.flat *= 1.0 - tau
        target.flat += tau * online.flat
    return target
