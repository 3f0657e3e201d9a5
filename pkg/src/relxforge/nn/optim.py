"""SGD, Adam, and AdamW over Tensor parameters.

AdamW keeps weight decay out of the moment estimates (decoupled); Adam
folds it into the gradient (classic L2 coupling). All three read a
missing gradient as zeros, so decay applies to parameters the last
backward never touched.
"""

from __future__ import annotations

import numpy as np

from .tensor import ShapeMismatch, Tensor


class Optimizer:
    def __init__(self, params, lr: float):
        self.params = list(params)
        if not self.params:
            raise ValueError("optimizer needs at least one parameter")
        self.lr = float(lr)
        self.step_count = 0

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    @staticmethod
    def _grad(p: Tensor) -> np.ndarray:
        if p.grad is None:
            return np.zeros_like(p.data)
        if p.grad.shape != p.data.shape:
            raise ShapeMismatch(f"grad shape {p.grad.shape} != param shape {p.data.shape}")
        return p.grad

    def step(self):
        raise NotImplementedError

    def state_dict(self) -> dict:
        return {"step": self.step_count}

    def load_state_dict(self, state: dict):
        self.step_count = int(state["step"])


class SGD(Optimizer):
    def __init__(self, params, lr: float, weight_decay: float = 0.0):
        super().__init__(params, lr)
        self.weight_decay = float(weight_decay)

    def step(self):
        self.step_count += 1
        for p in self.params:
            g = self._grad(p)
            if self.weight_decay:
                g = g + self.weight_decay * p.data
            p.data -= self.lr * g


class Adam(Optimizer):
    """Classic Adam; weight_decay here is L2 folded into the gradient."""

    decoupled = False

    def __init__(
        self,
        params,
        lr: float,
        betas: tuple = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        super().__init__(params, lr)
        self.beta1, self.beta2 = float(betas[0]), float(betas[1])
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.step_count += 1
        t = self.step_count
        bias1 = 1.0 - self.beta1**t
        bias2 = 1.0 - self.beta2**t
        for p, m, v in zip(self.params, self.m, self.v):
            g = self._grad(p)
            if self.weight_decay:
                if self.decoupled:
                    p.data -= self.lr * self.weight_decay * p.data
                else:
                    g = g + self.weight_decay * p.data
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            m_hat = m / bias1
            v_hat = v / bias2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def state_dict(self) -> dict:
        return {
            "step": self.step_count,
            "m": [np.array(b, copy=True) for b in self.m],
            "v": [np.array(b, copy=True) for b in self.v],
        }

    def load_state_dict(self, state: dict):
        super().load_state_dict(state)
        if len(state["m"]) != len(self.params) or len(state["v"]) != len(self.params):
            raise ShapeMismatch("optimizer state does not match parameter count")
        for buf, saved in zip(self.m, state["m"]):
            if buf.shape != saved.shape:
                raise ShapeMismatch(f"moment shape {saved.shape} != {buf.shape}")
            buf[...] = saved
        for buf, saved in zip(self.v, state["v"]):
            buf[...] = saved


class AdamW(Adam):
    """Adam with decoupled decay: p <- p - lr*wd*p, moments see raw grads."""

    decoupled = True
