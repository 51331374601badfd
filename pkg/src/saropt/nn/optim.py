"""Adam optimiser with serialisable state."""

from __future__ import annotations

import numpy as np


class Adam:
    """Adam over a name->Parameter mapping.

    Keying the moment buffers by parameter path keeps optimiser state
    checkpointable alongside the network archives.
    """

    def __init__(self, named_params, lr=2e-4, beta1=0.5, beta2=0.999, eps=1e-8):
        self.params = dict(named_params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for k, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            m = self.m[k]
            v = self.v[k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def state_dict(self):
        state = {"__t": np.asarray(self.t)}
        for k in self.params:
            state[f"m/{k}"] = self.m[k].copy()
            state[f"v/{k}"] = self.v[k].copy()
        return state

    def load_state_dict(self, state):
        self.t = int(state["__t"])
        for k in self.params:
            self.m[k] = state[f"m/{k}"].copy()
            self.v[k] = state[f"v/{k}"].copy()
