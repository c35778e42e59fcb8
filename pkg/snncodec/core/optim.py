# snncodec/core/optim.py

import numpy as np


class SGD:
    """Stochastic gradient descent with heavy-ball momentum: v = mu*v + g; p -= lr*v."""

    def __init__(self, params, lr=0.05, momentum=0.9):
        self.params = [p for p in params if p.requires_grad]
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        for p, v in zip(self.params, self.velocity):
            if p.grad is None:
                continue
            v *= self.momentum
            v += p.grad
            p.data -= self.lr * v
