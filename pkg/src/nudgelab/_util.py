"""Shared numeric helpers: stable transforms, Adam steps, seed derivation."""

from __future__ import annotations

import zlib

import numpy as np
from scipy.special import expit


def softplus(x):
    """log(1 + exp(x)), overflow-safe."""
    return np.logaddexp(0.0, x)


def softplus_inverse(y):
    """Inverse of softplus for y > 0: log(exp(y) - 1)."""
    y = np.asarray(y, dtype=float)
    return y + np.log(-np.expm1(-y))


def log_sigmoid(z):
    """log(sigmoid(z)) = -softplus(-z)."""
    return -np.logaddexp(0.0, -z)


def bernoulli_loglik(y, z):
    """Pointwise log Bernoulli(y | sigmoid(z)) = y*z - softplus(z)."""
    return y * z - np.logaddexp(0.0, z)


def derive_seed(*parts) -> int:
    """Fold arbitrary parts (ints, strings) into one stable 32-bit seed.

    Uses CRC32 chaining, so the result is identical across platforms and
    interpreter runs; used wherever a sub-stream seed is needed (per
    subject, per restart, per evaluation run).
    """
    acc = 0
    for part in parts:
        data = str(part).encode("utf-8")
        acc = zlib.crc32(data, acc)
    return acc & 0xFFFFFFFF


class Adam:
    """Plain deterministic Adam on a flat parameter vector (minimization)."""

    def __init__(self, size: int, learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = float(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return theta - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def sigmoid(z):
    """Numerically stable logistic function."""
    return expit(z)
