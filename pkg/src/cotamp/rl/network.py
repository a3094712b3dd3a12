"""MLP actor-critic over a flat float64 parameter vector.

Two tanh hidden layers feed an action-mean head and a scalar value head;
the exploration log-std is a state-independent learnable vector. Gradients
are computed by hand (see backward) so they can be verified against finite
differences, and the flat parameter layout maps directly onto the
checkpoint format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NetConfig:
    obs_dim: int
    act_dim: int = 2
    hidden: tuple[int, int] = (64, 64)
    log_std_min: float = -5.0
    log_std_max: float = 2.0
    log_std_init: float = 0.0

    def __post_init__(self):
        if self.obs_dim < 1 or self.act_dim < 1:
            raise ValueError("obs_dim and act_dim must be positive")
        if len(self.hidden) != 2 or any(h < 1 for h in self.hidden):
            raise ValueError("hidden must be two positive layer sizes")
        if self.log_std_min >= self.log_std_max:
            raise ValueError("log_std bounds must satisfy min < max")


def _orthogonal(rng: np.random.Generator, shape: tuple[int, int], gain: float) -> np.ndarray:
    a = rng.standard_normal(shape)
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    w = u if u.shape == shape else vt
    return gain * w


class PolicyNet:
    """Flat-parameter actor-critic; all views alias one float64 vector."""

    def __init__(self, cfg: NetConfig, rng: Optional[np.random.Generator] = None,
                 params: Optional[np.ndarray] = None):
        self.cfg = cfg
        h1, h2 = cfg.hidden
        self._shapes = [
            ("w1", (h1, cfg.obs_dim)),
            ("b1", (h1,)),
            ("w2", (h2, h1)),
            ("b2", (h2,)),
            ("w_mean", (cfg.act_dim, h2)),
            ("b_mean", (cfg.act_dim,)),
            ("w_value", (1, h2)),
            ("b_value", (1,)),
            ("log_std", (cfg.act_dim,)),
        ]
        self.n_params = sum(int(np.prod(s)) for _, s in self._shapes)
        if params is not None:
            params = np.asarray(params, dtype=np.float64)
            if params.shape != (self.n_params,):
                raise ValueError(f"expected {self.n_params} parameters, got {params.shape}")
            self.params = params.copy()
        else:
            self.params = np.zeros(self.n_params, dtype=np.float64)
        self._views = {}
        offset = 0
        for name, shape in self._shapes:
            size = int(np.prod(shape))
            self._views[name] = self.params[offset : offset + size].reshape(shape)
            offset += size
        if params is None and rng is not None:
            self._init_weights(rng)

    def _init_weights(self, rng: np.random.Generator) -> None:
        self._views["w1"][:] = _orthogonal(rng, self._views["w1"].shape, math.sqrt(2.0))
        self._views["w2"][:] = _orthogonal(rng, self._views["w2"].shape, math.sqrt(2.0))
        self._views["w_mean"][:] = _orthogonal(rng, self._views["w_mean"].shape, 0.01)
        self._views["w_value"][:] = _orthogonal(rng, self._views["w_value"].shape, 1.0)
        self._views["log_std"][:] = self.cfg.log_std_init

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    def clone(self) -> "PolicyNet":
        return PolicyNet(self.cfg, params=self.params)

    @property
    def log_std(self) -> np.ndarray:
        return np.clip(self._views["log_std"], self.cfg.log_std_min, self.cfg.log_std_max)

    def forward(self, obs: np.ndarray):
        """Batch forward pass: (mean (B, act), log_std (act,), value (B,))."""
        mean, log_std, value, _ = self.forward_cache(obs)
        return mean, log_std, value

    def forward_single(self, obs: np.ndarray):
        mean, log_std, value = self.forward(obs.reshape(1, -1))
        return mean[0], log_std, float(value[0])

    def forward_cache(self, obs: np.ndarray):
        x = np.asarray(obs, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.cfg.obs_dim:
            raise ValueError(f"expected (batch, {self.cfg.obs_dim}) observations, got {x.shape}")
        v = self._views
        h1 = np.tanh(x @ v["w1"].T + v["b1"])
        h2 = np.tanh(h1 @ v["w2"].T + v["b2"])
        mean = h2 @ v["w_mean"].T + v["b_mean"]
        value = (h2 @ v["w_value"].T + v["b_value"])[:, 0]
        cache = (x, h1, h2)
        return mean, self.log_std, value, cache

    def backward(self, cache, d_mean: np.ndarray, d_value: np.ndarray,
                 d_log_std: np.ndarray) -> np.ndarray:
        """Flat gradient for upstream gradients on mean, value and log_std.

        d_log_std is the gradient w.r.t. the clipped log-std; the clip mask
        zeroes it where the raw parameter sits outside the bounds.
        """
        x, h1, h2 = cache
        v = self._views
        g = {name: None for name, _ in self._shapes}
        g["w_mean"] = d_mean.T @ h2
        g["b_mean"] = d_mean.sum(axis=0)
        g["w_value"] = (d_value[None, :] @ h2)
        g["b_value"] = np.array([d_value.sum()])
        d_h2 = d_mean @ v["w_mean"] + d_value[:, None] * v["w_value"]
        d_z2 = d_h2 * (1.0 - h2 * h2)
        g["w2"] = d_z2.T @ h1
        g["b2"] = d_z2.sum(axis=0)
        d_h1 = d_z2 @ v["w2"]
        d_z1 = d_h1 * (1.0 - h1 * h1)
        g["w1"] = d_z1.T @ x
        g["b1"] = d_z1.sum(axis=0)
        raw = self._views["log_std"]
        mask = (raw >= self.cfg.log_std_min) & (raw <= self.cfg.log_std_max)
        g["log_std"] = d_log_std * mask
        return np.concatenate([g[name].ravel() for name, _ in self._shapes])


def gaussian_log_prob(action: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Diagonal-Gaussian log density, summed over action dimensions."""
    z = (action - mean) / np.exp(log_std)
    per_dim = -0.5 * z * z - log_std - 0.5 * LOG_2PI
    return per_dim.sum(axis=-1)


def gaussian_entropy(log_std: np.ndarray) -> float:
    """Entropy of the diagonal Gaussian (state-independent)."""
    return float(np.sum(log_std + 0.5 * (1.0 + LOG_2PI)))


def sample_action(mean: np.ndarray, log_std: np.ndarray, rng: np.random.Generator):
    """Draw from N(mean, exp(log_std)^2); returns the raw draw and its exact
    log density. Clamping to the unit action box happens at decode time so
    stored (action, log_prob) pairs stay self-consistent for the update.
    """
    noise = rng.standard_normal(mean.shape[-1])
    action = mean + np.exp(log_std) * noise
    return action, float(gaussian_log_prob(action, mean, log_std))
