"""Clipped-surrogate policy optimization over fixed-size rollouts.

The update minimizes

    -E[min(rho*A, clip(rho, 1-eps, 1+eps)*A)]
    + value_coef * E[(V - returns)^2]
    - entropy_coef * H(pi)

with several epochs of shuffled minibatches per rollout. Gradients are
assembled analytically from the per-sample log-density derivatives and
pushed through PolicyNet.backward; advantages come from exponentially
weighted TD residuals (GAE) and are normalized buffer-wide before the
surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .network import PolicyNet, gaussian_entropy, gaussian_log_prob


@dataclass(frozen=True)
class PPOParams:
    learning_rate: float = 5e-4
    n_steps: int = 200
    batch_size: int = 50
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    epochs_per_update: int = 10
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    total_episodes: int = 800
    # initial exploration scale for freshly created policies
    log_std_init: float = -0.7

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must be in [0, 1]")
        if self.n_steps % self.batch_size != 0:
            raise ValueError("batch_size must divide n_steps")
        if self.learning_rate <= 0 or self.epochs_per_update < 1:
            raise ValueError("invalid optimizer settings")
        if self.total_episodes < 0:
            raise ValueError("total_episodes must be >= 0")


class RolloutBuffer:
    """Fixed-capacity on-policy storage; one update consumes one full buffer."""

    def __init__(self, n_steps: int, obs_dim: int, act_dim: int):
        self.capacity = n_steps
        self.obs = np.zeros((n_steps, obs_dim))
        self.actions = np.zeros((n_steps, act_dim))
        self.log_probs = np.zeros(n_steps)
        self.rewards = np.zeros(n_steps)
        self.values = np.zeros(n_steps)
        self.dones = np.zeros(n_steps, dtype=bool)
        self.ptr = 0

    @property
    def full(self) -> bool:
        return self.ptr >= self.capacity

    def add(self, obs, action, log_prob, reward, value, done) -> None:
        if self.full:
            raise RuntimeError("rollout buffer is full")
        i = self.ptr
        self.obs[i] = obs
        self.actions[i] = action
        self.log_probs[i] = log_prob
        self.rewards[i] = reward
        self.values[i] = value
        self.dones[i] = done
        self.ptr += 1

    def reset(self) -> None:
        self.ptr = 0


def gae_advantages(rewards, values, dones, last_value, gamma, lam):
    """GAE advantages and returns.

    delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t, advantages accumulate
    delta through (gamma*lam) with episode boundaries masked; V_{T} is
    last_value (0 when the final step ended its episode). returns are
    advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    n = len(rewards)
    advantages = np.zeros(n)
    gae = 0.0
    next_value = float(last_value)
    for t in range(n - 1, -1, -1):
        not_done = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * not_done - values[t]
        gae = delta + gamma * lam * not_done * gae
        advantages[t] = gae
        next_value = values[t]
    return advantages, advantages + values


class Adam:
    """Standard Adam over the flat parameter vector."""

    def __init__(self, n_params: int, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class BatchStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float
    initial_ratio_error: float
    n_batches: int


def ppo_loss_and_grad(
    net: PolicyNet,
    obs: np.ndarray,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    clip_epsilon: float,
    value_coef: float,
    entropy_coef: float,
):
    """Minimized objective value, its flat gradient, and batch statistics."""
    mean, log_std, value, cache = net.forward_cache(obs)
    n = len(obs)
    sigma = np.exp(log_std)
    z = (actions - mean) / sigma
    log_probs = gaussian_log_prob(actions, mean, log_std)
    ratio = np.exp(log_probs - old_log_probs)

    surr1 = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    surr2 = clipped * advantages
    use1 = surr1 <= surr2
    policy_loss = -np.minimum(surr1, surr2).mean()

    in_range = (ratio >= 1.0 - clip_epsilon) & (ratio <= 1.0 + clip_epsilon)
    d_surr_d_ratio = np.where(use1, advantages, advantages * in_range)
    d_log_prob = -(d_surr_d_ratio * ratio) / n

    value_err = value - returns
    value_loss = float((value_err * value_err).mean())
    d_value = value_coef * 2.0 * value_err / n

    entropy = gaussian_entropy(log_std)

    loss = float(policy_loss) + value_coef * value_loss - entropy_coef * entropy
    if not np.isfinite(loss) or not np.all(np.isfinite(d_log_prob)):
        raise FloatingPointError(
            f"non-finite PPO loss (policy={policy_loss}, value={value_loss}, "
            f"entropy={entropy}) on a batch of {n} samples"
        )

    d_mean = d_log_prob[:, None] * z / sigma
    d_log_std = (d_log_prob[:, None] * (z * z - 1.0)).sum(axis=0) - entropy_coef
    grad = net.backward(cache, d_mean, d_value, d_log_std)

    stats = BatchStats(
        policy_loss=float(policy_loss),
        value_loss=value_loss,
        entropy=entropy,
        clip_fraction=float(np.mean(~in_range)),
        approx_kl=float(np.mean(old_log_probs - log_probs)),
    )
    return loss, grad, stats


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    mean = advantages.mean()
    std = advantages.std()
    if std < 1e-12:
        return advantages - mean
    return (advantages - mean) / std


def ppo_update(
    net: PolicyNet,
    buffer: RolloutBuffer,
    last_value: float,
    params: PPOParams,
    adam: Adam,
    rng: np.random.Generator,
) -> UpdateStats:
    """Several epochs of minibatch Adam steps on one full rollout."""
    if not buffer.full:
        raise RuntimeError(f"buffer holds {buffer.ptr}/{buffer.capacity} steps")
    advantages, returns = gae_advantages(
        buffer.rewards, buffer.values, buffer.dones, last_value,
        params.gamma, params.gae_lambda,
    )
    advantages = normalize_advantages(advantages)

    # ratio identity check: before any step the importance ratios are 1
    fresh_log_probs = gaussian_log_prob(
        buffer.actions,
        net.forward(buffer.obs)[0],
        net.log_std,
    )
    initial_ratio_error = float(np.max(np.abs(np.exp(fresh_log_probs - buffer.log_probs) - 1.0)))

    n = buffer.capacity
    batch_stats: list[BatchStats] = []
    for _ in range(params.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            idx = order[start : start + params.batch_size]
            _, grad, stats = ppo_loss_and_grad(
                net,
                buffer.obs[idx],
                buffer.actions[idx],
                buffer.log_probs[idx],
                advantages[idx],
                returns[idx],
                params.clip_epsilon,
                params.value_coef,
                params.entropy_coef,
            )
            adam.step(net.params, grad)
            batch_stats.append(stats)
    if not np.all(np.isfinite(net.params)):
        raise FloatingPointError("non-finite parameters after update")
    return UpdateStats(
        policy_loss=float(np.mean([s.policy_loss for s in batch_stats])),
        value_loss=float(np.mean([s.value_loss for s in batch_stats])),
        entropy=float(np.mean([s.entropy for s in batch_stats])),
        clip_fraction=float(np.mean([s.clip_fraction for s in batch_stats])),
        approx_kl=float(np.mean([s.approx_kl for s in batch_stats])),
        initial_ratio_error=initial_ratio_error,
        n_batches=len(batch_stats),
    )
