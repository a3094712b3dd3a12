from .network import NetConfig, PolicyNet, gaussian_entropy, gaussian_log_prob, sample_action
from .ppo import (
    Adam,
    PPOParams,
    RolloutBuffer,
    UpdateStats,
    gae_advantages,
    normalize_advantages,
    ppo_loss_and_grad,
    ppo_update,
)
from .training import (
    EpisodeRecord,
    EvalSummary,
    TrainResult,
    episode_seed,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = [
    "NetConfig",
    "PolicyNet",
    "gaussian_entropy",
    "gaussian_log_prob",
    "sample_action",
    "Adam",
    "PPOParams",
    "RolloutBuffer",
    "UpdateStats",
    "gae_advantages",
    "normalize_advantages",
    "ppo_loss_and_grad",
    "ppo_update",
    "EpisodeRecord",
    "EvalSummary",
    "TrainResult",
    "episode_seed",
    "evaluate",
    "load_checkpoint",
    "save_checkpoint",
    "train",
]
