from .checkpoint import Checkpoint
from .network import QNetwork, forward, huber, q_loss_and_grads
from .replay import Batch, ReplayBuffer, ReplayEntry
from .train import (
    DQNAgent,
    TrainConfig,
    act_epsilon_greedy,
    policy_distribution,
    self_play_train,
    td_target,
    td_targets,
    train_step,
)

__all__ = [
    "Batch", "Checkpoint", "DQNAgent", "QNetwork", "ReplayBuffer", "ReplayEntry", "TrainConfig",
    "act_epsilon_greedy", "forward", "huber", "policy_distribution", "q_loss_and_grads",
    "self_play_train", "td_target", "td_targets", "train_step",
]
