from .common import EpsilonSchedule, epsilon, greedy, select_action
from .deep import AdrqnAgent, DeepConfig, DqnAgent, EffDqnAgent, FixedDoseAgent, adrqn_loss, dqn_loss
from .replay import EpisodeReplay, ReplayBuffer
from .tabular import EffectiveQAgent, QTable, TabularQAgent

AGENTS = {
    "fixed": FixedDoseAgent,
    "q": TabularQAgent,
    "eff-q": EffectiveQAgent,
    "dqn": DqnAgent,
    "eff-dqn": EffDqnAgent,
    "adrqn": AdrqnAgent,
}

__all__ = [
    "AGENTS", "AdrqnAgent", "DeepConfig", "DqnAgent", "EffDqnAgent", "EffectiveQAgent", "EpisodeReplay",
    "EpsilonSchedule", "FixedDoseAgent", "QTable", "ReplayBuffer", "TabularQAgent", "adrqn_loss",
    "dqn_loss", "epsilon", "greedy", "select_action",
]
