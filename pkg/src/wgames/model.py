"""The model type: agents, Nature, players, information partitions."""

from __future__ import annotations

from dataclasses import dataclass

from .fields import (
    ConfigurationSpace,
    FiniteSet,
    Partition,
    build_space,
)


@dataclass(frozen=True)
class WModel:
    """A finite game in product form.

    ``agents`` is an ordered tuple of (agent id, action set); ``players``
    maps player names to disjoint nonempty agent groups covering all
    agents; ``information`` assigns each agent a partition of the
    configuration space describing what the agent knows when acting.
    """

    nature: FiniteSet
    agents: tuple[tuple[str, FiniteSet], ...]
    players: tuple[tuple[str, tuple[str, ...]], ...]
    information: tuple[tuple[str, Partition], ...]

    def __post_init__(self) -> None:
        agent_ids = [a for a, _ in self.agents]
        if len(set(agent_ids)) != len(agent_ids):
            raise ValueError("duplicate agent ids")
        space = build_space(self)
        object.__setattr__(self, "_space", space)

        grouped: list[str] = []
        for name, members in self.players:
            if not members:
                raise ValueError(f"player {name!r} has no agents")
            grouped.extend(members)
        if sorted(grouped) != sorted(agent_ids) or len(grouped) != len(agent_ids):
            raise ValueError("players must partition the agent set")

        info_ids = [a for a, _ in self.information]
        if info_ids != agent_ids:
            raise ValueError("information must list every agent once, in order")
        for agent, part in self.information:
            if part.space != space:
                raise ValueError(f"information of {agent!r} built on a foreign space")
            if part.support != space.full_mask:
                raise ValueError(f"information of {agent!r} does not cover the space")

    # ── lookups ─────────────────────────────────────────────────────────

    @property
    def space(self) -> ConfigurationSpace:
        return self._space  # type: ignore[attr-defined]

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.agents)

    def actions_of(self, agent: str) -> FiniteSet:
        for a, acts in self.agents:
            if a == agent:
                return acts
        raise ValueError(f"unknown agent {agent!r}")

    def info_of(self, agent: str) -> Partition:
        for a, part in self.information:
            if a == agent:
                return part
        raise ValueError(f"unknown agent {agent!r}")

    @property
    def player_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.players)

    def agents_of(self, player: str) -> tuple[str, ...]:
        for name, members in self.players:
            if name == player:
                return members
        raise ValueError(f"unknown player {player!r}")

    def player_of(self, agent: str) -> str:
        for name, members in self.players:
            if agent in members:
                return name
        raise ValueError(f"unknown agent {agent!r}")

    def opponents_of(self, player: str) -> tuple[str, ...]:
        """Agents belonging to every player except ``player``."""
        own = set(self.agents_of(player))
        return tuple(a for a in self.agent_ids if a not in own)
