"""Pure, mixed, and behavioral strategies with exact rational weights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable

from .fields import Partition
from .model import WModel

DEFAULT_ENUM_CAP = 10**6


@dataclass(frozen=True)
class RationalDistribution:
    """Finitely supported exact distribution over an ordered carrier."""

    carrier: tuple
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.carrier) != len(self.weights):
            raise ValueError("carrier and weights must align")
        if len(set(self.carrier)) != len(self.carrier):
            raise ValueError("carrier entries must be distinct")
        ws = tuple(Fraction(w) for w in self.weights)
        if any(w < 0 for w in ws):
            raise ValueError("negative weight")
        if sum(ws, Fraction(0)) != 1:
            raise ValueError(f"weights sum to {sum(ws, Fraction(0))}, expected 1")
        object.__setattr__(self, "weights", ws)

    @staticmethod
    def point(carrier: Iterable, item) -> "RationalDistribution":
        carrier = tuple(carrier)
        return RationalDistribution(
            carrier, tuple(Fraction(1 if c == item else 0) for c in carrier)
        )

    @staticmethod
    def uniform(carrier: Iterable) -> "RationalDistribution":
        carrier = tuple(carrier)
        w = Fraction(1, len(carrier))
        return RationalDistribution(carrier, (w,) * len(carrier))

    @staticmethod
    def from_map(mapping: dict) -> "RationalDistribution":
        items = tuple(mapping.items())
        return RationalDistribution(
            tuple(k for k, _ in items), tuple(Fraction(v) for _, v in items)
        )

    def weight(self, item) -> Fraction:
        try:
            return self.weights[self.carrier.index(item)]
        except ValueError:
            return Fraction(0)

    def as_map(self) -> dict:
        """Support only: carrier entries with nonzero weight."""
        return {c: w for c, w in zip(self.carrier, self.weights) if w != 0}

    def same_law(self, other: "RationalDistribution") -> bool:
        return self.as_map() == other.as_map()


@dataclass(frozen=True)
class PureStrategy:
    """One agent's information-measurable decision rule.

    ``choice[k]`` is the action taken on atom ``k`` of the agent's
    information partition; constancy on atoms is exactly measurability.
    """

    agent: str
    choice: tuple[str, ...]

    def action_at(self, atom_id: int) -> str:
        return self.choice[atom_id]


@dataclass(frozen=True)
class PureStrategyProfile:
    """One pure strategy per agent of some agent subset."""

    strategies: tuple[PureStrategy, ...]

    def __post_init__(self) -> None:
        ids = [s.agent for s in self.strategies]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate agent in profile")
        ordered = tuple(sorted(self.strategies, key=lambda s: s.agent))
        object.__setattr__(self, "strategies", ordered)

    @property
    def agents(self) -> frozenset[str]:
        return frozenset(s.agent for s in self.strategies)

    def strategy_of(self, agent: str) -> PureStrategy:
        for s in self.strategies:
            if s.agent == agent:
                return s
        raise ValueError(f"profile has no strategy for {agent!r}")

    def merged_with(self, other: "PureStrategyProfile") -> "PureStrategyProfile":
        if self.agents & other.agents:
            raise ValueError("profiles overlap")
        return PureStrategyProfile(self.strategies + other.strategies)


@dataclass(frozen=True)
class MixedStrategy:
    """Player-level randomization over pure sub-profiles.

    May correlate the player's agents; zero-weight entries are forbidden
    so strategy equality is structural.
    """

    player: str
    support: tuple[tuple[PureStrategyProfile, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("empty support")
        entries = tuple((p, Fraction(w)) for p, w in self.support)
        agent_sets = {p.agents for p, _ in entries}
        if len(agent_sets) != 1:
            raise ValueError("support profiles cover different agent sets")
        if len({p for p, _ in entries}) != len(entries):
            raise ValueError("duplicate support profile")
        for _, w in entries:
            if w <= 0:
                raise ValueError("support weights must be positive")
        if sum(w for _, w in entries) != 1:
            raise ValueError("support weights must sum to 1")
        object.__setattr__(self, "support", entries)

    @property
    def agents(self) -> frozenset[str]:
        return self.support[0][0].agents


@dataclass(frozen=True)
class BehavioralStrategy:
    """Per-agent independent randomization, one kernel per information atom.

    ``kernels`` holds, for each of the player's agents in model order, the
    tuple of action distributions indexed by atom id of that agent's
    information partition.
    """

    player: str
    kernels: tuple[tuple[str, tuple[RationalDistribution, ...]], ...]

    def kernel(self, agent: str, atom_id: int) -> RationalDistribution:
        for a, dists in self.kernels:
            if a == agent:
                return dists[atom_id]
        raise ValueError(f"no kernels for agent {agent!r}")

    @property
    def agents(self) -> frozenset[str]:
        return frozenset(a for a, _ in self.kernels)


# ── operations ──────────────────────────────────────────────────────────


def validate_pure(model: WModel, strategy: PureStrategy) -> bool:
    """Total on the agent's atoms, with valid action labels everywhere."""
    info = model.info_of(strategy.agent)  # raises on unknown agent
    actions = set(model.actions_of(strategy.agent).labels)
    if len(strategy.choice) != len(info.atoms):
        return False
    return all(u in actions for u in strategy.choice)


def validate_mixed(model: WModel, mixed: MixedStrategy) -> bool:
    """Every supported plan covers exactly the player's agents, validly."""
    expected = frozenset(model.agents_of(mixed.player))
    for profile, _ in mixed.support:
        if profile.agents != expected:
            return False
        if not all(validate_pure(model, s) for s in profile.strategies):
            return False
    return True


def validate_behavioral(model: WModel, beta: BehavioralStrategy) -> bool:
    """One full-carrier kernel per (agent, atom) of the player."""
    if set(beta.agents) != set(model.agents_of(beta.player)):
        return False
    for agent, dists in beta.kernels:
        info = model.info_of(agent)
        labels = model.actions_of(agent).labels
        if len(dists) != len(info.atoms):
            return False
        if any(d.carrier != labels for d in dists):
            return False
    return True


def enumerate_pure(
    model: WModel, agent: str, cap: int = DEFAULT_ENUM_CAP
) -> list[PureStrategy]:
    """All pure strategies of one agent, lexicographic in (atom, action)."""
    info = model.info_of(agent)
    labels = model.actions_of(agent).labels
    count = len(labels) ** len(info.atoms)
    if count > cap:
        raise ValueError(
            f"{count} strategies for agent {agent!r} exceed the cap of {cap}"
        )
    return [
        PureStrategy(agent, combo)
        for combo in product(labels, repeat=len(info.atoms))
    ]


def behavioral_to_mixed(model: WModel, beta: BehavioralStrategy) -> MixedStrategy:
    """Expand independent per-atom sampling into a distribution over plans.

    The weight of a pure sub-profile is the product, over the player's
    agents and atoms, of the kernel weight of the action the plan takes
    there.  Zero-weight plans are dropped.
    """
    per_agent: list[list[tuple[PureStrategy, Fraction]]] = []
    for agent in model.agents_of(beta.player):
        info = model.info_of(agent)
        options_per_atom = []
        for atom_id in range(len(info.atoms)):
            dist = beta.kernel(agent, atom_id)
            options_per_atom.append(
                [(u, w) for u, w in zip(dist.carrier, dist.weights) if w != 0]
            )
        plans = []
        for combo in product(*options_per_atom):
            w = Fraction(1)
            for _, wi in combo:
                w *= wi
            plans.append((PureStrategy(agent, tuple(u for u, _ in combo)), w))
        per_agent.append(plans)

    support = []
    for combo in product(*per_agent):
        w = Fraction(1)
        for _, wi in combo:
            w *= wi
        profile = PureStrategyProfile(tuple(s for s, _ in combo))
        support.append((profile, w))
    return MixedStrategy(beta.player, tuple(support))


def restrict_profile(
    profile: PureStrategyProfile, agents: Iterable[str]
) -> PureStrategyProfile:
    """Componentwise restriction of a profile to an agent subset."""
    wanted = set(agents)
    if not wanted:
        raise ValueError("empty restriction")
    missing = wanted - profile.agents
    if missing:
        raise ValueError(f"profile lacks agents {sorted(missing)}")
    return PureStrategyProfile(
        tuple(s for s in profile.strategies if s.agent in wanted)
    )


def deterministic_mixed(player: str, profile: PureStrategyProfile) -> MixedStrategy:
    """The point-mass mixed strategy on one plan."""
    return MixedStrategy(player, ((profile, Fraction(1)),))


def constant_profile(model: WModel, assignments: dict[str, str]) -> PureStrategyProfile:
    """Constant plan: each listed agent plays one action on every atom."""
    strategies = []
    for agent, action in assignments.items():
        info = model.info_of(agent)
        if action not in model.actions_of(agent).labels:
            raise ValueError(f"unknown action {action!r} for {agent!r}")
        strategies.append(PureStrategy(agent, (action,) * len(info.atoms)))
    return PureStrategyProfile(tuple(strategies))
