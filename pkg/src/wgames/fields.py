"""Finite configuration spaces and partition (sigma-field) algebra.

The hybrid space of a finite game in product form is the cartesian product
of one Nature axis and one action axis per agent.  Every sigma-field over
that finite space is represented by the partition of its atoms, and every
subset of the space by a bitmask over the canonical enumeration (Nature
most significant, then agents in declared order).  All predicates the
analysis needs (refinement, join, trace, membership) become cheap bitmask
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from .model import WModel

DEFAULT_SPACE_CAP = 10**7


class SpaceMismatch(ValueError):
    """Raised when two values built over different spaces are combined."""


class SpaceTooLarge(ValueError):
    """Raised when a model's configuration space exceeds the size cap."""


def iter_bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class FiniteSet:
    """Named finite label set (Nature states or one agent's actions)."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError(f"{self.name}: empty label set")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"{self.name}: duplicate labels")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"{self.name}: unknown label {label!r}") from None


@dataclass(frozen=True)
class ConfigurationSpace:
    """Canonical enumeration of all configurations of a model.

    ``agents`` lists agent ids in declared order; ``actions[i]`` is the
    action FiniteSet of ``agents[i]``.  Configuration index 0 is the one
    with the first Nature state and every agent's first action; the last
    agent's action varies fastest.
    """

    nature: FiniteSet
    agents: tuple[str, ...]
    actions: tuple[FiniteSet, ...]

    def __post_init__(self) -> None:
        if len(self.agents) != len(self.actions):
            raise ValueError("agents and action sets must align")
        if len(set(self.agents)) != len(self.agents):
            raise ValueError("duplicate agent ids")

    @property
    def size(self) -> int:
        n = len(self.nature)
        for acts in self.actions:
            n *= len(acts)
        return n

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def agent_pos(self, agent: str) -> int:
        try:
            return self.agents.index(agent)
        except ValueError:
            raise ValueError(f"unknown agent {agent!r}") from None

    def actions_of(self, agent: str) -> FiniteSet:
        return self.actions[self.agent_pos(agent)]

    # ── index arithmetic ────────────────────────────────────────────────

    def _strides(self) -> tuple[int, ...]:
        # stride of coordinate i (0 = nature); last agent has stride 1
        sizes = [len(self.nature)] + [len(a) for a in self.actions]
        strides = [1] * len(sizes)
        for i in range(len(sizes) - 2, -1, -1):
            strides[i] = strides[i + 1] * sizes[i + 1]
        return tuple(strides)

    def index_of(self, nature_label: str, actions: Mapping[str, str]) -> int:
        strides = self._strides()
        idx = self.nature.index(nature_label) * strides[0]
        for i, agent in enumerate(self.agents):
            idx += self.actions[i].index(actions[agent]) * strides[i + 1]
        return idx

    def coordinates(self, index: int) -> tuple[int, ...]:
        """Digit vector (nature index, action index per agent)."""
        strides = self._strides()
        sizes = [len(self.nature)] + [len(a) for a in self.actions]
        return tuple((index // strides[i]) % sizes[i] for i in range(len(sizes)))

    def config(self, index: int) -> "Configuration":
        if not 0 <= index < self.size:
            raise ValueError(f"configuration index {index} out of range")
        return Configuration(self, index)

    def configs(self) -> Iterator["Configuration"]:
        for i in range(self.size):
            yield Configuration(self, i)


@dataclass(frozen=True)
class Configuration:
    """One Nature state plus one action per agent, by canonical index."""

    space: ConfigurationSpace
    index: int

    @property
    def nature(self) -> str:
        return self.space.nature.labels[self.space.coordinates(self.index)[0]]

    def action(self, agent: str) -> str:
        pos = self.space.agent_pos(agent)
        digit = self.space.coordinates(self.index)[pos + 1]
        return self.space.actions[pos].labels[digit]

    def as_dict(self) -> dict[str, str]:
        coords = self.space.coordinates(self.index)
        out = {"nature": self.space.nature.labels[coords[0]]}
        for i, agent in enumerate(self.space.agents):
            out[agent] = self.space.actions[i].labels[coords[i + 1]]
        return out

    def __repr__(self) -> str:
        vals = self.as_dict()
        inner = ",".join(f"{k}={v}" for k, v in vals.items())
        return f"Configuration({inner})"


@dataclass(frozen=True)
class CoordinateSet:
    """A choice of coordinates: optionally Nature, plus a set of agents."""

    include_nature: bool
    agents: frozenset[str]

    @staticmethod
    def of(include_nature: bool, agents: Iterable[str]) -> "CoordinateSet":
        return CoordinateSet(include_nature, frozenset(agents))


@dataclass(frozen=True)
class Partition:
    """Atoms of a finite sigma-field over (a subset of) the space.

    ``atoms`` are disjoint nonempty bitmasks whose union is ``support``
    (the full space unless the partition is a trace on a subset).  Atoms
    are kept in canonical order: ascending lowest configuration index.
    """

    space: ConfigurationSpace
    atoms: tuple[int, ...]
    support: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.support == -1:
            object.__setattr__(self, "support", self.space.full_mask)
        seen = 0
        for atom in self.atoms:
            if atom == 0:
                raise ValueError("empty atom")
            if atom & seen:
                raise ValueError("atoms overlap")
            seen |= atom
        if seen != self.support:
            raise ValueError("atoms do not cover the support")
        ordered = tuple(sorted(self.atoms, key=lambda m: (m & -m).bit_length()))
        object.__setattr__(self, "atoms", ordered)
        index = [-1] * self.space.size
        for aid, atom in enumerate(ordered):
            for i in iter_bits(atom):
                index[i] = aid
        object.__setattr__(self, "_index", tuple(index))

    def atom_index(self, config_index: int) -> int:
        aid = self._index[config_index]  # type: ignore[attr-defined]
        if aid < 0:
            raise ValueError("configuration outside the partition support")
        return aid

    def __len__(self) -> int:
        return len(self.atoms)


def partition_from_key(
    space: ConfigurationSpace, key: Callable[[int], object], support: int = -1
) -> Partition:
    """Group configurations with equal ``key`` into atoms."""
    if support == -1:
        support = space.full_mask
    classes: dict[object, int] = {}
    for i in iter_bits(support):
        classes[key(i)] = classes.get(key(i), 0) | (1 << i)
    return Partition(space, tuple(classes.values()), support)


def trivial_partition(space: ConfigurationSpace) -> Partition:
    return Partition(space, (space.full_mask,))


def complete_partition(space: ConfigurationSpace) -> Partition:
    return Partition(space, tuple(1 << i for i in range(space.size)))


# ── operations ──────────────────────────────────────────────────────────


def build_space(model: "WModel", cap: int = DEFAULT_SPACE_CAP) -> ConfigurationSpace:
    """Canonical configuration space of a model, guarded by a size cap."""
    space = ConfigurationSpace(
        nature=model.nature,
        agents=tuple(a for a, _ in model.agents),
        actions=tuple(acts for _, acts in model.agents),
    )
    # multiply sizes before materializing anything large
    n = len(space.nature)
    for acts in space.actions:
        n *= len(acts)
        if n > cap:
            raise SpaceTooLarge(
                f"configuration space has more than {cap} elements"
            )
    return space


def cylinder_partition(space: ConfigurationSpace, coords: CoordinateSet) -> Partition:
    """Field generated by the chosen coordinates.

    Two configurations share an atom iff they agree on Nature (when
    included) and on every listed agent's action.  Empty coordinates give
    the trivial partition.
    """
    positions = sorted(space.agent_pos(a) + 1 for a in coords.agents)

    def key(i: int) -> tuple:
        digits = space.coordinates(i)
        parts = [digits[0]] if coords.include_nature else []
        parts += [digits[p] for p in positions]
        return tuple(parts)

    return partition_from_key(space, key)


def _require_same_space(p: Partition, q: Partition) -> None:
    if p.space != q.space or p.support != q.support:
        raise SpaceMismatch("partitions live on different spaces")


def partition_refines(fine: Partition, coarse: Partition) -> bool:
    """True iff every atom of ``fine`` lies inside one atom of ``coarse``."""
    _require_same_space(fine, coarse)
    for atom in fine.atoms:
        first = (atom & -atom).bit_length() - 1
        if atom & ~coarse.atoms[coarse.atom_index(first)]:
            return False
    return True


def partition_join(p: Partition, q: Partition) -> Partition:
    """Common refinement (the coarsest partition refining both)."""
    _require_same_space(p, q)
    return partition_from_key(
        p.space,
        lambda i: (p.atom_index(i), q.atom_index(i)),
        p.support,
    )


def trace_partition(p: Partition, subset: int) -> Partition:
    """Trace of ``p`` on a nonempty subset: atoms are atom-and-subset."""
    if subset == 0:
        raise ValueError("trace over the empty subset")
    atoms = tuple(a & subset for a in p.atoms if a & subset)
    return Partition(p.space, atoms, subset)


def atom_of(p: Partition, h: Configuration) -> int:
    """Id of the atom containing ``h``; equal ids mean same atom."""
    if h.space != p.space:
        raise SpaceMismatch("configuration from a different space")
    return p.atom_index(h.index)


def subset_in_field(s: int, p: Partition) -> bool:
    """Is the bitmask ``s`` a union of atoms of ``p``?  Empty sets pass."""
    remaining = s
    while remaining:
        low = (remaining & -remaining).bit_length() - 1
        atom = p.atoms[p.atom_index(low)]
        if atom & ~s:
            return False
        remaining &= ~atom
    return True
