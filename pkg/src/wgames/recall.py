"""Orderings of a player's agents and the checks built on them.

A configuration-ordering assigns to every configuration a total order in
which the player's agents are deemed to act there.  Perfect recall asks
that, cell by cell, whatever the predecessors did and knew is readable from
the last agent's information field; partial causality asks that each cell,
refined by the last agent's information, depends only on Nature, the other
players' actions and the predecessors' actions.  Both checks quantify over
atoms, which suffices for finite fields.

The searches build candidate orderings cell by cell, assigning the next
agent in whole blocks.  The target property forces the block shape (the
candidate agent's information atoms for recall, ground-field atoms for
causality), so every completed assignment already passes the corresponding
check and nothing valid is skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Iterator, Optional

from .fields import (
    CoordinateSet,
    Partition,
    cylinder_partition,
    iter_bits,
    partition_join,
)
from .model import WModel


class SearchBudgetExhausted(RuntimeError):
    """An ordering search ran out of nodes before reaching a verdict."""


@dataclass(frozen=True)
class Ordering:
    """An injective, nonempty sequence of some of a player's agents."""

    player: str
    sequence: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.sequence:
            raise ValueError("ordering must name at least one agent")
        if len(set(self.sequence)) != len(self.sequence):
            raise ValueError("ordering entries must be distinct")

    def __len__(self) -> int:
        return len(self.sequence)

    @property
    def first(self) -> str:
        return self.sequence[0]

    @property
    def last(self) -> str:
        return self.sequence[-1]

    @property
    def range(self) -> frozenset[str]:
        return frozenset(self.sequence)


def restrict_ordering(rho: Ordering, k: int) -> Ordering:
    """First ``k`` entries of ``rho``."""
    if not 1 <= k <= len(rho):
        raise ValueError(f"cannot restrict a length-{len(rho)} ordering to {k}")
    return Ordering(rho.player, rho.sequence[:k])


@dataclass(frozen=True)
class ConfigurationOrdering:
    """One total ordering of the player's agents per configuration."""

    player: str
    orderings: tuple[Ordering, ...]

    def __post_init__(self) -> None:
        if not self.orderings:
            raise ValueError("need one ordering per configuration")
        base = self.orderings[0]
        for rho in self.orderings:
            if rho.player != self.player:
                raise ValueError("ordering assigned to a different player")
            if rho.range != base.range or len(rho) != len(base):
                raise ValueError("orderings must all cover the same agents")

    def at(self, index: int) -> Ordering:
        return self.orderings[index]

    @property
    def is_constant(self) -> bool:
        first = self.orderings[0]
        return all(rho == first for rho in self.orderings)


def constant_ordering(
    model: WModel, player: str, sequence: tuple[str, ...]
) -> ConfigurationOrdering:
    agents = model.agents_of(player)
    if sorted(sequence) != sorted(agents):
        raise ValueError(f"{sequence!r} is not a total ordering of {agents!r}")
    rho = Ordering(player, tuple(sequence))
    return ConfigurationOrdering(player, (rho,) * model.space.size)


def enumerate_orderings(model: WModel, player: str, k: int) -> list[Ordering]:
    """All injective k-sequences of the player's agents, canonical order."""
    agents = model.agents_of(player)
    if not 1 <= k <= len(agents):
        raise ValueError(f"k must lie in [1, {len(agents)}], got {k}")
    return [Ordering(player, seq) for seq in permutations(agents, k)]


def _validate_phi(model: WModel, player: str, phi: ConfigurationOrdering) -> None:
    if phi.player != player:
        raise ValueError(f"ordering belongs to player {phi.player!r}, not {player!r}")
    if len(phi.orderings) != model.space.size:
        raise ValueError("configuration-ordering built on a different space")
    agents = model.agents_of(player)
    if phi.orderings[0].range != frozenset(agents):
        raise ValueError("orderings must be total over the player's agents")


def _prefix_cell(model: WModel, phi: ConfigurationOrdering, prefix: tuple[str, ...]) -> int:
    """Bitmask of configurations whose assigned ordering starts with ``prefix``."""
    if not prefix:
        return model.space.full_mask
    k = len(prefix)
    mask = 0
    for i in range(model.space.size):
        if phi.orderings[i].sequence[:k] == prefix:
            mask |= 1 << i
    return mask


def ordering_cell(model: WModel, phi: ConfigurationOrdering, kappa: Ordering) -> int:
    """Configurations whose ordering starts with ``kappa``, as a bitmask."""
    return _prefix_cell(model, phi, kappa.sequence)


@lru_cache(maxsize=8192)
def _choice_partition(model: WModel, agents: tuple[str, ...]) -> Partition:
    space = model.space
    part = cylinder_partition(space, CoordinateSet.of(False, ()))
    for a in agents:
        own_action = cylinder_partition(space, CoordinateSet.of(False, (a,)))
        part = partition_join(part, partition_join(own_action, model.info_of(a)))
    return part


def choice_partition(model: WModel, agents) -> Partition:
    """Join over ``agents`` of what each did (action cylinder) and knew (I_a)."""
    return _choice_partition(model, tuple(sorted(agents)))


@lru_cache(maxsize=8192)
def _ground_partition(model: WModel, player: str, predecessors: tuple[str, ...]) -> Partition:
    coords = CoordinateSet.of(True, model.opponents_of(player) + predecessors)
    return cylinder_partition(model.space, coords)


def causality_ground(model: WModel, player: str, predecessors) -> Partition:
    """Cylinder field over Nature, all opponents, and the given predecessors."""
    return _ground_partition(model, player, tuple(sorted(predecessors)))


def _offending_atom(subset: int, field: Partition) -> Optional[int]:
    """First atom of ``field`` that ``subset`` cuts properly, if any."""
    if subset == 0:
        return None
    for atom in field.atoms:
        hit = atom & subset
        if hit != 0 and hit != atom:
            return atom
    return None


@dataclass(frozen=True)
class FieldMembershipViolation:
    """A cell piece that fails to be measurable where the check demands it.

    ``conditioning_atom`` is the atom the cell was intersected with (the
    whole space for length-one prefixes), ``subset`` the resulting piece,
    and ``offending_atom`` an atom of the target field that the piece cuts.
    """

    kappa: Ordering
    conditioning_atom: int
    subset: int
    offending_atom: int


@dataclass(frozen=True)
class RecallReport:
    holds: bool
    ordering: ConfigurationOrdering
    violation: Optional[FieldMembershipViolation]

    def __post_init__(self) -> None:
        if self.holds == (self.violation is not None):
            raise ValueError("holds must match the absence of a violation")


def check_perfect_recall(
    model: WModel, player: str, phi: ConfigurationOrdering
) -> RecallReport:
    """Test every prefix cell against the last agent's information field.

    For prefixes of length one the cell itself must belong to the field;
    for longer prefixes the cell is first intersected with each atom of the
    predecessors' choice field.  The first failure, in canonical prefix and
    atom order, is reported.
    """
    _validate_phi(model, player, phi)
    space = model.space
    agents = model.agents_of(player)
    for k in range(1, len(agents) + 1):
        for kappa in enumerate_orderings(model, player, k):
            cell = _prefix_cell(model, phi, kappa.sequence)
            if cell == 0:
                continue
            target = model.info_of(kappa.last)
            if k == 1:
                conditioning: tuple[int, ...] = (space.full_mask,)
            else:
                conditioning = choice_partition(model, kappa.sequence[:-1]).atoms
            for block in conditioning:
                piece = cell & block
                bad = _offending_atom(piece, target)
                if bad is not None:
                    return RecallReport(
                        False,
                        phi,
                        FieldMembershipViolation(kappa, block, piece, bad),
                    )
    return RecallReport(True, phi, None)


def check_partial_causality(
    model: WModel, player: str, phi: ConfigurationOrdering
) -> RecallReport:
    """Test every prefix cell, refined by the last agent's information,
    for membership in the ground field of Nature, opponents and
    predecessors' actions."""
    _validate_phi(model, player, phi)
    agents = model.agents_of(player)
    for k in range(1, len(agents) + 1):
        for kappa in enumerate_orderings(model, player, k):
            cell = _prefix_cell(model, phi, kappa.sequence)
            if cell == 0:
                continue
            ground = causality_ground(model, player, kappa.sequence[:-1])
            for block in model.info_of(kappa.last).atoms:
                piece = cell & block
                bad = _offending_atom(piece, ground)
                if bad is not None:
                    return RecallReport(
                        False,
                        phi,
                        FieldMembershipViolation(kappa, block, piece, bad),
                    )
    return RecallReport(True, phi, None)


# ── ordering search ─────────────────────────────────────────────────────


class _Budget:
    __slots__ = ("left", "spent")

    def __init__(self, nodes: int) -> None:
        if nodes <= 0:
            raise ValueError("budget must be positive")
        self.left = nodes
        self.spent = 0

    def spend(self) -> None:
        if self.left == 0:
            raise SearchBudgetExhausted(f"search budget of {self.spent} nodes spent")
        self.left -= 1
        self.spent += 1


def _iter_valid_orderings(
    model: WModel, player: str, mode: str, budget: _Budget
) -> Iterator[ConfigurationOrdering]:
    """Backtracking enumeration of orderings passing the ``mode`` check.

    State is a worklist of (prefix, cell) pairs.  Extending a cell means
    partitioning it among the agents not yet in the prefix; a valid part
    for agent ``a`` is a union of blocks, each block being

      * in recall mode: an atom of I_a lying inside one atom of the
        predecessors' choice field (no containment condition for the first
        agent), and
      * in causality mode: an atom of the ground field lying inside one
        atom of I_a,

    which is exactly the membership the corresponding check enforces, so a
    completed assignment is a passing ordering and every passing ordering
    arises from some branch.  Blocks are claimed lowest configuration
    first with agents tried in declared order, making the enumeration
    order canonical.
    """
    space = model.space
    agents = model.agents_of(player)
    n = len(agents)
    info = {a: model.info_of(a) for a in agents}

    def parts_of_cell(prefix: tuple[str, ...], cell: int) -> Iterator[dict[str, int]]:
        remaining = [a for a in agents if a not in prefix]
        cfield = choice_partition(model, prefix) if (mode == "recall" and prefix) else None
        ground = causality_ground(model, player, prefix) if mode == "causality" else None
        acc = {a: 0 for a in remaining}

        def claim(unassigned: int) -> Iterator[dict[str, int]]:
            if unassigned == 0:
                yield dict(acc)
                return
            h = (unassigned & -unassigned).bit_length() - 1
            for a in remaining:
                budget.spend()
                if mode == "recall":
                    unit = info[a].atoms[info[a].atom_index(h)]
                    if unit & unassigned != unit:
                        continue
                    if cfield is not None:
                        catom = cfield.atoms[cfield.atom_index(h)]
                        if unit & catom != unit:
                            continue
                else:
                    unit = ground.atoms[ground.atom_index(h)]
                    if unit & unassigned != unit:
                        continue
                    iatom = info[a].atoms[info[a].atom_index(h)]
                    if unit & iatom != unit:
                        continue
                acc[a] |= unit
                yield from claim(unassigned & ~unit)
                acc[a] &= ~unit

        yield from claim(cell)

    ordering_cache: dict[tuple[str, ...], Ordering] = {}

    def assemble(leaves: list[tuple[tuple[str, ...], int]]) -> ConfigurationOrdering:
        seq: list[Optional[Ordering]] = [None] * space.size
        for chain, mask in leaves:
            rho = ordering_cache.setdefault(chain, Ordering(player, chain))
            for i in iter_bits(mask):
                seq[i] = rho
        return ConfigurationOrdering(player, tuple(seq))  # type: ignore[arg-type]

    def cascade(
        pending: list[tuple[tuple[str, ...], int]],
        leaves: list[tuple[tuple[str, ...], int]],
    ) -> Iterator[ConfigurationOrdering]:
        if not pending:
            yield assemble(leaves)
            return
        prefix, cell = pending[0]
        for parts in parts_of_cell(prefix, cell):
            next_pending = pending[1:]
            next_leaves = leaves
            for a in agents:
                mask = parts.get(a, 0)
                if mask == 0:
                    continue
                child = prefix + (a,)
                if len(child) < n:
                    next_pending = next_pending + [(child, mask)]
                else:
                    if next_leaves is leaves:
                        next_leaves = leaves[:]
                    next_leaves.append((child, mask))
            yield from cascade(next_pending, next_leaves)

    yield from cascade([((), space.full_mask)], [])


@dataclass(frozen=True)
class OrderingSearch:
    """Outcome of an ordering search: found / none / unknown plus cost."""

    outcome: str
    ordering: Optional[ConfigurationOrdering]
    nodes: int

    def __post_init__(self) -> None:
        if self.outcome not in ("found", "none", "unknown"):
            raise ValueError(f"bad outcome {self.outcome!r}")
        if (self.outcome == "found") != (self.ordering is not None):
            raise ValueError("ordering present iff outcome is 'found'")


def search_recall_ordering(
    model: WModel, player: str, budget: int = 200_000
) -> OrderingSearch:
    """Find a configuration-ordering with perfect recall, or prove none exists.

    Constant orderings are tried first, then the general backtracking; a
    full sweep without a hit proves nonexistence.  Running out of budget
    yields the distinguished "unknown" outcome, never "none".
    """
    b = _Budget(budget)
    agents = model.agents_of(player)
    try:
        for kappa in enumerate_orderings(model, player, len(agents)):
            b.spend()
            phi = constant_ordering(model, player, kappa.sequence)
            if check_perfect_recall(model, player, phi).holds:
                return OrderingSearch("found", phi, b.spent)
        for phi in _iter_valid_orderings(model, player, "recall", b):
            return OrderingSearch("found", phi, b.spent)
        return OrderingSearch("none", None, b.spent)
    except SearchBudgetExhausted:
        return OrderingSearch("unknown", None, b.spent)


def iter_causal_orderings(
    model: WModel, player: str, budget: int = 200_000
) -> Iterator[ConfigurationOrdering]:
    """All partially causal configuration-orderings, canonically ordered.

    Raises SearchBudgetExhausted if the node budget runs out mid-sweep.
    """
    yield from _iter_valid_orderings(model, player, "causality", _Budget(budget))
