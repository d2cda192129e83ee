"""Converse direction: detect recall violations and certify that the
witness strategies admit no behavioral counterpart.

The certificate is finite and exact: the target law forces every matching
behavioral strategy to put positive weight on certain actions (one set per
visited information atom), and pinning those actions traps the closed loop
in a region the target law never visits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional

from .fields import Configuration, iter_bits
from .kuhn import PushforwardDistribution, distributions_equal, pushforward
from .model import WModel
from .playability import (
    PlayabilityError,
    closed_loop_solutions,
    nature_block,
    strategy_mask,
)
from .recall import (
    ConfigurationOrdering,
    Ordering,
    _validate_phi,
    enumerate_orderings,
    ordering_cell,
)
from .strategies import (
    MixedStrategy,
    PureStrategy,
    PureStrategyProfile,
    RationalDistribution,
    constant_profile,
)

CASE_ACTION = "predecessor-action-differs"
CASE_INFORMATION = "predecessor-information-differs"

_HALF = Fraction(1, 2)


# ── domain types ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class RecallViolation:
    """Two configurations a late agent cannot tell apart although their
    predecessor records differ.

    ``case`` says how the records differ: some predecessor's action
    (``predecessor-action-differs``) or, actions all equal, some
    predecessor's information atom (``predecessor-information-differs``).
    """

    ordering: Ordering
    h_plus: Configuration
    h_minus: Configuration
    case: str

    def __post_init__(self) -> None:
        if len(self.ordering) < 2:
            raise ValueError("a violation needs at least one predecessor")
        if self.h_plus.space != self.h_minus.space:
            raise ValueError("configurations live on different spaces")
        if self.h_plus.index == self.h_minus.index:
            raise ValueError("the two configurations must be distinct")
        if self.case not in (CASE_ACTION, CASE_INFORMATION):
            raise ValueError(f"unknown case tag {self.case!r}")


@dataclass(frozen=True)
class NonEquivalenceCertificate:
    """Machine-checkable proof that no behavioral strategy of ``player``
    reproduces ``target``.

    Any matching behavioral strategy must select each pinned action with
    positive probability, so with positive probability the closed loop
    lands in ``reachable``; yet ``target`` gives that region mass zero.
    ``exhibited`` is the region's first configuration, realized exactly by
    ``profile`` together with ``opponent_plans`` at ``omega``.
    """

    player: str
    nu: RationalDistribution
    focus: MixedStrategy
    opponents: tuple[MixedStrategy, ...]
    target: PushforwardDistribution
    forced: tuple[tuple[str, int, tuple[str, ...]], ...]
    omega: str
    opponent_plans: tuple[PureStrategyProfile, ...]
    pins: tuple[tuple[str, int, str], ...]
    reachable: int
    exhibited: Configuration
    profile: PureStrategyProfile

    def __post_init__(self) -> None:
        if self.nu.weight(self.omega) <= 0:
            raise ValueError("the exhibited Nature state has zero belief")
        if self.target.weight(self.exhibited) != 0:
            raise ValueError("the exhibited configuration carries target mass")
        if self.reachable == 0:
            raise ValueError("empty reachable region")
        if not (self.reachable >> self.exhibited.index) & 1:
            raise ValueError("exhibited configuration outside the region")
        allowed = {(a, z): acts for a, z, acts in self.forced}
        pinned = set()
        for agent, atom_id, action in self.pins:
            if action not in allowed.get((agent, atom_id), ()):
                raise ValueError("pin outside the forced action set")
            pinned.add((agent, atom_id))
        if pinned != set(allowed):
            raise ValueError("pins must cover the forced atoms exactly")
        if len(self.opponent_plans) != len(self.opponents):
            raise ValueError("one plan per opponent required")


# ── violation scan ──────────────────────────────────────────────────────


def _predecessor_record(
    model: WModel, preds: tuple[str, ...], index: int
) -> tuple[tuple[int, str], ...]:
    """Per predecessor: (information atom id, own action) at the config."""
    h = model.space.config(index)
    return tuple(
        (model.info_of(a).atom_index(index), h.action(a)) for a in preds
    )


def find_recall_violation(
    model: WModel, player: str, phi: ConfigurationOrdering
) -> Optional[RecallViolation]:
    """First pair of configurations, in canonical order, that the final
    agent of some prefix cannot distinguish while their predecessor
    records disagree.

    Scans prefixes by length then lexicographically, conditioning atoms in
    canonical order, pairs by ascending configuration index.  Within one
    prefix an action-differing pair anywhere in the cell takes precedence
    over atom-only pairs: the atom-reactive witness built for the second
    tag is only sound when configurations sharing a final atom share every
    predecessor action across the whole cell.
    """
    _validate_phi(model, player, phi)
    space = model.space
    agents = model.agents_of(player)
    for k in range(2, len(agents) + 1):
        for kappa in enumerate_orderings(model, player, k):
            cell = ordering_cell(model, phi, kappa)
            if cell == 0:
                continue
            preds = kappa.sequence[:-1]
            first_atom_pair: Optional[tuple[int, int]] = None
            for atom in model.info_of(kappa.last).atoms:
                members = list(iter_bits(cell & atom))
                if len(members) < 2:
                    continue
                records = [
                    _predecessor_record(model, preds, i) for i in members
                ]
                for x in range(len(members)):
                    for y in range(x + 1, len(members)):
                        if records[x] == records[y]:
                            continue
                        actions_differ = any(
                            rx[1] != ry[1]
                            for rx, ry in zip(records[x], records[y])
                        )
                        if actions_differ:
                            return RecallViolation(
                                kappa,
                                space.config(members[x]),
                                space.config(members[y]),
                                CASE_ACTION,
                            )
                        if first_atom_pair is None:
                            first_atom_pair = (members[x], members[y])
            if first_atom_pair is not None:
                return RecallViolation(
                    kappa,
                    space.config(first_atom_pair[0]),
                    space.config(first_atom_pair[1]),
                    CASE_INFORMATION,
                )
    return None


# ── witness construction ────────────────────────────────────────────────


def _check_violation(model: WModel, player: str, v: RecallViolation) -> None:
    if v.ordering.player != player:
        raise ValueError(
            f"violation belongs to player {v.ordering.player!r}, not {player!r}"
        )
    agents = set(model.agents_of(player))
    if not set(v.ordering.sequence) <= agents:
        raise ValueError("ordering names agents outside the player")
    if v.h_plus.space != model.space:
        raise ValueError("violation built on a different space")
    last = model.info_of(v.ordering.last)
    if last.atom_index(v.h_plus.index) != last.atom_index(v.h_minus.index):
        raise ValueError("the final agent distinguishes the pair")
    preds = v.ordering.sequence[:-1]
    plus = _predecessor_record(model, preds, v.h_plus.index)
    minus = _predecessor_record(model, preds, v.h_minus.index)
    actions_differ = any(p[1] != m[1] for p, m in zip(plus, minus))
    if v.case == CASE_ACTION and not actions_differ:
        raise ValueError("case tag claims an action difference; none found")
    if v.case == CASE_INFORMATION:
        if actions_differ:
            raise ValueError("case tag forbids action differences")
        if plus == minus:
            raise ValueError("predecessor records do not differ")


def _first_other_action(model: WModel, agent: str, avoid: str) -> str:
    for label in model.actions_of(agent).labels:
        if label != avoid:
            return label
    raise ValueError(f"agent {agent!r} needs a second action")


def _replace_action(model: WModel, h: Configuration, agent: str, action: str) -> Configuration:
    acts = {a: h.action(a) for a in model.space.agents}
    acts[agent] = action
    return model.space.config(model.space.index_of(h.nature, acts))


def _half_mixture(
    player: str, one: PureStrategyProfile, other: PureStrategyProfile
) -> MixedStrategy:
    if one == other:
        return MixedStrategy(player, ((one, Fraction(1)),))
    return MixedStrategy(player, ((one, _HALF), (other, _HALF)))


def build_witness(
    model: WModel, player: str, violation: RecallViolation
) -> tuple[RationalDistribution, MixedStrategy, tuple[MixedStrategy, ...]]:
    """Belief and plans whose closed-loop law separates mixed from
    behavioral play at the violation.

    The pair is first separated on the final agent's own coordinate when
    needed; under partial causality this changes neither the cell nor any
    conditioning atom, because the region refined by that agent's
    information never constrains the agent's own action.
    """
    _check_violation(model, player, violation)
    kappa = violation.ordering
    c = kappa.last
    h_plus = violation.h_plus
    h_minus = violation.h_minus
    if h_plus.action(c) == h_minus.action(c):
        h_minus = _replace_action(
            model, h_minus, c, _first_other_action(model, c, h_plus.action(c))
        )

    labels = model.nature.labels
    chosen = {h_plus.nature, h_minus.nature}
    if len(chosen) == 1:
        nu = RationalDistribution.point(labels, h_plus.nature)
    else:
        nu = RationalDistribution.from_map(
            {w: _HALF for w in labels if w in chosen}
        )

    opponents = []
    for q in model.player_names:
        if q == player:
            continue
        own = model.agents_of(q)
        plus = constant_profile(model, {a: h_plus.action(a) for a in own})
        minus = constant_profile(model, {a: h_minus.action(a) for a in own})
        opponents.append(_half_mixture(q, plus, minus))

    focus_agents = model.agents_of(player)
    if violation.case == CASE_ACTION:
        plus = constant_profile(
            model, {a: h_plus.action(a) for a in focus_agents}
        )
        minus = constant_profile(
            model, {a: h_minus.action(a) for a in focus_agents}
        )
        focus = _half_mixture(player, plus, minus)
        return nu, focus, tuple(opponents)

    # Actions agree everywhere upstream, so some predecessor's atom must
    # differ; the plans below react to that atom instead of to an action.
    preds = kappa.sequence[:-1]
    b = next(
        a
        for a in preds
        if model.info_of(a).atom_index(h_plus.index)
        != model.info_of(a).atom_index(h_minus.index)
    )
    u_bar = _first_other_action(model, b, h_plus.action(b))
    zb = model.info_of(b).atom_index(h_plus.index)
    zc = model.info_of(c).atom_index(h_plus.index)
    nb = len(model.info_of(b))
    nc = len(model.info_of(c))

    def plan(flip_b: bool, react_c: bool) -> PureStrategyProfile:
        strategies = []
        for a in focus_agents:
            if a == b:
                on, off = (u_bar, h_plus.action(b)) if flip_b else (
                    h_plus.action(b),
                    u_bar,
                )
                choice = tuple(on if z == zb else off for z in range(nb))
            elif a == c:
                if react_c:
                    choice = tuple(
                        h_minus.action(c) if z == zc else h_plus.action(c)
                        for z in range(nc)
                    )
                else:
                    choice = (h_plus.action(c),) * nc
            else:
                choice = (h_plus.action(a),) * len(model.info_of(a))
            strategies.append(PureStrategy(a, choice))
        return PureStrategyProfile(tuple(strategies))

    focus = _half_mixture(
        player, plan(flip_b=False, react_c=False), plan(flip_b=True, react_c=True)
    )
    return nu, focus, tuple(opponents)


# ── forced supports and certification ───────────────────────────────────


def forced_support(
    model: WModel, player: str, target: PushforwardDistribution
) -> dict[tuple[str, int], tuple[str, ...]]:
    """Actions every matching behavioral strategy must carry, per visited
    (agent, information atom) of the player; canonical key and action order.
    """
    if target.space != model.space:
        raise ValueError("target law built on a different space")
    agents = model.agents_of(player)
    seen: dict[tuple[str, int], set[str]] = {}
    for h in target.support:
        for a in agents:
            z = model.info_of(a).atom_index(h.index)
            seen.setdefault((a, z), set()).add(h.action(a))
    ordered: dict[tuple[str, int], tuple[str, ...]] = {}
    for a in agents:
        labels = model.actions_of(a).labels
        for z in sorted(z for (b, z) in seen if b == a):
            ordered[(a, z)] = tuple(
                u for u in labels if u in seen[(a, z)]
            )
    return ordered


def _pin_allows(model: WModel, agent: str, atom_id: int, action: str) -> int:
    """Configurations compatible with the pin: off the atom, or on it with
    the pinned action as the agent's own coordinate."""
    info = model.info_of(agent)
    const = PureStrategy(agent, (action,) * len(info))
    own = strategy_mask(model, const)
    return model.space.full_mask & ~(info.atoms[atom_id] & ~own)


def certify_nonequivalence(
    model: WModel,
    player: str,
    nu: RationalDistribution,
    focus: MixedStrategy,
    opponents: Iterable[MixedStrategy],
) -> Optional[NonEquivalenceCertificate]:
    """Search for a pinning of forced actions that traps the closed loop
    outside the target law's support.

    Enumerates Nature states with positive belief, opponent support plans,
    and one forced action per visited atom, in canonical order; the first
    combination whose compatible region carries zero target mass yields
    the certificate.  Absent when no combination does, in particular
    whenever some behavioral strategy does reproduce the law.
    """
    if focus.player != player:
        raise ValueError(f"focus strategy belongs to {focus.player!r}")
    opp_list = tuple(opponents)
    target = pushforward(model, nu, (focus, *opp_list))
    forced = forced_support(model, player, target)
    keys = tuple(forced)
    space = model.space

    supp_mask = 0
    for h in target.support:
        supp_mask |= 1 << h.index

    for omega in model.nature.labels:
        if nu.weight(omega) == 0:
            continue
        base = nature_block(space, omega)
        for combo in product(*[m.support for m in opp_list]):
            plans = tuple(prof for prof, _ in combo)
            shell = base
            for prof in plans:
                for s in prof.strategies:
                    shell &= strategy_mask(model, s)
            if shell == 0:
                continue
            for assembly in product(*[forced[key] for key in keys]):
                region = shell
                for (agent, atom_id), action in zip(keys, assembly):
                    region &= _pin_allows(model, agent, atom_id, action)
                    if region == 0:
                        break
                if region == 0 or region & supp_mask:
                    continue
                return _assemble_certificate(
                    model, player, nu, focus, opp_list, target, forced,
                    omega, plans, keys, assembly, region,
                )
    return None


def _assemble_certificate(
    model: WModel,
    player: str,
    nu: RationalDistribution,
    focus: MixedStrategy,
    opponents: tuple[MixedStrategy, ...],
    target: PushforwardDistribution,
    forced: dict[tuple[str, int], tuple[str, ...]],
    omega: str,
    plans: tuple[PureStrategyProfile, ...],
    keys: tuple[tuple[str, int], ...],
    assembly: tuple[str, ...],
    region: int,
) -> NonEquivalenceCertificate:
    space = model.space
    pin_map = dict(zip(keys, assembly))
    first = (region & -region).bit_length() - 1
    landed = space.config(first)
    strategies = []
    for a in model.agents_of(player):
        info = model.info_of(a)
        labels = model.actions_of(a).labels
        z_here = info.atom_index(first)
        choice = []
        for z in range(len(info)):
            pinned = pin_map.get((a, z))
            if pinned is not None:
                choice.append(pinned)
            elif z == z_here:
                choice.append(landed.action(a))
            else:
                choice.append(labels[0])
        strategies.append(PureStrategy(a, tuple(choice)))
    profile = PureStrategyProfile(tuple(strategies))
    merged = profile
    for plan in plans:
        merged = merged.merged_with(plan)
    solutions = closed_loop_solutions(model, merged, omega)
    if solutions != [landed]:
        raise PlayabilityError(merged, omega, solutions)
    return NonEquivalenceCertificate(
        player=player,
        nu=nu,
        focus=focus,
        opponents=opponents,
        target=target,
        forced=tuple((a, z, forced[(a, z)]) for a, z in keys),
        omega=omega,
        opponent_plans=plans,
        pins=tuple((a, z, u) for (a, z), u in zip(keys, assembly)),
        reachable=region,
        exhibited=landed,
        profile=profile,
    )


def verify_certificate(
    model: WModel, player: str, cert: NonEquivalenceCertificate
) -> bool:
    """Recompute every claim of the certificate from scratch."""
    try:
        if cert.player != player or cert.focus.player != player:
            return False
        target = pushforward(model, cert.nu, (cert.focus, *cert.opponents))
        if not distributions_equal(target, cert.target):
            return False
        forced = forced_support(model, player, target)
        if tuple((a, z, acts) for (a, z), acts in forced.items()) != cert.forced:
            return False
        pins = {(a, z): u for a, z, u in cert.pins}
        if set(pins) != set(forced):
            return False
        if any(u not in forced[key] for key, u in pins.items()):
            return False
        if cert.nu.weight(cert.omega) <= 0:
            return False
        for plan, mixed in zip(cert.opponent_plans, cert.opponents):
            if plan not in [p for p, _ in mixed.support]:
                return False
        region = nature_block(model.space, cert.omega)
        for plan in cert.opponent_plans:
            for s in plan.strategies:
                region &= strategy_mask(model, s)
        for (agent, atom_id), action in pins.items():
            region &= _pin_allows(model, agent, atom_id, action)
        if region != cert.reachable or region == 0:
            return False
        if any(target.weight(model.space.config(i)) != 0 for i in iter_bits(region)):
            return False
        if (region & -region).bit_length() - 1 != cert.exhibited.index:
            return False
        if cert.profile.agents != frozenset(model.agents_of(player)):
            return False
        for agent, atom_id, action in cert.pins:
            if cert.profile.strategy_of(agent).action_at(atom_id) != action:
                return False
        merged = cert.profile
        for plan in cert.opponent_plans:
            merged = merged.merged_with(plan)
        if closed_loop_solutions(model, merged, cert.omega) != [cert.exhibited]:
            return False
    except Exception:
        return False
    return True
