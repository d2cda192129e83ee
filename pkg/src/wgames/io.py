"""JSON wire formats, analysis reports, and the model digest.

Everything on the wire is exact: rationals travel as "p/q" strings and
configurations as explicit coordinate objects.  Serialization is canonical
(declared orders everywhere), so equal objects produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .fields import (
    Configuration,
    ConfigurationSpace,
    CoordinateSet,
    DEFAULT_SPACE_CAP,
    FiniteSet,
    Partition,
    cylinder_partition,
    iter_bits,
)
from .model import WModel
from .recall import ConfigurationOrdering, Ordering
from .strategies import (
    BehavioralStrategy,
    MixedStrategy,
    PureStrategy,
    PureStrategyProfile,
    RationalDistribution,
)

Strategy = Union[PureStrategyProfile, MixedStrategy, BehavioralStrategy]


class ModelFormatError(ValueError):
    """Schema violation, addressed by the JSON path where it happened."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


# ── schema primitives ───────────────────────────────────────────────────


def _as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ModelFormatError(path, "expected an object")
    return value


def _as_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ModelFormatError(path, "expected a list")
    return value


def _as_string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ModelFormatError(path, "expected a string")
    return value


def _exact_keys(obj: dict, path: str, keys: set[str]) -> None:
    missing = keys - set(obj)
    extra = set(obj) - keys
    if missing:
        raise ModelFormatError(path, f"missing key {sorted(missing)[0]!r}")
    if extra:
        raise ModelFormatError(path, f"unknown key {sorted(extra)[0]!r}")


def _label_list(value, path: str) -> tuple[str, ...]:
    items = _as_list(value, path)
    if not items:
        raise ModelFormatError(path, "must not be empty")
    labels = tuple(_as_string(v, f"{path}[{i}]") for i, v in enumerate(items))
    seen: set[str] = set()
    for i, label in enumerate(labels):
        if label in seen:
            raise ModelFormatError(f"{path}[{i}]", f"duplicate label {label!r}")
        seen.add(label)
    return labels


_RATIONAL = re.compile(r"-?\d+(/[1-9]\d*)?\Z")


def parse_fraction(value, path: str) -> Fraction:
    """Exact rational from a "p/q" (or integer "p") string."""
    text = _as_string(value, path)
    if not _RATIONAL.match(text):
        raise ModelFormatError(path, f"not a rational: {text!r}")
    return Fraction(text)


def format_fraction(value: Fraction) -> str:
    return str(Fraction(value))


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFormatError("$", f"invalid JSON: {err.msg} (line {err.lineno})")


# ── configurations on the wire ──────────────────────────────────────────


def _config_index(value, path: str, space: ConfigurationSpace) -> int:
    obj = _as_object(value, path)
    _exact_keys(obj, path, {"nature", *space.agents})
    nature = _as_string(obj["nature"], f"{path}.nature")
    if nature not in space.nature.labels:
        raise ModelFormatError(f"{path}.nature", f"unknown Nature state {nature!r}")
    actions = {}
    for agent in space.agents:
        label = _as_string(obj[agent], f"{path}.{agent}")
        if label not in space.actions_of(agent).labels:
            raise ModelFormatError(
                f"{path}.{agent}", f"unknown action {label!r} for agent {agent!r}"
            )
        actions[agent] = label
    return space.index_of(nature, actions)


def config_payload(config: Configuration) -> dict:
    """Configuration as a plain coordinate object, declared order."""
    out = {"nature": config.nature}
    for agent in config.space.agents:
        out[agent] = config.action(agent)
    return out


def mask_payload(space: ConfigurationSpace, mask: int) -> list[dict]:
    """A configuration set as a list of coordinate objects, ascending."""
    return [config_payload(space.config(i)) for i in iter_bits(mask)]


# ── models ──────────────────────────────────────────────────────────────


def parse_model(text: str) -> WModel:
    """Validated model from JSON text.

    Information is given per agent either as an ``observes`` coordinate
    list (expanded to the cylinder partition) or as explicit ``atoms``.
    Every diagnostic carries the JSON path of the offending element.
    """
    top = _as_object(_loads(text), "$")
    _exact_keys(top, "$", {"nature", "agents", "players", "information"})

    nat = _as_object(top["nature"], "$.nature")
    _exact_keys(nat, "$.nature", {"states"})
    nature = FiniteSet("nature", _label_list(nat["states"], "$.nature.states"))

    agents: list[tuple[str, FiniteSet]] = []
    for i, entry in enumerate(_as_list(top["agents"], "$.agents")):
        path = f"$.agents[{i}]"
        obj = _as_object(entry, path)
        _exact_keys(obj, path, {"id", "actions"})
        aid = _as_string(obj["id"], f"{path}.id")
        if aid == "nature":
            raise ModelFormatError(f"{path}.id", "'nature' is reserved")
        if any(aid == b for b, _ in agents):
            raise ModelFormatError(f"{path}.id", f"duplicate agent id {aid!r}")
        actions = _label_list(obj["actions"], f"{path}.actions")
        agents.append((aid, FiniteSet(aid, actions)))
    if not agents:
        raise ModelFormatError("$.agents", "must not be empty")
    ids = tuple(a for a, _ in agents)

    size = len(nature)
    for _, acts in agents:
        size *= len(acts)
        if size > DEFAULT_SPACE_CAP:
            raise ModelFormatError(
                "$.agents", f"configuration space exceeds {DEFAULT_SPACE_CAP} elements"
            )
    space = ConfigurationSpace(
        nature=nature, agents=ids, actions=tuple(acts for _, acts in agents)
    )

    players: list[tuple[str, tuple[str, ...]]] = []
    assigned: set[str] = set()
    for name, members in _as_object(top["players"], "$.players").items():
        path = f"$.players.{name}"
        group = _label_list(members, path)
        for i, agent in enumerate(group):
            if agent not in ids:
                raise ModelFormatError(f"{path}[{i}]", f"unknown agent {agent!r}")
            if agent in assigned:
                raise ModelFormatError(
                    f"{path}[{i}]", f"agent {agent!r} belongs to two players"
                )
            assigned.add(agent)
        players.append((name, group))
    unassigned = [a for a in ids if a not in assigned]
    if unassigned:
        raise ModelFormatError(
            "$.players", f"agent {unassigned[0]!r} belongs to no player"
        )

    info_obj = _as_object(top["information"], "$.information")
    for agent in ids:
        if agent not in info_obj:
            raise ModelFormatError("$.information", f"missing agent {agent!r}")
    for agent in info_obj:
        if agent not in ids:
            raise ModelFormatError("$.information", f"unknown agent {agent!r}")

    information: list[tuple[str, Partition]] = []
    for agent in ids:
        path = f"$.information.{agent}"
        spec = _as_object(info_obj[agent], path)
        if set(spec) == {"observes"}:
            part = _parse_observes(spec["observes"], f"{path}.observes", space)
        elif set(spec) == {"atoms"}:
            part = _parse_atoms(spec["atoms"], f"{path}.atoms", space)
        else:
            raise ModelFormatError(path, "expected exactly one of 'observes', 'atoms'")
        information.append((agent, part))

    try:
        return WModel(
            nature=nature,
            agents=tuple(agents),
            players=tuple(players),
            information=tuple(information),
        )
    except ValueError as err:
        raise ModelFormatError("$", str(err)) from None


def _parse_observes(value, path: str, space: ConfigurationSpace) -> Partition:
    coords = _as_list(value, path)
    include_nature = False
    watched: list[str] = []
    for i, entry in enumerate(coords):
        label = _as_string(entry, f"{path}[{i}]")
        if label == "nature":
            if include_nature:
                raise ModelFormatError(f"{path}[{i}]", "duplicate coordinate 'nature'")
            include_nature = True
        elif label in space.agents:
            if label in watched:
                raise ModelFormatError(
                    f"{path}[{i}]", f"duplicate coordinate {label!r}"
                )
            watched.append(label)
        else:
            raise ModelFormatError(f"{path}[{i}]", f"unknown coordinate {label!r}")
    return cylinder_partition(space, CoordinateSet.of(include_nature, watched))


def _parse_atoms(value, path: str, space: ConfigurationSpace) -> Partition:
    atom_lists = _as_list(value, path)
    masks: list[int] = []
    seen = 0
    for i, configs in enumerate(atom_lists):
        atom_path = f"{path}[{i}]"
        entries = _as_list(configs, atom_path)
        if not entries:
            raise ModelFormatError(atom_path, "empty atom")
        mask = 0
        for j, cfg in enumerate(entries):
            index = _config_index(cfg, f"{atom_path}[{j}]", space)
            bit = 1 << index
            if mask & bit:
                raise ModelFormatError(
                    f"{atom_path}[{j}]", "duplicate configuration in atom"
                )
            if seen & bit:
                raise ModelFormatError(f"{atom_path}[{j}]", "atoms overlap")
            mask |= bit
        seen |= mask
        masks.append(mask)
    if seen != space.full_mask:
        raise ModelFormatError(path, "atoms do not cover H")
    return Partition(space, tuple(masks))


def serialize_model(model: WModel) -> str:
    """Canonical JSON for a model; information always as explicit atoms."""
    payload = {
        "nature": {"states": list(model.nature.labels)},
        "agents": [
            {"id": a, "actions": list(acts.labels)} for a, acts in model.agents
        ],
        "players": {name: list(members) for name, members in model.players},
        "information": {
            agent: {
                "atoms": [
                    mask_payload(model.space, atom) for atom in part.atoms
                ]
            }
            for agent, part in model.information
        },
    }
    return json.dumps(payload, indent=2) + "\n"


def model_digest(model: WModel) -> str:
    """Short content hash of the canonical serialization."""
    blob = serialize_model(model).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


# ── strategies ──────────────────────────────────────────────────────────


def _parse_choice(value, path: str, model: WModel, agent: str) -> PureStrategy:
    if agent not in model.agent_ids:
        raise ModelFormatError(path, f"unknown agent {agent!r}")
    entries = _as_list(value, path)
    atoms = len(model.info_of(agent))
    if len(entries) != atoms:
        raise ModelFormatError(
            path, f"expected one action per atom ({atoms}), got {len(entries)}"
        )
    labels = model.actions_of(agent).labels
    choice = []
    for i, entry in enumerate(entries):
        label = _as_string(entry, f"{path}[{i}]")
        if label not in labels:
            raise ModelFormatError(
                f"{path}[{i}]", f"unknown action {label!r} for agent {agent!r}"
            )
        choice.append(label)
    return PureStrategy(agent, tuple(choice))


def _parse_profile(value, path: str, model: WModel) -> PureStrategyProfile:
    obj = _as_object(value, path)
    if not obj:
        raise ModelFormatError(path, "must not be empty")
    strategies = tuple(
        _parse_choice(choice, f"{path}.{agent}", model, agent)
        for agent, choice in obj.items()
    )
    return PureStrategyProfile(strategies)


def parse_strategy(text: str, model: WModel) -> Strategy:
    """Strategy object from JSON text, dispatched on the ``kind`` tag."""
    top = _as_object(_loads(text), "$")
    kind = _as_string(top.get("kind"), "$.kind") if "kind" in top else None
    if kind is None:
        raise ModelFormatError("$", "missing key 'kind'")

    if kind == "pure-profile":
        _exact_keys(top, "$", {"kind", "strategies"})
        return _parse_profile(top["strategies"], "$.strategies", model)

    if kind == "mixed":
        _exact_keys(top, "$", {"kind", "player", "support"})
        player = _as_string(top["player"], "$.player")
        if player not in model.player_names:
            raise ModelFormatError("$.player", f"unknown player {player!r}")
        own = frozenset(model.agents_of(player))
        support = []
        total = Fraction(0)
        for i, entry in enumerate(_as_list(top["support"], "$.support")):
            path = f"$.support[{i}]"
            obj = _as_object(entry, path)
            _exact_keys(obj, path, {"weight", "profile"})
            weight = parse_fraction(obj["weight"], f"{path}.weight")
            profile = _parse_profile(obj["profile"], f"{path}.profile", model)
            if profile.agents != own:
                raise ModelFormatError(
                    f"{path}.profile",
                    f"must cover exactly the agents of player {player!r}",
                )
            total += weight
            support.append((profile, weight))
        if total != 1:
            raise ModelFormatError(
                "$.support", f"weights sum to {format_fraction(total)}"
            )
        try:
            return MixedStrategy(player, tuple(support))
        except ValueError as err:
            raise ModelFormatError("$.support", str(err)) from None

    if kind == "behavioral":
        _exact_keys(top, "$", {"kind", "player", "kernels"})
        player = _as_string(top["player"], "$.player")
        if player not in model.player_names:
            raise ModelFormatError("$.player", f"unknown player {player!r}")
        kernels_obj = _as_object(top["kernels"], "$.kernels")
        own = model.agents_of(player)
        if set(kernels_obj) != set(own):
            raise ModelFormatError(
                "$.kernels", f"must cover exactly the agents of player {player!r}"
            )
        kernels = []
        for agent in own:
            path = f"$.kernels.{agent}"
            rows = _as_list(kernels_obj[agent], path)
            atoms = len(model.info_of(agent))
            if len(rows) != atoms:
                raise ModelFormatError(
                    path, f"expected one distribution per atom ({atoms})"
                )
            labels = model.actions_of(agent).labels
            dists = []
            for z, row in enumerate(rows):
                row_path = f"{path}[{z}]"
                obj = _as_object(row, row_path)
                for action in obj:
                    if action not in labels:
                        raise ModelFormatError(
                            row_path, f"unknown action {action!r} for agent {agent!r}"
                        )
                weights = tuple(
                    parse_fraction(obj[u], f"{row_path}.{u}") if u in obj else Fraction(0)
                    for u in labels
                )
                if sum(weights, Fraction(0)) != 1:
                    raise ModelFormatError(
                        row_path,
                        f"weights sum to {format_fraction(sum(weights, Fraction(0)))}",
                    )
                dists.append(RationalDistribution(labels, weights))
            kernels.append((agent, tuple(dists)))
        return BehavioralStrategy(player, tuple(kernels))

    raise ModelFormatError("$.kind", f"unknown strategy kind {kind!r}")


def _profile_payload(profile: PureStrategyProfile) -> dict:
    return {s.agent: list(s.choice) for s in profile.strategies}


def strategy_payload(strategy: Strategy) -> dict:
    """JSON-ready object for any strategy kind."""
    if isinstance(strategy, PureStrategyProfile):
        return {"kind": "pure-profile", "strategies": _profile_payload(strategy)}
    if isinstance(strategy, MixedStrategy):
        return {
            "kind": "mixed",
            "player": strategy.player,
            "support": [
                {"weight": format_fraction(w), "profile": _profile_payload(p)}
                for p, w in strategy.support
            ],
        }
    if isinstance(strategy, BehavioralStrategy):
        return {
            "kind": "behavioral",
            "player": strategy.player,
            "kernels": {
                agent: [
                    {
                        u: format_fraction(dist.weight(u))
                        for u in dist.carrier
                        if dist.weight(u) != 0
                    }
                    for dist in dists
                ]
                for agent, dists in strategy.kernels
            },
        }
    raise TypeError(f"not a strategy: {strategy!r}")


def serialize_strategy(strategy: Strategy) -> str:
    return json.dumps(strategy_payload(strategy), indent=2) + "\n"


# ── beliefs and orderings ───────────────────────────────────────────────


def parse_belief(text: str, model: WModel) -> RationalDistribution:
    """Belief over Nature states from a JSON object {state: "p/q"}."""
    obj = _as_object(_loads(text), "$")
    labels = model.nature.labels
    for state in obj:
        if state not in labels:
            raise ModelFormatError("$", f"unknown Nature state {state!r}")
    carrier = tuple(w for w in labels if w in obj)
    if not carrier:
        raise ModelFormatError("$", "belief must name at least one state")
    weights = tuple(parse_fraction(obj[w], f"$.{w}") for w in carrier)
    if sum(weights, Fraction(0)) != 1:
        raise ModelFormatError(
            "$", f"weights sum to {format_fraction(sum(weights, Fraction(0)))}"
        )
    return RationalDistribution(carrier, weights)


def serialize_belief(nu: RationalDistribution) -> str:
    payload = {w: format_fraction(nu.weight(w)) for w in nu.carrier if nu.weight(w) != 0}
    return json.dumps(payload, indent=2) + "\n"


def parse_ordering(text: str, model: WModel) -> ConfigurationOrdering:
    """Configuration-ordering from JSON: a constant ``sequence`` or one
    assignment per configuration."""
    top = _as_object(_loads(text), "$")
    _exact_keys(top, "$", {"kind", "player"} | ({"sequence"} if "sequence" in top else {"assignments"}))
    if _as_string(top.get("kind"), "$.kind") != "ordering":
        raise ModelFormatError("$.kind", "expected 'ordering'")
    player = _as_string(top["player"], "$.player")
    if player not in model.player_names:
        raise ModelFormatError("$.player", f"unknown player {player!r}")
    own = model.agents_of(player)

    def sequence_at(value, path: str) -> tuple[str, ...]:
        seq = _label_list(value, path)
        if sorted(seq) != sorted(own):
            raise ModelFormatError(
                path, f"must order exactly the agents of player {player!r}"
            )
        return seq

    if "sequence" in top:
        seq = sequence_at(top["sequence"], "$.sequence")
        rho = Ordering(player, seq)
        return ConfigurationOrdering(player, (rho,) * model.space.size)

    rows = _as_list(top["assignments"], "$.assignments")
    table: list[Optional[Ordering]] = [None] * model.space.size
    for i, entry in enumerate(rows):
        path = f"$.assignments[{i}]"
        obj = _as_object(entry, path)
        _exact_keys(obj, path, {"configuration", "sequence"})
        index = _config_index(obj["configuration"], f"{path}.configuration", model.space)
        if table[index] is not None:
            raise ModelFormatError(
                f"{path}.configuration", "configuration assigned twice"
            )
        table[index] = Ordering(player, sequence_at(obj["sequence"], f"{path}.sequence"))
    holes = [i for i, rho in enumerate(table) if rho is None]
    if holes:
        raise ModelFormatError(
            "$.assignments",
            f"no ordering for configuration index {holes[0]}",
        )
    return ConfigurationOrdering(player, tuple(table))


def serialize_ordering(phi: ConfigurationOrdering, model: WModel) -> str:
    if phi.is_constant:
        payload = {
            "kind": "ordering",
            "player": phi.player,
            "sequence": list(phi.orderings[0].sequence),
        }
    else:
        payload = {
            "kind": "ordering",
            "player": phi.player,
            "assignments": [
                {
                    "configuration": config_payload(model.space.config(i)),
                    "sequence": list(phi.at(i).sequence),
                }
                for i in range(model.space.size)
            ],
        }
    return json.dumps(payload, indent=2) + "\n"


# ── report payloads ─────────────────────────────────────────────────────


def belief_payload(nu: RationalDistribution) -> dict:
    return {w: format_fraction(nu.weight(w)) for w in nu.carrier if nu.weight(w) != 0}


def ordering_payload(phi: ConfigurationOrdering, model: WModel) -> dict:
    """Ordering as the same object ``parse_ordering`` accepts."""
    return json.loads(serialize_ordering(phi, model))


def field_violation_payload(model: WModel, violation) -> dict:
    """Where a measurability check failed: the prefix, the conditioning
    atom, the cell piece, and the target-field atom it cuts."""
    return {
        "prefix": list(violation.kappa.sequence),
        "conditioning-atom": mask_payload(model.space, violation.conditioning_atom),
        "subset": mask_payload(model.space, violation.subset),
        "offending-atom": mask_payload(model.space, violation.offending_atom),
    }


def recall_violation_payload(violation) -> dict:
    return {
        "prefix": list(violation.ordering.sequence),
        "case": violation.case,
        "h-plus": config_payload(violation.h_plus),
        "h-minus": config_payload(violation.h_minus),
    }


def playability_witness_payload(model: WModel, witness) -> dict:
    return {
        "profile": {
            "kind": "pure-profile",
            "strategies": _profile_payload(witness.profile),
        },
        "nature-state": witness.omega,
        "solution-count": witness.count,
        "solutions": [config_payload(h) for h in witness.solutions],
    }


def pushforward_payload(q) -> list[dict]:
    return [
        {"configuration": config_payload(h), "weight": format_fraction(q.weight(h))}
        for h in q.support
    ]


def certificate_payload(model: WModel, cert) -> dict:
    return {
        "player": cert.player,
        "belief": belief_payload(cert.nu),
        "focus": strategy_payload(cert.focus),
        "opponents": [strategy_payload(m) for m in cert.opponents],
        "forced-support": [
            {"agent": agent, "atom": atom_id, "actions": list(actions)}
            for agent, atom_id, actions in cert.forced
        ],
        "nature-state": cert.omega,
        "opponent-plans": [_profile_payload(p) for p in cert.opponent_plans],
        "pins": [
            {"agent": agent, "atom": atom_id, "action": action}
            for agent, atom_id, action in cert.pins
        ],
        "reachable": mask_payload(model.space, cert.reachable),
        "exhibited": config_payload(cert.exhibited),
        "profile": _profile_payload(cert.profile),
    }


# ── analysis reports ────────────────────────────────────────────────────


@dataclass(frozen=True)
class AnalysisReport:
    """Outcome of one CLI analysis, serializable both ways.

    ``timing`` is filled only for the stderr timing channel and never
    enters the emitted text, keeping stdout bit-identical across runs.
    """

    command: str
    model: str
    outcome: str
    details: dict
    timing: Optional[float] = None


def emit_report(report: AnalysisReport, format: str = "human") -> str:
    if format == "structured":
        payload = {
            "command": report.command,
            "model": report.model,
            "outcome": report.outcome,
            "details": report.details,
        }
        return json.dumps(payload, indent=2) + "\n"
    if format == "human":
        lines = [f"{report.command}: {report.outcome}  [model {report.model}]"]
        lines.extend(_human_lines(report.details, "  "))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def parse_report(text: str) -> AnalysisReport:
    top = _as_object(_loads(text), "$")
    _exact_keys(top, "$", {"command", "model", "outcome", "details"})
    return AnalysisReport(
        command=_as_string(top["command"], "$.command"),
        model=_as_string(top["model"], "$.model"),
        outcome=_as_string(top["outcome"], "$.outcome"),
        details=_as_object(top["details"], "$.details"),
    )


def _human_lines(value, indent: str) -> list[str]:
    lines: list[str] = []
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)):
                lines.append(f"{indent}{key}:")
                lines.extend(_human_lines(item, indent + "  "))
            else:
                lines.append(f"{indent}{key}: {_scalar(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                lines.append(f"{indent}-")
                lines.extend(_human_lines(item, indent + "  "))
            else:
                lines.append(f"{indent}- {_scalar(item)}")
    else:
        lines.append(f"{indent}{_scalar(value)}")
    return lines


def _scalar(value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    return str(value)
