"""Tree-structured hyperparameter spaces with conditional activation.

A space is a forest of named parameter nodes.  Each node carries a value
domain and, optionally, a condition naming a parent node together with the
parent values that activate it.  An assignment maps the names of exactly
the active nodes to in-domain values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import yaml

Value = bool | int | float | str
Assignment = dict[str, Value]

_SCALES = ("linear", "log10")


class SpaceError(ValueError):
    """Malformed space description, domain, or node reference."""


def value_equal(a: Value, b: Value) -> bool:
    """Equality that keeps bools distinct from ints (True is not 1 here)."""
    return a == b and isinstance(a, bool) == isinstance(b, bool)


@dataclass(frozen=True)
class Categorical:
    """Finite ordered set of symbolic choices."""

    choices: tuple[Value, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(self.choices))
        if not self.choices:
            raise SpaceError("categorical domain needs at least one choice")
        for i, c in enumerate(self.choices):
            for other in self.choices[i + 1 :]:
                if value_equal(c, other):
                    raise SpaceError(f"duplicate categorical choice {c!r}")

    def index_of(self, value: Value) -> int | None:
        for i, c in enumerate(self.choices):
            if value_equal(value, c):
                return i
        return None

    def contains(self, value: Value) -> bool:
        return self.index_of(value) is not None

    def sample(self, rng: np.random.Generator) -> Value:
        return self.choices[int(rng.integers(len(self.choices)))]


@dataclass(frozen=True)
class IntRange:
    """Inclusive integer interval."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
            raise SpaceError(f"integer bounds must be ints, got {self.lo!r}, {self.hi!r}")
        if self.lo > self.hi:
            raise SpaceError(f"integer range has lo {self.lo} > hi {self.hi}")

    @property
    def choices(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, value: Value) -> bool:
        return (
            isinstance(value, int)
            and not isinstance(value, bool)
            and self.lo <= value <= self.hi
        )

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.lo, self.hi + 1))


@dataclass(frozen=True)
class Continuous:
    """Real interval, sampled and density-estimated in linear or log10 coordinates."""

    lo: float
    hi: float
    scale: str = "linear"

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise SpaceError(f"continuous bounds must be finite, got [{self.lo}, {self.hi}]")
        if self.lo >= self.hi:
            raise SpaceError(f"continuous range has lo {self.lo} >= hi {self.hi}")
        if self.scale not in _SCALES:
            raise SpaceError(f"unknown scale {self.scale!r}, expected one of {_SCALES}")
        if self.scale == "log10" and self.lo <= 0:
            raise SpaceError(f"log10 scale requires lo > 0, got {self.lo}")

    @property
    def internal_bounds(self) -> tuple[float, float]:
        """Bounds in estimation coordinates (log10 domain for log-scaled nodes)."""
        if self.scale == "log10":
            return math.log10(self.lo), math.log10(self.hi)
        return self.lo, self.hi

    def to_internal(self, value: float) -> float:
        return math.log10(value) if self.scale == "log10" else float(value)

    def from_internal(self, x: float) -> float:
        value = 10.0**x if self.scale == "log10" else x
        return float(min(max(value, self.lo), self.hi))

    def contains(self, value: Value) -> bool:
        return (
            isinstance(value, (int, float))
            and not isinstance(value, bool)
            and math.isfinite(value)
            and self.lo <= value <= self.hi
        )

    def sample(self, rng: np.random.Generator) -> float:
        lo, hi = self.internal_bounds
        return self.from_internal(float(rng.uniform(lo, hi)))


ParamDomain = Categorical | IntRange | Continuous


@dataclass(frozen=True)
class Condition:
    """Activation rule: the node is active when its parent takes one of ``values``."""

    parent: str
    values: tuple[Value, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise SpaceError(f"condition on {self.parent!r} has no activating values")

    def satisfied_by(self, parent_value: Value) -> bool:
        return any(value_equal(parent_value, v) for v in self.values)


@dataclass(frozen=True)
class ParamNode:
    name: str
    domain: ParamDomain
    condition: Condition | None = None


@dataclass(frozen=True)
class ConfigSpace:
    """Validated forest of parameter nodes in topological order."""

    nodes: tuple[ParamNode, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def node(self, name: str) -> ParamNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise SpaceError(f"no node named {name!r}")


def _node_from_mapping(item: Mapping[str, Any]) -> ParamNode:
    name = item.get("name")
    if not isinstance(name, str) or not name:
        raise SpaceError(f"node description needs a 'name' string, got {item!r}")
    kind = item.get("type")
    try:
        if kind == "categorical":
            domain: ParamDomain = Categorical(tuple(item["choices"]))
        elif kind == "int":
            domain = IntRange(item["lo"], item["hi"])
        elif kind == "continuous":
            lo, hi = item["lo"], item["hi"]
            if not isinstance(lo, (int, float)) or not isinstance(hi, (int, float)):
                raise SpaceError(f"continuous bounds must be numbers, got {lo!r}, {hi!r}")
            domain = Continuous(lo, hi, item.get("scale", "linear"))
        else:
            raise SpaceError(f"unknown node type {kind!r}")
        condition = None
        if "condition" in item and item["condition"] is not None:
            cond = item["condition"]
            condition = Condition(cond["parent"], tuple(cond["values"]))
    except KeyError as exc:
        raise SpaceError(f"node '{name}': missing field {exc}") from exc
    except SpaceError as exc:
        raise SpaceError(f"node '{name}': {exc}") from exc
    return ParamNode(name, domain, condition)


def define_space(spec: Iterable[Mapping[str, Any] | ParamNode]) -> ConfigSpace:
    """Build a validated ConfigSpace from node descriptions or ParamNode objects.

    Nodes are reordered into a stable topological order of the condition
    forest.  Raises SpaceError naming the offending node on duplicate names,
    cycles, missing parents, invalid bounds, or activating values outside
    the parent domain.
    """
    nodes = [n if isinstance(n, ParamNode) else _node_from_mapping(n) for n in spec]
    by_name: dict[str, ParamNode] = {}
    for node in nodes:
        if node.name in by_name:
            raise SpaceError(f"duplicate node name '{node.name}'")
        by_name[node.name] = node
    for node in nodes:
        if node.condition is None:
            continue
        parent = by_name.get(node.condition.parent)
        if parent is None:
            raise SpaceError(
                f"node '{node.name}': condition on missing parent '{node.condition.parent}'"
            )
        for v in node.condition.values:
            if not parent.domain.contains(v):
                raise SpaceError(
                    f"node '{node.name}': activating value {v!r} outside domain of "
                    f"parent '{parent.name}'"
                )

    ordered: list[ParamNode] = []
    placed: set[str] = set()
    pending = list(nodes)
    while pending:
        progressed = False
        remaining = []
        for node in pending:
            if node.condition is None or node.condition.parent in placed:
                ordered.append(node)
                placed.add(node.name)
                progressed = True
            else:
                remaining.append(node)
        if not progressed:
            names = ", ".join(f"'{n.name}'" for n in remaining)
            raise SpaceError(f"cycle in conditions involving {names}")
        pending = remaining
    return ConfigSpace(tuple(ordered))


def text_rep_space() -> ConfigSpace:
    """The default space over text representation and classifier hyperparameters.

    The n-gram upper bound is encoded as an offset child per lower-bound
    value, so the derived n_max = n_min + n_span always lies in
    {n_min, ..., 3} and every assignment activates exactly seven nodes.
    """
    return define_space(
        [
            ParamNode("n_min", Categorical((1, 2, 3))),
            ParamNode("n_span|n_min=1", Categorical((0, 1, 2)), Condition("n_min", (1,))),
            ParamNode("n_span|n_min=2", Categorical((0, 1)), Condition("n_min", (2,))),
            ParamNode("n_span|n_min=3", Categorical((0,)), Condition("n_min", (3,))),
            ParamNode("weighting", Categorical(("tf", "tf-idf", "binary"))),
            ParamNode("remove_stopwords", Categorical((True, False))),
            ParamNode("regularizer", Categorical(("l1", "l2"))),
            ParamNode("strength", Continuous(1e-5, 1e5, "log10")),
            ParamNode("tolerance", Continuous(1e-5, 1e-3, "log10")),
        ]
    )


def _condition_met(condition: Condition | None, values: Mapping[str, Value]) -> bool:
    if condition is None:
        return True
    return condition.parent in values and condition.satisfied_by(values[condition.parent])


def sample_prior(space: ConfigSpace, rng: np.random.Generator) -> Assignment:
    """Draw each active node uniformly (in estimation coordinates for continuous)."""
    assignment: Assignment = {}
    for node in space.nodes:
        if _condition_met(node.condition, assignment):
            assignment[node.name] = node.domain.sample(rng)
    return assignment


def active_nodes(space: ConfigSpace, assignment: Mapping[str, Value]) -> list[ParamNode]:
    """The relevant slice of the forest: roots plus transitively activated children."""
    active: list[ParamNode] = []
    names: set[str] = set()
    for node in space.nodes:
        cond = node.condition
        if cond is None or (
            cond.parent in names
            and cond.parent in assignment
            and cond.satisfied_by(assignment[cond.parent])
        ):
            active.append(node)
            names.add(node.name)
    return active


def validate_assignment(space: ConfigSpace, assignment: Mapping[str, Value]) -> list[str]:
    """Return violation messages (empty list means the assignment is valid)."""
    violations: list[str] = []
    actives = active_nodes(space, assignment)
    active_names = {n.name for n in actives}
    for node in actives:
        if node.name not in assignment:
            violations.append(f"missing active node '{node.name}'")
        elif not node.domain.contains(assignment[node.name]):
            violations.append(
                f"value {assignment[node.name]!r} of node '{node.name}' out of domain"
            )
    all_names = set(space.names)
    for name in assignment:
        if name not in all_names:
            violations.append(f"unknown node '{name}'")
        elif name not in active_names:
            violations.append(f"extraneous inactive node '{name}'")
    return violations


def enumerate_assignments(space: ConfigSpace) -> list[Assignment]:
    """All assignments of a fully discrete space, in deterministic order."""
    for node in space.nodes:
        if isinstance(node.domain, Continuous):
            raise SpaceError(f"cannot enumerate continuous node '{node.name}'")
    out: list[Assignment] = []

    def rec(i: int, acc: Assignment) -> None:
        if i == len(space.nodes):
            out.append(dict(acc))
            return
        node = space.nodes[i]
        if not _condition_met(node.condition, acc):
            rec(i + 1, acc)
            return
        for v in node.domain.choices:  # type: ignore[union-attr]
            acc[node.name] = v
            rec(i + 1, acc)
            del acc[node.name]

    rec(0, {})
    return out


def serialize_space(space: ConfigSpace) -> list[dict[str, Any]]:
    """Structured description accepted back by define_space."""
    items: list[dict[str, Any]] = []
    for node in space.nodes:
        d = node.domain
        item: dict[str, Any] = {"name": node.name}
        if isinstance(d, Categorical):
            item["type"] = "categorical"
            item["choices"] = list(d.choices)
        elif isinstance(d, IntRange):
            item["type"] = "int"
            item["lo"] = d.lo
            item["hi"] = d.hi
        else:
            item["type"] = "continuous"
            item["lo"] = d.lo
            item["hi"] = d.hi
            item["scale"] = d.scale
        if node.condition is not None:
            item["condition"] = {
                "parent": node.condition.parent,
                "values": list(node.condition.values),
            }
        items.append(item)
    return items


def save_space(space: ConfigSpace, path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(serialize_space(space), sort_keys=False), encoding="utf-8"
    )


def load_space(path: str | Path) -> ConfigSpace:
    """Parse a space description file (YAML list, one object per node)."""
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise SpaceError(f"space file {path} must contain a list of node objects")
    return define_space(raw)
