"""Information-structure algebra over typed variable labels.

Every piece of information in the system is identified by a label: agent j's
observation at time tau, or its action at time tau. What an agent knows at a
given time is a finite set of such labels, and the shared/private splits used
by prescriptions are plain set algebra on them. Two agents "share" a variable
when both hold its label; values never enter these computations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import DomainMismatch, EnumerationCapExceeded, NotBeyond
from .topology import DelayMatrix

if TYPE_CHECKING:  # pragma: no cover
    from .scenario import Scenario

DEFAULT_ENUM_CAP = 10_000_000


class Kind(IntEnum):
    OBS = 0
    ACT = 1


@dataclass(frozen=True, order=True)
class VarLabel:
    """One random variable of the system: agent + time + observation/action."""

    agent: int
    time: int
    kind: Kind

    def __str__(self) -> str:
        return f"{'y' if self.kind == Kind.OBS else 'u'}{self.agent}@{self.time}"


def obs(agent: int, time: int) -> VarLabel:
    return VarLabel(agent, time, Kind.OBS)


def act(agent: int, time: int) -> VarLabel:
    return VarLabel(agent, time, Kind.ACT)


@dataclass(frozen=True)
class InfoSet:
    """An immutable set of labels with a canonical (agent, time, kind) order."""

    labels: tuple[VarLabel, ...]

    @classmethod
    def of(cls, labels: Iterable[VarLabel]) -> "InfoSet":
        return cls(tuple(sorted(set(labels))))

    def __iter__(self) -> Iterator[VarLabel]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: VarLabel) -> bool:
        return label in self.labels

    def union(self, other: "InfoSet") -> "InfoSet":
        return InfoSet.of(self.labels + other.labels)

    def intersect(self, other: "InfoSet") -> "InfoSet":
        mine = set(other.labels)
        return InfoSet(tuple(l for l in self.labels if l in mine))

    def difference(self, other: "InfoSet") -> "InfoSet":
        drop = set(other.labels)
        return InfoSet(tuple(l for l in self.labels if l not in drop))

    def issubset(self, other: "InfoSet") -> bool:
        theirs = set(other.labels)
        return all(l in theirs for l in self.labels)


EMPTY_INFOSET = InfoSet(())


@dataclass(frozen=True)
class Realization:
    """An assignment of concrete values to every label of one InfoSet."""

    items: tuple[tuple[VarLabel, str], ...]

    @classmethod
    def of(cls, mapping) -> "Realization":
        items = tuple(sorted(dict(mapping).items()))
        return cls(items)

    @property
    def domain(self) -> InfoSet:
        return InfoSet(tuple(l for l, _ in self.items))

    def get(self, label: VarLabel) -> str:
        for l, v in self.items:
            if l == label:
                return v
        raise KeyError(label)

    def as_dict(self) -> dict[VarLabel, str]:
        return dict(self.items)

    def restrict(self, labels: InfoSet) -> "Realization":
        have = dict(self.items)
        try:
            return Realization(tuple((l, have[l]) for l in labels))
        except KeyError as e:
            raise DomainMismatch(missing=[e.args[0]], extra=[]) from None

    def merge(self, other: "Realization") -> "Realization":
        """Combine two assignments; overlapping labels must agree."""
        out = dict(self.items)
        for l, v in other.items:
            if out.setdefault(l, v) != v:
                raise ValueError(f"conflicting values for {l}: {out[l]!r} vs {v!r}")
        return Realization.of(out)

    def __str__(self) -> str:
        if not self.items:
            return "-"
        return ",".join(f"{l}={v}" for l, v in self.items)


EMPTY_REALIZATION = Realization(())


@dataclass(frozen=True)
class BeyondSet:
    """The agents at or after ``base`` in the fixed agent order."""

    base: int
    members: tuple[int, ...]


def beyond(k: int, agent_count: int) -> BeyondSet:
    if not 1 <= k <= agent_count:
        raise ValueError(f"agent {k} out of range 1..{agent_count}")
    return BeyondSet(base=k, members=tuple(range(k, agent_count + 1)))


@lru_cache(maxsize=None)
def memory_labels(d: DelayMatrix, k: int, t: int) -> InfoSet:
    """Everything agent k has received by time t.

    Agent j's observations arrive with delay d(j, k) and its actions one step
    later (the action of a cycle is transmitted at the start of the next one),
    so the memory holds Y^j up to t - d(j, k) and U^j up to t - d(j, k) - 1.
    """
    labels = []
    for j in d.agents():
        lag = d.delay(j, k)
        labels.extend(obs(j, tau) for tau in range(0, t - lag + 1))
        labels.extend(act(j, tau) for tau in range(0, t - lag))
    return InfoSet.of(labels)


@lru_cache(maxsize=None)
def accessible_labels(d: DelayMatrix, k: int, t: int) -> InfoSet:
    """The part of agent k's memory held by every agent 1..k.

    Equals the intersection of the memories of agents 1..k; computed here in
    closed form via the worst delay max_{i<=k} d(j, i) per source agent j.
    """
    labels = []
    for j in d.agents():
        lag = max(d.delay(j, i) for i in range(1, k + 1))
        labels.extend(obs(j, tau) for tau in range(0, t - lag + 1))
        labels.extend(act(j, tau) for tau in range(0, t - lag))
    return InfoSet.of(labels)


def new_info_labels(d: DelayMatrix, k: int, t: int) -> InfoSet:
    """Labels entering agent k's accessible set at time t (all of it at t=0)."""
    if t == 0:
        return accessible_labels(d, k, 0)
    return accessible_labels(d, k, t).difference(accessible_labels(d, k, t - 1))


def inaccessible_labels(d: DelayMatrix, k: int, j: int, t: int) -> InfoSet:
    """Agent k's memory minus agent j's accessible set, for j at or after k."""
    if j < k:
        raise NotBeyond(k, j)
    return memory_labels(d, k, t).difference(accessible_labels(d, j, t))


def label_space(s: "Scenario", label: VarLabel):
    """The finite value space a label ranges over."""
    if label.kind == Kind.OBS:
        return s.obs_spaces[label.agent]
    return s.action_space(label.agent, label.time)


def count_realizations(s: "Scenario", info: InfoSet) -> int:
    n = 1
    for l in info:
        n *= len(label_space(s, l).values)
    return n


def enumerate_realizations(
    s: "Scenario", info: InfoSet, cap: int = DEFAULT_ENUM_CAP
) -> list[Realization]:
    """All assignments over ``info`` in canonical label-then-value order."""
    total = count_realizations(s, info)
    if total > cap:
        raise EnumerationCapExceeded("realizations of info set", total, cap)
    pools = [label_space(s, l).values for l in info]
    out = []
    for combo in itertools.product(*pools):
        out.append(Realization(tuple(zip(info.labels, combo))))
    return out
