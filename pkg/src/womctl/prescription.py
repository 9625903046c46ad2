"""Prescriptions: two-stage action generation from shared and private information.

An agent first forms, from information shared with lower-indexed agents, a
function (the prescription); the function is then applied to the private
remainder of the target agent's memory to produce the action. Because the
shared/private split is pure label algebra, any agent can carry an
action-equivalent strategy for any other agent, which is what positional
transfer constructs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import DomainMismatch, UndefinedPolicyEntry, WomctlError
from .infostruct import (
    DEFAULT_ENUM_CAP,
    InfoSet,
    Realization,
    accessible_labels,
    enumerate_realizations,
    inaccessible_labels,
    memory_labels,
)
from .scenario import Policy, Scenario
from .topology import DelayMatrix


@dataclass(frozen=True)
class PrescriptionFunction:
    """A table from private-information realizations to one agent's actions.

    ``table`` may be partial when paired with a ``default`` action; lookups
    outside the declared domain always fail.
    """

    owner: int
    target: int
    time: int
    domain: InfoSet
    table: dict[Realization, str] = field(hash=False)
    default: str | None = None

    def __hash__(self):  # tables are not hashable; identity is fine here
        return id(self)


def act(gamma: PrescriptionFunction, l: Realization) -> str:
    """Apply a prescription to a private-information realization."""
    if l.domain != gamma.domain:
        have = set(l.domain.labels)
        want = set(gamma.domain.labels)
        raise DomainMismatch(missing=sorted(want - have), extra=sorted(have - want))
    u = gamma.table.get(l, gamma.default)
    if u is None:
        raise WomctlError(f"prescription table has no entry for {l} and no default")
    return u


@dataclass
class PrescriptionStrategy:
    """Per-time tables producing prescriptions from conditioning realizations."""

    owner: int
    target: int
    tables: dict[int, dict[Realization, PrescriptionFunction]]


@dataclass(frozen=True)
class CompletePrescription:
    """One prescription per target agent, all held by the same owner."""

    owner: int
    time: int
    parts: tuple[PrescriptionFunction, ...]

    def __post_init__(self):
        for j, g in enumerate(self.parts, start=1):
            if g.target != j:
                raise WomctlError(
                    f"part {j} of a complete prescription targets agent {g.target}")


@dataclass
class FullStrategy:
    """An agent's prescription strategy for every target and time."""

    owner: int
    agent_count: int
    horizon: int
    parts: dict[tuple[int, int], dict[Realization, PrescriptionFunction]]

    def gamma(self, j: int, t: int, conditioning: Realization) -> PrescriptionFunction:
        try:
            return self.parts[(j, t)][conditioning]
        except KeyError:
            raise WomctlError(
                f"strategy of agent {self.owner} has no prescription for target "
                f"{j}, t={t}, conditioning {conditioning}") from None


def prescription_domain(d: DelayMatrix, k: int, j: int, t: int) -> InfoSet:
    """The private-information labels agent k's prescription for j consumes.

    For targets before k this is the part of j's memory that k itself cannot
    rule on from shared information; for k and later targets it is the
    target's own private remainder.
    """
    if j < k:
        return inaccessible_labels(d, j, k, t)
    return inaccessible_labels(d, j, j, t)


def conditioning_labels(d: DelayMatrix, k: int, j: int, t: int) -> InfoSet:
    """The shared-information labels that parameterize the prescription."""
    if j < k:
        return accessible_labels(d, k, t)
    return accessible_labels(d, j, t)


def policy_to_strategy(s: Scenario, d: DelayMatrix, g: Policy, k: int,
                       cap: int = DEFAULT_ENUM_CAP) -> FullStrategy:
    """Split a control policy into agent k's prescription strategy.

    For every target j and time t the target's memory realization is the
    disjoint union of a conditioning realization and a private realization;
    each prescription entry is the policy's action on the merged realization.
    Memory realizations absent from the policy table (unreachable ones) fall
    back to the first action of the target's space, keeping tables total.
    """
    parts: dict[tuple[int, int], dict[Realization, PrescriptionFunction]] = {}
    for t in s.times():
        for j in s.agents():
            cond = conditioning_labels(d, k, j, t)
            dom = prescription_domain(d, k, j, t)
            fallback = s.action_space(j, t).values[0]
            if (j, t) not in g.tables:
                raise UndefinedPolicyEntry(j, t, "<no table>")
            g_table = g.tables[(j, t)]
            rows: dict[Realization, PrescriptionFunction] = {}
            dom_reals = enumerate_realizations(s, dom, cap)
            for a in enumerate_realizations(s, cond, cap):
                table = {}
                for l in dom_reals:
                    merged = a.merge(l)
                    table[l] = g_table.get(merged, fallback)
                rows[a] = PrescriptionFunction(
                    owner=k, target=j, time=t, domain=dom, table=table)
            parts[(j, t)] = rows
    return FullStrategy(owner=k, agent_count=s.agent_count,
                        horizon=s.horizon, parts=parts)


def strategy_to_policy(s: Scenario, d: DelayMatrix, psi: FullStrategy,
                       cap: int = DEFAULT_ENUM_CAP) -> Policy:
    """Collapse a prescription strategy back into a total control policy.

    Every agent's action on a memory realization is the prescription chosen
    by the strategy on the shared part, applied to the private part.
    """
    k = psi.owner
    g = Policy(agent_count=s.agent_count, horizon=s.horizon)
    for t in s.times():
        for j in s.agents():
            cond = conditioning_labels(d, k, j, t)
            dom = prescription_domain(d, k, j, t)
            for m in enumerate_realizations(s, memory_labels(d, j, t), cap):
                gamma = psi.gamma(j, t, m.restrict(cond))
                g.set_action(j, t, m, act(gamma, m.restrict(dom)))
    return g


def positional_transfer(psi: FullStrategy, j: int, s: Scenario,
                        d: DelayMatrix, cap: int = DEFAULT_ENUM_CAP) -> FullStrategy:
    """Re-seat a strategy at agent j without changing any induced action.

    Routes through the induced control policy: the policy generates the same
    actions for every agent, and re-splitting it at agent j yields j's
    action-equivalent prescription strategy.
    """
    return policy_to_strategy(s, d, strategy_to_policy(s, d, psi, cap), j, cap)


def complete_prescription_at(s: Scenario, d: DelayMatrix, psi: FullStrategy,
                             t: int, a: Realization) -> CompletePrescription:
    """Materialize the owner's complete prescription for one accessible
    realization ``a`` of the owner's shared information at time t."""
    k = psi.owner
    want = accessible_labels(d, k, t)
    if a.domain != want:
        have = set(a.domain.labels)
        raise DomainMismatch(missing=sorted(set(want.labels) - have),
                             extra=sorted(have - set(want.labels)))
    gammas = []
    for j in s.agents():
        cond = conditioning_labels(d, k, j, t)
        gammas.append(psi.gamma(j, t, a.restrict(cond)))
    return CompletePrescription(owner=k, time=t, parts=tuple(gammas))


def full_table(s: Scenario, gamma: PrescriptionFunction,
               cap: int = DEFAULT_ENUM_CAP) -> dict[Realization, str]:
    """The prescription's table materialized over its whole domain."""
    out = {}
    for l in enumerate_realizations(s, gamma.domain, cap):
        out[l] = act(gamma, l)
    return out


def constant_prescription(s: Scenario, d: DelayMatrix, k: int, j: int, t: int,
                          action: str) -> PrescriptionFunction:
    dom = prescription_domain(d, k, j, t)
    return PrescriptionFunction(owner=k, target=j, time=t, domain=dom,
                                table={}, default=action)


def enumerate_prescriptions(s: Scenario, d: DelayMatrix, k: int, j: int, t: int,
                            cap: int = DEFAULT_ENUM_CAP) -> list[PrescriptionFunction]:
    """All prescriptions of k for j at t, in canonical table order."""
    dom = prescription_domain(d, k, j, t)
    reals = enumerate_realizations(s, dom, cap)
    actions = s.action_space(j, t).values
    total = len(actions) ** len(reals)
    if total > cap:
        from .errors import EnumerationCapExceeded
        raise EnumerationCapExceeded("prescription functions", total, cap)
    out = []
    for combo in itertools.product(actions, repeat=len(reals)):
        out.append(PrescriptionFunction(
            owner=k, target=j, time=t, domain=dom,
            table=dict(zip(reals, combo))))
    return out
