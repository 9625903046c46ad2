"""Sufficient state and exact belief filtering for the per-agent reformulation.

From any single agent's standpoint the system behaves like a partially
observed controlled Markov chain whose state couples the plant state with the
private-information realizations of every agent, whose control input is a
complete prescription, and whose output is the newly shared information.
Everything here is exact: beliefs are finite probability tables and updates
enumerate noise branches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    DomainMismatch,
    WomctlError,
    ZeroProbabilityCondition,
    ZeroProbabilityObservation,
)
from .infostruct import (
    DEFAULT_ENUM_CAP,
    EMPTY_INFOSET,
    InfoSet,
    Realization,
    accessible_labels,
    act as act_label,
    enumerate_realizations,
    new_info_labels,
    obs as obs_label,
)
from .prescription import CompletePrescription, act, prescription_domain
from .scenario import Scenario, enumerate_primitives
from .topology import DelayMatrix

BELIEF_TOL = 1e-9


@lru_cache(maxsize=None)
def sufficient_info_labels(d: DelayMatrix, k: int, t: int) -> InfoSet:
    """Union of the private-information components of agent k's state.

    The components are exactly the domains of the K prescriptions agent k
    holds, so a state realization determines every prescribed action.
    """
    out = EMPTY_INFOSET
    for j in d.agents():
        out = out.union(prescription_domain(d, k, j, t))
    return out


@dataclass(frozen=True)
class SufficientState:
    """Plant state plus a consistent assignment to all private components."""

    owner: int
    time: int
    x: str
    info: Realization

    def component(self, d: DelayMatrix, j: int) -> Realization:
        return self.info.restrict(prescription_domain(d, self.owner, j, self.time))

    def key(self) -> tuple:
        return (self.x, self.info.items)

    def __str__(self) -> str:
        tail = str(self.info)
        return f"x={self.x}" if tail == "-" else f"x={self.x},{tail}"


@dataclass
class BeliefState:
    """Exact probability table over sufficient-state realizations."""

    owner: int
    time: int
    probs: dict[SufficientState, float]

    def support(self) -> list[tuple[SufficientState, float]]:
        return sorted(((st, p) for st, p in self.probs.items() if p > 0.0),
                      key=lambda e: e[0].key())

    def total(self) -> float:
        return sum(self.probs.values())

    def fingerprint(self) -> tuple:
        return tuple((st.key(), p) for st, p in self.support())


def belief_linf(a: BeliefState, b: BeliefState) -> float:
    keys = {st: p for st, p in a.probs.items()}
    worst = 0.0
    for st, p in b.probs.items():
        worst = max(worst, abs(keys.pop(st, 0.0) - p))
    for _, p in keys.items():
        worst = max(worst, abs(p))
    return worst


def sufficient_state_space(s: Scenario, d: DelayMatrix, k: int, t: int,
                           cap: int = DEFAULT_ENUM_CAP) -> list[SufficientState]:
    """All consistent sufficient-state realizations in canonical order.

    Component label sets overlap; enumerating over their union assigns each
    shared label once, which is exactly the consistency requirement.
    """
    info = sufficient_info_labels(d, k, t)
    out = []
    for x in s.state_space.values:
        for r in enumerate_realizations(s, info, cap):
            out.append(SufficientState(owner=k, time=t, x=x, info=r))
    return out


def _actions_from(st: SufficientState, theta: CompletePrescription,
                  d: DelayMatrix, s: Scenario) -> tuple[str, ...]:
    if theta.owner != st.owner or theta.time != st.time:
        raise WomctlError(
            f"prescription of agent {theta.owner} at t={theta.time} applied "
            f"to a state of agent {st.owner} at t={st.time}")
    values = dict(st.info.items)
    u = []
    for j in s.agents():
        gamma = theta.parts[j - 1]
        dom = prescription_domain(d, st.owner, j, st.time)
        if gamma.domain != dom:
            have = set(gamma.domain.labels)
            raise DomainMismatch(missing=sorted(set(dom.labels) - have),
                                 extra=sorted(have - set(dom.labels)))
        l = Realization(tuple((lbl, values[lbl]) for lbl in dom))
        u.append(act(gamma, l))
    return tuple(u)


def _advance_labels(s: Scenario, d: DelayMatrix, st: SufficientState,
                    u: tuple[str, ...], x2: str, ys: tuple[str, ...]
                    ) -> tuple[SufficientState, Realization]:
    """Re-partition accumulated variables given next state and observations."""
    k, t = st.owner, st.time
    values = dict(st.info.items)
    for j in s.agents():
        values[obs_label(j, t + 1)] = ys[j - 1]
        values[act_label(j, t)] = u[j - 1]
    try:
        info2 = Realization(tuple(
            (lbl, values[lbl]) for lbl in sufficient_info_labels(d, k, t + 1)))
        z = Realization(tuple(
            (lbl, values[lbl]) for lbl in new_info_labels(d, k, t + 1)))
    except KeyError as e:  # would contradict the sufficiency of the state
        raise WomctlError(f"label {e.args[0]} is not derivable from the "
                          f"sufficient state at t={t}") from None
    return SufficientState(owner=k, time=t + 1, x=x2, info=info2), z


def state_step(s: Scenario, d: DelayMatrix, st: SufficientState, w: str,
               v_next: tuple[str, ...], theta: CompletePrescription
               ) -> tuple[SufficientState, Realization]:
    """Deterministic one-step evolution of the sufficient state.

    Derives all K actions from the complete prescription, advances the plant
    state with w, forms the next observations with each agent's v, and
    re-partitions the accumulated variables into the next private components
    and the newly shared realization.
    """
    t = st.time
    u = _actions_from(st, theta, d, s)
    x2 = s.f(t, st.x, u, w)
    ys = tuple(s.h(j, t + 1, x2, v_next[j - 1]) for j in s.agents())
    return _advance_labels(s, d, st, u, x2, ys)


def stage_cost_hat(s: Scenario, st: SufficientState,
                   theta: CompletePrescription, d: DelayMatrix) -> float:
    """Stage cost reconstructed from the sufficient state and prescription."""
    u = _actions_from(st, theta, d, s)
    return s.c(st.time, st.x, u)


def expected_cost(s: Scenario, pi: BeliefState, theta: CompletePrescription,
                  d: DelayMatrix) -> float:
    """Expected stage cost under a belief, as a function of (belief, input)."""
    return sum(p * stage_cost_hat(s, st, theta, d) for st, p in pi.support())


def belief_successors(s: Scenario, d: DelayMatrix, pi: BeliefState,
                      theta: CompletePrescription
                      ) -> list[tuple[Realization, float, BeliefState]]:
    """Push a belief through one step and group by new-information outcome.

    Returns (z, prob of z, posterior belief) triples with positive
    probability, in canonical z order. Depends on the prescription only, not
    on any strategy that may have produced it.
    """
    k, t = pi.owner, pi.time
    w_sup = s.w_dists[t].support()
    v_axes = [s.v_dists[(j, t + 1)].support() for j in s.agents()]
    buckets: dict[Realization, dict[SufficientState, float]] = {}
    for st, p in pi.support():
        u = _actions_from(st, theta, d, s)
        for w, pw in w_sup:
            x2 = s.f(t, st.x, u, w)
            # sensor-noise values inducing the same observation merge
            y_axes = []
            for j in s.agents():
                acc: dict[str, float] = {}
                for v, pv in v_axes[j - 1]:
                    y = s.h(j, t + 1, x2, v)
                    acc[y] = acc.get(y, 0.0) + pv
                y_axes.append(sorted(acc.items()))
            for ycombo in itertools.product(*y_axes):
                q = p * pw
                for _, py in ycombo:
                    q *= py
                st2, z = _advance_labels(
                    s, d, st, u, x2, tuple(y for y, _ in ycombo))
                bucket = buckets.setdefault(z, {})
                bucket[st2] = bucket.get(st2, 0.0) + q
    out = []
    for z in sorted(buckets, key=lambda r: r.items):
        table = buckets[z]
        pz = sum(table.values())
        if pz <= 0.0:
            continue
        out.append((z, pz, BeliefState(
            owner=k, time=t + 1,
            probs={st: q / pz for st, q in table.items() if q > 0.0})))
    return out


def belief_update(s: Scenario, d: DelayMatrix, pi: BeliefState,
                  theta: CompletePrescription, z: Realization) -> BeliefState:
    """One exact filter step: predict through the prescription, then condition
    on the observed new information and renormalize."""
    want = new_info_labels(d, pi.owner, pi.time + 1)
    if z.domain != want:
        have = set(z.domain.labels)
        raise DomainMismatch(missing=sorted(set(want.labels) - have),
                             extra=sorted(have - set(want.labels)))
    for z2, pz, nxt in belief_successors(s, d, pi, theta):
        if z2 == z:
            return nxt
    raise ZeroProbabilityObservation(
        f"new information {z} has probability 0 under the given belief and "
        f"prescription at t={pi.time}")


def belief_from_scratch(s: Scenario, d: DelayMatrix, k: int, a: Realization,
                        thetas: tuple[CompletePrescription, ...],
                        cap: int = DEFAULT_ENUM_CAP) -> BeliefState:
    """Exact conditional of the sufficient state given shared information.

    Enumerates every primitive assignment, replays the prescription sequence
    to obtain all actions, keeps the assignments whose accessible realization
    matches ``a``, and normalizes over the induced sufficient states.
    """
    t = len(thetas)
    want = accessible_labels(d, k, t)
    if a.domain != want:
        have = set(a.domain.labels)
        raise DomainMismatch(missing=sorted(set(want.labels) - have),
                             extra=sorted(have - set(want.labels)))
    acc: dict[SufficientState, float] = {}
    info_t = sufficient_info_labels(d, k, t)
    for prim in enumerate_primitives(s, cap):
        values: dict = {}
        x = prim.x0
        for tau in range(t + 1):
            for j in s.agents():
                values[obs_label(j, tau)] = s.h(j, tau, x, prim.v[j - 1][tau])
            if tau == t:
                break
            theta = thetas[tau]
            u = []
            for j in s.agents():
                gamma = theta.parts[j - 1]
                l = Realization(tuple((lbl, values[lbl]) for lbl in gamma.domain))
                u.append(act(gamma, l))
            u = tuple(u)
            for j in s.agents():
                values[act_label(j, tau)] = u[j - 1]
            x = s.f(tau, x, u, prim.w[tau])
        a_here = Realization(tuple((lbl, values[lbl]) for lbl in want))
        if a_here != a:
            continue
        st = SufficientState(
            owner=k, time=t, x=x,
            info=Realization(tuple((lbl, values[lbl]) for lbl in info_t)))
        acc[st] = acc.get(st, 0.0) + prim.prob
    total = sum(acc.values())
    if total <= 0.0:
        raise ZeroProbabilityCondition(
            f"accessible realization {a} with the given prescriptions has "
            f"probability 0")
    return BeliefState(owner=k, time=t,
                       probs={st: p / total for st, p in acc.items()})
