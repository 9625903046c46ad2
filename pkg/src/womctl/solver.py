"""Exact solvers and cross-checks for the decentralized control problem.

Three routes to the optimal value are implemented and compared:

* exhaustive search over deterministic memory-feedback policies, enumerated
  stage by stage over reachable memory realizations;
* backward induction over reachable beliefs of the last agent, whose shared
  information plays the role of common information;
* exhaustive search over prescription strategies of a chosen agent that are
  measurable with respect to tuples of information states, the structural
  form whose optimality the suite verifies rather than assumes.

All enumeration orders are canonical so ties break identically across runs.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

from .belief import (
    BELIEF_TOL,
    BeliefState,
    SufficientState,
    belief_linf,
    belief_successors,
    expected_cost,
    sufficient_info_labels,
)
from .errors import EnumerationCapExceeded
from .infostruct import (
    DEFAULT_ENUM_CAP,
    InfoSet,
    Kind,
    Realization,
    VarLabel,
    accessible_labels,
    count_realizations,
    enumerate_realizations,
    inaccessible_labels,
    memory_labels,
)
from .prescription import (
    CompletePrescription,
    FullStrategy,
    PrescriptionFunction,
    prescription_domain,
    strategy_to_policy,
)
from .scenario import Policy, Scenario, enumerate_primitives, propagate
from .topology import DelayMatrix

DEFAULT_POLICY_CAP = 1_000_000


@dataclass
class SolveResult:
    method: str                      # "brute" | "common-info" | "structural"
    agent: int | None
    value: float
    argmin: Policy | FullStrategy
    candidates: int
    seconds: float


@dataclass(frozen=True)
class DomainRow:
    agent: int
    time: int
    own_labels: int
    common_labels: int
    own_realizations: int
    common_realizations: int
    subset: bool


@dataclass
class DomainReport:
    rows: list[DomainRow] = field(default_factory=list)

    @property
    def all_subset(self) -> bool:
        return all(r.subset for r in self.rows)


def evaluate_policy(s: Scenario, d: DelayMatrix, g: Policy,
                    cap: int = DEFAULT_ENUM_CAP) -> float:
    """Exact expected total cost of a policy via full primitive enumeration."""
    total = 0.0
    for prim in enumerate_primitives(s, cap):
        total += prim.prob * propagate(s, d, prim, g.action).total_cost
    return total


def evaluate_strategy(s: Scenario, d: DelayMatrix, psi: FullStrategy,
                      cap: int = DEFAULT_ENUM_CAP) -> float:
    """Exact expected total cost of a prescription strategy."""
    return evaluate_policy(s, d, strategy_to_policy(s, d, psi, cap), cap)


# -- shared stage-by-stage enumeration machinery -------------------------------

RawLabel = tuple[int, int, int]  # (agent, time, kind value)


def _raw(labels: InfoSet) -> tuple[RawLabel, ...]:
    return tuple((l.agent, l.time, int(l.kind)) for l in labels)


def _value_of(ys, us, lbl: RawLabel) -> str:
    a, t, kind = lbl
    return ys[a - 1][t] if kind == int(Kind.OBS) else us[a - 1][t]


class _Engine:
    """Precomputed tables and particle propagation for the DFS solvers.

    A particle is (prob, x, ys, us, memkeys, cost): one class of primitive
    assignments that agree on everything decision-relevant so far. Particles
    with identical histories are merged, which keeps their number at the
    count of distinguishable trajectory prefixes.
    """

    def __init__(self, s: Scenario, d: DelayMatrix):
        self.s, self.d = s, d
        K, T = s.agent_count, s.horizon
        self.K, self.T = K, T
        self.actions = [[s.action_space(k, t).values for k in s.agents()]
                        for t in range(T + 1)]
        self.trans = [{(x, u, w): x2 for (t2, x, u, w), x2 in s.transition.items()
                       if t2 == t} for t in range(T + 1)]
        self.cost = [{(x, u): c for (t2, x, u), c in s.cost.items() if t2 == t}
                     for t in range(T + 1)]
        self.obsf = [{(k, x, v): y for (k, t2, x, v), y in s.observation.items()
                      if t2 == t} for t in range(T + 1)]
        self.wsup = [s.w_dists[t].support() for t in range(T + 1)]
        self.vprof = []
        for t in range(T + 1):
            axes = [s.v_dists[(k, t)].support() for k in s.agents()]
            prof = []
            for vs in itertools.product(*axes):
                p = 1.0
                for _, pv in vs:
                    p *= pv
                prof.append((tuple(v for v, _ in vs), p))
            self.vprof.append(prof)
        # new memory labels per (agent, t); memkeys grow by these slices
        self.newlab: dict[int, list[tuple[RawLabel, ...]]] = {}
        self.memlab: dict[int, list[tuple[RawLabel, ...]]] = {}
        for k in s.agents():
            news, alls = [], []
            prev = None
            for t in range(T + 1):
                cur = memory_labels(d, k, t)
                fresh = cur if prev is None else cur.difference(prev)
                news.append(_raw(fresh))
                alls.append((alls[-1] if alls else ()) + _raw(fresh))
                prev = cur
            self.newlab[k] = news
            self.memlab[k] = alls

    def initial_particles(self):
        empty = tuple(() for _ in range(self.K))
        return [(p, x0, empty, empty, empty, 0.0)
                for x0, p in self.s.init_dist.support()]

    def observe(self, t: int, particles):
        """Branch over sensor noises, extend observations and memory keys."""
        merged: dict = {}
        for (p, x, ys, us, mks, c) in particles:
            for vprofile, pv in self.vprof[t]:
                ys2 = tuple(ys[j] + (self.obsf[t][(j + 1, x, vprofile[j])],)
                            for j in range(self.K))
                key = (x, ys2, us, c)
                entry = merged.get(key)
                if entry is None:
                    mks2 = tuple(
                        mks[j] + tuple(_value_of(ys2, us, lbl)
                                       for lbl in self.newlab[j + 1][t])
                        for j in range(self.K))
                    merged[key] = [p * pv, x, ys2, us, mks2, c]
                else:
                    entry[0] += p * pv
        return [tuple(e) for _, e in sorted(merged.items())]

    def advance(self, t: int, particles, u_list):
        """Apply actions, add stage costs, branch over the system noise."""
        if t == self.T:  # the post-horizon state never affects the cost
            out = []
            for (p, x, ys, us, mks, c), u in zip(particles, u_list):
                us2 = tuple(us[j] + (u[j],) for j in range(self.K))
                out.append((p, x, ys, us2, mks, c + self.cost[t][(x, u)]))
            return out
        merged: dict = {}
        for (p, x, ys, us, mks, c), u in zip(particles, u_list):
            us2 = tuple(us[j] + (u[j],) for j in range(self.K))
            c2 = c + self.cost[t][(x, u)]
            for w, pw in self.wsup[t]:
                x2 = self.trans[t][(x, u, w)]
                key = (x2, ys, us2, c2)
                entry = merged.get(key)
                if entry is None:
                    merged[key] = [p * pw, x2, ys, us2, mks, c2]
                else:
                    entry[0] += p * pw
        return [tuple(e) for _, e in sorted(merged.items())]

    def realization(self, k: int, t: int, memkey: tuple[str, ...]) -> Realization:
        labels = [VarLabel(a, tt, Kind(kk)) for a, tt, kk in self.memlab[k][t]]
        return Realization.of(dict(zip(labels, memkey)))


def brute_force_optimal(s: Scenario, d: DelayMatrix,
                        policy_cap: int = DEFAULT_POLICY_CAP,
                        assign_cap: int = DEFAULT_ENUM_CAP) -> SolveResult:
    """Global minimum over all deterministic memory-feedback policies.

    Policies are enumerated stage by stage: the action table at time t ranges
    over the memory realizations reachable under the choices already made for
    earlier stages. Ties keep the first candidate in canonical order (time,
    then agent, then realization, then action).
    """
    start = time.perf_counter()
    eng = _Engine(s, d)
    K, T = eng.K, eng.T
    best_value = math.inf
    best_snapshot: list | None = None
    stack: list = []
    count = 0

    def rec(t: int, particles):
        nonlocal best_value, best_snapshot, count
        if t > T:
            count += 1
            if count > policy_cap:
                raise EnumerationCapExceeded(
                    "policy candidates", count, policy_cap, exact=False)
            value = sum(p * c for (p, _x, _ys, _us, _mks, c) in particles)
            if value < best_value:
                best_value = value
                best_snapshot = list(stack)
            return
        parts = eng.observe(t, particles)
        reach = [sorted({pt[4][j] for pt in parts}) for j in range(K)]
        pidx = [tuple(reach[j].index(pt[4][j]) for j in range(K)) for pt in parts]
        option_lists = [
            list(itertools.product(eng.actions[t][j], repeat=len(reach[j])))
            for j in range(K)
        ]
        for branch in itertools.product(*option_lists):
            u_list = [tuple(branch[j][ix[j]] for j in range(K)) for ix in pidx]
            stack.append((t, reach, branch))
            rec(t + 1, eng.advance(t, parts, u_list))
            stack.pop()

    rec(0, eng.initial_particles())
    assert best_snapshot is not None
    policy = Policy(agent_count=K, horizon=T)
    for t, reach, branch in best_snapshot:
        for j in range(K):
            for memkey, u in zip(reach[j], branch[j]):
                policy.set_action(j + 1, t, eng.realization(j + 1, t, memkey), u)
    return SolveResult(method="brute", agent=None, value=best_value,
                       argmin=policy, candidates=count,
                       seconds=time.perf_counter() - start)


# -- common-information dynamic programming ------------------------------------

def _belief_reps_intern(reps: list[BeliefState], b: BeliefState) -> int:
    for i, r in enumerate(reps):
        if belief_linf(r, b) <= BELIEF_TOL:
            return i
    reps.append(b)
    return len(reps) - 1


def _support_prescriptions(s: Scenario, d: DelayMatrix, k: int, t: int,
                           pi: BeliefState):
    """Complete prescriptions restricted to the belief's support, in canonical
    order. Off-support entries cannot affect cost or filtering."""
    doms = [prescription_domain(d, k, j, t) for j in s.agents()]
    dreals = []
    for j in s.agents():
        seen = {st.info.restrict(doms[j - 1]) for st, _ in pi.support()}
        dreals.append(sorted(seen, key=lambda r: r.items))
    option_axes = [
        itertools.product(s.action_space(j, t).values,
                          repeat=len(dreals[j - 1]))
        for j in s.agents()
    ]
    for combo in itertools.product(*option_axes):
        parts = tuple(
            PrescriptionFunction(owner=k, target=j, time=t, domain=doms[j - 1],
                                 table=dict(zip(dreals[j - 1], combo[j - 1])))
            for j in s.agents())
        yield CompletePrescription(owner=k, time=t, parts=parts)


def _initial_beliefs(s: Scenario, d: DelayMatrix, k: int, assign_cap: int):
    """Beliefs at t=0 per realization of the agent's initial shared info."""
    a_labels = accessible_labels(d, k, 0)
    info0 = sufficient_info_labels(d, k, 0)
    acc: dict[Realization, dict[SufficientState, float]] = {}
    for prim in enumerate_primitives(s, assign_cap):
        values = {}
        for j in s.agents():
            values[VarLabel(j, 0, Kind.OBS)] = s.h(j, 0, prim.x0, prim.v[j - 1][0])
        a = Realization(tuple((l, values[l]) for l in a_labels))
        st = SufficientState(
            owner=k, time=0, x=prim.x0,
            info=Realization(tuple((l, values[l]) for l in info0)))
        bucket = acc.setdefault(a, {})
        bucket[st] = bucket.get(st, 0.0) + prim.prob
    roots = []
    for a in sorted(acc, key=lambda r: r.items):
        table = acc[a]
        pa = sum(table.values())
        if pa <= 0.0:
            continue
        roots.append((a, pa, BeliefState(
            owner=k, time=0, probs={st: q / pa for st, q in table.items()})))
    return roots


def common_info_dp(s: Scenario, d: DelayMatrix,
                   policy_cap: int = DEFAULT_POLICY_CAP,
                   assign_cap: int = DEFAULT_ENUM_CAP) -> SolveResult:
    """Backward induction over reachable beliefs of the last agent.

    The last agent's shared information is held by everybody, so choosing its
    complete prescription as a function of the belief solves the whole team
    problem. Reachable beliefs are expanded forward (deduplicated within an
    L-infinity tolerance), values are computed backward, and the greedy
    strategy is read off along the reachable paths.
    """
    start = time.perf_counter()
    K, T = s.agent_count, s.horizon
    roots = _initial_beliefs(s, d, K, assign_cap)
    levels: list[list[BeliefState]] = [[]]
    root_nodes = [(a, pa, _belief_reps_intern(levels[0], b)) for a, pa, b in roots]
    candidates = 0
    # options[t][node] = list of (theta, stage_cost, [(pz, child_index)])
    options: list[list[list]] = []
    for t in range(T + 1):
        nxt: list[BeliefState] = []
        per_node: list[list] = []
        for pi in levels[t]:
            rows = []
            for theta in _support_prescriptions(s, d, K, t, pi):
                candidates += 1
                if candidates > policy_cap:
                    raise EnumerationCapExceeded(
                        "prescription candidates", candidates, policy_cap,
                        exact=False)
                c_now = expected_cost(s, pi, theta, d)
                succ = []
                if t < T:
                    for z, pz, b2 in belief_successors(s, d, pi, theta):
                        succ.append((z, pz, _belief_reps_intern(nxt, b2)))
                rows.append((theta, c_now, succ))
            per_node.append(rows)
        options.append(per_node)
        if t < T:
            levels.append(nxt)

    values: list[list[float]] = [[0.0] * len(level) for level in levels]
    greedy: list[list[int]] = [[0] * len(level) for level in levels]
    for t in range(T, -1, -1):
        for n in range(len(levels[t])):
            best, best_i = math.inf, 0
            for i, (_theta, c_now, succ) in enumerate(options[t][n]):
                v = c_now
                if t < T:
                    for _z, pz, child in succ:
                        v += pz * values[t + 1][child]
                if v < best:
                    best, best_i = v, i
            values[t][n] = best
            greedy[t][n] = best_i

    total = sum(pa * values[0][n] for _a, pa, n in root_nodes)

    # read the greedy strategy off the reachable tree, then fill the rest
    parts: dict[tuple[int, int], dict[Realization, PrescriptionFunction]] = {
        (j, t): {} for j in s.agents() for t in s.times()}

    def record(t: int, node: int, a: Realization):
        theta, _c, succ = options[t][node][greedy[t][node]]
        for j in s.agents():
            gamma = theta.parts[j - 1]
            parts[(j, t)][a] = PrescriptionFunction(
                owner=K, target=j, time=t, domain=gamma.domain,
                table=dict(gamma.table),
                default=s.action_space(j, t).values[0])
        if t < T:
            # the shared information of the successor class grows by the
            # new-information realization attached to the branch
            for z, _pz, child in succ:
                record(t + 1, child, a.merge(z))

    for a, _pa, n in root_nodes:
        record(0, n, a)
    for t in s.times():
        a_labels = accessible_labels(d, K, t)
        for j in s.agents():
            dom = prescription_domain(d, K, j, t)
            fallback = PrescriptionFunction(
                owner=K, target=j, time=t, domain=dom, table={},
                default=s.action_space(j, t).values[0])
            for a in enumerate_realizations(s, a_labels, assign_cap):
                parts[(j, t)].setdefault(a, fallback)
    psi = FullStrategy(owner=K, agent_count=K, horizon=T, parts=parts)
    return SolveResult(method="common-info", agent=None, value=total,
                       argmin=psi, candidates=candidates,
                       seconds=time.perf_counter() - start)


# -- structural-form exhaustive search ------------------------------------------

def structural_search(s: Scenario, d: DelayMatrix, k: int,
                      policy_cap: int = DEFAULT_POLICY_CAP,
                      assign_cap: int = DEFAULT_ENUM_CAP) -> SolveResult:
    """Exhaustive search over agent k's strategies of the structural form.

    Candidate strategies may let each prescription depend on its conditioning
    realization only through the tuple of information states of agents from
    the target (or k, for earlier targets) up to the last agent. Realizations
    that share a belief tuple share one prescription entry. The result is
    meant to be compared against the exhaustive policy optimum by the caller;
    a gap is reported, never asserted away.
    """
    start = time.perf_counter()
    eng = _Engine(s, d)
    K, T = eng.K, eng.T
    watchers = list(range(k, K + 1))  # agents whose beliefs can be conditioned on
    acc_raw = {i: [_raw(accessible_labels(d, i, t)) for t in range(T + 1)]
               for i in range(1, K + 1)}
    suff_raw = {i: [_raw(sufficient_info_labels(d, i, t)) for t in range(T + 1)]
                for i in watchers}
    dom_raw = [[None] * (T + 1) for _ in range(K + 1)]
    doms: list[list[InfoSet | None]] = [[None] * (T + 1) for _ in range(K + 1)]
    for j in range(1, K + 1):
        for t in range(T + 1):
            doms[j][t] = prescription_domain(d, k, j, t)
            dom_raw[j][t] = _raw(doms[j][t])
    cond_agent = [None] + [k if j < k else j for j in range(1, K + 1)]
    tuple_agents = [None] + [[i for i in watchers if i >= cond_agent[j]]
                             for j in range(1, K + 1)]

    best_value = math.inf
    best_snapshot: list | None = None
    stack: list = []
    count = 0

    def rec(t: int, particles):
        nonlocal best_value, best_snapshot, count
        if t > T:
            count += 1
            if count > policy_cap:
                raise EnumerationCapExceeded(
                    "structural strategy candidates", count, policy_cap,
                    exact=False)
            value = sum(p * c for (p, _x, _ys, _us, _mks, c) in particles)
            if value < best_value:
                best_value = value
                best_snapshot = list(stack)
            return
        parts = eng.observe(t, particles)
        # accessible keys and information states per watcher agent
        akeys = {i: [tuple(_value_of(pt[2], pt[3], lbl) for lbl in acc_raw[i][t])
                     for pt in parts] for i in watchers}
        belief_id: dict[int, dict[tuple, int]] = {}
        for i in watchers:
            groups: dict[tuple, dict[tuple, float]] = {}
            for pt, ak in zip(parts, akeys[i]):
                skey = (pt[1], tuple(_value_of(pt[2], pt[3], lbl)
                                     for lbl in suff_raw[i][t]))
                bucket = groups.setdefault(ak, {})
                bucket[skey] = bucket.get(skey, 0.0) + pt[0]
            reps: list[dict[tuple, float]] = []
            ids: dict[tuple, int] = {}
            for ak in sorted(groups):
                dist = groups[ak]
                mass = sum(dist.values())
                dist = {key: q / mass for key, q in dist.items()}
                found = None
                for ridx, rdist in enumerate(reps):
                    keys = set(dist) | set(rdist)
                    if all(abs(dist.get(key, 0.0) - rdist.get(key, 0.0))
                           <= BELIEF_TOL for key in keys):
                        found = ridx
                        break
                if found is None:
                    reps.append(dist)
                    found = len(reps) - 1
                ids[ak] = found
            belief_id[i] = ids
        # measurability cells per target: (belief-tuple id, domain realization)
        cells: list[list[tuple]] = [None] * (K + 1)
        pcell: list[list[int]] = [[0] * (K + 1) for _ in parts]
        cond_pairs: list[tuple] = [None] * (K + 1)
        for j in range(1, K + 1):
            c = cond_agent[j]
            gid_of_ak: dict[tuple, tuple] = {}
            for idx, pt in enumerate(parts):
                ak = akeys[c][idx]
                if ak not in gid_of_ak:
                    gid_of_ak[ak] = tuple(belief_id[i][akeys[i][idx]]
                                          for i in tuple_agents[j])
            cell_set = set()
            keys = []
            for idx, pt in enumerate(parts):
                gid = gid_of_ak[akeys[c][idx]]
                domkey = tuple(_value_of(pt[2], pt[3], lbl)
                               for lbl in dom_raw[j][t])
                keys.append((gid, domkey))
                cell_set.add((gid, domkey))
            cells[j] = sorted(cell_set)
            index = {cell: n for n, cell in enumerate(cells[j])}
            for idx, key in enumerate(keys):
                pcell[idx][j] = index[key]
            cond_pairs[j] = tuple(sorted(gid_of_ak.items()))
        option_lists = [
            list(itertools.product(eng.actions[t][j - 1], repeat=len(cells[j])))
            for j in range(1, K + 1)
        ]
        for branch in itertools.product(*option_lists):
            u_list = [tuple(branch[j - 1][pcell[idx][j]] for j in range(1, K + 1))
                      for idx in range(len(parts))]
            stack.append((t, tuple(cells[1:]), tuple(cond_pairs[1:]), branch))
            rec(t + 1, eng.advance(t, parts, u_list))
            stack.pop()

    rec(0, eng.initial_particles())
    assert best_snapshot is not None

    parts_out: dict[tuple[int, int], dict[Realization, PrescriptionFunction]] = {
        (j, t): {} for j in range(1, K + 1) for t in range(T + 1)}
    for t, cells_t, cond_pairs_t, branch in best_snapshot:
        for j in range(1, K + 1):
            c = cond_agent[j]
            labels = [VarLabel(a, tt, Kind(kk)) for a, tt, kk in acc_raw[c][t]]
            dlabels = [VarLabel(a, tt, Kind(kk)) for a, tt, kk in dom_raw[j][t]]
            for ak, gid in cond_pairs_t[j - 1]:
                table = {}
                for (g, domkey), u in zip(cells_t[j - 1], branch[j - 1]):
                    if g == gid:
                        table[Realization.of(dict(zip(dlabels, domkey)))] = u
                cond = Realization.of(dict(zip(labels, ak)))
                parts_out[(j, t)][cond] = PrescriptionFunction(
                    owner=k, target=j, time=t, domain=doms[j][t], table=table,
                    default=s.action_space(j, t).values[0])
    for t in range(T + 1):
        for j in range(1, K + 1):
            c = cond_agent[j]
            fallback = PrescriptionFunction(
                owner=k, target=j, time=t, domain=doms[j][t], table={},
                default=s.action_space(j, t).values[0])
            for a in enumerate_realizations(
                    s, accessible_labels(d, c, t), assign_cap):
                parts_out[(j, t)].setdefault(a, fallback)
    psi = FullStrategy(owner=k, agent_count=K, horizon=T, parts=parts_out)
    return SolveResult(method="structural", agent=k, value=best_value,
                       argmin=psi, candidates=count,
                       seconds=time.perf_counter() - start)


def domain_comparison(s: Scenario, d: DelayMatrix) -> DomainReport:
    """Tabulate each agent's own prescription domain against the domain the
    last agent would need for it, in labels and in realizations."""
    report = DomainReport()
    K = s.agent_count
    for k in s.agents():
        for t in s.times():
            own = inaccessible_labels(d, k, k, t)
            common = inaccessible_labels(d, k, K, t)
            report.rows.append(DomainRow(
                agent=k, time=t,
                own_labels=len(own), common_labels=len(common),
                own_realizations=count_realizations(s, own),
                common_realizations=count_realizations(s, common),
                subset=own.issubset(common)))
    return report
