"""Invariant verification suites behind ``womctl verify``.

Every structural claim the package relies on is checked here against an
independent route: delay matrices against exhaustive path enumeration,
memories against a time-stepped flood of transmissions, filters against
direct conditioning, solver values against each other. Checks are pure
functions of a seeded input bundle, so reports reproduce byte-for-byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .belief import (
    BELIEF_TOL,
    BeliefState,
    SufficientState,
    belief_from_scratch,
    belief_linf,
    belief_update,
    stage_cost_hat,
    state_step,
    sufficient_info_labels,
)
from .errors import EnumerationCapExceeded
from .infostruct import (
    DEFAULT_ENUM_CAP,
    InfoSet,
    Realization,
    accessible_labels,
    act as act_label,
    inaccessible_labels,
    memory_labels,
    new_info_labels,
    obs as obs_label,
)
from .prescription import (
    CompletePrescription,
    PrescriptionFunction,
    act,
    complete_prescription_at,
    policy_to_strategy,
    positional_transfer,
    prescription_domain,
    strategy_to_policy,
)
from .randgen import (
    random_scenario,
    random_strategy,
    random_topology,
    random_total_policy,
    sub_rng,
)
from .scenario import Scenario, enumerate_primitives, propagate, simulate
from .scenario_io import load_scenario
from .solver import (
    DEFAULT_POLICY_CAP,
    brute_force_optimal,
    common_info_dp,
    domain_comparison,
    evaluate_policy,
    evaluate_strategy,
    structural_search,
)
from .topology import DelayMatrix, Topology, information_path, min_delay_matrix

EQ_TOL = 1e-12


# -- independent oracles --------------------------------------------------------

def min_delay_by_paths(t: Topology) -> dict[tuple[int, int], int]:
    """All-pairs minimum delay by exhaustive simple-path enumeration."""
    out = {}
    adj: dict[int, list] = {a: [] for a in t.agents()}
    for l in t.links:
        adj[l.src].append((l.dst, l.delay))
    for a in t.agents():
        for b in t.agents():
            if a == b:
                out[(a, b)] = 0
                continue
            best = [None]

            def walk(node, seen, total):
                if node == b:
                    if best[0] is None or total < best[0]:
                        best[0] = total
                    return
                for nxt, w in adj[node]:
                    if nxt not in seen:
                        walk(nxt, seen | {nxt}, total + w)

            walk(a, {a}, 0)
            out[(a, b)] = best[0]
    return out


def replay_memory(t: Topology, k: int, time: int) -> InfoSet:
    """Agent k's memory reconstructed by simulating the transmissions.

    Every agent emits its current observation and previous action at each
    step; receivers relay everything new over their outgoing links. This
    never consults the delay matrix, so it is an independent route to the
    memory contents.
    """
    arrival: dict[tuple[int, int], dict[int, int]] = {}  # packet -> node -> time
    pending: list[tuple[int, tuple[int, int], int]] = []  # (arrive, packet, node)
    out_links = {a: t.out_links(a) for a in t.agents()}

    def deliver(packet, node, when):
        seen = arrival.setdefault(packet, {})
        if node in seen and seen[node] <= when:
            return
        seen[node] = when
        for l in out_links[node]:
            pending.append((when + l.delay, packet, l.dst))

    for now in range(time + 1):
        for j in t.agents():
            deliver((j, now), j, now)
        still = []
        for arrive, packet, node in pending:
            if arrive <= now:
                deliver(packet, node, arrive)
            else:
                still.append((arrive, packet, node))
        pending = still

    labels = []
    for (j, tau), seen in arrival.items():
        if seen.get(k, time + 1) <= time:
            labels.append(obs_label(j, tau))
            if tau > 0:
                labels.append(act_label(j, tau - 1))
    return InfoSet.of(labels)


# -- reachable conditioning histories --------------------------------------------

@dataclass
class HistoryNode:
    """One reachable conditioning class: shared realization + prescriptions.

    Members are (probability, plant state, label values, primitive
    assignment) tuples, one per primitive assignment in the class.
    """

    agent: int
    time: int
    accessible: Realization
    thetas: tuple[CompletePrescription, ...]
    weight: float
    members: list[tuple[float, str, dict, object]]
    theta_options: list[CompletePrescription] = field(default_factory=list)
    children: list[list[tuple[Realization, float, "HistoryNode"]]] = field(
        default_factory=list)


def support_thetas(s: Scenario, d: DelayMatrix, k: int, t: int,
                   members) -> list[CompletePrescription]:
    """Complete prescriptions distinct on the realizations the members hit.

    Entries off the reachable support cannot change the conditioning event;
    they are filled with the first action so tables stay total in effect.
    """
    doms = [prescription_domain(d, k, j, t) for j in s.agents()]
    dreals = []
    for j in s.agents():
        seen = {Realization(tuple((l, values[l]) for l in doms[j - 1]))
                for _p, _x, values, _prim in members}
        dreals.append(sorted(seen, key=lambda r: r.items))
    axes = [itertools.product(s.action_space(j, t).values,
                              repeat=len(dreals[j - 1]))
            for j in s.agents()]
    out = []
    for combo in itertools.product(*axes):
        parts = tuple(PrescriptionFunction(
            owner=k, target=j, time=t, domain=doms[j - 1],
            table=dict(zip(dreals[j - 1], combo[j - 1])),
            default=s.action_space(j, t).values[0]) for j in s.agents())
        out.append(CompletePrescription(owner=k, time=t, parts=parts))
    return out


def history_tree(s: Scenario, d: DelayMatrix, k: int,
                 assign_cap: int = DEFAULT_ENUM_CAP,
                 node_cap: int = DEFAULT_POLICY_CAP
                 ) -> tuple[list[HistoryNode], list[HistoryNode]]:
    """All reachable conditioning histories of agent k, as a tree.

    Nodes at time t are classes of primitive assignments that share the
    accessible realization; edges branch over support-distinct complete
    prescriptions and then split by the new-information outcome.
    """
    T = s.horizon
    roots_acc: dict[Realization, list] = {}
    a0_labels = accessible_labels(d, k, 0)
    for prim in enumerate_primitives(s, assign_cap):
        values = {}
        for j in s.agents():
            values[obs_label(j, 0)] = s.h(j, 0, prim.x0, prim.v[j - 1][0])
        a0 = Realization(tuple((l, values[l]) for l in a0_labels))
        roots_acc.setdefault(a0, []).append((prim.prob, prim.x0, values, prim))

    all_nodes: list[HistoryNode] = []

    def make_node(t, a, thetas, members) -> HistoryNode:
        node = HistoryNode(agent=k, time=t, accessible=a, thetas=thetas,
                           weight=sum(p for p, _x, _v, _pr in members),
                           members=members)
        all_nodes.append(node)
        if len(all_nodes) > node_cap:
            raise EnumerationCapExceeded(
                "conditioning histories", len(all_nodes), node_cap,
                exact=False)
        node.theta_options = support_thetas(s, d, k, t, members)
        if t == T:
            return node
        z_labels = new_info_labels(d, k, t + 1)
        for theta in node.theta_options:
            split: dict[Realization, list] = {}
            for p, x, values, prim in members:
                u = []
                for j in s.agents():
                    gamma = theta.parts[j - 1]
                    l = Realization(tuple((lbl, values[lbl])
                                          for lbl in gamma.domain))
                    u.append(act(gamma, l))
                u = tuple(u)
                x2 = s.f(t, x, u, prim.w[t])
                values2 = dict(values)
                for j in s.agents():
                    values2[act_label(j, t)] = u[j - 1]
                    values2[obs_label(j, t + 1)] = s.h(
                        j, t + 1, x2, prim.v[j - 1][t + 1])
                z = Realization(tuple((lbl, values2[lbl]) for lbl in z_labels))
                split.setdefault(z, []).append((p, x2, values2, prim))
            edges = []
            for z in sorted(split, key=lambda r: r.items):
                sub = split[z]
                child = make_node(t + 1, a.merge(z), thetas + (theta,), sub)
                edges.append((z, sum(p for p, _x, _v, _pr in sub), child))
            node.children.append(edges)
        return node

    roots = []
    for a0 in sorted(roots_acc, key=lambda r: r.items):
        roots.append(make_node(0, a0, (), roots_acc[a0]))
    return roots, all_nodes


def node_state(s: Scenario, d: DelayMatrix, node: HistoryNode,
               member) -> SufficientState:
    """The sufficient-state realization of one member assignment."""
    _p, x, values, _prim = member
    info = sufficient_info_labels(d, node.agent, node.time)
    return SufficientState(owner=node.agent, time=node.time, x=x,
                           info=Realization(tuple((l, values[l]) for l in info)))


def theta_fingerprint(theta: CompletePrescription) -> tuple:
    return tuple(
        tuple(sorted((l.items, u) for l, u in gamma.table.items()))
        for gamma in theta.parts)


# -- the check catalogue ----------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    description: str
    instances: int
    passed: bool
    worst_deviation: float
    counterexample: dict | None = None


@dataclass
class VerifyInputs:
    seed: int
    graph_cases: list[tuple[str, Topology]]
    info_cases: list[tuple[str, Topology, int]]     # (name, topology, horizon)
    scenario_cases: list[tuple[str, Topology, Scenario]]
    solver_cases: list[tuple[str, Topology, Scenario]]
    policy_cap: int = DEFAULT_POLICY_CAP
    assign_cap: int = DEFAULT_ENUM_CAP


def build_inputs(scenario_path: str | None, random_n: int, seed: int,
                 policy_cap: int = DEFAULT_POLICY_CAP,
                 assign_cap: int = DEFAULT_ENUM_CAP) -> VerifyInputs:
    graph_cases, info_cases, scenario_cases, solver_cases = [], [], [], []
    if scenario_path is not None:
        topo, s = load_scenario(scenario_path)
        graph_cases.append(("scenario", topo))
        info_cases.append(("scenario", topo, s.horizon))
        scenario_cases.append(("scenario", topo, s))
        solver_cases.append(("scenario", topo, s))
    for i in range(random_n):
        graph_cases.append(
            (f"graph-{i}", random_topology(sub_rng(seed, 1, i), max_agents=6)))
        rng = sub_rng(seed, 2, i)
        topo = random_topology(rng, max_agents=5)
        info_cases.append((f"info-{i}", topo, int(rng.integers(0, 7))))
    if random_n > 0:
        for i in range(2):
            rng = sub_rng(seed, 3, i)
            topo = random_topology(rng, max_agents=2, min_agents=2)
            s = random_scenario(rng, topo, horizon=1)
            scenario_cases.append((f"scn-{i}", topo, s))
            solver_cases.append((f"scn-{i}", topo, s))
        rng = sub_rng(seed, 3, 2)
        topo = Topology.of(1, [])
        s = random_scenario(rng, topo, horizon=1, noisy_obs=True)
        scenario_cases.append(("scn-single", topo, s))
        solver_cases.append(("scn-single", topo, s))
    return VerifyInputs(seed=seed, graph_cases=graph_cases,
                        info_cases=info_cases, scenario_cases=scenario_cases,
                        solver_cases=solver_cases, policy_cap=policy_cap,
                        assign_cap=assign_cap)


def _ok(name, desc, instances, worst=0.0):
    return CheckResult(name, desc, instances, True, worst)


def _fail(name, desc, instances, worst, witness):
    return CheckResult(name, desc, instances, False, worst, witness)


def check_delay_diagonal_zero(inp: VerifyInputs) -> CheckResult:
    desc = "minimum delay of every agent to itself is zero"
    n = 0
    for name, topo in inp.graph_cases:
        d = min_delay_matrix(topo)
        n += 1
        for a in topo.agents():
            if d.delay(a, a) != 0:
                return _fail("delay_diagonal_zero", desc, n, 1.0,
                             {"case": name, "agent": a})
    return _ok("delay_diagonal_zero", desc, n)


def check_delay_triangle(inp: VerifyInputs) -> CheckResult:
    desc = "minimum delays satisfy the triangle inequality"
    n = 0
    for name, topo in inp.graph_cases:
        d = min_delay_matrix(topo)
        n += 1
        for i, j, k in itertools.product(topo.agents(), repeat=3):
            if d.delay(i, k) > d.delay(i, j) + d.delay(j, k):
                return _fail("delay_triangle_inequality", desc, n, 1.0,
                             {"case": name, "triple": [i, j, k]})
    return _ok("delay_triangle_inequality", desc, n)


def check_delay_vs_path_enumeration(inp: VerifyInputs) -> CheckResult:
    desc = "delay matrix equals exhaustive simple-path enumeration"
    n = 0
    for name, topo in inp.graph_cases:
        d = min_delay_matrix(topo)
        oracle = min_delay_by_paths(topo)
        n += 1
        for (a, b), v in oracle.items():
            if d.delay(a, b) != v:
                return _fail("delay_matrix_matches_path_enumeration", desc, n,
                             abs(d.delay(a, b) - v),
                             {"case": name, "pair": [a, b],
                              "matrix": d.delay(a, b), "oracle": v})
    return _ok("delay_matrix_matches_path_enumeration", desc, n)


def check_information_path_delay(inp: VerifyInputs) -> CheckResult:
    desc = "relay path delay equals the delay-matrix entry for every pair"
    n = 0
    for name, topo in inp.graph_cases:
        d = min_delay_matrix(topo)
        n += 1
        for a in topo.agents():
            for b in topo.agents():
                if a == b:
                    continue
                path = information_path(topo, a, b)
                if path.total_delay != d.delay(a, b):
                    return _fail("information_path_delay_matches_matrix", desc,
                                 n, 1.0, {"case": name, "pair": [a, b],
                                          "path": list(path.nodes)})
    return _ok("information_path_delay_matches_matrix", desc, n)


def check_delay_finite(inp: VerifyInputs) -> CheckResult:
    desc = "strong connectivity yields finite integer delays everywhere"
    n = 0
    for name, topo in inp.graph_cases:
        d = min_delay_matrix(topo)
        n += 1
        for row in d.rows:
            for x in row:
                if not isinstance(x, int) or x < 0:
                    return _fail("delay_matrix_finite", desc, n, 1.0,
                                 {"case": name, "entry": repr(x)})
    return _ok("delay_matrix_finite", desc, n)


def check_trajectory_probability_product(inp: VerifyInputs) -> CheckResult:
    desc = "trajectory probability equals the product of its primitive probabilities"
    n, worst = 0, 0.0
    from .scenario import joint_distribution
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        g = random_total_policy(sub_rng(inp.seed, 10, idx), s, d, inp.assign_cap)
        n += 1
        for traj, p in joint_distribution(s, d, g, inp.assign_cap).items():
            q = s.init_dist.prob(traj.states[0])
            for t in s.times():
                q *= s.w_dists[t].prob(traj.w[t])
                for k in s.agents():
                    q *= s.v_dists[(k, t)].prob(traj.v[k - 1][t])
            worst = max(worst, abs(p - q))
            if worst > EQ_TOL:
                return _fail("trajectory_probability_is_primitive_product",
                             desc, n, worst, {"case": name})
    return _ok("trajectory_probability_is_primitive_product", desc, n, worst)


def check_simulate_matches_enumeration(inp: VerifyInputs) -> CheckResult:
    desc = "sampled trajectories appear in the exact trajectory distribution"
    from .scenario import joint_distribution
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        g = random_total_policy(sub_rng(inp.seed, 11, idx), s, d, inp.assign_cap)
        dist = joint_distribution(s, d, g, inp.assign_cap)
        for seed in range(5):
            n += 1
            traj = simulate(s, topo, g, seed)
            if traj not in dist or dist[traj] <= 0.0:
                return _fail("simulate_matches_enumerated_trajectory", desc, n,
                             1.0, {"case": name, "seed": seed})
    return _ok("simulate_matches_enumerated_trajectory", desc, n)


def check_stage_costs_match(inp: VerifyInputs) -> CheckResult:
    desc = "recorded stage costs equal the cost table on (t, state, actions)"
    from .scenario import joint_distribution
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        g = random_total_policy(sub_rng(inp.seed, 12, idx), s, d, inp.assign_cap)
        n += 1
        for traj in joint_distribution(s, d, g, inp.assign_cap):
            for t in s.times():
                u = tuple(traj.actions[k - 1][t] for k in s.agents())
                if traj.stage_costs[t] != s.c(t, traj.states[t], u):
                    return _fail("trajectory_stage_costs_match_cost_table",
                                 desc, n, 1.0, {"case": name, "t": t})
    return _ok("trajectory_stage_costs_match_cost_table", desc, n)


def _info_case_tuples(inp):
    for name, topo, T in inp.info_cases:
        yield name, min_delay_matrix(topo), topo.agent_count, T


def check_accessible_monotone(inp: VerifyInputs) -> CheckResult:
    desc = "shared information only grows with time"
    n = 0
    for name, d, K, T in _info_case_tuples(inp):
        n += 1
        for k in range(1, K + 1):
            for t in range(1, T + 1):
                if not accessible_labels(d, k, t - 1).issubset(
                        accessible_labels(d, k, t)):
                    return _fail("accessible_info_monotone_in_time", desc, n,
                                 1.0, {"case": name, "agent": k, "t": t})
    return _ok("accessible_info_monotone_in_time", desc, n)


def check_accessible_nesting(inp: VerifyInputs) -> CheckResult:
    desc = "later agents' shared information nests inside earlier agents'"
    n = 0
    for name, d, K, T in _info_case_tuples(inp):
        n += 1
        for k in range(1, K + 1):
            for j in range(k, K + 1):
                for t in range(T + 1):
                    if not accessible_labels(d, j, t).issubset(
                            accessible_labels(d, k, t)):
                        return _fail("accessible_info_nested_across_agents",
                                     desc, n, 1.0,
                                     {"case": name, "pair": [k, j], "t": t})
    return _ok("accessible_info_nested_across_agents", desc, n)


def check_memory_partition(inp: VerifyInputs) -> CheckResult:
    desc = "private plus shared information partitions each memory"
    n = 0
    for name, d, K, T in _info_case_tuples(inp):
        n += 1
        for k in range(1, K + 1):
            for j in range(k, K + 1):
                for t in range(T + 1):
                    mem = memory_labels(d, k, t)
                    acc = accessible_labels(d, j, t)
                    lkj = inaccessible_labels(d, k, j, t)
                    if lkj.union(acc) != mem or len(lkj.intersect(acc)) != 0:
                        return _fail(
                            "memory_partition_by_accessible_and_inaccessible",
                            desc, n, 1.0, {"case": name, "pair": [k, j], "t": t})
    return _ok("memory_partition_by_accessible_and_inaccessible", desc, n)


def check_own_private_within_common_private(inp: VerifyInputs) -> CheckResult:
    desc = "own private domain is contained in the last agent's view of it"
    n = 0
    for name, d, K, T in _info_case_tuples(inp):
        n += 1
        for k in range(1, K + 1):
            for t in range(T + 1):
                if not inaccessible_labels(d, k, k, t).issubset(
                        inaccessible_labels(d, k, K, t)):
                    return _fail("own_inaccessible_within_common_inaccessible",
                                 desc, n, 1.0, {"case": name, "agent": k, "t": t})
    return _ok("own_inaccessible_within_common_inaccessible", desc, n)


def check_memory_monotone(inp: VerifyInputs) -> CheckResult:
    desc = "memories only grow with time (perfect recall)"
    n = 0
    for name, d, K, T in _info_case_tuples(inp):
        n += 1
        for k in range(1, K + 1):
            for t in range(1, T + 1):
                if not memory_labels(d, k, t - 1).issubset(
                        memory_labels(d, k, t)):
                    return _fail("memory_monotone_in_time", desc, n, 1.0,
                                 {"case": name, "agent": k, "t": t})
    return _ok("memory_monotone_in_time", desc, n)


def check_memory_vs_replay(inp: VerifyInputs) -> CheckResult:
    desc = "memory formula agrees with a time-stepped transmission flood"
    n = 0
    for name, topo, T in inp.info_cases:
        d = min_delay_matrix(topo)
        n += 1
        for k in topo.agents():
            for t in range(T + 1):
                if memory_labels(d, k, t) != replay_memory(topo, k, t):
                    return _fail("memory_matches_transmission_replay", desc, n,
                                 1.0, {"case": name, "agent": k, "t": t})
    return _ok("memory_matches_transmission_replay", desc, n)


def _induced_action_tables(s, d, g, cap):
    """Action profiles per primitive assignment under a policy."""
    out = []
    for prim in enumerate_primitives(s, cap):
        traj = propagate(s, d, prim, g.action)
        out.append(traj.actions)
    return out


def check_prescription_consistency(inp: VerifyInputs) -> CheckResult:
    desc = "re-seated strategies generate identical action profiles everywhere"
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        for k in s.agents():
            psi = random_strategy(sub_rng(inp.seed, 13, idx, k), s, d, k,
                                  inp.assign_cap)
            base = _induced_action_tables(
                s, d, strategy_to_policy(s, d, psi, inp.assign_cap),
                inp.assign_cap)
            for j in s.agents():
                n += 1
                moved = positional_transfer(psi, j, s, d, inp.assign_cap)
                got = _induced_action_tables(
                    s, d, strategy_to_policy(s, d, moved, inp.assign_cap),
                    inp.assign_cap)
                if got != base:
                    return _fail(
                        "prescription_action_consistency_across_owners", desc,
                        n, 1.0, {"case": name, "owner": k, "target": j})
    return _ok("prescription_action_consistency_across_owners", desc, n)


def check_round_trip(inp: VerifyInputs) -> CheckResult:
    desc = "splitting a policy into prescriptions and back reproduces it"
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        for rep in range(3):
            g = random_total_policy(sub_rng(inp.seed, 14, idx, rep), s, d,
                                    inp.assign_cap)
            for k in s.agents():
                n += 1
                g2 = strategy_to_policy(
                    s, d, policy_to_strategy(s, d, g, k, inp.assign_cap),
                    inp.assign_cap)
                if g2.tables != g.tables:
                    return _fail("policy_strategy_round_trip_identity", desc, n,
                                 1.0, {"case": name, "owner": k, "rep": rep})
    return _ok("policy_strategy_round_trip_identity", desc, n)


def check_prescription_domains(inp: VerifyInputs) -> CheckResult:
    desc = "every generated prescription has exactly the declared domain"
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        for k in s.agents():
            psi = random_strategy(sub_rng(inp.seed, 15, idx, k), s, d, k,
                                  inp.assign_cap)
            n += 1
            for (j, t), rows in psi.parts.items():
                want = prescription_domain(d, k, j, t)
                for gamma in rows.values():
                    if gamma.domain != want:
                        return _fail("prescription_domains_match_partition_rule",
                                     desc, n, 1.0,
                                     {"case": name, "owner": k, "target": j,
                                      "t": t})
    return _ok("prescription_domains_match_partition_rule", desc, n)


def check_transfer_composition(inp: VerifyInputs) -> CheckResult:
    desc = "re-seating via an intermediate agent equals re-seating directly"
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        k = s.agent_count  # owner
        psi = random_strategy(sub_rng(inp.seed, 16, idx), s, d, k,
                              inp.assign_cap)
        for j in s.agents():
            via = positional_transfer(psi, j, s, d, inp.assign_cap)
            for i in s.agents():
                n += 1
                through = positional_transfer(via, i, s, d, inp.assign_cap)
                direct = positional_transfer(psi, i, s, d, inp.assign_cap)
                a = _induced_action_tables(
                    s, d, strategy_to_policy(s, d, through, inp.assign_cap),
                    inp.assign_cap)
                b = _induced_action_tables(
                    s, d, strategy_to_policy(s, d, direct, inp.assign_cap),
                    inp.assign_cap)
                if a != b:
                    return _fail("positional_transfer_composition", desc, n,
                                 1.0, {"case": name, "via": j, "to": i})
    return _ok("positional_transfer_composition", desc, n)


def _chained_beliefs(s, d, roots):
    """Walk a history tree computing filtered beliefs along every edge."""
    out = []  # (node, chained belief)

    def walk(node, pi):
        out.append((node, pi))
        for ti, edges in enumerate(node.children):
            theta = node.theta_options[ti]
            for z, _w, child in edges:
                walk(child, belief_update(s, d, pi, theta, z))

    for root in roots:
        walk(root, belief_from_scratch(s, d, root.agent, root.accessible, ()))
    return out


def check_filter_chain_vs_scratch(inp: VerifyInputs) -> CheckResult:
    desc = "chained filter updates equal direct conditioning at every history"
    n, worst = 0, 0.0
    for name, topo, s in inp.scenario_cases:
        d = min_delay_matrix(topo)
        for k in s.agents():
            roots, _nodes = history_tree(s, d, k, inp.assign_cap,
                                         inp.policy_cap)
            for node, pi in _chained_beliefs(s, d, roots):
                n += 1
                scratch = belief_from_scratch(s, d, k, node.accessible,
                                              node.thetas, inp.assign_cap)
                worst = max(worst, belief_linf(pi, scratch))
                if worst > BELIEF_TOL:
                    return _fail("filter_chain_matches_direct_conditioning",
                                 desc, n, worst,
                                 {"case": name, "agent": k, "t": node.time})
    return _ok("filter_chain_matches_direct_conditioning", desc, n, worst)


def check_filter_policy_independence(inp: VerifyInputs) -> CheckResult:
    desc = "filter output depends only on (belief, prescription, new info)"
    n, worst = 0, 0.0
    for name, topo, s in inp.scenario_cases:
        d = min_delay_matrix(topo)
        for k in s.agents():
            roots, _nodes = history_tree(s, d, k, inp.assign_cap,
                                         inp.policy_cap)
            seen: dict[tuple, BeliefState] = {}
            reps: list[BeliefState] = []
            for node, pi in _chained_beliefs(s, d, roots):
                rid = None
                for i, r in enumerate(reps):
                    if belief_linf(r, pi) <= BELIEF_TOL:
                        rid = i
                        break
                if rid is None:
                    reps.append(pi)
                    rid = len(reps) - 1
                for ti, edges in enumerate(node.children):
                    theta = node.theta_options[ti]
                    tkey = theta_fingerprint(theta)
                    for z, _w, _child in edges:
                        n += 1
                        nxt = belief_update(s, d, pi, theta, z)
                        key = (node.time, rid, tkey, z.items)
                        if key in seen:
                            worst = max(worst, belief_linf(seen[key], nxt))
                            if worst > BELIEF_TOL:
                                return _fail("filter_output_strategy_independent",
                                             desc, n, worst,
                                             {"case": name, "agent": k,
                                              "t": node.time})
                        else:
                            seen[key] = nxt
    return _ok("filter_output_strategy_independent", desc, n, worst)


def check_markov_property(inp: VerifyInputs) -> CheckResult:
    desc = "histories with equal (belief, prescription) induce equal successor laws"
    n, worst = 0, 0.0
    for name, topo, s in inp.scenario_cases:
        d = min_delay_matrix(topo)
        for k in s.agents():
            roots, _nodes = history_tree(s, d, k, inp.assign_cap,
                                         inp.policy_cap)
            pairs = _chained_beliefs(s, d, roots)
            reps: list[BeliefState] = []

            def rep_of(b):
                for i, r in enumerate(reps):
                    if belief_linf(r, b) <= BELIEF_TOL:
                        return i
                reps.append(b)
                return len(reps) - 1

            groups: dict[tuple, list] = {}
            for node, pi in pairs:
                if node.time >= s.horizon:
                    continue
                rid = rep_of(pi)
                for ti, edges in enumerate(node.children):
                    theta = node.theta_options[ti]
                    # successor law from the history itself: conditional
                    # probability of each outcome times the successor class
                    law = {}
                    for z, w, child in edges:
                        nxt = belief_update(s, d, pi, theta, z)
                        law[rep_of(nxt)] = law.get(rep_of(nxt), 0.0) + \
                            w / node.weight
                    groups.setdefault(
                        (node.time, rid, theta_fingerprint(theta)), []
                    ).append(law)
            for key, laws in groups.items():
                n += 1
                base = laws[0]
                for law in laws[1:]:
                    for rid in set(base) | set(law):
                        worst = max(worst, abs(base.get(rid, 0.0) -
                                               law.get(rid, 0.0)))
                if worst > BELIEF_TOL:
                    return _fail("belief_evolution_markov", desc, n, worst,
                                 {"case": name, "agent": k, "t": key[0]})
    return _ok("belief_evolution_markov", desc, n, worst)


def check_belief_normalization(inp: VerifyInputs) -> CheckResult:
    desc = "every computed belief sums to one"
    n, worst = 0, 0.0
    for name, topo, s in inp.scenario_cases:
        d = min_delay_matrix(topo)
        for k in s.agents():
            roots, _nodes = history_tree(s, d, k, inp.assign_cap,
                                         inp.policy_cap)
            for node, pi in _chained_beliefs(s, d, roots):
                n += 1
                worst = max(worst, abs(pi.total() - 1.0))
                scratch = belief_from_scratch(s, d, k, node.accessible,
                                              node.thetas, inp.assign_cap)
                worst = max(worst, abs(scratch.total() - 1.0))
                if worst > BELIEF_TOL:
                    return _fail("belief_normalization", desc, n, worst,
                                 {"case": name, "agent": k, "t": node.time})
    return _ok("belief_normalization", desc, n, worst)


def check_sufficient_state_determinism(inp: VerifyInputs) -> CheckResult:
    desc = "sufficient state, noises and prescription determine the next step"
    n = 0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        for k in s.agents():
            for rep in range(2):
                psi = random_strategy(sub_rng(inp.seed, 17, idx, k, rep), s, d,
                                      k, inp.assign_cap)
                g = strategy_to_policy(s, d, psi, inp.assign_cap)
                for prim in enumerate_primitives(s, inp.assign_cap):
                    traj = propagate(s, d, prim, g.action)
                    values = {}
                    for t in s.times():
                        for j in s.agents():
                            values[obs_label(j, t)] = traj.observations[j - 1][t]
                            values[act_label(j, t)] = traj.actions[j - 1][t]
                    for t in s.times():
                        n += 1
                        info = sufficient_info_labels(d, k, t)
                        st = SufficientState(
                            owner=k, time=t, x=traj.states[t],
                            info=Realization(tuple((l, values[l]) for l in info)))
                        a_t = Realization(tuple(
                            (l, values[l]) for l in accessible_labels(d, k, t)))
                        theta = complete_prescription_at(s, d, psi, t, a_t)
                        u = tuple(traj.actions[j - 1][t] for j in s.agents())
                        if stage_cost_hat(s, st, theta, d) != traj.stage_costs[t]:
                            return _fail("sufficient_state_step_deterministic",
                                         desc, n, 1.0,
                                         {"case": name, "agent": k, "t": t,
                                          "what": "stage cost"})
                        if t == s.horizon:
                            continue
                        vn = tuple(prim.v[j - 1][t + 1] for j in s.agents())
                        st2, z2 = state_step(s, d, st, prim.w[t], vn, theta)
                        info2 = sufficient_info_labels(d, k, t + 1)
                        want_st2 = SufficientState(
                            owner=k, time=t + 1, x=traj.states[t + 1],
                            info=Realization(tuple((l, values[l])
                                                   for l in info2)))
                        want_z = Realization(tuple(
                            (l, values[l])
                            for l in new_info_labels(d, k, t + 1)))
                        if st2 != want_st2 or z2 != want_z:
                            return _fail("sufficient_state_step_deterministic",
                                         desc, n, 1.0,
                                         {"case": name, "agent": k, "t": t,
                                          "what": "state step"})
    return _ok("sufficient_state_step_deterministic", desc, n)


def check_cost_equivalence(inp: VerifyInputs) -> CheckResult:
    desc = "policy route and prescription route give the same expected cost"
    n, worst = 0, 0.0
    for idx, (name, topo, s) in enumerate(inp.scenario_cases):
        d = min_delay_matrix(topo)
        for rep in range(5):
            g = random_total_policy(sub_rng(inp.seed, 18, idx, rep), s, d,
                                    inp.assign_cap)
            base = evaluate_policy(s, d, g, inp.assign_cap)
            for k in s.agents():
                n += 1
                psi = policy_to_strategy(s, d, g, k, inp.assign_cap)
                got = evaluate_strategy(s, d, psi, inp.assign_cap)
                worst = max(worst, abs(got - base))
                if worst > EQ_TOL:
                    return _fail("strategy_policy_cost_equivalence", desc, n,
                                 worst, {"case": name, "owner": k, "rep": rep})
    return _ok("strategy_policy_cost_equivalence", desc, n, worst)


def check_dp_vs_brute(inp: VerifyInputs) -> CheckResult:
    desc = "belief-space backward induction attains the exhaustive optimum"
    n, worst = 0, 0.0
    for name, topo, s in inp.solver_cases:
        d = min_delay_matrix(topo)
        try:
            br = brute_force_optimal(s, d, inp.policy_cap, inp.assign_cap)
            dp = common_info_dp(s, d, inp.policy_cap, inp.assign_cap)
        except EnumerationCapExceeded:
            continue
        n += 1
        worst = max(worst, abs(br.value - dp.value))
        if worst > BELIEF_TOL:
            return _fail("dp_matches_brute_force", desc, n, worst,
                         {"case": name, "brute": br.value, "dp": dp.value})
    return _ok("dp_matches_brute_force", desc, n, worst)


def check_dp_greedy_consistency(inp: VerifyInputs) -> CheckResult:
    desc = "evaluating the greedy strategy reproduces the backward value"
    n, worst = 0, 0.0
    for name, topo, s in inp.solver_cases:
        d = min_delay_matrix(topo)
        try:
            dp = common_info_dp(s, d, inp.policy_cap, inp.assign_cap)
        except EnumerationCapExceeded:
            continue
        n += 1
        got = evaluate_strategy(s, d, dp.argmin, inp.assign_cap)
        worst = max(worst, abs(got - dp.value))
        if worst > BELIEF_TOL:
            return _fail("dp_greedy_strategy_reproduces_value", desc, n, worst,
                         {"case": name, "value": dp.value, "evaluated": got})
    return _ok("dp_greedy_strategy_reproduces_value", desc, n, worst)


def check_structural_vs_brute(inp: VerifyInputs) -> CheckResult:
    desc = "structural-form search attains the exhaustive optimum for every agent"
    n, worst = 0, 0.0
    for name, topo, s in inp.solver_cases:
        d = min_delay_matrix(topo)
        try:
            br = brute_force_optimal(s, d, inp.policy_cap, inp.assign_cap)
        except EnumerationCapExceeded:
            continue
        for k in s.agents():
            try:
                st = structural_search(s, d, k, inp.policy_cap, inp.assign_cap)
            except EnumerationCapExceeded:
                continue
            n += 1
            worst = max(worst, abs(st.value - br.value))
            if worst > BELIEF_TOL:
                return _fail("structural_form_matches_brute_force", desc, n,
                             worst, {"case": name, "agent": k,
                                     "brute": br.value, "structural": st.value})
    return _ok("structural_form_matches_brute_force", desc, n, worst)


def check_monotone_information(inp: VerifyInputs) -> CheckResult:
    desc = "uniformly shorter delays never increase the optimal cost"
    n, worst = 0, 0.0
    for i in range(3):
        rng = sub_rng(inp.seed, 19, i)
        K = 2
        delay = int(rng.integers(2, 4))
        slow = Topology.of(K, [(1, 2, delay), (2, 1, delay)])
        fast = Topology.of(K, [(1, 2, delay - 1), (2, 1, delay - 1)])
        s = random_scenario(rng, slow, horizon=1)
        try:
            j_slow = brute_force_optimal(s, min_delay_matrix(slow),
                                         inp.policy_cap, inp.assign_cap).value
            j_fast = brute_force_optimal(s, min_delay_matrix(fast),
                                         inp.policy_cap, inp.assign_cap).value
        except EnumerationCapExceeded:
            continue
        n += 1
        worst = max(worst, j_fast - j_slow)
        if j_fast > j_slow + EQ_TOL:
            return _fail("delay_reduction_never_increases_optimal_cost", desc,
                         n, j_fast - j_slow,
                         {"pair": i, "slow": j_slow, "fast": j_fast})
    return _ok("delay_reduction_never_increases_optimal_cost", desc, n, worst)


def check_domain_subset_report(inp: VerifyInputs) -> CheckResult:
    desc = "domain report certifies the private-domain subset relation"
    n = 0
    for name, topo, s in inp.scenario_cases:
        d = min_delay_matrix(topo)
        n += 1
        report = domain_comparison(s, d)
        for row in report.rows:
            if not row.subset or row.own_labels > row.common_labels or \
                    row.own_realizations > row.common_realizations:
                return _fail("domain_report_subset_relation", desc, n, 1.0,
                             {"case": name, "agent": row.agent, "t": row.time})
    return _ok("domain_report_subset_relation", desc, n)


CHECKS = [
    check_delay_diagonal_zero,
    check_delay_triangle,
    check_delay_vs_path_enumeration,
    check_information_path_delay,
    check_delay_finite,
    check_trajectory_probability_product,
    check_simulate_matches_enumeration,
    check_stage_costs_match,
    check_accessible_monotone,
    check_accessible_nesting,
    check_memory_partition,
    check_own_private_within_common_private,
    check_memory_monotone,
    check_memory_vs_replay,
    check_prescription_consistency,
    check_round_trip,
    check_prescription_domains,
    check_transfer_composition,
    check_filter_chain_vs_scratch,
    check_filter_policy_independence,
    check_markov_property,
    check_belief_normalization,
    check_sufficient_state_determinism,
    check_cost_equivalence,
    check_dp_vs_brute,
    check_dp_greedy_consistency,
    check_structural_vs_brute,
    check_monotone_information,
    check_domain_subset_report,
]


def _run_one(args):
    fn, inputs = args
    return fn(inputs)


def run_verify(scenario_path: str | None, random_n: int, seed: int,
               policy_cap: int = DEFAULT_POLICY_CAP,
               assign_cap: int = DEFAULT_ENUM_CAP, jobs: int = 1) -> dict:
    """Run every registered check; the report is a JSON-ready dict."""
    inputs = build_inputs(scenario_path, random_n, seed, policy_cap, assign_cap)
    tasks = [(fn, inputs) for fn in CHECKS]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [fn(inputs) for fn, _ in tasks]
    return {
        "seed": seed,
        "random_instances": random_n,
        "scenario": scenario_path,
        "passed": all(r.passed for r in results),
        "checks": [
            {
                "name": r.name,
                "property": r.description,
                "instances": r.instances,
                "passed": r.passed,
                "worst_deviation": r.worst_deviation,
                "counterexample": r.counterexample,
                "seed": seed,
            }
            for r in results
        ],
    }
