"""Stable text encodings for labels, realizations, strategies, and reports.

All command-line output flows through here: keys are sorted, floats carry 12
significant digits, and label strings follow ``y<agent>@<time>`` /
``u<agent>@<time>``. Identical inputs therefore serialize byte-identically.
"""

from __future__ import annotations

import json
import re

from .errors import WomctlError
from .infostruct import InfoSet, Kind, Realization, VarLabel
from .prescription import CompletePrescription, FullStrategy, PrescriptionFunction, full_table
from .scenario import Policy, Scenario
from .topology import DelayMatrix
from .belief import BeliefState

_LABEL_RE = re.compile(r"^([yu])(\d+)@(\d+)$")


def label_str(l: VarLabel) -> str:
    return str(l)


def parse_label(text: str) -> VarLabel:
    m = _LABEL_RE.match(text.strip())
    if not m:
        raise WomctlError(f"bad label {text!r}; expected y<agent>@<t> or u<agent>@<t>")
    kind = Kind.OBS if m.group(1) == "y" else Kind.ACT
    return VarLabel(int(m.group(2)), int(m.group(3)), kind)


def label_obj(l: VarLabel) -> dict:
    return {"agent": l.agent, "time": l.time,
            "kind": "obs" if l.kind == Kind.OBS else "act"}


def infoset_json(info: InfoSet) -> list[dict]:
    return [label_obj(l) for l in info]


def realization_str(r: Realization) -> str:
    return str(r)


def parse_realization(text: str) -> Realization:
    text = text.strip()
    if text in ("", "-"):
        return Realization(())
    items = {}
    for piece in text.split(","):
        if "=" not in piece:
            raise WomctlError(f"bad realization component {piece!r}")
        lbl, val = piece.split("=", 1)
        items[parse_label(lbl)] = val
    return Realization.of(items)


def round12(x):
    """Limit floats to 12 significant digits, recursively."""
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: round12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round12(v) for v in x]
    return x


def dump_json(obj) -> str:
    return json.dumps(round12(obj), sort_keys=True, indent=2) + "\n"


def policy_json(g: Policy) -> dict:
    out = {}
    for (k, t), table in sorted(g.tables.items()):
        out[f"agent{k}@t{t}"] = {realization_str(m): u
                                 for m, u in sorted(table.items(),
                                                    key=lambda e: e[0].items)}
    return out


def strategy_json(s: Scenario, psi: FullStrategy) -> dict:
    """Strategy as nested maps: target/time -> conditioning -> domain -> action."""
    parts = {}
    for (j, t), rows in sorted(psi.parts.items()):
        entry = {}
        for cond, gamma in sorted(rows.items(), key=lambda e: e[0].items):
            entry[realization_str(cond)] = {
                realization_str(l): u
                for l, u in sorted(full_table(s, gamma).items(),
                                   key=lambda e: e[0].items)}
        parts[f"target{j}@t{t}"] = entry
    return {"owner": psi.owner, "agents": psi.agent_count,
            "horizon": psi.horizon, "parts": parts}


def belief_json(b: BeliefState) -> dict:
    return {
        "agent": b.owner,
        "time": b.time,
        "belief": {str(st): p for st, p in b.support()},
    }


def parse_prescriptions(s: Scenario, d: DelayMatrix, k: int,
                        payload: list) -> tuple[CompletePrescription, ...]:
    """Complete prescriptions from history-file JSON: one dict per time step,
    mapping target agent to a {domain realization: action} table."""
    from .prescription import prescription_domain
    out = []
    for t, entry in enumerate(payload):
        parts = []
        for j in s.agents():
            table_in = entry.get(str(j))
            if table_in is None:
                raise WomctlError(f"history step {t} has no table for agent {j}")
            dom = prescription_domain(d, k, j, t)
            table = {}
            for key, u in table_in.items():
                r = parse_realization(key)
                if r.domain != dom:
                    raise WomctlError(
                        f"history step {t}, agent {j}: realization {key!r} "
                        f"does not match the required domain")
                if u not in s.action_space(j, t).values:
                    raise WomctlError(f"unknown action {u!r} for agent {j}")
                table[r] = u
            parts.append(PrescriptionFunction(owner=k, target=j, time=t,
                                              domain=dom, table=table))
        out.append(CompletePrescription(owner=k, time=t, parts=tuple(parts)))
    return tuple(out)
