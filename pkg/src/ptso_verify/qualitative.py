"""The four qualitative analyses: almost-sure and almost-never (repeated)
reachability of an instruction label.

Each analysis scans the plain configurations reachable from the start
configuration; the finite-attractor property of the plain set makes these
scans decisive for the chain.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import lang, reach, semantics
from .errors import OracleUnknownError


@dataclass
class QualResult:
    analysis: str
    verdict: bool
    witness: dict | None
    bound_used: int
    pruned: bool

    def __bool__(self):
        return self.verdict

    def to_json(self):
        doc = {"analysis": self.analysis, "verdict": self.verdict,
               "bound_used": self.bound_used}
        if self.witness is not None:
            doc["witness"] = self.witness
        return doc


def _strict_guard(oracle, ex):
    if ex.pruned and oracle.config.strict:
        raise OracleUnknownError(
            f"plain-configuration scan pruned at bound {ex.bound}; rerun with a larger --bound")


def qual_reach(prog, init, label, oracle=None):
    """Almost-sure reachability: is the label reached with probability 1?

    Early true when the label already occurs in `init`; otherwise scans the
    label-removed program for a reachable plain configuration that cannot
    reach the label.
    """
    oracle = oracle or reach.ReachOracle(prog)
    if label in init.labels:
        return QualResult("qual_reach", True, None, oracle.config.final_bound, False)
    if label not in prog.tables["label_pos"]:
        raise lang.ProgramError(f"unknown label {label!r}")

    transformed = lang.remove_label(prog, label)
    fresh = (set(transformed.labels()) - set(prog.labels())).pop()
    sub = reach.ReachOracle(transformed, oracle.config, oracle.policy)
    ex = sub.explore(init)
    _strict_guard(sub, ex)
    targets = {c for c in ex.nodes if label in c.labels}
    can_reach = ex.backward_set(targets)
    for c in sorted(ex.nodes):
        if not semantics.is_plain(c) or fresh in c.labels:
            continue
        if c not in can_reach:
            witness = {
                "plain_config": semantics.config_to_json(transformed, c),
                "path_to_it": ex.path_to(transformed, c),
                "unreachable_label": label,
            }
            return QualResult("qual_reach", False, witness, ex.bound, ex.pruned)
    return QualResult("qual_reach", True, None, ex.bound, ex.pruned)


def qual_rep_reach(prog, init, label, oracle=None):
    """Almost-sure repeated reachability; scans the original program."""
    oracle = oracle or reach.ReachOracle(prog)
    if label not in prog.tables["label_pos"]:
        raise lang.ProgramError(f"unknown label {label!r}")
    ex = oracle.explore(init)
    _strict_guard(oracle, ex)
    targets = {c for c in ex.nodes if label in c.labels}
    can_reach = ex.backward_set(targets)
    for c in sorted(ex.nodes):
        if not semantics.is_plain(c):
            continue
        if c not in can_reach:
            witness = {
                "plain_config": semantics.config_to_json(prog, c),
                "path_to_it": ex.path_to(prog, c),
                "unreachable_label": label,
            }
            return QualResult("qual_rep_reach", False, witness, ex.bound, ex.pruned)
    return QualResult("qual_rep_reach", True, None, ex.bound, ex.pruned)


def never_qual_reach(prog, init, label, oracle=None):
    """Almost-never reachability: probability 0 iff the label is unreachable."""
    oracle = oracle or reach.ReachOracle(prog)
    if label not in prog.tables["label_pos"]:
        raise lang.ProgramError(f"unknown label {label!r}")
    answer = oracle.reaches_label(init, label)
    verdict = not oracle.require(answer)
    witness = None if verdict else {"path_to_label": answer.path}
    return QualResult("never_qual_reach", verdict, witness, answer.bound, answer.pruned)


def never_qual_rep_reach(prog, init, label, oracle=None):
    """Almost-never repeated reachability: false iff some reachable B-plain
    configuration can reach the label."""
    oracle = oracle or reach.ReachOracle(prog)
    if label not in prog.tables["label_pos"]:
        raise lang.ProgramError(f"unknown label {label!r}")
    ex = oracle.explore(init)
    _strict_guard(oracle, ex)
    targets = {c for c in ex.nodes if label in c.labels}
    can_reach = ex.backward_set(targets)
    for c in oracle.bplain_configs(init):
        if c in can_reach:
            witness = {
                "bplain_config": semantics.config_to_json(prog, c),
                "path_to_it": ex.path_to(prog, c),
                "reachable_label": label,
            }
            return QualResult("never_qual_rep_reach", False, witness, ex.bound, ex.pruned)
    return QualResult("never_qual_rep_reach", True, None, ex.bound, ex.pruned)
