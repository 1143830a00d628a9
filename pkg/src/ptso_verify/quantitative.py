"""Epsilon-precise reachability and repeated-reachability probabilities.

Breadth-first mass propagation with exact rationals: path mass reaching the
target is banked in PosApprx, mass provably unable to reach it in NegApprx,
and the loop stops once PosApprx + NegApprx >= 1 - epsilon. Frontier entries
of equal depth and configuration are merged, which preserves the two
accumulators and keeps the frontier polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import reach, semantics
from .errors import BudgetExceededError

DEFAULT_MAX_ITERATIONS = 100_000


@dataclass
class QuantResult:
    analysis: str
    value: Fraction               # PosApprx: certified lower bound
    neg: Fraction                 # NegApprx
    epsilon: Fraction
    iterations: int               # BFS layers processed
    frontier_mass_remaining: Fraction
    max_config_size_seen: int
    bound_used: int
    pruned: bool

    def to_json(self):
        from .markov import frac_str
        return {
            "analysis": self.analysis,
            "value": frac_str(self.value),
            "value_float": float(self.value),
            "neg": frac_str(self.neg),
            "neg_float": float(self.neg),
            "epsilon": frac_str(self.epsilon),
            "iterations": self.iterations,
            "frontier_mass_remaining": frac_str(self.frontier_mass_remaining),
            "frontier_mass_remaining_float": float(self.frontier_mass_remaining),
            "max_config_size_seen": self.max_config_size_seen,
            "bound_used": self.bound_used,
            "oracle_pruned": self.pruned,
        }


class _NegMemo:
    """Memoized 'cannot reach the target' test, bulk-seeded from the root
    exploration and falling back to per-configuration oracle queries for
    frontier entries that escape the explored region."""

    def __init__(self, oracle, ex, label):
        targets = {c for c in ex.nodes if label in c.labels}
        can = ex.backward_set(targets)
        self.cache = {c: (c not in can) for c in ex.nodes}
        self.oracle = oracle
        self.label = label

    def cannot_reach(self, c):
        got = self.cache.get(c)
        if got is None:
            got = not self.oracle.require(self.oracle.reaches_label(c, self.label))
            self.cache[c] = got
        return got


def _run(prog, init, label, epsilon, oracle, pos_test, neg_test, analysis,
         max_iterations, pruned):
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    one = Fraction(1)
    pos = Fraction(0)
    neg = Fraction(0)
    frontier = {init: one}
    iterations = 0
    max_size = semantics.size(init)
    while pos + neg < one - epsilon:
        if iterations >= max_iterations:
            partial = QuantResult(analysis, pos, neg, epsilon, iterations,
                                  one - pos - neg, max_size,
                                  oracle.config.final_bound, pruned)
            raise BudgetExceededError(
                f"{analysis}: no convergence within {max_iterations} iterations", partial)
        new = {}
        for c, mass in sorted(frontier.items()):
            if pos_test(c):
                pos += mass
            elif neg_test(c):
                neg += mass
            else:
                for succ, p in sorted(oracle.distribution(c).items()):
                    prev = new.get(succ)
                    new[succ] = mass * p if prev is None else prev + mass * p
                    sz = semantics.size(succ)
                    if sz > max_size:
                        max_size = sz
        frontier = new
        iterations += 1
        assert pos + neg + sum(frontier.values()) == 1
    return QuantResult(analysis, pos, neg, epsilon, iterations,
                       one - pos - neg, max_size, oracle.config.final_bound, pruned)


def quant_reach(prog, init, label, epsilon, oracle=None,
                max_iterations=DEFAULT_MAX_ITERATIONS):
    """Approximate p = P(reach label) with p in [value, value + epsilon]."""
    oracle = oracle or reach.ReachOracle(prog)
    ex = oracle.explore(init)
    neg = _NegMemo(oracle, ex, label)
    return _run(prog, init, label, epsilon, oracle,
                pos_test=lambda c: label in c.labels,
                neg_test=neg.cannot_reach,
                analysis="quant_reach",
                max_iterations=max_iterations, pruned=ex.pruned)


def quant_rep_reach(prog, init, label, epsilon, oracle=None,
                    max_iterations=DEFAULT_MAX_ITERATIONS):
    """Approximate p = P(reach label infinitely often), epsilon-precise.

    An entry banks positive mass when every B-plain configuration reachable
    from it can reach the label, negative mass when the label is unreachable
    from it; everything else keeps expanding.
    """
    oracle = oracle or reach.ReachOracle(prog)
    ex = oracle.explore(init)
    neg = _NegMemo(oracle, ex, label)
    bplain = oracle.bplain_configs(init)
    bad = {c for c in bplain if neg.cannot_reach(c)}
    reach_bad = ex.backward_set(bad)
    escape_memo = {}

    def reaches_bad(c):
        if c in ex.nodes:
            return c in reach_bad
        got = escape_memo.get(c)
        if got is None:
            sub = oracle.explore(c)
            got = bool(sub.nodes & bad)
            escape_memo[c] = got
        return got

    return _run(prog, init, label, epsilon, oracle,
                pos_test=lambda c: not reaches_bad(c),
                neg_test=neg.cannot_reach,
                analysis="quant_rep_reach",
                max_iterations=max_iterations, pruned=ex.pruned)
