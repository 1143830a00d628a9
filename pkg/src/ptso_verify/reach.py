"""Bounded reachability oracle and plain/B-plain configuration enumeration.

Exact unbounded-buffer reachability is replaced by exhaustive forward
exploration of the buffer-size-bounded transition system: successors whose
total buffered-message count exceeds the bound are pruned, everything kept is
explored exhaustively, so answers are exact for the bounded sub-system. A
query that found nothing while pruning occurred is No under AssumeNo (the
default, with the bound stamped on the answer) or Unknown under strict mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import markov, semantics
from .errors import OracleUnknownError


@dataclass(frozen=True)
class OracleConfig:
    mode: str = "bounded"          # "bounded" | "iterative"
    bound: int = 8                 # K, or K0 in iterative mode
    bound_max: int | None = None   # K_max (iterative mode)
    strict: bool = False           # False: AssumeNo; True: ReportUnknown

    def __post_init__(self):
        if self.mode not in ("bounded", "iterative"):
            raise ValueError(f"unknown oracle mode {self.mode!r}")
        if self.bound < 1:
            raise ValueError("bound must be >= 1")
        if self.mode == "iterative":
            if self.bound_max is None or self.bound_max < self.bound:
                raise ValueError("iterative mode needs bound <= bound_max")

    def schedule(self):
        if self.mode == "bounded":
            return [self.bound]
        out = []
        k = self.bound
        while k < self.bound_max:
            out.append(k)
            k *= 2
        out.append(self.bound_max)
        return out

    @property
    def final_bound(self):
        return self.schedule()[-1]


@dataclass
class ReachAnswer:
    kind: str                      # "yes" | "no" | "unknown"
    path: list | None = None       # yes: [{"proc", "schedule", "config"}...]
    bound: int = 0
    pruned: bool = False

    @property
    def is_yes(self):
        return self.kind == "yes"

    @property
    def is_no(self):
        return self.kind == "no"


@dataclass
class Exploration:
    """Forward closure of one root in the K-bounded system."""

    root: object
    bound: int
    nodes: set
    succs: dict                    # config -> tuple of successor configs
    parent: dict                   # BFS tree: config -> (pred, proc, schedule)
    pruned: bool
    max_size_seen: int
    _preds: dict = field(default=None, repr=False)
    _sccs: list = field(default=None, repr=False)

    def preds(self):
        if self._preds is None:
            preds = {c: [] for c in self.nodes}
            for c, succs in self.succs.items():
                for s in succs:
                    preds[s].append(c)
            self._preds = preds
        return self._preds

    def backward_set(self, targets):
        """All explored configurations that can reach `targets`."""
        preds = self.preds()
        seen = set()
        stack = [t for t in targets if t in self.nodes]
        seen.update(stack)
        while stack:
            c = stack.pop()
            for p in preds[c]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def sccs(self):
        if self._sccs is None:
            self._sccs = _tarjan(self.nodes, self.succs)
        return self._sccs

    def bottom_sccs(self):
        out = []
        for comp in self.sccs():
            members = set(comp)
            if all(s in members for c in comp for s in self.succs[c]):
                out.append(members)
        return out

    def path_to(self, prog, target):
        """BFS-tree witness path from the root to `target`, replayable."""
        steps = []
        c = target
        while c != self.root:
            pred, proc, sched = self.parent[c]
            steps.append({"proc": proc, "schedule": list(sched),
                          "config": semantics.config_to_json(prog, c)})
            c = pred
        steps.reverse()
        return steps


def _tarjan(nodes, succs):
    """Iterative Tarjan SCC; components returned in discovery order."""
    index = {}
    low = {}
    onstack = set()
    stack = []
    comps = []
    counter = [0]
    for start in sorted(nodes):
        if start in index:
            continue
        work = [(start, iter(succs[start]))]
        index[start] = low[start] = counter[0]
        counter[0] += 1
        stack.append(start)
        onstack.add(start)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    onstack.add(succ)
                    work.append((succ, iter(succs[succ])))
                    advanced = True
                    break
                if succ in onstack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                comps.append(comp)
    return comps


class ReachOracle:
    """Memoizing reachability oracle over the bounded transition system.

    One oracle serves one analysis at a time; the successor and distribution
    caches are shared by every query against the same program.
    """

    def __init__(self, prog, config=None, policy=markov.DEFAULT_POLICY):
        self.prog = prog
        self.config = config or OracleConfig()
        self.policy = policy
        self._succs = {}
        self._dists = {}
        self._explorations = {}
        self._label_memo = {}

    # -- cached one-step structure --

    def successors(self, c):
        got = self._succs.get(c)
        if got is None:
            got = semantics.step_successors(self.prog, c)
            self._succs[c] = got
        return got

    def distribution(self, c):
        got = self._dists.get(c)
        if got is None:
            got = markov.step_distribution(self.prog, c, self.policy)
            self._dists[c] = got
        return got

    # -- bounded exploration --

    def explore(self, root, bound=None):
        bound = self.config.final_bound if bound is None else bound
        key = (root, bound)
        got = self._explorations.get(key)
        if got is not None:
            return got
        nodes = {root}
        succs = {}
        parent = {}
        pruned = False
        max_size = semantics.size(root)
        queue = [root]
        while queue:
            next_queue = []
            for c in queue:
                kept = []
                for succ, (proc, sched) in sorted(self.successors(c).items()):
                    sz = semantics.size(succ)
                    if sz > bound:
                        pruned = True
                        continue
                    kept.append(succ)
                    if succ not in nodes:
                        nodes.add(succ)
                        parent[succ] = (c, proc, sched)
                        next_queue.append(succ)
                        if sz > max_size:
                            max_size = sz
                succs[c] = tuple(kept)
            queue = next_queue
        got = Exploration(root, bound, nodes, succs, parent, pruned, max_size)
        self._explorations[key] = got
        return got

    def _resolve_negative(self, ex):
        if ex.pruned and self.config.strict:
            return ReachAnswer("unknown", bound=ex.bound, pruned=True)
        return ReachAnswer("no", bound=ex.bound, pruned=ex.pruned)

    def reaches_label(self, c, label):
        """Is a configuration containing `label` reachable from c?"""
        memo_key = (c, label)
        got = self._label_memo.get(memo_key)
        if got is not None:
            return got
        answer = None
        for bound in self.config.schedule():
            ex = self.explore(c, bound)
            hit = None
            if label in c.labels:
                hit = c
            else:
                for node in sorted(ex.nodes):
                    if label in node.labels:
                        hit = node
                        break
            if hit is not None:
                answer = ReachAnswer("yes", path=ex.path_to(self.prog, hit),
                                     bound=bound, pruned=ex.pruned)
                break
            if not ex.pruned:
                answer = ReachAnswer("no", bound=bound, pruned=False)
                break
        if answer is None:
            answer = self._resolve_negative(self.explore(c, self.config.final_bound))
        self._label_memo[memo_key] = answer
        return answer

    def reaches_config(self, c, target):
        """Is the plain configuration `target` reachable from c?"""
        if not semantics.is_plain(target):
            raise ValueError("reaches_config target must be plain")
        for bound in self.config.schedule():
            ex = self.explore(c, bound)
            if target in ex.nodes:
                return ReachAnswer("yes", path=ex.path_to(self.prog, target),
                                   bound=bound, pruned=ex.pruned)
            if not ex.pruned:
                return ReachAnswer("no", bound=bound, pruned=False)
        return self._resolve_negative(self.explore(c, self.config.final_bound))

    def require(self, answer):
        """Collapse to a boolean, aborting on Unknown (strict mode)."""
        if answer.kind == "unknown":
            raise OracleUnknownError(
                f"reachability unknown at bound {answer.bound}; rerun with a larger --bound")
        return answer.is_yes

    # -- plain and B-plain enumeration --

    def reachable_plain_configs(self, source):
        ex = self.explore(source)
        return sorted(c for c in ex.nodes if semantics.is_plain(c))

    def bplain_configs(self, source=None):
        """Plain configurations in bottom SCCs of the bounded step graph.

        Equivalent to the definitional bottom SCCs of the plain-to-plain
        reachability relation: from any configuration some plain configuration
        is one flush-all step away, so a B-plain configuration's whole
        forward cone reaches back to it.
        """
        source = semantics.initial_config(self.prog) if source is None else source
        ex = self.explore(source)
        if ex.pruned and self.config.strict:
            raise OracleUnknownError(
                f"B-plain set unknown: exploration pruned at bound {ex.bound}")
        out = set()
        for comp in ex.bottom_sccs():
            out.update(c for c in comp if semantics.is_plain(c))
        return sorted(out)


def all_plain_configs(prog, cap=1_000_000):
    """Every plain configuration (All mode), capped by state-count."""
    import itertools

    label_lists = [tuple(i.label for i in p.instrs) for p in prog.processes]
    nregs = len(prog.tables["reg_index"])
    nvars = len(prog.vars)
    total = 1
    for ls in label_lists:
        total *= len(ls)
    total *= prog.domain_size ** (nregs + nvars)
    if total > cap:
        raise ValueError(f"plain-configuration space has {total} states, above cap {cap}")
    dom = range(prog.domain_size)
    out = []
    empty = ((),) * len(prog.processes)
    for labels in itertools.product(*label_lists):
        for regs in itertools.product(dom, repeat=nregs):
            for mem in itertools.product(dom, repeat=nvars):
                out.append(semantics.Config(labels, regs, empty, mem))
    return out
