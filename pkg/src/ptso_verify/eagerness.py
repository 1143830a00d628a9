"""Gambler's-ruin analytics and the eagerness certificate (alpha, n~).

The certificate bounds the probability that a run first reaches the target
label at step n or later by alpha^n for all n >= n~. It is assembled from
three exponentially decaying bounds: the gravity of small configurations
(rate gamma = 2*sqrt(2)/3), a bound on runs visiting small configurations
sporadically (rate alpha_s, from the gravity rate at border parameter beta),
and a bound on runs that revisit small configurations often while delaying
the target (rate alpha_d, from a positive single-visit hit probability mu).

Irrational quantities are handled as certified rational intervals: float
seeds verified by exact integer arithmetic, Bernoulli bounds as fallback,
and interval powers with outward relative rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from . import markov, reach, semantics

# 38 truncated decimals of pi; the next digit block is 716..., so +1e-38 is above.
PI_LO = Fraction("3.14159265358979323846264338327950288419")
PI_HI = PI_LO + Fraction(1, 10**38)

SMALL_SIZE = 4          # small configuration: total buffered messages <= 4
Q_STAR = Fraction(2, 3)
P_STAR = Fraction(1, 3)
DEFAULT_BETA = 150
MIN_THRESHOLD = 300     # the S-run bound needs n >= 2*beta = 300


# --- certified rational bounds for irrational values ---

def sqrt_bounds(x, bits=96):
    """lo <= sqrt(x) <= hi with hi - lo = 1/(den*2^bits)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative")
    if x == 0:
        return Fraction(0), Fraction(0)
    n, d = x.numerator, x.denominator
    scale = 1 << bits
    t = math.isqrt(n * d * scale * scale)
    return Fraction(t, d * scale), Fraction(t + 1, d * scale)


def _ln_big(n):
    """float ln of a positive integer of any size."""
    k = max(0, n.bit_length() - 53)
    return math.log(n >> k) + k * math.log(2)


def _ln_frac(x):
    return _ln_big(x.numerator) - _ln_big(x.denominator)


def _bernoulli_root_bounds(y, n):
    # (1 + t)^n >= 1 + n*t gives, for any y > 0:
    #   y^(1/n) <= 1 + (y-1)/n     and     y^(1/n) >= 1/(1 + (1/y-1)/n)
    hi = 1 + (y - 1) / n
    lo = 1 / (1 + (1 / y - 1) / n)
    return lo, hi


def nth_root_bounds(y, n, rel_bits=48):
    """Certified lo <= y**(1/n) <= hi for y > 0, n >= 1."""
    y = Fraction(y)
    if y <= 0:
        raise ValueError("nth root needs y > 0")
    if n == 1 or y == 1:
        return y, y
    bern_lo, bern_hi = _bernoulli_root_bounds(y, n)
    try:
        seed = math.exp(_ln_frac(y) / n)
    except (OverflowError, ValueError):
        seed = 0.0
    if not (seed > 0 and math.isfinite(seed)):
        return bern_lo, bern_hi
    slack = Fraction(1, 1 << rel_bits)
    f = Fraction(seed)
    lo = f * (1 - slack)
    for _ in range(12):
        if lo <= 0 or lo ** n <= y:
            break
        slack *= 4
        lo = f * (1 - slack)
    else:
        lo = bern_lo
    slack = Fraction(1, 1 << rel_bits)
    hi = f * (1 + slack)
    for _ in range(12):
        if hi ** n >= y:
            break
        slack *= 4
        hi = f * (1 + slack)
    else:
        hi = bern_hi
    return max(lo, bern_lo), min(hi, bern_hi)


def round_down(x, bits=128):
    """Largest multiple of a power of two below x with ~bits of precision."""
    if x == 0:
        return x
    n, d = x.numerator, x.denominator
    shift = bits - (n.bit_length() - d.bit_length())
    if shift >= 0:
        return Fraction((n << shift) // d, 1 << shift)
    s = -shift
    return Fraction((n // (d << s)) << s)


def round_up(x, bits=128):
    if x == 0:
        return x
    n, d = x.numerator, x.denominator
    shift = bits - (n.bit_length() - d.bit_length())
    if shift >= 0:
        return Fraction(-((-(n << shift)) // d), 1 << shift)
    s = -shift
    return Fraction((-((-n) // (d << s))) << s)


def iv_pow(lo, hi, n, bits=128):
    """[lo, hi]^n for 0 <= lo <= hi, with outward relative rounding."""
    assert 0 <= lo <= hi and n >= 0
    rlo, rhi = Fraction(1), Fraction(1)
    blo, bhi = lo, hi
    while n:
        if n & 1:
            rlo = round_down(rlo * blo, bits)
            rhi = round_up(rhi * bhi, bits)
        n >>= 1
        if n:
            blo = round_down(blo * blo, bits)
            bhi = round_up(bhi * bhi, bits)
    return rlo, rhi


def least_n(pred, n_min=1, hint=None):
    """Smallest n >= n_min with pred(n) true; pred must be monotone in n."""
    if pred(n_min):
        return n_min
    hi = max(n_min + 1, hint or 0)
    while not pred(hi):
        hi *= 2
        if hi > 10**18:
            raise OverflowError("threshold search diverged")
    lo = n_min
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --- gambler's ruin ---

@dataclass(frozen=True)
class GamblerParams:
    p: Fraction   # step right (away from the sink)
    q: Fraction   # step left

    def __post_init__(self):
        p, q = Fraction(self.p), Fraction(self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if p <= 0 or q <= 0 or p + q != 1:
            raise ValueError("need p, q > 0 with p + q = 1")


def gambler_first_passage(g, n):
    """Exact probability that the walk from 1 first hits 0 at step n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2 == 0:
        return Fraction(0)
    return Fraction(comb(n, (n + 1) // 2), n) * g.p ** ((n - 1) // 2) * g.q ** ((n + 1) // 2)


def gambler_tail_bound(g, n):
    """Certified interval for (3q/sqrt(pi)) * (4pq)^floor(n/2), an upper bound
    on the probability that the walk from 1 needs n or more steps to hit 0."""
    if n < 2:
        raise ValueError("the tail bound holds for n >= 2")
    sp_lo = sqrt_bounds(PI_LO)[0]
    sp_hi = sqrt_bounds(PI_HI)[1]
    base = 3 * g.q * (4 * g.p * g.q) ** (n // 2)
    return base / sp_hi, base / sp_lo


def gamma_bounds(bits=96):
    """The gravity rate gamma = 2*sqrt(q*, p* product) = 2*sqrt(2)/3."""
    lo, hi = sqrt_bounds(Fraction(2), bits)
    return 2 * lo / 3, 2 * hi / 3


def srun_rate(beta):
    """Certified interval for the sporadic-run decay rate
    (beta/(beta-1)) * (2 beta)^(1/beta) * (1/beta + 1/gamma)^floor(1/beta) * gamma."""
    if beta < 2:
        raise ValueError("beta must be >= 2")
    g_lo, g_hi = gamma_bounds()
    root_lo, root_hi = nth_root_bounds(Fraction(2 * beta), beta)
    front = Fraction(beta, beta - 1)
    mid_lo, mid_hi = iv_pow(Fraction(1, beta) + 1 / g_hi,
                            Fraction(1, beta) + 1 / g_lo, 1 // beta)
    return (front * root_lo * mid_lo * g_lo,
            front * root_hi * mid_hi * g_hi)


# --- the certificate ---

@dataclass
class EagernessParams:
    q_star: Fraction
    p_star: Fraction
    gamma: tuple          # certified interval
    beta: int
    alpha_s: tuple        # certified interval
    a_set: tuple          # small reachable configurations that can reach the label
    mu: Fraction
    alpha_d: Fraction
    n_d: int
    alpha_hat: Fraction
    n_hat: int
    alpha: Fraction
    n_threshold: int

    def to_json(self, prog=None):
        fs = markov.frac_str
        return {
            "q_star": fs(self.q_star),
            "p_star": fs(self.p_star),
            "gamma": [fs(self.gamma[0]), fs(self.gamma[1])],
            "beta": self.beta,
            "alpha_s": [fs(self.alpha_s[0]), fs(self.alpha_s[1])],
            "a_set_size": len(self.a_set),
            "mu": fs(self.mu),
            "mu_float": float(self.mu),
            "alpha_d": fs(self.alpha_d),
            "n_d": self.n_d,
            "alpha_hat": fs(self.alpha_hat),
            "n_hat": self.n_hat,
            "alpha": fs(self.alpha),
            "alpha_float": float(self.alpha),
            "n_threshold": self.n_threshold,
        }


def _small_reach_set(prog, label, oracle, source):
    """A: small configurations reachable from `source` that can reach `label`."""
    ex = oracle.explore(source)
    if ex.pruned and oracle.config.strict:
        from .errors import OracleUnknownError
        raise OracleUnknownError(f"A-set unknown: exploration pruned at bound {ex.bound}")
    targets = {c for c in ex.nodes if label in c.labels}
    can_reach = ex.backward_set(targets)
    return ex, sorted(c for c in can_reach if semantics.size(c) <= SMALL_SIZE)


def _witness_bfs(oracle, start, label, bound):
    """Shortest path from `start` to a label-bearing configuration that never
    revisits `start`; BFS over the bounded system, deterministic order."""
    parent = {}
    seen = {start}
    layer = [start]
    while layer:
        nxt = []
        for c in sorted(layer):
            for succ in sorted(oracle.successors(c)):
                if succ in seen or semantics.size(succ) > bound:
                    continue
                seen.add(succ)
                parent[succ] = c
                if label in succ.labels:
                    path = [succ]
                    while path[-1] != start:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                nxt.append(succ)
        layer = nxt
    raise AssertionError("witness BFS found no label-bearing configuration")


def compute_mu(prog, label, oracle=None, source=None):
    """A positive lower bound on the probability, from each c in A, of
    visiting the label before returning to c.

    Per configuration: the probability of the shortest label-reaching path
    that never revisits c. Configurations already bearing the label need no
    witness (they cannot occur strictly before a first hit) and are skipped.
    Returns (mu, per-configuration map).
    """
    oracle = oracle or reach.ReachOracle(prog)
    source = semantics.initial_config(prog) if source is None else source
    _, a_set = _small_reach_set(prog, label, oracle, source)
    if not a_set:
        raise ValueError(f"label {label!r} is not reachable from any small configuration")
    bound = oracle.config.final_bound
    per = {}
    for c in a_set:
        if label in c.labels:
            continue
        path = _witness_bfs(oracle, c, label, bound)
        prob = Fraction(1)
        for a, b in zip(path, path[1:]):
            prob *= oracle.distribution(a)[b]
        per[c] = prob
    mu = min(per.values()) if per else Fraction(1)
    return mu, per


def _coarse_upper(x, bits=48):
    """Round a certified upper bound in (0,1) up to a small-denominator grid,
    keeping it below 1; coarse rates keep the cost loop's exact powers cheap."""
    r = round_up(x, bits)
    return r if r < 1 else x


def compute_eagerness(prog, label, oracle=None, source=None, beta=DEFAULT_BETA):
    """Compute the full eagerness certificate for runs from `source`."""
    oracle = oracle or reach.ReachOracle(prog)
    if oracle.policy is not markov.DEFAULT_POLICY:
        raise ValueError("eagerness constants are specific to the default scheduling/update policy")
    source = semantics.initial_config(prog) if source is None else source

    gamma = gamma_bounds()
    alpha_s = srun_rate(beta)
    alpha_s = (alpha_s[0], _coarse_upper(alpha_s[1]))
    if alpha_s[1] >= 1:
        raise ValueError(f"beta={beta} gives S-run rate >= 1; use a larger beta (150 suffices)")

    _, a_set = _small_reach_set(prog, label, oracle, source)
    if not a_set:
        raise ValueError(f"label {label!r} is not reachable from {source}")
    mu, per = compute_mu(prog, label, oracle, source)
    size_a = len(a_set)

    if not per:
        # No label-free member of A: delayed runs are impossible.
        alpha_d, n_d = Fraction(1, 2), 1
    elif mu == 1:
        # Every return-free witness is certain; D-run terms vanish once the
        # pigeonhole forces a second visit, i.e. for n >= beta*|A|.
        alpha_d, n_d = Fraction(1, 2), beta * size_a
    else:
        base_hi = _coarse_upper(nth_root_bounds(1 - mu, beta * size_a)[1])
        assert base_hi < 1
        alpha_d = (base_hi + 1) / 2
        inner_hi = nth_root_bounds(1 - mu, size_a)[1]
        const_hi = size_a / ((1 - mu) * (1 - inner_hi))
        ratio = alpha_d / base_hi
        hint = int(_ln_frac(const_hi) / _ln_frac(ratio)) + 1 if const_hi > 1 else 1

        def dcheck(n):
            return iv_pow(ratio, ratio, n)[0] >= const_hi

        n_d = least_n(dcheck, 1, hint)

    alpha_hat = (max(alpha_s[1], alpha_d) + 1) / 2
    rs = alpha_s[1] / alpha_hat
    rd = alpha_d / alpha_hat

    def hcheck(n):
        return iv_pow(rs, rs, n)[1] + iv_pow(rd, rd, n)[1] <= 1

    n_hat = least_n(hcheck, 1, 64)

    alpha = (alpha_hat + 1) / 2
    ra = alpha / alpha_hat
    lim = 1 / (1 - alpha_hat)
    hint = int(_ln_frac(lim) / _ln_frac(ra)) + 1

    def tcheck(n):
        return iv_pow(ra, ra, n)[0] >= lim

    n_threshold = least_n(tcheck, max(n_d, MIN_THRESHOLD, n_hat), hint)

    params = EagernessParams(Q_STAR, P_STAR, gamma, beta, alpha_s, tuple(a_set),
                             mu, alpha_d, n_d, alpha_hat, n_hat, alpha, n_threshold)
    assert alpha_s[1] < 1 and alpha_d < 1
    assert max(alpha_s[1], alpha_d) < params.alpha_hat < params.alpha < 1
    return params
