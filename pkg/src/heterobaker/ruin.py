"""Symmetric simple random walk on {1, 2, ...} with an absorbing wall at 0.

The level dynamics of the reduced transfer operator are compared against
this chain: mass at level l splits evenly to l-1 and l+1, and whatever
reaches 0 is absorbed.  The closed-form transition probability comes from
the reflection principle,

    p_{l,l'}^(n) = 2^-n * ( C(n, (n-l+l')/2) - C(n, (n-l-l')/2) )

for matching parity, with out-of-range binomials read as zero.  Exact
rational evaluation is used up to moderate n; beyond that a log-gamma
route evaluates the same expression stably in doubles (2^-n * C overflows
and cancels catastrophically if done naively).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .pcfun import ZERO, PCFun1D, frac

EXACT_N_CUTOFF = 64


class ZeroFunction(ValueError):
    pass


@dataclass(frozen=True)
class RuinState:
    """Sub-probability vector over levels l >= 1 at time n; q[i] is level i+1."""

    n: int
    q: tuple[Fraction, ...]

    def __post_init__(self):
        if any(x < 0 for x in self.q):
            raise ValueError("negative mass")

    @staticmethod
    def delta(l: int) -> "RuinState":
        if l < 1:
            raise ValueError("levels start at 1")
        return RuinState(0, tuple([ZERO] * (l - 1) + [Fraction(1)]))

    @staticmethod
    def from_profile(masses: Sequence) -> "RuinState":
        return RuinState(0, tuple(frac(m) for m in masses))

    def mass(self, l: int) -> Fraction:
        return self.q[l - 1] if 1 <= l <= len(self.q) else ZERO

    def survival(self) -> Fraction:
        return sum(self.q, ZERO)


def step(state: RuinState) -> RuinState:
    """One step: q'_l = (q_{l-1} + q_{l+1})/2, with q'_1 = q_2/2."""
    q = state.q
    m = len(q)
    new = [ZERO] * (m + 1)
    half = Fraction(1, 2)
    for i, mass in enumerate(q):
        if not mass:
            continue
        new[i + 1] += half * mass
        if i >= 1:
            new[i - 1] += half * mass
    while new and new[-1] == 0:
        new.pop()
    return RuinState(state.n + 1, tuple(new))


def evolve_from(q0: RuinState, n: int) -> RuinState:
    state = q0
    for _ in range(n):
        state = step(state)
    return state


def transition_prob_exact(l: int, lp: int, n: int) -> Fraction:
    if min(l, lp) < 1 or n < 1:
        raise ValueError("need l, l' >= 1 and n >= 1")
    if (n - l + lp) % 2:
        return ZERO
    k1 = (n - l + lp) // 2
    k2 = (n - l - lp) // 2
    c1 = math.comb(n, k1) if 0 <= k1 <= n else 0
    c2 = math.comb(n, k2) if 0 <= k2 <= n else 0
    return Fraction(c1 - c2, 2 ** n)


def transition_prob_float(l: int, lp: int, n: int) -> float:
    """Stable double-precision evaluation via log-gamma.

    The binomial difference is rewritten as C(n,k2) * (ratio - 1) with the
    ratio computed as the exact product prod (n+l+lp-2k)/(n-l+lp-2k), which
    avoids the cancellation of two nearly equal huge terms.
    """
    if min(l, lp) < 1 or n < 1:
        raise ValueError("need l, l' >= 1 and n >= 1")
    if (n - l + lp) % 2:
        return 0.0
    k1 = (n - l + lp) // 2
    if k1 < 0 or k1 > n:
        return 0.0
    k2 = (n - l - lp) // 2
    ln2 = math.log(2.0)
    if k2 < 0:
        logp = math.lgamma(n + 1) - math.lgamma(k1 + 1) - math.lgamma(n - k1 + 1)
        return math.exp(logp - n * ln2)
    logp2 = math.lgamma(n + 1) - math.lgamma(k2 + 1) - math.lgamma(n - k2 + 1)
    ratio = 1.0
    for k in range(lp):
        ratio *= (n + l + lp - 2 * k) / (n - l + lp - 2 * k)
    return math.exp(logp2 - n * ln2) * (ratio - 1.0)


def transition_prob(l: int, lp: int, n: int):
    """Exact Fraction for n <= 64, float via log-gamma beyond."""
    if n <= EXACT_N_CUTOFF:
        return transition_prob_exact(l, lp, n)
    return transition_prob_float(l, lp, n)


def q_via_transition(q0: RuinState, n: int) -> RuinState:
    """Closed-form superposition sum_{l'} q0_{l'} p^(n)_{l' l}; exact."""
    if n == 0:
        return q0
    lmax = len(q0.q) + n
    out = [ZERO] * lmax
    for i, mass in enumerate(q0.q):
        if not mass:
            continue
        lp = i + 1
        for l in range(max(1, lp - n), lp + n + 1):
            p = transition_prob_exact(l=lp, lp=l, n=n)
            if p:
                out[l - 1] += mass * p
    while out and out[-1] == 0:
        out.pop()
    return RuinState(n, tuple(out))


def count_surviving_paths(l: int, lp: int, n: int) -> int:
    """Brute-force count of +-1 paths from l to lp staying >= 1 throughout.

    Enumerates all 2^n sign words; only for small n (tests of the
    reflection principle).
    """
    return surviving_path_histogram(l, n).get(lp, 0)


def surviving_path_histogram(l: int, n: int) -> dict[int, int]:
    """Endpoint histogram over all 2^n sign words of paths from l that never
    touch 0; one enumeration serves every endpoint."""
    hist: dict[int, int] = {}
    for word in range(1 << n):
        pos = l
        for i in range(n):
            pos += 1 if (word >> i) & 1 else -1
            if pos <= 0:
                break
        else:
            hist[pos] = hist.get(pos, 0) + 1
    return hist


def asymptotic_ratio_report(n_list: Sequence[int], l_max: int | None = None) -> dict:
    """Ratios p^(n)_{l,l'} * n^(3/2) / (l*l') for parity-matching pairs with
    l, l' <= n^(1/4) (or the given cap).  Diagnostic for the n^(-3/2)
    two-sided bound; the interval is reported, not asserted."""
    rows = []
    for n in n_list:
        cap = l_max if l_max is not None else max(1, int(n ** 0.25))
        cap = min(cap, max(1, int(n ** 0.25)))
        for l in range(1, cap + 1):
            for lp in range(1, cap + 1):
                if (n - l + lp) % 2:
                    continue
                p = transition_prob_float(l, lp, n)
                rows.append({"n": n, "l": l, "lp": lp, "p": p,
                             "ratio": p * n ** 1.5 / (l * lp)})
    ratios = [r["ratio"] for r in rows]
    return {"rows": rows, "r_min": min(ratios), "r_max": max(ratios)}


def initial_profile(f: PCFun1D) -> tuple[Fraction, RuinState]:
    """(C_phi, normalized level profile) of a zero-mean dyadic PC function:
    q0_l = ||f_l||_inf / C_phi with C_phi the sum of the level sup norms."""
    from .haar import analyze, level_sup_norms
    sups = level_sup_norms(analyze(f))
    if not sups:
        raise ZeroFunction("the zero function has no level profile")
    c_phi = sum(sups.values(), ZERO)
    lmax = max(sups)
    q0 = [sups.get(l, ZERO) / c_phi for l in range(1, lmax + 1)]
    return c_phi, RuinState.from_profile(q0)


def domination_check(f: PCFun1D, n_max: int, l_max: int | None = None) -> dict:
    """Verify ||f_l^(n)||_inf <= C_phi q_l^(n) for the neutral M=2 operator.

    Rows record both sides exactly; equality rows are flagged.  Equality at
    every (n, l) is the expected outcome for strictly monotone inputs.
    """
    from .haar import analyze, level_sup_norms
    from .transfer import ReducedOp, p0_apply
    c_phi, q = initial_profile(f)
    op = ReducedOp.neutral(2)
    rows = []
    g = f
    for n in range(n_max + 1):
        sups = level_sup_norms(analyze(g))
        cap = l_max if l_max is not None else max(len(q.q), max(sups, default=1))
        for l in range(1, cap + 1):
            lhs = sups.get(l, ZERO)
            rhs = c_phi * q.mass(l)
            if lhs > rhs:
                rows.append({"n": n, "l": l, "lhs": lhs, "rhs": rhs,
                             "holds": False, "equality": False})
            else:
                rows.append({"n": n, "l": l, "lhs": lhs, "rhs": rhs,
                             "holds": True, "equality": lhs == rhs})
        if n < n_max:
            g = p0_apply(op, g, 1)
            q = step(q)
    return {
        "rows": rows,
        "all_hold": all(r["holds"] for r in rows),
        "all_equal": all(r["equality"] for r in rows),
        "c_phi": c_phi,
    }
