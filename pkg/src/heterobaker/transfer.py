"""Perron-Frobenius machinery for the heterochaos baker maps.

Three exact representations of the reduced operator on functions of the
center coordinate are implemented and cross-checked:

* a grid route acting on piecewise-constant (and piecewise-affine)
  functions, straight from the branch formulas;
* a sparse Haar-coefficient route (M = 2): the alpha part copies a level-l
  coefficient to two level-(l+1) slots with weight w, the beta part folds a
  level-l coefficient down to level l-1 with weight (1-w)/2 and annihilates
  level 1;
* a square-wave route on the invariant span of s_l = sum_k chi_{l,k}, where
  the coefficient vector evolves by the absorbed-random-walk recursion.

The general weight w = M*a is derived from averaging the full 3D operator
over (x_u, x_s): the alpha branches carry total mass w = 1 - M*b and the
beta branches spread 1 - w evenly over M terms.  At the mostly-neutral
parameter this reduces to the familiar w = 1/2 formulas.

The full 3D operator is an exact pushforward on product grids (the branch
maps are diagonal affine), together with its projection split against the
x_c-average and the tensor-component actions.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .baker import BakerParams, Kind, all_symbols, branch_affine
from .pcfun import (ONE, ZERO, PAFun1D, PCFun1D, PCFun2D, PCFun3D, frac,
                    merge_breakpoints)

HALF = Fraction(1, 2)


class NotInSquareWaveSpan(ValueError):
    pass


class FiberAverageNonZero(ValueError):
    pass


@dataclass(frozen=True)
class ReducedOp:
    """Reduced transfer operator with branch weight w = M*a in (0,1)."""

    M: int
    w: Fraction

    def __post_init__(self):
        object.__setattr__(self, "w", frac(self.w))
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if not 0 < self.w < 1:
            raise ValueError("weight must lie in (0,1)")

    @property
    def is_neutral(self) -> bool:
        return self.w == HALF

    @staticmethod
    def neutral(M: int = 2) -> "ReducedOp":
        return ReducedOp(M, HALF)

    @staticmethod
    def from_params(params: BakerParams) -> "ReducedOp":
        return ReducedOp(params.M, params.M * params.a)


# ---------------------------------------------------------------------------
# grid route (PC and piecewise-affine)

def p_alpha(op: ReducedOp, f: PCFun1D) -> PCFun1D:
    """Alpha part: w * u(Mx - k + 1) on the k-th strip [(k-1)/M, k/M)."""
    M, w = op.M, op.w
    bps: list[Fraction] = [ZERO]
    vals: list[Fraction] = []
    for k in range(M):
        for b0, v in zip(f.breakpoints[1:], f.values):
            bps.append((b0 + k) / M)
            vals.append(w * v)
    return PCFun1D(tuple(bps), tuple(vals))


def p_beta(op: ReducedOp, f: PCFun1D) -> PCFun1D:
    """Beta part: ((1-w)/M) * sum_j u((x+j)/M)."""
    M, w = op.M, op.w
    pieces = set()
    for j in range(M):
        lo, hi = Fraction(j, M), Fraction(j + 1, M)
        for b in f.breakpoints:
            if lo <= b <= hi:
                pieces.add(M * b - j)
    bps = tuple(sorted(pieces | {ZERO, ONE}))
    coeff = (1 - w) / M
    vals = []
    for a0, a1 in zip(bps, bps[1:]):
        mid = (a0 + a1) / 2
        vals.append(coeff * sum((f((mid + j) / M) for j in range(M)), ZERO))
    return PCFun1D(bps, tuple(vals))


def p_alpha_pa(op: ReducedOp, f: PAFun1D) -> PAFun1D:
    M, w = op.M, op.w
    bps: list[Fraction] = [ZERO]
    slopes: list[Fraction] = []
    icpts: list[Fraction] = []
    for k in range(M):
        for b0, m, c in zip(f.breakpoints[1:], f.slopes, f.intercepts):
            bps.append((b0 + k) / M)
            slopes.append(w * m * M)
            icpts.append(w * (c - m * k))
    return PAFun1D(tuple(bps), tuple(slopes), tuple(icpts))


def p_beta_pa(op: ReducedOp, f: PAFun1D) -> PAFun1D:
    M, w = op.M, op.w
    pieces = set()
    for j in range(M):
        lo, hi = Fraction(j, M), Fraction(j + 1, M)
        for b in f.breakpoints:
            if lo <= b <= hi:
                pieces.add(M * b - j)
    bps = tuple(sorted(pieces | {ZERO, ONE}))
    coeff = (1 - w) / M
    slopes, icpts = [], []
    for a0, a1 in zip(bps, bps[1:]):
        mid = (a0 + a1) / 2
        m_tot = ZERO
        c_tot = ZERO
        for j in range(M):
            m, c = f.piece_at((mid + j) / M)
            m_tot += coeff * m / M
            c_tot += coeff * (c + m * Fraction(j, M))
        slopes.append(m_tot)
        icpts.append(c_tot)
    return PAFun1D(bps, tuple(slopes), tuple(icpts))


def _pa_add(f: PAFun1D, g: PAFun1D) -> PAFun1D:
    bps = merge_breakpoints(f.breakpoints, g.breakpoints)
    slopes, icpts = [], []
    for a0, a1 in zip(bps, bps[1:]):
        mid = (a0 + a1) / 2
        mf, cf = f.piece_at(mid)
        mg, cg = g.piece_at(mid)
        slopes.append(mf + mg)
        icpts.append(cf + cg)
    return PAFun1D(bps, tuple(slopes), tuple(icpts))


def p0_apply_pa(op: ReducedOp, f: PAFun1D, n: int = 1) -> PAFun1D:
    """Exact reduced operator on piecewise-affine functions (grid oracle)."""
    for _ in range(n):
        f = _pa_add(p_alpha_pa(op, f), p_beta_pa(op, f))
    return f


def p0_apply(op: ReducedOp, f: PCFun1D, n: int = 1) -> PCFun1D:
    """Exact P0^n f on piecewise-constant functions.

    Uniform dyadic grids with M = 2 take an integer kernel (values over a
    common power-of-two denominator); anything else runs the generic
    rational path.
    """
    if n == 0:
        return f
    if op.M == 2:
        L = f.is_uniform_level(2)
        if L is not None and L >= 1:
            nums, denom = _to_int_vector(f.values)
            nums, scale = _p0_uniform_int(nums, Fraction(1, denom), op, n)
            vals = tuple(Fraction(int(x)) * scale for x in nums)
            return PCFun1D.uniform(vals)
    for _ in range(n):
        f = p_alpha(op, f) + p_beta(op, f)
    return f


def _to_int_vector(values: Sequence[Fraction]) -> tuple[np.ndarray, int]:
    denom = 1
    for v in values:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    nums = [int(v * denom) for v in values]
    big = max((abs(x) for x in nums), default=0)
    dtype = object if big > 2 ** 40 else np.int64
    return np.array(nums, dtype=dtype), denom


def _p0_step_int(nums: np.ndarray, op: ReducedOp) -> np.ndarray:
    """One uniform-grid step at scale factor 1/(2*wq):
    out[j] = 2*wp*u(2x) + (wq-wp)*(u(x/2) + u((x+1)/2))."""
    half = nums.size
    quarter = half // 2
    wp, wq = op.w.numerator, op.w.denominator
    alpha = np.concatenate([nums, nums])
    idx = np.arange(2 * half) >> 2
    beta = nums[idx] + nums[quarter + idx]
    return 2 * wp * alpha + (wq - wp) * beta


def _p0_uniform_int(nums: np.ndarray, scale: Fraction, op: ReducedOp,
                    n: int) -> tuple[np.ndarray, Fraction]:
    wq = op.w.denominator
    for _ in range(n):
        if nums.dtype != object and int(np.abs(nums).max(initial=0)) > 2 ** 61 // (2 * wq):
            nums = nums.astype(object)
        nums = _p0_step_int(nums, op)
        scale = scale / (2 * wq)
    return nums, scale


# ---------------------------------------------------------------------------
# Haar-coefficient route (M = 2)

def p0_haar_step(expansion: dict, op: ReducedOp) -> dict:
    """One sparse coefficient step of P0 = P_alpha + P_beta for M = 2.

    chi_{l,k} -> w*(chi_{l+1,k} + chi_{l+1,k+2^(l-1)})
              +  ((1-w)/2)*chi_{l-1, k mod 2^(l-2)}   (the beta image;
                 level 1 is annihilated by the beta part).
    """
    if op.M != 2:
        raise ValueError("the Haar route is the M = 2 representation")
    w = op.w
    down = (1 - w) / 2
    out: dict = {}

    def add(key, val):
        cur = out.get(key, ZERO) + val
        if cur:
            out[key] = cur
        elif key in out:
            del out[key]

    for (l, k), c in expansion.items():
        if not c:
            continue
        add((l + 1, k), w * c)
        add((l + 1, k + 2 ** (l - 1)), w * c)
        if l >= 2:
            add((l - 1, k % 2 ** (l - 2)), down * c)
    return out


def p0_haar_apply(expansion: dict, op: ReducedOp, n: int) -> dict:
    for _ in range(n):
        expansion = p0_haar_step(expansion, op)
    return expansion


# ---------------------------------------------------------------------------
# square-wave route

@dataclass(frozen=True)
class SquareWaveState:
    """Coefficients of sum a_l s_l, l = 1..len(coeffs); s_l has modulus one
    a.e. and distinct levels are orthonormal, so pairings are plain dot
    products.  mode is 'rational' (Fractions) or 'double' (numpy)."""

    coeffs: tuple
    mode: str = "rational"

    def __post_init__(self):
        if self.mode not in ("rational", "double"):
            raise ValueError("mode must be 'rational' or 'double'")

    @staticmethod
    def from_profile(values: Iterable, mode: str = "rational") -> "SquareWaveState":
        if mode == "rational":
            return SquareWaveState(tuple(frac(v) for v in values), mode)
        return SquareWaveState(tuple(float(v) for v in values), mode)

    def coefficient(self, l: int):
        if 1 <= l <= len(self.coeffs):
            return self.coeffs[l - 1]
        return ZERO if self.mode == "rational" else 0.0


def squarewave_step(state: SquareWaveState, op: ReducedOp) -> SquareWaveState:
    """a'_l = w a_{l-1} + (1-w) a_{l+1}, with a'_1 = (1-w) a_2.

    This is exactly the level recursion of the absorbed walk when w = 1/2;
    for other weights it is the same biased-walk recursion.
    """
    if op.M != 2:
        raise ValueError("the square-wave subspace is the M = 2 representation")
    a = state.coeffs
    m = len(a)
    if state.mode == "double":
        w = float(op.w)
        arr = np.asarray(a, dtype=float)
        new = np.zeros(m + 1)
        new[1:] += w * arr
        new[:m - 1] += (1 - w) * arr[1:]
        while new.size and new[-1] == 0.0:
            new = new[:-1]
        return SquareWaveState(tuple(new.tolist()), "double")
    w = op.w
    new = [ZERO] * (m + 1)
    for i, c in enumerate(a):
        if not c:
            continue
        new[i + 1] += w * c
        if i >= 1:
            new[i - 1] += (1 - w) * c
    while new and new[-1] == 0:
        new.pop()
    return SquareWaveState(tuple(new), "rational")


def squarewave_synthesize(state: SquareWaveState) -> PCFun1D:
    from .haar import square_wave
    out = PCFun1D.zero()
    for i, c in enumerate(state.coeffs):
        if c:
            out = out + square_wave(i + 1) * frac(c)
    return out


def square_wave_profile(expansion: dict) -> list | None:
    """Per-level coefficients if the expansion lies in span{s_l}: every
    level must be fully populated with a k-independent coefficient."""
    if not expansion:
        return []
    lmax = max(l for l, _ in expansion)
    profile = []
    for l in range(1, lmax + 1):
        vals = {expansion.get((l, k)) for k in range(2 ** (l - 1))}
        if len(vals) != 1:
            return None  # zeros are never stored, so mixed means off-span
        c = vals.pop()
        profile.append(ZERO if c is None else c)
    return profile


# ---------------------------------------------------------------------------
# oracle equivalence (integer kernels; used by the acceptance suite)

def oracle_equivalence_report(f: PCFun1D, op: ReducedOp, n_steps: int) -> dict:
    """Iterate the PC grid, Haar coefficient, and (if applicable) square-wave
    routes side by side in exact integer arithmetic and compare after every
    step.  All three share the per-step scale 1/(2*wq), so agreement is a
    plain integer comparison.
    """
    if op.M != 2:
        raise ValueError("oracle comparison is defined for M = 2")
    L0 = f.is_uniform_level(2)
    if L0 is None:
        raise ValueError("input must live on a uniform dyadic grid")
    if L0 == 0:
        raise ValueError("input must be a nonconstant dyadic function")

    from .haar import analyze
    nums, denom = _to_int_vector(f.values)
    expansion = analyze(f)
    # Haar coefficients carry an extra 2^L0 in their denominators (they are
    # half-differences of dyadic cell means), so their integer units are
    # denom * 2^L0; the scale ratio to the grid stays 2^L0 forever since
    # both sides shrink by 1/(2 wq) per step.
    hden = denom << L0
    lmax = L0
    levels = [np.zeros(2 ** max(l - 1, 0), dtype=nums.dtype) for l in range(lmax + 1)]
    for (l, k), c in expansion.items():
        ic = c * hden
        if ic.denominator != 1:
            raise ValueError("unexpected non-integral Haar coefficient")
        levels[l][k] = int(ic)
    profile = square_wave_profile(expansion)
    sw = None
    if profile is not None:
        sw = np.zeros(lmax + 1, dtype=nums.dtype)
        for i, c in enumerate(profile):
            sw[i + 1] = int(c * hden)

    wp, wq = op.w.numerator, op.w.denominator
    agree_all = True
    per_step = []

    def step_levels(levs):
        new = [np.zeros(2 ** max(l - 1, 0), dtype=nums.dtype)
               for l in range(len(levs) + 1)]
        for l in range(1, len(levs)):
            arr = levs[l]
            if not arr.any():
                continue
            half = arr.size
            new[l + 1][:half] += 2 * wp * arr
            new[l + 1][half:2 * half] += 2 * wp * arr
            if l >= 2:
                q = half // 2
                new[l - 1] += (wq - wp) * (arr[:q] + arr[q:])
        return new

    def grid_coefficients(vec, level):
        """Synthesis-weight numerators from the sums pyramid: the level-l
        coefficient equals (S_left - S_right) / (2 * span) in grid units."""
        out = {}
        cur = vec
        span = 1
        for l in range(level, 0, -1):
            pairs = cur.reshape(-1, 2)
            diff = pairs[:, 0] - pairs[:, 1]
            out[l] = (diff, 2 * span)
            cur = pairs[:, 0] + pairs[:, 1]
            span *= 2
        return out, cur  # cur holds the total sum (zero-mean check)

    for stepn in range(1, n_steps + 1):
        # promote to arbitrary precision before the span-weighted comparison
        # below could overflow int64
        margin = 1 << (L0 + stepn + L0 + 3)
        if nums.dtype != object and \
                int(np.abs(nums).max(initial=0)) * 4 > 2 ** 62 // margin:
            nums = nums.astype(object)
            levels = [a.astype(object) for a in levels]
            if sw is not None:
                sw = sw.astype(object)
        nums = _p0_step_int(nums, op)
        levels = step_levels(levels)
        if sw is not None:
            new_sw = np.zeros(sw.size + 1, dtype=sw.dtype)
            new_sw[2:] += 2 * wp * sw[1:]
            new_sw[1:-2] += 2 * (wq - wp) * sw[2:]
            sw = new_sw

        level_now = L0 + stepn
        coeffs, total = grid_coefficients(nums, level_now)
        ok = int(np.asarray(total).reshape(-1)[0]) == 0
        for l in range(1, level_now + 1):
            diff, factor = coeffs[l]
            harr = levels[l] if l < len(levels) else np.zeros(2 ** (l - 1),
                                                              dtype=nums.dtype)
            if not np.array_equal((1 << L0) * diff, factor * harr):
                ok = False
                break
        sw_ok = True
        if sw is not None:
            for l in range(1, level_now + 1):
                harr = levels[l] if l < len(levels) else None
                target = sw[l] if l < sw.size else 0
                if harr is None:
                    if target != 0:
                        sw_ok = False
                        break
                elif not np.array_equal(harr, np.full_like(harr, target)):
                    sw_ok = False
                    break
        agree = ok and sw_ok
        per_step.append({"n": stepn, "grid_vs_haar": ok,
                         "squarewave": sw_ok if sw is not None else None})
        agree_all = agree_all and agree

    return {"agree": agree_all, "squarewave_applicable": sw is not None,
            "steps": per_step}


# ---------------------------------------------------------------------------
# full 3D operator

def _axis_positions(bps: Sequence[Fraction]) -> dict:
    return {b: i for i, b in enumerate(bps)}


def _strip_index(bps: Sequence[Fraction], edges: Sequence[Fraction]) -> list[int]:
    """For each cell of `bps`, the index of the `edges` strip containing it."""
    out = []
    for lo, hi in zip(bps, bps[1:]):
        mid = (lo + hi) / 2
        i = bisect_left(edges, mid) - 1
        out.append(max(i, 0))
    return out


def p_full_3d(params: BakerParams, F: PCFun3D) -> PCFun3D:
    """Exact pushforward u -> u o f^{-1} on a product grid.

    Requires measure preservation (a + b = 1/M), where the 2M branch images
    tile the cube and the operator is plain composition with the inverse.
    """
    if not params.is_measure_preserving:
        raise ValueError("p_full_3d requires a + b = 1/M")
    M, a = params.M, params.a
    u_edges = [k * a for k in range(M + 1)] + [ONE]
    c_edges = [Fraction(k, M) for k in range(M + 1)]

    bu = merge_breakpoints(F.bps_u, u_edges)
    bc = merge_breakpoints(F.bps_c, c_edges)
    bs = F.bps_s
    vals = F.on_grid(bu, bc, bs)

    syms = all_symbols(params)
    affines = {(s.kind, s.k): branch_affine(params, s) for s in syms}

    # output breakpoints: branch images of the refined input breakpoints
    out_u, out_c, out_s = set(), set(), set()
    for sym in syms:
        (mu, cu), (mc, cc), (ms, cs) = affines[(sym.kind, sym.k)]
        if sym.kind is Kind.ALPHA:
            lo, hi = (sym.k - 1) * a, sym.k * a
            out_u.update(mu * b + cu for b in bu if lo <= b <= hi)
            out_c.update(mc * b + cc for b in bc)
        else:
            lo, hi = M * a, ONE
            out_u.update(mu * b + cu for b in bu if lo <= b <= hi)
            clo, chi = Fraction(sym.k - 1, M), Fraction(sym.k, M)
            out_c.update(mc * b + cc for b in bc if clo <= b <= chi)
        out_s.update(ms * b + cs for b in bs)
    gu = tuple(sorted(out_u))
    gc = tuple(sorted(out_c))
    gs = tuple(sorted(out_s))
    pu, pc, ps = _axis_positions(gu), _axis_positions(gc), _axis_positions(gs)

    nu, nc, ns = len(gu) - 1, len(gc) - 1, len(gs) - 1
    out = [[[ZERO] * ns for _ in range(nc)] for _ in range(nu)]

    ustrip = _strip_index(bu, u_edges[:-1] + [ONE])
    cstrip = _strip_index(bc, c_edges)

    for i, (u0, u1) in enumerate(zip(bu, bu[1:])):
        si = ustrip[i]
        alpha = si < M
        for j, (c0, c1) in enumerate(zip(bc, bc[1:])):
            if alpha:
                sym = (Kind.ALPHA, si + 1)
            else:
                sym = (Kind.BETA, cstrip[j] + 1)
            (mu, cu), (mc, cc), (ms, cs) = affines[sym]
            iu0 = pu[mu * u0 + cu]
            iu1 = pu[mu * u1 + cu]
            jc0 = pc[mc * c0 + cc]
            jc1 = pc[mc * c1 + cc]
            row = vals[i][j]
            for k, (s0, s1) in enumerate(zip(bs, bs[1:])):
                v = row[k]
                if not v:
                    continue
                ks0 = ps[ms * s0 + cs]
                ks1 = ps[ms * s1 + cs]
                for ii in range(iu0, iu1):
                    plane = out[ii]
                    for jj in range(jc0, jc1):
                        cell = plane[jj]
                        for kk in range(ks0, ks1):
                            cell[kk] = v
    return PCFun3D(gu, gc, gs,
                   tuple(tuple(tuple(r) for r in p) for p in out))


def p_full_3d_n(params: BakerParams, F: PCFun3D, n: int) -> PCFun3D:
    for _ in range(n):
        F = p_full_3d(params, F)
    return F


def p_full_2d(params: BakerParams, h: PCFun2D,
              region_weight: tuple[Fraction, Fraction] | None = None) -> PCFun2D:
    """Transfer operator of the 2D map on (x_u, x_c), as a pushforward with
    Jacobian weights (the 2D map is not invertible, so branch images
    overlap and contributions accumulate).

    `region_weight` multiplies the input by (w_alpha, w_beta) per region
    before pushing; this realizes weighted operators like the stable-slope
    cocycle used by `fiber_average_decay_check`.
    """
    M, a = params.M, params.a
    u_edges = [k * a for k in range(M + 1)] + [ONE]
    c_edges = [Fraction(k, M) for k in range(M + 1)]
    bu = merge_breakpoints(h.bps_x, u_edges)
    bc = merge_breakpoints(h.bps_y, c_edges)
    vals = h.on_grid(bu, bc)

    syms = all_symbols(params)
    affines = {(s.kind, s.k): branch_affine(params, s) for s in syms}
    inv_det = {}
    for s in syms:
        (mu, _), (mc, _), _ = affines[(s.kind, s.k)]
        inv_det[(s.kind, s.k)] = 1 / (mu * mc)

    out_u, out_c = set(), set()
    for sym in syms:
        (mu, cu), (mc, cc), _ = affines[(sym.kind, sym.k)]
        if sym.kind is Kind.ALPHA:
            lo, hi = (sym.k - 1) * a, sym.k * a
            out_u.update(mu * b + cu for b in bu if lo <= b <= hi)
            out_c.update(mc * b + cc for b in bc)
        else:
            out_u.update(mu * b + cu for b in bu if M * a <= b <= 1)
            clo, chi = Fraction(sym.k - 1, M), Fraction(sym.k, M)
            out_c.update(mc * b + cc for b in bc if clo <= b <= chi)
    gu, gc = tuple(sorted(out_u)), tuple(sorted(out_c))
    pu, pc = _axis_positions(gu), _axis_positions(gc)
    nu, nc = len(gu) - 1, len(gc) - 1
    out = [[ZERO] * nc for _ in range(nu)]

    ustrip = _strip_index(bu, u_edges[:-1] + [ONE])
    cstrip = _strip_index(bc, c_edges)
    w_alpha, w_beta = region_weight if region_weight else (ONE, ONE)

    for i, (u0, u1) in enumerate(zip(bu, bu[1:])):
        si = ustrip[i]
        alpha = si < M
        for j, (c0, c1) in enumerate(zip(bc, bc[1:])):
            v = vals[i][j]
            if not v:
                continue
            sym = (Kind.ALPHA, si + 1) if alpha else (Kind.BETA, cstrip[j] + 1)
            (mu, cu), (mc, cc), _ = affines[sym]
            weight = (w_alpha if alpha else w_beta) * inv_det[sym]
            iu0, iu1 = pu[mu * u0 + cu], pu[mu * u1 + cu]
            jc0, jc1 = pc[mc * c0 + cc], pc[mc * c1 + cc]
            add = v * weight
            for ii in range(iu0, iu1):
                row = out[ii]
                for jj in range(jc0, jc1):
                    row[jj] += add
    return PCFun2D(gu, gc, tuple(tuple(r) for r in out))


# ---------------------------------------------------------------------------
# projection split P = P_* + P_10 + P_01 + P_00

def pi0(F: PCFun3D) -> PCFun3D:
    """Projection onto the x_c-average component: average over x_c per
    (x_u, x_s) cell, re-tensored with the constant function.  The result is
    constant in x_c and carries the trivial x_c grid."""
    nc = len(F.bps_c) - 1
    widths = [c1 - c0 for c0, c1 in zip(F.bps_c, F.bps_c[1:])]
    vals = []
    for plane in F.values:
        ns = len(plane[0])
        avg_row = tuple(sum((plane[j][k] * widths[j] for j in range(nc)), ZERO)
                        for k in range(ns))
        vals.append((avg_row,))
    return PCFun3D(F.bps_u, (ZERO, ONE), F.bps_s, tuple(vals))


def component_split_apply(which: str, params: BakerParams, F: PCFun3D) -> PCFun3D:
    """Apply one of P_*, P_01, P_10, P_00 (built from pi0 and the full P)."""
    P = lambda G: p_full_3d(params, G)  # noqa: E731
    proj = {"star": (True, True), "01": (True, False),
            "10": (False, True), "00": (False, False)}
    if which not in proj:
        raise ValueError("which must be one of star, 01, 10, 00")
    complement_out, complement_in = proj[which]
    G = F - pi0(F) if complement_in else pi0(F)
    H = P(G)
    return H - pi0(H) if complement_out else pi0(H)


def p_star_n(params: BakerParams, F: PCFun3D, n: int) -> PCFun3D:
    for _ in range(n):
        F = component_split_apply("star", params, F)
    return F


def p00_n(params: BakerParams, F: PCFun3D, n: int) -> PCFun3D:
    for _ in range(n):
        F = component_split_apply("00", params, F)
    return F


# ---------------------------------------------------------------------------
# tensor-component actions (M = 2, mostly neutral)

def _pullback_2d(u: PCFun2D, mx: Fraction, cx: Fraction,
                 my: Fraction, cy: Fraction) -> PCFun2D:
    """v(x, y) = u(mx*x + cx, my*y + cy) where both arguments lie in [0,1],
    zero outside (the rectangle convention for transported 2D factors)."""
    def axis(bps, m, c):
        pts = {ZERO, ONE}
        for b in bps:
            t = (b - c) / m
            if 0 <= t <= 1:
                pts.add(t)
        for edge in (ZERO, ONE):
            t = (edge - c) / m
            if 0 < t < 1:
                pts.add(t)
        return tuple(sorted(pts))

    bx = axis(u.bps_x, mx, cx)
    by = axis(u.bps_y, my, cy)
    vals = []
    for x0, x1 in zip(bx, bx[1:]):
        xm = mx * (x0 + x1) / 2 + cx
        row = []
        inside_x = 0 <= xm <= 1
        for y0, y1 in zip(by, by[1:]):
            ym = my * (y0 + y1) / 2 + cy
            if inside_x and 0 <= ym <= 1:
                row.append(u(xm, ym))
            else:
                row.append(ZERO)
        vals.append(tuple(row))
    return PCFun2D(bx, by, tuple(vals))


def _require_neutral2(params: BakerParams) -> None:
    if params.M != 2 or params.a != Fraction(1, 4) or params.b != Fraction(1, 4):
        raise ValueError("tensor-component formulas are the M = 2 neutral case")


def _pull_alpha(u: PCFun2D) -> tuple[PCFun2D, PCFun2D]:
    # inverse branch factors on (x_u, x_s): (x_u/4, 2 x_s) and ((x_u+1)/4, 2 x_s)
    q = Fraction(1, 4)
    return (_pullback_2d(u, q, ZERO, Fraction(2), ZERO),
            _pullback_2d(u, q, q, Fraction(2), ZERO))


def _pull_beta(u: PCFun2D) -> tuple[PCFun2D, PCFun2D]:
    # ((x_u+1)/2, 4 x_s - 2) and ((x_u+1)/2, 4 x_s - 3)
    h = HALF
    return (_pullback_2d(u, h, h, Fraction(4), Fraction(-2)),
            _pullback_2d(u, h, h, Fraction(4), Fraction(-3)))


def _tc_add(waves: dict, key, u: PCFun2D) -> None:
    if key in waves:
        waves[key] = waves[key] + u
    else:
        waves[key] = u


def p_hat_alpha(params: BakerParams, comp) -> "TensorComponents":
    """Tensor action of the alpha-branch part: level l components rise to
    level l+1; the x_c-average component feeds the level-1 wavelet with the
    antisymmetric combination of the two alpha pullbacks."""
    from .haar import TensorComponents
    _require_neutral2(params)
    waves: dict = {}
    for (l, k), u in comp.waves.items():
        a1, a2 = _pull_alpha(u)
        _tc_add(waves, (l + 1, k), a1)
        _tc_add(waves, (l + 1, k + 2 ** (l - 1)), a2)
    zero00 = PCFun2D.constant(0)
    if not comp.component00.is_zero():
        a1, a2 = _pull_alpha(comp.component00)
        _tc_add(waves, (1, 0), (a1 - a2) * HALF)
    waves = {key: u for key, u in waves.items() if not u.is_zero()}
    return TensorComponents(zero00, waves)


def p_hat_beta(params: BakerParams, comp) -> "TensorComponents":
    """Tensor action of the complementary part: level l+1 folds down to
    level l, level 1 lands in the x_c-average, and the x_c-average maps to
    itself through the beta pullbacks plus the symmetric alpha mean (the
    piece the projection split books on the H_0 -> H_0 block)."""
    from .haar import TensorComponents
    _require_neutral2(params)
    waves: dict = {}
    comp00 = PCFun2D.constant(0)
    for (l, k), u in comp.waves.items():
        b1, b2 = _pull_beta(u)
        if l == 1:
            comp00 = comp00 + b1 - b2
        elif k < 2 ** (l - 2):
            _tc_add(waves, (l - 1, k), b1)
        else:
            _tc_add(waves, (l - 1, k - 2 ** (l - 2)), b2)
    if not comp.component00.is_zero():
        b1, b2 = _pull_beta(comp.component00)
        a1, a2 = _pull_alpha(comp.component00)
        comp00 = comp00 + b1 + b2 + (a1 + a2) * HALF
    waves = {key: u for key, u in waves.items() if not u.is_zero()}
    return TensorComponents(comp00, waves)


def tensor_components_add(x, y):
    from .haar import TensorComponents
    waves = dict(x.waves)
    for key, u in y.waves.items():
        _tc_add(waves, key, u)
    waves = {key: u for key, u in waves.items() if not u.is_zero()}
    return TensorComponents(x.component00 + y.component00, waves)


# ---------------------------------------------------------------------------
# fiber-average decay

def xs_fiber_averages_zero(u: PCFun3D) -> bool:
    widths = [s1 - s0 for s0, s1 in zip(u.bps_s, u.bps_s[1:])]
    for plane in u.values:
        for row in plane:
            if sum((v * w for v, w in zip(row, widths)), ZERO) != 0:
                return False
    return True


def xs_first_moment(u: PCFun3D) -> PCFun2D:
    """m1(x_u, x_c) = integral of u * x_s over the stable fiber."""
    vals = []
    for plane in u.values:
        rows = []
        for row in plane:
            total = ZERO
            for v, s0, s1 in zip(row, u.bps_s, u.bps_s[1:]):
                total += v * (s1 ** 2 - s0 ** 2) / 2
            rows.append(total)
        vals.append(tuple(rows))
    return PCFun2D(u.bps_u, u.bps_c, tuple(vals))


def fiber_average_decay_check(params: BakerParams, u: PCFun3D,
                              v_affine: tuple, n_max: int,
                              theta: float = 1.0,
                              holder_norm: float | None = None) -> list[dict]:
    """Exact series <P^n u, v> for u with vanishing stable-fiber averages
    and v affine, with the bound 2^(-theta n) ||u||_L1 ||v||_Ctheta attached.

    For such u only the x_s-linear part of v survives the pairing, and the
    x_s coordinate of f^n is affine along each (x_u, x_c) cylinder with a
    slope cocycle depending on the region itinerary alone; the pairing
    therefore collapses to iterating the slope-weighted 2D transfer
    operator against the first fiber moment of u.  Direct 3D iteration is
    cross-checked in the tests (its grids grow too fast for n this deep).
    """
    if not params.is_measure_preserving:
        raise ValueError("requires a + b = 1/M")
    if not xs_fiber_averages_zero(u):
        raise FiberAverageNonZero("stable-fiber averages of u must vanish")
    c0, cu, cc, cs = map(frac, v_affine)
    M, b = params.M, params.b
    sigma = (1 - M * b, b)  # stable slope on alpha / beta regions

    u_l1 = float(u.l1_norm())
    # Euclidean Lipschitz constant of the affine map; float is fine for a bound
    lip = float(np.sqrt(float(cu) ** 2 + float(cc) ** 2 + float(cs) ** 2))
    vmax = max(abs(float(c0 + cu * x + cc * y + cs * z))
               for x in (0, 1) for y in (0, 1) for z in (0, 1))
    v_norm = holder_norm if holder_norm is not None else vmax + lip

    h = xs_first_moment(u)
    rows = []
    for n in range(n_max + 1):
        value = cs * h.integral()
        bound = 2.0 ** (-theta * n) * u_l1 * v_norm
        rows.append({"n": n, "value": value, "bound": bound,
                     "ok": abs(float(value)) <= bound * (1 + 1e-12)})
        if n < n_max:
            h = p_full_2d(params, h, region_weight=sigma).simplify()
    return rows
