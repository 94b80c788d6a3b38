"""Exact piecewise-constant function algebra with rational breakpoints.

Functions live on [0,1] (or [0,1]^2, [0,1]^3 as products of axis grids).
Cells are half-open [b_i, b_{i+1}) with the last cell closed at 1; point
evaluation at a breakpoint returns the right-hand cell's value.  All
breakpoints and values are `fractions.Fraction`, so every operation here
is exact.  Floats only enter through the Monte Carlo fast paths elsewhere.

`PAFun1D` is the one-dimensional piecewise-*affine* sibling used as an
independent grid oracle for affine observables like x - 1/2; it shares the
breakpoint conventions.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionMismatch(ValueError):
    pass


class NotMAdic(ValueError):
    pass


class NotInKLevel(ValueError):
    """Function is not measurable w.r.t. the requested uniform partition."""


def frac(x) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to Fraction (exact)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


def _check_breakpoints(bps: Sequence[Fraction]) -> None:
    if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
        raise ValueError("breakpoints must start at 0 and end at 1")
    for a, b in zip(bps, bps[1:]):
        if not a < b:
            raise ValueError("breakpoints must be strictly increasing")


def _cell_index(bps: Sequence[Fraction], x: Fraction) -> int:
    # right-hand cell convention; x == 1 belongs to the last cell
    if x >= 1:
        return len(bps) - 2
    return bisect_right(bps, x) - 1


def merge_breakpoints(*lists: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(sorted(set().union(*map(set, lists))))


@dataclass(frozen=True)
class PCFun1D:
    """Piecewise-constant function on [0,1]: values[i] on [bps[i], bps[i+1])."""

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        _check_breakpoints(self.breakpoints)
        if len(self.values) != len(self.breakpoints) - 1:
            raise ValueError("need exactly one value per cell")

    @staticmethod
    def build(breakpoints: Iterable, values: Iterable) -> "PCFun1D":
        return PCFun1D(tuple(frac(b) for b in breakpoints),
                       tuple(frac(v) for v in values))

    @staticmethod
    def constant(c) -> "PCFun1D":
        return PCFun1D((ZERO, ONE), (frac(c),))

    @staticmethod
    def zero() -> "PCFun1D":
        return PCFun1D.constant(0)

    @staticmethod
    def uniform(values: Iterable) -> "PCFun1D":
        vals = tuple(frac(v) for v in values)
        n = len(vals)
        return PCFun1D(tuple(Fraction(i, n) for i in range(n + 1)), vals)

    def __call__(self, x) -> Fraction:
        return self.values[_cell_index(self.breakpoints, frac(x))]

    def refine(self, extra: Iterable) -> "PCFun1D":
        """Same function on a finer grid; inner products are invariant."""
        bps = merge_breakpoints(self.breakpoints,
                                [frac(b) for b in extra if 0 <= frac(b) <= 1])
        mids = [(a + b) / 2 for a, b in zip(bps, bps[1:])]
        return PCFun1D(bps, tuple(self(m) for m in mids))

    def on_grid(self, bps: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Cell values on a grid that refines this function's grid."""
        return tuple(self((a + b) / 2) for a, b in zip(bps, bps[1:]))

    def simplify(self) -> "PCFun1D":
        """Merge adjacent cells with equal values (canonical form)."""
        bps = [self.breakpoints[0]]
        vals = []
        for b, v in zip(self.breakpoints[1:], self.values):
            if vals and v == vals[-1]:
                bps[-1] = b
            else:
                vals.append(v)
                bps.append(b)
        return PCFun1D(tuple(bps), tuple(vals))

    def equals(self, other: "PCFun1D") -> bool:
        bps = merge_breakpoints(self.breakpoints, other.breakpoints)
        return self.on_grid(bps) == other.on_grid(bps)

    def __add__(self, other: "PCFun1D") -> "PCFun1D":
        bps = merge_breakpoints(self.breakpoints, other.breakpoints)
        a, b = self.on_grid(bps), other.on_grid(bps)
        return PCFun1D(bps, tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "PCFun1D") -> "PCFun1D":
        return self + (other * -1)

    def __mul__(self, scalar) -> "PCFun1D":
        s = frac(scalar)
        return PCFun1D(self.breakpoints, tuple(s * v for v in self.values))

    __rmul__ = __mul__

    def __neg__(self) -> "PCFun1D":
        return self * -1

    def sup_norm(self) -> Fraction:
        return max(abs(v) for v in self.values)

    def l1_norm(self) -> Fraction:
        return sum((abs(v) * (b - a) for a, b, v in
                    zip(self.breakpoints, self.breakpoints[1:], self.values)),
                   ZERO)

    def is_uniform_level(self, base: int) -> int | None:
        """Return L if the grid is exactly the uniform base**L grid, else None."""
        n = len(self.values)
        L, m = 0, 1
        while m < n:
            m *= base
            L += 1
        if m != n:
            return None
        expected = tuple(Fraction(i, n) for i in range(n + 1))
        return L if self.breakpoints == expected else None


def inner_product(f: PCFun1D, g: PCFun1D) -> Fraction:
    """Exact Lebesgue inner product via the common refinement."""
    if not isinstance(f, PCFun1D) or not isinstance(g, PCFun1D):
        raise DimensionMismatch("inner_product pairs one-dimensional PC "
                                "functions; use the _2d/_3d variants")
    bps = merge_breakpoints(f.breakpoints, g.breakpoints)
    a, b = f.on_grid(bps), g.on_grid(bps)
    return sum((x * y * (hi - lo) for x, y, lo, hi in
                zip(a, b, bps, bps[1:])), ZERO)


def mean(f: PCFun1D) -> Fraction:
    return sum((v * (hi - lo) for v, lo, hi in
                zip(f.values, f.breakpoints, f.breakpoints[1:])), ZERO)


def project_zero_mean(f: PCFun1D) -> PCFun1D:
    m = mean(f)
    return PCFun1D(f.breakpoints, tuple(v - m for v in f.values))


def axpy(scalar, f: PCFun1D, g: PCFun1D) -> PCFun1D:
    """scalar * f + g, exact."""
    if type(f) is not type(g):
        raise DimensionMismatch("axpy needs operands of the same dimension")
    return f * scalar + g


def from_affine(slope, intercept, level: int, base: int = 2) -> PCFun1D:
    """Cell averages of slope*x + intercept on the uniform base**level grid."""
    m, c = frac(slope), frac(intercept)
    n = base ** level
    vals = []
    for i in range(n):
        lo, hi = Fraction(i, n), Fraction(i + 1, n)
        vals.append(m * (lo + hi) / 2 + c)
    return PCFun1D.uniform(vals)


def restrict_to_m_adic(f: PCFun1D, base: int, level: int) -> tuple[Fraction, ...]:
    """Values of f on the uniform base**level grid, or raise NotInKLevel.

    Requires f to be constant on every cell of that partition.
    """
    n = base ** level
    grid = tuple(Fraction(i, n) for i in range(n + 1))
    for b in f.simplify().breakpoints:
        if (b * n).denominator != 1:
            raise NotInKLevel(f"breakpoint {b} is not {base}-adic at level {level}")
    return f.on_grid(grid)


def osc_norm_star(f: PCFun1D, M: int, level: int) -> Fraction:
    """Max over level-(level-1) cells of the oscillation (sup - inf) of f.

    f must be measurable w.r.t. the uniform M**level partition.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    vals = restrict_to_m_adic(f, M, level)
    best = ZERO
    for i in range(M ** (level - 1)):
        block = vals[i * M:(i + 1) * M]
        best = max(best, max(block) - min(block))
    return best


# ---------------------------------------------------------------------------
# product grids in 2D / 3D

def _nested_tuple(values, depth: int):
    if depth == 0:
        return frac(values)
    return tuple(_nested_tuple(v, depth - 1) for v in values)


@dataclass(frozen=True)
class PCFun2D:
    """Piecewise-constant on [0,1]^2 over a product grid (axes: x_u, x_s)."""

    bps_x: tuple[Fraction, ...]
    bps_y: tuple[Fraction, ...]
    values: tuple[tuple[Fraction, ...], ...]  # values[i][j] on cell i of x, j of y

    def __post_init__(self):
        _check_breakpoints(self.bps_x)
        _check_breakpoints(self.bps_y)
        if len(self.values) != len(self.bps_x) - 1 or any(
                len(row) != len(self.bps_y) - 1 for row in self.values):
            raise ValueError("value tensor shape does not match the grid")

    @staticmethod
    def build(bps_x, bps_y, values) -> "PCFun2D":
        return PCFun2D(tuple(frac(b) for b in bps_x),
                       tuple(frac(b) for b in bps_y),
                       _nested_tuple(values, 2))

    @staticmethod
    def constant(c) -> "PCFun2D":
        return PCFun2D((ZERO, ONE), (ZERO, ONE), ((frac(c),),))

    def __call__(self, x, y) -> Fraction:
        i = _cell_index(self.bps_x, frac(x))
        j = _cell_index(self.bps_y, frac(y))
        return self.values[i][j]

    def on_grid(self, bps_x, bps_y):
        mx = [(a + b) / 2 for a, b in zip(bps_x, bps_x[1:])]
        my = [(a + b) / 2 for a, b in zip(bps_y, bps_y[1:])]
        ix = [_cell_index(self.bps_x, m) for m in mx]
        iy = [_cell_index(self.bps_y, m) for m in my]
        return tuple(tuple(self.values[i][j] for j in iy) for i in ix)

    def equals(self, other: "PCFun2D") -> bool:
        bx = merge_breakpoints(self.bps_x, other.bps_x)
        by = merge_breakpoints(self.bps_y, other.bps_y)
        return self.on_grid(bx, by) == other.on_grid(bx, by)

    def simplify(self) -> "PCFun2D":
        """Drop grid lines across which all values agree (canonical form);
        iterated pushforwards otherwise accumulate redundant breakpoints."""
        cols = list(zip(*self.values))  # cols[j][i] = values[i][j]
        keep_x = [0] + [i for i in range(1, len(self.values))
                        if self.values[i] != self.values[i - 1]]
        rows = [self.values[i] for i in keep_x]
        bx = tuple([self.bps_x[i] for i in keep_x] + [self.bps_x[-1]])
        cols = list(zip(*rows))
        keep_y = [0] + [j for j in range(1, len(cols))
                        if cols[j] != cols[j - 1]]
        by = tuple([self.bps_y[j] for j in keep_y] + [self.bps_y[-1]])
        vals = tuple(tuple(row[j] for j in keep_y) for row in rows)
        return PCFun2D(bx, by, vals)

    def __add__(self, other: "PCFun2D") -> "PCFun2D":
        bx = merge_breakpoints(self.bps_x, other.bps_x)
        by = merge_breakpoints(self.bps_y, other.bps_y)
        a, b = self.on_grid(bx, by), other.on_grid(bx, by)
        vals = tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))
        return PCFun2D(bx, by, vals)

    def __sub__(self, other: "PCFun2D") -> "PCFun2D":
        return self + (other * -1)

    def __mul__(self, scalar) -> "PCFun2D":
        s = frac(scalar)
        return PCFun2D(self.bps_x, self.bps_y,
                       tuple(tuple(s * v for v in row) for row in self.values))

    __rmul__ = __mul__

    def integral(self) -> Fraction:
        total = ZERO
        for i, (x0, x1) in enumerate(zip(self.bps_x, self.bps_x[1:])):
            for j, (y0, y1) in enumerate(zip(self.bps_y, self.bps_y[1:])):
                total += self.values[i][j] * (x1 - x0) * (y1 - y0)
        return total

    def l1_norm(self) -> Fraction:
        total = ZERO
        for i, (x0, x1) in enumerate(zip(self.bps_x, self.bps_x[1:])):
            for j, (y0, y1) in enumerate(zip(self.bps_y, self.bps_y[1:])):
                total += abs(self.values[i][j]) * (x1 - x0) * (y1 - y0)
        return total

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.values for v in row)


@dataclass(frozen=True)
class PCFun3D:
    """Piecewise-constant on [0,1]^3 over a product grid (axes: x_u, x_c, x_s)."""

    bps_u: tuple[Fraction, ...]
    bps_c: tuple[Fraction, ...]
    bps_s: tuple[Fraction, ...]
    values: tuple  # values[i][j][k]

    def __post_init__(self):
        for bps in (self.bps_u, self.bps_c, self.bps_s):
            _check_breakpoints(bps)
        nu, nc, ns = len(self.bps_u) - 1, len(self.bps_c) - 1, len(self.bps_s) - 1
        if len(self.values) != nu or any(len(p) != nc for p in self.values) or any(
                len(r) != ns for p in self.values for r in p):
            raise ValueError("value tensor shape does not match the grid")

    @staticmethod
    def build(bps_u, bps_c, bps_s, values) -> "PCFun3D":
        return PCFun3D(tuple(frac(b) for b in bps_u),
                       tuple(frac(b) for b in bps_c),
                       tuple(frac(b) for b in bps_s),
                       _nested_tuple(values, 3))

    @staticmethod
    def constant(c) -> "PCFun3D":
        g = (ZERO, ONE)
        return PCFun3D(g, g, g, (((frac(c),),),))

    @staticmethod
    def from_xc(f: PCFun1D) -> "PCFun3D":
        """Lift a function of x_c to the cube."""
        g = (ZERO, ONE)
        vals = (tuple((v,) for v in f.values),)
        return PCFun3D(g, f.breakpoints, g, vals)

    def __call__(self, xu, xc, xs) -> Fraction:
        i = _cell_index(self.bps_u, frac(xu))
        j = _cell_index(self.bps_c, frac(xc))
        k = _cell_index(self.bps_s, frac(xs))
        return self.values[i][j][k]

    def on_grid(self, bu, bc, bs):
        iu = [_cell_index(self.bps_u, (a + b) / 2) for a, b in zip(bu, bu[1:])]
        ic = [_cell_index(self.bps_c, (a + b) / 2) for a, b in zip(bc, bc[1:])]
        isx = [_cell_index(self.bps_s, (a + b) / 2) for a, b in zip(bs, bs[1:])]
        return tuple(tuple(tuple(self.values[i][j][k] for k in isx)
                           for j in ic) for i in iu)

    def equals(self, other: "PCFun3D") -> bool:
        bu = merge_breakpoints(self.bps_u, other.bps_u)
        bc = merge_breakpoints(self.bps_c, other.bps_c)
        bs = merge_breakpoints(self.bps_s, other.bps_s)
        return self.on_grid(bu, bc, bs) == other.on_grid(bu, bc, bs)

    def __add__(self, other: "PCFun3D") -> "PCFun3D":
        bu = merge_breakpoints(self.bps_u, other.bps_u)
        bc = merge_breakpoints(self.bps_c, other.bps_c)
        bs = merge_breakpoints(self.bps_s, other.bps_s)
        a, b = self.on_grid(bu, bc, bs), other.on_grid(bu, bc, bs)
        vals = tuple(tuple(tuple(x + y for x, y in zip(ra, rb))
                           for ra, rb in zip(pa, pb)) for pa, pb in zip(a, b))
        return PCFun3D(bu, bc, bs, vals)

    def __sub__(self, other: "PCFun3D") -> "PCFun3D":
        return self + (other * -1)

    def __mul__(self, scalar) -> "PCFun3D":
        s = frac(scalar)
        vals = tuple(tuple(tuple(s * v for v in row) for row in plane)
                     for plane in self.values)
        return PCFun3D(self.bps_u, self.bps_c, self.bps_s, vals)

    __rmul__ = __mul__

    def __neg__(self) -> "PCFun3D":
        return self * -1

    def integral(self) -> Fraction:
        total = ZERO
        for i, (u0, u1) in enumerate(zip(self.bps_u, self.bps_u[1:])):
            for j, (c0, c1) in enumerate(zip(self.bps_c, self.bps_c[1:])):
                for k, (s0, s1) in enumerate(zip(self.bps_s, self.bps_s[1:])):
                    total += self.values[i][j][k] * (u1 - u0) * (c1 - c0) * (s1 - s0)
        return total

    def l1_norm(self) -> Fraction:
        total = ZERO
        for i, (u0, u1) in enumerate(zip(self.bps_u, self.bps_u[1:])):
            for j, (c0, c1) in enumerate(zip(self.bps_c, self.bps_c[1:])):
                for k, (s0, s1) in enumerate(zip(self.bps_s, self.bps_s[1:])):
                    total += abs(self.values[i][j][k]) * (u1 - u0) * (c1 - c0) * (s1 - s0)
        return total


def inner_product_2d(f: PCFun2D, g: PCFun2D) -> Fraction:
    bx = merge_breakpoints(f.bps_x, g.bps_x)
    by = merge_breakpoints(f.bps_y, g.bps_y)
    a, b = f.on_grid(bx, by), g.on_grid(bx, by)
    total = ZERO
    for i, (x0, x1) in enumerate(zip(bx, bx[1:])):
        for j, (y0, y1) in enumerate(zip(by, by[1:])):
            total += a[i][j] * b[i][j] * (x1 - x0) * (y1 - y0)
    return total


def inner_product_3d(f: PCFun3D, g: PCFun3D) -> Fraction:
    bu = merge_breakpoints(f.bps_u, g.bps_u)
    bc = merge_breakpoints(f.bps_c, g.bps_c)
    bs = merge_breakpoints(f.bps_s, g.bps_s)
    a, b = f.on_grid(bu, bc, bs), g.on_grid(bu, bc, bs)
    total = ZERO
    for i, (u0, u1) in enumerate(zip(bu, bu[1:])):
        for j, (c0, c1) in enumerate(zip(bc, bc[1:])):
            du = u1 - u0
            for k, (s0, s1) in enumerate(zip(bs, bs[1:])):
                total += a[i][j][k] * b[i][j][k] * du * (c1 - c0) * (s1 - s0)
    return total


def pair_with_affine_3d(f: PCFun3D, c0, cu, cc, cs) -> Fraction:
    """Exact <f, v> for affine v = c0 + cu*x_u + cc*x_c + cs*x_s.

    The integral of an affine function over a box is volume * value at the
    box midpoint.
    """
    c0, cu, cc, cs = map(frac, (c0, cu, cc, cs))
    total = ZERO
    for i, (u0, u1) in enumerate(zip(f.bps_u, f.bps_u[1:])):
        for j, (cc0, cc1) in enumerate(zip(f.bps_c, f.bps_c[1:])):
            for k, (s0, s1) in enumerate(zip(f.bps_s, f.bps_s[1:])):
                vol = (u1 - u0) * (cc1 - cc0) * (s1 - s0)
                mid = c0 + cu * (u0 + u1) / 2 + cc * (cc0 + cc1) / 2 + cs * (s0 + s1) / 2
                total += f.values[i][j][k] * vol * mid
    return total


# ---------------------------------------------------------------------------
# piecewise-affine oracle

@dataclass(frozen=True)
class PAFun1D:
    """Piecewise-affine function: slope[i]*x + intercept[i] on cell i.

    Used as the independent grid oracle for affine observables; the reduced
    transfer operator maps this class to itself exactly.
    """

    breakpoints: tuple[Fraction, ...]
    slopes: tuple[Fraction, ...]
    intercepts: tuple[Fraction, ...]

    def __post_init__(self):
        _check_breakpoints(self.breakpoints)
        if len(self.slopes) != len(self.breakpoints) - 1 or \
           len(self.intercepts) != len(self.slopes):
            raise ValueError("need one (slope, intercept) pair per cell")

    @staticmethod
    def affine(slope, intercept) -> "PAFun1D":
        return PAFun1D((ZERO, ONE), (frac(slope),), (frac(intercept),))

    def piece_at(self, x) -> tuple[Fraction, Fraction]:
        i = _cell_index(self.breakpoints, frac(x))
        return self.slopes[i], self.intercepts[i]

    def __call__(self, x) -> Fraction:
        m, c = self.piece_at(x)
        return m * frac(x) + c


def inner_product_pa(f: PAFun1D, g: PAFun1D) -> Fraction:
    """Exact integral of f*g (a piecewise quadratic) over [0,1]."""
    bps = merge_breakpoints(f.breakpoints, g.breakpoints)
    total = ZERO
    for lo, hi in zip(bps, bps[1:]):
        mid = (lo + hi) / 2
        mf, cf = f.piece_at(mid)
        mg, cg = g.piece_at(mid)
        a2, a1, a0 = mf * mg, mf * cg + mg * cf, cf * cg
        total += (a2 * (hi ** 3 - lo ** 3) / 3
                  + a1 * (hi ** 2 - lo ** 2) / 2
                  + a0 * (hi - lo))
    return total


def pa_mean(f: PAFun1D) -> Fraction:
    return inner_product_pa(f, PAFun1D.affine(0, 1))


# ---------------------------------------------------------------------------
# JSON wire format: fractions as "p/q" strings

def _frac_str(x: Fraction) -> str:
    return str(x)


def pcfun1d_to_json(f: PCFun1D) -> str:
    return json.dumps({"breakpoints": [_frac_str(b) for b in f.breakpoints],
                       "values": [_frac_str(v) for v in f.values]})


def pcfun1d_from_json(s: str) -> PCFun1D:
    obj = json.loads(s)
    return PCFun1D.build(obj["breakpoints"], obj["values"])


def pcfun3d_to_json(f: PCFun3D) -> str:
    return json.dumps({
        "xu": [_frac_str(b) for b in f.bps_u],
        "xc": [_frac_str(b) for b in f.bps_c],
        "xs": [_frac_str(b) for b in f.bps_s],
        "values": [[[_frac_str(v) for v in row] for row in plane]
                   for plane in f.values],
    })


def pcfun3d_from_json(s: str) -> PCFun3D:
    obj = json.loads(s)
    return PCFun3D.build(obj["xu"], obj["xc"], obj["xs"], obj["values"])
