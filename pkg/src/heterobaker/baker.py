"""The heterochaos baker maps on the square and the cube.

For an integer M >= 2 and parameters a, b in (0, 1/M), the 3D map has 2M
affine branches: M "alpha" branches on vertical strips of the x_u axis
(center coordinate contracts by 1/M, stable coordinate contracts by 1-Mb)
and M "beta" branches selected by the x_c strip (center expands by M,
stable contracts by b into disjoint slabs).  Lebesgue measure is preserved
exactly when a + b = 1/M.

Branch strips are half-open on the left, with the last strip closed at 1,
which makes classification total and deterministic.  All branch maps are
orientation-preserving and diagonal, so exact rational arithmetic commutes
with the geometry.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .pcfun import ONE, ZERO, frac


class BoundaryPoint(ValueError):
    """Raised by the inverse map on image-cell boundaries (a null set)."""


class CenterType(enum.Enum):
    MOSTLY_EXPANDING = "mostly-expanding"
    MOSTLY_NEUTRAL = "mostly-neutral"
    MOSTLY_CONTRACTING = "mostly-contracting"


class Kind(enum.Enum):
    ALPHA = "alpha"
    BETA = "beta"


@dataclass(frozen=True)
class Symbol:
    kind: Kind
    k: int  # 1-based branch index in {1, ..., M}

    def __str__(self):
        return f"{self.kind.value}{self.k}"


@dataclass(frozen=True)
class BakerParams:
    M: int
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be >= 2")
        object.__setattr__(self, "a", frac(self.a))
        object.__setattr__(self, "b", frac(self.b))
        lim = Fraction(1, self.M)
        if not (0 < self.a < lim and 0 < self.b < lim):
            raise ValueError(f"a and b must lie in (0, 1/{self.M})")

    @property
    def is_measure_preserving(self) -> bool:
        return self.a + self.b == Fraction(1, self.M)

    @property
    def center_type(self) -> CenterType:
        half = Fraction(1, 2 * self.M)
        if self.a < half:
            return CenterType.MOSTLY_EXPANDING
        if self.a == half:
            return CenterType.MOSTLY_NEUTRAL
        return CenterType.MOSTLY_CONTRACTING

    @staticmethod
    def neutral(M: int = 2) -> "BakerParams":
        h = Fraction(1, 2 * M)
        return BakerParams(M, h, h)


def classify(params: BakerParams, p) -> Symbol:
    """The unique branch symbol whose domain contains p in [0,1]^3."""
    xu, xc = frac(p[0]), frac(p[1])
    M, a = params.M, params.a
    if not (0 <= xu <= 1 and 0 <= xc <= 1):
        raise ValueError("point outside the cube")
    if xu < M * a:
        return Symbol(Kind.ALPHA, int(xu / a) + 1)
    k = min(int(xc * M) + 1, M)  # last beta strip closed at x_c = 1
    return Symbol(Kind.BETA, k)


def apply_tau(params: BakerParams, xu):
    """The piecewise-affine expanding factor map on [0,1]."""
    xu = frac(xu)
    M, a = params.M, params.a
    if xu < M * a:
        k = int(xu / a) + 1
        return (xu - (k - 1) * a) / a
    return (xu - M * a) / (1 - M * a)


def apply_f2(params: BakerParams, p):
    """One step of the 2D map on (x_u, x_c)."""
    xu, xc = frac(p[0]), frac(p[1])
    M = params.M
    sym = classify(params, (xu, xc, ZERO))
    if sym.kind is Kind.ALPHA:
        return (apply_tau(params, xu), xc / M + Fraction(sym.k - 1, M))
    return (apply_tau(params, xu), M * xc - sym.k + 1)


def apply_f3(params: BakerParams, p):
    """One step of the 3D map on (x_u, x_c, x_s)."""
    xu, xc, xs = frac(p[0]), frac(p[1]), frac(p[2])
    M, b = params.M, params.b
    sym = classify(params, (xu, xc, xs))
    yu, yc = apply_f2(params, (xu, xc))
    if sym.kind is Kind.ALPHA:
        return (yu, yc, (1 - M * b) * xs)
    return (yu, yc, b * xs + 1 + b * (sym.k - M - 1))


def apply_f3_inverse(params: BakerParams, p):
    """The a.e. inverse of the 3D map (requires a + b = 1/M).

    The branch is read off the image partition: x_s < 1 - Mb comes from an
    alpha branch (index from the x_c strip), otherwise from the beta branch
    whose x_s slab contains the point.  Raises BoundaryPoint on internal
    image-cell boundaries, where two preimages collide.
    """
    if not params.is_measure_preserving:
        raise ValueError("inverse is defined for measure-preserving parameters")
    xu, xc, xs = frac(p[0]), frac(p[1]), frac(p[2])
    M, a, b = params.M, params.a, params.b
    cut = 1 - M * b  # = Ma
    if xs < cut:
        # alpha_k with k from the x_c strip
        kf = xc * M
        if kf.denominator == 1 and 0 < kf < M:
            raise BoundaryPoint(f"x_c = {xc} lies on an alpha image seam")
        k = min(int(kf) + 1, M)
        return (a * xu + (k - 1) * a, M * xc - (k - 1), xs / (1 - M * b))
    off = (xs - cut) / b
    if off.denominator == 1 and 0 <= off < M:
        raise BoundaryPoint(f"x_s = {xs} lies on a beta slab seam")
    k = min(int(off) + 1, M)
    return ((1 - M * a) * xu + M * a,
            (xc + k - 1) / M,
            (xs - 1 - b * (k - M - 1)) / b)


def orbit(params: BakerParams, p, n: int, exact: bool = False) -> list:
    """[p, f(p), ..., f^n(p)].

    Exact mode keeps rationals and is the reference for short orbits.  The
    float mode is fast but inherits the usual caveat of binary arithmetic on
    piecewise-dyadic maps: when 1/a is a power of two the expanding
    coordinate sheds mantissa bits and long orbits degenerate; use the
    statistical samplers in `correlation` for distribution-level work.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if exact:
        pts = [(frac(p[0]), frac(p[1]), frac(p[2]))]
        for _ in range(n):
            pts.append(apply_f3(params, pts[-1]))
        return pts
    M = params.M
    a, b = float(params.a), float(params.b)
    Ma, Mb = M * a, M * b
    xu, xc, xs = float(p[0]), float(p[1]), float(p[2])
    pts = [(xu, xc, xs)]
    for _ in range(n):
        if xu < Ma:
            k = min(int(xu / a), M - 1)  # 0-based
            xu = (xu - k * a) / a
            xc = xc / M + k / M
            xs = (1.0 - Mb) * xs
        else:
            k = min(int(xc * M), M - 1)
            xu = (xu - Ma) / (1.0 - Ma)
            xc = M * xc - k
            xs = b * xs + 1.0 + b * (k + 1 - M - 1)
        # clamp <= 1 ulp drift; keeps the loop branch-free elsewhere
        xu = min(max(xu, 0.0), 1.0)
        xc = min(max(xc, 0.0), 1.0)
        xs = min(max(xs, 0.0), 1.0)
        pts.append((xu, xc, xs))
    return pts


def itinerary_stats(params: BakerParams, p=None, n: int = 10 ** 6,
                    seed: int | None = None) -> float:
    """Fraction of the first n steps spent in the alpha strips.

    With an explicit point the orbit is iterated directly (exact rationals
    when the point is rational and small n, floats otherwise).  With
    p=None a Lebesgue-random point is simulated through its branch
    itinerary, which for tau is an i.i.d. sequence (each alpha strip has
    probability a, the beta interval 1 - Ma); this is the faithful way to
    sample long orbits of maps whose float iteration degenerates.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    M, a = params.M, float(params.a)
    if p is None:
        rng = np.random.Generator(np.random.Philox(key=0 if seed is None else seed))
        hits = 0
        remaining = n
        while remaining:
            block = min(remaining, 1 << 22)
            hits += int((rng.random(block) < M * a).sum())
            remaining -= block
        return hits / n
    pts = orbit(params, p, n - 1)
    Ma = M * a
    return sum(1 for q in pts if q[0] < Ma) / n


# ---------------------------------------------------------------------------
# branch geometry: domains, images, exact tiling check

Box = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction],
            tuple[Fraction, Fraction]]


def all_symbols(params: BakerParams) -> list[Symbol]:
    return ([Symbol(Kind.ALPHA, k) for k in range(1, params.M + 1)] +
            [Symbol(Kind.BETA, k) for k in range(1, params.M + 1)])


def domain_box(params: BakerParams, sym: Symbol) -> Box:
    M, a = params.M, params.a
    if sym.kind is Kind.ALPHA:
        return (((sym.k - 1) * a, sym.k * a), (ZERO, ONE), (ZERO, ONE))
    return ((M * a, ONE),
            (Fraction(sym.k - 1, M), Fraction(sym.k, M)),
            (ZERO, ONE))


def image_box(params: BakerParams, sym: Symbol) -> Box:
    M, b = params.M, params.b
    if sym.kind is Kind.ALPHA:
        return ((ZERO, ONE),
                (Fraction(sym.k - 1, M), Fraction(sym.k, M)),
                (ZERO, 1 - M * b))
    lo = 1 + b * (sym.k - M - 1)
    return ((ZERO, ONE), (ZERO, ONE), (lo, lo + b))


def branch_affine(params: BakerParams, sym: Symbol):
    """Per-axis (slope, offset) of the branch map; all slopes positive."""
    M, a, b = params.M, params.a, params.b
    if sym.kind is Kind.ALPHA:
        return ((1 / a, -(sym.k - 1)),                     # x_u
                (Fraction(1, M), Fraction(sym.k - 1, M)),  # x_c
                (1 - M * b, ZERO))                         # x_s
    return ((1 / (1 - M * a), -(M * a) / (1 - M * a)),
            (Fraction(M), Fraction(1 - sym.k)),
            (b, 1 + b * (sym.k - M - 1)))


def _box_volume(box: Box) -> Fraction:
    v = ONE
    for lo, hi in box:
        v *= hi - lo
    return v


def tiling_report(params: BakerParams) -> dict:
    """Exact image-tiling and volume-preservation check.

    The 2M image boxes always tile the cube (the map is a.e. invertible for
    every parameter pair); per-branch volume preservation holds iff
    a + b = 1/M, so `passed` is the exact measure-preservation test.
    """
    syms = all_symbols(params)
    images = [image_box(params, s) for s in syms]
    total = sum((_box_volume(ib) for ib in images), ZERO)

    def overlap(b1: Box, b2: Box) -> bool:
        return all(max(l1, l2) < min(h1, h2)
                   for (l1, h1), (l2, h2) in zip(b1, b2))

    disjoint = not any(overlap(images[i], images[j])
                       for i in range(len(images)) for j in range(i + 1, len(images)))
    volume_match = all(_box_volume(image_box(params, s)) ==
                       _box_volume(domain_box(params, s)) for s in syms)
    return {
        "images_disjoint": disjoint,
        "total_image_volume": total,
        "per_branch_volume_preserved": volume_match,
        "passed": disjoint and total == 1 and volume_match,
    }
