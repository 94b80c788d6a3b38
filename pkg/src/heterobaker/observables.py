"""Observables on the cube and the small expression grammar of the CLI.

The grammar is deliberately tiny: variables xu, xc, xs, integer and p/q
rational constants, +, -, *, parentheses, min(,)/max(,), plus the named
presets "affine-center" (x_c - 1/2) and "staircase-4" (the increasing
staircase -3/4, -1/4, 1/4, 3/4 on quarters of x_c).  Everything the
grammar can build is evaluated exactly where the exact routes need it;
anything richer belongs to the library API.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .pcfun import PCFun1D


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Observable3D:
    """A bounded observable on [0,1]^3 with optional exact structure.

    `fn` evaluates on numpy arrays.  `xc_affine` is (slope, intercept) when
    the observable is an affine function of x_c alone; `xc_pc` holds an
    exact piecewise-constant representative when it is a PC function of
    x_c alone.  Hoelder data, when known, feeds decay bounds.
    """

    name: str
    fn: Callable
    xc_affine: tuple[Fraction, Fraction] | None = None
    xc_pc: PCFun1D | None = None
    theta: float | None = None
    holder_norm: float | None = None

    def __call__(self, xu, xc, xs):
        return self.fn(xu, xc, xs)


def affine_center() -> Observable3D:
    # C^1 norm of x - 1/2 on [0,1]: sup 1/2, Lipschitz 1
    return Observable3D("affine-center",
                        lambda xu, xc, xs: xc - 0.5,
                        xc_affine=(Fraction(1), Fraction(-1, 2)),
                        theta=1.0, holder_norm=1.5)


def staircase4() -> Observable3D:
    pc = PCFun1D.uniform([Fraction(-3, 4), Fraction(-1, 4),
                          Fraction(1, 4), Fraction(3, 4)])

    def fn(xu, xc, xs):
        idx = np.minimum((np.asarray(xc) * 4).astype(np.int64), 3)
        table = np.array([-0.75, -0.25, 0.25, 0.75])
        return table[idx]

    return Observable3D("staircase-4", fn, xc_pc=pc)


def pc_center(pc: PCFun1D, name: str = "pc-observable") -> Observable3D:
    """Observable that is an exact PC function of x_c."""
    edges = np.array([float(b) for b in pc.breakpoints])
    table = np.array([float(v) for v in pc.values])

    def fn(xu, xc, xs):
        idx = np.clip(np.searchsorted(edges, np.asarray(xc), side="right") - 1,
                      0, table.size - 1)
        return table[idx]

    return Observable3D(name, fn, xc_pc=pc)


PRESETS = {"affine-center": affine_center, "staircase-4": staircase4}


# --- parser ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+/\d+|\d+)|(xu|xc|xs|min|max)|([()+\-*,]))")


def _tokenize(text: str) -> list:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"bad token at {text[pos:]!r}")
        num, word, sym = m.groups()
        if num:
            out.append(("num", Fraction(num)))
        elif word:
            out.append(("word", word))
        else:
            out.append(("sym", sym))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        k, v = self.toks[self.i]
        if kind and k != kind or value is not None and v != value:
            raise ParseError(f"expected {value or kind}, got {v!r}")
        self.i += 1
        return v

    def expr(self):
        node = self.term()
        while self.peek() == ("sym", "+") or self.peek() == ("sym", "-"):
            opsym = self.take("sym")
            rhs = self.term()
            node = ("add" if opsym == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("sym", "*"):
            self.take("sym", "*")
            node = ("mul", node, self.factor())
        return node

    def factor(self):
        k, v = self.peek()
        if k == "sym" and v == "-":
            self.take()
            return ("neg", self.factor())
        if k == "num":
            self.take()
            return ("const", v)
        if k == "word" and v in ("xu", "xc", "xs"):
            self.take()
            return ("var", v)
        if k == "word" and v in ("min", "max"):
            self.take()
            self.take("sym", "(")
            a = self.expr()
            self.take("sym", ",")
            b = self.expr()
            self.take("sym", ")")
            return (v, a, b)
        if k == "sym" and v == "(":
            self.take()
            node = self.expr()
            self.take("sym", ")")
            return node
        raise ParseError(f"unexpected {v!r}")


def _eval_node(node, xu, xc, xs):
    op = node[0]
    if op == "const":
        return float(node[1])
    if op == "var":
        return {"xu": xu, "xc": xc, "xs": xs}[node[1]]
    if op == "neg":
        return -_eval_node(node[1], xu, xc, xs)
    a = _eval_node(node[1], xu, xc, xs)
    b = _eval_node(node[2], xu, xc, xs)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "min":
        return np.minimum(a, b)
    return np.maximum(a, b)


def _affine_form(node):
    """(c0, cu, cc, cs) if the node is affine in the coordinates, else None."""
    op = node[0]
    if op == "const":
        return (node[1], Fraction(0), Fraction(0), Fraction(0))
    if op == "var":
        unit = {"xu": 1, "xc": 2, "xs": 3}[node[1]]
        out = [Fraction(0)] * 4
        out[unit] = Fraction(1)
        return tuple(out)
    if op == "neg":
        a = _affine_form(node[1])
        return None if a is None else tuple(-x for x in a)
    if op in ("min", "max"):
        return None
    a, b = _affine_form(node[1]), _affine_form(node[2])
    if a is None or b is None:
        return None
    if op == "add":
        return tuple(x + y for x, y in zip(a, b))
    if op == "sub":
        return tuple(x - y for x, y in zip(a, b))
    # product: affine only when one side is constant
    if all(x == 0 for x in a[1:]):
        return tuple(a[0] * y for y in b)
    if all(x == 0 for x in b[1:]):
        return tuple(b[0] * x for x in a)
    return None


def parse_observable(text: str) -> Observable3D:
    text = text.strip()
    if text in PRESETS:
        return PRESETS[text]()
    parser = _Parser(_tokenize(text))
    tree = parser.expr()
    if parser.peek()[0] != "end":
        raise ParseError("trailing input")

    def fn(xu, xc, xs):
        return _eval_node(tree, np.asarray(xu, dtype=float),
                          np.asarray(xc, dtype=float),
                          np.asarray(xs, dtype=float))

    aff = _affine_form(tree)
    xc_affine = None
    theta = holder = None
    if aff is not None:
        c0, cu, cc, cs = aff
        if cu == 0 and cs == 0:
            xc_affine = (cc, c0)
        theta = 1.0
        corners = [float(c0 + cu * x + cc * y + cs * z)
                   for x in (0, 1) for y in (0, 1) for z in (0, 1)]
        lip = float(np.sqrt(float(cu) ** 2 + float(cc) ** 2 + float(cs) ** 2))
        holder = max(abs(c) for c in corners) + lip
    return Observable3D(text, fn, xc_affine=xc_affine,
                        theta=theta, holder_norm=holder)
