"""Linear expressions over QUBO variables and their quadratic expansion.

An expression is a ``dict`` mapping a variable index (or ``None`` for the
constant term) to its coefficient.
"""
from __future__ import annotations

from typing import Optional

from .qubo import QuboMatrix

Expr = dict[Optional[int], float]

ONE: Expr = {None: 1}


def lin(*pairs: tuple[Optional[int], float]) -> Expr:
    out: Expr = {}
    for v, c in pairs:
        out[v] = out.get(v, 0) + c
    return out


def add(*exprs: Expr) -> Expr:
    out: Expr = {}
    for e in exprs:
        for v, c in e.items():
            out[v] = out.get(v, 0) + c
    return out


def scale(e: Expr, k: float) -> Expr:
    return {v: k * c for v, c in e.items()}


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, scale(b, -1))


def const(c: float) -> Expr:
    return {None: c}


def add_linear(q: QuboMatrix, e: Expr, k: float = 1) -> None:
    for v, c in e.items():
        if c == 0:
            continue
        if v is None:
            q.add_constant(k * c)
        else:
            q.add_term(v, v, k * c)


def add_product(q: QuboMatrix, a: Expr, b: Expr, k: float = 1) -> None:
    """Accumulate ``k * a * b`` into ``q`` (binary variables, so x*x = x)."""
    for va, ca in a.items():
        if ca == 0:
            continue
        for vb, cb in b.items():
            if cb == 0:
                continue
            c = k * ca * cb
            if va is None and vb is None:
                q.add_constant(c)
            elif va is None:
                q.add_term(vb, vb, c)
            elif vb is None:
                q.add_term(va, va, c)
            else:
                q.add_term(va, vb, c)


def add_square(q: QuboMatrix, e: Expr, k: float = 1) -> None:
    add_product(q, e, e, k)
