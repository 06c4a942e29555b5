"""Univariate polynomial helpers over a FieldSpec.

Polynomials are coefficient lists (constant term first, ints in the field's
element representation) with no trailing zeros.  Only what the generator
basicness test needs: ring ops, division, monic gcd, small determinants.
"""

from __future__ import annotations

from .gf import FieldSpec


def trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def deg(p: list[int]) -> int:
    return len(p) - 1  # deg([]) = -1 for the zero polynomial


def add(spec: FieldSpec, a: list[int], b: list[int]) -> list[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        av = a[i] if i < len(a) else 0
        bv = b[i] if i < len(b) else 0
        out[i] = spec.add(av, bv)
    return trim(out)


def sub(spec: FieldSpec, a: list[int], b: list[int]) -> list[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        av = a[i] if i < len(a) else 0
        bv = b[i] if i < len(b) else 0
        out[i] = spec.sub(av, bv)
    return trim(out)


def mul(spec: FieldSpec, a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, av in enumerate(a):
        if not av:
            continue
        for j, bv in enumerate(b):
            if bv:
                out[i + j] = spec.add(out[i + j], spec.mul(av, bv))
    return trim(out)


def divmod_(spec: FieldSpec, a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    binv = spec.inv(b[-1])
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = spec.mul(r[-1], binv)
        q[shift] = f
        for i, bv in enumerate(b):
            if bv:
                r[shift + i] = spec.sub(r[shift + i], spec.mul(f, bv))
        trim(r)
    return trim(q), r


def gcd(spec: FieldSpec, a: list[int], b: list[int]) -> list[int]:
    """Monic gcd; returns [] only if both inputs are zero."""
    a, b = trim(list(a)), trim(list(b))
    while b:
        _, r = divmod_(spec, a, b)
        a, b = b, r
    if a:
        lead_inv = spec.inv(a[-1])
        a = [spec.mul(c, lead_inv) for c in a]
    return a


def det(spec: FieldSpec, cells: list[list[list[int]]]) -> list[int]:
    """Determinant of a small square matrix of polynomials, by cofactors."""
    n = len(cells)
    if n == 1:
        return list(cells[0][0])
    total: list[int] = []
    for j in range(n):
        top = cells[0][j]
        if not top:
            continue
        minor_cells = [[row[c] for c in range(n) if c != j] for row in cells[1:]]
        term = mul(spec, top, det(spec, minor_cells))
        if j % 2:
            term = [spec.neg(c) for c in term]
        total = add(spec, total, term)
    return total
