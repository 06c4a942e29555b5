"""Convolutional codes and their window-decoding diagnostics.

A code is given by coefficient matrices G_0..G_mu (k x n over a FieldSpec);
codeword streams are convolutions of message blocks with the coefficients.
This module provides the sliding generator matrices, truncated encoding,
exhaustive column-distance computation, the minor criterion for maximal
column distances, stacked-generator MDS checks, the accumulated-window
transform (the "tilde" code whose sliding matrix is the banded identity
stack times the plain one), and a generator basicness test.

Two independent routes exist on purpose for the distance questions:
``column_distance_oracle`` enumerates message prefixes, while
``is_column_optimal`` sweeps constrained full-size minors of the sliding
matrix.  They must agree and the test suite holds them to that.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from . import polyring
from .errors import BudgetExceededError
from .gf import FieldSpec
from .matrices import FieldMatrix, det_int, rank_int

# Leaf vectorization pays off once the field is at least this large.
_NUMPY_LEAF_MIN_ORDER = 64


class ConvCode:
    """Rate k/n convolutional code with memory ``mu`` over ``spec``.

    The highest coefficient matrix must have full row rank (the degree of the
    code is then k*mu); generators violating that are rejected rather than
    mishandled.  G_0 must have full row rank as well so the zeroth stacked
    block code is an [n, k] code.
    """

    __slots__ = ("spec", "n", "k", "memory", "coeffs", "delta", "L")

    def __init__(self, spec: FieldSpec, n: int, k: int,
                 coeffs: list[list[list[int]]]):
        if not coeffs:
            raise ValueError("need at least G_0")
        if not 1 <= k < n:
            raise ValueError(f"require 1 <= k < n, got k={k}, n={n}")
        for g in coeffs:
            if len(g) != k or any(len(row) != n for row in g):
                raise ValueError("coefficient matrices must all be k x n")
        self.spec = spec
        self.n = n
        self.k = k
        self.memory = len(coeffs) - 1
        self.coeffs = [[list(row) for row in g] for g in coeffs]
        if not any(any(row) for row in coeffs[-1]):
            raise ValueError("highest coefficient matrix is zero; trim the memory")
        if rank_int(spec, [list(r) for r in coeffs[-1]]) != k:
            raise ValueError("highest coefficient matrix must have full row rank")
        if rank_int(spec, [list(r) for r in coeffs[0]]) != k:
            raise ValueError("G_0 must have full row rank")
        self.delta = k * self.memory
        self.L = self.delta // k + self.delta // (n - k)

    @property
    def streaming_shape_ok(self) -> bool:
        """(memory + 2) * k <= n, the shape the retrieval scheme needs."""
        return (self.memory + 2) * self.k <= self.n

    def coefficient(self, i: int) -> FieldMatrix:
        """G_i as a matrix; zero beyond the memory."""
        if 0 <= i <= self.memory:
            return FieldMatrix(self.spec, self.coeffs[i])
        return FieldMatrix.zeros(self.spec, self.k, self.n)

    def coefficient_entry(self, i: int, r: int, c: int) -> int:
        if 0 <= i <= self.memory:
            return self.coeffs[i][r][c]
        return 0

    def sliding_rows(self, j: int) -> list[list[int]]:
        """Int rows of the sliding generator matrix for window index j."""
        if j < 0:
            raise ValueError("window index must be >= 0")
        n, k, mu = self.n, self.k, self.memory
        rows = []
        for b in range(j + 1):
            for r in range(self.k):
                row = [0] * ((j + 1) * n)
                for c in range(b, min(j, b + mu) + 1):
                    g = self.coeffs[c - b][r]
                    row[c * n:(c + 1) * n] = g
                rows.append(row)
        return rows

    def sliding_matrix(self, j: int) -> FieldMatrix:
        return FieldMatrix(self.spec, self.sliding_rows(j))

    def stacked_generator(self, f: int) -> FieldMatrix:
        """Vertical stack of G_0..G_f, the generator of the f-th block code."""
        if not 0 <= f <= self.memory:
            raise ValueError(f"stack level must be in [0, {self.memory}]")
        rows = []
        for i in range(f + 1):
            rows.extend(list(r) for r in self.coeffs[i])
        return FieldMatrix(self.spec, rows)

    def tilde(self) -> "ConvCode":
        """Code generated by the accumulated windows; memory doubles.

        Coefficient b of the new code is the sum of G_{b-r} over r = 0..mu
        (indices outside [0, mu] contribute zero)."""
        add = self.spec.add
        mu, k, n = self.memory, self.k, self.n
        out = []
        for b in range(2 * mu + 1):
            g = [[0] * n for _ in range(k)]
            for r in range(max(0, b - mu), min(mu, b) + 1):
                src = self.coeffs[b - r]
                for rr in range(k):
                    grow, srow = g[rr], src[rr]
                    for cc in range(n):
                        if srow[cc]:
                            grow[cc] = add(grow[cc], srow[cc])
            out.append(g)
        return ConvCode(self.spec, n, k, out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ConvCode) and self.spec == other.spec
                and self.n == other.n and self.k == other.k
                and self.coeffs == other.coeffs)

    def __repr__(self) -> str:
        return f"ConvCode({self.spec}, n={self.n}, k={self.k}, memory={self.memory})"

    # -- serialization ---------------------------------------------------------

    def to_config(self) -> dict:
        """Config form: field, n, k, memory, then G_0..G_mu row-major with
        each entry as a coefficient list."""
        return {
            "field": self.spec.to_config(),
            "n": self.n,
            "k": self.k,
            "memory": self.memory,
            "coefficients": [
                [self.spec.coeffs_of(v) for row in g for v in row]
                for g in self.coeffs
            ],
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "ConvCode":
        spec = FieldSpec.from_config(cfg["field"])
        n, k = int(cfg["n"]), int(cfg["k"])
        mats = []
        for flat in cfg["coefficients"]:
            if len(flat) != k * n:
                raise ValueError("coefficient matrix has wrong cell count")
            vals = [spec.from_coeffs(c) for c in flat]
            mats.append([vals[r * n:(r + 1) * n] for r in range(k)])
        if len(mats) != int(cfg["memory"]) + 1:
            raise ValueError("memory does not match coefficient count")
        return cls(spec, n, k, mats)


def encode_truncated(code: ConvCode, u_blocks: list[list[int]], j: int) -> list[list[int]]:
    """First j+1 codeword blocks of the message u: v_t = sum_r u_{t-r} G_r."""
    if len(u_blocks) < j + 1:
        raise ValueError("message has fewer than j+1 blocks")
    spec, n, k, mu = code.spec, code.n, code.k, code.memory
    add, mul = spec.add, spec.mul
    out = []
    for t in range(j + 1):
        v = [0] * n
        for r in range(0, min(t, mu) + 1):
            u = u_blocks[t - r]
            g = code.coeffs[r]
            for rr in range(k):
                uv = u[rr]
                if not uv:
                    continue
                grow = g[rr]
                for c in range(n):
                    if grow[c]:
                        v[c] = add(v[c], mul(uv, grow[c]))
        out.append(v)
    return out


def _weight(block: list[int]) -> int:
    return sum(1 for v in block if v)


_np_table_cache: dict[FieldSpec, tuple] = {}


def _np_tables(spec: FieldSpec):
    if spec not in _np_table_cache:
        exp, log = spec.tables()
        _np_table_cache[spec] = (np.asarray(exp, dtype=np.int64),
                                 np.asarray(log, dtype=np.int64))
    return _np_table_cache[spec]


def _np_scaled_column(spec: FieldSpec, g: int):
    """Array m with m[v] = v * g, for all field values v."""
    exp_np, log_np = _np_tables(spec)
    q = spec.order
    out = np.zeros(q, dtype=np.int64)
    if g:
        lv = log_np[1:q]
        out[1:] = exp_np[lv + int(log_np[g])]
    return out


def column_distance_oracle(code: ConvCode, j: int, max_messages: int = 1 << 24) -> int:
    """Exhaustive j-th column distance: minimum prefix weight over all
    messages whose first block is nonzero.

    Branch-and-bound over message symbols in block order; a codeword block
    is final once the message block of the same index is decided, so the
    accumulated weight of finalized blocks prunes exactly.  The last symbol
    is vectorized over the whole field when tables are available.
    """
    spec, n, k, mu = code.spec, code.n, code.k, code.memory
    q = spec.order
    total = q ** (k * (j + 1))
    if total > max_messages:
        raise BudgetExceededError(
            f"column distance enumeration needs {total} messages "
            f"(budget {max_messages})")
    srows = code.sliding_rows(j)
    m_count = (j + 1) * k
    add, mul = spec.add, spec.mul
    width = (j + 1) * n

    use_numpy = (q >= _NUMPY_LEAF_MIN_ORDER and spec.p == 2
                 and spec.degree <= 20 and m_count > 1)
    last_row = srows[m_count - 1]
    last_cols = [c for c in range(width) if last_row[c]]
    if use_numpy:
        luts = {c: _np_scaled_column(spec, last_row[c]) for c in last_cols}

    best = [width + 1]

    # Columns belonging to the final message block, split by whether the last
    # message symbol touches them.
    tail_lo = j * n
    tail_static = [c for c in range(tail_lo, width) if c not in last_cols]

    supports = [[c for c in range(width) if row[c]] for row in srows]

    def leaf(partial: list[int], fin_weight: int, exclude_zero: bool) -> None:
        static_w = fin_weight + sum(1 for c in tail_static if partial[c])
        if static_w >= best[0]:
            return
        if use_numpy:
            w = np.zeros(q, dtype=np.int64)
            for c in last_cols:
                vals = luts[c] ^ partial[c]
                w += vals != 0
            view = w[1:] if exclude_zero else w
            cand = static_w + int(view.min())
            if cand < best[0]:
                best[0] = cand
            return
        start = 1 if exclude_zero else 0
        for val in range(start, q):
            wsum = static_w
            for c in last_cols:
                cell = add(partial[c], mul(val, last_row[c])) if val else partial[c]
                if cell:
                    wsum += 1
                    if wsum >= best[0]:
                        break
            if wsum < best[0]:
                best[0] = wsum

    def rec(s: int, partial: list[int], fin_weight: int, block0_zero: bool) -> None:
        if fin_weight >= best[0]:
            return
        if s == m_count - 1:
            leaf(partial, fin_weight, block0_zero and s < k)
            return
        row = srows[s]
        support = supports[s]
        block = s // k
        closes_block = (s % k) == k - 1
        for val in range(q):
            if val == 0:
                child = partial
            else:
                child = list(partial)
                for c in support:
                    child[c] = add(child[c], mul(val, row[c]))
            b0z = block0_zero and (block > 0 or val == 0)
            if closes_block:
                if block == 0 and b0z:
                    continue  # first message block must be nonzero
                fw = fin_weight + sum(1 for c in range(block * n, (block + 1) * n)
                                      if child[c])
                if fw >= best[0]:
                    continue
            else:
                fw = fin_weight
            rec(s + 1, child, fw, b0z)

    if m_count == 1:
        leaf([0] * width, 0, True)
    else:
        rec(0, [0] * width, 0, True)
    return best[0]


@lru_cache(maxsize=None)
def _constrained_minor_count(n: int, k: int, j: int) -> int:
    """Number of full-size sliding-matrix minors the maximality criterion
    actually constrains (column choices whose (ik+1)-th index exceeds in)."""
    m_count = (j + 1) * k
    ncols = (j + 1) * n
    lows = [0] * m_count
    for i in range(1, j + 1):
        lows[i * k] = i * n

    @lru_cache(maxsize=None)
    def f(s: int, pos: int) -> int:
        if s == m_count:
            return 1
        lo = max(pos, lows[s])
        hi = ncols - (m_count - s)
        return sum(f(s + 1, c + 1) for c in range(lo, hi + 1))

    return f(0, 0)


def _constrained_columns(n: int, k: int, j: int):
    """Yield the 0-based sorted column tuples subject to the criterion."""
    m_count = (j + 1) * k
    ncols = (j + 1) * n
    lows = [0] * m_count
    for i in range(1, j + 1):
        lows[i * k] = i * n
    pick = [0] * m_count

    def rec(s: int, pos: int):
        if s == m_count:
            yield tuple(pick)
            return
        lo = max(pos, lows[s])
        hi = ncols - (m_count - s)
        for c in range(lo, hi + 1):
            pick[s] = c
            yield from rec(s + 1, c + 1)

    yield from rec(0, 0)


def is_column_optimal(code: ConvCode, j: int, max_minors: int = 10 ** 7) -> bool:
    """Minor criterion for the j-th column distance being maximal.

    Every full-size minor of the sliding matrix whose sorted column indices
    t_1 <= ... satisfy t_{ik+1} > i*n for i = 1..j must be nonzero; column
    choices violating that bound select structurally dependent columns (they
    are zero for every code) and are skipped, not evaluated.
    """
    count = _constrained_minor_count(code.n, code.k, j)
    if count > max_minors:
        raise BudgetExceededError(
            f"{count} constrained minors to check (budget {max_minors})")
    srows = code.sliding_rows(j)
    spec = code.spec
    for cols in _constrained_columns(code.n, code.k, j):
        sub = [[row[c] for c in cols] for row in srows]
        if det_int(spec, sub) == 0:
            return False
    return True


def is_mdp(code: ConvCode, max_minors: int = 10 ** 7) -> bool:
    """Maximum distance profile: the column distance at window L is maximal."""
    return is_column_optimal(code, code.L, max_minors=max_minors)


def is_stacked_mds(code: ConvCode, f: int) -> bool:
    """True iff the stacked generator (G_0..G_f) generates an MDS block code,
    i.e. every full-size minor of it is nonzero."""
    dim = (f + 1) * code.k
    if dim > code.n:
        raise ValueError(f"stacked dimension {dim} exceeds block length {code.n}")
    gen = code.stacked_generator(f)
    spec = code.spec
    for cols in combinations(range(code.n), dim):
        sub = [[row[c] for c in cols] for row in gen.rows]
        if det_int(spec, sub) == 0:
            return False
    return True


def is_basic(code: ConvCode) -> bool:
    """Generator basicness: the gcd of the full-size minors of G(z) is a
    nonzero constant (for k = 1 this is the gcd of the entry polynomials)."""
    spec, n, k, mu = code.spec, code.n, code.k, code.memory
    entry = lambda r, c: polyring.trim(
        [code.coeffs[i][r][c] for i in range(mu + 1)])
    if k == 1:
        polys = [entry(0, c) for c in range(n)]
    else:
        polys = []
        for cols in combinations(range(n), k):
            cells = [[entry(r, c) for c in cols] for r in range(k)]
            polys.append(polyring.det(spec, cells))
    g: list[int] = []
    for p in polys:
        g = polyring.gcd(spec, g, p)
        if polyring.deg(g) == 0:
            return True
    return polyring.deg(g) == 0
