"""Dense exact linear algebra over a finite field.

Matrices are stored row-major as lists of ints (the field kernel's element
representation) together with their FieldSpec.  Everything is exact Gaussian
elimination; pivots are chosen as the first nonzero entry in a column.  The
int-level functions at the bottom are the engine for the hot loops (minor
sweeps, erasure decoding); :class:`FieldMatrix` is the object layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import FieldMismatchError
from .gf import FieldElement, FieldSpec


class SolveVerdict(Enum):
    UNIQUE = "unique"
    INCONSISTENT = "inconsistent"
    UNDERDETERMINED = "underdetermined"


@dataclass
class SolveResult:
    verdict: SolveVerdict
    solution: list[int] | None = None

    @property
    def unique(self) -> bool:
        return self.verdict is SolveVerdict.UNIQUE


class FieldMatrix:
    """Immutable-by-convention dense matrix over a FieldSpec."""

    __slots__ = ("spec", "nrows", "ncols", "rows")

    def __init__(self, spec: FieldSpec, rows: Sequence[Sequence[int]]):
        self.spec = spec
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError("ragged rows")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, spec: FieldSpec, nrows: int, ncols: int) -> "FieldMatrix":
        return cls(spec, [[0] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, spec: FieldSpec, n: int) -> "FieldMatrix":
        return cls(spec, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_elements(cls, cells: Sequence[Sequence[FieldElement]]) -> "FieldMatrix":
        spec = cells[0][0].spec
        for row in cells:
            for c in row:
                if c.spec != spec:
                    raise FieldMismatchError("matrix cells from different fields")
        return cls(spec, [[c.v for c in row] for row in cells])

    @classmethod
    def vstack(cls, blocks: Sequence["FieldMatrix"]) -> "FieldMatrix":
        spec = blocks[0].spec
        ncols = blocks[0].ncols
        rows: list[list[int]] = []
        for b in blocks:
            if b.spec != spec or b.ncols != ncols:
                raise ValueError("vstack blocks must share spec and width")
            rows.extend(list(r) for r in b.rows)
        return cls(spec, rows)

    # -- access ---------------------------------------------------------------

    def at(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.spec, self.rows[i][j])

    def row(self, i: int) -> list[int]:
        return list(self.rows[i])

    def col(self, j: int) -> list[int]:
        return [r[j] for r in self.rows]

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "FieldMatrix":
        return FieldMatrix(self.spec,
                           [[self.rows[i][j] for j in col_idx] for i in row_idx])

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.spec,
                           [[self.rows[i][j] for i in range(self.nrows)]
                            for j in range(self.ncols)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, FieldMatrix) and self.spec == other.spec
                and self.rows == other.rows)

    def __repr__(self) -> str:
        return f"FieldMatrix({self.spec}, {self.nrows}x{self.ncols})"

    # -- arithmetic -------------------------------------------------------------

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return self.mul(other)

    def mul(self, other: "FieldMatrix") -> "FieldMatrix":
        if not isinstance(other, FieldMatrix):
            raise TypeError("can only multiply by FieldMatrix")
        if self.spec != other.spec:
            raise FieldMismatchError("matrix product across different fields")
        if self.ncols != other.nrows:
            raise ValueError(
                f"shape mismatch: {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        mul, add = self.spec.mul, self.spec.add
        bt = [[other.rows[i][j] for i in range(other.nrows)] for j in range(other.ncols)]
        out = []
        for arow in self.rows:
            orow = []
            for bcol in bt:
                acc = 0
                for a, b in zip(arow, bcol):
                    if a and b:
                        acc = add(acc, mul(a, b))
                orow.append(acc)
            out.append(orow)
        return FieldMatrix(self.spec, out)

    def mul_vector(self, vec: Sequence[int]) -> list[int]:
        """Row-vector-free convenience: returns self @ vec for an int vector."""
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        mul, add = self.spec.mul, self.spec.add
        out = []
        for arow in self.rows:
            acc = 0
            for a, b in zip(arow, vec):
                if a and b:
                    acc = add(acc, mul(a, b))
            out.append(acc)
        return out

    # -- elimination-based queries ------------------------------------------------

    def rank(self) -> int:
        return rank_int(self.spec, [list(r) for r in self.rows])

    def det(self) -> FieldElement:
        if self.nrows != self.ncols:
            raise ValueError("determinant of non-square matrix")
        return FieldElement(self.spec, det_int(self.spec, [list(r) for r in self.rows]))

    def minor(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> FieldElement:
        """Determinant of the selected square submatrix."""
        if len(row_idx) != len(col_idx):
            raise ValueError("minor selection must be square")
        for i in row_idx:
            if not 0 <= i < self.nrows:
                raise IndexError(f"row index {i} out of range")
        for j in col_idx:
            if not 0 <= j < self.ncols:
                raise IndexError(f"column index {j} out of range")
        sub = [[self.rows[i][j] for j in col_idx] for i in row_idx]
        return FieldElement(self.spec, det_int(self.spec, sub))

    def solve(self, b: Sequence[int] | Sequence[FieldElement]) -> SolveResult:
        """Solve self @ x = b exactly; the verdict covers all cases."""
        if len(b) != self.nrows:
            raise ValueError("right-hand side length mismatch")
        bv = [c.v if isinstance(c, FieldElement) else c for c in b]
        return solve_int(self.spec, [list(r) for r in self.rows], self.ncols, bv)


# -- int-level engine ----------------------------------------------------------


def rref_int(spec: FieldSpec, rows: list[list[int]], ncols: int) -> list[int]:
    """In-place reduced row echelon form; returns the pivot column list."""
    mul, sub, inv = spec.mul, spec.sub, spec.inv
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        pivot = -1
        for i in range(r, nrows):
            if rows[i][c]:
                pivot = i
                break
        if pivot < 0:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        prow = rows[r]
        pv = prow[c]
        if pv != 1:
            pinv = inv(pv)
            for j in range(c, len(prow)):
                if prow[j]:
                    prow[j] = mul(prow[j], pinv)
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                irow = rows[i]
                for j in range(c, len(prow)):
                    if prow[j]:
                        irow[j] = sub(irow[j], mul(f, prow[j]))
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rank_int(spec: FieldSpec, rows: list[list[int]]) -> int:
    if not rows:
        return 0
    return len(rref_int(spec, rows, len(rows[0])))


def det_int(spec: FieldSpec, rows: list[list[int]]) -> int:
    """Determinant by forward elimination; destroys its argument."""
    n = len(rows)
    mul, sub, inv = spec.mul, spec.sub, spec.inv
    det = 1
    neg = False
    for c in range(n):
        pivot = -1
        for i in range(c, n):
            if rows[i][c]:
                pivot = i
                break
        if pivot < 0:
            return 0
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            neg = not neg
        prow = rows[c]
        pv = prow[c]
        det = mul(det, pv)
        pinv = inv(pv)
        for i in range(c + 1, n):
            irow = rows[i]
            if irow[c]:
                f = mul(irow[c], pinv)
                for j in range(c + 1, n):
                    if prow[j]:
                        irow[j] = sub(irow[j], mul(f, prow[j]))
                irow[c] = 0
    if neg:
        det = spec.neg(det)
    return det


def solve_int(spec: FieldSpec, rows: list[list[int]], ncols: int,
              b: list[int]) -> SolveResult:
    aug = [row + [bv] for row, bv in zip(rows, b)]
    pivots = rref_int(spec, aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return SolveResult(SolveVerdict.INCONSISTENT)
    if len(pivots) < ncols:
        return SolveResult(SolveVerdict.UNDERDETERMINED)
    x = [0] * ncols
    for r, c in enumerate(pivots):
        x[c] = aug[r][ncols]
    return SolveResult(SolveVerdict.UNIQUE, x)
