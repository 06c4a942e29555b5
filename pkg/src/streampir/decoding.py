"""Sequential sliding-window erasure decoding for convolutional codes.

The decoder walks the message blocks in order, keeping a fully recovered
prefix.  To commit block s it forms the linear system contributed by the
non-erased symbols of windows s..s+w (w growing up to the delay bound),
subtracts the known prefix through the code memory, and commits as soon as
the k unknowns of block s are pinned down uniquely (a reduced-echelon pivot
test, not a heuristic).  Decoding is fail-stop: the first block that is
still ambiguous at the delay bound stops the decoder and is reported.

Streams are assumed terminated: message blocks past ``num_blocks`` are zero,
which is how the tail windows of pure memory are flushed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .conv import ConvCode
from .errors import CorruptedStreamError
from .matrices import rref_int


@dataclass
class RecoveryResult:
    success: bool
    blocks: list[list[int]] = field(default_factory=list)
    fail_position: int | None = None
    delays: list[int] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_delay(self) -> int:
        return max(self.delays) if self.delays else 0


def recover_stream(code: ConvCode, values: list[list[int]],
                   erased: list[frozenset[int] | set[int]],
                   num_blocks: int, delay: int) -> RecoveryResult:
    """Recover message blocks 1..num_blocks from a partially erased codeword
    stream.

    ``values[t-1]`` holds the n received symbols of window t (entries listed
    in ``erased[t-1]``, 0-based coordinates, are ignored).  ``delay`` is the
    number of extra windows the decoder may wait before committing a block.
    """
    spec = code.spec
    n, k, memory = code.n, code.k, code.memory
    horizon = len(values)
    mul, sub_ = spec.mul, spec.sub
    known: list[list[int]] = []   # committed blocks, 1-based block b at index b-1
    delays: list[int] = []

    for s in range(1, num_blocks + 1):
        committed = None
        window_hi = min(s + delay, horizon)
        for w_end in range(s, window_hi + 1):
            rows: list[list[int]] = []
            rhs: list[int] = []
            e_block = min(w_end, num_blocks)
            n_unknown = (e_block - s + 1) * k
            for t in range(s, w_end + 1):
                vrow = values[t - 1]
                hidden = erased[t - 1]
                lo_b = max(1, t - memory)
                for c in range(n):
                    if c in hidden:
                        continue
                    # residual after subtracting the known prefix
                    r = vrow[c]
                    coeffs = [0] * n_unknown
                    for b in range(lo_b, t + 1):
                        g = code.coefficient_entry
                        gi = t - b
                        if b < s:
                            xb = known[b - 1]
                            for rr in range(k):
                                xv = xb[rr]
                                if xv:
                                    gv = g(gi, rr, c)
                                    if gv:
                                        r = sub_(r, mul(xv, gv))
                        elif b <= e_block:
                            base = (b - s) * k
                            for rr in range(k):
                                gv = g(gi, rr, c)
                                if gv:
                                    coeffs[base + rr] = gv
                        # blocks past num_blocks are zero: nothing to do
                    rows.append(coeffs)
                    rhs.append(r)
            got = _solve_leading(spec, rows, n_unknown, rhs, k)
            if got is not None:
                committed = got
                delays.append(w_end - s)
                break
        if committed is None:
            return RecoveryResult(
                success=False,
                blocks=known,
                fail_position=s,
                delays=delays,
                diagnostics={
                    "blocking_window_erasures": [
                        len(erased[t - 1]) for t in range(s, window_hi + 1)
                    ],
                    "windows_available": window_hi - s + 1,
                },
            )
        known.append(committed)
    return RecoveryResult(success=True, blocks=known, delays=delays)


def _solve_leading(spec, rows: list[list[int]], ncols: int, rhs: list[int],
                   lead: int) -> list[int] | None:
    """Return the first ``lead`` unknowns if the (consistent) system pins them
    down uniquely, else None.  An inconsistent system means the received
    symbols were corrupted, not merely erased."""
    aug = [row + [b] for row, b in zip(rows, rhs)]
    pivots = rref_int(spec, aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        raise CorruptedStreamError("received symbols are inconsistent with the code")
    pivot_row = {c: r for r, c in enumerate(pivots)}
    out = []
    for q in range(lead):
        r = pivot_row.get(q)
        if r is None:
            return None
        row = aug[r]
        if any(row[j] for j in range(ncols) if j != q):
            return None
        out.append(row[ncols])
    return out
