"""The star-product streaming retrieval protocol.

One user, n non-colluding servers, m file streams encoded with one
convolutional code; the j-th coordinate of every encoded block lives on
server j.  Queries are a shared random mask (rows of a rank-one matrix built
from the all-ones word) plus, on a secret coordinate set J, the indicator of
the wanted file repeated across the memory window.  Responses then decompose
into a codeword of the stacked block code plus, on J only, the accumulated
encoded window of the wanted stream.

Recovery is two-staged: per window, erasure-decode the stacked block code on
the coordinates outside J and the transmission erasures, subtract, and keep
the accumulated-window values surfaced on J; then run sliding-window erasure
decoding of the accumulated-window code over the whole stream, where every
coordinate outside J counts as erased (the masking matrix zeroed it) along
with whatever J positions the channel took.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from itertools import product

from .channel import ErasurePattern
from .conv import ConvCode
from .decoding import RecoveryResult, recover_stream
from .errors import BudgetExceededError, CorruptedStreamError
from .factory import verify_suitability
from .matrices import SolveVerdict, solve_int


def j_cardinality(n: int, k: int, mu: int) -> int:
    """The balanced choice |J| = floor((n - k*mu)/2)."""
    if n <= k * mu:
        raise ValueError(f"degenerate scheme: n={n} <= k*mu={k * mu}")
    return (n - k * mu) // 2


def sample_J(n: int, k: int, mu: int, rng) -> tuple[int, ...]:
    """A uniformly random J of the balanced cardinality (1-based positions)."""
    size = j_cardinality(n, k, mu)
    return tuple(sorted(rng.sample(range(1, n + 1), size)))


@dataclass(frozen=True)
class SchemeParams:
    """One retrieval instance: code, file count, stream length, wanted index,
    coordinate set J and the delay bound.

    Construction runs the full code suitability verification (column
    optimality, stacked MDS levels, basicness, streaming shape); pass
    ``verify_code=False`` only when the same code was just verified through
    the factory."""

    code: ConvCode
    num_files: int
    stream_len: int
    wanted: int                      # file index, 1-based
    J: tuple[int, ...]               # 1-based server positions
    delta: int
    verify_code: InitVar[bool] = True

    def __post_init__(self, verify_code: bool):
        code = self.code
        if not 1 <= self.wanted <= self.num_files:
            raise ValueError("wanted file index out of range")
        if self.stream_len < 1:
            raise ValueError("stream length must be >= 1")
        if not self.J:
            raise ValueError("J must be nonempty")
        if any(not 1 <= j <= code.n for j in self.J) or len(set(self.J)) != len(self.J):
            raise ValueError("J must be distinct positions in 1..n")
        if not 0 <= self.delta <= code.L:
            raise ValueError(f"delay bound must be in [0, L={code.L}]")
        if not code.streaming_shape_ok:
            raise ValueError("code fails the streaming shape (memory+2)*k <= n")
        if verify_code:
            report = verify_suitability(code)
            if not report.construction_ok:
                raise ValueError(
                    "code fails suitability verification: "
                    f"{ {k: v for k, v in report.to_dict().items() if k != 'checks'} }")

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def memory(self) -> int:
        return self.code.memory

    @property
    def horizon(self) -> int:
        """Number of response windows: the stream plus the memory flush."""
        return self.stream_len + self.code.memory

    @property
    def query_width(self) -> int:
        return (self.code.memory + 1) * self.num_files


@dataclass
class StorageState:
    """Encoded streams as distributed to the servers.

    ``encoded[i-1][t-1]`` is the full block of stream i at window t; server j
    holds coordinate j-1 of each.  The originating message blocks are kept
    for test oracles only and never leave the user side.
    """

    code: ConvCode
    files: list[list[list[int]]]
    encoded: list[list[list[int]]]

    @property
    def horizon(self) -> int:
        return len(self.encoded[0]) if self.encoded else 0

    def stored(self, j: int, i: int, t: int) -> int:
        """Coordinate of stream i at window t held by server j (all 1-based);
        zero outside the produced horizon."""
        if t < 1 or t > self.horizon:
            return 0
        return self.encoded[i - 1][t - 1][j - 1]


def encode_storage(code: ConvCode, files: list[list[list[int]]]) -> StorageState:
    """Convolve every file stream with the code coefficients and lay the
    result out for per-coordinate storage; windows run to stream end plus
    memory (the flush of pure memory)."""
    spec, n, k, mu = code.spec, code.n, code.k, code.memory
    add, mul = spec.add, spec.mul
    stream_len = len(files[0])
    for f in files:
        if len(f) != stream_len or any(len(b) != k for b in f):
            raise ValueError("files must share stream length and block width k")
    encoded = []
    for blocks in files:
        ys = []
        for t in range(1, stream_len + mu + 1):
            y = [0] * n
            for r in range(0, min(t - 1, mu) + 1):
                s = t - r
                if s > stream_len:
                    continue
                x = blocks[s - 1]
                g = code.coeffs[r]
                for rr in range(k):
                    xv = x[rr]
                    if not xv:
                        continue
                    grow = g[rr]
                    for c in range(n):
                        if grow[c]:
                            y[c] = add(y[c], mul(xv, grow[c]))
            ys.append(y)
        encoded.append(ys)
    return StorageState(code=code, files=[[list(b) for b in f] for f in files],
                        encoded=encoded)


@dataclass
class QuerySet:
    """Per-server query vectors plus the private randomness that formed them."""

    randomness: list[int]                 # the (memory+1)*m mask coefficients
    queries: list[list[int]]              # queries[j-1], length (memory+1)*m
    J: tuple[int, ...]
    wanted: int


def build_queries(params: SchemeParams, rng) -> QuerySet:
    """Mask column plus, on J, the repeated indicator of the wanted file."""
    spec = params.code.spec
    width = params.query_width
    m, mu = params.num_files, params.memory
    c = [spec.sample(rng) for _ in range(width)]
    queries = []
    for j in range(1, params.n + 1):
        q = list(c)
        if j in params.J:
            for l in range(mu + 1):
                pos = l * m + (params.wanted - 1)
                q[pos] = spec.add(q[pos], 1)
        queries.append(q)
    return QuerySet(randomness=c, queries=queries, J=params.J, wanted=params.wanted)


def server_response(code: ConvCode, storage: StorageState, query: list[int],
                    num_files: int, j: int, t: int) -> int:
    """What server j answers at window t.

    The server sees its query vector and its own stored coordinates, nothing
    else; in particular no file index enters here."""
    spec, mu = code.spec, code.memory
    m = num_files
    add, mul = spec.add, spec.mul
    acc = 0
    for kappa in range(1, mu + 2):
        r = t - kappa + 1
        if r < 1:
            continue
        base = (kappa - 1) * m
        for f in range(1, m + 1):
            qv = query[base + f - 1]
            if not qv:
                continue
            yv = storage.stored(j, f, r)
            if yv:
                acc = add(acc, mul(qv, yv))
    return acc


def compute_responses(params: SchemeParams, storage: StorageState,
                      queries: QuerySet) -> list[list[int]]:
    """Full response stream, windows 1..horizon, one symbol per server."""
    code = params.code
    return [
        [server_response(code, storage, queries.queries[j - 1],
                         params.num_files, j, t)
         for j in range(1, params.n + 1)]
        for t in range(1, params.horizon + 1)
    ]


@dataclass
class Extraction:
    """Stage-1 outcome for one window: either the whole window is lost, or
    the accumulated-window values at the J positions the channel spared."""

    window_lost: bool
    values: dict[int, int] = field(default_factory=dict)  # 1-based pos -> value


def extract_timestep(code: ConvCode, t: int, received: list[int],
                     erased: frozenset[int] | set[int],
                     J: tuple[int, ...]) -> Extraction:
    """Erasure-decode the stacked block code of level min(t, memory) on the
    coordinates outside J and the erasures; on success return the masked
    window values surfaced at J minus the channel's hits."""
    spec, n, k = code.spec, code.n, code.k
    f = min(t, code.memory)
    dim = (f + 1) * k
    blocked = set(erased) | set(J)
    clean = [c for c in range(1, n + 1) if c not in blocked]
    if len(clean) < dim:
        return Extraction(window_lost=True)
    gen = code.stacked_generator(f).rows   # dim x n
    rows = [[gen[d][c - 1] for d in range(dim)] for c in clean]
    rhs = [received[c - 1] for c in clean]
    res = solve_int(spec, rows, dim, rhs)
    if res.verdict is SolveVerdict.INCONSISTENT:
        raise CorruptedStreamError(
            f"window {t}: clean coordinates disagree with the stacked code")
    if res.verdict is not SolveVerdict.UNIQUE:
        raise ValueError(
            f"window {t}: stacked code level {f} is not MDS; extraction "
            f"needs any {dim} columns independent")
    w = res.solution
    mul, add, sub = spec.mul, spec.add, spec.sub
    values = {}
    for c in J:
        if c in erased:
            continue
        cw = 0
        for d in range(dim):
            gv = gen[d][c - 1]
            if gv and w[d]:
                cw = add(cw, mul(w[d], gv))
        values[c] = sub(received[c - 1], cw)
    return Extraction(window_lost=False, values=values)


def extract_stream(code: ConvCode, received: list[list[int]],
                   pattern: ErasurePattern, J: tuple[int, ...]) -> list[Extraction]:
    return [
        extract_timestep(code, t, received[t - 1], pattern.window(t), J)
        for t in range(1, len(received) + 1)
    ]


def stage2_erasure_set(extractions: list[Extraction], J: tuple[int, ...],
                       n: int) -> set[int]:
    """Absolute 1-based positions erased for the stream-level decoder: lost
    windows in full; otherwise every coordinate outside J (the mask zeroed
    them) plus the J coordinates the channel erased."""
    out: set[int] = set()
    jset = set(J)
    for t, ex in enumerate(extractions, start=1):
        offset = (t - 1) * n
        if ex.window_lost:
            out.update(offset + c for c in range(1, n + 1))
            continue
        for c in range(1, n + 1):
            if c not in jset:
                out.add(offset + c)
            elif c not in ex.values:
                out.add(offset + c)
    return out


def _stage2_window_sets(extractions: list[Extraction], J: tuple[int, ...],
                        n: int) -> tuple[list[list[int]], list[frozenset[int]]]:
    values = []
    erased = []
    jset = set(J)
    for ex in extractions:
        vals = [0] * n
        hide = set()
        if ex.window_lost:
            hide = set(range(n))
        else:
            for c in range(1, n + 1):
                if c in ex.values:
                    vals[c - 1] = ex.values[c]
                else:
                    hide.add(c - 1)
        values.append(vals)
        erased.append(frozenset(hide))
    return values, erased


def decode_stream(params: SchemeParams, extractions: list[Extraction]) -> RecoveryResult:
    """Stage 2: sliding-window erasure decoding of the accumulated-window
    code over the surfaced J values, committing each block within the delay
    bound or failing at its position."""
    tilde = params.code.tilde()
    values, erased = _stage2_window_sets(extractions, params.J, params.n)
    return recover_stream(tilde, values, erased, params.stream_len, params.delta)


def decode_stream_blockwise(params: SchemeParams,
                            extractions: list[Extraction]) -> RecoveryResult:
    """Block-code comparison decoder: every window must be completed
    independently as a codeword of the top stacked code from its surfaced J
    values alone, with no information flowing across windows."""
    code = params.code
    spec, n, k, mu = code.spec, code.n, code.k, code.memory
    dim = (mu + 1) * k
    gen = code.stacked_generator(mu).rows
    windows: list[list[int]] = []
    for t, ex in enumerate(extractions, start=1):
        known = sorted(ex.values) if not ex.window_lost else []
        if len(known) < dim:
            return RecoveryResult(success=False, fail_position=t,
                                  diagnostics={"window": t,
                                               "clean": len(known),
                                               "needed": dim})
        rows = [[gen[d][c - 1] for d in range(dim)] for c in known]
        rhs = [ex.values[c] for c in known]
        res = solve_int(spec, rows, dim, rhs)
        if res.verdict is not SolveVerdict.UNIQUE:
            return RecoveryResult(success=False, fail_position=t,
                                  diagnostics={"window": t, "verdict": res.verdict.value})
        w = res.solution
        full = [0] * n
        for c in range(n):
            acc = 0
            for d in range(dim):
                gv = gen[d][c]
                if gv and w[d]:
                    acc = spec.add(acc, spec.mul(w[d], gv))
            full[c] = acc
        windows.append(full)
    # all accumulated windows known: peel the message blocks in order
    tilde = params.code.tilde()
    erased = [frozenset() for _ in windows]
    return recover_stream(tilde, windows, erased, params.stream_len, 0)


# -- correctability predicates -------------------------------------------------


def window_lost_flags(code: ConvCode, pattern: ErasurePattern,
                      J: tuple[int, ...]) -> list[bool]:
    """Stage-1 feasibility per window, by the erasure-decoding threshold of
    the stacked code level min(t, memory)."""
    n, k = code.n, code.k
    jset = set(J)
    flags = []
    for t in range(1, pattern.horizon + 1):
        dim = (min(t, code.memory) + 1) * k
        blocked = jset | pattern.window(t)
        flags.append(n - len(blocked) < dim)
    return flags


def stage2_bitmap(code: ConvCode, pattern: ErasurePattern,
                  J: tuple[int, ...]) -> list[bool]:
    """Erased/kept map of the stream-level symbol sequence under the pattern."""
    n = code.n
    jset = set(J)
    flags = window_lost_flags(code, pattern, J)
    bits = []
    for t in range(1, pattern.horizon + 1):
        tset = pattern.window(t)
        for c in range(1, n + 1):
            if flags[t - 1]:
                bits.append(True)
            else:
                bits.append(c not in jset or c in tset)
    return bits


def correctable_predicate(code: ConvCode, pattern: ErasurePattern,
                          J: tuple[int, ...], delta: int) -> bool:
    """Sufficient condition for full private recovery within the delay bound:
    after accounting one full window of erasures for every window whose
    stage-1 decoding is infeasible, every sliding window of (delta+1)*n
    stream-level symbols carries at most (delta+1)*(n-k) erasures."""
    n, k = code.n, code.k
    if pattern.horizon < delta + 1:
        raise ValueError("pattern horizon shorter than one decoding window")
    bits = stage2_bitmap(code, pattern, J)
    win = (delta + 1) * n
    budget = (delta + 1) * (n - k)
    run = sum(bits[:win])
    if run > budget:
        return False
    for off in range(len(bits) - win):
        run += bits[off + win] - bits[off]
        if run > budget:
            return False
    return True


def per_window_predicate(code: ConvCode, pattern: ErasurePattern,
                         J: tuple[int, ...], delta: int) -> bool:
    """Looser per-window variant, kept as a flagged secondary check:
    transmission erasures outside J within each window must fit the
    stacked-code slack, and transmission erasures at J positions must fit
    the full stream budget (delta+1)(n-k) in every sliding window.  Because
    only |J| symbols per window ever reach the stream decoder, the effective
    J budget is really (delta+1)(|J|-k); the primary predicate accounts for
    that, this one does not, and the two disagree on J-heavy patterns."""
    n, k, mu = code.n, code.k, code.memory
    jset = set(J)
    for t in range(1, pattern.horizon + 1):
        slack = n - k * (min(mu, t) + 1) - len(jset)
        outside = len(pattern.window(t) - jset)
        if outside > slack:
            return False
    bits = []
    for t in range(1, pattern.horizon + 1):
        tset = pattern.window(t)
        bits.extend((c in jset and c in tset) for c in range(1, n + 1))
    win = (delta + 1) * n
    budget = (delta + 1) * (n - k)
    if len(bits) < win:
        return sum(bits) <= budget
    run = sum(bits[:win])
    if run > budget:
        return False
    for off in range(len(bits) - win):
        run += bits[off + win] - bits[off]
        if run > budget:
            return False
    return True


# -- privacy -------------------------------------------------------------------


@dataclass
class PrivacyAudit:
    """Exact per-server query distributions, one table per file index."""

    tables: dict[int, dict[int, dict[tuple, int]]]
    identical: bool
    uniform: bool
    witness: tuple | None          # (server, i, i2, query tuple) on divergence
    randomness_values: int
    prng_note: str = "exhaustive enumeration, no sampling"


def privacy_audit(spec, n: int, m: int, mu: int, J: tuple[int, ...],
                  budget: int = 1 << 20) -> PrivacyAudit:
    """Enumerate every randomness vector and tabulate the induced query of
    each server for each candidate file index; privacy holds iff for every
    server the tables coincide across indices (they are then uniform too)."""
    width = (mu + 1) * m
    total = spec.order ** width
    if total > budget:
        raise BudgetExceededError(
            f"privacy audit needs {total} randomness values (budget {budget})")
    jset = set(J)
    tables: dict[int, dict[int, dict[tuple, int]]] = {
        j: {i: {} for i in range(1, m + 1)} for j in range(1, n + 1)
    }
    for c in product(range(spec.order), repeat=width):
        for j in range(1, n + 1):
            for i in range(1, m + 1):
                if j in jset:
                    q = list(c)
                    for l in range(mu + 1):
                        pos = l * m + (i - 1)
                        q[pos] = spec.add(q[pos], 1)
                    key = tuple(q)
                else:
                    key = c
                tab = tables[j][i]
                tab[key] = tab.get(key, 0) + 1
    identical = True
    witness = None
    for j in range(1, n + 1):
        base = tables[j][1]
        for i in range(2, m + 1):
            if tables[j][i] != base:
                identical = False
                diff = next(q for q in set(base) | set(tables[j][i])
                            if base.get(q, 0) != tables[j][i].get(q, 0))
                witness = (j, 1, i, diff)
                break
        if witness:
            break
    expected = total // (spec.order ** width)   # one hit per query value
    uniform = all(
        len(tab) == spec.order ** width and set(tab.values()) == {expected}
        for j in tables for tab in tables[j].values())
    return PrivacyAudit(tables=tables, identical=identical, uniform=uniform,
                        witness=witness, randomness_values=total)


def collusion_audit(spec, n: int, m: int, mu: int, J: tuple[int, ...],
                    pair: tuple[int, int], budget: int = 1 << 20):
    """Joint view of two servers; returns a witness (i, i2, joint value)
    whose probability differs across file indices, or None if the pair
    learns nothing (which happens exactly when both sit on the same side
    of J)."""
    width = (mu + 1) * m
    total = spec.order ** width
    if total > budget:
        raise BudgetExceededError(
            f"collusion audit needs {total} randomness values (budget {budget})")
    jset = set(J)
    j1, j2 = pair
    tables: dict[int, dict[tuple, int]] = {i: {} for i in range(1, m + 1)}
    for c in product(range(spec.order), repeat=width):
        for i in range(1, m + 1):
            keys = []
            for j in (j1, j2):
                if j in jset:
                    q = list(c)
                    for l in range(mu + 1):
                        pos = l * m + (i - 1)
                        q[pos] = spec.add(q[pos], 1)
                    keys.append(tuple(q))
                else:
                    keys.append(c)
            key = (keys[0], keys[1])
            tables[i][key] = tables[i].get(key, 0) + 1
    for i in range(2, m + 1):
        if tables[i] != tables[1]:
            diff = next(q for q in set(tables[1]) | set(tables[i])
                        if tables[1].get(q, 0) != tables[i].get(q, 0))
            return (1, i, diff)
    return None
