"""Erasure channel models and pattern handling.

Erasures live at symbol granularity: pair (t, j) means the response of
server j at window t never arrived in time.  An unresponsive or slow server
is simply a column of erasures over its outage interval; late symbols earn
no credit.  Patterns are value objects with a file form (one "t,j" pair per
line) that round-trips bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ErasurePattern:
    """Per-window erased position sets, windows 1..horizon, positions 1..n."""

    n: int
    horizon: int
    windows: tuple[frozenset[int], ...]

    def __post_init__(self):
        if len(self.windows) != self.horizon:
            raise ValueError("window count does not match horizon")
        for t, w in enumerate(self.windows, start=1):
            for j in w:
                if not 1 <= j <= self.n:
                    raise ValueError(f"position {j} in window {t} outside 1..{self.n}")

    @classmethod
    def from_sets(cls, n: int, sets: list[set[int] | frozenset[int]]) -> "ErasurePattern":
        return cls(n=n, horizon=len(sets), windows=tuple(frozenset(s) for s in sets))

    def window(self, t: int) -> frozenset[int]:
        """Erased positions of window t (1-based); empty beyond the horizon."""
        if 1 <= t <= self.horizon:
            return self.windows[t - 1]
        return frozenset()

    def pairs(self) -> list[tuple[int, int]]:
        return [(t, j) for t in range(1, self.horizon + 1)
                for j in sorted(self.windows[t - 1])]

    def total(self) -> int:
        return sum(len(w) for w in self.windows)

    def absolute_positions(self) -> set[int]:
        """1-based positions in the concatenated symbol stream."""
        return {(t - 1) * self.n + j for t, j in self.pairs()}

    # -- file form -----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{t},{j}" for t, j in self.pairs()]
        return "\n".join(lines) + ("\n" if lines else "")

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str, n: int, horizon: int) -> "ErasurePattern":
        sets: list[set[int]] = [set() for _ in range(horizon)]
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"pattern line {ln}: expected 't,j', got {raw!r}")
            try:
                t, j = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"pattern line {ln}: non-integer field") from exc
            if not 1 <= t <= horizon:
                raise ValueError(f"pattern line {ln}: window {t} outside 1..{horizon}")
            if not 1 <= j <= n:
                raise ValueError(f"pattern line {ln}: position {j} outside 1..{n}")
            sets[t - 1].add(j)
        return cls.from_sets(n, sets)

    @classmethod
    def read(cls, path: str | Path, n: int, horizon: int) -> "ErasurePattern":
        return cls.from_text(Path(path).read_text(), n, horizon)


@dataclass(frozen=True)
class IidChannel:
    """Each symbol erased independently with probability epsilon."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("erasure probability must be in [0, 1]")

    def generate(self, n: int, horizon: int, rng) -> ErasurePattern:
        sets = []
        for _ in range(horizon):
            sets.append({j for j in range(1, n + 1) if rng.random() < self.epsilon})
        return ErasurePattern.from_sets(n, sets)


@dataclass(frozen=True)
class BurstChannel:
    """A contiguous run of erased symbols, starting at the first symbol of
    ``start_window`` and covering ``length`` symbols of the stream order."""

    start_window: int
    length: int

    def generate(self, n: int, horizon: int, rng) -> ErasurePattern:
        if self.start_window < 1 or self.length < 0:
            raise ValueError("burst start window must be >= 1 and length >= 0")
        first = (self.start_window - 1) * n          # 0-based absolute symbol
        last = first + self.length - 1
        if self.length and last >= horizon * n:
            raise ValueError("burst runs past the horizon")
        sets: list[set[int]] = [set() for _ in range(horizon)]
        for a in range(first, last + 1):
            sets[a // n].add(a % n + 1)
        return ErasurePattern.from_sets(n, sets)


@dataclass(frozen=True)
class UnresponsiveServers:
    """Servers in ``servers`` deliver nothing during [t_from, t_to]."""

    servers: tuple[int, ...]
    t_from: int
    t_to: int

    def generate(self, n: int, horizon: int, rng) -> ErasurePattern:
        if self.t_from < 1 or self.t_to > horizon or self.t_from > self.t_to:
            raise ValueError("outage interval outside the horizon")
        if any(not 1 <= j <= n for j in self.servers):
            raise ValueError("server id outside 1..n")
        sets = [set(self.servers) if self.t_from <= t <= self.t_to else set()
                for t in range(1, horizon + 1)]
        return ErasurePattern.from_sets(n, sets)


@dataclass(frozen=True)
class ExplicitChannel:
    """A fixed pattern, typically parsed from a pattern file."""

    pattern: ErasurePattern

    def generate(self, n: int, horizon: int, rng) -> ErasurePattern:
        if self.pattern.n != n or self.pattern.horizon != horizon:
            raise ValueError("explicit pattern shape does not match the scheme")
        return self.pattern


ChannelModel = IidChannel | BurstChannel | UnresponsiveServers | ExplicitChannel


def apply_channel(model: ChannelModel, n: int, horizon: int, rng) -> ErasurePattern:
    """Generate a pattern; deterministic for a given seeded rng."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return model.generate(n, horizon, rng)


@dataclass
class PatternStats:
    max_window_erasures: int
    window_counts: list[int]          # per block-aligned window
    total: int
    window_symbols: int


def pattern_stats(pattern: ErasurePattern, n: int, delta: int) -> PatternStats:
    """Exact sliding-window maxima over windows of (delta+1)*n symbols, plus
    per-window counts at block alignment."""
    bits = [0] * (pattern.horizon * n)
    for t, j in pattern.pairs():
        bits[(t - 1) * n + (j - 1)] = 1
    win = (delta + 1) * n
    if len(bits) <= win:
        mx = sum(bits)
    else:
        run = sum(bits[:win])
        mx = run
        for off in range(len(bits) - win):
            run += bits[off + win] - bits[off]
            if run > mx:
                mx = run
    return PatternStats(
        max_window_erasures=mx,
        window_counts=[len(w) for w in pattern.windows],
        total=pattern.total(),
        window_symbols=win,
    )
