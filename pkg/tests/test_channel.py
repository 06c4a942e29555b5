"""Channel models, pattern files, sliding-window statistics."""

import math
import random

import pytest

from streampir.channel import (BurstChannel, ErasurePattern, ExplicitChannel,
                               IidChannel, UnresponsiveServers, apply_channel,
                               pattern_stats)


def test_iid_extremes():
    empty = apply_channel(IidChannel(0.0), 6, 5, random.Random(1))
    assert empty.total() == 0
    full = apply_channel(IidChannel(1.0), 6, 5, random.Random(1))
    assert full.total() == 30


def test_iid_rate_within_five_sigma():
    n, horizon, eps = 10, 10_000, 0.2
    pat = apply_channel(IidChannel(eps), n, horizon, random.Random(9))
    draws = n * horizon
    sigma = math.sqrt(draws * eps * (1 - eps))
    assert abs(pat.total() - draws * eps) < 5 * sigma


def test_seed_determinism():
    for model in (IidChannel(0.3), BurstChannel(2, 7),
                  UnresponsiveServers((2, 5), 1, 4)):
        a = apply_channel(model, 6, 6, random.Random(123))
        b = apply_channel(model, 6, 6, random.Random(123))
        assert a == b


def test_unresponsive_server_column():
    pat = apply_channel(UnresponsiveServers((2,), 1, 4), 6, 4, random.Random(0))
    assert all(pat.window(t) == frozenset({2}) for t in range(1, 5))
    partial = apply_channel(UnresponsiveServers((3, 4), 2, 3), 6, 4, random.Random(0))
    assert partial.window(1) == frozenset()
    assert partial.window(2) == frozenset({3, 4})
    with pytest.raises(ValueError):
        apply_channel(UnresponsiveServers((1,), 0, 2), 6, 4, random.Random(0))


def test_burst_spans_windows():
    pat = apply_channel(BurstChannel(1, 8), 6, 3, random.Random(0))
    assert pat.window(1) == frozenset(range(1, 7))
    assert pat.window(2) == frozenset({1, 2})
    with pytest.raises(ValueError):
        apply_channel(BurstChannel(3, 10), 6, 3, random.Random(0))


def test_explicit_round_trip(tmp_path):
    pat = apply_channel(IidChannel(0.4), 6, 5, random.Random(3))
    path = tmp_path / "pattern.txt"
    pat.write(path)
    back = ErasurePattern.read(path, 6, 5)
    assert back == pat
    assert back.to_text() == pat.to_text()
    again = apply_channel(ExplicitChannel(back), 6, 5, random.Random(99))
    assert again == pat


def test_pattern_file_comments_and_blanks():
    text = "# comment\n\n1,2\n1,3\n\n# more\n4,6\n"
    pat = ErasurePattern.from_text(text, 6, 5)
    assert pat.window(1) == frozenset({2, 3})
    assert pat.window(4) == frozenset({6})


def test_pattern_file_malformed():
    with pytest.raises(ValueError):
        ErasurePattern.from_text("1;2\n", 6, 3)
    with pytest.raises(ValueError):
        ErasurePattern.from_text("1,9\n", 6, 3)
    with pytest.raises(ValueError):
        ErasurePattern.from_text("7,1\n", 6, 3)
    with pytest.raises(ValueError):
        ErasurePattern.from_text("a,1\n", 6, 3)


def test_pattern_stats_examples():
    empty = ErasurePattern.from_sets(6, [set(), set(), set()])
    assert pattern_stats(empty, 6, 2).max_window_erasures == 0
    one = ErasurePattern.from_sets(6, [set(), {4}, set()])
    assert pattern_stats(one, 6, 2).max_window_erasures == 1
    outage = ErasurePattern.from_sets(6, [{2}, {2}, {2}])
    st = pattern_stats(outage, 6, 2)
    assert st.max_window_erasures == 3
    assert st.window_counts == [1, 1, 1]
    assert st.total == 3


def test_pattern_stats_sliding_window_is_symbol_granular():
    # two erasures 17 symbols apart: a single 18-symbol window catches both
    sets = [set() for _ in range(4)]
    sets[0].add(2)
    sets[2].add(6)     # absolute positions 2 and 18
    pat = ErasurePattern.from_sets(6, sets)
    assert pattern_stats(pat, 6, 2).max_window_erasures == 2
