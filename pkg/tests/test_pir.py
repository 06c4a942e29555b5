"""Protocol layer: queries, responses, extraction, stage-2 decoding, privacy."""

import random

import pytest

from streampir.channel import ErasurePattern, UnresponsiveServers
from streampir.conv import ConvCode
from streampir.errors import BudgetExceededError
from streampir.gf import lookup_primitive_spec, prime_field
from streampir.matrices import SolveVerdict, solve_int
from streampir.pir import (Extraction, SchemeParams, build_queries,
                           collusion_audit, compute_responses,
                           correctable_predicate, per_window_predicate,
                           decode_stream, decode_stream_blockwise,
                           encode_storage, extract_stream, extract_timestep,
                           j_cardinality, privacy_audit, sample_J,
                           server_response, stage2_erasure_set,
                           window_lost_flags)

GF3 = prime_field(3)


class _ZeroRng:
    """Stub generator: every draw is zero (mask coefficients all zero)."""

    def randrange(self, n):
        return 0


def _empty_pattern(n, horizon):
    return ErasurePattern.from_sets(n, [set() for _ in range(horizon)])


@pytest.fixture(scope="module")
def scheme(example1_code):
    return SchemeParams(code=example1_code, num_files=3, stream_len=8,
                        wanted=2, J=(5, 6), delta=2)


@pytest.fixture(scope="module")
def pipeline(scheme):
    """Storage, queries and clean responses for the module's scheme."""
    spec = scheme.code.spec
    rng = random.Random(1009)
    files = [[[spec.sample(rng) for _ in range(scheme.k)]
              for _ in range(scheme.stream_len)]
             for _ in range(scheme.num_files)]
    storage = encode_storage(scheme.code, files)
    queries = build_queries(scheme, rng)
    responses = compute_responses(scheme, storage, queries)
    return files, storage, queries, responses


# -- J choice -------------------------------------------------------------------


def test_j_cardinality_examples():
    assert j_cardinality(6, 1, 2) == 2
    assert j_cardinality(10, 2, 2) == 3
    assert j_cardinality(4, 1, 0) == 2
    with pytest.raises(ValueError):
        j_cardinality(4, 2, 2)


def test_sample_j_uniform_size_and_determinism():
    a = sample_J(6, 1, 2, random.Random(4))
    b = sample_J(6, 1, 2, random.Random(4))
    assert a == b and len(a) == 2 and all(1 <= j <= 6 for j in a)


# -- scheme invariants --------------------------------------------------------------


def test_scheme_params_validation(example1_code):
    with pytest.raises(ValueError):
        SchemeParams(example1_code, 2, 5, wanted=3, J=(1,), delta=2)
    with pytest.raises(ValueError):
        SchemeParams(example1_code, 2, 5, wanted=1, J=(), delta=2)
    with pytest.raises(ValueError):
        SchemeParams(example1_code, 2, 5, wanted=1, J=(7,), delta=2)
    with pytest.raises(ValueError):
        SchemeParams(example1_code, 2, 5, wanted=1, J=(1,), delta=3)
    bad_shape = ConvCode(prime_field(2), 2, 1, [[[1, 1]], [[0, 1]]])
    with pytest.raises(ValueError):
        SchemeParams(bad_shape, 2, 5, wanted=1, J=(1,), delta=1)


# -- storage --------------------------------------------------------------------


def test_encode_storage_memoryless():
    code = ConvCode(GF3, 3, 1, [[[1, 2, 1]]])
    st = encode_storage(code, [[[1], [2]]])
    assert st.encoded[0] == [[1, 2, 1], [2, 1, 2]]


def test_encode_storage_hand_convolution():
    code = ConvCode(GF3, 2, 1, [[[1, 1]], [[0, 1]]])
    st = encode_storage(code, [[[2], [1]]])
    # windows 1..stream+memory; the tail window is pure memory
    assert st.encoded[0] == [[2, 2], [1, 0], [0, 1]]
    assert st.stored(2, 1, 1) == 2 and st.stored(1, 1, 2) == 1
    assert st.stored(1, 1, 9) == 0


def test_encoded_windows_live_in_stacked_codes(scheme, pipeline):
    _, storage, _, _ = pipeline
    code = scheme.code
    spec = code.spec
    for i in range(1, scheme.num_files + 1):
        for t in range(1, storage.horizon + 1):
            f = min(t, code.memory)
            gen = code.stacked_generator(f).rows
            rows = [[gen[d][c] for d in range(len(gen))] for c in range(code.n)]
            res = solve_int(spec, rows, len(gen), storage.encoded[i - 1][t - 1])
            assert res.verdict is SolveVerdict.UNIQUE


# -- queries --------------------------------------------------------------------


def test_queries_zero_mask_off_j(scheme):
    qs = build_queries(scheme, _ZeroRng())
    for j in range(1, scheme.n + 1):
        if j not in scheme.J:
            assert qs.queries[j - 1] == [0] * scheme.query_width


def test_queries_zero_mask_on_j(scheme):
    qs = build_queries(scheme, _ZeroRng())
    m, mu, i = scheme.num_files, scheme.memory, scheme.wanted
    expected = [0] * scheme.query_width
    for l in range(mu + 1):
        expected[l * m + (i - 1)] = 1
    for j in scheme.J:
        assert qs.queries[j - 1] == expected


def test_queries_hand_value():
    # query assembly only; the throwaway code skips the suitability sweep
    code = ConvCode(GF3, 4, 1, [[[1, 1, 2, 1]], [[0, 1, 1, 2]]])
    params = SchemeParams(code, num_files=2, stream_len=3, wanted=2,
                          J=(1, 3), delta=code.L, verify_code=False)

    class _FixedRng:
        def __init__(self, vals):
            self.vals = list(vals)

        def randrange(self, n):
            return self.vals.pop(0)

    qs = build_queries(params, _FixedRng([1, 0, 2, 1]))
    assert qs.queries[0] == [1, 1, 2, 2]       # j in J: +e_2, +e_4
    assert qs.queries[1] == [1, 0, 2, 1]       # j not in J: the mask itself


# -- responses -------------------------------------------------------------------


def test_zero_queries_zero_responses(scheme, pipeline):
    _, storage, _, _ = pipeline
    q = [0] * scheme.query_width
    for t in (1, 3, scheme.horizon):
        assert server_response(scheme.code, storage, q, scheme.num_files, 1, t) == 0


def test_memoryless_single_file_response():
    code = ConvCode(GF3, 3, 1, [[[1, 2, 1]]])
    params = SchemeParams(code, num_files=1, stream_len=2, wanted=1,
                          J=(1,), delta=0)
    files = [[[1], [2]]]
    st = encode_storage(code, files)
    q = [2]
    for t in (1, 2):
        for j in (1, 2, 3):
            expect = GF3.mul(2, st.stored(j, 1, t))
            assert server_response(code, st, q, 1, j, t) == expect


def test_response_decomposition(scheme, pipeline):
    """Total response minus the masked payload is a stacked-code codeword."""
    _, storage, _, responses = pipeline
    code, spec = scheme.code, scheme.code.spec
    for t in range(1, scheme.horizon + 1):
        resid = list(responses[t - 1])
        for c in scheme.J:
            acc = 0
            for l in range(code.memory + 1):
                r = t - l
                if r >= 1:
                    acc = spec.add(acc,
                                   storage.encoded[scheme.wanted - 1][r - 1][c - 1])
            resid[c - 1] = spec.sub(resid[c - 1], acc)
        f = min(t, code.memory)
        gen = code.stacked_generator(f).rows
        rows = [[gen[d][c] for d in range(len(gen))] for c in range(code.n)]
        assert solve_int(spec, rows, len(gen), resid).verdict is SolveVerdict.UNIQUE


# -- extraction ------------------------------------------------------------------


def test_extract_zero_mask_returns_exact_window(scheme):
    """With an all-zero mask the responses on J are exactly the accumulated
    windows; extraction must return them untouched."""
    spec = scheme.code.spec
    rng = random.Random(77)
    files = [[[spec.sample(rng) for _ in range(scheme.k)]
              for _ in range(scheme.stream_len)]
             for _ in range(scheme.num_files)]
    storage = encode_storage(scheme.code, files)
    queries = build_queries(scheme, _ZeroRng())
    responses = compute_responses(scheme, storage, queries)
    for t in (1, 2, 5, scheme.horizon):
        ex = extract_timestep(scheme.code, t, responses[t - 1], frozenset(), scheme.J)
        assert not ex.window_lost
        for c in scheme.J:
            acc = 0
            for l in range(scheme.memory + 1):
                r = t - l
                if r >= 1:
                    acc = spec.add(acc,
                                   storage.encoded[scheme.wanted - 1][r - 1][c - 1])
            assert ex.values[c] == acc


def test_extract_thresholds_example1(scheme, pipeline):
    _, _, _, responses = pipeline
    code = scheme.code
    # window 1: stacked level 1, dimension 2; slack outside J is 2
    ex = extract_timestep(code, 1, responses[0], frozenset({1, 2}), scheme.J)
    assert not ex.window_lost
    ex = extract_timestep(code, 1, responses[0], frozenset({1, 2, 3}), scheme.J)
    assert ex.window_lost
    # window 2 onward: dimension 3; slack outside J is 1
    ex = extract_timestep(code, 2, responses[1], frozenset({1}), scheme.J)
    assert not ex.window_lost
    ex = extract_timestep(code, 2, responses[1], frozenset({1, 2}), scheme.J)
    assert ex.window_lost


def test_extract_partial_j_information(scheme, pipeline):
    """J positions hit by the channel are lost, the spared one still surfaces."""
    _, _, _, responses = pipeline
    ex = extract_timestep(scheme.code, 3, responses[2], frozenset({5}), scheme.J)
    assert not ex.window_lost
    assert set(ex.values) == {6}


def test_extraction_flags_corruption(scheme, pipeline):
    """A flipped (not erased) symbol leaves the clean coordinates mutually
    inconsistent, which is reported as corruption rather than handled."""
    from streampir.errors import CorruptedStreamError
    _, _, _, responses = pipeline
    spec = scheme.code.spec
    t = 4
    tampered = list(responses[t - 1])
    victim = next(c for c in range(1, scheme.n + 1) if c not in scheme.J)
    tampered[victim - 1] = spec.add(tampered[victim - 1], 1)
    with pytest.raises(CorruptedStreamError):
        extract_timestep(scheme.code, t, tampered, frozenset(), scheme.J)


def test_extraction_threshold_is_sharp(scheme, pipeline):
    """At the bound the stacked system is underdetermined: one fewer clean
    coordinate than the dimension leaves multiple codeword completions."""
    code, spec = scheme.code, scheme.code.spec
    _, _, _, responses = pipeline
    t = 2
    dim = (min(t, code.memory) + 1) * code.k
    erased = frozenset({1, 2})                # |T u J| = 4 > n - dim = 3
    clean = [c for c in range(1, code.n + 1)
             if c not in erased and c not in scheme.J]
    assert len(clean) == dim - 1
    gen = code.stacked_generator(min(t, code.memory)).rows
    rows = [[gen[d][c - 1] for d in range(dim)] for c in clean]
    rhs = [responses[t - 1][c - 1] for c in clean]
    assert solve_int(spec, rows, dim, rhs).verdict is SolveVerdict.UNDERDETERMINED


# -- stage-2 assembly ---------------------------------------------------------------


def test_stage2_erasure_set_cases():
    J = (5, 6)
    clean = Extraction(window_lost=False, values={5: 1, 6: 2})
    lost = Extraction(window_lost=True)
    hit = Extraction(window_lost=False, values={6: 2})
    out = stage2_erasure_set([clean, lost, hit], J, 6)
    # window 1: the four non-J positions
    assert {1, 2, 3, 4} <= out and not {5, 6} & out
    # window 2: everything
    assert {7, 8, 9, 10, 11, 12} <= out
    # window 3: non-J plus the hit J position 5
    assert {13, 14, 15, 16, 17} <= out and 18 not in out


def test_stage2_set_matches_direct_formula(scheme, pipeline):
    """Set equality against a literal position-by-position transliteration
    of the assembly rule: transmission erasures plus the masked complement
    of J when the window survives, the whole window otherwise."""
    _, _, _, responses = pipeline
    rng = random.Random(314)
    n = scheme.n
    for _ in range(30):
        sets = [{j for j in range(1, n + 1) if rng.random() < 0.25}
                for _ in range(scheme.horizon)]
        pattern = ErasurePattern.from_sets(n, sets)
        extractions = extract_stream(scheme.code, responses, pattern, scheme.J)
        got = stage2_erasure_set(extractions, scheme.J, n)
        expected = set()
        for t in range(1, scheme.horizon + 1):
            off = (t - 1) * n
            if not extractions[t - 1].window_lost:
                expected |= {off + j for j in sets[t - 1]}
                expected |= {off + j for j in range(1, n + 1)} - \
                            {off + j for j in scheme.J}
            else:
                expected |= {off + j for j in range(1, n + 1)}
        assert got == expected


# -- end-to-end decode ----------------------------------------------------------------


def test_clean_round_trip(scheme, pipeline):
    files, _, _, responses = pipeline
    pattern = _empty_pattern(scheme.n, scheme.horizon)
    extractions = extract_stream(scheme.code, responses, pattern, scheme.J)
    out = decode_stream(scheme, extractions)
    assert out.success and out.blocks == files[scheme.wanted - 1]
    assert out.max_delay == 0


def test_predicate_filtered_round_trip(scheme):
    spec = scheme.code.spec
    recovered = 0
    for trial in range(25):
        rng = random.Random(3000 + trial)
        files = [[[spec.sample(rng) for _ in range(scheme.k)]
                  for _ in range(scheme.stream_len)]
                 for _ in range(scheme.num_files)]
        storage = encode_storage(scheme.code, files)
        queries = build_queries(scheme, rng)
        responses = compute_responses(scheme, storage, queries)
        from streampir.channel import IidChannel
        while True:
            pattern = IidChannel(0.10).generate(scheme.n, scheme.horizon, rng)
            if correctable_predicate(scheme.code, pattern, scheme.J, scheme.delta):
                break
        extractions = extract_stream(scheme.code, responses, pattern, scheme.J)
        out = decode_stream(scheme, extractions)
        assert out.success and out.blocks == files[scheme.wanted - 1], trial
        assert out.max_delay <= scheme.delta
        recovered += 1
    assert recovered == 25


def test_outage_recovers_convolutionally_but_not_blockwise(scheme, pipeline):
    files, _, _, responses = pipeline
    jstar = scheme.J[0]
    pattern = UnresponsiveServers((jstar,), 1, scheme.horizon).generate(
        scheme.n, scheme.horizon, random.Random(0))
    assert correctable_predicate(scheme.code, pattern, scheme.J, scheme.delta)
    extractions = extract_stream(scheme.code, responses, pattern, scheme.J)
    out = decode_stream(scheme, extractions)
    assert out.success and out.blocks == files[scheme.wanted - 1]
    base = decode_stream_blockwise(scheme, extractions)
    assert not base.success and base.fail_position == 1


def test_whole_j_window_erased_still_recovers(scheme, pipeline):
    """One window loses every J symbol; memory in the neighbours carries it."""
    files, _, _, responses = pipeline
    sets = [set() for _ in range(scheme.horizon)]
    sets[3] = set(scheme.J)
    pattern = ErasurePattern.from_sets(scheme.n, sets)
    assert correctable_predicate(scheme.code, pattern, scheme.J, scheme.delta)
    extractions = extract_stream(scheme.code, responses, pattern, scheme.J)
    assert extractions[3].values == {}
    out = decode_stream(scheme, extractions)
    assert out.success and out.blocks == files[scheme.wanted - 1]


def test_everything_erased_fails_at_one(scheme, pipeline):
    _, _, _, responses = pipeline
    sets = [set(range(1, 7)) for _ in range(scheme.horizon)]
    pattern = ErasurePattern.from_sets(scheme.n, sets)
    assert not correctable_predicate(scheme.code, pattern, scheme.J, scheme.delta)
    extractions = extract_stream(scheme.code, responses, pattern, scheme.J)
    out = decode_stream(scheme, extractions)
    assert not out.success and out.fail_position == 1


# -- predicates ------------------------------------------------------------------


def _pattern18(n, window_sets):
    return ErasurePattern.from_sets(n, [set(s) for s in window_sets])


def test_predicate_published_cases(example1_code):
    code, J = example1_code, (5, 6)
    # 2 erasures in window-1 outside J, 1 each in 2 and 3, 3 across J
    pat = _pattern18(6, [{1, 2, 5}, {3, 6}, {4, 5}])
    assert correctable_predicate(code, pat, J, 2)
    flags = window_lost_flags(code, pat, J)
    assert flags == [False, False, False]
    # all positions erased
    assert not correctable_predicate(
        code, _pattern18(6, [set(range(1, 7))] * 3), J, 2)
    # window 1 fully lost, one further J erasure elsewhere
    pat = _pattern18(6, [set(range(1, 7)), {5}, set()])
    assert window_lost_flags(code, pat, J)[0]
    assert correctable_predicate(code, pat, J, 2)
    # ...but two further J erasures exceed the stream budget
    pat = _pattern18(6, [set(range(1, 7)), {5}, {6}])
    assert not correctable_predicate(code, pat, J, 2)


def test_predicate_horizon_guard(example1_code):
    pat = _pattern18(6, [set(), set()])
    with pytest.raises(ValueError):
        correctable_predicate(example1_code, pat, (5, 6), 2)


def test_per_window_reading_is_looser(example1_code):
    """The per-window variant admits patterns the operative stream-budget
    condition rejects: four J hits across two windows."""
    code, J = example1_code, (5, 6)
    pat = _pattern18(6, [{5, 6}, {5, 6}, set()])
    assert per_window_predicate(code, pat, J, 2)
    assert not correctable_predicate(code, pat, J, 2)


def test_example2_window_tolerances(example2_code):
    """(10,2,2): three erasures outside J clear window 1, one clears the
    later windows; one more in either case trips the stage-1 threshold."""
    code = example2_code
    J = (8, 9, 10)
    assert j_cardinality(10, 2, 2) == 3
    horizon = 3
    base = [set(), set(), set()]
    for t, slack in ((1, 3), (2, 1), (3, 1)):
        sets = [set(s) for s in base]
        sets[t - 1] = set(range(1, slack + 1))
        assert not window_lost_flags(code, ErasurePattern.from_sets(10, sets), J)[t - 1]
        sets[t - 1] = set(range(1, slack + 2))
        assert window_lost_flags(code, ErasurePattern.from_sets(10, sets), J)[t - 1]
    # 8 total: 3+1+1 outside J plus 3 at J positions stays correctable
    sets = [{1, 2, 3, 8}, {4, 9}, {5, 10}]
    assert correctable_predicate(code, ErasurePattern.from_sets(10, sets), J, 2)


# -- privacy ---------------------------------------------------------------------


def test_privacy_exact_small():
    spec = prime_field(2)
    audit = privacy_audit(spec, n=3, m=2, mu=1, J=(3,))
    assert audit.randomness_values == 16
    assert audit.identical and audit.uniform and audit.witness is None
    for j in audit.tables:
        for i in audit.tables[j]:
            assert len(audit.tables[j][i]) == 16
            assert set(audit.tables[j][i].values()) == {1}


def test_privacy_bijection_other_params():
    for spec, n, m, mu, J in [(prime_field(3), 3, 1, 1, (2,)),
                              (prime_field(2), 4, 2, 1, (1, 4)),
                              (lookup_primitive_spec(2), 3, 1, 1, (3,))]:
        audit = privacy_audit(spec, n=n, m=m, mu=mu, J=J)
        assert audit.identical and audit.uniform


def test_privacy_budget_guard():
    with pytest.raises(BudgetExceededError):
        privacy_audit(lookup_primitive_spec(8), n=3, m=2, mu=1, J=(3,), budget=100)


def test_collusion_across_j_boundary_reveals_index():
    spec = prime_field(2)
    witness = collusion_audit(spec, n=3, m=2, mu=1, J=(3,), pair=(3, 1))
    assert witness is not None
    both_outside = collusion_audit(spec, n=3, m=2, mu=1, J=(3,), pair=(1, 2))
    assert both_outside is None
