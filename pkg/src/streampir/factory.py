"""Production of streaming-suitable convolutional codes.

Two routes: the algebraic power-tower construction (entries are powers
alpha^(2^e) of a primitive element, valid over huge binary fields; only
micro parameter sets are feasible on a desk) and randomized search over
moderate fields with full verification.  Both are judged by the same
:func:`verify_suitability` report, which separates the construction-quality
flags (maximal column distances, stacked MDS levels, basicness) from the
streaming shape constraint (memory + 2) * k <= n that the retrieval scheme
additionally needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .conv import (ConvCode, _constrained_minor_count, is_basic,
                   is_column_optimal, is_stacked_mds)
from .errors import BudgetExceededError, SearchExhaustedError
from .gf import FieldSpec, lookup_primitive_spec
from .matrices import rank_int


@dataclass
class SuitabilityReport:
    """Outcome of a full code verification; every flag is backed by a
    completed (non-aborted) check."""

    is_mdp: bool
    stacked_mds: dict[int, bool]
    is_basic: bool
    streaming_shape_ok: bool
    field_order: int
    checks: dict = field(default_factory=dict)

    @property
    def construction_ok(self) -> bool:
        """The properties the code constructions certify: maximal column
        distances at window L, all stacked levels MDS, basic generator."""
        return self.is_mdp and all(self.stacked_mds.values()) and self.is_basic

    @property
    def all_ok(self) -> bool:
        return self.construction_ok and self.streaming_shape_ok

    def to_dict(self) -> dict:
        return {
            "is_mdp": self.is_mdp,
            "stacked_mds": {str(f): v for f, v in self.stacked_mds.items()},
            "is_basic": self.is_basic,
            "streaming_shape_ok": self.streaming_shape_ok,
            "construction_ok": self.construction_ok,
            "all_ok": self.all_ok,
            "field_order": self.field_order,
            "checks": self.checks,
        }


def verify_suitability(code: ConvCode, minor_budget: int = 10 ** 7) -> SuitabilityReport:
    """Run every suitability check; aborts whole (via BudgetExceededError)
    rather than reporting partially when a guard is hit."""
    n, k, mu = code.n, code.k, code.memory
    mdp_minors = _constrained_minor_count(n, k, code.L)
    stacked_minors = {f: math.comb(n, (f + 1) * k)
                      for f in range(mu + 1) if (f + 1) * k <= n}
    total = mdp_minors + sum(stacked_minors.values())
    if total > minor_budget:
        raise BudgetExceededError(
            f"suitability verification needs {total} minors (budget {minor_budget})")
    stacked = {}
    for f in range(mu + 1):
        if (f + 1) * k <= n:
            stacked[f] = is_stacked_mds(code, f)
        else:
            stacked[f] = False
    mdp = is_column_optimal(code, code.L, max_minors=minor_budget)
    basic = is_basic(code)
    return SuitabilityReport(
        is_mdp=mdp,
        stacked_mds=stacked,
        is_basic=basic,
        streaming_shape_ok=code.streaming_shape_ok,
        field_order=code.spec.order,
        checks={
            "mdp_minors": mdp_minors,
            "stacked_minors": {str(f): c for f, c in stacked_minors.items()},
            "window_index": code.L,
        },
    )


def construct_alpha_power(n: int, k: int, mu: int, degree: int) -> ConvCode:
    """Power-tower code over GF(2^degree): entry (r, c) of G_i is
    alpha^(2^(i*n + r + c)), alpha the tabulated primitive element.

    The guarantee needs the extension degree to exceed every exponent index
    ever formed by a minor, hence the bound below; degrees beyond micro
    parameter sets are astronomically large and rejected by the table.
    """
    if n <= k:
        raise ValueError("require k < n")
    delta = k * mu
    big_l = delta // k + delta // (n - k) if mu else 0
    bound = max(2 ** (n * (big_l + 2) - 1), 2 ** ((mu + 1) * n + k - 1))
    if degree <= bound:
        raise ValueError(
            f"extension degree {degree} does not exceed the bound {bound} "
            f"for (n={n}, k={k}, memory={mu})")
    spec = lookup_primitive_spec(degree)
    top = mu * n + (n - 1) + (k - 1)   # largest exponent index used
    powers = [spec.primitive_element]
    for _ in range(top):
        prev = powers[-1]
        powers.append(spec.mul(prev, prev))
    coeffs = []
    for i in range(mu + 1):
        g = [[powers[i * n + r + c] for c in range(n)] for r in range(k)]
        coeffs.append(g)
    return ConvCode(spec, n, k, coeffs)


@dataclass
class SearchResult:
    code: ConvCode
    report: SuitabilityReport
    attempts: int
    rejects: dict


def search_code(n: int, k: int, mu: int, spec: FieldSpec, rng,
                max_attempts: int = 2000,
                minor_budget: int = 10 ** 7) -> SearchResult:
    """Randomized search: sample G_0..G_mu uniformly, verify, repeat.

    Rejection is staged cheapest-first (G_mu rank, G_0 minors, stacked
    levels, the big maximal-distance sweep, basicness); the first verified
    code wins, deterministically for a given rng state.  When the streaming
    shape (mu+2)k <= n is unattainable for these parameters the search still
    looks for construction-quality codes, mirroring the algebraic route.
    """
    if n <= k:
        raise ValueError("require k < n")
    if (mu + 1) * k > n:
        raise ValueError(
            f"stacked dimension {(mu + 1) * k} exceeds block length {n}; "
            f"no (n={n}, k={k}, memory={mu}) code can verify")
    mdp_minors = _constrained_minor_count(n, k, mu + (k * mu) // (n - k))
    if mdp_minors > minor_budget:
        raise BudgetExceededError(
            f"search would sweep {mdp_minors} minors per attempt "
            f"(budget {minor_budget})")
    rejects = {"g_mu_rank": 0, "stacked": 0, "mdp": 0, "basic": 0}
    for attempt in range(1, max_attempts + 1):
        coeffs = [[[spec.sample(rng) for _ in range(n)] for _ in range(k)]
                  for _ in range(mu + 1)]
        if rank_int(spec, [list(r) for r in coeffs[mu]]) != k:
            rejects["g_mu_rank"] += 1
            continue
        if rank_int(spec, [list(r) for r in coeffs[0]]) != k:
            rejects["stacked"] += 1
            continue
        code = ConvCode(spec, n, k, coeffs)
        stacked = {}
        ok = True
        for f in range(mu + 1):
            stacked[f] = is_stacked_mds(code, f)
            if not stacked[f]:
                ok = False
                break
        if not ok:
            rejects["stacked"] += 1
            continue
        if not is_column_optimal(code, code.L, max_minors=minor_budget):
            rejects["mdp"] += 1
            continue
        if not is_basic(code):
            rejects["basic"] += 1
            continue
        report = SuitabilityReport(
            is_mdp=True,
            stacked_mds=stacked,
            is_basic=True,
            streaming_shape_ok=code.streaming_shape_ok,
            field_order=spec.order,
            checks={"attempts": attempt, "rejects": dict(rejects),
                    "mdp_minors": mdp_minors},
        )
        return SearchResult(code=code, report=report, attempts=attempt,
                            rejects=dict(rejects))
    raise SearchExhaustedError(
        f"no suitable (n={n}, k={k}, memory={mu}) code over {spec!r} "
        f"in {max_attempts} attempts",
        attempts=max_attempts,
        stats=dict(rejects),
    )
