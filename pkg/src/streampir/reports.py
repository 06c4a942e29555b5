"""Canonical report serialization.

Reports are plain dicts with the stable top-level keys ``config``, ``code``,
``results``, ``counts``, ``findings``.  JSON output is canonicalized (sorted
keys, fixed separators) so identical runs are byte-identical; per-trial CSV
rows carry a fixed column set in trial order.
"""

from __future__ import annotations

import json
from typing import Any

TRIAL_FIELDS = ["trial", "seed", "success", "fail_pos", "max_delay", "erasures",
                "windows_lost"]


def make_report(config: dict, code: dict | None = None,
                results: dict | None = None, counts: dict | None = None,
                findings: list | None = None) -> dict:
    return {
        "config": config,
        "code": code,
        "results": results or {},
        "counts": counts or {},
        "findings": findings or [],
    }


def canonical_json(report: Any) -> str:
    return json.dumps(report, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def trials_csv(rows: list[dict]) -> str:
    lines = [",".join(TRIAL_FIELDS)]
    for row in rows:
        cells = []
        for f in TRIAL_FIELDS:
            v = row.get(f)
            if v is None:
                cells.append("")
            elif isinstance(v, bool):
                cells.append("1" if v else "0")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


PRNG_NOTE = {
    "algorithm": "python-random-mersenne-twister",
    "stream_derivation": "sha256(master_seed:role:index) -> 64-bit stream seed",
}
