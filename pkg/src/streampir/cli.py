"""Thin command-line client for the service.

Every subcommand builds a request from the JSON config file (plus a few flag
overrides), posts it to the service, and writes the returned report to the
output directory.  By default the app is driven in-process over its HTTP
surface; point --server at a deployed instance to go over the network.

Exit codes: 0 success, 2 config error, 3 budget exceeded, 4 verification
failure (search exhausted, failed suitability flags, decoder counterexample,
or privacy divergence).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .reports import canonical_json, trials_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4


class ServiceClient:
    """In-process (default) or remote HTTP access to the service."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict):
        return self._client.post(path, json=payload)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _apply_globals(cfg: dict, seed: int | None, budget: int | None) -> dict:
    if seed is not None:
        cfg["seed"] = seed
    if budget is not None:
        cfg["budget"] = {"messages": budget, "minors": budget,
                         "randomness": budget, "patterns": budget}
    return cfg


def _post(ctx, path: str, payload: dict) -> dict:
    client: ServiceClient = ctx.obj["client"]
    resp = client.post(path, payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail")
    except Exception:
        detail = resp.text
    if isinstance(detail, dict) and detail.get("kind") == "budget":
        click.echo(f"budget exceeded: {detail.get('message')}", err=True)
        sys.exit(EXIT_BUDGET)
    click.echo(f"config error ({resp.status_code}): {detail}", err=True)
    sys.exit(EXIT_CONFIG)


def _write(ctx, name: str, text: str) -> Path:
    out_dir = Path(ctx.obj["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


@click.group()
@click.option("--server", default=None,
              help="Base URL of a running service; by default the app runs "
                   "in-process.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON experiment config.")
@click.option("--out-dir", default="out", show_default=True,
              help="Directory for reports and per-trial files.")
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--budget", type=int, default=None,
              help="Override every enumeration guard with one value.")
@click.pass_context
def main(ctx, server, config_path, out_dir, seed, budget):
    """Streaming-PIR experiment client."""
    ctx.ensure_object(dict)
    ctx.obj["client"] = ServiceClient(server)
    ctx.obj["out_dir"] = out_dir
    ctx.obj["config"] = _apply_globals(_load_config(config_path), seed, budget)


@main.command("code-search")
@click.pass_context
def code_search(ctx):
    """Search or construct a code and verify its suitability."""
    report = _post(ctx, "/code/search", ctx.obj["config"])
    path = _write(ctx, "report.json", canonical_json(report))
    if report["results"].get("status") != "ok" or report.get("code") is None:
        click.echo(f"search exhausted: {report['results'].get('message', '')} "
                   f"(report: {path})", err=True)
        sys.exit(EXIT_VERIFY)
    code_with_meta = dict(report["code"])
    code_with_meta["suitability"] = report["results"]["suitability"]
    _write(ctx, "code.json", canonical_json(code_with_meta))
    click.echo(f"code found; suitability "
               f"{report['results']['suitability']['all_ok'] and 'all-ok' or 'partial'} "
               f"(report: {path})")


@main.command("code-verify")
@click.pass_context
def code_verify(ctx):
    """Verify an inline code against every suitability check."""
    report = _post(ctx, "/code/verify", ctx.obj["config"])
    path = _write(ctx, "report.json", canonical_json(report))
    ok = report["results"].get("passed", False)
    click.echo(f"verification {'passed' if ok else 'failed'} (report: {path})")
    if not ok:
        sys.exit(EXIT_VERIFY)


@main.command("simulate")
@click.option("--trials", type=int, default=None, help="Override trial count.")
@click.pass_context
def simulate(ctx, trials):
    """Run end-to-end retrieval trials and write report plus per-trial CSV."""
    cfg = ctx.obj["config"]
    if trials is not None:
        cfg["trials"] = trials
    report = _post(ctx, "/simulate", cfg)
    path = _write(ctx, "report.json", canonical_json(report))
    _write(ctx, "trials.csv", trials_csv(report["results"]["trials"]))
    agg = report["results"]["aggregate"]
    click.echo(f"{agg['successes']}/{agg['trials']} trials recovered exactly "
               f"(report: {path})")


@main.command("enumerate")
@click.pass_context
def enumerate_cmd(ctx):
    """Exhaustively enumerate erasure patterns and confirm the predicate."""
    report = _post(ctx, "/enumerate", ctx.obj["config"])
    path = _write(ctx, "report.json", canonical_json(report))
    counts = report["counts"]
    click.echo(f"{counts['predicate_true']}/{counts['patterns_total']} patterns "
               f"correctable; {counts['counterexamples']} counterexamples "
               f"(report: {path})")
    if report["results"].get("status") != "ok":
        sys.exit(EXIT_VERIFY)


@main.command("audit-privacy")
@click.option("--collusion", type=int, default=None,
              help="Diagnostic: audit the joint view of this many servers (2 "
                   "supported) across the J boundary.")
@click.pass_context
def audit_privacy(ctx, collusion):
    """Enumerate the query distributions exactly and report the verdict."""
    cfg = ctx.obj["config"]
    if collusion == 2 and not cfg.get("collusion_pair"):
        n = int(cfg.get("n", 3))
        jj = cfg.get("J") or [n]
        inside = jj[0]
        outside = next(j for j in range(1, n + 1) if j not in set(jj))
        cfg["collusion_pair"] = [inside, outside]
    report = _post(ctx, "/privacy-audit", cfg)
    path = _write(ctx, "report.json", canonical_json(report))
    verdict = report["results"]["verdict"]
    click.echo(f"privacy verdict: {verdict} (report: {path})")
    if verdict != "identical":
        sys.exit(EXIT_VERIFY)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the service with uvicorn."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
