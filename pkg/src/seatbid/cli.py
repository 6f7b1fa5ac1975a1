"""Operator command line.

serve         run the HTTP service
scenario run  execute a scripted end-to-end round with a deterministic clock
audit         verify a ledger offline and recompute its settlement
compare       token settlement vs first-come-first-served on one script

Exit codes: 0 success, 1 integrity/diff/rule failure, 2 usage or parse error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import scenario as scenario_mod
from . import settlement
from .audit import audit_ledger
from .errors import ScenarioError


@click.group()
def main():
    """Token-voting course selection toolkit."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def serve(config_path):
    """Run the HTTP service (config file JSON, env vars override)."""
    import uvicorn

    from .service import ServiceRuntime, create_app, load_config

    cfg = load_config(config_path)
    runtime = ServiceRuntime(cfg)
    app = create_app(runtime)
    click.echo(f"serving on {cfg.host}:{cfg.port}, ledger at {cfg.ledger_path}")
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")


@main.group()
def scenario():
    """Scripted scenario tools."""


def _load_events(script: str):
    try:
        return scenario_mod.parse_scenario_file(script)
    except ScenarioError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(2)


@scenario.command("run")
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def scenario_run(script, out_dir):
    """Run SCRIPT and write ledger.jsonl, results.csv, summary.csv to --out."""
    events = _load_events(script)
    try:
        outcome = scenario_mod.run_scenario(events)
    except ScenarioError as exc:
        click.echo(f"scenario failed: {exc}", err=True)
        sys.exit(1)
    paths = scenario_mod.write_bundle(outcome, out_dir)
    click.echo(f"wrote {len(outcome.blocks)} blocks to {paths['ledger']}")
    if outcome.result is not None:
        awarded = len(outcome.result.awards)
        click.echo(f"settled: {awarded} award(s); results at {paths['results']}")
    else:
        click.echo("no settle event in script; ledger only")


@main.command()
@click.argument("ledger_file", type=click.Path(exists=True, dir_okay=False))
def audit(ledger_file):
    """Verify chain integrity and recompute the recorded settlement."""
    report = audit_ledger(ledger_file)
    click.echo(report.line())
    sys.exit(0 if report.ok else 1)


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
def compare(script):
    """Report how token settlement differs from first-come-first-served."""
    events = _load_events(script)
    if not any(e.action == "settle" for e in events):
        click.echo("parse error: compare requires a settle event", err=True)
        sys.exit(2)
    try:
        outcome = scenario_mod.run_scenario(events)
    except ScenarioError as exc:
        click.echo(f"scenario failed: {exc}", err=True)
        sys.exit(1)

    inst = outcome.instance
    token_result = outcome.result
    fcfs_result = settlement.fcfs_allocate(inst)

    click.echo(f"epoch {inst.epoch_id}: token settlement vs first-come-first-served")
    click.echo("")
    click.echo("per-student awarded credits (declared / tokens / fcfs):")
    token_short = fcfs_short = 0
    for student in sorted(inst.declared):
        declared = inst.declared[student]
        tok = token_result.per_student_credits.get(student, 0)
        fcf = fcfs_result.per_student_credits.get(student, 0)
        token_short += declared - tok
        fcfs_short += declared - fcf
        click.echo(f"  {student}: {declared} / {tok} / {fcf}")
    click.echo(f"total shortfall credits: tokens={token_short} fcfs={fcfs_short}")
    click.echo("")

    changed = []
    for course in sorted(c.course_id for c in inst.courses):
        tok_winners = sorted(a.student_id for a in token_result.awards if a.course_id == course)
        fcf_winners = sorted(a.student_id for a in fcfs_result.awards if a.course_id == course)
        if tok_winners != fcf_winners:
            changed.append((course, tok_winners, fcf_winners))
    if changed:
        click.echo("seats that changed hands:")
        for course, tok_winners, fcf_winners in changed:
            click.echo(
                f"  {course}: tokens -> {','.join(tok_winners) or '-'}; "
                f"fcfs -> {','.join(fcf_winners) or '-'}"
            )
    else:
        click.echo("no contested seats changed hands")


if __name__ == "__main__":
    main()
