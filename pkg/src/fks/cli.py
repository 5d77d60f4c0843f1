"""Command-line client.

All commands are thin wrappers over the shared pipeline; with ``--server``
(or FKS_SERVER in the environment) they delegate to a running service
instead and render identical output.

Exit status: 0 accepted/success, 1 rejected data, 2 malformed input.
FKS_CLOSURE_CAP overrides the group-closure cap.
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction

import click

from . import __version__, pipeline
from .extension import InvalidExtensionError
from .formats import ParseError, parse_document, parse_matrix_literal
from .matgroup import DEFAULT_CLOSURE_CAP

EXIT_ACCEPTED = 0
EXIT_REJECTED = 1
EXIT_MALFORMED = 2


def _closure_cap() -> int:
    raw = os.environ.get("FKS_CLOSURE_CAP")
    if raw is None:
        return DEFAULT_CLOSURE_CAP
    try:
        cap = int(raw)
        if cap < 1:
            raise ValueError
        return cap
    except ValueError:
        _fail(f"invalid FKS_CLOSURE_CAP value {raw!r}", EXIT_MALFORMED)


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        _fail(str(e), EXIT_MALFORMED)


def _parse(path: str):
    try:
        return parse_document(_read_file(path))
    except ParseError as e:
        _fail(str(e), EXIT_MALFORMED)


def _report_json(report) -> str:
    return json.dumps(report.to_json_dict(), indent=2) + "\n"


@click.group()
@click.option(
    "--server",
    envvar="FKS_SERVER",
    default=None,
    help="Base URL of a running fks service; commands go over HTTP.",
)
@click.version_option(version=__version__)
@click.pass_context
def main(ctx, server):
    """Decide and build flat Kähler solvmanifold models from extension data."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


def _post(server: str, endpoint: str, payload: dict) -> dict:
    import httpx

    try:
        response = httpx.post(f"{server.rstrip('/')}{endpoint}", json=payload, timeout=60.0)
    except httpx.HTTPError as e:
        _fail(f"server request failed: {e}", EXIT_MALFORMED)
    if response.status_code == 422:
        _fail(f"server rejected input: {response.json().get('detail')}", EXIT_MALFORMED)
    if response.status_code != 200:
        _fail(f"server error {response.status_code}: {response.text}", EXIT_MALFORMED)
    return response.json()


@main.command()
@click.argument("file", type=click.Path())
@click.pass_context
def validate(ctx, file):
    """Check the structural invariants and the four conditions."""
    server = ctx.obj.get("server")
    if server:
        data = _post(server, "/validate", {"document": _read_file(file)})
        click.echo(json.dumps(data, indent=2))
        sys.exit(EXIT_ACCEPTED if data["classification"] == "accepted" else EXIT_REJECTED)
    doc = _parse(file)
    report = pipeline.run_validate(doc, cap=_closure_cap())
    click.echo(_report_json(report), nl=False)
    sys.exit(EXIT_ACCEPTED if report.accepted else EXIT_REJECTED)


@main.command()
@click.argument("file", type=click.Path())
@click.option("--json", "json_out", type=click.Path(), default=None, help="Write the report to this path.")
@click.option("--seed-metric", type=click.Path(), default=None, help="File with a bracketed seed metric matrix.")
@click.pass_context
def build(ctx, file, json_out, seed_metric):
    """Run the full pipeline and emit the model report."""
    seed = None
    if seed_metric is not None:
        try:
            seed = parse_matrix_literal(_read_file(seed_metric))
        except ParseError as e:
            _fail(f"seed metric: {e}", EXIT_MALFORMED)
    server = ctx.obj.get("server")
    if server:
        payload = {"document": _read_file(file)}
        if seed is not None:
            payload["seed_metric"] = [
                [str(Fraction(x)) for x in row] for row in seed
            ]
        data = _post(server, "/build", payload)
        text = json.dumps(data, indent=2) + "\n"
        accepted = data["classification"] == "accepted"
    else:
        doc = _parse(file)
        try:
            report, _ = pipeline.run_build(doc, seed_metric=seed, cap=_closure_cap())
        except (InvalidExtensionError, ValueError) as e:
            _fail(str(e), EXIT_REJECTED)
        text = _report_json(report)
        accepted = report.accepted
        data = report.to_json_dict()
    if json_out:
        with open(json_out, "w", encoding="utf-8") as f:
            f.write(text)
        if accepted:
            click.echo("accepted")
        else:
            rej = data["rejection"]
            click.echo(f"rejected({rej['condition']}: {rej['reason']})")
    else:
        click.echo(text, nl=False)
    sys.exit(EXIT_ACCEPTED if accepted else EXIT_REJECTED)


@main.command()
@click.argument("file", type=click.Path())
@click.pass_context
def classify(ctx, file):
    """One-line verdict: torus | torus-quotient(order k) | rejected(reason)."""
    server = ctx.obj.get("server")
    if server:
        data = _post(server, "/classify", {"document": _read_file(file)})
        click.echo(data["verdict"])
        sys.exit(EXIT_ACCEPTED if data["accepted"] else EXIT_REJECTED)
    doc = _parse(file)
    verdict, accepted = pipeline.run_classify(doc, cap=_closure_cap())
    click.echo(verdict)
    sys.exit(EXIT_ACCEPTED if accepted else EXIT_REJECTED)


@main.command()
@click.argument("file", type=click.Path())
@click.pass_context
def abelianize(ctx, file):
    """First Betti number and torsion of the abelianized group."""
    server = ctx.obj.get("server")
    if server:
        data = _post(server, "/abelianize", {"document": _read_file(file)})
        b1, torsion = data["b1"], data["torsion"]
    else:
        doc = _parse(file)
        try:
            b1, torsion = pipeline.run_abelianize(doc)
        except InvalidExtensionError as e:
            _fail(str(e), EXIT_REJECTED)
    click.echo(f"b1 = {b1}")
    click.echo(f"torsion = {json.dumps(torsion)}")
    sys.exit(EXIT_ACCEPTED)


@main.command()
@click.argument("name", required=False)
@click.pass_context
def examples(ctx, name):
    """List the built-in examples, or emit one as an input document."""
    server = ctx.obj.get("server")
    if name is None:
        if server:
            import httpx

            data = httpx.get(f"{server.rstrip('/')}/examples", timeout=30.0).json()
            names = data["examples"]
        else:
            names = pipeline.example_names()
        for n in names:
            click.echo(n)
        sys.exit(EXIT_ACCEPTED)
    if server:
        import httpx

        response = httpx.get(f"{server.rstrip('/')}/examples/{name}", timeout=30.0)
        if response.status_code == 404:
            _fail(response.json()["detail"], EXIT_MALFORMED)
        click.echo(response.json()["document"], nl=False)
        sys.exit(EXIT_ACCEPTED)
    try:
        click.echo(pipeline.example_document(name), nl=False)
    except KeyError as e:
        _fail(str(e.args[0]), EXIT_MALFORMED)
    sys.exit(EXIT_ACCEPTED)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service (requires uvicorn)."""
    try:
        import uvicorn
    except ImportError:
        _fail("uvicorn is not installed; install fks[server]", EXIT_MALFORMED)
    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
