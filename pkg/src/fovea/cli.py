"""Command-line interface.

The CLI is a thin client of the HTTP service: every command builds a request,
sends it (to `--server`, or to an in-process instance of the app when no
server is given), and formats the response. Compute always happens service-
side, so CLI and remote callers measure and produce exactly the same thing.

Exit codes: 0 success (ICP converged), 1 error, 2 ICP did not converge.
"""
from __future__ import annotations

import asyncio
import base64
import json
import sys

import click
import httpx

from .bench import BenchReport, emit_report


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(path, json=payload)

    from .service import app  # imported lazily; only needed for in-process mode

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://fovea.internal", timeout=None) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _response_json(resp: httpx.Response) -> dict:
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        _fail(f"service returned {resp.status_code}: {detail}")
    return resp.json()


def _read_file_b64(path: str) -> str:
    try:
        with open(path, "rb") as f:
            return base64.b64encode(f.read()).decode("ascii")
    except OSError as e:
        _fail(str(e))


@click.group()
def main():
    """Image kernels, codecs, and ICP registration over a local or remote service."""


@main.command()
@click.option("--op", required=True, help="operation to benchmark")
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--iters", type=int, required=True, help="timed iterations")
@click.option("--warmup", type=int, default=5, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write report here instead of stdout")
@click.option("--server", default=None, help="service URL (default: run in-process)")
def bench(op, width, height, iters, warmup, fmt, out, server):
    """Benchmark one operation and emit the timing report."""
    data = _response_json(
        _post(server, "/bench/run", {"op": op, "width": width, "height": height, "iterations": iters, "warmup": warmup})
    )
    emit_report([BenchReport(**data)], fmt, out)


@main.group()
def icp():
    """Point-cloud registration commands."""


@icp.command()
@click.option("--source", required=True, type=click.Path(dir_okay=False), help="source PLY")
@click.option("--target", required=True, type=click.Path(dir_okay=False), help="target PLY")
@click.option("--max-iters", type=int, default=50, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--max-dist", type=float, default=None, help="correspondence distance gate (default: none)")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write the aligned source cloud here")
@click.option("--server", default=None, help="service URL (default: run in-process)")
def align(source, target, max_iters, tol, max_dist, out, server):
    """Align source onto target; prints the transform as JSON."""
    payload = {
        "source_ply_b64": _read_file_b64(source),
        "target_ply_b64": _read_file_b64(target),
        "max_iterations": max_iters,
        "tolerance": tol,
        "max_correspondence_distance": max_dist,
    }
    data = _response_json(_post(server, "/icp/align", payload))
    if out:
        try:
            with open(out, "wb") as f:
                f.write(base64.b64decode(data["aligned_ply_b64"]))
        except OSError as e:
            _fail(str(e))
    click.echo(json.dumps({
        "rotation": data["rotation"],
        "translation": data["translation"],
        "iterations": data["iterations"],
        "final_rmse": data["final_rmse"],
        "converged": data["converged"],
    }, indent=2))
    sys.exit(0 if data["converged"] else 2)


@icp.command("make-fixture")
@click.option("--n", type=int, default=1000, show_default=True, help="points in the cloud")
@click.option("--rot-deg", type=float, default=10.0, show_default=True)
@click.option("--trans", type=float, default=0.1, show_default=True, help="translation as a fraction of cloud extent")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-src", required=True, type=click.Path(dir_okay=False))
@click.option("--out-dst", required=True, type=click.Path(dir_okay=False))
@click.option("--server", default=None, help="service URL (default: run in-process)")
def make_fixture(n, rot_deg, trans, seed, out_src, out_dst, server):
    """Generate a synthetic source/target PLY pair with a known transform."""
    data = _response_json(
        _post(server, "/icp/make-fixture", {"n": n, "rot_deg": rot_deg, "trans": trans, "seed": seed})
    )
    try:
        with open(out_src, "wb") as f:
            f.write(base64.b64decode(data["source_ply_b64"]))
        with open(out_dst, "wb") as f:
            f.write(base64.b64decode(data["target_ply_b64"]))
    except OSError as e:
        _fail(str(e))
    click.echo(json.dumps({"rotation": data["rotation"], "translation": data["translation"]}, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("fovea.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
