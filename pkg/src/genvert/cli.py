"""Command-line client for the inversion service.

Every subcommand is a thin HTTP client: by default requests are dispatched
in-process against the bundled ASGI app (no server needed); ``--server URL``
sends them to a running instance instead.  Files are read and written on the
client side only.

Exit codes: 0 success, 1 solver failure (HTTP 409 or failed checks),
2 usage or input-format errors (HTTP 400/422, handled by click as well).
"""

from __future__ import annotations

import asyncio
import json
import os
import sys

import click
import httpx


def _load_app():
    from .service.app import app
    return app


class ServiceClient:
    """One-shot JSON POST helper over in-process ASGI or a remote base URL."""

    def __init__(self, server: str | None):
        self.server = server

    async def _post(self, path: str, payload: dict):
        if self.server:
            transport = None
            base = self.server
        else:
            transport = httpx.ASGITransport(app=_load_app())
            base = "http://genvert.internal"
        async with httpx.AsyncClient(transport=transport, base_url=base,
                                     timeout=None) as client:
            resp = await client.post(path, json=payload)
            try:
                body = resp.json()
            except ValueError:
                body = {"detail": {"error": "BadResponse", "message": resp.text}}
            return resp.status_code, body

    def post(self, path: str, payload: dict) -> dict:
        try:
            status, body = asyncio.run(self._post(path, payload))
        except httpx.HTTPError as exc:
            click.echo(f"error: cannot reach service: {exc}", err=True)
            sys.exit(1)
        if status == 200:
            return body
        detail = body.get("detail", body)
        if isinstance(detail, dict):
            message = f"{detail.get('error', 'error')}: {detail.get('message', detail)}"
        else:
            message = str(detail)
        click.echo(f"error: {message}", err=True)
        sys.exit(2 if status in (400, 422) else 1)


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


def _read_vector(path: str) -> list[float]:
    try:
        return [float(ln) for ln in _read_text(path).splitlines() if ln.strip()]
    except ValueError as exc:
        click.echo(f"error: bad vector file {path}: {exc}", err=True)
        sys.exit(2)


def _read_indices(path: str) -> list[int]:
    try:
        return [int(ln) for ln in _read_text(path).splitlines() if ln.strip()]
    except ValueError as exc:
        click.echo(f"error: bad index file {path}: {exc}", err=True)
        sys.exit(2)


def _read_matrix(path: str) -> list[list[float]]:
    """Matrix file: first line 'rows cols', then one whitespace row per line."""
    lines = [ln for ln in _read_text(path).splitlines() if ln.strip()]
    try:
        rows, cols = (int(t) for t in lines[0].split())
        data = [[float(t) for t in ln.split()] for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        click.echo(f"error: bad matrix file {path}: {exc}", err=True)
        sys.exit(2)
    if len(data) != rows or any(len(r) != cols for r in data):
        click.echo(f"error: matrix file {path} does not match its declared shape", err=True)
        sys.exit(2)
    return data


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_vector(path: str, values: list[float]) -> None:
    _write_text(path, "".join(repr(v) + "\n" for v in values))


def _lp_payload(eps, alpha, eps_rule, assumed_c, max_rounds) -> dict:
    return {"epsilon_init": eps, "alpha": alpha, "epsilon_rule": eps_rule,
            "assumed_c": assumed_c, "max_epsilon_rounds": max_rounds}


def _gd_payload(lr, iters, grad_stop, init, seed, restarts) -> dict:
    return {"learning_rate": lr, "max_iters": iters, "grad_norm_stop": grad_stop,
            "init": init, "init_seed": seed, "restarts": restarts}


def _print_report(report: dict, header: dict) -> None:
    click.echo("run settings: " + " ".join(f"{k}={v}" for k, v in header.items()))
    click.echo(f"method: {report['method']}  success: {report['success']}")
    click.echo(f"residuals: linf={report['residual_linf']:.6g} "
               f"l1={report['residual_l1']:.6g} l2={report['residual_l2']:.6g}")
    if report["lp_solves"]:
        click.echo(f"lp solves: {report['lp_solves']}")
    if report["iterations"]:
        click.echo(f"iterations: {report['iterations']}")
    for i, layer in enumerate(report["layers"]):
        click.echo(f"  layer[-{i + 1}]: eps={layer['epsilon_used']:.6g} "
                   f"objective={layer['delta_or_l1']:.6g} "
                   f"active={layer['active_set_size']} "
                   f"rounds={len(layer['status_trail'])}"
                   + (" budget-exhausted" if layer["budget_exhausted"] else ""))
    for note in report["notes"]:
        click.echo(f"  note: {note}")
    click.echo("latent: " + " ".join(f"{v:.10g}" for v in report["latent"]))


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default dispatches in-process.")
@click.pass_context
def main(ctx, server):
    """Invert small generative networks and reproduce the bundled studies."""
    ctx.obj = ServiceClient(server)


@main.command()
@click.option("--net", "net_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--obs", "obs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["exact", "linf", "l1", "relaxed", "gd"]),
              default="linf", show_default=True)
@click.option("--eps", default=0.1, show_default=True, help="Initial error-bound guess.")
@click.option("--alpha", default=1.2, show_default=True, help="Tolerance growth factor.")
@click.option("--eps-rule", type=click.Choice(["adaptive", "theoretical"]),
              default="adaptive", show_default=True)
@click.option("--assumed-c", default=1.0, show_default=True,
              help="Per-layer norm-extension constant for the theoretical rule.")
@click.option("--max-rounds", default=50, show_default=True)
@click.option("--lr", default=1.0, show_default=True, help="Descent learning rate.")
@click.option("--gd-iters", default=1000, show_default=True)
@click.option("--grad-stop", default=1e-9, show_default=True)
@click.option("--gd-init", type=click.Choice(["zero", "gaussian"]), default="gaussian",
              show_default=True)
@click.option("--gd-seed", default=0, show_default=True)
@click.option("--restarts", default=1, show_default=True)
@click.option("--out", "out_path", default="latent.txt", show_default=True,
              help="Where to write the recovered latent vector.")
@click.pass_obj
def invert(client, net_path, obs_path, method, eps, alpha, eps_rule, assumed_c,
           max_rounds, lr, gd_iters, grad_stop, gd_init, gd_seed, restarts, out_path):
    """Recover a latent code from an observation file."""
    payload = {
        "net_text": _read_text(net_path),
        "observation": _read_vector(obs_path),
        "method": method,
        "lp": _lp_payload(eps, alpha, eps_rule, assumed_c, max_rounds),
        "gd": _gd_payload(lr, gd_iters, grad_stop, gd_init, gd_seed, restarts),
    }
    report = client.post("/invert", payload)
    _print_report(report, {
        "method": method, "eps": eps, "alpha": alpha, "eps_rule": eps_rule,
        "assumed_c": assumed_c, "max_rounds": max_rounds, "lr": lr,
        "gd_iters": gd_iters, "grad_stop": grad_stop, "gd_init": gd_init,
        "restarts": restarts,
    })
    _write_vector(out_path, report["latent"])
    click.echo(f"latent written to {out_path}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file with a 'mode' key (noise-sweep, success-vs-k, timing) "
                   "plus the request fields of the matching endpoint.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.pass_obj
def experiment(client, config_path, out_dir):
    """Run a seeded experiment and write CSV plus metadata into OUT."""
    try:
        spec = json.loads(_read_text(config_path))
    except json.JSONDecodeError as exc:
        click.echo(f"error: bad config JSON: {exc}", err=True)
        sys.exit(2)
    if not isinstance(spec, dict) or "mode" not in spec:
        click.echo("error: config must be a JSON object with a 'mode' key", err=True)
        sys.exit(2)
    mode = spec.pop("mode")
    os.makedirs(out_dir, exist_ok=True)
    if mode == "noise-sweep":
        body = client.post("/experiments/noise-sweep", spec)
        _write_text(os.path.join(out_dir, "records.csv"), body["csv"])
        _write_text(os.path.join(out_dir, "metadata.txt"), body["metadata"])
        click.echo(f"{len(body['records'])} records -> {out_dir}/records.csv")
    elif mode == "success-vs-k":
        body = client.post("/experiments/success-vs-k", spec)
        _write_text(os.path.join(out_dir, "success_vs_k.csv"), body["csv"])
        _write_text(os.path.join(out_dir, "metadata.txt"), body["metadata"])
        for row in body["rows"]:
            click.echo(f"k={row['k']} {row['method']}: "
                       f"success rate {row['success_rate']:.2f} ({row['trials']} trials)")
    elif mode == "timing":
        body = client.post("/experiments/timing", spec)
        _write_text(os.path.join(out_dir, "timing.csv"), body["csv"])
        for row in body["rows"]:
            click.echo(f"{row['method']} (k={row['k']}): {row['mean_wall_s']:.3f}s mean")
    else:
        click.echo(f"error: unknown mode {mode!r}", err=True)
        sys.exit(2)


@main.command()
@click.option("--net", "net_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--obs", "obs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mask", "mask_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Observed output indices, one per line.")
@click.option("--matrix", "matrix_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Dense sensing matrix file ('rows cols' header line, then rows).")
@click.option("--inner", type=click.Choice(["linf", "l1", "relaxed"]), default="linf",
              show_default=True)
@click.option("--outer-iters", default=30, show_default=True)
@click.option("--step", default=0.5, show_default=True)
@click.option("--eps", default=0.1, show_default=True)
@click.option("--alpha", default=1.2, show_default=True)
@click.option("--max-rounds", default=50, show_default=True)
@click.option("--out", "out_path", default="latent.txt", show_default=True)
@click.pass_obj
def sense(client, net_path, obs_path, mask_path, matrix_path, inner, outer_iters,
          step, eps, alpha, max_rounds, out_path):
    """Projected-gradient recovery under a linear measurement operator."""
    if mask_path and matrix_path:
        click.echo("error: --mask and --matrix are mutually exclusive", err=True)
        sys.exit(2)
    operator = {"kind": "identity"}
    if mask_path:
        operator = {"kind": "mask", "indices": _read_indices(mask_path)}
    elif matrix_path:
        operator = {"kind": "dense", "matrix": _read_matrix(matrix_path)}
    payload = {
        "net_text": _read_text(net_path),
        "observation": _read_vector(obs_path),
        "operator": operator,
        "inner_method": inner,
        "outer_iters": outer_iters,
        "step": step,
        "lp": _lp_payload(eps, alpha, "adaptive", 1.0, max_rounds),
    }
    report = client.post("/sense", payload)
    _print_report(report, {"inner": inner, "outer_iters": outer_iters, "step": step,
                           "eps": eps, "alpha": alpha})
    _write_vector(out_path, report["latent"])
    click.echo(f"latent written to {out_path}")


@main.command()
@click.option("--cnf", "cnf_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gadget", type=click.Choice(["binary", "real"]), default="binary",
              show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.pass_obj
def reduce(client, cnf_path, gadget, out_path):
    """Compile a DIMACS 3-CNF formula into a hardness-gadget network."""
    body = client.post("/reduce", {"dimacs": _read_text(cnf_path), "gadget": gadget})
    _write_text(out_path, body["net_text"])
    target = " ".join(f"{v:.10g}" for v in body["target"])
    click.echo(f"{gadget} gadget for {body['num_vars']} vars / "
               f"{body['num_clauses']} clauses -> {out_path}")
    click.echo(f"target output: {target}")


@main.command("gen-net")
@click.option("--dims", required=True, help="Comma-separated layer widths, e.g. 20,100,500.")
@click.option("--seed", default=0, show_default=True)
@click.option("--std-rule", type=click.Choice(["unit", "inv_sqrt_fanout"]), default="unit",
              show_default=True)
@click.option("--activation", type=click.Choice(["relu", "leaky"]), default="relu",
              show_default=True)
@click.option("--leaky-slope", default=0.1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.pass_obj
def gen_net(client, dims, seed, std_rule, activation, leaky_slope, out_path):
    """Sample a random Gaussian network and write it to a file."""
    try:
        dim_list = [int(t) for t in dims.split(",") if t.strip()]
    except ValueError:
        click.echo(f"error: bad --dims value {dims!r}", err=True)
        sys.exit(2)
    body = client.post("/networks/random", {
        "dims": dim_list, "weight_std_rule": std_rule, "seed": seed,
        "activation": activation, "leaky_slope": leaky_slope,
    })
    _write_text(out_path, body["net_text"])
    click.echo(f"network {body['input_dim']} -> {body['output_dim']} "
               f"({body['depth']} layers) written to {out_path}")


@main.command()
@click.pass_obj
def verify(client):
    """Run the built-in self-checks; exit 0 only if all pass."""
    body = client.post("/verify", {})
    for check in body["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        click.echo(f"{mark} {check['name']}: {check['detail']}")
    if not body["passed"]:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    uvicorn.run("genvert.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
