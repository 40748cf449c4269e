"""Command-line interface.

The CLI is a thin client of the HTTP service: every subcommand builds a
JSON request, posts it (in process by default, or to --url against a
running server), and renders the response.  File output is written
client-side, byte for byte as the service returned it.

Exit codes: 0 success; 2 invalid arguments or request (including domain
validation rejected by the service); 1 runtime and I/O failures, and
``graph validate`` reporting violations.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

__all__ = ["main"]


class _RequestFailed(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _post(path: str, payload: dict, url: str | None) -> dict:
    if url:
        try:
            resp = httpx.post(url.rstrip("/") + path, json=payload, timeout=None)
        except httpx.HTTPError as exc:
            raise _RequestFailed(f"request to {url} failed: {exc}", 1) from exc
    else:
        resp = _post_in_process(path, payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    code = 2 if resp.status_code == 422 else 1
    raise _RequestFailed(f"{path} rejected ({resp.status_code}): {detail}", code)


def _post_in_process(path: str, payload: dict) -> httpx.Response:
    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://evodetect", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _write_out(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _RequestFailed(f"cannot write {path}: {exc}", 1) from exc


def _profile_payload(args: argparse.Namespace) -> dict:
    return {"beliefs": args.beliefs, "proportions": args.proportions}


def _params_payload(args: argparse.Namespace) -> dict:
    out = {}
    for flag, key in (("k", "k"), ("u", "u"), ("alpha", "alpha"), ("n", "n_agents")):
        val = getattr(args, flag, None)
        if val is not None:
            out[key] = val
    return out


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _print_kv(pairs: list[tuple[str, object]]) -> None:
    for key, val in pairs:
        print(f"{key}={_fmt(val)}")


def _add_profile_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beliefs", type=_floats, required=True,
                   help="comma-separated per-type beliefs, each in (0,1)")
    p.add_argument("--proportions", type=_floats, required=True,
                   help="comma-separated per-type proportions, summing to 1")


def _add_params_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=None, help="graph degree (default 20)")
    p.add_argument("--u", type=float, default=None, help="conformity bonus (default 0.5)")
    p.add_argument("--alpha", type=float, default=None,
                   help="selection strength in (0,1) (default 0.05)")
    p.add_argument("--n", type=int, default=None, help="population size (default 1000)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evodetect",
        description="Distributed detection via an evolutionary game on regular networks.",
    )
    parser.add_argument("--url", default=None,
                        help="base URL of a running service; default runs in process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="centralized benchmark decision for a profile")
    _add_profile_flags(p)

    p = sub.add_parser("ess", help="stability classification of the consensus states")
    _add_profile_flags(p)
    _add_params_flags(p)

    p = sub.add_parser("meanfield", help="integrate the continuum dynamics, dump CSV")
    _add_profile_flags(p)
    _add_params_flags(p)
    p.add_argument("--x0", type=_floats, default=None,
                   help="initial decision-0 share(s): one value or one per type (default 0.5)")
    p.add_argument("--t-end", type=float, default=None,
                   help="integration horizon; default runs until the flow stalls")
    p.add_argument("--samples", type=int, default=None,
                   help="trajectory samples for an explicit horizon (default 201)")
    p.add_argument("--out", default=None, help="write trajectory CSV here instead of stdout")

    p = sub.add_parser("simulate", help="run a simulated ensemble")
    _add_profile_flags(p)
    _add_params_flags(p)
    p.add_argument("--trials", type=int, default=None, help="trial count (default 100)")
    p.add_argument("--seed", type=int, default=None, help="base seed (default 12345)")
    p.add_argument("--max-steps", type=int, default=None,
                   help="update events per trial (default 100000)")
    p.add_argument("--sample-every", type=int, default=None,
                   help="record shares every this many events (default off)")
    p.add_argument("--initial", choices=("coin", "zeros", "ones"), default=None,
                   help="initial decision rule (default coin)")
    p.add_argument("--fixed-graph", action="store_true",
                   help="share one graph across trials instead of redrawing")
    p.add_argument("--graph-seed", type=int, default=None,
                   help="separate seed for graph generation")
    p.add_argument("--workers", type=int, default=None, help="parallel trial runners")
    p.add_argument("--out", default=None,
                   help="write trajectory CSV (with --sample-every) or summary CSV here")

    p = sub.add_parser("sweep", help="sweep one belief over a grid and compare layers")
    p.add_argument("--config", default=None, help="JSON file of sweep settings")
    p.add_argument("--beliefs", type=_floats, default=None)
    p.add_argument("--proportions", type=_floats, default=None)
    p.add_argument("--sweep-index", type=int, default=None,
                   help="which belief entry the grid replaces (0-based)")
    p.add_argument("--grid", type=_floats, default=None,
                   help="comma-separated baseline values (default 0.1..0.9 step 0.05)")
    _add_params_flags(p)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--fixed-graph", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="write the per-point CSV here")

    p = sub.add_parser("graph", help="generate or validate regular graphs")
    gsub = p.add_subparsers(dest="graph_command", required=True)
    g = gsub.add_parser("generate", help="sample a k-regular graph, emit its edge list")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None, help="write the edge list here instead of stdout")
    g = gsub.add_parser("validate", help="check an edge-list file; violations exit 1")
    g.add_argument("path", help="edge-list file, one 'u v' pair per line")
    g.add_argument("--n", type=int, default=None, help="expected node count")
    g.add_argument("--k", type=int, default=None, help="expected degree")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_detect(args) -> int:
    data = _post("/detect", {"profile": _profile_payload(args)}, args.url)
    _print_kv([
        ("discriminant", data["discriminant"]),
        ("decision", "indifferent" if data["decision"] is None else data["decision"]),
    ])
    return 0


def _cmd_ess(args) -> int:
    payload = {"profile": _profile_payload(args), "params": _params_payload(args)}
    data = _post("/ess", payload, args.url)
    _print_kv([
        ("discriminant", data["discriminant"]),
        ("threshold", data["threshold"]),
        ("ess_set", "{" + ",".join(str(s) for s in data["ess_set"]) + "}"),
        ("interior_point", data["interior_point"]),
        ("interior_degenerate", data["interior_degenerate"]),
        ("predicted_limit_from_half",
         "indeterminate" if data["predicted_limit_from_half"] is None
         else data["predicted_limit_from_half"]),
        ("at_threshold", data["at_threshold"]),
    ])
    return 0


def _cmd_meanfield(args) -> int:
    payload: dict = {"profile": _profile_payload(args), "params": _params_payload(args)}
    if args.x0 is not None:
        payload["x0"] = args.x0[0] if len(args.x0) == 1 else args.x0
    if args.t_end is not None:
        payload["t_end"] = args.t_end
    if args.samples is not None:
        payload["n_samples"] = args.samples
    data = _post("/meanfield", payload, args.url)
    if args.out:
        _write_out(args.out, data["csv"])
        _print_kv([
            ("terminal_x", data["terminal_x"]),
            ("rows", data["csv"].count("\n") - 1),
            ("out", args.out),
        ])
    else:
        sys.stdout.write(data["csv"])
    return 0


def _cmd_simulate(args) -> int:
    payload: dict = {"profile": _profile_payload(args), "params": _params_payload(args)}
    for flag, key in (
        ("trials", "trials"), ("seed", "base_seed"), ("max_steps", "max_steps"),
        ("sample_every", "sample_every"), ("initial", "initial_rule"),
        ("graph_seed", "graph_seed"), ("workers", "workers"),
    ):
        val = getattr(args, flag)
        if val is not None:
            payload[key] = val
    if args.fixed_graph:
        payload["graph_per_trial"] = False
    data = _post("/simulate", payload, args.url)
    _print_kv([
        ("trials", data["trials"]),
        ("mean_final_x", data["mean_final_x"]),
        ("absorbed_fraction", data["absorbed_fraction"]),
        ("mean_steps_run", data["mean_steps_run"]),
    ])
    if args.out:
        text = data["trajectory_csv"] or data["summary_csv"]
        _write_out(args.out, text)
        print(f"out={args.out}")
    return 0


def _cmd_sweep(args) -> int:
    from .experiments import load_config

    config: dict = {}
    if args.config:
        try:
            config = load_config(args.config)
        except (OSError, ValueError) as exc:
            raise _RequestFailed(f"cannot read config {args.config}: {exc}", 2) from exc
    out = args.out if args.out is not None else config.pop("out", None)
    overrides = {
        "beliefs": args.beliefs,
        "proportions": args.proportions,
        "sweep_index": args.sweep_index,
        "grid": args.grid,
        "k": args.k,
        "u": args.u,
        "alpha": args.alpha,
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "max_steps": args.max_steps,
        "workers": args.workers,
    }
    rename = {"n": "n_agents", "seed": "base_seed"}
    payload = dict(config)
    for key, val in overrides.items():
        if val is not None:
            payload[rename.get(key, key)] = val
    if args.fixed_graph:
        payload["graph_per_trial"] = False
    for key in ("beliefs", "proportions", "sweep_index"):
        if key not in payload:
            raise _RequestFailed(
                f"sweep needs {key} via --{key.replace('_', '-')} or --config", 2
            )
    data = _post("/sweep", payload, args.url)
    sys.stdout.write(data["summary"])
    if out:
        _write_out(out, data["csv"])
        print(f"out={out}")
    else:
        sys.stdout.write(data["csv"])
    return 0


def _cmd_graph(args) -> int:
    if args.graph_command == "generate":
        payload = {"n": args.n, "k": args.k, "seed": args.seed}
        data = _post("/graph/generate", payload, args.url)
        if args.out:
            _write_out(args.out, data["edge_list"])
            _print_kv([
                ("n", data["n"]), ("k", data["k"]),
                ("connected", data["connected"]), ("out", args.out),
            ])
        else:
            sys.stdout.write(data["edge_list"])
        return 0
    try:
        with open(args.path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _RequestFailed(f"cannot read {args.path}: {exc}", 1) from exc
    payload = {"edge_list": text, "n": args.n, "k": args.k}
    data = _post("/graph/validate", payload, args.url)
    _print_kv([
        ("ok", data["ok"]), ("n", data["n"]), ("k", data["k"]),
        ("connected", data["connected"]),
    ])
    for v in data["violations"]:
        print(f"violation: {v}", file=sys.stderr)
    return 0 if data["ok"] else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "detect": _cmd_detect,
        "ess": _cmd_ess,
        "meanfield": _cmd_meanfield,
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "graph": _cmd_graph,
        "serve": _cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except _RequestFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
