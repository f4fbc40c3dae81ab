"""Command line entry points.

`simulate` and `sweep-figure` run locally by default; pass --server to send
the same work to a running service instance instead.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .config import ConfigError, SimConfig, load_config, parse_snr_spec, validate
from .harness import emit_csv, figure_configs, run_sweep, write_csv


def _scheme_tuple(raw: str):
    from .baselines import SchemeId

    out = []
    for tok in raw.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        try:
            out.append(SchemeId(tok))
        except ValueError as exc:
            valid = ", ".join(s.value for s in SchemeId)
            raise ConfigError(f"unknown scheme '{tok}' (valid: {valid})") from exc
    return tuple(out)


def _add_common_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    parser.add_argument("--server", default=None, help="base URL of a running service")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsma-sim",
        description="Link-level sweeps for multicarrier rate-splitting schemes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one sweep and emit CSV")
    sim.add_argument("--config", required=True, help="key=value config file")
    sim.add_argument("--scheme", default=None, help="scheme token or comma list")
    sim.add_argument("--snr-db", default=None, help="grid a:b:step or comma list")
    sim.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    _add_common_overrides(sim)

    fig = sub.add_parser("sweep-figure", help="reproduce a result figure's sweeps")
    fig.add_argument("--figure", required=True, choices=["2a", "2b", "3a", "3b"])
    fig.add_argument("--config", default=None, help="optional base config file")
    fig.add_argument("--out-dir", default=".", help="directory for CSV output")
    _add_common_overrides(fig)

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return parser


def _config_from_args(args) -> SimConfig:
    overrides = {
        "schemes": _scheme_tuple(args.scheme) if args.scheme else None,
        "snr_db": parse_snr_spec(args.snr_db) if args.snr_db else None,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
    }
    return load_config(args.config, **overrides)


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _remote_request_body(args) -> dict:
    body: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            body["config_text"] = fh.read()
    if getattr(args, "scheme", None):
        body["schemes"] = [tok.strip().lower() for tok in args.scheme.split(",") if tok.strip()]
    if getattr(args, "snr_db", None):
        body["snr_db"] = args.snr_db
    for key in ("trials", "seed", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            body[key] = value
    return body


def _remote_simulate(args) -> int:
    import httpx

    body = _remote_request_body(args)
    resp = httpx.post(args.server.rstrip("/") + "/simulate", json=body, timeout=None)
    if resp.status_code != 200:
        print(f"server error {resp.status_code}: {resp.text}", file=sys.stderr)
        return 1
    _emit(resp.json()["csv"], args.out)
    return 0


def _remote_figure(args) -> int:
    import httpx

    base = args.server.rstrip("/")
    body = _remote_request_body(args)
    resp = httpx.post(base + f"/figures/{args.figure}", json=body, timeout=None)
    if resp.status_code != 202:
        print(f"server error {resp.status_code}: {resp.text}", file=sys.stderr)
        return 1
    payload = resp.json()
    pending = {job["id"]: tag for job, tag in zip(payload["jobs"], payload["tags"])}
    os.makedirs(args.out_dir, exist_ok=True)
    while pending:
        time.sleep(0.5)
        for job_id in list(pending):
            status = httpx.get(base + f"/jobs/{job_id}", timeout=None).json()
            if status["state"] == "error":
                print(f"job {job_id} failed: {status['error']}", file=sys.stderr)
                return 1
            if status["state"] == "done":
                csv_text = httpx.get(base + f"/jobs/{job_id}/csv", timeout=None).text
                tag = pending.pop(job_id)
                path = os.path.join(args.out_dir, f"figure_{args.figure}_{tag}.csv")
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(csv_text)
                print(path)
    return 0


def _cmd_simulate(args) -> int:
    if args.server:
        return _remote_simulate(args)
    cfg = _config_from_args(args)
    report = run_sweep(cfg, progress=lambda msg: print(msg, file=sys.stderr))
    out = args.out if args.out is not None else cfg.out
    _emit(emit_csv(report), out)
    return 0


def _cmd_figure(args) -> int:
    if args.server:
        return _remote_figure(args)
    base = None
    if args.config:
        base = load_config(args.config)
    overrides = {k: getattr(args, k) for k in ("trials", "seed", "workers")}
    os.makedirs(args.out_dir, exist_ok=True)
    for tag, cfg in figure_configs(args.figure, base):
        from .config import with_overrides

        cfg = with_overrides(cfg, **overrides)
        report = run_sweep(cfg, progress=lambda msg: print(msg, file=sys.stderr))
        path = os.path.join(args.out_dir, f"figure_{args.figure}_{tag}.csv")
        write_csv(report, path)
        print(path)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "sweep-figure":
            return _cmd_figure(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return 2
    parser.error("unknown command")
    return 2


if __name__ == "__main__":
    sys.exit(main())
