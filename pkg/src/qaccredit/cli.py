"""Command-line client for the accreditation service.

Without ``--server`` requests are served in process, so no daemon is needed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import asdict

from .config import ConfigError, ExperimentConfig, NoiseConfig, load_experiment


class CommandError(RuntimeError):
    pass


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    with warnings.catch_warnings():
        # starlette warns about its httpx-based test transport; it is fine for in-process calls
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = resp.text
        raise CommandError(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = load_experiment(args.config)
    for key in ("seed", "shots", "theta", "alpha", "v"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.out is not None:
        cfg.out = args.out
    if args.epsilon is not None:
        if not 0.0 <= args.epsilon <= 0.5:
            raise ConfigError("--epsilon must lie in [0, 0.5]")
        cfg.noise = cfg.noise or NoiseConfig()
        cfg.noise.epsilon = args.epsilon
    return cfg


def _target_payload(cfg: ExperimentConfig) -> dict:
    if cfg.target_json:
        try:
            with open(cfg.target_json) as fh:
                return {"circuit": json.load(fh)}
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{cfg.target_json}:0: cannot load circuit JSON: {exc}") from exc
    return {"builder": cfg.target, "n": cfg.target_n, "m": cfg.target_m, "seed": cfg.target_seed, "topology": cfg.target_topology}


def _noise_payload(cfg: ExperimentConfig) -> dict:
    return asdict(cfg.noise) if cfg.noise else {}


def _protocol_payload(cfg: ExperimentConfig) -> dict:
    return {"theta": cfg.theta, "alpha": cfg.alpha, "v": cfg.v, "seed": cfg.seed}


def cmd_accredit(args, client) -> None:
    cfg = _load_config(args)
    payload = {
        "target": _target_payload(cfg),
        "noise": _noise_payload(cfg),
        "protocol": _protocol_payload(cfg),
        "shots": cfg.shots,
        "max_workers": args.workers,
    }
    res = _post(client, "/accredit", payload)
    _write(os.path.join(cfg.out, "report.json"), _dump(res["report"]))
    _write(os.path.join(cfg.out, "summary.txt"), res["summary"])
    _write(os.path.join(cfg.out, "trap_outputs.json"), _dump(res["trap_outputs"]))
    sys.stdout.write(res["summary"])


def cmd_oracle(args, client) -> None:
    cfg = _load_config(args)
    payload = {
        "target": _target_payload(cfg),
        "noise": _noise_payload(cfg),
        "mode": "sampled" if args.sampled else "exact",
        "protocol": _protocol_payload(cfg),
        "shots": args.shots or 100_000,
    }
    res = _post(client, "/oracle", payload)
    _write(os.path.join(cfg.out, "oracle.json"), _dump(res))
    print(f"VD = {res['vd']:.6f}, p_inc = {res['p_inc']:.6f}, bound = {res['bound']:.6f}, holds = {res['holds']}")


def _grid(text: str) -> list[float]:
    if ":" in text:
        try:
            start, stop, step = (float(s) for s in text.split(":"))
        except ValueError as exc:
            raise ConfigError(f"--grid: expected start:stop:step, got {text!r}") from exc
        if step <= 0:
            raise ConfigError("--grid: step must be positive")
        count = int(round((stop - start) / step)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"--grid: bad list {text!r}") from exc


def cmd_diagnose(args, client) -> None:
    if args.outputs:
        try:
            with open(args.outputs) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{args.outputs}:0: cannot read trap outputs: {exc}") from exc
        if isinstance(data, dict):
            data = data.get("trap_outputs", [])
        payload = {"trap_outputs": [str(s) for s in data], "p_flip": args.p_flip}
        out_dir = args.out or "out"
    else:
        cfg = _load_config(args)
        payload = {
            "target": _target_payload(cfg),
            "noise": _noise_payload(cfg),
            "p_flip": args.p_flip,
            "traps": args.traps,
            "shots_per_trap": args.shots or 500,
            "seed": cfg.seed,
        }
        out_dir = cfg.out
    res = _post(client, "/diagnose", payload)
    lines = ["h,empirical,model"] + [f"{r['h']},{r['empirical']!r},{r['model']!r}" for r in res["rows"]]
    _write(os.path.join(out_dir, "hamming.csv"), "\n".join(lines) + "\n")
    print(f"samples = {res['samples']}, p_flip = {res['p_flip']:.6f}, fitted = {res['fitted_p_flip']:.6f}, TV = {res['tv']:.6f}")


def cmd_compare_bounds(args, client) -> None:
    payload = {"v_max": args.v_max}
    if args.grid:
        payload["grid"] = _grid(args.grid)
    res = _post(client, "/compare-bounds", payload)
    lines = ["p_inc,eta_best,present_bound"]
    lines += [f"{r['p_inc']!r},{r['eta_best']!r},{r['present_bound']!r}" for r in res["rows"]]
    _write(os.path.join(args.out or "out", "bounds.csv"), "\n".join(lines) + "\n")
    print(f"{len(res['rows'])} grid points written")


def cmd_generate_traps(args, client) -> None:
    cfg = _load_config(args)
    payload = {"target": _target_payload(cfg), "count": args.count, "seed": cfg.seed, "qotp": not args.no_qotp}
    res = _post(client, "/generate-traps", payload)
    trap_dir = os.path.join(cfg.out, "traps")
    manifest = {"n": res["n"], "m": res["m"], "seed": res["seed"], "count": len(res["traps"]), "traps": []}
    for rec in res["traps"]:
        name = f"trap_{rec['index']:04d}.json"
        _write(os.path.join(trap_dir, name), json.dumps(rec["circuit"], separators=(",", ":")) + "\n")
        manifest["traps"].append({"file": name, "t": rec["t"], "selections": rec["selections"], "qotp": rec["qotp"]})
    _write(os.path.join(trap_dir, "manifest.json"), _dump(manifest))
    print(f"{len(res['traps'])} traps written to {trap_dir}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--shots", type=int)
    common.add_argument("--theta", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--v", type=int, help="explicit trap count")
    common.add_argument("--epsilon", type=float, help="gate-dependence magnitude")
    common.add_argument("--server", help="service URL; omitted: serve in process")

    parser = argparse.ArgumentParser(prog="qaccredit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("accredit", parents=[common], help="run the protocol on a simulated backend")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_accredit)
    p = sub.add_parser("oracle", parents=[common], help="exact VD and p_inc")
    p.add_argument("--sampled", action="store_true", help="estimate by sampling instead")
    p.set_defaults(func=cmd_oracle)
    p = sub.add_parser("diagnose", parents=[common], help="Hamming-weight diagnostic of trap outputs")
    p.add_argument("--outputs", help="JSON list of trap output bitstrings")
    p.add_argument("--p-flip", type=float, default=None)
    p.add_argument("--traps", type=int, default=200, help="traps to simulate when using --config")
    p.set_defaults(func=cmd_diagnose)
    p = sub.add_parser("compare-bounds", parents=[common], help="accept/reject bound vs 2 p_inc")
    p.add_argument("--grid", help="start:stop:step or a comma list")
    p.add_argument("--v-max", type=int, default=10**6)
    p.set_defaults(func=cmd_compare_bounds)
    p = sub.add_parser("generate-traps", parents=[common], help="export trap circuits as JSON")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--no-qotp", action="store_true")
    p.set_defaults(func=cmd_generate_traps)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _client(args.server) as client:
            args.func(args, client)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
