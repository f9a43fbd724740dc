"""Command-line client for the lab.

Every subcommand builds the same request model the HTTP API accepts and, by
default, executes it in-process; with --server URL it posts to a running
service instead.  Reports are emitted as canonical JSON (or CSV for sweeps),
so identical configs produce byte-identical outputs.

Exit codes: 0 ok, 2 validation error, 3 verification failure,
4 non-termination flag present.
"""

from __future__ import annotations

import argparse
import json
import sys

import pydantic

from .errors import GenerationError, RegimeError, ResolutionError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VERIFY_FAILED = 3
EXIT_NON_TERMINATION = 4

_CLIENT_ERRORS = (ValidationError, GenerationError, RegimeError, ResolutionError,
                  FileNotFoundError, pydantic.ValidationError)


def _dump(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _instance_ref(args) -> dict:
    return {"path": args.instance}


def _parse_values(raw: str) -> list[float]:
    values = []
    for tok in raw.split(","):
        tok = tok.strip()
        if "^" in tok:
            base, exp = tok.split("^")
            values.append(float(base) ** float(exp))
        else:
            values.append(float(tok))
    return values


def _parse_seeds(raw: str) -> list[int]:
    return [int(tok) for tok in raw.split(",") if tok.strip() != ""]


def _post(server: str, endpoint: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(f"{server.rstrip('/')}/{endpoint}", json=payload, timeout=3600.0)
    if resp.status_code == 422:
        raise ValidationError(resp.text)
    resp.raise_for_status()
    return resp.json()


def _execute(args, endpoint: str, request_model, op) -> dict:
    if getattr(args, "server", None):
        return _post(args.server, endpoint, request_model.model_dump(mode="json"))
    return op(request_model).model_dump(mode="json")


# -- subcommands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    from .service import ops, schemas as sc

    spec = sc.GeneratorSpec(
        kind=args.kind, seed=args.seed, num_clauses=args.num_clauses, k=args.k,
        max_occurrence=args.max_occurrence, num_edges=args.num_edges,
        edge_size=args.edge_size, max_degree=args.max_degree,
        num_colors=args.num_colors)
    req = sc.GenRequest(generator=spec, criterion_delta=args.criterion_delta)
    out = _execute(args, "gen", req, ops.gen_op)
    _write_text(json.dumps(out["document"], indent=2) + "\n", args.out)
    crit = out["criterion"]
    if not crit["satisfied"] and not crit["trivially_local"]:
        print(f"warning: p={out['p']:.3g} violates p <= d^-(10+{args.criterion_delta:g}) "
              f"(d={out['d']}); proceeding", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    from .service import ops, schemas as sc

    req = sc.RunRequest(instance=_instance_ref(args), seed=args.seed,
                        max_steps=args.max_steps)
    out = _execute(args, "run", req, ops.run_op)
    _dump(out, args.out)
    return EXIT_OK if out["terminated"] else EXIT_NON_TERMINATION


def cmd_classify(args) -> int:
    from .service import ops, schemas as sc

    req = sc.ClassifyRequest(instance=_instance_ref(args), seed=args.seed,
                             eps=args.eps, max_steps=args.max_steps)
    out = _execute(args, "classify", req, ops.classify_op)
    hist = out.pop("round_histogram")
    _dump(out, args.out)
    if args.histogram:
        lines = ["round,node_count"] + [f"{r},{n}" for r, n in hist]
        _write_text("\n".join(lines) + "\n", args.histogram)
    return EXIT_OK if out["local"]["terminated"] else EXIT_NON_TERMINATION


def cmd_query(args) -> int:
    from .service import ops, schemas as sc

    req = sc.QueryRequest(instance=_instance_ref(args), seed=args.seed,
                          node=args.node, volume_mode=args.volume_mode)
    out = _execute(args, "query", req, ops.query_op)
    _dump(out, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .service import ops, schemas as sc

    req = sc.VerifyRequest(
        instance=_instance_ref(args) if args.instance else None,
        seeds=_parse_seeds(args.seeds),
        suites=args.suites.split(",") if args.suites else None,
        mc_trials=args.trials)
    out = _execute(args, "verify", req, ops.verify_op)
    for check in out["checks"]:
        status = "pass" if check["passed"] else "FAIL"
        print(f"[{status}] {check['suite']}/{check['name']}: {check['detail']}")
    if not out["passed"]:
        return EXIT_VERIFY_FAILED
    if out["non_termination"]:
        return EXIT_NON_TERMINATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .service import ops, schemas as sc

    req = sc.SweepRequest(
        param=args.param, values=_parse_values(args.values),
        seeds=list(range(args.num_seeds)) if args.num_seeds else _parse_seeds(args.seeds),
        num_clauses=args.num_clauses, k=args.k, max_occurrence=args.max_occurrence,
        instance_seed=args.instance_seed, query_samples=args.query_samples)
    out = _execute(args, "sweep", req, ops.sweep_op)
    _write_text(out["csv"], args.out)
    return EXIT_NON_TERMINATION if out["non_termination"] else EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lll-lab",
        description="Resampling lab for Lovász Local Lemma instances")
    parser.add_argument("--server", default=None,
                        help="URL of a running lll-lab service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", choices=["ksat", "hypergraph"], default="ksat")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--num-clauses", type=int, default=2000)
    g.add_argument("--k", type=int, default=10)
    g.add_argument("--max-occurrence", type=int, default=2)
    g.add_argument("--num-edges", type=int, default=200)
    g.add_argument("--edge-size", type=int, default=5)
    g.add_argument("--max-degree", type=int, default=2)
    g.add_argument("--num-colors", type=int, default=2)
    g.add_argument("--criterion-delta", type=float, default=0.0)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run the resampler, emit a run report")
    r.add_argument("--instance", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-steps", type=int, default=None)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("classify", help="classify risky/insecure, emit a report")
    c.add_argument("--instance", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--eps", type=float, default=None)
    c.add_argument("--max-steps", type=int, default=None)
    c.add_argument("--out", default="-")
    c.add_argument("--histogram", default=None,
                   help="write a round,node_count CSV histogram here")
    c.set_defaults(func=cmd_classify)

    q = sub.add_parser("query", help="answer a per-node query with probe stats")
    q.add_argument("--instance", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--node", type=int, required=True)
    q.add_argument("--volume-mode", action="store_true")
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("verify", help="run invariant suites; nonzero exit on failure")
    v.add_argument("--instance", default=None,
                   help="instance file (default: bundled tiny instance)")
    v.add_argument("--seeds", default="0,1,2")
    v.add_argument("--suites", default=None,
                   help="comma-separated subset of trees,probability,classification,lca,local")
    v.add_argument("--trials", type=int, default=20_000)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="sweep one parameter, emit CSV")
    s.add_argument("--param", choices=["p", "n", "d", "seeds"], required=True)
    s.add_argument("--values", required=True,
                   help="comma-separated; p accepts 2^-k notation")
    s.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8,9")
    s.add_argument("--num-seeds", type=int, default=None)
    s.add_argument("--num-clauses", type=int, default=2000)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--max-occurrence", type=int, default=2)
    s.add_argument("--instance-seed", type=int, default=1)
    s.add_argument("--query-samples", type=int, default=20)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_sweep)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CLIENT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
