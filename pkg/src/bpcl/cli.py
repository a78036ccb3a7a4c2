"""The ``bpcl`` command line: a thin client of the HTTP service.

Every subcommand builds a request, posts it to the service, and writes the
response; by default the app is mounted in-process (no server needed), and
``--server URL`` points the same client at a running ``bpcl serve``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx


def _request(server: str | None, method: str, path: str, payload: dict | None = None) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            resp = client.request(method, path, json=payload)
    else:
        import asyncio

        from .service import app

        async def _call():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://bpcl.local", timeout=None
            ) as client:
                return await client.request(method, path, json=payload)

        resp = asyncio.run(_call())
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        raise SystemExit(f"error: {detail}")
    return resp.json()


def _post(args, path: str, payload: dict) -> dict:
    return _request(args.server, "POST", path, payload)


def _get(args, path: str) -> dict:
    return _request(args.server, "GET", path)


def _load_config(args) -> dict:
    cfg = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.seed is not None:
        cfg["seed"] = args.seed
    dom = cfg.setdefault("domain", {})
    if args.depth is not None:
        dom["depth"] = args.depth
    if args.box is not None:
        dom["extent"] = args.box
    return cfg

def _symbol_from_csv(cfg: dict) -> dict:
    sym = cfg.get("symbol", {})
    kind = sym.get("kind", "")
    if kind.startswith("csv:"):
        path = kind.split(":", 1)[1]
        cfg["symbol"] = {"kind": "csv", "params": {"text": Path(path).read_text()}}
    return cfg


def _write_out(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text)


def _add_common(sp: argparse.ArgumentParser, config: bool = False) -> None:
    sp.add_argument("--seed", type=int, default=None, help="override config seed")
    sp.add_argument("--depth", type=int, default=None, help="override mesh depth per axis")
    sp.add_argument("--box", type=float, default=None, help="override box extent per axis")
    sp.add_argument("--out", type=str, default=None, help="output path (stdout otherwise)")
    if config:
        sp.add_argument("--config", type=str, required=True, help="JSON config path")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="bpcl", description="bi-parameter commutator laboratory")
    ap.add_argument("--server", type=str, default=None, help="remote service URL (in-process otherwise)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("awf", help="oscillation lower-bound certificate")
    _add_common(sp, config=True)

    sp = sub.add_parser("norms", help="symbol functionals of a mesh CSV")
    sp.add_argument("--input", required=True, help="mesh CSV path")
    sp.add_argument("--which", required=True, help="e.g. bmo,holder:alpha=0.5:axis=2,ap:p=2")
    sp.add_argument("--weight", default=None, help="weight mesh CSV (for bloom)")
    _add_common(sp)

    sp = sub.add_parser("sparse", help="stopping-time sparse tree of a mesh CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--recenter", action="store_true", help="subtract the mean first")
    _add_common(sp)

    sp = sub.add_parser("model", help="apply a seeded model operator to a mesh CSV")
    sp.add_argument("--spec", required=True, help="JSON model spec path")
    sp.add_argument("--input", required=True)
    _add_common(sp)

    sp = sub.add_parser("report", help="nine-case two-sided report")
    _add_common(sp, config=True)

    sp = sub.add_parser("bands", help="check or regenerate the frozen bands")
    sp.add_argument("--regenerate", action="store_true")
    sp.add_argument("--groups", default=None, help="comma-separated group subset")
    sp.add_argument("--margin", type=float, default=1.5)
    _add_common(sp)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8601)

    args = ap.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    if args.command == "awf":
        cfg = _symbol_from_csv(_load_config(args))
        data = _post(args, "/awf", {"config": cfg})
        _write_out(args, json.dumps(data, sort_keys=True, indent=2))
        return 0

    if args.command == "norms":
        payload = {"mesh_csv": Path(args.input).read_text(), "which": args.which}
        if args.weight:
            payload["weight_csv"] = Path(args.weight).read_text()
        data = _post(args, "/norms", payload)
        _write_out(args, json.dumps(data["results"], sort_keys=True, indent=2))
        return 0

    if args.command == "sparse":
        payload = {"mesh_csv": Path(args.input).read_text(), "recenter": args.recenter}
        data = _post(args, "/sparse", payload)
        _write_out(args, json.dumps(data["tree"], indent=2))
        print(f"{data['node_count']} stopping cubes", file=sys.stderr)
        return 0

    if args.command == "model":
        payload = {
            "spec": json.loads(Path(args.spec).read_text()),
            "mesh_csv": Path(args.input).read_text(),
        }
        data = _post(args, "/model/apply", payload)
        _write_out(args, data["mesh_csv"])
        return 0

    if args.command == "report":
        cfg = _symbol_from_csv(_load_config(args))
        data = _post(args, "/report", {"config": cfg})
        _write_out(args, json.dumps(data, sort_keys=True, indent=2))
        bad = [c for c in data["checks"] if not c["ok"]]
        for c in bad:
            print(f"band FAIL {c['name']}: {c['measured']} not in [{c['lo']}, {c['hi']}]",
                  file=sys.stderr)
        return 0 if data["passed"] else 1

    if args.command == "bands":
        groups = args.groups.split(",") if args.groups else None
        if args.regenerate:
            data = _post(args, "/bands/regenerate", {"groups": groups, "margin": args.margin})
            text = json.dumps(data["bands"], sort_keys=True, indent=2)
            if args.out:
                Path(args.out).write_text(text)
                print(f"wrote {args.out}")
            else:
                from .bands import bands_path

                bands_path().write_text(text)
                print(f"wrote {bands_path()}")
            return 0
        data = _post(args, "/bands/check", {"groups": groups})
        for c in data["checks"]:
            status = "ok " if c["ok"] else "FAIL"
            print(f"{status} {c['name']}: {c['measured']:.6g} in [{c['lo']}, {c['hi']}]")
        return 0 if data["passed"] else 1

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
