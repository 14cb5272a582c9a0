"""Command-line entry point: ``polypl <command> model.json [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .errors import PolyPLError
from .kinetics import LEX_ORDERS
from .report import COMMANDS, Settings, error_report, exit_status, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polypl",
                                description="Structural and numerical analysis of "
                                            "poly-PL chemical reaction networks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("models", nargs="+", type=Path, help="model JSON file(s)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--starts", type=int, default=None, help="multi-start count (default 32)")
    p.add_argument("--tol-residual", type=float, default=None)
    p.add_argument("--tol-dedup", type=float, default=None)
    p.add_argument("--lex", choices=LEX_ORDERS, default=None,
                   help="term order used before padding")
    p.add_argument("--rates", choices=("given", "ccb"), default=None,
                   help="use the model's rate constants or construct complex-balancing ones")
    p.add_argument("--jobs", type=int, default=1, help="models analysed concurrently")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", type=Path, default=None)
    return p


def _one(command: str, path: Path, overrides: dict) -> tuple[dict, int]:
    try:
        doc = io.parse(path)
        settings = Settings.from_options(doc.options, **overrides)
        report = run(command, doc, settings)
        return report, exit_status(report)
    except PolyPLError as exc:
        return error_report(exc), exc.exit_status
    except OSError as exc:
        return {"error": {"code": "io.file", "message": str(exc), "exit_status": 1}}, 1


def render_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v)}")
    else:
        lines.append(f"{pad}{json.dumps(obj)}")
    return "\n".join(lines)


def _flat(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "starts": args.starts, "tol_residual": args.tol_residual,
                 "tol_dedup": args.tol_dedup, "lex": args.lex, "rates": args.rates}
    if args.jobs > 1 and len(args.models) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_one, [args.command] * len(args.models), args.models,
                                    [overrides] * len(args.models)))
    else:
        results = [_one(args.command, m, overrides) for m in args.models]
    if len(results) == 1:
        payload = results[0][0]
    else:
        payload = {str(m): r for m, (r, _) in zip(args.models, results)}
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = render_text(payload) + "\n"
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for r, _ in results:
        if "error" in r:
            print(f"error [{r['error']['code']}]: {r['error']['message']}", file=sys.stderr)
    return max(code for _, code in results)


if __name__ == "__main__":
    sys.exit(main())
