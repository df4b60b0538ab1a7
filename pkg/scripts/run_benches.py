"""Run every benchmark sweep with default series and summarize the results.

    python scripts/run_benches.py --out results/
"""

import argparse
import pathlib
import sys

from rdfstream.cli import main as cli

KINDS = ("http-get", "http-post", "udp-size", "udp-loss", "workers")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    ap.add_argument("--kinds", nargs="+", choices=KINDS, default=list(KINDS))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    paths = []
    for kind in args.kinds:
        path = args.out / f"{kind}.csv"
        print(f"# {kind} -> {path}", file=sys.stderr)
        code = cli(["bench", kind, "--out", str(path), "--seed", str(args.seed)])
        if code:
            return code
        paths.append(str(path))
    return cli(["report", *paths])


if __name__ == "__main__":
    sys.exit(main())
