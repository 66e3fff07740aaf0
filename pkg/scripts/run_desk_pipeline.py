#!/usr/bin/env python3
"""End-to-end desk-scale experiment: corpus -> train -> request -> artifacts.

Produces a corpus, a trained checkpoint, the tub+table combined shape and
its affordance reports under --workdir.  Roughly ten minutes on a laptop
CPU with the defaults.
"""

import argparse
import sys
from pathlib import Path

from formfunc.cli import main as formfunc


def run(args):
    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    corpus = work / "corpus"
    ckpt = work / "model.ckpt"

    steps = [
        ["dataset", "gen", "--out", str(corpus), "--dim", str(args.dim),
         "--per-class", str(args.per_class), "--seed", str(args.seed), "--augment"],
        ["train", "--corpus", str(corpus), "--out", str(ckpt),
         "--epochs", str(args.epochs), "--seed", str(args.seed)],
        ["request", "--affordances", "contain-ability,support-ability",
         "--model", str(ckpt), "--corpus", str(corpus), "--out", str(work / "request")],
    ]
    for step in steps:
        print(f"$ formfunc {' '.join(step)}")
        rc = formfunc(step)
        if rc != 0:
            print(f"step failed with exit code {rc}", file=sys.stderr)
            return rc
    print(f"done; artifacts under {work}")
    return 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--workdir", default="desk_run")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--epochs", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    raise SystemExit(run(p.parse_args()))
