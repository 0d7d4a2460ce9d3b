"""Batch command-line front end.

Parameter precedence: built-in defaults < config file (flat key = value
lines) < explicit command-line flags. Exit codes: 0 success, 1 input or
usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys
from dataclasses import fields

from .errors import NumericalError
from .pipeline import RunConfig, run_batch

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="fftmap",
        description="Analyze local image structure by moving-window FFT, "
                    "PCA scree estimation and blind NMF decomposition.",
    )
    p.add_argument("inputs", nargs="+", help="image files or glob patterns")
    p.add_argument("--elemsize", type=int, help="window side in pixels (default 128)")
    p.add_argument("--xstep", type=int, help="horizontal window step (default 64)")
    p.add_argument("--ystep", type=int, help="vertical window step (default 64)")
    p.add_argument("--components", type=int,
                   help="force the NMF component count (default: auto from scree)")
    p.add_argument("--n-scree", type=int, dest="n_scree",
                   help="number of scree components to compute (default 30)")
    p.add_argument("--rescale-2048", action="store_const", const=True,
                   dest="rescale_to_2048", help="rescale image width to 2048 px first")
    p.add_argument("--pixel-size-nm", type=float, dest="pixel_size_nm",
                   help="physical pixel size in nm, for nm spacings")
    p.add_argument("--max-iter", type=int, dest="max_iter",
                   help="NMF iteration cap (default 200)")
    p.add_argument("--tol", type=float, help="NMF relative objective tolerance (default 1e-4)")
    p.add_argument("--dc-exclusion", type=int, dest="dc_exclusion",
                   help="DC exclusion radius in bins for peak finding (default 3)")
    p.add_argument("--sweep", type=_int_list,
                   help="comma-separated window sizes for the sweep study, "
                        "e.g. 16,32,64,128,256,512")
    p.add_argument("--out", help="output directory (default fftmap_out)")
    p.add_argument("--threads", type=int,
                   help="parallel inputs in a batch (default: CPU count)")
    p.add_argument("--config", help="flat key = value config file")
    return p


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}: {e}")


def load_config_file(path):
    """Parse a flat `key = value` file; '#' starts a comment."""
    values = {}
    valid = {f.name for f in fields(RunConfig)}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if key not in valid:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, val)
    return values


def _coerce(key, val):
    kind = {f.name: f.type for f in fields(RunConfig)}[key]
    if key == "sweep":
        return [int(t) for t in val.replace(",", " ").split()]
    if "bool" in str(kind):
        return val.lower() in ("1", "true", "yes", "on")
    if "float" in str(kind):
        return float(val)
    if "int" in str(kind):
        return int(val)
    return val


def resolve_config(args):
    """Merge defaults, config file and explicit flags into a RunConfig."""
    cfg = RunConfig()
    if args.config:
        for key, val in load_config_file(args.config).items():
            setattr(cfg, key, val)
    for f in fields(RunConfig):
        flag_val = getattr(args, f.name, None)
        if flag_val is not None:
            setattr(cfg, f.name, flag_val)
    return cfg


def expand_inputs(patterns):
    paths = []
    for pat in patterns:
        hits = sorted(glob.glob(pat))
        if hits:
            paths.extend(hits)
        elif os.path.exists(pat):
            paths.append(pat)
    return paths


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (OSError, ValueError) as e:
        print(f"fftmap: config error: {e}", file=sys.stderr)
        return EXIT_USAGE

    paths = expand_inputs(args.inputs)
    if not paths:
        print(f"fftmap: no inputs match {args.inputs}", file=sys.stderr)
        return EXIT_USAGE

    results = run_batch(cfg, paths)
    numerical_failure = False
    for r in results:
        if r["ok"]:
            print(f"ok      {r['input']}  ({r['seconds']:.1f}s)")
        else:
            print(f"FAILED  {r['input']}: {r['error']}", file=sys.stderr)
            if _is_numerical(r):
                numerical_failure = True
    n_fail = sum(not r["ok"] for r in results)
    print(f"{len(results) - n_fail}/{len(results)} inputs succeeded")
    if n_fail == 0:
        return EXIT_OK
    return EXIT_NUMERICAL if numerical_failure else EXIT_USAGE


def _is_numerical(result):
    return "NumericalError" in result.get("traceback", "") or \
        "non-finite" in result.get("error", "")


if __name__ == "__main__":
    sys.exit(main())
