"""Write every figure dataset to a directory and report its shape checks."""
import argparse
import sys
import time
from pathlib import Path

from qthermo.dataset import serialize
from qthermo.figures import RECIPES, build_figure, check_figure


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--only", nargs="*", choices=sorted(RECIPES))
    args = ap.parse_args(argv)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name in args.only or sorted(RECIPES):
        t0 = time.perf_counter()
        ds = build_figure(name)
        (out / f"{name}.{args.format}").write_text(serialize(ds, args.format))
        checks = check_figure(name, ds)
        bad = [desc for desc, ok in checks if not ok]
        failures += len(bad)
        status = "ok" if not bad else "FAILED: " + "; ".join(bad)
        print(f"{name:6s} {len(ds.rows):5d} rows  {len(checks)} checks {status}  "
              f"({time.perf_counter() - t0:.1f} s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
