"""Command line entry point: vpac {run,scenario,sweep,diagnose,plot}."""

import argparse
import json
import sys

from ..diagnostics import make_record
from ..errors import BlowupError, ConfigError, IoError, VpacError
from ..model import ModelParams
from . import io
from .config import apply_overrides, from_dict, load_config
from .runner import execute
from .scenarios import NAMES, run_scenario
from .sweep import parse_axis, sweep, write_table


def _print_failures(bad):
    for f in bad:
        print(f"FAIL {f}", file=sys.stderr)


def cmd_run(a):
    cfg = load_config(a.config, a.override)
    out = execute(cfg, a.outdir)
    s = out.summary
    print(f"{s['n_steps']} steps, dt={s['dt']:.4g}, E: {s['E0']:.6g} -> {s['ET']:.6g}")
    _print_failures(out.failures)
    return 1 if out.failures else 0


def cmd_scenario(a):
    status, outs, bad = run_scenario(a.name, a.overrides, a.outdir)
    for o in outs:
        s = o.summary
        print(f"{a.name} [{s['kind']}]: {s['n_steps']} steps, E {s['E0']:.6g} -> {s['ET']:.6g}, "
              f"int lambda^2 = {s['int_lambda_sq_T']:.6g}")
    _print_failures(bad)
    print("PASS" if status == 0 else "FAIL")
    return status


def cmd_sweep(a):
    import yaml
    with open(a.config) as fh:
        base = yaml.safe_load(fh)
    base = apply_overrides(base, a.override)
    from_dict(base)  # validate the base before fanning out
    key, vals = parse_axis(a.axis) if a.axis else (None, [])
    rows = sweep(base, key, vals, workers=a.workers, outdir=a.outdir)
    if a.table:
        write_table(rows, a.table)
    for r in rows:
        print(json.dumps({k: r.get(k) for k in ("value", "status", "int_lambda_sq_T",
                                                 "energy_identity_residual", "density_cap",
                                                 "error")}))
    return 0 if all(r["status"] != "error" for r in rows) else 1


def cmd_diagnose(a):
    snap = io.read_snapshot(a.snapshot)
    h = snap.header
    p = ModelParams(h["eps"], h["alpha"], h["kind"], h["m0"])
    from ..model import multiplier
    phi = snap.field
    rec = make_record(phi, p, h.get("t", 0.0), multiplier(phi, p), h.get("int_lambda_sq", 0.0),
                      h.get("dissipation", 0.0), h.get("es0", 0.0))
    print(json.dumps(rec.as_dict(), indent=1))
    return 0


def cmd_plot(a):
    from .plot import plot_csv
    for f in plot_csv(a.csv, a.outdir):
        print(f)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="vpac", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a configuration file")
    r.add_argument("--config", required=True)
    r.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--outdir", default=None)
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("scenario", help="run a named scenario")
    s.add_argument("name", choices=NAMES)
    s.add_argument("overrides", nargs="*", metavar="KEY=VALUE")
    s.add_argument("--outdir", default="out")
    s.set_defaults(fn=cmd_scenario)

    w = sub.add_parser("sweep", help="sweep one configuration key")
    w.add_argument("--config", required=True)
    w.add_argument("--axis", default=None, metavar="KEY=V1,V2,...")
    w.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--outdir", default=None)
    w.add_argument("--table", default=None, help="write the summary table as CSV")
    w.set_defaults(fn=cmd_sweep)

    d = sub.add_parser("diagnose", help="recompute a record from a snapshot")
    d.add_argument("--snapshot", required=True)
    d.set_defaults(fn=cmd_diagnose)

    p = sub.add_parser("plot", help="write SVG plots of a diagnostics CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--outdir", default=None)
    p.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None):
    a = build_parser().parse_args(argv)
    try:
        return a.fn(a)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except BlowupError as e:
        print(f"blowup: {e}", file=sys.stderr)
        return 3
    except (IoError, OSError) as e:
        print(f"io error: {e}", file=sys.stderr)
        return 4
    except VpacError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
