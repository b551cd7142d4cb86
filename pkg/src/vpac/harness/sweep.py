"""Parameter sweeps over one configuration key."""

import csv
import os
from concurrent.futures import ProcessPoolExecutor

from ..errors import VpacError
from .config import apply_overrides, from_dict
from .runner import execute

METRICS = ["n", "dt", "n_steps", "E0", "ET", "ES0", "int_lambda_sq_T", "dissipation_T",
           "energy_identity_residual", "max_mass_deficit_ratio", "max_sup_abs_phi",
           "max_xi_pos_l1", "density_cap", "kernel_worst_rel_margin"]


def parse_axis(text):
    """'model.eps=0.04,0.02' -> ('model.eps', [0.04, 0.02]); empty value list allowed."""
    import yaml
    if "=" not in text:
        raise ValueError("axis must look like key=v1,v2,...")
    key, vals = text.split("=", 1)
    vals = [yaml.safe_load(v) for v in vals.split(",") if v.strip()]
    return key.strip(), vals


def _one(args):
    base, key, value, outdir = args
    row = {"key": key, "value": value}
    try:
        d = base if key is None else apply_overrides(base, [(key, value)])
        if outdir is not None:
            tag = "base" if key is None else f"{key}={value}"
            d = apply_overrides(d, [("outputs.csv", f"{tag}.csv"),
                                    ("outputs.summary", f"{tag}.json"),
                                    ("outputs.snapshot_dir", f"{tag}-snapshots")])
        out = execute(from_dict(d), outdir, write=outdir is not None)
        row.update({m: out.summary.get(m) for m in METRICS})
        row["failures"] = len(out.failures)
        row["status"] = "ok" if out.ok else "invariant-failure"
        row["error"] = ""
    except (VpacError, ValueError) as e:
        row.update({m: None for m in METRICS})
        row["failures"] = None
        row["status"] = "error"
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def sweep(base, key=None, values=(), workers=1, outdir=None):
    """One row per axis value (the base run alone for an empty axis).

    Runs are independent; rows come back in axis order whatever the worker count.
    """
    jobs = [(base, key, v, outdir) for v in values] if (key and values) else \
        [(base, None, None, outdir)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_one, jobs))
    return [_one(j) for j in jobs]


def write_table(rows, path):
    cols = ["key", "value", "status", "failures"] + METRICS + ["error"]
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: ("" if r.get(c) is None else r.get(c)) for c in cols})
