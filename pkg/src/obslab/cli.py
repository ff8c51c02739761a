"""Command line front end: ``obslab <subcommand> --config <path> [--out <dir>]``.

Exit status: 0 success, 1 verification failure, 2 configuration error.
"""

import argparse
import csv
import hashlib
import json
import math
from pathlib import Path
import sys

import numpy as np

from . import verify as verify_mod
from .config import config_from_dict, load_config
from .dyadic import band_report, covering_defect, covering_sums, overlap_counts, overlap_bound, _log_grid
from .errors import ConfigurationError, PreconditionError
from .observability import admissibility_constant, gramian, theorem_experiment
from .spectral_model import model_to_json
from .states import random_wave_state
from .time_multiplier import TimeWindowing, decay_experiment

SUBCOMMANDS = ("model", "bands", "filter-check", "gramian", "constants", "decay", "verify")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def _write_csv(path, header, rows, digest):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(header) + ["config_hash"])
        for r in rows:
            w.writerow([_fmt(x) for x in r] + [digest])
    return path


def _write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    return path


def _cmd_model(cfg, out):
    if "json" in cfg.formats:
        d = json.loads(model_to_json(cfg.model))
        d["config_hash"] = cfg.hash
        _write_json(out / "model.json", d)
    rows = [(nu + 1, cfg.model.lambdas[nu], float(np.real(cfg.model.obs_pairing[nu, nu])))
            for nu in range(cfg.model.n_modes)]
    _write_csv(out / "model.csv", ["nu", "lambda", "M_nunu"], rows, cfg.hash)
    return 0


def _cmd_bands(cfg, out):
    rows = []
    for kind in ("wave", "schrodinger"):
        rows += [(kind,) + r for r in band_report(cfg.scheme, cfg.model, kind)]
    _write_csv(out / "bands.csv", ["kind", "k", "h_k", "first_nu", "last_nu", "card"], rows, cfg.hash)
    return 0


def _cmd_filter_check(cfg, out, samples=100_000, tau_hi=1e4):
    s = cfg.scheme
    tau = _log_grid(1.0, tau_hi, samples)
    rows, ok = [], True
    try:
        cmin = covering_defect(s, 1.0, tau_hi, samples)
    except ConfigurationError:
        # plateaus stop short of tau_hi: still report the sampled minimum
        cmin = float(covering_sums(s, tau).min())
    passed = cmin >= 1 - 1e-12
    ok &= passed
    rows.append(("covering_min", cmin, 1 - 1e-12, passed, "; ".join(s.hypothesis_violations())))
    omax = int(overlap_counts(s, tau).max())
    passed = omax <= overlap_bound(s)
    ok &= passed
    rows.append(("overlap_max", omax, overlap_bound(s), passed, ""))
    _write_csv(out / "filter_check.csv", ["check", "value", "threshold", "passed", "note"], rows, cfg.hash)
    return 0 if ok else 1


def _gramian_json(G, digest):
    return {"kind": G.kind, "horizon": G.horizon, "config_hash": digest,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in G.matrix]}


def _cmd_gramian(cfg, out):
    for kind in ("wave", "schrodinger"):
        _write_json(out / f"gramian_{kind}.json", _gramian_json(gramian(cfg.model, cfg.T, kind), cfg.hash))
    return 0


def _cmd_constants(cfg, out):
    rows, reports = [], {}
    ex = cfg.exponents
    for kind, e, cap, e0 in (("wave", ex["l1"], 2 * ex["m0"], ex["l0"]),
                             ("schrodinger", ex["p1"], ex["m0"], ex["p0"])):
        rep = theorem_experiment(cfg.model, cfg.scheme, cfg.T, cfg.T_prime, e, kind, k0=cfg.k0,
                                 order_cap=cap, seeds=cfg.seeds)
        for b in rep.bands:
            rows.append(b.row())
        rows.append(rep.low.row())
        rows.append(rep.global_.row())
        C_S = admissibility_constant(gramian(cfg.model, cfg.T, kind), cfg.model, e0)
        rows.append((kind, "admissibility", cfg.T, e0, C_S, "", cfg.model.n_modes * (2 if kind == "wave" else 1)))
        reports[kind] = {
            "T": rep.T, "T_prime": rep.T_prime, "exponent": rep.exponent, "k0": rep.k0,
            "k_max": rep.k_max, "overlap": rep.overlap, "min_band_c": rep.min_band_c,
            "low_c": rep.low.c, "global_c": rep.global_.c, "defect": rep.defect,
            "admissibility_C_S": C_S, "flags": rep.flags,
            "chain": [dict(zip(("seed", "energy", "low_term", "band_rhs", "assembled_rhs",
                                "slack_band", "slack_assembled"), r)) for r in rep.chain],
            "closes": rep.closes(),
        }
    _write_csv(out / "constants.csv", ["kind", "k", "T", "exponent", "c", "C_obs", "dim"], rows, cfg.hash)
    if "json" in cfg.formats:
        _write_json(out / "theorem.json", _finite({"config_hash": cfg.hash, "reports": reports}))
    return 0


def _finite(obj):
    # JSON has no inf; write it as a string
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _cmd_decay(cfg, out):
    d = cfg.decay
    u = random_wave_state(cfg.model, cfg.seeds[0], level=d["level"])
    w = TimeWindowing(delta=d["delta"])
    table = decay_experiment(cfg.model, u, cfg.scheme, w, range(d["k_min"], d["k_max"] + 1),
                             dt=cfg.dt, span=cfg.span)
    _write_csv(out / "decay.csv", table.header(), table.rows, cfg.hash)
    return 0


def _cmd_verify(cfg, out):
    checks = verify_mod.run_suite(stream=sys.stdout)
    rows = [(c.name, c.value, c.threshold, c.passed, c.detail) for c in checks]
    _write_csv(out / "verify.csv", ["check", "value", "threshold", "passed", "detail"], rows, cfg.hash)
    return 0 if all(c.passed for c in checks) else 1


_DISPATCH = {
    "model": _cmd_model,
    "bands": _cmd_bands,
    "filter-check": _cmd_filter_check,
    "gramian": _cmd_gramian,
    "constants": _cmd_constants,
    "decay": _cmd_decay,
    "verify": _cmd_verify,
}


def run(cfg, subcommand, out=None):
    """Run one subcommand; returns the exit status."""
    out = Path(out if out is not None else cfg.out_dir)
    return _DISPATCH[subcommand](cfg, out)


def main(argv=None):
    p = argparse.ArgumentParser(prog="obslab", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON configuration (defaults are used when omitted)")
    p.add_argument("--out", help="output directory (overrides outputs.dir)")
    args = p.parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config)
        else:
            cfg = config_from_dict({}, digest=hashlib.sha256(b"{}").hexdigest()[:16])
        return run(cfg, args.subcommand, args.out)
    except ConfigurationError as e:
        for v in e.violations:
            print(f"configuration error: {v}", file=sys.stderr)
        return 2
    except PreconditionError as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
