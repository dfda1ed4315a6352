"""Command-line front end: ``hardylab <command> [--config FILE] [--out DIR] ...``.

The JSON report goes to stdout (and to ``DIR/report.json`` with ``--out``);
bulk numbers go to CSV files next to it. Wall-clock timing is printed to
stderr only, so reports for the same config and seed are byte-identical.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .bezout import InfeasibleError
from .config import (ConfigError, load_config, parse_field, parse_psi, parse_quadrature_flag,
                     parse_tau)
from .correcting import PsiValidationError
from .corpus import random_sections
from .disk_core import NonFiniteIntegrandError
from .embedding import NotSubunitaryError
from .hankel import ExcludedBudgetError
from .kernels import BACKEND
from .projection import VanishingFiberError
from .suites import (NoSamplesError, Quadrature, bezout_roundtrip_suite, bezout_suite,
                     correcting_suite, embedding_corpus_suite, embeddings_suite, form_corpus_suite,
                     form_suite, identities_suite)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("identities", "correcting-factor", "embeddings", "form", "bezout")

NUMERIC_ERRORS = (ExcludedBudgetError, NonFiniteIntegrandError, InfeasibleError,
                  VanishingFiberError, np.linalg.LinAlgError, FloatingPointError)
CONFIG_ERRORS = (ConfigError, PsiValidationError, NoSamplesError, NotSubunitaryError)


def _quadrature(cfg):
    q = cfg["quadrature"]
    return Quadrature(q["N_r"], q["N_theta"], q["N_b"])


def run_identities(cfg, refine):
    return identities_suite(
        seed=cfg["seed"], fields=cfg["fields"], points=cfg["points"], max_dim=cfg["max_dim"],
        max_degree=cfg["max_degree"], radius=cfg["radius"], min_norm=cfg["min_norm"], h=cfg["h"],
        order_steps=tuple(cfg["order_steps"]), closed_form_points=cfg["closed_form_points"],
        green_degree=cfg["green_degree"], quad=_quadrature(cfg), inject_fault=cfg["inject_fault"])


def run_correcting(cfg, refine):
    res, _ = correcting_suite(
        parse_psi(cfg["psi"]), r_max=cfg["rmax"], grid_nodes=cfg["grid_nodes"], ratio=cfg["ratio"],
        tail_tol=cfg["tail_tol"], moment_weighted=cfg["moment_weighted"],
        sample_nodes=cfg["sample_nodes"], x_min=cfg["x_min"],
        domination_x_max=cfg["domination"]["x_max"], domination_nodes=cfg["domination"]["nodes"],
        seed=cfg["seed"])
    return res


def run_embeddings(cfg, refine):
    quad = _quadrature(cfg)
    if cfg["corpus"]:
        sec = cfg["sections"]
        return embedding_corpus_suite(cfg["seed"], sec["count"], sec["max_degree"], quad, refine,
                                      cfg["tolerance"])
    f = parse_field(cfg["f"])
    rng = np.random.default_rng(cfg["seed"])
    sections = [parse_field(p) for p in cfg["sections"]["explicit"]]
    sections += random_sections(rng, f.dim, cfg["sections"]["count"], cfg["sections"]["max_degree"])
    for p in sections:
        if p.dim != f.dim:
            raise ConfigError(f"section has {p.dim} components, f has {f.dim}")
    return embeddings_suite(f, parse_tau(cfg["tau"]), parse_psi(cfg["psi"]), sections, quad,
                            refine, cfg["tolerance"])


def run_form(cfg, refine):
    quad = _quadrature(cfg)
    if cfg["corpus"]:
        return form_corpus_suite(cfg["seed"], cfg["pairs"], degrees=cfg["degrees"], quad=quad)
    f = parse_field(cfg["f"])
    h1, p2 = parse_field(cfg["h1"]), parse_field(cfg["p2"])
    if h1.dim != f.dim or p2.dim != f.dim:
        raise ConfigError("h1 and p2 need as many components as f")
    return form_suite(f, parse_tau(cfg["tau"]), h1, p2, cfg["degrees"], parse_psi(cfg["psi"]), quad)


def run_bezout(cfg, refine):
    res = bezout_suite(parse_field(cfg["f"]), parse_tau(cfg["tau"]), parse_psi(cfg["psi"]),
                       cfg["degree"], cfg["iterations"], cfg["g_sup_limit"], cfg["sweep"],
                       _quadrature(cfg))
    if cfg["roundtrip"]:
        rt = bezout_roundtrip_suite(cfg["seed"], cfg["roundtrip"], cfg["iterations"])
        for c in rt.checks:
            res.checks.append(type(c)("roundtrip_" + c.name, c.value, c.limit, c.relation))
        res.tables.update(rt.tables)
        res.data["roundtrip"] = rt.data
    return res


RUNNERS = {
    "identities": run_identities,
    "correcting-factor": run_correcting,
    "embeddings": run_embeddings,
    "form": run_form,
    "bezout": run_bezout,
}


def sanitize(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [sanitize(obj.real), sanitize(obj.imag)]
    return obj


def dump_report(report):
    return json.dumps(sanitize(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def build_parser():
    p = argparse.ArgumentParser(prog="hardylab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hardylab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", help="directory for report.json and CSV tables")
        s.add_argument("--refine", action="store_true", help="repeat with doubled quadrature")
        s.add_argument("--seed", type=int, help="seed for random corpora (overrides config)")
        s.add_argument("--quadrature", metavar="NR,NTHETA,NB", help="override quadrature sizes")
    return p


def execute(command, config_path=None, out=None, refine=False, seed=None, quadrature=None):
    """Run one command; returns ``(exit_code, report_dict)``."""
    report = {"command": command, "version": __version__, "backend": BACKEND, "refine": bool(refine)}
    try:
        cfg = load_config(command, config_path)
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg["seed"] = seed
        if quadrature is not None:
            cfg["quadrature"] = parse_quadrature_flag(quadrature)
        report["config"] = cfg
        result = RUNNERS[command](cfg, refine)
    except NUMERIC_ERRORS as exc:
        report["error"] = {"kind": "numeric", "type": type(exc).__name__, "message": str(exc)}
        report["exit_code"] = EXIT_NUMERIC
        return EXIT_NUMERIC, report
    except CONFIG_ERRORS + (ValueError,) as exc:
        report["error"] = {"kind": "config", "type": type(exc).__name__, "message": str(exc)}
        report["exit_code"] = EXIT_CONFIG
        return EXIT_CONFIG, report
    code = EXIT_OK if result.passed else EXIT_CHECK
    report["checks"] = [c.to_dict() for c in result.checks]
    report["failed"] = [c.name for c in result.checks if not c.passed]
    report["passed"] = result.passed
    report["results"] = result.data
    report["tables"] = sorted(f"{name}.csv" for name in result.tables)
    report["exit_code"] = code
    if out is not None:
        os.makedirs(out, exist_ok=True)
        for name, (header, rows) in result.tables.items():
            write_table(os.path.join(out, f"{name}.csv"), header, rows)
    return code, report


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code, report = execute(args.command, args.config, args.out, args.refine, args.seed,
                           args.quadrature)
    text = dump_report(report)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    elapsed = time.perf_counter() - start
    status = {0: "pass", 1: "check failure", 2: "config error", 3: "numeric error"}[code]
    msg = f"hardylab {args.command}: {status} ({elapsed:.2f} s)"
    if "error" in report:
        msg += f": {report['error']['message']}"
    elif report.get("failed"):
        msg += ": failed " + ", ".join(report["failed"])
    print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
