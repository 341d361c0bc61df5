"""Command-line front end.

Subcommands: transform, translate, convolve, multiplier-apply,
verify {hpw,hpw-general,donoho-stark,calderon,admissibility}, suite.

Every number printed or serialized comes from a library operation; the CLI
only formats.  Exit codes: 0 success (all certificates pass), 1 numeric or
certificate failure, 2 configuration or file-format errors.  Output files
are written atomically, and identical configs and inputs produce
byte-identical JSON.
"""

import argparse
import concurrent.futures
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .config import load_config
from .errors import (
    ConfigError,
    DomainError,
    FieldFormatError,
    GridMismatchError,
    NotAdmissibleError,
)
from .fieldio import _atomic_write, read_field, write_field
from .grids import Field, norm
from .multiplier import (
    apply_spectral,
    calderon_isometry_defect,
    check_admissibility,
)
from .transform import TransformPlan, forward, plancherel_defect
from .translate import translate
from .uncertainty import (
    donoho_stark_certificate,
    hpw_general,
    hpw_multiplier,
    hpw_transform,
)

VERIFY_CHOICES = ("hpw", "hpw-general", "donoho-stark", "calderon", "admissibility")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polyax",
        description="Fourier-Bessel transforms, generalized convolution, and "
        "uncertainty certificates on the positive orthant",
    )
    parser.add_argument("--version", action="version", version=f"polyax {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_in=False, needs_out=False):
        sp.add_argument("--config", required=True, help="experiment config file")
        sp.add_argument("--in", dest="infile", required=needs_in, help="input field")
        sp.add_argument("--in2", dest="infile2", help="second input field")
        sp.add_argument("--out", dest="outfile", required=needs_out, help="output path")
        sp.add_argument("--json", action="store_true", help="print JSON to stdout")
        sp.add_argument("--threads", type=int, default=1, help="suite concurrency")

    add_common(sub.add_parser("transform", help="apply the transform to a field"),
               needs_in=True, needs_out=True)
    add_common(sub.add_parser("translate", help="generalized translation of a field"),
               needs_in=True, needs_out=True)
    add_common(sub.add_parser("convolve", help="generalized convolution of two fields"),
               needs_in=True, needs_out=True)
    add_common(sub.add_parser("multiplier-apply", help="apply the multiplier operator"),
               needs_in=True, needs_out=True)
    vp = sub.add_parser("verify", help="run a certificate and emit JSON")
    vp.add_argument("which", choices=VERIFY_CHOICES)
    add_common(vp)
    sp = sub.add_parser("suite", help="run every config in a directory")
    sp.add_argument("--config", required=True, help="directory of .cfg files")
    sp.add_argument("--out", dest="outfile", help="output directory (default: config dir)")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--threads", type=int, default=1)
    return parser


def _dump_json(payload, out_path=None, to_stdout=False):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        _atomic_write(out_path, lambda fh: fh.write(text), mode="w")
    if to_stdout or not out_path:
        sys.stdout.write(text)


def _load_input(cfg, path, grid):
    field = read_field(path, grid=grid)
    if not field.grid.matches(grid):
        raise FieldFormatError(f"{path}: field grid does not match the config grid")
    return field


def cmd_transform(args, cfg):
    grid = cfg.build_grid()
    field = _load_input(cfg, args.infile, grid)
    plan = TransformPlan(grid)
    out = forward(plan, field)
    write_field(out, args.outfile)
    if norm(field, 2) > 0.0:
        defect = plancherel_defect(plan, field)
        print(f"plancherel_defect={defect!r}")
    else:
        print("plancherel_defect=nan (zero field)")
    return 0


def cmd_translate(args, cfg):
    if cfg.translate_x is None:
        raise ConfigError(f"{cfg.path}: translate needs [translate] x")
    grid = cfg.build_grid()
    field = _load_input(cfg, args.infile, grid)
    out = translate(field, np.asarray(cfg.translate_x))
    write_field(out, args.outfile)
    return 0


def cmd_convolve(args, cfg):
    grid = cfg.build_grid()
    field = _load_input(cfg, args.infile, grid)
    other_path = args.infile2 or cfg.convolve_other
    if not other_path:
        raise ConfigError("convolve needs --in2 or [convolve] other")
    other = _load_input(cfg, other_path, grid)
    from .translate import convolve

    out = convolve(field, other)
    write_field(out, args.outfile)
    return 0


def cmd_multiplier_apply(args, cfg):
    grid = cfg.build_grid()
    field = _load_input(cfg, args.infile, grid)
    m = cfg.build_multiplier()
    plan = TransformPlan(grid)
    out = apply_spectral(field, m, cfg.multiplier_sigma, plan)
    write_field(out, args.outfile)
    return 0


def _verify_payload(cfg, which):
    grid = cfg.build_grid()
    plan = TransformPlan(grid)
    certificates = []
    passed = True

    if which == "admissibility":
        m = cfg.build_multiplier()
        scales = cfg.build_scales()
        report = check_admissibility(
            m, scales, rays=_config_rays(grid), tolerance=cfg.tol_admissibility
        )
        payload = {
            "schema": 1,
            "kind": "admissibility",
            "report": report.to_json_dict(),
            "passed": bool(report.is_admissible),
        }
        return payload, report.is_admissible

    fn = cfg.build_function()
    f = Field.from_function(grid, fn)

    if which == "hpw":
        cert = hpw_transform(f, plan, tolerance=cfg.tol_certificate)
        certificates.append(cert.to_json_dict())
        passed &= cert.passed
        if cfg.has_multiplier:
            cert2 = hpw_multiplier(
                f,
                cfg.build_multiplier(),
                cfg.build_scales(),
                plan,
                tolerance=cfg.tol_certificate,
                admissibility_tol=cfg.tol_admissibility,
            )
            certificates.append(cert2.to_json_dict())
            passed &= cert2.passed
    elif which == "hpw-general":
        cert = hpw_general(
            f,
            cfg.build_multiplier(),
            cfg.general_a,
            cfg.general_b,
            cfg.build_scales(),
            plan,
            tolerance=cfg.tol_certificate,
            admissibility_tol=cfg.tol_admissibility,
        )
        certificates.append(cert.to_json_dict())
        passed &= cert.passed
    elif which == "donoho-stark":
        if not cfg.has_multiplier:
            raise ConfigError(f"{cfg.path}: donoho-stark needs a [multiplier] section")
        if cfg.e_region is None or cfg.s_region is None:
            raise ConfigError(f"{cfg.path}: donoho-stark needs [sets] e_box/e_mask and s_sigma")
        cert = donoho_stark_certificate(
            f,
            cfg.build_multiplier(),
            cfg.e_region,
            cfg.s_region,
            cfg.build_scales(),
            plan,
            f_exact=fn,
            tolerance=cfg.tol_certificate,
            admissibility_tol=cfg.tol_admissibility,
        )
        certificates.append(cert.to_json_dict())
        passed &= cert.passed
    elif which == "calderon":
        defect = calderon_isometry_defect(
            f, cfg.build_multiplier(), cfg.build_scales(), plan
        )
        ok = defect <= cfg.tol_calderon
        certificates.append(
            {
                "schema": 1,
                "kind": "calderon",
                "defect": float(defect),
                "tolerance": cfg.tol_calderon,
                "passed": bool(ok),
            }
        )
        passed &= ok
    payload = {
        "schema": 1,
        "kind": "verify",
        "which": which,
        "config": os.path.basename(cfg.path),
        "passed": bool(passed),
        "certificates": certificates,
    }
    return payload, passed


def _config_rays(grid):
    import math

    unit = np.ones(grid.n) / math.sqrt(grid.n)
    return [s * unit for s in (0.9, 1.0, 1.1)]


def cmd_verify(args, cfg):
    payload, passed = _verify_payload(cfg, args.which)
    _dump_json(payload, args.outfile, args.json)
    if not passed:
        _print_failure(payload)
    return 0 if passed else 1


def _print_failure(payload):
    for cert in payload.get("certificates", []):
        if not cert.get("passed", True):
            slack = cert.get("slack", cert.get("defect"))
            print(
                f"FAIL {cert.get('kind')}/{cert.get('variant', '')}: slack={slack!r}",
                file=sys.stderr,
            )
    report = payload.get("report")
    if report is not None and not payload.get("passed", True):
        print(
            f"FAIL admissibility: deviation={report['max_deviation']!r}",
            file=sys.stderr,
        )


def _run_one_config(path):
    cfg = load_config(path)
    if cfg.verify_which is None:
        raise ConfigError(f"{path}: suite configs need a [verify] section")
    try:
        payload, passed = _verify_payload(cfg, cfg.verify_which)
    except NotAdmissibleError as exc:
        payload = {
            "schema": 1,
            "kind": "verify",
            "which": cfg.verify_which,
            "config": os.path.basename(cfg.path),
            "passed": False,
            "error": "multiplier not admissible",
            "report": None if exc.report is None else exc.report.to_json_dict(),
            "certificates": [],
        }
        passed = False
    except (DomainError, GridMismatchError) as exc:
        payload = {
            "schema": 1,
            "kind": "verify",
            "which": cfg.verify_which,
            "config": os.path.basename(cfg.path),
            "passed": False,
            "error": str(exc),
            "certificates": [],
        }
        passed = False
    return payload, passed


def cmd_suite(args):
    directory = args.config
    if not os.path.isdir(directory):
        print(f"error: {directory!r} is not a directory", file=sys.stderr)
        return 2
    paths = sorted(
        os.path.join(directory, name)
        for name in os.listdir(directory)
        if name.endswith(".cfg")
    )
    if not paths:
        print(f"error: no .cfg files in {directory!r}", file=sys.stderr)
        return 2
    out_dir = args.outfile or directory
    os.makedirs(out_dir, exist_ok=True)

    results = {}
    if args.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
            futures = {pool.submit(_run_one_config, p): p for p in paths}
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
    else:
        for p in paths:
            results[p] = _run_one_config(p)

    rows = []
    all_pass = True
    for p in paths:
        payload, passed = results[p]
        name = os.path.splitext(os.path.basename(p))[0]
        _dump_json(payload, os.path.join(out_dir, name + ".json"))
        all_pass &= passed
        summary_value = ""
        for cert in payload.get("certificates", []):
            if "slack" in cert:
                summary_value = repr(cert["slack"])
                break
            if "defect" in cert:
                summary_value = repr(cert["defect"])
                break
        if payload.get("report"):
            summary_value = repr(payload["report"]["max_deviation"])
        rows.append(
            {
                "config": name,
                "which": payload.get("which", payload.get("kind")),
                "passed": str(bool(passed)),
                "metric": summary_value,
            }
        )

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["config", "which", "passed", "metric"])
    writer.writeheader()
    writer.writerows(rows)
    _atomic_write(
        os.path.join(out_dir, "summary.csv"), lambda fh: fh.write(buf.getvalue()), mode="w"
    )
    failed = [r["config"] for r in rows if r["passed"] != "True"]
    print(f"suite: {len(rows) - len(failed)}/{len(rows)} configs passed")
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return 0 if all_pass else 1


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "suite":
            return cmd_suite(args)
        cfg = load_config(args.config)
        if args.command == "transform":
            return cmd_transform(args, cfg)
        if args.command == "translate":
            return cmd_translate(args, cfg)
        if args.command == "convolve":
            return cmd_convolve(args, cfg)
        if args.command == "multiplier-apply":
            return cmd_multiplier_apply(args, cfg)
        if args.command == "verify":
            return cmd_verify(args, cfg)
        parser.error(f"unknown command {args.command}")
    except (ConfigError, FieldFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NotAdmissibleError as exc:
        detail = "" if exc.report is None else f" (deviation {exc.report.max_deviation!r})"
        print(f"error: multiplier not admissible{detail}", file=sys.stderr)
        return 1
    except (DomainError, GridMismatchError, OverflowError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def entry():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
