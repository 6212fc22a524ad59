"""Command-line front end: verify | integrate | family | report.

Field inputs are named presets (plane, const:v, liouville, slinear:a) or
come from a saved bundle directory; complex parameters are entered as
"re,im" pairs. Reports are JSON, fields are CSV (UTF-8, LF).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from superframes import cases, frames, integrator
from superframes.casedefs import CASE_TAGS, CaseSpec, ConstraintViolation
from superframes.fields import BodyVanishesError, ConformalGrid, Field, field_to_csv
from superframes.frames import ResidualReport

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _parse_complex(text):
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"expected re[,im], got {text!r}")


def _parse_grid(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected n,half_width")
    return int(parts[0]), float(parts[1])


def _add_common(p):
    p.add_argument("--case", choices=CASE_TAGS, help="case tag")
    p.add_argument("--bundle", help="load geometry from a saved bundle directory")
    p.add_argument("--grid", type=_parse_grid, default=(121, 1.0),
                   metavar="N,HALF_WIDTH")
    p.add_argument("--center", type=_parse_complex, default=0j, metavar="RE,IM")
    p.add_argument("--tol", type=float, default=None, help="max-norm tolerance override")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    # case parameters
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--alpha", type=_parse_complex, default=0j, metavar="RE,IM")
    p.add_argument("--beta", type=_parse_complex, default=0j, metavar="RE,IM")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--c", type=float, default=-1.0)
    p.add_argument("--eps", type=int, default=1, choices=(-1, 1))
    # field presets
    p.add_argument("--u", default="liouville", help="plane | const:v | liouville")
    p.add_argument("--phi", default="liouville", help="plane | const:v | liouville")
    p.add_argument("--psi", default="const:0", help="const:v | slinear:a")
    p.add_argument("--q", default="const:0", help="Hopf-type coefficient preset")
    p.add_argument("--h", default="const:1", help="mean-curvature preset")
    p.add_argument("--f", default="identity", help="identity | linear:re[,im]")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--psi0", type=float, default=0.0,
                   help="constant psi value for hyp-f3-c2 families")


def _const_value(preset, what):
    if preset == "plane":
        return 0.0
    if preset.startswith("const:"):
        return complex(_parse_complex(preset.split(":", 1)[1]))
    raise ConfigError(f"--{what}: expected plane or const:v, got {preset!r}")


class ConfigError(ValueError):
    pass


def _map_pair(preset):
    if preset == "identity":
        return (lambda z: z), (lambda z: np.ones_like(z))
    if preset.startswith("linear:"):
        zc = _parse_complex(preset.split(":", 1)[1])
        return (lambda z: zc * z), (lambda z: zc * np.ones_like(z))
    raise ConfigError(f"--f: expected identity or linear:re[,im], got {preset!r}")


def _spec_from_args(args):
    if args.case is None:
        raise ConfigError("--case is required (or use --bundle)")
    return CaseSpec(args.case, a=args.a, b=args.b, k=args.k, alpha=args.alpha,
                    beta=args.beta, gamma=args.gamma, c=args.c, eps=args.eps)


def _grid_from_args(args):
    n, hw = args.grid
    if n < 9:
        raise ConfigError("grid needs n >= 9")
    return ConformalGrid(args.center, hw, n)


def _psi_field(grid, preset):
    if preset.startswith("slinear:"):
        slope = float(preset.split(":", 1)[1])
        return Field.from_x(grid, lambda x1, x2: slope * 0.5 * (x1 + x2))
    return Field.constant(grid, _const_value(preset, "psi"))


def build_bundle(args):
    """Construct the case geometry from presets (the `family` logic)."""
    spec = _spec_from_args(args)
    grid = _grid_from_args(args)
    f, fp = _map_pair(args.f)
    tag = spec.tag
    if tag in ("euc-f0", "euc-f2", "euc-f3-c1", "euc-f3-c2", "cur-f0"):
        hname = "h" if tag in ("euc-f2", "euc-f3-c1") else "H"
        h0 = complex(_const_value(args.h, hname)).real
        uname = args.u
        if uname == "liouville":
            bundle = cases.body_family(spec, grid, h0=h0, f=f, fprime=fp)
        else:
            u = Field.constant(grid, _const_value(uname, "u"))
            qv = Field.constant(grid, _const_value(args.q, "q"))
            hv = Field.constant(grid, h0)
            names = ("u", "q", "h") if tag in ("euc-f2", "euc-f3-c1") else ("u", "Q", "H")
            bundle = cases.GeometryBundle(spec, grid, dict(zip(names, (u, qv, hv))))
        return bundle
    if tag == "hyp-f3-c1":
        return cases.hyp_case1_family(spec, grid, f=f, fprime=fp, sigma=args.sigma)
    if tag == "hyp-f3-c2":
        if args.phi == "liouville":
            return cases.hyp_case2_family(spec, grid, f=f, fprime=fp, psi0=args.psi0)
        phi = Field.constant(grid, complex(_const_value(args.phi, "phi")).real)
        psi = _psi_field(grid, args.psi)
        return cases.hyp_case2_derived(spec, phi, psi)
    raise ConfigError(f"no family builder for {tag}")


def _load_or_build(args):
    if args.bundle:
        return cases.GeometryBundle.load(args.bundle)
    return build_bundle(args)


def verify_bundle(bundle, tol_max=None):
    """The case's verification gate, merged into a single report."""
    spec, grid = bundle.spec, bundle.grid
    report = ResidualReport(spec.tag, grid, tol_max=tol_max)
    sub = [frames.gauss_codazzi_residual(spec, bundle.fields, tol_max=tol_max)]
    tag = spec.tag
    # the reduced-equation case gates on its scalar equation only; the
    # case-1 matrices need an invertible odd metric factor
    run_zcc = tag != "hyp-f3-c2"
    if tag == "hyp-f3-c1":
        w = bundle.fields.get("omega")
        if w is not None and abs(w.body()[0, 0]) < 0.1:
            run_zcc = False
    if run_zcc:
        fs = frames.assemble(spec, bundle.fields)
        sub.append(frames.zero_curvature_residual(fs, tol_max=tol_max))
    if tag in ("euc-f3-c1", "euc-f3-c2"):
        sub.append(cases.appendix_a_for_bundle(bundle, tol_max=tol_max))
    if tag == "hyp-f3-c1":
        sub.append(cases.appendix_b_for_bundle(bundle, tol_max=tol_max))
    if tag == "hyp-f3-c2":
        margin = cases.hyp_c2_constraint_margin(spec, bundle.fields)
        report.extra["constraint_margin_min"] = float(margin.min())
        if margin.min() <= 0:
            idx = tuple(int(v) for v in np.unravel_index(int(np.argmin(margin)), margin.shape))
            raise ConstraintViolation("psi-gradient-bound",
                                      f"margin {margin.min():.3e}", idx)
    for r in sub:
        report.entries.extend(r.entries)
    return report


def cmd_verify(args):
    bundle = _load_or_build(args)
    report = verify_bundle(bundle, tol_max=args.tol)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "verify_report.json")
    report.write(path)
    status = EXIT_OK if report.passed else EXIT_FAIL
    print(f"{'PASS' if report.passed else 'FAIL'} case={report.case} "
          f"overall_max={report.overall_max:.3e} tol={report.tol_max:.3e} -> {path}")
    return status


def cmd_family(args):
    try:
        bundle = build_bundle(args)
    except ConstraintViolation as exc:
        print(f"constraint error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    bundle.save(args.out)
    print(f"wrote bundle for {bundle.spec.tag} to {args.out}")
    return EXIT_OK


def cmd_integrate(args):
    bundle = _load_or_build(args)
    spec, grid = bundle.spec, bundle.grid
    fs = frames.assemble(spec, bundle.fields)
    zcc = frames.zero_curvature_residual(fs, tol_max=args.tol)
    compatible = zcc.passed
    hol = integrator.holonomy(fs)
    os.makedirs(args.out, exist_ok=True)
    report = ResidualReport(spec.tag, grid, tol_max=args.tol)
    report.entries.extend(zcc.entries)
    report.extra.update(hol.to_json())
    if not compatible:
        report.write(os.path.join(args.out, "integrate_report.json"))
        print(f"FAIL case={spec.tag}: incompatible frame system "
              f"(zcc max {zcc.overall_max:.3e}); holonomy max {hol.max:.3e}")
        return EXIT_FAIL
    ff = integrator.propagate(fs, geom=bundle.fields, check_compatibility=False)
    F, rec = integrator.reconstruct(ff, bundle.fields)
    report.extra["relation_drift"] = rec["relation_drift"]
    report.extra.update({k: v for k, v in rec.items() if k != "pass"})
    ok = rec["pass"]
    # immersion map to CSV: one Field per ambient column
    amb = F.shape[2]
    for col in range(amb):
        fld = Field(grid, F[:, :, col])
        field_to_csv(fld, os.path.join(args.out, f"immersion_{col}.csv"))
    report.write(os.path.join(args.out, "integrate_report.json"))
    print(f"{'PASS' if ok else 'FAIL'} case={spec.tag} relation_drift="
          f"{rec['relation_drift']:.3e} holonomy_max={hol.max:.3e}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_report(args):
    with open(args.path, encoding="utf-8") as fh:
        doc = json.load(fh)
    print(f"case: {doc['case']}  grid: n={doc['grid']['n']} h={doc['grid']['h']:.4g}")
    print(f"pass: {doc['pass']}  overall_max: {doc['overall_max']:.3e}")
    worst = sorted(doc["pairs"], key=lambda e: -e["max"])[:10]
    for e in worst:
        print(f"  ({e['i']},{e['j']}) {e['name']:<22s} sector {tuple(e['sector'])} "
              f"max {e['max']:.3e}  l2 {e['l2']:.3e}")
    for key in ("holonomy_max", "relation_drift", "constraint_margin_min"):
        if key in doc:
            print(f"{key}: {doc[key]:.3e}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="superframes",
        description="structural-equation verification and frame integration "
                    "for supermanifold immersions")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("verify", cmd_verify), ("integrate", cmd_integrate),
                     ("family", cmd_family)):
        p = subs.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
    pr = subs.add_parser("report")
    pr.add_argument("path")
    pr.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConstraintViolation as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, BodyVanishesError, frames.MissingFieldError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
