"""Command-line entry point: verification, sampling, quadrature, and experiments.

Configuration may come from a JSON file (--config) with flags overriding its
fields; every run emits a manifest (echoed config, seed, package version) next
to its outputs.  Exit codes: 0 success, 2 validation error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


class ValidationFailure(Exception):
    pass


def _load_config(path):
    with open(path) as fh:
        return json.load(fh)


def _emit(records, path, header=None):
    """Write JSON lines (dicts) or CSV rows (tuples with a header)."""
    if path in (None, "-"):
        out = sys.stdout
        close = False
    else:
        out = open(path, "w", newline="")
        close = True
    try:
        if header is not None:
            w = csv.writer(out)
            w.writerow(header)
            w.writerows(records)
        else:
            for rec in records:
                out.write(json.dumps(rec) + "\n")
    finally:
        if close:
            out.close()


def _manifest(args, extra=None):
    rec = {
        "manifest": True,
        "version": __version__,
        "seed": args.seed,
        "workers": getattr(args, "workers", 1),
        "argv": sys.argv[1:],
    }
    if getattr(args, "config", None):
        rec["config"] = _load_config(args.config)
    if extra:
        rec.update(extra)
    return rec


def _model_from_args(args):
    from .model import QHahnModel

    cfg = _load_config(args.config) if args.config else {}
    block = cfg.get("model", {})
    q = args.q if args.q is not None else block.get("q")
    mu = block.get("mu")
    kappa = block.get("kappa")
    lam = block.get("lam")
    colors = block.get("colors")
    missing = [k for k, v in {"q": q, "mu": mu, "kappa": kappa, "lam": lam, "colors": colors}.items() if v is None]
    if missing:
        raise ValidationFailure(f"missing model field(s): {', '.join(missing)}")
    return QHahnModel(q=q, mu=tuple(mu), kappa=tuple(kappa), lam=tuple(lam), colors=tuple(colors))


def _polymer_from_args(args):
    from .polymer import PolymerModel

    cfg = _load_config(args.config) if args.config else {}
    block = cfg.get("model", {})
    for key in ("sigma", "rho", "omega"):
        if key not in block:
            raise ValidationFailure(f"missing model field(s): {key}")
    return PolymerModel(tuple(block["sigma"]), tuple(block["rho"]), tuple(block["omega"]))


# ---------------------------------------------------------------------------
# Subcommand handlers.


def _cmd_verify(args):
    from .qtools import spawn_rng

    rng = spawn_rng(args.seed)
    records = []
    if args.what == "ybe":
        from .weights import canonical_ybe_kind, random_ybe_instance, ybe_residual

        kind = canonical_ybe_kind(args.kind)
        nonzero = 0
        for trial in range(args.trials):
            boundary, params = random_ybe_instance(kind, rng, colors=args.colors, max_entry=args.max_entry)
            resid = ybe_residual(kind, boundary, params)
            if resid != 0:
                nonzero += 1
            records.append({"trial": trial, "kind": kind, "residual_zero": resid == 0})
        summary = {"kind": kind, "trials": args.trials, "nonzero_residuals": nonzero}
        if nonzero:
            raise ValidationFailure(f"nonzero residuals: {nonzero}")
    elif args.what == "stochastic":
        from .weights import qhahn_outgoing, sixv_outgoing

        bad = 0
        for trial in range(args.trials):
            q = Fraction(int(rng.integers(1, 8)), int(rng.integers(9, 17)))
            tt = Fraction(int(rng.integers(1, 8)), int(rng.integers(9, 17)))
            ss = Fraction(int(rng.integers(1, 8)), int(rng.integers(9, 17)))
            A = tuple(int(v) for v in rng.integers(0, 3, size=args.colors))
            B = tuple(int(v) for v in rng.integers(0, 3, size=args.colors))
            ok = sum(qhahn_outgoing(A, B, q, tt, ss).values()) == 1
            j = int(rng.integers(0, args.colors + 1))
            ok = ok and sum(sixv_outgoing(A, j, q, tt, ss).values()) == 1
            bad += 0 if ok else 1
            records.append({"trial": trial, "ok": ok})
        summary = {"trials": args.trials, "failures": bad}
        if bad:
            raise ValidationFailure(f"stochasticity failures: {bad}")
    elif args.what == "local-alg":
        from .weights import local_relation_residual

        bad = 0
        for trial in range(args.trials):
            n = int(rng.integers(1, 4))
            A = tuple(int(v) for v in rng.integers(0, 3, size=n))
            B = tuple(int(v) for v in rng.integers(0, 3, size=n))
            R = tuple(int(v) for v in rng.integers(0, 3, size=n))
            q = Fraction(int(rng.integers(1, 8)), int(rng.integers(9, 17)))
            tt = Fraction(int(rng.integers(1, 8)), int(rng.integers(9, 17)))
            ss = Fraction(int(rng.integers(1, 8)), int(rng.integers(9, 17)))
            ok = local_relation_residual(A, B, R, q, tt, ss) == 0
            bad += 0 if ok else 1
            records.append({"trial": trial, "ok": ok})
        summary = {"trials": args.trials, "failures": bad}
        if bad:
            raise ValidationFailure(f"local relation failures: {bad}")
    elif args.what == "local-rat":
        from .hecke import local_rational_residual

        worst = 0.0
        for trial in range(args.trials):
            r = int(rng.integers(1, 5))
            w = tuple(complex(x, y) for x, y in rng.normal(size=(r, 2)))
            resid = abs(local_rational_residual(r, 0.55, 0.35, 0.4, w, 0.62))
            worst = max(worst, resid)
            records.append({"trial": trial, "r": r, "residual": resid})
        summary = {"trials": args.trials, "worst_residual": worst}
        if worst > 1e-12:
            raise ValidationFailure(f"rational local relation residual {worst:.2e} > 1e-12")
    elif args.what == "hecke":
        from .hecke import hecke_suite

        errs = hecke_suite(min(args.colors + 1, 4), 0.44, rng, npoints=args.trials)
        records.append({k: v for k, v in errs.items()})
        summary = dict(errs)
        if max(errs.values()) > 1e-10:
            raise ValidationFailure("Hecke relation error above 1e-10")
    else:
        raise ValidationFailure(f"unknown verify target {args.what!r}")
    records.append(_manifest(args, {"summary": summary}))
    _emit(records, args.output)


def _cmd_sample(args):
    from .model import HeightRequest, height_field, sample_grid
    from .qtools import spawn_rng

    model = _model_from_args(args)
    rng = spawn_rng(args.seed)
    rows = []
    for rep in range(args.samples):
        cfg = sample_grid(model, rng)
        for c in range(1, model.n_colors + 1):
            H = height_field(cfg, c)
            for ix in range(H.shape[0]):
                for iy in range(H.shape[1]):
                    rows.append((2 * ix + 1, 2 * iy + 1, c, int(H[ix, iy])))
    _emit(rows, args.output, header=("facet_x2", "facet_y2", "color", "value"))
    _emit([_manifest(args)], args.manifest)


def _cmd_moments(args):
    from .qtools import Permutation

    records = []
    if args.target == "qhahn":
        from .model import HeightRequest
        from .moments import qmoment_integral

        model = _model_from_args(args)
        tau = Permutation(tuple(args.tau)) if args.tau else None
        req = HeightRequest.make(args.x, args.y, args.colors_list, tau)
        val, info = qmoment_integral(model, req, with_info=True)
        records.append({
            "request": {"x": args.x, "y": args.y, "colors": args.colors_list,
                        "tau": list(tau.values) if tau else None},
            "value_re": val.real, "value_im": val.imag,
            "nodes": info["nodes"], "converged": info["converged"],
        })
    elif args.target == "polymer":
        from .moments import beta_moment_integral

        pmodel = _polymer_from_args(args)
        tau = Permutation(tuple(args.tau)) if args.tau else None
        xs = [int(v) for v in args.x]
        ys = [int(v) for v in args.y]
        rs = [int(v) for v in args.r]
        val, info = beta_moment_integral(pmodel, xs, ys, rs, tau=tau, with_info=True)
        records.append({
            "request": {"x": xs, "y": ys, "r": rs, "tau": list(tau.values) if tau else None},
            "value_re": val.real, "value_im": val.imag,
            "nodes": info["nodes"], "converged": info["converged"],
        })
    elif args.target == "single-contour":
        from .moments import single_contour_moment

        pmodel = _polymer_from_args(args)
        val = single_contour_moment(pmodel, int(args.x[0]), int(args.y[0]), args.k)
        records.append({
            "request": {"x": int(args.x[0]), "y": int(args.y[0]), "k": args.k},
            "value_re": val.real, "value_im": val.imag, "converged": True,
        })
    else:
        raise ValidationFailure(f"unknown moments target {args.target!r}")
    records.append(_manifest(args))
    _emit(records, args.output)


def _cmd_polymer(args):
    from .polymer import (mc_statistics, partition_bruteforce, partition_dp,
                          rwre_hitting, sample_environment)
    from .qtools import spawn_rng

    pmodel = _polymer_from_args(args)
    records = []
    if args.action == "dp":
        env = sample_environment(pmodel, args.x, args.y, spawn_rng(args.seed))
        field = partition_dp(env, args.r, args.x, args.y)
        rows = []
        for x in range(args.x + 1):
            for y in range(args.y + 1):
                v = field.table[x, y]
                if not np.isnan(v):
                    rows.append((0, x, y, args.r, float(v)))
        _emit(rows, args.output, header=("replica", "x", "y", "r", "value"))
        _emit([_manifest(args)], args.manifest)
        return
    if args.action == "brute":
        env = sample_environment(pmodel, args.x, args.y, spawn_rng(args.seed))
        z_dp = partition_dp(env, args.r, args.x, args.y).value(args.x, args.y)
        z_bf = partition_bruteforce(env, args.r, args.x, args.y)
        z_rw = rwre_hitting(env, args.r, args.x, args.y)
        records.append({"dp": z_dp, "bruteforce": z_bf, "rwre": z_rw,
                        "max_abs_diff": max(abs(z_dp - z_bf), abs(z_dp - z_rw))})
    elif args.action == "mc":
        mode = "logZ" if args.log else "moments"
        stats = mc_statistics(pmodel, args.r, args.x, args.y, args.samples,
                              seed=args.seed, mode=mode, max_power=args.max_power,
                              keep_samples=bool(args.export))
        if mode == "moments":
            records.append({"n": stats.n, "moments": {str(k): v for k, v in stats.moments.items()}})
        else:
            records.append({"n": stats.n, "log_mean": stats.log_mean, "log_sd": stats.log_sd})
        if args.export:
            rows = [(i, args.x, args.y, args.r, float(v)) for i, v in enumerate(stats.samples)]
            _emit(rows, args.export, header=("replica", "x", "y", "r",
                                             "log_value" if args.log else "value"))
    else:
        raise ValidationFailure(f"unknown polymer action {args.action!r}")
    records.append(_manifest(args))
    _emit(records, args.output)


def _cmd_fredholm(args):
    records = []
    if args.action == "tw-cdf":
        from .fredholm import tracy_widom_F2

        val = tracy_widom_F2(args.r)
        records.append({"r": args.r, "F2": val})
    else:
        pmodel = _polymer_from_args(args)
        x, y = args.x, args.y
        if args.action == "laplace":
            from .fredholm import mb_determinant

            det_mb, info = mb_determinant(pmodel, x, y, args.u, with_info=True)
            records.append({
                "u_re": args.u, "u_im": 0.0,
                "det_re": det_mb.real, "det_im": det_mb.imag,
                "nodes_C": info["nodes"], "nodes_L": info["nodes_L"], "T": info["T"],
            })
        elif args.action == "mb-check":
            from .fredholm import laplace_series_det, mb_determinant

            d1 = laplace_series_det(pmodel, x, y, args.u)
            d2 = mb_determinant(pmodel, x, y, args.u)
            records.append({
                "u_re": args.u, "series_re": d1.real, "mb_re": d2.real,
                "abs_diff": abs(d1 - d2),
            })
        else:
            raise ValidationFailure(f"unknown fredholm action {args.action!r}")
    records.append(_manifest(args))
    _emit(records, args.output)


def _cmd_tw(args):
    from .asymptotics import FreqModel, tw_experiment

    cfg = _load_config(args.config) if args.config else {}
    block = cfg.get("model", {})
    fm = FreqModel(
        tuple(block.get("sigma", (0.0,))), tuple(block.get("alpha", (1.0,))),
        tuple(block.get("rho", (-1.0,))), tuple(block.get("beta", (1.0,))),
        tuple(block.get("omega", (-2.0,))), tuple(block.get("gamma", (1.0,))),
    )
    batches = tw_experiment(fm, args.theta, args.t, args.samples, seed=args.seed,
                            workers=args.workers)
    rows = []
    for b in batches:
        for i, v in enumerate(b.samples):
            rows.append((b.t, i, float(v)))
    if args.export:
        _emit(rows, args.export, header=("t", "replica", "rescaled_value"))
    records = [{"t": b.t, "ks": b.ks, "mean": b.mean, "sd": b.sd, "regime": b.regime}
               for b in batches]
    records.append(_manifest(args))
    _emit(records, args.output)


def _cmd_descent(args):
    from .asymptotics import FreqModel, HFunction, check_steep_descent, h_checks, theta_constants

    cfg = _load_config(args.config) if args.config else {}
    block = cfg.get("model", {})
    fm = FreqModel(
        tuple(block.get("sigma", (0.0,))), tuple(block.get("alpha", (1.0,))),
        tuple(block.get("rho", (-1.0,))), tuple(block.get("beta", (1.0,))),
        tuple(block.get("omega", (-2.0,))), tuple(block.get("gamma", (1.0,))),
    )
    hf = HFunction(fm, theta_constants(fm, args.theta))
    records = [{"h_checks": {k: (v if not isinstance(v, dict) else {str(kk): vv for kk, vv in v.items()})
                             for k, v in h_checks(hf).items()}}]
    for which in args.which:
        ok, (grid, prof) = check_steep_descent(hf, which, grid=args.grid)
        records.append({"contour": which, "monotone_or_positive": bool(ok),
                        "profile_head": list(map(float, prof[:5]))})
        if not ok:
            raise ValidationFailure(f"descent profile check failed for {which}")
    records.append(_manifest(args))
    _emit(records, args.output)


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int,
                        default=int(os.environ.get("QHAHN_POLYMER_WORKERS", os.cpu_count() or 1)))
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--output", "-o", default="-",
                        help="output path (JSON lines); '-' = stdout")

    p = argparse.ArgumentParser(prog="qhahn-polymer", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="exact and numeric identity verification")
    v.add_argument("what", choices=["ybe", "stochastic", "local-alg", "local-rat", "hecke"])
    v.add_argument("--kind", default="qhahn",
                   help="Yang-Baxter kind: qhahn|sixvertex|qhahn-deformed|sixvertex-deformed "
                        "(aliases WYB|hsYB|defWYB|defhsYB)")
    v.add_argument("--colors", type=int, default=2)
    v.add_argument("--max-entry", type=int, default=2)
    v.add_argument("--trials", type=int, default=100)
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("sample", parents=[common], help="sample q-Hahn configurations; emit height CSV")
    s.add_argument("target", choices=["qhahn"])
    s.add_argument("--q", type=float)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--manifest", default="-")
    s.set_defaults(func=_cmd_sample)

    m = sub.add_parser("moments", parents=[common], help="contour-integral moments")
    m.add_argument("target", choices=["qhahn", "polymer", "single-contour"])
    m.add_argument("--q", type=float)
    m.add_argument("--x", type=float, nargs="+", default=[])
    m.add_argument("--y", type=float, nargs="+", default=[])
    m.add_argument("--r", type=int, nargs="+", default=[])
    m.add_argument("--colors-list", type=int, nargs="+", default=[])
    m.add_argument("--tau", type=int, nargs="+", default=None)
    m.add_argument("--k", type=int, default=1)
    m.set_defaults(func=_cmd_moments)

    po = sub.add_parser("polymer", parents=[common], help="polymer DP, brute-force cross-check, Monte Carlo")
    po.add_argument("action", choices=["dp", "brute", "mc"])
    po.add_argument("--x", type=int, required=True)
    po.add_argument("--y", type=int, required=True)
    po.add_argument("--r", type=int, default=0)
    po.add_argument("--samples", type=int, default=10000)
    po.add_argument("--max-power", type=int, default=3)
    po.add_argument("--log", action="store_true")
    po.add_argument("--export", help="CSV path for raw samples")
    po.add_argument("--manifest", default="-")
    po.set_defaults(func=_cmd_polymer)

    f = sub.add_parser("fredholm", parents=[common], help="Laplace-transform determinants and F2")
    f.add_argument("action", choices=["laplace", "mb-check", "tw-cdf"])
    f.add_argument("--u", type=float, default=-2.0)
    f.add_argument("--x", type=int, default=2)
    f.add_argument("--y", type=int, default=5)
    f.add_argument("--r", type=float, default=0.0)
    f.set_defaults(func=_cmd_fredholm)

    t = sub.add_parser("tw", parents=[common], help="Tracy-Widom rescaling experiment")
    t.add_argument("--theta", type=float, default=0.3)
    t.add_argument("--t", type=int, nargs="+", default=[64, 256])
    t.add_argument("--samples", type=int, default=2000)
    t.add_argument("--export", help="CSV path for rescaled samples")
    t.set_defaults(func=_cmd_tw)

    d = sub.add_parser("descent", parents=[common], help="steep-descent profile checks")
    d.add_argument("--theta", type=float, default=0.3)
    d.add_argument("--which", nargs="+", default=["line"],
                   choices=["line", "circle", "arcs"])
    d.add_argument("--grid", type=int, default=200)
    d.set_defaults(func=_cmd_descent)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationFailure as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError, IndexError, OSError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # numerical failures
        from .moments import ConvergenceError

        if isinstance(exc, ConvergenceError):
            print(f"non-convergence: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
