"""
Command-line entry point.

Each subcommand writes its outputs plus ``<command>_manifest.json`` into the
output directory (``--out``, default ``$EXCISED_OUT`` or ``.``).  Numbers
are written with 12 significant digits.  Exit status is 0 on success, 2 on
invalid input and 1 on any other failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from . import __version__
from . import arithmetic as ar
from . import calibration as cal
from . import compare as cmp
from .ensembles import BudgetExceededError, EnsembleId, GroupKind, sample_eigenangles
from .kernels import KernelMode, one_level_density
from .spectral import charpoly_at_one, first_scaled_eigenangle, format_number

OUT_ENV = "EXCISED_OUT"

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


class _Invalid(Exception):
    """Bad user input detected after argument parsing."""


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _group(value: str) -> GroupKind:
    try:
        return GroupKind.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _case(value: str) -> ar.CaseSelector:
    try:
        return ar.CaseSelector(value.replace("-", "_"))
    except ValueError:
        names = ", ".join(c.value for c in ar.CaseSelector)
        raise argparse.ArgumentTypeError(f"case must be one of {names}") from None


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _load_newform(spec: str) -> ar.NewformData:
    path = Path(spec)
    if path.is_file():
        return ar.load_newform(path)
    label = path.name[:-5] if path.name.endswith(".json") else spec
    try:
        return ar.bundled_newform(label)
    except KeyError:
        raise _Invalid(f"newform {spec!r} is neither a file nor a bundled label") from None


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _fmt(x) -> str:
    return format_number(x)


def _num(x):
    """JSON-ready number at 12 significant digits (complex as [re, im])."""
    if x is None:
        return None
    if isinstance(x, complex):
        if abs(x.imag) > 1e-12 * max(1.0, abs(x)):
            return [float(_fmt(x.real)), float(_fmt(x.imag))]
        x = x.real
    return float(_fmt(x))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class _Run:
    """Collects outputs and writes the manifest."""

    def __init__(self, args, out: Path):
        self.args = args
        self.out = out
        self.outputs: list[str] = []
        self.inputs: dict[str, str] = {}

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def record_input(self, label: str, path) -> None:
        if path is not None and Path(path).is_file():
            self.inputs[label] = _sha256(path)

    def manifest(self, results: dict | None = None) -> None:
        params = {k: v for k, v in vars(self.args).items()
                  if k not in ("func", "workers", "out")}
        params = json.loads(json.dumps(params, default=str))
        body = {
            "command": self.args.command,
            "version": __version__,
            "parameters": params,
            "inputs_sha256": self.inputs,
            "outputs": self.outputs,
        }
        if results:
            body["results"] = results
        _write_json(self.out / f"{self.args.command}_manifest.json", body)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sample(args, run: _Run) -> dict:
    ens = EnsembleId(args.group, args.n)
    batch = sample_eigenangles(ens, args.count, args.seed, workers=args.workers,
                               budget=args.budget)
    first = first_scaled_eigenangle(batch)
    lam = charpoly_at_one(batch)
    header = ["index", "first_scaled", "charpoly_at_one"]
    if args.angles:
        header += [f"theta{j + 1}" for j in range(ens.half_size)]

    def rows():
        for i in range(len(batch)):
            row = [str(i), _fmt(first[i]), _fmt(lam[i])]
            if args.angles:
                row += [_fmt(t) for t in batch.angles[i]]
            yield row

    _write_csv(run.path("sample.csv"), header, rows())
    return {"ensemble": str(ens), "count": len(batch)}


def cmd_kernel(args, run: _Run) -> dict:
    ens = EnsembleId(args.group, args.n)
    results = {"ensemble": str(ens), "mode": args.mode}
    if args.phi:
        run.record_input("phi", args.phi)
        grid = np.loadtxt(args.phi, delimiter=",", skiprows=1, ndmin=2)
        if grid.shape[1] != 2:
            raise _Invalid("the phi file needs two columns: theta,phi")
        theta, phi = grid[:, 0], grid[:, 1]
        if np.any(np.diff(theta) <= 0):
            raise _Invalid("phi grid must be strictly increasing")
        dens = one_level_density(ens, theta, args.mode)
        results["integral"] = _num(float(trapezoid(phi * dens, theta)))
    else:
        if args.points < 2:
            raise _Invalid("--points must be at least 2")
        theta = np.linspace(0.0, 1.0, args.points)
        dens = one_level_density(ens, theta, args.mode)
    _write_csv(run.path("kernel.csv"), ["theta", "density"],
               ([_fmt(t), _fmt(v)] for t, v in zip(theta, dens)))
    if "integral" in results:
        print(_fmt(results["integral"]))
    return results


def cmd_discriminants(args, run: _Run) -> dict:
    nf = _load_newform(args.newform)
    run.record_input("newform", args.newform)
    spec = ar.FamilySpec(nf, args.case, args.X, args.delta)
    ds = ar.family_discriminants(spec)
    M = nf.level
    _write_csv(run.path("discriminants.csv"), ["d", "psi_d_minus_level"],
               ([str(d), str(ar.kronecker_symbol(int(d), -M))] for d in ds))
    est = ar.family_cardinality_estimate(nf, args.X)
    results = {
        "newform": nf.label, "case": spec.case_selector.value, "X": args.X,
        "count": int(ds.size), "estimate": _num(est),
        "deviation_over_sqrt_X": _num((ds.size - est) / math.sqrt(args.X)),
    }
    print(f"{ds.size} discriminants (estimate {_fmt(est)})")
    return results


def _ingredients(args) -> cal.CoefficientIngredients:
    if args.newform:
        ing = cal.CoefficientIngredients.for_newform(_load_newform(args.newform), args.case,
                                                     P=args.euler_cutoff)
    else:
        ing = cal.CoefficientIngredients()
        for name in ("euler_gamma", "stieltjes_1"):
            ing.set(name, ar.special_constant(name), "constant")
    if args.ingredients:
        with open(args.ingredients, encoding="utf-8") as fh:
            cfg = json.load(fh)
        section = cfg.get("ingredients", cfg)
        extra = cal.CoefficientIngredients.from_mapping(section)
        for name, v in extra.values.items():
            ing.set(name, v, extra.provenance[name])
    return ing


def cmd_neff(args, run: _Run) -> dict:
    if args.route == "pair":
        if args.R is not None:
            R = args.R
        elif args.case is not None and args.M is not None and args.X is not None:
            R = cal.zero_density_R(args.case, args.M, args.X)
        else:
            raise _Invalid("the pair route needs --R or --case/--M/--X")
        if args.e1 is None or args.e2 is None:
            ing = _ingredients(args)
            run.record_input("ingredients", args.ingredients)
            e1 = args.e1 if args.e1 is not None else cal.coefficient("e1", ing)
            e2 = args.e2 if args.e2 is not None else cal.coefficient("e2", ing)
        else:
            e1, e2 = args.e1, args.e2
        size = cal.n_eff_pair(R, e1, e2)
        results = {"route": "pair", "R": _num(R), "e1": _num(e1), "e2": _num(e2)}
    else:
        if args.case is None or args.M is None or args.X is None:
            raise _Invalid("the one-level route needs --case, --M and --X")
        if args.coefficient is not None:
            size = cal.n_eff_one_level(args.case, args.M, args.X,
                                       coefficient_value=args.coefficient)
        else:
            run.record_input("ingredients", args.ingredients)
            size = cal.n_eff_one_level(args.case, args.M, args.X, _ingredients(args))
        results = {"route": "one-level", "R": _num(cal.zero_density_R(args.case, args.M, args.X))}
    results["n_eff"] = {k: (_num(v) if isinstance(v, float) else v)
                        for k, v in size.to_dict().items()}
    _write_json(run.path("neff.json"), results)
    print(_fmt(size.value))
    return results


def cmd_cutoff(args, run: _Run) -> dict:
    results: dict = {}
    if args.N is not None:
        results["mgf"] = [{"N": args.N, "s": _num(s), "value": _num(cal.mgf_so_even(args.N, s))}
                          for s in args.s]
        results["h"] = _num(cal.h_asym(args.N))
    if args.weight is not None:
        if args.weight % 2:
            raise _Invalid("the vanishing prediction needs an even weight (k is half of it)")
        k = args.weight // 2
        pred = {"k": k, "classification": cal.vanishing_prediction([], k, 0.0, 0.0, 3, "classify")}
        note = cal.vanishing_annotation(k)
        if note:
            pred["annotation"] = note
        if args.delta_kappa is not None and args.a_half is not None and args.X is not None:
            if pred["classification"] == "divergent":
                pred["asymptotic"] = _num(cal.vanishing_prediction(
                    [], k, args.delta_kappa, args.a_half, args.X, "asymptotic"))
            if args.newform:
                nf = _load_newform(args.newform)
                run.record_input("newform", args.newform)
                spec = ar.FamilySpec(nf, args.case or ar.CaseSelector.PRINCIPAL_EVEN, int(args.X))
                ds = ar.family_discriminants(spec)
                pred["family"] = spec.case_selector.value
                pred["sum"] = _num(cal.vanishing_prediction(
                    ds, k, args.delta_kappa, args.a_half, args.X, "sum"))
        results["vanishing"] = pred
    if not results:
        raise _Invalid("give --N for moments and/or --weight for vanishing predictions")
    _write_json(run.path("cutoff.json"), results)
    print(json.dumps(results, sort_keys=True))
    return results


def _excision_arg(value: str):
    if value in ("none", "None"):
        return None
    if value == "calibrate":
        return value
    try:
        t = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("excision is a threshold, 'calibrate' or 'none'") from None
    if not t >= 0:
        raise argparse.ArgumentTypeError("threshold must be nonnegative")
    return t


def _ensemble_override(args):
    if (args.group is None) != (args.n is None):
        raise _Invalid("--group and --n go together")
    return EnsembleId(args.group, args.n) if args.group is not None else None


def cmd_compare(args, run: _Run) -> dict:
    nf = _load_newform(args.newform)
    data = cmp.load_zero_dataset(args.zeros)
    run.record_input("newform", args.newform)
    run.record_input("zeros", args.zeros)
    report = cmp.compare_report(data, nf, _ensemble_override(args), args.mc_count, args.seed,
                                args.excision, case=args.case, X=args.X, bins=args.bins,
                                range=tuple(args.range), workers=args.workers)
    path = report.write(run.out, "compare")
    run.outputs += ["compare_data_hist.csv", "compare_model_hist.csv", path.name]
    body = report.to_dict()
    print(f"KS {_fmt(report.ks)}  L2 {_fmt(report.l2)}  threshold {report.threshold_used}")
    return {"ks": body["ks"], "l2": body["l2"], "threshold_used": body["threshold_used"]}


def cmd_calibrate(args, run: _Run) -> dict:
    nf = _load_newform(args.newform)
    data = cmp.load_zero_dataset(args.zeros)
    run.record_input("newform", args.newform)
    run.record_input("zeros", args.zeros)
    case = args.case or cmp.infer_case(nf, data.discriminants)
    ens = _ensemble_override(args) or cmp.default_ensemble(nf.label, case)
    zeros = data.gamma1[~data.vanishing]
    if zeros.size == 0:
        raise _Invalid("dataset has no non-vanishing zeros")
    batch = sample_eigenangles(ens, args.mc_count, args.seed, workers=args.workers)
    first, lam = first_scaled_eigenangle(batch), charpoly_at_one(batch)
    grid, ks = cal.excision_profile(first, lam, zeros, args.grid)
    best = int(np.argmin(ks))
    _write_csv(run.path("calibrate_profile.csv"), ["threshold", "ks"],
               ([_fmt(t), _fmt(k)] for t, k in zip(grid, ks)))
    results = {"case": ar.CaseSelector(case).value, "ensemble": str(ens),
               "threshold": _num(grid[best]), "ks": _num(ks[best]),
               "ks_unexcised": _num(ks[0])}
    _write_json(run.path("calibrate.json"), results)
    print(_fmt(grid[best]))
    return results


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    common.add_argument("--out", default=None,
                        help=f"output directory (default ${OUT_ENV} or the current directory)")
    common.add_argument("--workers", type=_positive_int, default=1,
                        help="threads for Monte Carlo; never changes results")

    parser = argparse.ArgumentParser(prog="excised", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="first eigenangles and |Lambda_A(1)|")
    p.add_argument("--group", type=_group, required=True)
    p.add_argument("--n", type=_positive_int, required=True, help="half-size N")
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--angles", action="store_true", help="also write every eigenangle")
    p.add_argument("--budget", type=float, default=None, help="cap on count * N^2")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("kernel", parents=[common], help="scaled one-level density on [0, 1]")
    p.add_argument("--group", type=_group, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--mode", choices=[m.value for m in KernelMode], default="exact")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--phi", default=None,
                   help="CSV theta,phi; integrates phi against the density by trapezoid rule")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("discriminants", parents=[common], help="family of twists up to X")
    p.add_argument("--newform", required=True, help="newform JSON file or bundled label")
    p.add_argument("--case", type=_case, required=True)
    p.add_argument("--X", type=_positive_int, required=True)
    p.add_argument("--delta", type=int, choices=[1, -1], default=None, help="self-CM sign class")
    p.set_defaults(func=cmd_discriminants)

    p = sub.add_parser("neff", parents=[common], help="effective matrix size")
    p.add_argument("--route", choices=["one-level", "pair"], required=True)
    p.add_argument("--case", type=_case, default=None)
    p.add_argument("--M", type=float, default=None, help="level")
    p.add_argument("--X", type=float, default=None)
    p.add_argument("--coefficient", type=float, default=None,
                   help="value of a1, a3 or b1 instead of evaluating it")
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--e1", type=float, default=None)
    p.add_argument("--e2", type=float, default=None)
    p.add_argument("--newform", default=None)
    p.add_argument("--ingredients", default=None, help="JSON with an 'ingredients' section")
    p.add_argument("--euler-cutoff", type=int, default=None,
                   help="extrapolate L'/L(1, sym^2 f) from primes up to this bound")
    p.set_defaults(func=cmd_neff)

    p = sub.add_parser("cutoff", parents=[common], help="moments and vanishing predictions")
    p.add_argument("--N", type=_positive_int, default=None, help="SO(2N) for moments")
    p.add_argument("--s", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.add_argument("--weight", type=_positive_int, default=None, help="weight of the form (2k)")
    p.add_argument("--delta-kappa", type=float, default=None)
    p.add_argument("--a-half", type=float, default=None)
    p.add_argument("--X", type=float, default=None)
    p.add_argument("--newform", default=None)
    p.add_argument("--case", type=_case, default=None)
    p.set_defaults(func=cmd_cutoff)

    for name, func, helptext in (("compare", cmd_compare, "model versus lowest zeros"),
                                 ("calibrate", cmd_calibrate, "fit the excision threshold")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--newform", required=True)
        p.add_argument("--zeros", required=True, help="CSV d,gamma1[,...][,vanishing]")
        p.add_argument("--case", type=_case, default=None)
        p.add_argument("--group", type=_group, default=None)
        p.add_argument("--n", type=_positive_int, default=None)
        p.add_argument("--mc-count", type=_positive_int, default=100_000)
        if name == "compare":
            p.add_argument("--X", type=float, default=None)
            p.add_argument("--excision", type=_excision_arg, default=None)
            p.add_argument("--bins", type=_positive_int, default=cmp.DEFAULT_BINS)
            p.add_argument("--range", type=float, nargs=2, default=list(cmp.DEFAULT_RANGE))
        else:
            p.add_argument("--grid", type=int, default=64)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        run = _Run(args, out)
        results = args.func(args, run)
        run.manifest(results)
    except (_Invalid, ValueError, KeyError, BudgetExceededError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"excised {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"excised {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
