"""`mtlab` command line. Reports go to stdout as JSON lines or versioned CSV."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import MtlabError

CSV_SCHEMA = "mtlab-csv/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

ALL_CLAIMS = ("Claim", "Hormander", "Inclusions", "Kershaw", "Lemma16-psi", "Lemma17", "Lemma20",
              "Lemma20-J", "Lemma20-lambda", "Prop10")


# ---------------------------------------------------------------- argument types

def _real(token: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number {token!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"non-finite number {token!r}")
    return v


def _int(token: str) -> int:
    try:
        return int(token)
    except ValueError:
        try:
            v = float(token)
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed integer {token!r}") from None
        if v != int(v):
            raise argparse.ArgumentTypeError(f"malformed integer {token!r}") from None
        return int(v)


def _seed(token: str) -> int:
    v = _int(token)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {token!r}")
    return v


def _reals(token: str) -> List[float]:
    parts = [p for p in token.split(",") if p.strip() != ""]
    if not parts:
        raise argparse.ArgumentTypeError(f"empty list {token!r}")
    out = []
    for p in parts:
        try:
            out.append(_real(p.strip()))
        except argparse.ArgumentTypeError:
            raise argparse.ArgumentTypeError(f"malformed number {p.strip()!r} in {token!r}") from None
    return out


class UsageError(Exception):
    pass


def _point(values: Optional[List[float]], n: int, name: str) -> np.ndarray:
    if values is None:
        raise UsageError(f"--{name} is required")
    if len(values) != n:
        raise UsageError(f"--{name} has {len(values)} coordinates but --n is {n}")
    return np.asarray(values, dtype=float)


# ---------------------------------------------------------------- output

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


class Emitter:
    def __init__(self, fmt: str, command: str, config: dict, stream=None, columns: Optional[Sequence[str]] = None):
        self.fmt = fmt
        self.command = command
        self.config = _plain(config)
        self.stream = stream or sys.stdout
        self.columns = list(columns) if columns else None
        self.rows: List[dict] = []

    def emit(self, record: dict):
        record = _plain(record)
        if self.fmt == "json":
            out = {"command": self.command, "config": self.config, "record": record}
            self.stream.write(json.dumps(out, sort_keys=True) + "\n")
        else:
            self.rows.append(record if self.columns else _flatten(record))

    def close(self):
        if self.fmt != "csv":
            return
        cols = self.columns or sorted({k for r in self.rows for k in r})
        self.stream.write(f"# {CSV_SCHEMA} command={self.command} "
                          f"config={json.dumps(self.config, sort_keys=True)}\n")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({c: (json.dumps(r[c]) if isinstance(r.get(c), list) else r.get(c, "")) for c in cols})
        self.stream.write(buf.getvalue())


# ---------------------------------------------------------------- subcommands

def cmd_constants(args, out: Emitter) -> int:
    from .geometry import constants, vol_G_spherical
    c = constants(args.n)
    rec = c.to_dict()
    rec["vol_G_quadrature"] = vol_G_spherical(args.n)
    out.emit(rec)
    return EXIT_OK


def cmd_kernel(args, out: Emitter) -> int:
    from .kernels import all_kernels
    x = _point(args.x, args.n, "x")
    z = _point(args.z, args.n, "z")
    out.emit({"x": x, "z": z, "kernels": all_kernels(x, z, args.n)})
    return EXIT_OK


def _field(name: str, n: int):
    if name == "one":
        return (lambda z: np.ones(len(np.atleast_2d(z)))), lambda r: np.ones_like(r)
    if name == "r2":
        return (lambda z: np.sum(np.atleast_2d(z) ** 2, axis=1)), lambda r: r * r
    raise UsageError(f"unknown field {name!r}; choose one or r2")


def cmd_solve(args, out: Emitter) -> int:
    from .numerics import ball_product_rule
    from .operators import default_rule, interior_points, radial_solution, verify_canonical_solution
    n = args.n
    f, prof = _field(args.f, n)
    pts = interior_points(n, args.points, args.radius, args.seed)
    oracle = lambda z: radial_solution(n, prof, np.linalg.norm(np.atleast_2d(z), axis=1))
    rep = verify_canonical_solution(f, default_rule(n), args.fd_step, pts, exclusion_radius=args.exclusion,
                                    basis_degree=3, ortho_rule=ball_product_rule(n, 6, 50), oracle=oracle)
    rec = rep.to_dict()
    ok = rep.max_poisson_residual <= args.tol_residual and rep.max_orthogonality_defect <= args.tol_defect
    rec["passed"] = ok
    out.emit(rec)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_levelset(args, out: Emitter) -> int:
    from .levelsets import lambda1, theorem_bound
    n = args.n
    if args.x is not None:
        x = _point(args.x, n, "x")
    elif args.x_mode == "boundary":
        x = np.eye(n)[0]
    else:
        x = np.zeros(n)
    est = lambda1(args.s, x, n, args.samples, args.seed)
    rec = est.to_dict(n)
    rec["theorem_bound"] = theorem_bound(n)
    out.emit(rec)
    return EXIT_OK


def cmd_regions(args, out: Emitter) -> int:
    from .geometry import RegionSpec, constants
    from .levelsets import region_volume, theorem_bound, union_volume_ED
    n, th = args.n, args.theta
    if not 0.0 <= th <= 1.0:
        raise UsageError("--theta must lie in [0, 1]")
    rec = {"n": n, "theta": th, "bound": theorem_bound(n), "vol_G_n": constants(n).vol_G}
    for i, tag in enumerate(("E", "D", "G", "B")):
        rec[f"vol_{tag}"] = region_volume(RegionSpec(tag, n, th), args.samples, args.seed, stream=i).to_dict()
    u = union_volume_ED(th, n, args.samples, args.seed, stream=9)
    rec["vol_E_cup_D"] = u.to_dict()
    ok = u.value <= rec["bound"] + 3 * u.std_error
    rec["within_bound"] = ok
    out.emit(rec)
    return EXIT_OK if ok else EXIT_FAIL


def _claims(token: str) -> List[str]:
    if token == "all":
        return list(ALL_CLAIMS)
    names = [t.strip() for t in token.split(",") if t.strip()]
    bad = [t for t in names if t not in ALL_CLAIMS]
    if bad:
        raise UsageError(f"unknown claim(s) {', '.join(bad)}; known: {', '.join(ALL_CLAIMS)}")
    return sorted(set(names))


def _run_claim(name: str, n_max: int, samples: int, seed: int):
    from . import certify as C
    if name == "Prop10":
        yield C.certify_prop10(n_max)
    elif name == "Kershaw":
        yield C.check_kershaw(C.kershaw_default_grid(n_max))
    elif name == "Lemma16-psi":
        yield C.certify_psi(range(4, n_max + 1))
    elif name == "Lemma17":
        for n in range(4, n_max + 1):
            yield C.certify_lemma17(n)
    elif name == "Lemma20":
        for n in range(6, n_max + 1):
            yield C.certify_lemma20(n)
    elif name == "Lemma20-J":
        if n_max >= 13:
            yield C.certify_J(range(13, n_max + 1))
    elif name == "Lemma20-lambda":
        if n_max >= 13:
            yield C.certify_lambda_table(range(13, n_max + 1))
    elif name == "Claim":
        if n_max >= 6:
            yield C.certify_claim(range(6, n_max + 1))
    elif name == "Inclusions":
        for n in sorted({3, 4, 5, 15} & set(range(3, n_max + 1))):
            yield C.certify_inclusions(n, samples=samples, seed=seed)
    elif name == "Hormander":
        if n_max >= 4:
            yield C.check_hormander(np.eye(4)[0], [1e2, 1e3, 1e4], 4, samples, seed)


def cmd_certify(args, out: Emitter) -> int:
    if args.n_max < 5:
        raise UsageError("--n-max must be at least 5")
    names = _claims(args.claims)
    failed = False
    for name in names:
        for cert in _run_claim(name, args.n_max, args.samples, args.seed):
            out.emit(cert.to_dict())
            failed |= not cert.passed
    return EXIT_FAIL if failed else EXIT_OK


def cmd_sharpness(args, out: Emitter) -> int:
    from .levelsets import MeasureSpec
    from .sharpness import sharpness_experiment
    n = args.n
    x0 = _point(args.x0, n, "x0") if args.x0 is not None else np.zeros(n)
    measure = MeasureSpec.surface(n) if args.measure == "surface" else MeasureSpec.lebesgue(n)
    table = sharpness_experiment(n, x0, args.factors, args.m_grid, measure, args.seed, args.samples)
    for row in table.rows:
        out.emit(dict(row, x0=json.dumps(row["x0"])) if out.fmt == "csv" else row)
    ok = True
    if out.fmt == "json":
        out.emit({"slopes": table.to_dict()["slopes"], "caveat": table.caveat})
    else:
        for fac, s in table.slopes.items():
            print(f"# slope factor={fac:g} slope={s['slope']:.6g} stderr={s['stderr']:.3g}", file=sys.stderr)
    for fac, s in table.slopes.items():
        if fac > 1 and not s["slope"] > 3 * s["stderr"]:
            ok = False
    return EXIT_OK if ok else EXIT_FAIL


def cmd_report_all(args, out: Emitter) -> int:
    from .acceptance import CRITERIA
    ids = sorted(CRITERIA) if args.criteria is None else [int(v) for v in args.criteria]
    bad = [i for i in ids if i not in CRITERIA]
    if bad:
        raise UsageError(f"unknown criteria {bad}")
    all_ok = True
    for i in ids:
        res = CRITERIA[i]()
        print(res.line(), file=sys.stderr)
        out.emit(res.to_dict())
        all_ok &= res.passed
    return EXIT_OK if all_ok else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--output", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="mtlab", description="Sharp Moser-Trudinger numerics on the unit ball.")
    p.add_argument("--version", action="version", version=f"mtlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", parents=[common], help="constants bundle for dimension n")
    s.add_argument("--n", type=_int, required=True)

    s = sub.add_parser("kernel", parents=[common], help="all kernels at a pair of points")
    s.add_argument("--n", type=_int, required=True)
    s.add_argument("--x", type=_reals)
    s.add_argument("--z", type=_reals)

    s = sub.add_parser("solve", parents=[common], help="verify the canonical solution of Delta u = f")
    s.add_argument("--n", type=_int, required=True)
    s.add_argument("--f", default="one", help="one | r2")
    s.add_argument("--points", type=_int, default=10)
    s.add_argument("--radius", type=_real, default=0.8)
    s.add_argument("--fd-step", type=_real, default=1e-2)
    s.add_argument("--exclusion", type=_real, default=1e-2)
    s.add_argument("--tol-residual", type=_real, default=1e-2)
    s.add_argument("--tol-defect", type=_real, default=1e-3)

    s = sub.add_parser("levelset", parents=[common], help="lambda1(s, x) with its asymptotic prefactor")
    s.add_argument("--n", type=_int, required=True)
    s.add_argument("--s", type=_real, required=True)
    s.add_argument("--x-mode", choices=("interior", "boundary"), default="interior")
    s.add_argument("--x", type=_reals)
    s.add_argument("--samples", type=_int, default=1_000_000)

    s = sub.add_parser("regions", parents=[common], help="volumes of E, D, G, B and E cup D at theta")
    s.add_argument("--n", type=_int, required=True)
    s.add_argument("--theta", type=_real, required=True)
    s.add_argument("--samples", type=_int, default=200_000)

    s = sub.add_parser("certify", parents=[common], help="run claim certificates")
    s.add_argument("--claims", default="all", help="all or a comma list of " + ", ".join(ALL_CLAIMS))
    s.add_argument("--n-max", type=_int, default=60)
    s.add_argument("--samples", type=_int, default=200_000)

    s = sub.add_parser("sharpness", parents=[common], help="extremal-family growth table")
    s.add_argument("--n", type=_int, required=True)
    s.add_argument("--factors", type=_reals, default=[0.8, 1.0, 1.2])
    s.add_argument("--m-grid", type=_reals, default=[10.0, 100.0, 1000.0])
    s.add_argument("--x0", type=_reals)
    s.add_argument("--measure", choices=("lebesgue", "surface"), default="lebesgue")
    s.add_argument("--samples", type=_int, default=1_000_000)

    s = sub.add_parser("report-all", parents=[common], help="run the acceptance criteria")
    s.add_argument("--criteria", type=_reals, help="subset, e.g. 1,2,3")
    return p


COMMANDS = {"constants": cmd_constants, "kernel": cmd_kernel, "solve": cmd_solve, "levelset": cmd_levelset,
            "regions": cmd_regions, "certify": cmd_certify, "sharpness": cmd_sharpness,
            "report-all": cmd_report_all}

SHARPNESS_COLUMNS = ("n", "x0", "factor", "m", "value", "stderr")


def _threads() -> int:
    raw = os.environ.get("MTLAB_THREADS", "1")
    try:
        v = int(raw)
    except ValueError:
        raise UsageError(f"MTLAB_THREADS must be an integer, got {raw!r}") from None
    if v < 1:
        raise UsageError("MTLAB_THREADS must be >= 1")
    return v


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    config = {k: v for k, v in vars(args).items()}
    try:
        config["threads"] = _threads()
        n = getattr(args, "n", None)
        if n is not None and n < 3:
            raise UsageError("--n must be at least 3")
        if getattr(args, "samples", None) is not None and args.samples < 2:
            raise UsageError("--samples must be at least 2")
        cols = SHARPNESS_COLUMNS if args.command == "sharpness" else None
        out = Emitter(args.output, args.command, config, columns=cols)
        code = COMMANDS[args.command](args, out)
        out.close()
        return code
    except UsageError as exc:
        print(f"mtlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MtlabError as exc:
        print(f"mtlab: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
