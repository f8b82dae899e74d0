"""``fpsolve`` command line.

Exit codes: 0 success / all checks pass, 1 a verification check failed,
2 invalid usage or problem specification.

Precedence for every spec field: command-line flag over ``--config`` file
over built-in default; the ``FPSOLVE_SEED`` environment variable overrides
the seed from any source.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .catalog import FAMILY_NAMES, eigenpair, family_ranges, is_extended, make_family
from .errors import FPSolveError, SpecError
from .langevin import histogram_tv, simulate
from .oracle import evolve_fp
from .problem import SCHEMA_VERSION, ProblemSpec
from .solutions import mode, nodal_domains, steady_state
from .suite import (DEFAULT_TOLERANCES, domain_problem, mode_indices, perturbed_start,
                    run_checks, sampler_config)
from .susy import drift_from_state, quantum_potential

SEED_ENV = "FPSOLVE_SEED"
FMT = "%.17g"


# ---------------------------------------------------------------------------
# spec assembly


def _key_value(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"value of {k!r} is not a number: {v!r}") from None


def _add_spec_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("problem specification")
    g.add_argument("--config", type=Path, help="JSON problem spec; flags override its fields")
    g.add_argument("--family", choices=FAMILY_NAMES)
    g.add_argument("--param", type=_key_value, action="append", default=[], metavar="NAME=VALUE",
                   help="family parameter (repeatable)")
    g.add_argument("--level", type=int, help="generating eigenstate n")
    g.add_argument("--offset", type=float, help="additive constant U_0 of the drift")
    g.add_argument("--N", type=int, help="grid intervals per nodal domain")
    g.add_argument("--eps", type=float, help="density threshold for truncating infinite ends")
    g.add_argument("--bounds", type=float, nargs=2, metavar=("LO", "HI"),
                   help="explicit replacements for infinite domain ends")
    g.add_argument("--dt", type=float, help="Crank-Nicolson time step")
    g.add_argument("--T", type=float, help="evolution horizon")
    g.add_argument("--seed", type=int)
    g.add_argument("--chains", type=int)
    g.add_argument("--steps", type=int, help="Langevin steps per chain, burn-in included")
    g.add_argument("--burn-in", type=int, dest="burn_in")
    g.add_argument("--langevin-dt", type=float, dest="langevin_dt")
    g.add_argument("--n-modes", type=int, dest="n_modes")
    g.add_argument("--bins", type=int)
    g.add_argument("--save-every", type=int, dest="save_every", help="steps between snapshots")
    g.add_argument("--tol", type=_key_value, action="append", default=[], metavar="NAME=VALUE",
                   help=f"tolerance override, names: {', '.join(DEFAULT_TOLERANCES)}")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")


def build_spec(args, environ=None) -> ProblemSpec:
    environ = os.environ if environ is None else environ
    obj: dict = {}
    if args.config is not None:
        try:
            obj = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise SpecError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SpecError(f"{args.config} is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise SpecError("config must be a JSON object")
    obj = copy.deepcopy(obj)
    fam = obj.setdefault("family", {})
    if not isinstance(fam, dict):
        raise SpecError("family must be an object")
    if args.family is not None:
        if fam.get("name") not in (None, args.family):
            fam["params"] = {}  # parameters of another family do not carry over
        fam["name"] = args.family
    if args.param:
        fam.setdefault("params", {}).update(dict(args.param))
    for key in ("level", "offset"):
        if getattr(args, key) is not None:
            obj[key] = getattr(args, key)
    grid = obj.setdefault("grid", {})
    for key in ("N", "eps"):
        if getattr(args, key) is not None:
            grid[key] = getattr(args, key)
    if args.bounds is not None:
        grid["bounds"] = list(args.bounds)
    run = obj.setdefault("run", {})
    for key in ("dt", "T", "seed", "chains", "steps", "burn_in", "langevin_dt", "n_modes", "bins",
                "save_every"):
        if getattr(args, key) is not None:
            run[key] = getattr(args, key)
    if args.tol:
        run.setdefault("tolerances", {}).update(dict(args.tol))
    if environ.get(SEED_ENV):
        try:
            run["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise SpecError(f"{SEED_ENV} must be an integer, got {environ[SEED_ENV]!r}") from None
    return ProblemSpec.from_json(obj)


# ---------------------------------------------------------------------------
# output helpers


def write_csv(path: Path, header, columns, int_cols=()):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    fmt = [("%d" if name in int_cols else FMT) for name in header]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        np.savetxt(fh, data, fmt=fmt, delimiter=",", header=",".join(header), comments="")


def versions() -> dict:
    return {"fpsolve": __version__, "schema": str(SCHEMA_VERSION), "numpy": np.__version__,
            "scipy": scipy.__version__}


def _setup(spec: ProblemSpec):
    family = spec.make_family()
    U = drift_from_state(eigenpair(family, spec.level), spec.offset)
    return family, U, nodal_domains(U)


def _domain_grid(U, dom, spec):
    return domain_problem(U, dom, spec.grid.N, spec.grid.eps,
                          None if spec.grid.bounds is None else tuple(spec.grid.bounds))


# ---------------------------------------------------------------------------
# subcommands


def _fmt(iv) -> str:
    return f"({iv.lo:g}, {iv.hi:g})"


def cmd_catalog(args) -> int:
    rows = []
    names = FAMILY_NAMES if args.family is None else (args.family,)
    for name in names:
        fam = make_family(name)
        count = fam.bound_state_count
        rows.append({
            "name": name,
            "parameters": [{"name": r.name, "default": r.default, "lower": r.lower,
                            "inclusive": r.inclusive, "doc": r.doc} for r in family_ranges(name)],
            "bound_state_count": "inf" if math.isinf(count) else int(count),
            "domain": fam.domain.to_json(),
            "extended": is_extended(name),
        })
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    if args.family is not None:
        print(f"{args.family}: domain {_fmt(make_family(args.family).domain)}, "
              f"bound states at defaults: {rows[0]['bound_state_count']}")
        for r in family_ranges(args.family):
            print("  " + r.describe())
        return 0
    print(f"{'family':<15}{'parameters':<22}{'bound states*':<15}domain")
    for name, row in zip(names, rows):
        params = ", ".join(f"{p['name']}{'>=' if p['inclusive'] else '>'}{p['lower']:g}" for p in row["parameters"])
        tag = "  (extended)" if row["extended"] else ""
        print(f"{name:<15}{params:<22}{str(row['bound_state_count']):<15}{_fmt(make_family(name).domain)}{tag}")
    print("* at default parameters")
    return 0


def cmd_generate(spec: ProblemSpec, out: Path) -> int:
    family, U, doms = _setup(spec)
    vq = quantum_potential(U)
    pot, st_rows = [], []
    for k, dom in enumerate(doms):
        dp = _domain_grid(U, dom, spec)
        x = dp.x
        with np.errstate(all="ignore"):
            u = U.U(x)
        x = x[np.isfinite(u)]
        st = steady_state(U, dom)
        pot.append((x, U.U(x), U.U.d1(x), vq(x), np.full(x.size, k)))
        st_rows.append((x, st.density(x), np.full(x.size, k)))
    cat = [np.concatenate(c) for c in zip(*pot)]
    write_csv(out / "potential.csv", ["x", "U", "dU", "V_q", "domain"], cat, int_cols=("domain",))
    cat = [np.concatenate(c) for c in zip(*st_rows)]
    write_csv(out / "steady.csv", ["x", "density", "domain"], cat, int_cols=("domain",))
    modes = []
    for i in mode_indices(family, spec.run.n_modes):
        m = mode(family, spec.level, i)
        modes.append({"n": spec.level, "i": i, "lambda": m.rate,
                      "admissible_domains": [d.to_json() for d in m.admissible_domains]})
    doc = {"schema_version": SCHEMA_VERSION, "family": spec.family.name, "params": spec.family.params,
           "level": spec.level, "nodal_domains": [d.to_json() for d in doms], "modes": modes}
    (out / "modes.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    for name in ("potential.csv", "steady.csv", "modes.json"):
        print(out / name)
    return 0


def cmd_verify(spec: ProblemSpec, out: Path, skip=()) -> int:
    family = spec.make_family()
    checks = run_checks(family, spec.level, spec.offset, spec.settings(),
                        langevin="langevin" not in skip, dynamics="dynamics" not in skip)
    ok = all(c.passed for c in checks)
    for c in checks:
        where = "" if c.domain is None else f"[domain {c.domain}]"
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}{where}  measured={c.measured:.3e}  "
              f"tolerance={c.tolerance:g}  {c.detail}")
    path = out / "report.json"
    report = {"schema_version": SCHEMA_VERSION, "spec": spec.to_json(),
              "checks": [c.to_json() for c in checks], "artifacts": [str(path)],
              "versions": versions(), "pass": ok}
    path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"{'all checks passed' if ok else 'some checks FAILED'}; report in {path}")
    return 0 if ok else 1


def cmd_evolve(spec: ProblemSpec, out: Path) -> int:
    family, U, doms = _setup(spec)
    cols = []
    for k, dom in enumerate(doms):
        dp = _domain_grid(U, dom, spec)
        st = steady_state(U, dom)
        decaying = [m for m in (mode(family, spec.level, i) for i in mode_indices(family, spec.run.n_modes))
                    if dom in m.admissible_domains and m.rate > 0]
        f0 = perturbed_start(st, min(decaying, key=lambda m: m.rate), dp) if decaying else st.density(dp.x)
        res = evolve_fp(U, f0, dp, spec.run.dt, spec.run.T, save_every=spec.run.save_every)
        nt, nx = res.snapshots.shape
        cols.append((np.repeat(res.times, nx), np.tile(dp.x, nt), res.snapshots.ravel(), np.full(nt * nx, k)))
    cat = [np.concatenate(c) for c in zip(*cols)]
    write_csv(out / "snapshots.csv", ["t", "x", "f", "domain"], cat, int_cols=("domain",))
    print(out / "snapshots.csv")
    return 0


def cmd_sample(spec: ProblemSpec, out: Path) -> int:
    _, U, doms = _setup(spec)
    s = spec.settings()
    cols = []
    for k, dom in enumerate(doms):
        dp = _domain_grid(U, dom, spec)
        st = steady_state(U, dom)
        cfg = sampler_config(U, st, dp, s, k)
        stats = histogram_tv(simulate(U, cfg), st, spec.run.bins)
        centers = 0.5 * (stats.edges[1:] + stats.edges[:-1])
        cols.append((centers, stats.counts, stats.expected, np.full(centers.size, k)))
        print(f"domain {k}: dt={cfg.dt:g} tv={stats.tv_distance:.4g} n_eff={stats.n_effective:.0f}")
    cat = [np.concatenate(c) for c in zip(*cols)]
    write_csv(out / "histogram.csv", ["bin_center", "count", "expected", "domain"], cat,
              int_cols=("count", "domain"))
    print(out / "histogram.csv")
    return 0


def cmd_export(spec: ProblemSpec, out_file) -> int:
    text = spec.dumps() + "\n"
    if out_file is None:
        sys.stdout.write(text)
    else:
        Path(out_file).write_text(text, encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpsolve", description=(
        "Exactly solvable Fokker-Planck problems generated from solvable quantum potentials, "
        "with numerical cross-checks."))
    ap.add_argument("--version", action="version", version=f"fpsolve {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("catalog", help="list solvable families")
    p.add_argument("--json", action="store_true")
    p.add_argument("--family", choices=FAMILY_NAMES)
    for name, text in (("generate", "write potential.csv, steady.csv and modes.json"),
                       ("verify", "run the check suite and write report.json"),
                       ("evolve", "Crank-Nicolson run, write snapshots.csv"),
                       ("sample", "Langevin run, write histogram.csv"),
                       ("export", "print the resolved problem spec")):
        p = sub.add_parser(name, help=text)
        _add_spec_flags(p)
        if name == "verify":
            p.add_argument("--skip", action="append", default=[], choices=("langevin", "dynamics"),
                           help="leave out a group of checks (repeatable)")
        if name == "export":
            p.add_argument("--out", help="write to this file instead of stdout")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "catalog":
        return cmd_catalog(args)
    try:
        spec = build_spec(args)
        if args.command == "export":
            return cmd_export(spec, args.out)
        args.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "generate":
            return cmd_generate(spec, args.out_dir)
        if args.command == "verify":
            return cmd_verify(spec, args.out_dir, args.skip)
        if args.command == "evolve":
            return cmd_evolve(spec, args.out_dir)
        return cmd_sample(spec, args.out_dir)
    except SpecError as exc:
        print(f"fpsolve: invalid spec: {exc}", file=sys.stderr)
        return 2
    except FPSolveError as exc:
        print(f"fpsolve: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
