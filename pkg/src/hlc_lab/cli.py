"""Command line entry point: ``hlc-lab {nil, torus, sl2}``.

Exit codes: 0 when the computation finished (whatever the mathematical
verdict), 2 for malformed input, 3 for a failed precondition (a witness is
printed), 4 when a numerical kernel dimension could not be certified.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_INDETERMINATE = 0, 2, 3, 4
MAX_SL2_N = 4


class CliError(Exception):
    def __init__(self, code: int, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


@dataclass
class RunConfig:
    """Echo of everything that determines a run's output."""

    subcommand: str
    params: dict = field(default_factory=dict)
    fmt: str = "text"
    output: str | None = None


# ---------------------------------------------------------------- helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float):
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        if np.isnan(x):
            return "nan"
        return float(f"{x:.12g}")
    return x


def _report(cfg: RunConfig, verdicts: dict, witnesses=None, numerics=None, tables=None) -> dict:
    doc = {"tool_version": __version__, "config_echo": {"subcommand": cfg.subcommand, **cfg.params},
           "verdicts": verdicts}
    if witnesses:
        doc["witnesses"] = witnesses
    if numerics:
        doc["numerics"] = numerics
    if tables:
        doc["tables"] = tables
    return _jsonable(doc)


def _text(doc: dict) -> str:
    lines = [f"hlc-lab {doc['tool_version']}  {doc['config_echo'].get('subcommand')}"]

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif isinstance(v, list) and v and all(isinstance(e, dict) for e in v):
            for i, e in enumerate(v):
                walk(f"{prefix}[{i}]", e)
        else:
            lines.append(f"{prefix}: {v}")

    for section in ("config_echo", "verdicts", "witnesses", "numerics"):
        if section in doc:
            lines.append(f"[{section}]")
            walk("", doc[section])
    for line in doc.get("summary", []):
        lines.append(line)
    return "\n".join(lines) + "\n"


def _csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    tables = doc.get("tables") or {}
    if not tables:
        w.writerow(["key", "value"])
        flat = {}

        def walk(prefix, v):
            if isinstance(v, dict):
                for k in sorted(v):
                    walk(f"{prefix}.{k}" if prefix else k, v[k])
            else:
                flat[prefix] = v

        walk("", {"verdicts": doc["verdicts"], "numerics": doc.get("numerics", {})})
        for k, v in flat.items():
            w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
        return buf.getvalue()
    for name in sorted(tables):
        rows = tables[name]
        if not rows:
            continue
        cols = list(rows[0].keys())
        w.writerow([f"# {name}"])
        w.writerow(cols)
        for r in rows:
            w.writerow([json.dumps(r[c]) if isinstance(r[c], (list, dict)) else r[c] for c in cols])
    return buf.getvalue()


def _emit(doc: dict, cfg: RunConfig, summary: list[str] | None = None):
    if cfg.fmt == "json":
        out = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    elif cfg.fmt == "csv":
        out = _csv(doc)
    else:
        out = _text({**doc, "summary": summary or []})
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _power_of_two(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s}")
    if v < 4 or v & (v - 1):
        raise argparse.ArgumentTypeError("grid size must be a power of two >= 4")
    return v


def _unit_interval(s: str) -> float:
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("tol must lie in (0, 1)")
    return v


# -------------------------------------------------------------------- nil


def cmd_nil(args) -> int:
    from . import lefschetz_complex as lc
    from . import nilmanifold_ce as nc

    cfg = RunConfig("nil", {"builtin": args.builtin, "dim": args.dim, "spec": args.spec}, args.format, args.output)
    try:
        if args.spec:
            try:
                with open(args.spec) as fh:
                    text = fh.read()
            except OSError as exc:
                raise CliError(EXIT_INPUT, f"cannot read {args.spec}: {exc}")
            spec, omega = nc.load_spec_json(text)
            if omega is None:
                raise CliError(EXIT_INPUT, "the JSON document needs an 'omega' entry")
        elif args.builtin == "example-3-2":
            spec, omega = nc.builtin_example_nonhlc()
        elif args.builtin == "abelian":
            spec, omega = nc.abelian(args.dim)
        else:
            raise CliError(EXIT_INPUT, "give --builtin or --spec")
        c = nc.build_ce(spec)
    except nc.LieAlgebraError as exc:
        raise CliError(EXIT_INPUT, str(exc), {"jacobi_triple": list(exc.triple) if exc.triple else None})
    except (nc.SpecFormatError, ValueError) as exc:
        if isinstance(exc, CliError):
            raise
        raise CliError(EXIT_INPUT, str(exc))
    report, cw = nc.validate_symplectic(c, omega)
    if not report.ok:
        raise CliError(EXIT_PRECONDITION, "omega is not symplectic on this algebra", report.witnesses)
    try:
        hlc = lc.check_hlc(cw)
        ddl = lc.check_dd_lambda(cw)
        eq = lc.check_equivalences(cw)
        guil = lc.check_guillemin(cw)
    except lc.PreconditionError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc), exc.witness)
    b = lc.betti_vector(cw)
    first = ddl.first_failure()
    verdicts = {
        "betti": list(b),
        "hlc": hlc.holds,
        "hlc_failing_k": hlc.failing,
        "dd_lambda_lemma": ddl.holds,
        "equivalences_consistent": eq.consistent,
        "equivalences": eq.as_dict(),
        "guillemin": {k: v["lefschetz"] for k, v in guil.items() if k != "all"},
        "guillemin_all": guil["all"],
        "betti_constraints": lc.check_betti_constraints(b),
    }
    witnesses = {}
    for e in hlc.entries:
        if e.witness:
            witnesses[f"hlc_k{e.k}"] = e.witness
    if first is not None:
        witnesses["dd_lambda"] = {"degree": first["degree"], **(first["witness"] or {})}
    doc = _report(cfg, verdicts, witnesses, {"per_k": hlc.as_dict()["per_k"]},
                  {"hlc": [{"k": e.k, "source_betti": e.source_betti, "target_betti": e.target_betti,
                            "rank": e.rank, "isomorphism": e.isomorphism} for e in hlc.entries]})
    summary = [f"Betti: {tuple(b)}",
               "HLC: pass" if hlc.holds else "HLC: fail at k=" + ",".join(map(str, hlc.failing))]
    for k, w in witnesses.items():
        if k.startswith("hlc_") and "class" in w:
            summary.append(f"witness [{w['class']}]")
    summary.append(f"ddLambda-lemma: {'pass' if ddl.holds else 'fail'}")
    _emit(doc, cfg, summary)
    return EXIT_OK


# ------------------------------------------------------------------ torus


def _parse_q(text: str, seed: int):
    from .torus_spectral import QSpec

    t = text.strip().lower()
    try:
        if t == "exp-sin":
            return QSpec.exp_sin()
        if t.startswith("exp-sin:"):
            return QSpec.exp_sin(int(t.split(":", 1)[1]))
        if t.startswith("const:"):
            return QSpec.constant(float(t.split(":", 1)[1]))
        if t == "random" or t.startswith("random:"):
            s = int(t.split(":", 1)[1]) if ":" in t else seed
            return QSpec.random_trig(np.random.default_rng(s))
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"bad --q value {text!r}: {exc}")
    raise CliError(EXIT_INPUT, f"unknown --q value {text!r} (use exp-sin, exp-sin:F, const:C, random[:SEED])")


def _dump_matrix(spec: str, model, N: int, path: str):
    from .torus_spectral import SpectralGrid, assemble

    try:
        tag, bideg = spec.split(":")
        p, q = (int(v) for v in bideg.split(","))
    except ValueError:
        raise CliError(EXIT_INPUT, "--dump expects TAG:P,Q, e.g. mubar:1,0")
    grid = SpectralGrid.block(N, (0,) * (model.real_dim - 2))
    try:
        op = assemble(tag, (p, q), model, grid)
    except Exception as exc:  # unknown tag, unsupported bidegree
        raise CliError(EXIT_INPUT, str(exc))
    M = op.matrix.tocoo()
    order = np.lexsort((M.col, M.row))
    with open(path, "w") as fh:
        for i in order:
            v = M.data[i]
            fh.write(f"{M.row[i]} {M.col[i]} {v.real:.17g} {v.imag:.17g}\n")


def cmd_torus(args) -> int:
    from . import torus_spectral as ts
    from .torus_spectral import kernels

    k = args.k if args.k is not None else args.n
    if args.n < 1 or not 0 < k <= args.n:
        raise CliError(EXIT_INPUT, "need n >= 1 and 0 < k <= n")
    qspec = _parse_q(args.q, args.seed)
    model = ts.TorusModel(args.n, k, qspec)
    N = args.grid
    cfg = RunConfig("torus", {"n": args.n, "k": k, "q": qspec.describe(), "grid": N, "radius": args.radius,
                              "tol": args.tol, "seed": args.seed, "blocks": args.blocks,
                              "theorem13": args.theorem13, "identities": args.identities},
                    args.format, args.output)
    compat = model.check_compatibility(ts.SpectralGrid.block(N, (0,) * (model.real_dim - 2)))
    h10 = ts.harmonic_dim((1, 0), model, N, rel_tol=args.tol, radius=args.radius, seed=args.seed)
    l01 = ts.ell_dim((0, 1), model, N, rel_tol=args.tol, radius=args.radius, seed=args.seed)
    b1 = model.b1
    verdicts = {"compatible": compat["taming"] and compat["symmetric"], "h10": h10.dim, "ell01": l01.dim,
                "b1": b1, "determinate": h10.determinate and l01.determinate,
                "b1_equals_2h10": b1 == 2 * h10.dim, "b1_greater_than_2h10": b1 > 2 * h10.dim}
    numerics = {"h10": h10.as_dict(), "ell01": l01.as_dict(), "compatibility": compat}
    tables = {}
    if args.blocks:
        tables["blocks"] = [{"quantity": "h10", "modes": list(b.modes), "N": b.N, "dim": b.dim,
                             "gap_ratio": b.gap_ratio, "sigma_min": b.singular_values[0], "method": b.method}
                            for b in h10.blocks]
        numerics["block_total"] = sum(b.dim for b in h10.blocks if b.N == N)
    summary = [f"h10 = {h10.dim}   ell01 = {l01.dim}   b1 = {b1}",
               f"gap ratios: h10 {h10.gap_ratio:.3g} (N={N}), {h10.refined_gap_ratio:.3g} (N={2 * N})"]
    summary.append("b1 = 2*h10" if b1 == 2 * h10.dim else f"b1 > 2*h10: {str(b1 > 2 * h10.dim).lower()}")
    if args.blocks:
        summary.append("modes            N   dim  gap")
        for b in h10.blocks:
            summary.append(f"{str(b.modes):16s} {b.N:3d} {b.dim:4d}  {b.gap_ratio:.3g}")
        summary.append(f"total {numerics['block_total']}")
    if args.theorem13:
        t13 = ts.theorem13_check(model, N, radius=args.radius, harmonic=h10, seed=args.seed)
        verdicts["theorem13"] = {k2: t13[k2] for k2 in ("hypothesis", "conclusion", "implication_ok")}
        numerics["theorem13"] = t13
        summary.append(f"lambda1 = {t13['lambda1']:.10g}   4*|Delta_mubar| = {t13['bound']:.10g}   "
                       f"implication ok: {t13['implication_ok']}")
        tables["spectrum"] = [{"quantity": "lambda1", "value": t13["lambda1"]},
                              {"quantity": "4*norm_delta_mubar", "value": t13["bound"]}]
    if args.identities:
        g = ts.SpectralGrid.block(N, (1,) + (0,) * (model.real_dim - 3))
        ident = {
            "kahler": ts.kahler_identity_residual(model, g, seed=args.seed)["max"],
            "laplacian": ts.laplacian_identity_residual(model, g, seed=args.seed)["max"],
            "decomposition": max(ts.decomposition_residual(model, g, deg, seed=args.seed) for deg in (0, 1, 2)),
            "d_squared": max(ts.d_squared_residual(model, g, deg, seed=args.seed) for deg in (0, 1)),
        }
        numerics["identities"] = ident
        tables["identities"] = [{"identity": k2, "residual": v} for k2, v in sorted(ident.items())]
        for k2, v in sorted(ident.items()):
            summary.append(f"residual {k2:14s} {v:.3e}")
    if args.dump:
        _dump_matrix(args.dump, model, N, args.dump_path)
    doc = _report(cfg, verdicts, None, numerics, tables)
    _emit(doc, cfg, summary)
    determinate = h10.determinate and l01.determinate
    if args.theorem13 and numerics["theorem13"]["hypothesis"] is None:
        determinate = False
    if not determinate:
        sys.stderr.write(f"indeterminate kernel dimension at N={N}; try --grid {2 * N}\n")
        return EXIT_INDETERMINATE
    return EXIT_OK


# -------------------------------------------------------------------- sl2


def cmd_sl2(args) -> int:
    from . import bigraded_exterior as bx
    from .exact import scalar_str

    if not 1 <= args.n <= MAX_SL2_N:
        raise CliError(EXIT_INPUT, f"n must lie in 1..{MAX_SL2_N}: exact matrices on Lambda^k of a "
                                   f"{2 * args.n}-dimensional space grow like C(2n, n) squared")
    cfg = RunConfig("sl2", {"n": args.n}, args.format, args.output)
    model = bx.HermitianModel.standard(args.n)
    checks = bx.verify_identities(model)
    conv = bx.sl2_conventions(model)
    b_table = {str(k): scalar_str(v) for k, v in conv["B"].items()}
    star_table = {str(k): scalar_str(v) for k, v in conv["star_s_squared"].items()}
    j_table = {f"{p},{q}": scalar_str(v) for (p, q), v in sorted(conv["J"].items())}
    verdicts = {"all": all(checks.values()), **checks}
    tables = {"B": [{"k": int(k), "scalar": v} for k, v in b_table.items()],
              "star_s_squared": [{"k": int(k), "sign": v} for k, v in star_table.items()]}
    doc = _report(cfg, verdicts, None, {"B_scalar": b_table, "star_s_squared": star_table, "J_scalar": j_table},
                  tables)
    summary = [f"all identities pass: {verdicts['all']}", "k   B    *_s^2"]
    summary += [f"{k:<3s} {b_table[k]:4s} {star_table[k]}" for k in b_table]
    _emit(doc, cfg, summary)
    return EXIT_OK


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlc-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
        sp.add_argument("--output", help="write the report to this file instead of stdout")

    nil = sub.add_parser("nil", help="cohomology, HLC and ddLambda checks on a nilmanifold model")
    src = nil.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=("example-3-2", "abelian"))
    src.add_argument("--spec", help="Lie algebra JSON: {dim, brackets: [[i,j,k,\"p/q\"]], omega: [[i,j,\"p/q\"]]}")
    nil.add_argument("--dim", type=int, default=4, help="dimension of the abelian model")
    common(nil)
    nil.set_defaults(func=cmd_nil)

    tor = sub.add_parser("torus", help="harmonic dimensions and spectral checks on (T^{2n+2}, omega_0, J_q)")
    tor.add_argument("--n", type=int, required=True)
    tor.add_argument("--k", type=int, default=None, help="number of perturbed planes (default n)")
    tor.add_argument("--q", default="exp-sin", help="exp-sin, exp-sin:F, const:C or random[:SEED]")
    tor.add_argument("--grid", type=_power_of_two, default=16, help="active grid size N (power of two)")
    tor.add_argument("--radius", type=int, default=1, help="passive Fourier box radius")
    tor.add_argument("--blocks", action="store_true", help="print the per-mode block table")
    tor.add_argument("--theorem13", action="store_true")
    tor.add_argument("--identities", action="store_true")
    tor.add_argument("--seed", type=int, default=0)
    tor.add_argument("--tol", type=_unit_interval, default=1e-8, help="relative singular value cut")
    tor.add_argument("--dump", metavar="TAG:P,Q", help="write an assembled zero-mode operator as row col re im")
    tor.add_argument("--dump-path", default="operator.coo")
    common(tor)
    tor.set_defaults(func=cmd_torus)

    sl2 = sub.add_parser("sl2", help="exhaustive exact check of the pointwise sl(2) identities")
    sl2.add_argument("--n", type=int, required=True)
    common(sl2)
    sl2.set_defaults(func=cmd_sl2)
    return p


def main(argv=None) -> int:
    threads = os.environ.get("HLC_LAB_THREADS")
    if threads and threads.isdigit():
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        if exc.witness is not None:
            sys.stderr.write("witness: " + json.dumps(_jsonable(exc.witness), sort_keys=True) + "\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
