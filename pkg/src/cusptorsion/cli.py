"""Command line front end.

    cusptorsion [--config FILE] [--jobs N] [--output csv|json] [--oracle] [--seed N] COMMAND ...

Commands: lattice, rep, trace, torsion, ms-limit, bs-report, tower-gen.
Exit codes: 0 success, 2 parse error, 3 numerical failure, 4 admission failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import bs_sequences as bs
from . import geom_trace as gt
from . import lattice2d as l2
from . import mellin_reg as mr
from . import rep_theory as rt
from . import spectral_side as ss
from .errors import AdmissionError, CuspTorsionError, NumericalError, ParseError
from .hyperbolic import CuspGeometry

EXIT_OK, EXIT_PARSE, EXIT_NUMERICAL, EXIT_ADMISSION = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-8
    t0: float = 1.0
    slope_threshold: float = bs.DEFAULT_SLOPE_THRESHOLD
    counting_budget: int = l2.DEFAULT_BUDGET
    output_format: str = "csv"
    seed: int = 20240101
    jobs: int = 1
    oracle: bool = False
    consistency_rtol: float = mr.DEFAULT_CONSISTENCY_RTOL
    t0_sweep: tuple = (0.5, 1.0, 2.0)

    def __post_init__(self):
        for name in ("quad_abs_tol", "quad_rel_tol", "t0", "slope_threshold",
                     "consistency_rtol"):
            if not getattr(self, name) > 0:
                raise AdmissionError(f"config: {name} must be positive")
        if self.counting_budget < 10**4:
            raise AdmissionError("config: counting_budget must be >= 10^4")
        if self.output_format not in ("csv", "json"):
            raise AdmissionError("config: output_format must be csv or json")
        if self.jobs < 1:
            raise AdmissionError("config: jobs must be >= 1")

    @classmethod
    def from_mapping(cls, d: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for k, v in d.items():
            if k not in known:
                raise ParseError(f"config: unknown field {k!r}")
            kwargs[k] = tuple(v) if k == "t0_sweep" else v
        return cls(**kwargs)


# -- parsing --------------------------------------------------------------------

def load_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _field(d, key, where, kind=None):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{where}: missing field {key!r}")
    v = d[key]
    if kind is not None:
        try:
            return kind(v)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: field {key!r} is not a valid {kind.__name__}") from exc
    return v


def _vec2(d, key, where):
    v = _field(d, key, where)
    try:
        out = [float(x) for x in v]
    except (TypeError, ValueError):
        out = []
    if len(out) != 2 or not all(math.isfinite(x) for x in out):
        raise ParseError(f"{where}: field {key!r} must be a pair of finite numbers")
    return out


def parse_lattice(d, where="lattice") -> l2.ReducedLattice:
    return l2.lattice(_vec2(d, "b1", where), _vec2(d, "b2", where))


def _entries(doc, key):
    """A single object, a list, or an object holding a list under ``key``."""
    if isinstance(doc, list):
        return doc
    if isinstance(doc, dict) and key in doc and isinstance(doc[key], list):
        return doc[key]
    return [doc]


# -- output ---------------------------------------------------------------------

def _num(x, digits):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, f".{digits}g") if math.isfinite(x) else ("nan" if x != x else str(x))
    if x is None:
        return ""
    return str(x)


def to_json(obj, digits=17, indent=0):
    """JSON with floats printed to ``digits`` significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad} {json.dumps(str(k))}: {to_json(v, digits, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v, digits, indent + 1) for v in obj) + "]"
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), f".{digits}g") if math.isfinite(obj) else "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def render(rows, cfg: RunConfig, extra=None) -> str:
    if cfg.output_format == "json":
        doc = {"rows": rows}
        if extra:
            doc.update(extra)
        return to_json(doc) + "\n"
    cols = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_num(r.get(c), 12) for c in cols])
    out = buf.getvalue()
    if extra:
        out += "\n" + to_json(extra) + "\n"
    return out


def run_batch(fn, items, cfg: RunConfig):
    """Apply ``fn`` to ``items``, up to ``cfg.jobs`` at a time, keeping input order."""
    if cfg.jobs == 1 or len(items) < 2:
        return [fn(i, x) for i, x in enumerate(items)]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(fn, range(len(items)), items))


# -- commands -------------------------------------------------------------------

def cmd_lattice(args, cfg):
    doc = load_json(args.input)
    radii = list(args.radius or (doc.get("radii", []) if isinstance(doc, dict) else []))
    entries = _entries(doc, "lattices")

    def one(i, d):
        where = f"lattices[{i}]"
        lat = parse_lattice(d, where)
        row = {"index": i, "alpha1": lat.alpha1, "alpha2": lat.alpha2,
               "covolume": lat.covolume, "uniformity_ratio": lat.uniformity_ratio}
        cc = l2.kappa(lat, budget=cfg.counting_budget)
        for v in l2.KAPPA_VARIANTS:
            row[f"kappa_{v}"] = l2.kappa_from_integral(cc.error_integral, lat, v)
        for r in radii:
            row[f"E_{r:g}"] = l2.error_term(lat, float(r), budget=cfg.counting_budget)
            row[f"N_{r:g}"] = l2.count_points(lat, float(r), budget=cfg.counting_budget)
        return row

    return render(run_batch(one, entries, cfg), cfg)


def cmd_rep(args, cfg):
    w = rt.RepWeights(args.n1, args.n2)
    row = {"n1": w.n1, "n2": w.n2, "dimension": rt.dimension(w), "casimir": rt.casimir(w),
           "l2_torsion_coefficient": rt.l2_torsion_coefficient(w)}
    for p in range(4):
        row[f"gap_p{p}"] = rt.spectral_gap(w, p) if w.strongly_acyclic else None
    mult = rt.weight_multiplicities(w)
    row["weights"] = " ".join(f"{m}:{mult[m]}" for m in mult.weights)
    return render([row], cfg)


def _parse_manifold(d, where):
    vol = _field(d, "volume", where, float)
    cusps = tuple(CuspGeometry(parse_lattice(c, f"{where}.cusps[{j}]"),
                               float(c.get("height_normalization", 1.0)))
                  for j, c in enumerate(d.get("cusps", [])))
    lox = float(d.get("loxodromic", 0.0))
    return gt.ManifoldSummary(vol, cusps, lambda h, lox=lox: lox,
                              float(d.get("identity_density", 0.0)))


def cmd_trace(args, cfg):
    doc = load_json(args.input)
    if args.profile:
        try:
            prof_d = json.loads(args.profile)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--profile: {exc.msg}") from exc
    else:
        prof_d = _field(doc if isinstance(doc, dict) else {}, "profile", args.input)
    h = gt.profile_from_descriptor(prof_d)
    entries = _entries(doc, "manifolds")

    def one(i, d):
        where = f"manifolds[{i}]"
        m = _parse_manifold(d, where)
        b = gt.trace_breakdown(m, h)
        row = {"index": i, "identity": b.identity, "loxodromic": b.loxodromic,
               "log_term": b.log_term, "kappa_term": b.kappa_term, "total": b.total}
        if m.cusps:
            desc = bs.CuspedManifoldDescriptor(m.volume, tuple(c.lattice for c in m.cusps))
            Y = bs.truncation_schedule(desc)
            row["schedule_a"] = Y.scale
            row["truncation_defect"] = gt.truncation_defect(m.cusps, h, Y, tol=cfg.quad_abs_tol)
            if cfg.oracle:
                closed = sum(gt.unipotent_closed_form(c.effective_lattice, h, y).value
                             for c, y in zip(m.cusps, Y))
                brute = sum(gt.unipotent_bruteforce(c.effective_lattice, h, y,
                                                    budget=cfg.counting_budget).value
                            for c, y in zip(m.cusps, Y))
                row["unipotent_closed_form"] = closed
                row["unipotent_bruteforce"] = brute
                row["oracle_rel_dev"] = abs(closed - brute) / abs(brute) if brute else abs(closed)
        return row

    return render(run_batch(one, entries, cfg), cfg)


def _parse_degree_model(d, where):
    pairs = _field(d, "spectrum", where)
    try:
        spec = mr.DiscreteSpectrum.from_pairs([(float(l), int(m)) for l, m in pairs])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: field 'spectrum' must be a list of [lambda, mult]") from exc
    if "a" in d or "b" in d:
        try:
            exp = mr.SmallTimeExpansion({int(k): float(v) for k, v in d.get("a", {}).items()},
                                        {int(k): float(v) for k, v in d.get("b", {}).items()})
        except (TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"{where}: fields 'a'/'b' must map integers to numbers") from exc
    else:
        exp = mr.synthetic_expansion(spec, int(d.get("order", 5)))
    return exp, spec


def cmd_torsion(args, cfg):
    doc = load_json(args.input)
    if not isinstance(doc, dict):
        raise ParseError(f"{args.input}: expected an object")
    t0 = float(doc.get("t0", cfg.t0))
    degrees = doc.get("degrees") or {"0": doc}
    models = {}
    for p, d in degrees.items():
        try:
            p_int = int(p)
        except ValueError as exc:
            raise ParseError(f"degrees: key {p!r} is not an integer") from exc
        models[p_int] = _parse_degree_model(d, f"degrees[{p}]")

    rows, log_dets = [], {}
    for p, (exp, spec) in sorted(models.items()):
        vals = {}
        for t in sorted(set(cfg.t0_sweep) | {t0}):
            try:
                vals[t] = mr.regularized_log_det(exp, spec, t, cfg.consistency_rtol,
                                                 cfg.quad_abs_tol, cfg.quad_rel_tol)
            except AdmissionError as exc:
                raise AdmissionError(f"degree {p}: {exc}") from exc
        log_dets[p] = vals[t0]
        sweep = [vals[t] for t in cfg.t0_sweep]
        rows.append({"degree": p, "t0": t0, "log_det": vals[t0],
                     "t0_sweep_spread": max(sweep) - min(sweep)})
    extra = {}
    if 0 in log_dets and 1 in log_dets:
        extra["log_T_R"] = mr.analytic_torsion(log_dets, t0).log_T_R
    if args.volume is not None or "volume" in doc:
        vol = args.volume if args.volume is not None else float(doc["volume"])
        w = rt.RepWeights(args.n1, args.n2)
        extra["vol_t2"] = mr.l2_log_torsion(vol, w)
        if "log_T_R" in extra:
            extra["difference"] = extra["log_T_R"] - extra["vol_t2"]
    for r in rows:
        r.update(extra)
    return render(rows, cfg)


def cmd_ms_limit(args, cfg):
    doc = load_json(args.input)
    model = ss.model_from_descriptor(_field(doc, "model", args.input))
    xi = ss.gaussian_test_function(float(doc.get("width", 1.0)))
    heights = args.Y or doc.get("Y", [1e2, 1e3, 1e4])

    def one(i, Y):
        r = ss.scattering_limit(model, xi, float(Y))
        return {"Y": float(Y), "value": r.value, "limit": r.limit,
                "quarter_limit": r.quarter_limit, "deviation": abs(r.value - r.limit),
                "quarter_deviation": abs(r.value - r.quarter_limit), "error": r.error}

    return render(run_batch(one, list(heights), cfg), cfg)


def _parse_tower(doc, where):
    members = _entries(doc, "members")
    out = []
    for i, d in enumerate(members):
        w = f"{where}[{i}]"
        vol = _field(d, "volume", w, float)
        cusps = tuple(parse_lattice(c, f"{w}.cusps[{j}]")
                      for j, c in enumerate(d.get("cusps", [])))
        counts = d.get("geodesic_counts", {})
        try:
            counts = {float(R): int(n) for R, n in counts.items()}
        except (TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"{w}: field 'geodesic_counts' must map radii to counts") from exc
        out.append(bs.CuspedManifoldDescriptor(vol, cusps, counts))
    return bs.TowerDescriptor(tuple(out))


def cmd_bs_report(args, cfg):
    tower = _parse_tower(load_json(args.input), args.input)
    rep = bs.bs_report(tower, args.R or (), cfg.slope_threshold)
    return render(rep.rows, cfg, {"verdicts": rep.verdicts, "slopes": rep.slopes})


def cmd_tower_gen(args, cfg):
    doc = load_json(args.base)
    base = _parse_tower(doc, args.base).members[0]
    t = bs.congruence_tower(base, args.levels, args.index, args.cusps)
    return to_json([m.to_dict() for m in t], 17) + "\n"


COMMANDS = {"lattice": cmd_lattice, "rep": cmd_rep, "trace": cmd_trace,
            "torsion": cmd_torsion, "ms-limit": cmd_ms_limit,
            "bs-report": cmd_bs_report, "tower-gen": cmd_tower_gen}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cusptorsion", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--jobs", type=int, help="parallel workers for batch inputs")
    p.add_argument("--output", choices=("csv", "json"))
    p.add_argument("--oracle", action="store_true", help="add brute-force columns")
    p.add_argument("--seed", type=int)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lattice", help="lattice invariants and cusp constants")
    s.add_argument("input")
    s.add_argument("--radius", type=float, action="append")

    s = sub.add_parser("rep", help="constants of V(n1, n2)")
    s.add_argument("--n1", type=int, required=True)
    s.add_argument("--n2", type=int, required=True)

    s = sub.add_parser("trace", help="regularised trace of a cusped manifold summary")
    s.add_argument("input")
    s.add_argument("--profile", help='e.g. \'{"profile": "gaussian", "scale": 1}\'')

    s = sub.add_parser("torsion", help="regularised determinants and torsion")
    s.add_argument("input")
    s.add_argument("--n1", type=int, default=0)
    s.add_argument("--n2", type=int, default=0)
    s.add_argument("--volume", type=float)

    s = sub.add_parser("ms-limit", help="scattering truncation integral")
    s.add_argument("input")
    s.add_argument("--Y", type=float, action="append")

    s = sub.add_parser("bs-report", help="Benjamini-Schramm trend report for a tower")
    s.add_argument("input")
    s.add_argument("--R", type=float, action="append")

    s = sub.add_parser("tower-gen", help="synthetic congruence tower")
    s.add_argument("base")
    s.add_argument("--levels", type=int, default=8)
    s.add_argument("--index", default="n4", choices=sorted(bs.PRESETS))
    s.add_argument("--cusps", default="n2", choices=sorted(bs.PRESETS))
    return p


def make_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        doc = load_json(args.config)
        if not isinstance(doc, dict):
            raise ParseError(f"{args.config}: expected an object")
        cfg = RunConfig.from_mapping(doc)
    over = {}
    if args.jobs is not None:
        over["jobs"] = args.jobs
    if args.output is not None:
        over["output_format"] = args.output
    if args.oracle:
        over["oracle"] = True
    if args.seed is not None:
        over["seed"] = args.seed
    return replace(cfg, **over) if over else cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        out = COMMANDS[args.command](args, cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (AdmissionError, CuspTorsionError) as exc:
        print(f"admission failure: {exc}", file=sys.stderr)
        return EXIT_ADMISSION
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
