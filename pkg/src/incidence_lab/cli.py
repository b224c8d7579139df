"""Command line driver: one subcommand per module, reproducible JSON configs.

Every run echoes its resolved config and saves it next to the outputs as
``<stem>.config.json``; ``incidence-lab --config <stem>.config.json`` reruns it
and reproduces the outputs byte for byte.  Exit codes: 0 ok, 2 config error,
3 selfcheck failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import branching, checks, constructions, finite_field, heilbronn, incidence_kernel, regularity
from .phase_space import Configuration, format_scale, parse_scale

OUT_ENV = "INCIDENCE_LAB_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_SELFCHECK = 0, 2, 3
SUBCOMMANDS = ("gen", "incidence", "highlow", "uniformize", "katztao", "frostman",
               "branching", "effective", "heilbronn", "unital")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "."
    name: str = ""
    format: str = "csv"
    workers: int = 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
            cfg = cls(**d)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad config file: {e}") from e
        cfg.validate()
        return cfg

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def stem(self) -> str:
        return os.path.join(self.out, self.name or self.subcommand)


# ------------------------------------------------------------------ parsing

def scale(text) -> float:
    try:
        s = parse_scale(str(text))
    except ValueError as e:
        raise ConfigError(f"bad scale {text!r}") from e
    if not 0 < s <= 1:
        raise ConfigError(f"scale {text!r} outside (0, 1]")
    return s


def scale_list(text) -> list:
    return [scale(t) for t in str(text).split(",") if t.strip()]


def n_range(text) -> list:
    """``256..8192`` (doubling) or a comma list."""
    text = str(text)
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split(".."))
            if lo < 1 or hi < lo:
                raise ValueError
            out = []
            while lo <= hi:
                out.append(lo)
                lo *= 2
            return out
        return [int(t) for t in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"bad n range {text!r}") from e


def load_input(p: dict, seed: int) -> Configuration:
    if p.get("input"):
        path = p["input"]
        if not os.path.exists(path):
            raise ConfigError(f"input file {path!r} not found")
        with open(path) as fh:
            text = fh.read()
        return Configuration.from_json(text) if text.lstrip().startswith("{") else Configuration.from_text(text)
    if p.get("generator"):
        try:
            spec = constructions.GeneratorSpec.from_json(p["generator"])
        except (ValueError, KeyError) as e:
            raise ConfigError(f"bad generator spec: {e}") from e
        return constructions.generate(spec)
    raise ConfigError("need --input or --generator")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def rows_to_csv(rows: list, columns: list | None = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def table(cfg, rows, summary=None) -> str:
    if cfg.format == "json":
        return dumps({"rows": rows, "summary": summary or {}})
    return rows_to_csv(rows)


# ------------------------------------------------------------------ runners
# each returns ({suffix: text}, summary dict)

def run_gen(cfg):
    p = cfg.params
    kind = p["kind"]
    delta = scale(p["delta"]) if p.get("delta") else None
    if kind in ("grid_slope_field", "lattice") and delta is None:
        raise ConfigError(f"{kind} needs --delta")
    if kind == "grid_slope_field":
        X = constructions.gen_grid_slope_field(delta)
    elif kind == "lattice":
        X = constructions.gen_lattice(delta)
    elif kind == "uniform_random":
        X = constructions.gen_uniform_random(int(p["n"]), cfg.seed)
    elif kind == "cluster_mix":
        X = constructions.gen_cluster_mix(int(p["n_cluster"]), int(p["n_dust"]), seed=cfg.seed)
    elif kind == "single_slope":
        X = constructions.gen_single_slope(int(p["n"]), float(p["slope"]), cfg.seed)
    elif kind == "ad_regular_product":
        if delta is None:
            raise ConfigError("ad_regular_product needs --delta")
        X = constructions.gen_ad_regular_product(p["t"], p["s"], delta, cfg.seed)
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    text = X.to_json() + "\n" if cfg.format == "json" else X.to_text()
    ext = "json" if cfg.format == "json" else "txt"
    return {ext: text}, {"n_points": len(X), "delta": format_scale(X.delta)}


def run_incidence(cfg):
    p = cfg.params
    X = load_input(p, cfg.seed)
    ws = incidence_kernel.dyadic_range(scale(p["wmin"]), scale(p["wmax"]))
    prof = incidence_kernel.incidence_profile(X, ws)
    rows = [{"w": format_scale(w), "I": I, "B": B, "hard_lo": lo, "hard_hi": hi,
             "sandwich_ok": bool(lo <= I <= hi)}
            for w, I, B, lo, hi in zip(prof.scales, prof.smoothed, prof.normalized,
                                        prof.hard_lo, prof.hard_hi)]
    summ = {"n": len(X), "sandwich_violations": sum(not r["sandwich_ok"] for r in rows)}
    return {cfg.format: table(cfg, rows, summ)}, summ


def run_highlow(cfg):
    p = cfg.params
    X = load_input(p, cfg.seed)
    rep = incidence_kernel.high_low_scan(X, scale(p["wmin"]), scale(p["wmax"]))
    summ = {"n": len(X), "max_ratio": rep.max_ratio}
    text = rep.to_csv() if cfg.format == "csv" else dumps({"rows": rep.rows, "summary": summ})
    return {cfg.format: text}, summ


def _scales_from(p):
    if p.get("scales"):
        return scale_list(p["scales"])
    m, T = int(p["m"]), int(p["T"])
    return [2.0 ** (-j * T) for j in range(m + 1)]


def run_uniformize(cfg):
    p = cfg.params
    X = load_input(p, cfg.seed)
    Y, cert = regularity.uniformize(X, _scales_from(p))
    summ = {"n_in": len(X), "n_out": len(Y), "K": cert.K, "K_empirical": cert.K_empirical,
            "holds": cert.holds()}
    rows = [{"scale": str(r["scale"]), "min_count": r["min_count"], "M": r["M"]} for r in cert.rows]
    return {"txt": Y.to_text(), cfg.format: table(cfg, rows, summ)}, summ


def run_katztao(cfg):
    p = cfg.params
    delta, s, C = scale(p["delta"]), float(p["s"]), float(p["C"])
    if p.get("input"):
        P = np.loadtxt(p["input"], ndmin=1)
    else:
        P = np.arange(0, int(round(1 / delta)) + 1) * delta
    out = regularity.katz_tao_extract(P, delta, s, C)
    bad = regularity.katz_tao_violations(out, delta, s)
    need = math.ceil(delta ** (-s) / (6 * C))
    summ = {"n_in": int(P.size), "n_out": int(out.size), "required": need, "violations": len(bad)}
    rows = [{"w": format_scale(w), "count": regularity.window_max(out, w), "bound": 4 * (w / delta) ** s}
            for w in regularity.dyadic_widths(delta)]
    pts = "\n".join(repr(float(x)) for x in out) + "\n"
    return {"points.txt": pts, cfg.format: table(cfg, rows, summ)}, summ


def run_frostman(cfg):
    p = cfg.params
    X = load_input(p, cfg.seed)
    rep = regularity.check_frostman(X, float(p["alpha"]), float(p["beta"]))
    rows = [{"u": format_scale(u), "w": format_scale(w), "count": c, "ratio": r} for u, w, c, r in rep.table]
    summ = {"C": rep.C, "witness": None if rep.witness is None else rep.witness.to_dict()}
    return {cfg.format: table(cfg, rows, summ)}, summ


def _branching_for(cfg):
    p = cfg.params
    m, T = int(p["m"]), int(p["T"])
    if p.get("synthetic"):
        a, b = (float(t) for t in str(p["synthetic"]).split(","))
        return branching.linear_branching(m, a, b, T=T)
    X = load_input(p, cfg.seed)
    cert = None
    if p.get("uniformize"):
        X, cert = regularity.uniformize(X, [2.0 ** (-j * T) for j in range(m + 1)])
    return branching.compute_branching(X, m, T, cert, p.get("triples", "all"))


def run_branching(cfg):
    f = _branching_for(cfg)
    dn = branching.direction_numbers(f)
    reps = [branching.check_lipschitz_monotone(f), branching.check_submodular(f, seed=cfg.seed),
            branching.check_direction_inequalities(dn, f)]
    summ = {"tolerance": f.tolerance, "K": f.K, "flags": f.flags,
            "checks": {r["check"]: {"max_violation": r["max_violation"], "passes": r["passes"]}
                       for r in reps}}
    if cfg.format == "json":
        return {"json": dumps({"branching": f.to_dict(), "summary": summ})}, summ
    return {"csv": f.to_csv()}, summ


def run_effective(cfg):
    p = cfg.params
    f = _branching_for(cfg)
    c1, c2 = float(p["c1"]), float(p["c2"])
    tr = branching.find_effective_triple(f, c1, c2)
    summ = {"found": tr is not None, "tolerance": f.tolerance, "barrier": branching.barrier_value(f, c2),
            "c1_above_tolerance": c1 > f.tolerance}
    row = {"found": tr is not None, "c1": c1, "c2": c2}
    if tr is not None:
        row.update(tr.to_dict())
    return {cfg.format: table(cfg, [row], summ)}, summ


def run_heilbronn(cfg):
    p = cfg.params
    mode = p.get("mode", "sweep")
    ns = n_range(p["n"])
    if mode == "sweep":
        res = heilbronn.exponent_sweep(p.get("generator", "uniform_random"), ns, int(p["trials"]),
                                       cfg.seed, bool(p.get("brute")), cfg.workers)
        summ = {"slope": res.slope, "brute_slope": res.brute_slope, "degenerate": res.degenerate,
                "medians": res.medians}
        if cfg.format == "json":
            return {"json": dumps({"rows": res.rows, "summary": summ})}, summ
        return {"csv": res.to_csv()}, summ
    if mode != "single":
        raise ConfigError("heilbronn mode must be sweep or single")
    rows = []
    for n in ns:
        rng = np.random.default_rng([cfg.seed, n, 0])
        P = heilbronn._gen_points(p.get("generator", "uniform_random"), n, rng)
        res = heilbronn.small_triangle_pipeline(P)
        rows.append({"n": n, "i": res.indices[0], "j": res.indices[1], "k": res.indices[2],
                     "area": res.area, "dist": res.extra["dist"], "bound": res.extra["bound"]})
    return {cfg.format: table(cfg, rows)}, {"n_runs": len(rows)}


def run_unital(cfg):
    p = cfg.params
    F = finite_field.build_field(int(p["p"]))
    ucfg = finite_field.build_unital(F.p)
    wanted = [c.strip() for c in str(p.get("check", "tangency,vinh")).split(",") if c.strip()]
    rows = []
    for c in wanted:
        if c == "tangency":
            t = finite_field.verify_tangency(ucfg)
            rows.append({"check": "tangency", "passes": t["passes"], "detail": t["reason"] or ""})
        elif c == "vinh":
            v = finite_field.vinh_check(F, ucfg.points, ucfg.tangents)
            rows.append({"check": "vinh_unital", "passes": v["passes"], "I": v["I"],
                         "expected": v["expected"], "slack": v["slack"], "bound": v["bound"]})
            rng = np.random.default_rng(cfg.seed)
            for i, (P, L) in enumerate(finite_field.random_subsets(F, rng, int(p.get("n_random", 50)))):
                v = finite_field.vinh_check(F, P, L)
                rows.append({"check": f"vinh_random_{i}", "passes": v["passes"], "I": v["I"],
                             "expected": v["expected"], "slack": v["slack"], "bound": v["bound"]})
        else:
            raise ConfigError(f"unknown check {c!r}")
    cols = ["check", "passes", "I", "expected", "slack", "bound", "detail"]
    summ = {"p": F.p, "q": F.q, "n_points": len(ucfg.points), "all_pass": all(r["passes"] for r in rows)}
    if cfg.format == "json":
        return {"json": dumps({"rows": rows, "summary": summ})}, summ
    return {"csv": rows_to_csv(rows, cols)}, summ


RUNNERS = {"gen": run_gen, "incidence": run_incidence, "highlow": run_highlow,
           "uniformize": run_uniformize, "katztao": run_katztao, "frostman": run_frostman,
           "branching": run_branching, "effective": run_effective, "heilbronn": run_heilbronn,
           "unital": run_unital}


# ------------------------------------------------------------------ driver

def write_outputs(cfg: ExperimentConfig, outputs: dict) -> list:
    """Write every file or none: temp files first, then renames."""
    os.makedirs(cfg.out, exist_ok=True)
    outputs = dict(outputs)
    outputs["config.json"] = cfg.to_json()
    staged, done = [], []
    try:
        for suffix, text in outputs.items():
            fd, tmp = tempfile.mkstemp(dir=cfg.out, prefix=".partial-")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            staged.append((tmp, f"{cfg.stem}.{suffix}"))
        for tmp, final in staged:
            os.replace(tmp, final)
            done.append(final)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.remove(tmp)
        for final in done:
            os.remove(final)
        raise
    return done


def run(cfg: ExperimentConfig, echo=print) -> int:
    cfg.validate()
    echo(cfg.to_json().rstrip())
    try:
        outputs, summary = RUNNERS[cfg.subcommand](cfg)
    except ConfigError:
        raise
    except (ValueError, KeyError) as e:
        raise ConfigError(f"{type(e).__name__}: {e}") from e
    paths = write_outputs(cfg, outputs)
    echo(dumps({"summary": summary, "outputs": paths}).rstrip())
    return EXIT_OK


def selfcheck(sub: str, seed: int = 0, echo=print) -> int:
    rows = checks.SUITES[sub](seed)
    for name, ok, detail in rows:
        echo(f"{'PASS' if ok else 'FAIL'} {sub}.{name} {detail}")
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_SELFCHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="incidence-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="rerun a saved <stem>.config.json")
    sub = ap.add_subparsers(dest="subcommand")

    def common(sp, with_input=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
        sp.add_argument("--name", default="", help="output file stem (default: subcommand)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--selfcheck", action="store_true", help="run the module's invariant suite")
        if with_input:
            sp.add_argument("--input", help="configuration file (text or json)")
            sp.add_argument("--generator", help='generator spec json, e.g. {"kind": "uniform_random", "params": {"n": 500}}')

    sp = sub.add_parser("gen", help="generate a configuration")
    common(sp, False)
    sp.add_argument("--kind", default="uniform_random",
                    choices=[k for k in constructions.KINDS if k != "lines_through_points"] + ["lattice"])
    sp.add_argument("--delta")
    sp.add_argument("--n", type=int)
    sp.add_argument("--t")
    sp.add_argument("--s")
    sp.add_argument("--n-cluster", dest="n_cluster", type=int)
    sp.add_argument("--n-dust", dest="n_dust", type=int)
    sp.add_argument("--slope", type=float)

    for name, hlp in (("incidence", "smoothed and hard incidence counts"),
                      ("highlow", "high-low inequality scan")):
        sp = sub.add_parser(name, help=hlp)
        common(sp)
        sp.add_argument("--wmin", default="2^-10")
        sp.add_argument("--wmax", default="2^-2")

    sp = sub.add_parser("uniformize", help="extract a uniform subset")
    common(sp)
    sp.add_argument("--scales", help="comma list such as 1,2^-4,2^-8")
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--T", type=int, default=4)

    sp = sub.add_parser("katztao", help="Katz-Tao extraction on the line")
    common(sp, False)
    sp.add_argument("--input", help="one number per line (default delta Z in [0, 1])")
    sp.add_argument("--delta", default="2^-10")
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--C", type=float, default=2.0)

    sp = sub.add_parser("frostman", help="Frostman constant and witness rectangle")
    common(sp)
    sp.add_argument("--alpha", type=float, required=False, default=1.0)
    sp.add_argument("--beta", type=float, required=False, default=1.0)

    for name, hlp in (("branching", "branching function and structure checks"),
                      ("effective", "effective-triple search")):
        sp = sub.add_parser(name, help=hlp)
        common(sp)
        sp.add_argument("--m", type=int, default=3)
        sp.add_argument("--T", type=int, default=1)
        sp.add_argument("--synthetic", help="alpha,beta for a linear branching function")
        sp.add_argument("--uniformize", action="store_true", help="uniformize first and use its certificate")
        sp.add_argument("--triples", choices=("all", "diagonal"), default="all")
        if name == "effective":
            sp.add_argument("--c1", type=float, default=0.01)
            sp.add_argument("--c2", type=float, default=0.19)

    sp = sub.add_parser("heilbronn", help="small-triangle pipeline and exponent sweep")
    common(sp, False)
    sp.add_argument("mode", nargs="?", choices=("sweep", "single"), default="sweep")
    sp.add_argument("--n", default="256..8192")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--generator", choices=("uniform_random", "grid"), default="uniform_random")
    sp.add_argument("--brute", action="store_true")

    sp = sub.add_parser("unital", help="Hermitian unital checks over F_{p^2}")
    common(sp, False)
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--check", default="tangency,vinh")
    sp.add_argument("--n-random", dest="n_random", type=int, default=50)
    return ap


COMMON = ("subcommand", "seed", "out", "name", "format", "workers", "selfcheck", "config")


def config_from_args(ns) -> ExperimentConfig:
    d = vars(ns)
    params = {k: v for k, v in d.items() if k not in COMMON and v is not None and v is not False}
    out = ns.out or os.environ.get(OUT_ENV) or "."
    cfg = ExperimentConfig(ns.subcommand, params, ns.seed, out, ns.name, ns.format, ns.workers)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.config:
            with open(ns.config) as fh:
                cfg = ExperimentConfig.from_json(fh.read())
            return run(cfg)
        if ns.subcommand is None:
            ap.print_help()
            return EXIT_CONFIG
        if ns.selfcheck:
            return selfcheck(ns.subcommand, ns.seed)
        return run(config_from_args(ns))
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
