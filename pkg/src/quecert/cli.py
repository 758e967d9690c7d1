"""Command line front door.

Subcommands build level artifacts, run certifications and spectral
comparisons, and write deterministic CSV/JSON tables plus SVG plots.
Exit codes: 0 success, 1 usage, 2 numerical failure, 3 a certified
bound measured as violated.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from .certify import (
    certificate_from_json,
    certify as run_certify,
    compose,
    delta_hat_from_delta,
    gnrs_verdict,
    operator_level_certificate,
    operator_transitivity_bound,
)
from . import forms, identify, models, spectral
from . import obstacle as obstacle_mod
from .errors import (
    BoundViolationError,
    ConfigError,
    DomainError,
    NumericsError,
    QueError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_BOUND = 3


@dataclass
class RunConfig:
    command: str = ""
    model: str = "interval"
    level: int = 1
    fine: int | None = None
    mid: int | None = None
    levels: tuple | None = None
    k: int | None = None
    reference: str = "finest"
    z_points: tuple = (-1 + 0j, -2 + 0j, 1j, 1 + 2j)
    times: tuple = (0.5, 1.0, 2.0)
    windows: tuple = ((-0.5, 4.0), (5.0, 20.0))
    theta: float = math.pi / 4.0
    n_grid: int = 256
    center: int = 0
    alpha: float = 0.5
    eps_list: tuple = ()
    out: str = "que-out"
    cache_dir: str | None = None
    seed: int = 0

    def effective_cache_dir(self) -> str:
        if self.cache_dir:
            return self.cache_dir
        env = os.environ.get("QUE_CACHE_DIR")
        if env:
            return env
        return os.path.join(self.out, "cache")

    def hash(self) -> str:
        # output locations do not change the computation
        skip = {"out", "cache_dir"}
        payload = {
            f.name: _jsonable(getattr(self, f.name))
            for f in fields(self)
            if f.name not in skip
        }
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()
        return digest[:12]


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


# value parsers shared by flags and the config file


def _parse_complex(tok: str) -> complex:
    tok = tok.strip().replace("i", "j")
    try:
        return complex(tok)
    except ValueError:
        raise ConfigError(f"cannot parse {tok!r} as a complex number")


def _parse_complex_list(s: str) -> tuple:
    return tuple(_parse_complex(t) for t in s.split(",") if t.strip())


def _parse_float_list(s: str) -> tuple:
    try:
        return tuple(float(t) for t in s.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {s!r} as a float list")


def _parse_int_list(s: str) -> tuple:
    try:
        return tuple(int(t) for t in s.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {s!r} as an integer list")


def _parse_windows(s: str) -> tuple:
    out = []
    for part in s.split(";"):
        part = part.strip()
        if not part:
            continue
        pair = _parse_float_list(part)
        if len(pair) != 2:
            raise ConfigError(f"window {part!r} must be two numbers")
        out.append(tuple(pair))
    return tuple(out)


def _parse_eps_list(s: str, h: float) -> tuple:
    out = []
    for tok in s.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.endswith("h"):
            out.append(float(tok[:-1] or "1") * h)
        else:
            out.append(float(tok))
    return tuple(out)


_CONFIG_KEYS = {
    "model": str,
    "level": int,
    "fine": int,
    "mid": int,
    "levels": _parse_int_list,
    "k": int,
    "reference": str,
    "z": _parse_complex_list,
    "times": _parse_float_list,
    "windows": _parse_windows,
    "theta": float,
    "n_grid": int,
    "center": int,
    "alpha": float,
    "eps": str,  # resolved against h later
    "out": str,
    "cache_dir": str,
    "seed": int,
}

_KEY_TO_FIELD = {
    "z": "z_points",
    "eps": "eps_raw",
}


def _load_config_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found")
    if "que" not in cp:
        raise ConfigError(f"config file {path!r} needs a [que] section")
    out = {}
    for key, raw in cp["que"].items():
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        out[_KEY_TO_FIELD.get(key, key)] = _CONFIG_KEYS[key](raw)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    p = _Parser(prog="que", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=sorted(models.MODELS))
    common.add_argument("--level", type=int, metavar="M_COARSE")
    common.add_argument("--fine", type=int, metavar="M_FINE")
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int)
    common.add_argument("--cache-dir", dest="cache_dir", metavar="DIR")

    sp = sub.add_parser("build", parents=[common], help="emit level graph and pencil artifacts")
    sp.add_argument("--levels", type=str, help="comma list, overrides --level")
    sp = sub.add_parser("certify", parents=[common], help="certificate for one coarse/fine pair")
    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalue table for one level")
    sp.add_argument("--k", type=int, help="number of eigenvalues (default all)")
    sp = sub.add_parser("converge", parents=[common], help="eigenvalue convergence table and plot")
    sp.add_argument("--levels", type=str)
    sp.add_argument("--k", type=int, help="eigenvalue index (default 1)")
    sp.add_argument("--reference", type=str, help="finest | analytic | explicit level")
    sp = sub.add_parser("compare", parents=[common], help="resolvent/heat/projection comparison table")
    sp.add_argument("--z", type=str, help="comma list of resolvent points")
    sp.add_argument("--times", type=str, help="comma list of heat times")
    sp.add_argument("--window", action="append", metavar="A,B", help="projection window, repeatable")
    sp.add_argument("--theta", type=float)
    sp = sub.add_parser("compose", parents=[common], help="transitivity report for a level chain")
    sp.add_argument("--mid", type=int, metavar="M_MID")
    sp = sub.add_parser("obstacle", parents=[common], help="circle obstacle sweep")
    sp.add_argument("--n-grid", dest="n_grid", type=int)
    sp.add_argument("--center", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--eps", type=str, help="comma list; suffix h scales by grid spacing")
    sp = sub.add_parser("report", parents=[common], help="aggregate artifacts in the output directory")
    return p


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    file_values: dict = {}
    if getattr(args, "config", None):
        file_values = _load_config_file(args.config)

    def pick(field, flag_value, file_key=None):
        if flag_value is not None:
            return flag_value
        key = file_key or field
        if key in file_values:
            return file_values[key]
        return getattr(cfg, field)

    cfg = replace(
        cfg,
        model=pick("model", getattr(args, "model", None)),
        level=pick("level", getattr(args, "level", None)),
        fine=pick("fine", getattr(args, "fine", None)),
        mid=pick("mid", getattr(args, "mid", None)),
        k=pick("k", getattr(args, "k", None)),
        reference=pick("reference", getattr(args, "reference", None)),
        theta=pick("theta", getattr(args, "theta", None)),
        n_grid=pick("n_grid", getattr(args, "n_grid", None)),
        center=pick("center", getattr(args, "center", None)),
        alpha=pick("alpha", getattr(args, "alpha", None)),
        out=pick("out", getattr(args, "out", None)),
        cache_dir=pick("cache_dir", getattr(args, "cache_dir", None)),
        seed=pick("seed", getattr(args, "seed", None)),
    )
    levels_flag = getattr(args, "levels", None)
    if levels_flag is not None:
        cfg = replace(cfg, levels=_parse_int_list(levels_flag))
    elif "levels" in file_values:
        cfg = replace(cfg, levels=tuple(file_values["levels"]))
    z_flag = getattr(args, "z", None)
    if z_flag is not None:
        cfg = replace(cfg, z_points=_parse_complex_list(z_flag))
    elif "z_points" in file_values:
        cfg = replace(cfg, z_points=tuple(file_values["z_points"]))
    times_flag = getattr(args, "times", None)
    if times_flag is not None:
        cfg = replace(cfg, times=_parse_float_list(times_flag))
    elif "times" in file_values:
        cfg = replace(cfg, times=tuple(file_values["times"]))
    window_flag = getattr(args, "window", None)
    if window_flag:
        cfg = replace(
            cfg, windows=tuple(w for s in window_flag for w in _parse_windows(s))
        )
    elif "windows" in file_values:
        cfg = replace(cfg, windows=tuple(file_values["windows"]))
    h = 1.0 / cfg.n_grid
    eps_flag = getattr(args, "eps", None)
    if eps_flag is not None:
        cfg = replace(cfg, eps_list=_parse_eps_list(eps_flag, h))
    elif "eps_raw" in file_values:
        cfg = replace(cfg, eps_list=_parse_eps_list(file_values["eps_raw"], h))
    return cfg


# deterministic serialization


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        if x.imag == 0:
            return "%.17g" % x.real
        return "%.17g%+.17gj" % (x.real, x.imag)
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path: str, header, rows, meta: dict) -> None:
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable_tree(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _jsonable_tree(v):
    if isinstance(v, dict):
        return {str(k): _jsonable_tree(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable_tree(x) for x in v]
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _meta(cfg: RunConfig, schema: str) -> dict:
    return {"schema": schema, "config_hash": cfg.hash(), "seed": cfg.seed}


def _save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _new_figure():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "que"
    return plt.figure(figsize=(6.0, 4.0))


# pencil/decomposition cache


def _cached_pencil(cfg: RunConfig, model: models.FractalModel, m: int) -> forms.FormPencil:
    cache = cfg.effective_cache_dir()
    os.makedirs(cache, exist_ok=True)
    path = os.path.join(cache, f"pencil_v1_{model.name}_{m}.json")
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            pencil = forms.pencil_from_json(doc)
            if pencil.n != models.vertex_count(model, m):
                raise DomainError("cached pencil has wrong size")
            pencil.graph = models.build_level(model, m)
            return pencil
        except (OSError, ValueError, KeyError, QueError) as e:
            print(
                f"warning: cache file {path} unusable ({e}); rebuilding",
                file=sys.stderr,
            )
    pencil = forms.level_pencil(model, m)
    doc = forms.pencil_to_json(pencil)
    doc["meta"] = _meta(cfg, "pencil/1")
    write_json(path, doc)
    return pencil


def _cached_spectral(cfg: RunConfig, pencil: forms.FormPencil, model, m):
    if pencil._spectral is not None:
        return pencil._spectral
    cache = cfg.effective_cache_dir()
    os.makedirs(cache, exist_ok=True)
    path = os.path.join(cache, f"decomp_v1_{model.name}_{m}.npz")
    if os.path.exists(path):
        try:
            data = np.load(path, allow_pickle=False)
            lam, vec = data["eigenvalues"], data["vectors"]
            if lam.shape[0] == pencil.n and vec.shape == (pencil.n, pencil.n):
                dec = spectral.SpectralDecomposition(
                    eigenvalues=lam, vectors=vec, pencil=pencil
                )
                pencil._spectral = dec
                return dec
            raise DomainError("cached decomposition has wrong shape")
        except (OSError, ValueError, KeyError, QueError) as e:
            print(
                f"warning: cache file {path} unusable ({e}); recomputing",
                file=sys.stderr,
            )
    dec = spectral.eigensolve(pencil)
    np.savez(path, eigenvalues=dec.eigenvalues, vectors=dec.vectors)
    return dec


def _out_dir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _model(cfg: RunConfig) -> models.FractalModel:
    return models.by_name(cfg.model)


def _pair_levels(cfg: RunConfig, model: models.FractalModel):
    m = cfg.level
    M = cfg.fine
    if M is None:
        M = min(m + model.default_fine_offset, model.max_level)
    return m, M


# commands


def cmd_build(cfg: RunConfig) -> int:
    model = _model(cfg)
    out = _out_dir(cfg)
    levels = cfg.levels if cfg.levels else (cfg.level,)
    for m in levels:
        graph = models.build_level(model, m)
        doc = graph.to_json()
        doc["meta"] = _meta(cfg, "levelgraph/1")
        path = os.path.join(out, f"levelgraph_{model.name}_{m}.json")
        write_json(path, doc)
        print(f"wrote {path}")
        _cached_pencil(cfg, model, m)
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    model = _model(cfg)
    out = _out_dir(cfg)
    m, M = _pair_levels(cfg, model)
    pair = identify.build_identification(model, m, M)
    cert = run_certify(pair)
    op = operator_level_certificate(pair, cert)

    rng = np.random.default_rng(cfg.seed)
    adj = 0.0
    en = 0.0
    for _ in range(20):
        f = rng.standard_normal(pair.coarse.n)
        u = rng.standard_normal(pair.fine.n)
        jf = pair.J @ f
        lhs = float(np.sum(jf * pair.fine.M * u))
        rhs = float(np.sum(f * pair.coarse.M * (pair.Jp @ u)))
        scale = pair.fine.mass_norm(jf) * pair.fine.mass_norm(u) + 1e-300
        adj = max(adj, abs(lhs - rhs) / scale)
        ef = pair.coarse.energy(f)
        en = max(en, abs(pair.fine.energy(jf) - ef) / (ef + 1e-300))
    spot = {"count": 20, "adjoint_defect": adj, "energy_defect": en,
            "pass": adj <= 1e-12 and en <= 1e-10}

    doc = cert.to_json()
    doc["operator_level"] = op
    doc["spot_checks"] = spot
    doc["meta"] = _meta(cfg, "que-cert/1")
    path = os.path.join(out, f"cert_{model.name}_{m}_{M}.json")
    write_json(path, doc)
    print(f"wrote {path}")
    ok = cert.delta_total <= cert.theory_bound * (1.0 + 1e-8)
    print(
        f"{model.name} m={m} M={M} delta_total={cert.delta_total:.6g} "
        f"bound={cert.theory_bound:.6g} ok={'yes' if ok else 'NO'}"
    )
    if not ok or not op["resolvent_ok"] or not op["jp_ok"] or not spot["pass"]:
        print("bound violation detected", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    model = _model(cfg)
    out = _out_dir(cfg)
    m = cfg.level
    pencil = _cached_pencil(cfg, model, m)
    k = cfg.k if cfg.k is not None else pencil.n
    dec = spectral.eigensolve(pencil, k)
    rows = [(i, float(lam)) for i, lam in enumerate(dec.eigenvalues)]
    path = os.path.join(out, f"spectrum_{model.name}_{m}.csv")
    meta = _meta(cfg, "spectrum-table/1")
    meta.update({"model": model.name, "level": m})
    write_csv(path, ("index", "eigenvalue"), rows, meta)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    model = _model(cfg)
    out = _out_dir(cfg)
    levels = cfg.levels if cfg.levels else tuple(range(1, model.max_level + 1))
    k = cfg.k if cfg.k is not None else 1
    table = spectral.convergence_table(model, levels, k, cfg.reference)
    rows = [
        (
            r["level"],
            r["lambda"],
            r["error"],
            r["fitted_C"],
            model.theory_delta(r["level"]),
        )
        for r in table["rows"]
    ]
    path = os.path.join(out, f"converge_{model.name}_k{k}.csv")
    meta = _meta(cfg, "converge-table/1")
    meta.update(
        {
            "model": model.name,
            "k": k,
            "reference": table["reference"],
            "reference_value": _fmt(table["reference_value"]),
            "slope_log2": _fmt(table["slope_log2"]),
            "fitted_C": _fmt(table["fitted_C"]),
        }
    )
    write_csv(path, ("level", "lambda", "error", "fitted_C", "theory_delta"), rows, meta)
    print(f"wrote {path}")

    fig = _new_figure()
    ax = fig.add_subplot(111)
    ms = [r["level"] for r in table["rows"]]
    errs = [r["error"] for r in table["rows"] if r["error"] > 0]
    ems = [r["level"] for r in table["rows"] if r["error"] > 0]
    if errs:
        ax.semilogy(ems, errs, "o-", label=f"|lambda_{k} error|")
    ax.semilogy(
        ms,
        [model.theory_delta(m) for m in ms],
        "--",
        label="proven delta rate",
    )
    ax.set_xlabel("level m")
    ax.set_ylabel("error")
    ax.legend()
    ax.set_title(f"{model.name}: eigenvalue {k} convergence")
    svg = os.path.join(out, f"converge_{model.name}_k{k}.svg")
    _save_svg(fig, svg)
    print(f"wrote {svg}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    model = _model(cfg)
    out = _out_dir(cfg)
    m, M = _pair_levels(cfg, model)
    pair = identify.build_identification(model, m, M)
    # share cached decompositions across the comparisons
    _cached_spectral(cfg, pair.coarse, model, m)
    _cached_spectral(cfg, pair.fine, model, M)
    cert = run_certify(pair)
    rows = []
    violations = 0
    for z in cfg.z_points:
        r = spectral.resolvent_comparison(pair, cert, z)
        rows.append(("resolvent", _fmt(z), r["constant"], r["norm"], r["bound"], r["ok"]))
        violations += not r["ok"]
    for t in cfg.times:
        r = spectral.heat_comparison(pair, cert, t, cfg.theta)
        rows.append(("heat", _fmt(t), r["constant"], r["norm"], r["bound"], r["ok"]))
        violations += not r["ok"]
    for a, b in cfg.windows:
        r = spectral.projection_comparison(pair, cert, a, b)
        rows.append(
            (
                "projection_intertwine",
                f"({_fmt(a)};{_fmt(b)})",
                r["C_eta"],
                r["norm_intertwine"],
                r["bound_intertwine"],
                r["ok_intertwine"],
            )
        )
        rows.append(
            (
                "projection_sandwich",
                f"({_fmt(a)};{_fmt(b)})",
                r["C_eta_prime"],
                r["norm_sandwich"],
                r["bound_sandwich"],
                r["ok_sandwich"],
            )
        )
        violations += (not r["ok_intertwine"]) + (not r["ok_sandwich"])
    path = os.path.join(out, f"compare_{model.name}_{m}_{M}.csv")
    meta = _meta(cfg, "compare-table/1")
    meta.update(
        {
            "model": model.name,
            "m": m,
            "M": M,
            "delta_total": _fmt(cert.delta_total),
            "theta": _fmt(cfg.theta),
        }
    )
    write_csv(path, ("kind", "param", "constant", "norm", "bound", "ok"), rows, meta)
    print(f"wrote {path}")
    if violations:
        print(f"{violations} bound violations detected", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_compose(cfg: RunConfig) -> int:
    model = _model(cfg)
    out = _out_dir(cfg)
    m = cfg.level
    mid = cfg.mid
    M = cfg.fine
    if mid is None or M is None:
        raise ConfigError("compose needs --level, --mid and --fine")
    pair_ab = identify.build_identification(model, m, mid)
    pair_bc = identify.build_identification(model, mid, M)
    cert_ab = run_certify(pair_ab)
    cert_bc = run_certify(pair_bc)
    composed, bound, cert_hat = compose(pair_ab, cert_ab, pair_bc, cert_bc)

    dh_ab = delta_hat_from_delta(cert_ab.delta_total)
    dh_bc = delta_hat_from_delta(cert_bc.delta_total)
    dh_comp = delta_hat_from_delta(cert_hat.delta_total)
    op_ok = True
    op_report: dict = {"delta_hat_ab": dh_ab, "delta_hat_bc": dh_bc,
                       "delta_hat_composed": dh_comp}
    if dh_ab <= 1.0 and dh_bc <= 1.0:
        op_bound = operator_transitivity_bound(dh_ab, dh_bc)
        op_ok = dh_comp <= op_bound * (1.0 + 1e-8)
        op_report.update({"bound": op_bound, "ok": op_ok})
    else:
        op_report.update({"bound": None, "ok": None,
                          "note": "factor defects exceed 1; bound not applicable"})

    form_ok = cert_hat.delta_total <= bound * (1.0 + 1e-8)
    doc = {
        "schema": "compose-report/1",
        "model": model.name,
        "levels": [m, mid, M],
        "delta_ab": cert_ab.delta_total,
        "delta_bc": cert_bc.delta_total,
        "form_bound": bound,
        "delta_composed": cert_hat.delta_total,
        "form_ok": form_ok,
        "operator": op_report,
        "certificate": cert_hat.to_json(),
        "meta": _meta(cfg, "compose-report/1"),
    }
    path = os.path.join(out, f"compose_{model.name}_{m}_{mid}_{M}.json")
    write_json(path, doc)
    print(f"wrote {path}")
    print(
        f"{model.name} {m}->{mid}->{M} certified={cert_hat.delta_total:.6g} "
        f"bound={bound:.6g} ok={'yes' if form_ok else 'NO'}"
    )
    if not form_ok or op_ok is False:
        print("bound violation detected", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_obstacle(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    N = cfg.n_grid
    h = 1.0 / N
    eps_list = cfg.eps_list if cfg.eps_list else (4 * h, 8 * h, 16 * h)
    rows_raw = obstacle_mod.sweep_obstacle(N, cfg.center, cfg.alpha, eps_list)
    rows = [
        (
            r["eps"],
            r["alpha"],
            r["delta"],
            r["C_ext"],
            r["C_ell_reg"],
            r["closeness"],
            r["closeness_bound"],
            r["ok"],
        )
        for r in rows_raw
    ]
    slope = obstacle_mod.fit_loglog_slope(
        [r["eps"] for r in rows_raw], [r["delta"] for r in rows_raw]
    )
    path = os.path.join(out, f"obstacle_N{N}.csv")
    meta = _meta(cfg, "obstacle-sweep/1")
    meta.update({"N": N, "center": cfg.center, "delta_slope": _fmt(slope)})
    write_csv(
        path,
        ("eps", "alpha", "delta_measured", "C_ext", "C_ell_reg",
         "closeness_measured", "bound", "ok"),
        rows,
        meta,
    )
    print(f"wrote {path}")

    fig = _new_figure()
    ax = fig.add_subplot(111)
    ax.loglog([r["eps"] for r in rows_raw], [r["delta"] for r in rows_raw], "o-",
              label=f"measured delta (slope {slope:.3f})")
    ax.loglog(
        [r["eps"] for r in rows_raw],
        [math.sqrt(r["eps"]) * rows_raw[0]["delta"] / math.sqrt(rows_raw[0]["eps"])
         for r in rows_raw],
        "--",
        label="slope 1/2 reference",
    )
    ax.set_xlabel("obstacle radius eps")
    ax.set_ylabel("smallness delta")
    ax.legend()
    ax.set_title(f"circle obstacle sweep, N={N}")
    svg = os.path.join(out, f"obstacle_N{N}.svg")
    _save_svg(fig, svg)
    print(f"wrote {svg}")
    if any(not r["ok"] for r in rows_raw):
        print("bound violation detected", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    artifacts = []
    certs = []
    for name in sorted(os.listdir(out)):
        path = os.path.join(out, name)
        if not os.path.isfile(path):
            continue
        kind = None
        if name.endswith(".json"):
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                kind = doc.get("schema")
                if kind == "que-cert/1":
                    certs.append(certificate_from_json(doc))
            except (ValueError, KeyError, QueError):
                kind = "unreadable"
        elif name.endswith(".csv"):
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    first = fh.readline().strip()
                kind = first.removeprefix("# schema: ") if first.startswith("# schema:") else "csv"
            except OSError:
                kind = "unreadable"
        else:
            continue
        artifacts.append({"file": name, "schema": kind})

    verdicts = {}
    insufficient = {}
    by_model: dict = {}
    for c in sorted(certs, key=lambda c: (c.model, c.m, c.M)):
        by_model.setdefault(c.model, {})
        if c.m not in by_model[c.model]:
            by_model[c.model][c.m] = c
    for model_name, level_map in sorted(by_model.items()):
        series = [level_map[m] for m in sorted(level_map)]
        if len(series) >= 3:
            verdicts[model_name] = gnrs_verdict(series)
        else:
            insufficient[model_name] = len(series)

    note = (
        "Closeness is certified between a coarse level and the finest "
        "computed level, which stands in for the limit space; the "
        "transitivity bound controls the remaining gap at the same rate."
    )
    doc = {
        "schema": "report/1",
        "artifacts": artifacts,
        "verdicts": verdicts,
        "insufficient": insufficient,
        "fine_level_note": note,
        "meta": _meta(cfg, "report/1"),
    }
    path = os.path.join(out, "report.json")
    write_json(path, doc)

    lines = ["# Certification report", "", note, "", "## Artifacts", ""]
    if artifacts:
        for a in artifacts:
            lines.append(f"- `{a['file']}` ({a['schema']})")
    else:
        lines.append("- none")
    lines += ["", "## Convergence verdicts", ""]
    if verdicts or insufficient:
        for model_name, v in sorted(verdicts.items()):
            lines.append(
                f"- {model_name}: levels {v['levels']}, slope (base {v['base']:g}) "
                f"{v['slope']:.3f}, {v['verdict']}"
            )
        for model_name, count in sorted(insufficient.items()):
            lines.append(
                f"- {model_name}: {count} certificate(s), "
                "not enough for a verdict"
            )
    else:
        lines.append("- not enough certificates for a verdict")
    md = os.path.join(out, "report.md")
    with open(md, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    print(f"wrote {md}")
    return EXIT_OK


_COMMANDS = {
    "build": cmd_build,
    "certify": cmd_certify,
    "spectrum": cmd_spectrum,
    "converge": cmd_converge,
    "compare": cmd_compare,
    "compose": cmd_compose,
    "obstacle": cmd_obstacle,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BoundViolationError as e:
        print(f"bound violated: {e}", file=sys.stderr)
        return EXIT_BOUND
    except NumericsError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
