"""Command-line front end.

Subcommands: cov, sample, check-assumptions, max-stats, tail, pairs, loc,
dmart, xi, barrier, gstar, limit-compare, clrem-w.

Every output starts with a header embedding the tool version and the full
resolved configuration (JSON), so any output file can be re-derived
bit-identically from its own header.  No timestamps, no hostnames.

Option precedence: command-line flag > config file (--config, KEY=VALUE
lines) > environment (LCGF_SEED, LCGF_WORKERS) > built-in default.

Exit codes: 0 success; 1 input error (incl. usage); 2 numerical/domain
error (not-positive-definite, negative correction variance, invalid
parameter regimes); 3 insufficient data.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__, rng
from .approx import XiParams, build_xi, count_barrier_events, fine_field, fine_right_tail
from .assumptions import check_a0, check_a1, estimate_fgh
from .covariance import (
    DenseCovariance,
    FieldSpec,
    build_dense,
    cholesky,
    clrem_matrix,
    find_minimal_w,
    oracle_for,
    save_dense,
    save_dense_csv,
)
from .errors import DomainError, InputError, InsufficientDataError, LcgfError
from .extremes import derivative_martingale, m_n, max_stat, near_max_pairs, restricted_pair_max
from .limitlaw import (
    EmpiricalDistribution,
    GStarParams,
    GumbelMixture,
    compare_to_limit,
    sample_gstar,
    tail_slope,
)
from .perturb import BoxPerturbation, shift_check
from .samplers import ReplicaPlan, SampledField, sample_field, save_field

_FIELD_FAMILIES = ("brw", "mbrw", "clrem")


class _Parser(argparse.ArgumentParser):
    """argparse that raises InputError instead of exiting with its own code."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}\n{self.format_usage()}")


# ---------------------------------------------------------------------------
# option resolution
# ---------------------------------------------------------------------------

def _load_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"bad config line (need KEY=VALUE): {line!r}")
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _resolve(args: argparse.Namespace, spec_table: dict) -> dict:
    """Fold flag / config-file / env / default into one dict.

    ``spec_table`` maps dest -> (type, default).  Flags parse to None when
    absent so the fallback chain is observable.
    """
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    env_map = {"seed": "LCGF_SEED", "workers": "LCGF_WORKERS"}
    resolved = {}
    for dest, (typ, default) in spec_table.items():
        val = getattr(args, dest, None)
        if val is None and dest in file_cfg:
            raw = file_cfg[dest]
            val = (raw.lower() in ("1", "true", "yes")) if typ is bool else typ(raw)
        if val is None and dest in env_map and env_map[dest] in os.environ:
            val = typ(os.environ[env_map[dest]])
        if val is None:
            val = default
        resolved[dest] = val
    return resolved


def _header(cmd: str, cfg: dict) -> str:
    blob = json.dumps({k: v for k, v in sorted(cfg.items()) if v is not None},
                      sort_keys=True, default=str)
    return f"# lcgf {__version__}\n# command {cmd}\n# config {blob}\n"


class _Out:
    """Buffered writer so headers and rows land atomically in file or stdout."""

    def __init__(self, path):
        self.path = path
        self.buf = io.StringIO()

    def write(self, s):
        self.buf.write(s)

    def close(self):
        data = self.buf.getvalue()
        if self.path in (None, "-"):
            sys.stdout.write(data)
        else:
            with open(self.path, "w") as fh:
                fh.write(data)


def _field_spec(cfg) -> FieldSpec:
    family = cfg["family"]
    if family not in _FIELD_FAMILIES:
        raise InputError(f"family must be one of {_FIELD_FAMILIES}")
    n = cfg.get("n")
    if n is None:
        N = cfg.get("N")
        if N is None:
            raise InputError("need -n (or -N, a power of two)")
        n = int(N).bit_length() - 1
        if (1 << n) != int(N):
            raise InputError(f"N={N} is not a power of two")
    if family == "clrem":
        w = cfg.get("W")
        if w is None:
            raise InputError("clrem needs -W")
        return FieldSpec("clrem", 1, int(n), W=float(w))
    return FieldSpec(family, int(cfg["d"]), int(n))


def _xi_params(cfg) -> XiParams:
    return XiParams(
        d=int(cfg["d"]), n=int(cfg["n"]), k=int(cfg["k"]), l=int(cfg["l"]),
        k_prime=int(cfg["k_prime"]), l_prime=int(cfg["l_prime"]),
        alpha=cfg.get("alpha"), reference=cfg.get("reference", "mbrw"),
    )


def _parse_point(text: str) -> tuple:
    return tuple(int(p) for p in text.split(","))


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_cov(args):
    table = {
        "family": (str, None), "d": (int, 1), "n": (int, None), "N": (int, None),
        "W": (float, None), "x": (str, None), "y": (str, None),
        "k": (int, None), "l": (int, None),
        "export_matrix": (str, None), "export_csv": (str, None),
    }
    cfg = _resolve(args, table)
    spec = _field_spec(cfg)
    oracle = oracle_for(spec)
    out = _Out(getattr(args, "out", None))
    out.write(_header("cov", cfg))
    if cfg["export_matrix"] or cfg["export_csv"]:
        pts = np.stack(np.unravel_index(np.arange(spec.npoints), (spec.N,) * spec.d), axis=1)
        dense = build_dense(oracle, [tuple(p) for p in pts])
        if cfg["export_matrix"]:
            save_dense(dense, cfg["export_matrix"], d=spec.d)
            out.write(f"matrix,{cfg['export_matrix']},{dense.size}\n")
        if cfg["export_csv"]:
            save_dense_csv(dense, cfg["export_csv"])
            out.write(f"matrix_csv,{cfg['export_csv']},{dense.size}\n")
    else:
        if spec.family == "clrem":
            if cfg["k"] is None or cfg["l"] is None:
                raise InputError("clrem query needs --k and --l")
            val = oracle((cfg["k"],), (cfg["l"],))
        else:
            if cfg["x"] is None or cfg["y"] is None:
                raise InputError("query needs --x and --y (comma-separated coords)")
            val = oracle(_parse_point(cfg["x"]), _parse_point(cfg["y"]))
        out.write(f"{val:.6f}\n")
    out.close()
    return 0


def _cmd_sample(args):
    table = {
        "family": (str, None), "d": (int, 1), "n": (int, None), "N": (int, None),
        "W": (float, None), "seed": (int, 0), "replicas": (int, 1),
        "format": (str, "csv"), "prefix": (str, None),
    }
    cfg = _resolve(args, table)
    spec = _field_spec(cfg)
    plan = ReplicaPlan(spec, cfg["replicas"], cfg["seed"])
    out = _Out(getattr(args, "out", None))
    out.write(_header("sample", cfg))
    if cfg["format"] == "bin":
        if not cfg["prefix"]:
            raise InputError("binary export needs --prefix")
        for i in range(plan.count):
            f = sample_field(spec, plan.seed_for(i))
            path = f"{cfg['prefix']}_{i}.fld"
            save_field(f, path)
            out.write(f"{i},{path}\n")
    else:
        out.write("replica,site,value\n")
        for i in range(plan.count):
            f = sample_field(spec, plan.seed_for(i))
            for flat, v in enumerate(f.values):
                out.write(f"{i},{flat},{v!r}\n")
    out.close()
    return 0


def _cmd_check_assumptions(args):
    table = {
        "family": (str, None), "d": (int, 1), "n": (int, None), "N": (int, None),
        "W": (float, None), "which": (str, "a1"), "delta": (float, 0.0),
        "pair_budget": (int, 200_000), "L": (int, 3), "sizes": (str, None),
    }
    cfg = _resolve(args, table)
    out = _Out(getattr(args, "out", None))
    which = cfg["which"]
    payload = {"assumption": which}
    if which in ("a0", "a1"):
        spec = _field_spec(cfg)
        oracle = oracle_for(spec)
        if which == "a0":
            est, wit = check_a0(oracle, spec, cfg["pair_budget"])
        else:
            est, wit = check_a1(oracle, spec, cfg["delta"], cfg["pair_budget"])
        payload["estimate"] = est
        payload["witnesses"] = [
            {"u": list(w.u), "v": list(w.v), "dev": w.deviation} for w in wit
        ]
    elif which == "fgh":
        if not cfg["sizes"]:
            raise InputError("fgh needs --sizes N1,N2,... (ascending)")
        sizes = [int(s) for s in cfg["sizes"].split(",")]
        family, d = cfg["family"], int(cfg["d"])

        def at(N):
            n = N.bit_length() - 1
            spec = (FieldSpec("clrem", 1, n, W=cfg["W"]) if family == "clrem"
                    else FieldSpec(family, d, n))
            return oracle_for(spec)

        fit = estimate_fgh(at, sizes, L=cfg["L"], delta=cfg["delta"] or 0.125)
        payload["grids"] = {
            "f": {str(k): v for k, v in fit.f_hat.items()},
            "g": {str(k): v for k, v in fit.g_hat.items()},
            "h": {str(k): v for k, v in fit.h_hat.items()},
        }
        payload["stability"] = fit.stability
        payload["reproduction_error"] = fit.reproduction_error
    else:
        raise InputError("--which must be a0, a1 or fgh")
    out.write(_header("check-assumptions", cfg))
    out.write(json.dumps(payload, sort_keys=True) + "\n")
    out.close()
    return 0


def _replica_csv_cmd(name, stat_rows):
    """Shared max-stats / pairs / loc / dmart runner: CSV of per-replica rows."""

    def run(args, extra_table):
        table = {
            "family": (str, None), "d": (int, 1), "n": (int, None), "N": (int, None),
            "W": (float, None), "seed": (int, 0), "replicas": (int, 1),
            "workers": (int, 1),
        }
        table.update(extra_table)
        cfg = _resolve(args, table)
        spec = _field_spec(cfg)
        out = _Out(getattr(args, "out", None))
        out.write(_header(name, cfg))
        out.write("replica,statistic,value,coords\n")
        plan = ReplicaPlan(spec, cfg["replicas"], cfg["seed"])
        for i in range(plan.count):
            f = sample_field(spec, plan.seed_for(i))
            for stat, value, coords in stat_rows(f, cfg):
                out.write(f"{i},{stat},{value!r},{coords}\n")
        out.close()
        return 0

    return run


def _max_rows(f, cfg):
    ms = max_stat(f)
    yield "max", ms.max_value, ";".join(map(str, ms.argmax))
    yield "centered", ms.centered, ""


def _pair_rows(f, cfg):
    ps = restricted_pair_max(f, cfg["r"])
    u, v = ps.pair
    yield "pair-max", ps.value, ";".join(map(str, u)) + "|" + ";".join(map(str, v))


def _loc_rows(f, cfg):
    rep = near_max_pairs(f, cfg["r"], cfg["c"])
    yield "near-max-count", rep.pair_count, ""
    yield "near-max-threshold", rep.threshold, ""


def _dmart_rows(f, cfg):
    yield "derivative-martingale", derivative_martingale(f).z, ""


def _cmd_tail(args):
    table = {
        "family": (str, None), "d": (int, 1), "n": (int, None), "N": (int, None),
        "W": (float, None), "seed": (int, 0), "replicas": (int, 200),
        "z_lo": (float, 1.0), "z_hi": (float, 3.5), "z_steps": (int, 11),
        "workers": (int, 1),
    }
    cfg = _resolve(args, table)
    spec = _field_spec(cfg)
    plan = ReplicaPlan(spec, cfg["replicas"], cfg["seed"])
    centered = np.empty(plan.count)
    for i in range(plan.count):
        centered[i] = max_stat(sample_field(spec, plan.seed_for(i))).centered
    ecdf = EmpiricalDistribution(centered)
    zs = np.linspace(cfg["z_lo"], cfg["z_hi"], cfg["z_steps"])
    out = _Out(getattr(args, "out", None))
    out.write(_header("tail", cfg))
    out.write("z,p_hat,log_tail_over_z\n")
    for z in zs:
        p = float(ecdf.survival(z))
        ratio = math.log(p / z) if p > 0 else float("nan")
        out.write(f"{z!r},{p!r},{ratio!r}\n")
    fit = tail_slope(ecdf, (cfg["z_lo"], cfg["z_hi"]))
    out.write(f"# tail_slope {fit.slope!r} stderr {fit.stderr!r} points {fit.n_points}\n")
    out.close()
    return 0


def _cmd_xi(args):
    table = {
        "d": (int, 1), "n": (int, None), "k": (int, 0), "l": (int, 0),
        "k_prime": (int, 0), "l_prime": (int, 0), "alpha": (float, None),
        "reference": (str, "mbrw"), "seed": (int, 0), "replicas": (int, 1),
        "export_prefix": (str, None),
    }
    cfg = _resolve(args, table)
    params = _xi_params(cfg)
    out = _Out(getattr(args, "out", None))
    out.write(_header("xi", cfg))
    out.write("replica,statistic,value,coords\n")
    for i in range(cfg["replicas"]):
        xi = build_xi(params, rng.replica_seed(cfg["seed"], i))
        if cfg["export_prefix"]:
            path = f"{cfg['export_prefix']}_{i}.xifld"
            save_xi_components(xi, path)
            out.write(f"{i},export,0,{path}\n")
        out.write(f"{i},total-max,{float(xi.total.max())!r},\n")
        out.write(f"{i},fine-max,{float(fine_field(xi).max())!r},\n")
    out.close()
    return 0


def save_xi_components(xi, path):
    """Field-binary records, each extended with one component index byte.

    Component order: 0 coarse, 1 bottom, 2 mid-scale, 3 correction, 4 total.
    """
    import struct

    comps = [xi.coarse, xi.bottom, xi.mbrw_part, xi.correction, xi.total]
    with open(path, "wb") as fh:
        for idx, arr in enumerate(comps):
            fh.write(b"LCGFFLD1")
            fh.write(struct.pack("<IIQB", xi.params.d, xi.params.N, xi.seed, idx))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_xi_components(path):
    import struct

    comps = {}
    with open(path, "rb") as fh:
        while True:
            magic = fh.read(8)
            if not magic:
                break
            if magic != b"LCGFFLD1":
                raise InputError(f"bad magic {magic!r}")
            d, N, seed, idx = struct.unpack("<IIQB", fh.read(17))
            comps[idx] = np.frombuffer(fh.read(8 * N ** d), dtype="<f8").astype(float)
    return comps


def _cmd_barrier(args):
    table = {
        "d": (int, 1), "n": (int, None), "k": (int, 0), "l": (int, 0),
        "k_prime": (int, 0), "l_prime": (int, 0), "alpha": (float, None),
        "reference": (str, "mbrw"), "seed": (int, 0), "replicas": (int, 1),
        "z": (float, 1.0),
    }
    cfg = _resolve(args, table)
    params = _xi_params(cfg)
    out = _Out(getattr(args, "out", None))
    out.write(_header("barrier", cfg))
    out.write("replica,z,lambda,gamma,g_event\n")
    for i in range(cfg["replicas"]):
        xi = build_xi(params, rng.replica_seed(cfg["seed"], i))
        bc = count_barrier_events(xi, cfg["z"])
        out.write(f"{i},{bc.z!r},{bc.lam},{bc.gamma_count},{int(bc.g_event)}\n")
    out.close()
    return 0


def _cmd_gstar(args):
    table = {
        "d": (int, 2), "k": (int, 1), "l": (int, 1), "beta_star": (float, 1.0),
        "gamma": (float, None), "draws": (int, 1), "seed": (int, 0),
        "coarse_family": (str, "mbrw"),
    }
    cfg = _resolve(args, table)
    gamma = cfg["gamma"]
    if gamma is None:
        kl = 1 << (cfg["k"] + cfg["l"])
        gamma = default_gamma(kl, cfg["d"])
        cfg["gamma"] = gamma
    params = GStarParams(k=cfg["k"], l=cfg["l"], d=cfg["d"],
                         beta_star=cfg["beta_star"], gamma=gamma,
                         coarse_family=cfg["coarse_family"])
    out = _Out(getattr(args, "out", None))
    out.write(_header("gstar", cfg))
    out.write("draw,value,empty\n")
    for i in range(cfg["draws"]):
        dr = sample_gstar(params, rng.replica_seed(cfg["seed"], i))
        out.write(f"{i},{dr.value!r},{int(dr.empty)}\n")
    out.close()
    return 0


def default_gamma(KL: int, d: int) -> float:
    """Slowly growing threshold: max(1/sqrt(2d) + 0.1, log log log KL)."""
    base = 1.0 / math.sqrt(2.0 * d) + 0.1
    lll = -math.inf
    if KL > 15:  # log log KL > 1 needed before the triple log is real
        ll = math.log(math.log(KL))
        if ll > 0:
            lll = math.log(ll) if ll > 1 else -math.inf
    return max(base, lll)


def _cmd_limit_compare(args):
    table = {
        "empirical": (str, None), "z_samples": (str, None),
        "beta_star": (float, 1.0), "d": (int, 2),
    }
    cfg = _resolve(args, table)
    if not cfg["empirical"] or not cfg["z_samples"]:
        raise InputError("need --empirical and --z-samples (files of one value per line)")
    emp = EmpiricalDistribution(np.loadtxt(cfg["empirical"], ndmin=1))
    zs = np.asarray(np.loadtxt(cfg["z_samples"], ndmin=1), dtype=float)
    neg_frac = float(np.mean(zs <= 0))
    mix = GumbelMixture(cfg["beta_star"], EmpiricalDistribution(zs[zs > 0]), d=cfg["d"])
    res = compare_to_limit(emp, mix)
    out = _Out(getattr(args, "out", None))
    out.write(_header("limit-compare", cfg))
    out.write(json.dumps({
        "beta_star": cfg["beta_star"],
        "shift": res.shift,
        "levy_after_shift": res.levy_after_shift,
        "n_samples": emp.size,
        "flags": {"negative_z_fraction": neg_frac},
    }, sort_keys=True) + "\n")
    out.close()
    return 0


def _cmd_clrem_w(args):
    table = {"N": (int, None), "tol": (float, 1e-6)}
    cfg = _resolve(args, table)
    if cfg["N"] is None:
        raise InputError("need -N")
    w = find_minimal_w(cfg["N"], cfg["tol"])
    out = _Out(getattr(args, "out", None))
    out.write(_header("clrem-w", cfg))
    out.write(f"{w!r}\n")
    out.close()
    return 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="KEY=VALUE config file; flags override it")
    p.add_argument("--out", help="output path ('-' or omit for stdout)")


def _add_field_flags(p):
    p.add_argument("--family", choices=_FIELD_FAMILIES, help="field family")
    p.add_argument("-d", type=int, dest="d", help="lattice dimension")
    p.add_argument("-n", type=int, dest="n", help="size exponent, N = 2^n")
    p.add_argument("-N", type=int, dest="N", help="side length (power of two)")
    p.add_argument("-W", type=float, dest="W", help="clrem diagonal offset")


def _add_replica_flags(p):
    p.add_argument("--seed", type=int, help="master seed (env LCGF_SEED)")
    p.add_argument("--replicas", type=int, help="replica count")
    p.add_argument("--workers", type=int, help="parallel workers (env LCGF_WORKERS)")


def _add_xi_flags(p):
    p.add_argument("-d", type=int, dest="d")
    p.add_argument("-n", type=int, dest="n")
    p.add_argument("--k", type=int, dest="k")
    p.add_argument("--l", type=int, dest="l")
    p.add_argument("--k-prime", type=int, dest="k_prime")
    p.add_argument("--l-prime", type=int, dest="l_prime")
    p.add_argument("--alpha", type=float, dest="alpha")
    p.add_argument("--reference", dest="reference", choices=("mbrw", "brw"))
    p.add_argument("--seed", type=int)
    p.add_argument("--replicas", type=int)


def build_parser() -> _Parser:
    parser = _Parser(prog="lcgf", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"lcgf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cov", help="covariance oracle queries and matrix export")
    _add_field_flags(p)
    p.add_argument("--x", help="first point, comma-separated coords")
    p.add_argument("--y", help="second point")
    p.add_argument("--k", type=int, dest="k", help="clrem first index")
    p.add_argument("--l", type=int, dest="l", help="clrem second index")
    p.add_argument("--export-matrix", dest="export_matrix", help="binary matrix path")
    p.add_argument("--export-csv", dest="export_csv", help="CSV matrix path")
    _add_common(p)
    p.set_defaults(fn=_cmd_cov)

    p = sub.add_parser("sample", help="draw seeded field realizations")
    _add_field_flags(p)
    _add_replica_flags(p)
    p.add_argument("--format", choices=("csv", "bin"), help="output format")
    p.add_argument("--prefix", help="binary export path prefix")
    _add_common(p)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("check-assumptions", help="covariance profile certification")
    _add_field_flags(p)
    p.add_argument("--which", choices=("a0", "a1", "fgh"))
    p.add_argument("--delta", type=float, help="interior margin fraction")
    p.add_argument("--pair-budget", type=int, dest="pair_budget")
    p.add_argument("--L", type=int, dest="L", help="near-diagonal window")
    p.add_argument("--sizes", help="comma list of sizes for fgh")
    _add_common(p)
    p.set_defaults(fn=_cmd_check_assumptions)

    for name, rows, extra in (
        ("max-stats", _max_rows, {}),
        ("pairs", _pair_rows, {"r": (int, 2)}),
        ("loc", _loc_rows, {"r": (int, 4), "c": (float, 0.5)}),
        ("dmart", _dmart_rows, {}),
    ):
        p = sub.add_parser(name, help=f"per-replica {name} statistics (CSV)")
        _add_field_flags(p)
        _add_replica_flags(p)
        if "r" in extra:
            p.add_argument("--r", type=int, dest="r", help="separation scale")
        if "c" in extra:
            p.add_argument("--c", type=float, dest="c", help="threshold constant")
        _add_common(p)
        p.set_defaults(fn=(lambda a, rows=rows, extra=extra, name=name:
                           _replica_csv_cmd(name, rows)(a, extra)))

    p = sub.add_parser("tail", help="right-tail table of the centered maximum")
    _add_field_flags(p)
    _add_replica_flags(p)
    p.add_argument("--z-lo", type=float, dest="z_lo")
    p.add_argument("--z-hi", type=float, dest="z_hi")
    p.add_argument("--z-steps", type=int, dest="z_steps")
    _add_common(p)
    p.set_defaults(fn=_cmd_tail)

    p = sub.add_parser("xi", help="build approximation fields; export components")
    _add_xi_flags(p)
    p.add_argument("--export-prefix", dest="export_prefix")
    _add_common(p)
    p.set_defaults(fn=_cmd_xi)

    p = sub.add_parser("barrier", help="barrier-crossing counts on xi fields")
    _add_xi_flags(p)
    p.add_argument("--z", type=float, dest="z", help="barrier offset (>= 1)")
    _add_common(p)
    p.set_defaults(fn=_cmd_barrier)

    p = sub.add_parser("gstar", help="thinned-max limit construction draws")
    p.add_argument("-d", type=int, dest="d")
    p.add_argument("--k", type=int, dest="k")
    p.add_argument("--l", type=int, dest="l")
    p.add_argument("--beta-star", type=float, dest="beta_star")
    p.add_argument("--gamma", type=float, dest="gamma")
    p.add_argument("--draws", type=int, dest="draws")
    p.add_argument("--seed", type=int)
    p.add_argument("--coarse-family", dest="coarse_family", choices=("mbrw", "brw"))
    _add_common(p)
    p.set_defaults(fn=_cmd_gstar)

    p = sub.add_parser("limit-compare", help="empirical law vs Gumbel mixture")
    p.add_argument("--empirical", help="file of empirical values, one per line")
    p.add_argument("--z-samples", dest="z_samples", help="file of Z samples")
    p.add_argument("--beta-star", type=float, dest="beta_star")
    p.add_argument("-d", type=int, dest="d")
    _add_common(p)
    p.set_defaults(fn=_cmd_limit_compare)

    p = sub.add_parser("clrem-w", help="minimal PSD diagonal offset for clrem")
    p.add_argument("-N", type=int, dest="N")
    p.add_argument("--tol", type=float, dest="tol")
    _add_common(p)
    p.set_defaults(fn=_cmd_clrem_w)

    return parser


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DomainError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 2
    except InsufficientDataError as e:
        print(f"insufficient data: {e}", file=sys.stderr)
        return 3
    except LcgfError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return cli_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
