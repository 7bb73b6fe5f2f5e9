"""Command-line front door: config resolution, pipeline orchestration,
artifact emission, and caching.

Config is flat key=value under [character], [spec], [run] sections; any
flag overrides its config key.  Artifacts are csv (shortest round-trip
decimals) and JSON (UTF-8, sorted keys, no timestamps), each embedding the
hash of the resolved config, so identical config + seed + inputs reproduce
identical bytes.  Exit codes: 0 success, 1 validation error, 2 data error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .characters import CharacterError, DirichletCharacter, quadratic_character
from .distribution import (
    beta_k,
    exact_log_distribution,
    growth_envelope,
    ks_distance,
    variance_integral,
)
from .explicit import (
    CatalogMismatchError,
    explicit_sum_grid,
    fit_error_model,
    residue_coefficients,
    error_envelope,
)
from .kfree import (
    SieveRangeError,
    SummandSpec,
    cumulative_series,
    half_integer_grid,
    load_sieve,
    partial_sum,
    save_sieve,
    sieve_kfree,
)
from .limodel import (
    ModelAmplitudes,
    empirical_vs_model,
    fourier_nu,
    montgomery_bounds,
    sample_x,
    tail_probability,
)
from .special import EvalContext
from .zeros import (
    MissingDerivativeError,
    ZeroFileError,
    discrete_moment,
    enrich_catalog,
    moment_growth_fit,
    parse_zero_file,
    serialize_catalog,
    zero_count_check,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DATA = 2


class ValidationFailure(ValueError):
    pass


class DataFailure(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are a usage problem, not a data problem
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_VALIDATION)


@dataclass
class RunConfig:
    k: int = 2
    q: int = 3
    kind: str = "kronecker"
    d: int | None = None
    values: str | None = None
    modified: bool = False
    limit: int = 100_000
    seed: int = 20_240_101
    precision: int = 30
    em_cutoff_scale: float = 0.5
    zeros_file: str | None = None
    zeros_function: str = "auto"  # zeta | L | auto (parity rule)
    out_dir: str = "out"
    cache_dir: str | None = None
    raw: dict = field(default_factory=dict)

    def validate(self):
        if self.k < 2:
            raise ValidationFailure("k must be at least 2")
        if self.limit < 1_000:
            raise ValidationFailure("limit must be at least 10^3")
        if self.kind not in ("kronecker", "table"):
            raise ValidationFailure(f"unknown character kind {self.kind!r}")

    def character(self) -> DirichletCharacter:
        try:
            if self.kind == "table":
                if not self.values:
                    raise ValidationFailure("table characters need values=v1,...,vq")
                vals = [int(v) for v in self.values.split(",")]
                # values are chi(1..q); chi(q) = chi(0 mod q)
                table = [vals[-1]] + vals[:-1]
                return DirichletCharacter.from_values(self.q, table)
            if self.d is not None:
                chi = DirichletCharacter.from_discriminant(self.d)
                if chi.modulus != self.q:
                    raise ValidationFailure(
                        f"discriminant {self.d} has modulus {chi.modulus}, config says q={self.q}"
                    )
                return chi
            return quadratic_character(self.q)
        except CharacterError as exc:
            raise ValidationFailure(str(exc)) from exc

    def spec(self) -> SummandSpec:
        return SummandSpec(k=self.k, character=self.character(), modified=self.modified)

    def ctx(self) -> EvalContext:
        return EvalContext(digits=self.precision, em_scale=self.em_cutoff_scale)

    def expected_function(self) -> str:
        if self.zeros_function != "auto":
            return self.zeros_function
        return "zeta" if self.k % 2 == 0 else "L"

    def cache_path(self) -> str:
        base = os.environ.get("KFCL_CACHE") or self.cache_dir or os.path.join(self.out_dir, "cache")
        os.makedirs(base, exist_ok=True)
        return base

    def hash(self) -> str:
        keys = {
            k: v for k, v in self.__dict__.items() if k not in ("raw",)
        }
        blob = json.dumps(keys, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: str | None, overrides: dict) -> RunConfig:
    cfg = RunConfig()
    if path:
        if not os.path.exists(path):
            raise DataFailure(f"config file {path} not found")
        parser = configparser.ConfigParser()
        parser.read(path)
        section_map = {
            ("character", "q"): ("q", int),
            ("character", "kind"): ("kind", str),
            ("character", "d"): ("d", int),
            ("character", "values"): ("values", str),
            ("spec", "k"): ("k", int),
            ("spec", "modified"): ("modified", lambda v: v.lower() in ("1", "true", "yes")),
            ("run", "limit"): ("limit", int),
            ("run", "seed"): ("seed", int),
            ("run", "precision"): ("precision", int),
            ("run", "em_cutoff_scale"): ("em_cutoff_scale", float),
            ("run", "zeros_file"): ("zeros_file", str),
            ("run", "zeros_function"): ("zeros_function", str),
            ("run", "out_dir"): ("out_dir", str),
            ("run", "cache_dir"): ("cache_dir", str),
        }
        for (sec, key), (attr, conv) in section_map.items():
            if parser.has_option(sec, key):
                setattr(cfg, attr, conv(parser.get(sec, key)))
                cfg.raw[f"{sec}.{key}"] = parser.get(sec, key)
    for attr, value in overrides.items():
        if value is not None:
            setattr(cfg, attr, value)  # flags win
    cfg.validate()
    return cfg


# -- artifact plumbing ---------------------------------------------------------


def _pyify(obj):
    if isinstance(obj, dict):
        return {k: _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(cfg: RunConfig, name: str, quantities: list[str], payload: dict) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    doc = {
        "config_hash": cfg.hash(),
        "quantities": quantities,
        **_pyify(payload),
    }
    path = os.path.join(cfg.out_dir, name)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def write_csv(cfg: RunConfig, name: str, header: list[str], rows) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, name)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")
    os.replace(tmp, path)
    return path


def _read_artifact(cfg: RunConfig, name: str) -> dict:
    path = os.path.join(cfg.out_dir, name)
    if not os.path.exists(path):
        raise DataFailure(f"missing upstream artifact {name}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- shared pipeline pieces ------------------------------------------------------


def _sieve(cfg: RunConfig):
    cache = os.path.join(cfg.cache_path(), f"kfree_k{cfg.k}_N{cfg.limit}.bin")
    if os.path.exists(cache):
        sv = load_sieve(cache)
        if sv.k == cfg.k and sv.limit == cfg.limit:
            return sv
    sv = sieve_kfree(cfg.k, cfg.limit)
    save_sieve(sv, cache)
    return sv


def _series(cfg: RunConfig):
    return cumulative_series(cfg.spec(), cfg.limit, _sieve(cfg))


def _catalog(cfg: RunConfig, enforce_parity: bool = True):
    if not cfg.zeros_file:
        raise DataFailure("no zeros_file configured")
    if not os.path.exists(cfg.zeros_file):
        raise DataFailure(f"zero file {cfg.zeros_file} not found")
    declared = cfg.zeros_function
    if declared == "auto":
        # an earlier ingest may have declared what this file holds
        meta_path = os.path.join(cfg.out_dir, "zeros_ingested.json")
        if os.path.exists(meta_path):
            with open(meta_path, "r", encoding="utf-8") as fh:
                meta = json.load(fh)
            if meta.get("file") == cfg.zeros_file:
                declared = "zeta" if meta.get("function") == "zeta" else "L"
    want = cfg.expected_function() if cfg.zeros_function == "auto" else cfg.zeros_function
    parity_want = "zeta" if cfg.k % 2 == 0 else "L"
    if enforce_parity and declared != "auto" and declared != parity_want:
        raise ValidationFailure(
            f"parity rule: k={cfg.k} needs a {parity_want} catalog, "
            f"but the zero file is declared {declared}"
        )
    function = "zeta" if want == "zeta" else cfg.character()
    fmt = "csv" if cfg.zeros_file.endswith(".csv") else "plain"
    return parse_zero_file(cfg.zeros_file, fmt, function)


def _enriched(cfg: RunConfig, T: float):
    cat = _catalog(cfg)
    with open(cfg.zeros_file, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()[:12]
    fid = cat.function_id()
    cache = os.path.join(
        cfg.cache_path(),
        f"enriched_{fid}_{digest}_T{int(T)}_p{cfg.precision}_{cfg.em_cutoff_scale}.csv",
    )
    if os.path.exists(cache):
        return parse_zero_file(cache, "csv", cat.function)
    enr = enrich_catalog(cat, cfg.ctx(), t_max=T)
    serialize_catalog(enr, cache, "csv")
    return enr


def _terms(cfg: RunConfig, T: float):
    try:
        return residue_coefficients(cfg.spec(), _enriched(cfg, T), T, cfg.ctx())
    except CatalogMismatchError as exc:
        raise ValidationFailure(str(exc)) from exc


def _amplitudes(cfg: RunConfig, T: float) -> ModelAmplitudes:
    terms = _terms(cfg, T)
    bk = beta_k(terms, cfg.k, density_modulus=1 if cfg.k % 2 == 0 else cfg.q)
    return ModelAmplitudes.from_terms(terms, T, tail_sq=2.0 * bk.tail_estimate)


# -- subcommands -------------------------------------------------------------------


def cmd_sieve(cfg: RunConfig, args) -> int:
    sv = _sieve(cfg)
    n = sv.count()
    write_json(cfg, "sieve.json", ["kfree_count", "kfree_density"], {
        "k": cfg.k, "limit": cfg.limit, "count": n, "density": n / cfg.limit,
    })
    print(f"{n} {cfg.k}-free integers up to {cfg.limit}")
    return EXIT_OK


def cmd_sum(cfg: RunConfig, args) -> int:
    x = args.x
    if math.floor(x) > cfg.limit:
        cfg.limit = int(math.floor(x))
    value = partial_sum(cfg.spec(), x, _sieve(cfg))
    print(value)
    return EXIT_OK


def cmd_zeros(cfg: RunConfig, args) -> int:
    if args.zeros_cmd == "ingest":
        cfg.zeros_file = args.file
        cat = _catalog(cfg, enforce_parity=False)
        write_json(cfg, "zeros_ingested.json", ["zero_count", "t_max"], {
            "file": args.file, "function": cat.function_id(),
            "count": len(cat.records), "t_max": cat.t_max,
        })
        print(f"ingested {len(cat.records)} ordinates up to {cat.t_max:.3f}")
        return EXIT_OK
    if args.zeros_cmd == "enrich":
        enr = _enriched(cfg, args.T)
        out = os.path.join(cfg.out_dir, "zeros_enriched.csv")
        os.makedirs(cfg.out_dir, exist_ok=True)
        serialize_catalog(enr, out, "csv")
        print(f"enriched {len(enr.records)} zeros to T={args.T}")
        return EXIT_OK
    if args.zeros_cmd == "check":
        cat = _catalog(cfg)
        res = zero_count_check(cat, args.T)
        write_json(cfg, "zeros_check.json", ["count_residual"], res.__dict__)
        print(f"count {res.count} vs main {res.main_term:.3f}: residual {res.residual:+.3f}"
              f" (bound {res.bound:.3f}{', FLAGGED' if res.flagged else ''})")
        return EXIT_OK
    if args.zeros_cmd == "moments":
        enr = _enriched(cfg, args.T)
        J = discrete_moment(enr, args.r, args.T)
        grid = np.geomspace(max(enr.records[0].gamma + 1, 20.0), args.T, 8)
        fit = moment_growth_fit(enr, args.r, grid)
        write_json(cfg, "zeros_moments.json", ["discrete_moment", "moment_fit"], {
            "r": args.r, "T": args.T, "J": J,
            "exponent": fit.exponent, "log_exponent": fit.log_exponent,
            "predicted_log_exponent": fit.predicted_log_exponent,
            "amplitude": fit.amplitude, "caveat": fit.caveat,
        })
        print(f"J_{args.r}({args.T}) = {J:.6g}; fitted T-exponent {fit.exponent:.3f}")
        return EXIT_OK
    raise ValidationFailure(f"unknown zeros subcommand {args.zeros_cmd!r}")


def _parse_grid(text: str) -> np.ndarray:
    lo, hi, n = text.split(":")
    return half_integer_grid(float(lo), float(hi), int(n))


def cmd_explicit(cfg: RunConfig, args) -> int:
    xs = _parse_grid(args.x_grid)
    if xs[-1] > cfg.limit:
        raise ValidationFailure("x grid exceeds the configured sieve limit")
    terms = _terms(cfg, args.T)
    ser = _series(cfg)
    sf = ser.value(xs).astype(float)
    es = explicit_sum_grid(terms, xs, cfg.k)
    resid = sf - es
    # calibrate the envelope on interleaved points, evaluate on the rest
    calib = np.arange(len(xs)) % 2 == 0
    model = fit_error_model(xs[calib], np.full(calib.sum(), args.T), resid[calib], cfg.k)
    env = np.array([error_envelope(model, x, args.T) for x in xs])
    write_csv(cfg, "explicit.csv", ["x", "S_f", "explicit", "residual", "envelope"],
              zip(xs, sf, es, resid, env))
    write_json(cfg, "explicit.json", ["explicit_residuals"], {
        "T": args.T, "n_terms": len(terms),
        "mean_abs_residual": float(np.mean(np.abs(resid))),
        "max_abs_residual": float(np.max(np.abs(resid))),
        "max_scaled_residual": float(np.max(np.abs(resid) / xs ** (1 / (2 * cfg.k)))),
        "envelope_constants": model.constants(),
    })
    print(f"explicit sum with {len(terms)} terms: mean|resid| = {np.mean(np.abs(resid)):.4f}")
    return EXIT_OK


def cmd_dist(cfg: RunConfig, args) -> int:
    ser = _series(cfg)
    Y = args.Y if args.Y else math.log(cfg.limit)
    d_full = exact_log_distribution(ser, cfg.k, Y=Y, bins=args.bins)
    d_half = exact_log_distribution(ser, cfg.k, Y=Y / 2.0, bins=args.bins)
    ks_half = ks_distance(d_full, d_half)
    write_csv(cfg, "dist.csv", ["bin_lo", "bin_hi", "mass"],
              zip(d_full.edges[:-1], d_full.edges[1:], d_full.masses))
    write_json(cfg, "dist_summary.json", ["phi_distribution"], {
        "Y": Y, "bins": args.bins, "mean": d_full.mean,
        "variance": d_full.variance, "second_moment": d_full.second_moment,
        "support": list(d_full.support), "ks_vs_half_window": ks_half,
        "mass_sum": float(d_full.masses.sum()),
    })
    print(f"phi distribution at Y={Y:.3f}: mean {d_full.mean:.5f}, "
          f"variance {d_full.variance:.5f}, KS vs half window {ks_half:.4f}")
    return EXIT_OK


def cmd_variance(cfg: RunConfig, args) -> int:
    ser = _series(cfg)
    X = args.X if args.X else float(cfg.limit)
    xs = np.geomspace(100.0, X, 5)
    traj = [(x, variance_integral(ser, cfg.k, x)) for x in xs]
    write_json(cfg, "variance.json", ["variance_integral"], {
        "X": X, "value": traj[-1][1], "ratio_to_logX": traj[-1][1] / math.log(X),
        "trajectory_X": [t[0] for t in traj],
        "trajectory_ratio": [t[1] / math.log(t[0]) for t in traj],
    })
    print(f"variance integral to {X:g}: {traj[-1][1]:.5f} (/log X = {traj[-1][1]/math.log(X):.5f})")
    return EXIT_OK


def cmd_growth(cfg: RunConfig, args) -> int:
    ser = _series(cfg)
    rep = growth_envelope(ser, cfg.k, args.Ctilde, args.eps, float(cfg.limit))
    write_json(cfg, "growth.json", ["growth_envelope"], rep.__dict__)
    print(f"sup |S|/envelope = {rep.sup_ratio:.4f} at x = {rep.argmax_x:g}; "
          f"exceedance log-measure {rep.exceedance_log_measure:.4f}")
    return EXIT_OK


def cmd_beta(cfg: RunConfig, args) -> int:
    terms = _terms(cfg, args.T)
    bk = beta_k(terms, cfg.k, density_modulus=1 if cfg.k % 2 == 0 else cfg.q)
    write_json(cfg, "beta.json", ["beta_k"], {
        "T": args.T, "partial": bk.partial, "tail_estimate": bk.tail_estimate,
        "tail_bound": bk.tail_bound, "estimate": bk.estimate, "upper": bk.upper,
        "amplitude_rms": bk.amplitude_rms, "amplitude_envelope": bk.amplitude_envelope,
        "decay_exponent": bk.decay_exponent, "decay_exponent_fit": bk.decay_exponent_fit,
        "converged": bk.converged,
    })
    print(f"beta_k: partial {bk.partial:.6f} + tail {bk.tail_estimate:.6f} "
          f"= {bk.estimate:.6f} (bound {bk.upper:.6f})")
    return EXIT_OK


def cmd_model(cfg: RunConfig, args) -> int:
    amps = _amplitudes(cfg, args.T)
    if args.model_cmd == "sample":
        x = sample_x(amps, args.count, cfg.seed)
        write_json(cfg, "model_sample.json", ["model_samples"], {
            "count": args.count, "seed": cfg.seed, "truncation": args.T,
            "mean": float(x.mean()), "variance": float(x.var()),
            "predicted_variance": amps.variance,
            "min": float(x.min()), "max": float(x.max()),
        })
        print(f"{args.count} samples: mean {x.mean():+.5f}, variance {x.var():.5f} "
              f"(predicted {amps.variance:.5f})")
        return EXIT_OK
    if args.model_cmd == "fourier":
        lo, hi, n = args.xi_grid.split(":")
        xis = np.linspace(float(lo), float(hi), int(n))
        rows = [(xi, fourier_nu(amps, xi), amps.tail_log_attenuation(xi)) for xi in xis]
        write_csv(cfg, "model_fourier.csv", ["xi", "bessel_product", "tail_log_factor"], rows)
        print(f"characteristic function tabulated at {len(xis)} frequencies")
        return EXIT_OK
    if args.model_cmd == "tail":
        lo, hi, n = args.V_grid.split(":")
        Vs = np.linspace(float(lo), float(hi), int(n))
        samples = sample_x(amps, args.count, cfg.seed)
        rows = []
        for V in Vs:
            est = tail_probability(amps, V, args.count, cfg.seed, samples=samples)
            rows.append((V, est.probability, est.std_error))
        mb = montgomery_bounds(amps, min(10, len(amps.r)))
        write_csv(cfg, "model_tail.csv", ["V", "probability", "std_error"], rows)
        write_json(cfg, "model_tail.json", ["tail_probabilities", "tail_sandwich"], {
            "count": args.count, "K": mb.K,
            "upper_threshold": mb.upper_threshold, "upper_bound": mb.upper_bound,
            "lower_threshold": mb.lower_threshold, "lower_bound": mb.lower_bound,
        })
        print(f"tail probabilities on {len(Vs)} thresholds with {args.count} samples")
        return EXIT_OK
    if args.model_cmd == "compare":
        ser = _series(cfg)
        dist = exact_log_distribution(ser, cfg.k, Y=math.log(cfg.limit), bins=201)
        cmp_ = empirical_vs_model(dist, amps, args.count, cfg.seed)
        write_json(cfg, "model_compare.json", ["model_vs_empirical"], cmp_.__dict__)
        print(f"KS(empirical phi, model X) = {cmp_.ks:.4f}; "
              f"variances {cmp_.variance_empirical:.5f} vs {cmp_.variance_model:.5f}")
        return EXIT_OK
    raise ValidationFailure(f"unknown model subcommand {args.model_cmd!r}")


def cmd_moments(cfg: RunConfig, args) -> int:
    enr = _enriched(cfg, args.T)
    grid = np.geomspace(max(enr.records[0].gamma + 1, 20.0), args.T, 10)
    fit = moment_growth_fit(enr, args.r, grid)
    write_json(cfg, "moments.json", ["moment_fit"], {
        "r": args.r, "T": args.T,
        "J_at_T": discrete_moment(enr, args.r, args.T),
        "exponent": fit.exponent, "log_exponent": fit.log_exponent,
        "predicted_log_exponent": fit.predicted_log_exponent,
        "amplitude": fit.amplitude,
        "constants": fit.constants, "caveat": fit.caveat,
    })
    print(f"moment growth: T-exponent {fit.exponent:.3f} "
          f"(log-power {fit.log_exponent:.2f}, predicted {fit.predicted_log_exponent:.2f})")
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    wanted = [
        "growth.json", "variance.json", "beta.json",
        "dist_summary.json", "model_compare.json", "moments.json",
    ]
    missing = [n for n in wanted if not os.path.exists(os.path.join(cfg.out_dir, n))]
    if missing:
        raise DataFailure("missing upstream artifacts: " + ", ".join(missing))
    sections = {n.split(".")[0]: _read_artifact(cfg, n) for n in wanted}
    write_json(cfg, "report.json", ["consolidated_report"], {
        "schema_version": 1,
        "spec": {
            "k": cfg.k, "q": cfg.q, "modified": cfg.modified,
            "limit": cfg.limit, "seed": cfg.seed,
        },
        "sections": sections,
    })
    print(f"report written to {os.path.join(cfg.out_dir, 'report.json')}")
    return EXIT_OK


# -- argument wiring -----------------------------------------------------------------


def build_parser() -> _Parser:
    p = _Parser(prog="kfcl", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="key=value config file with [character]/[spec]/[run] sections")
    p.add_argument("--k", type=int, dest="k")
    p.add_argument("--q", type=int, dest="q")
    p.add_argument("--d", type=int, dest="d", help="fundamental discriminant (kronecker kind)")
    p.add_argument("--kind", choices=["kronecker", "table"], dest="kind")
    p.add_argument("--values", dest="values", help="comma-separated chi(1..q) for table kind")
    p.add_argument("--modified", action="store_const", const=True, dest="modified")
    p.add_argument("--limit", "--N", type=int, dest="limit")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--precision", type=int, dest="precision")
    p.add_argument("--em-cutoff-scale", type=float, dest="em_cutoff_scale")
    p.add_argument("--zeros", dest="zeros_file", help="zero ordinate file (plain or csv)")
    p.add_argument("--function", dest="zeros_function", choices=["zeta", "L", "auto"])
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--cache-dir", dest="cache_dir")

    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sieve", help="build (and cache) the k-free sieve")
    ps = sub.add_parser("sum", help="exact partial sum at x")
    ps.add_argument("--x", type=float, required=True)

    pz = sub.add_parser("zeros", help="catalog operations")
    zsub = pz.add_subparsers(dest="zeros_cmd", required=True)
    zi = zsub.add_parser("ingest")
    zi.add_argument("file")
    ze = zsub.add_parser("enrich")
    ze.add_argument("--T", type=float, default=500.0)
    zc = zsub.add_parser("check")
    zc.add_argument("--T", type=float, required=True)
    zm = zsub.add_parser("moments")
    zm.add_argument("--r", type=float, required=True)
    zm.add_argument("--T", type=float, required=True)

    pe = sub.add_parser("explicit", help="zero-sum expansion vs sieved truth")
    pe.add_argument("--T", type=float, default=500.0)
    pe.add_argument("--x-grid", default="100:10000:100", help="lo:hi:n, snapped to half-integers")

    pd = sub.add_parser("dist", help="exact log-measure distribution of phi")
    pd.add_argument("--Y", type=float)
    pd.add_argument("--bins", type=int, default=201)

    pv = sub.add_parser("variance", help="quadratic mean in dx/x")
    pv.add_argument("--X", type=float)

    pg = sub.add_parser("growth", help="growth envelope and exceedance measure")
    pg.add_argument("--Ctilde", type=float, default=1.0)
    pg.add_argument("--eps", type=float, default=0.1)

    pb = sub.add_parser("beta", help="variance constant from residue terms")
    pb.add_argument("--T", type=float, default=500.0)

    pm = sub.add_parser("model", help="torus random model")
    msub = pm.add_subparsers(dest="model_cmd", required=True)
    for name in ("sample", "tail", "compare"):
        mp_ = msub.add_parser(name)
        mp_.add_argument("--count", type=int, default=100_000)
        mp_.add_argument("--T", type=float, default=500.0)
        if name == "tail":
            mp_.add_argument("--V-grid", default="0:1:11")
    mf = msub.add_parser("fourier")
    mf.add_argument("--xi-grid", default="0:4:41")
    mf.add_argument("--T", type=float, default=500.0)

    pmom = sub.add_parser("moments", help="discrete moment growth fit")
    pmom.add_argument("--r", type=float, default=-1.0)
    pmom.add_argument("--T", type=float, default=500.0)

    sub.add_parser("report", help="consolidate upstream artifacts")
    return p


_COMMANDS = {
    "sieve": cmd_sieve,
    "sum": cmd_sum,
    "zeros": cmd_zeros,
    "explicit": cmd_explicit,
    "dist": cmd_dist,
    "variance": cmd_variance,
    "growth": cmd_growth,
    "beta": cmd_beta,
    "model": cmd_model,
    "moments": cmd_moments,
    "report": cmd_report,
}

_CONFIG_ATTRS = (
    "k", "q", "d", "kind", "values", "modified", "limit", "seed", "precision",
    "em_cutoff_scale", "zeros_file", "zeros_function", "out_dir", "cache_dir",
)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        overrides = {a: getattr(args, a, None) for a in _CONFIG_ATTRS}
        cfg = load_config(args.config, overrides)
        return _COMMANDS[args.command](cfg, args)
    except (DataFailure, ZeroFileError, MissingDerivativeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValidationFailure, ValueError, CatalogMismatchError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
