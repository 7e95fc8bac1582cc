"""Command-line entry point.

Subcommands: cutoff, simulate, tables, limits, diagnose.  Options may also be
supplied through ``--config FILE`` (a JSON object keyed by option name, with
dashes or underscores); flags given on the command line win.  The master seed
can be set with the ``MTP_SEED`` environment variable, which sits between the
flag and the config file in precedence.

Exit status: 0 on success, 2 for invalid input, 3 for numerical or model
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import asym, depmodels, gauss, mc, procedures, records, tables
from .errors import ModelError, ValidationError
from .procedures import Family, ProcedureSpec, Sided

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
SEED_ENV = "MTP_SEED"

DEFAULTS = {
    "cutoff": {"n": None, "alpha": None, "procedure": "all", "sided": "both", "k": 1,
               "p0": None, "format": "text"},
    "simulate": {"metric": "fwer", "method": "conditional", "model": "product",
                 "lambda1": 0.5, "delta": 0.5, "rho": None, "model_json": None,
                 "n": 2500, "alpha": 0.05, "procedure": "bonferroni", "sided": "one",
                 "k": 1, "p0": None, "reps": None, "profile": "full", "seed": 0,
                 "n1": 0, "mu": None, "means": None, "cross_check": False,
                 "cross_check_reps": 1_000_000, "format": "csv", "output": None,
                 "workers": 1},
    "tables": {"output_dir": "tables_out", "seed": 0, "profile": "full", "reps": None,
               "lambda1": 0.5, "workers": 1, "format": "csv"},
    "limits": {"fwer": False, "kfwer": False, "rate": False, "cramer": False,
               "power": False, "procedure": "sidak", "sided": "one", "alpha": 0.05,
               "k": 1, "nu": 0.3, "model_schedule": "0.5,0.5", "n0_frac": 1.0,
               "n_grid": None, "beta": None, "n": 10000, "n1": 100, "mu": 0.5,
               "mu_max": None},
    "diagnose": {"model": "product", "lambda1": 0.5, "delta": 0.5, "rho": None,
                 "model_json": None, "n": 10000, "m0": depmodels.WEAK_DEP_M0,
                 "lags": "1,10,100,1000", "format": "text"},
}


class CliError(ValidationError):
    pass


# ---------------------------------------------------------------------------
# parsing


def _positive_int(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {value}")
        return value
    return parse


def _level(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number, got {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="wdfwer", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=S, help="JSON file of option values")

    p = sub.add_parser("cutoff", help="print procedure cutoffs")
    common(p)
    p.add_argument("--n", type=_positive_int("n"), default=S, required=False)
    p.add_argument("--alpha", type=_level, default=S)
    p.add_argument("--procedure", default=S, help="bonferroni | sidak | lr | all")
    p.add_argument("--sided", default=S, help="one | two | both")
    p.add_argument("--k", type=_positive_int("k"), default=S)
    p.add_argument("--p0", type=float, default=S)
    p.add_argument("--format", choices=("text", "csv", "json"), default=S)

    def model_args(p):
        p.add_argument("--model", default=S,
                       help="product | equicorrelated | independent | explicit")
        p.add_argument("--lambda1", type=float, default=S)
        p.add_argument("--delta", type=float, default=S)
        p.add_argument("--rho", type=float, default=S)
        p.add_argument("--model-json", dest="model_json", default=S,
                       help="model description as a JSON string or a path to one")
        p.add_argument("--n", type=_positive_int("n"), default=S)

    p = sub.add_parser("simulate", help="run one Monte-Carlo estimate")
    common(p)
    model_args(p)
    p.add_argument("--metric", choices=("fwer", "kfwer", "power"), default=S)
    p.add_argument("--method", choices=("conditional", "bruteforce"), default=S)
    p.add_argument("--alpha", type=_level, default=S)
    p.add_argument("--procedure", default=S)
    p.add_argument("--sided", default=S)
    p.add_argument("--k", type=_positive_int("k"), default=S)
    p.add_argument("--p0", type=float, default=S)
    p.add_argument("--reps", type=_positive_int("reps"), default=S)
    p.add_argument("--profile", choices=tuple(tables.PROFILES), default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--n1", type=int, default=S, help="number of false nulls (first n1 indices)")
    p.add_argument("--mu", type=float, default=S, help="mean of each false null")
    p.add_argument("--means", default=S, help="JSON file with the full mean vector")
    p.add_argument("--cross-check", dest="cross_check", action="store_true", default=S)
    p.add_argument("--cross-check-reps", dest="cross_check_reps",
                   type=_positive_int("cross-check-reps"), default=S)
    p.add_argument("--format", choices=("csv", "json"), default=S)
    p.add_argument("--output", default=S)
    p.add_argument("--workers", type=_positive_int("workers"), default=S)

    p = sub.add_parser("tables", help="reproduce the eight FWER tables")
    common(p)
    p.add_argument("--output-dir", dest="output_dir", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--profile", choices=tuple(tables.PROFILES), default=S)
    p.add_argument("--reps", type=_positive_int("reps"), default=S)
    p.add_argument("--lambda1", type=float, default=S)
    p.add_argument("--workers", type=_positive_int("workers"), default=S)
    p.add_argument("--format", choices=("csv", "json", "md"), default=S)

    p = sub.add_parser("limits", help="asymptotic limits, rate bound, expansions")
    common(p)
    for flag in ("fwer", "kfwer", "rate", "cramer", "power"):
        p.add_argument(f"--{flag}", action="store_true", default=S)
    p.add_argument("--procedure", default=S)
    p.add_argument("--sided", default=S)
    p.add_argument("--alpha", type=_level, default=S)
    p.add_argument("--k", type=_positive_int("k"), default=S)
    p.add_argument("--nu", type=float, default=S)
    p.add_argument("--model-schedule", dest="model_schedule", default=S,
                   help="LAMBDA1,DELTA of the loading schedule")
    p.add_argument("--n0-frac", dest="n0_frac", type=float, default=S)
    p.add_argument("--n-grid", dest="n_grid", default=S, help="comma-separated sizes")
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--n", type=_positive_int("n"), default=S)
    p.add_argument("--n1", type=_positive_int("n1"), default=S)
    p.add_argument("--mu", type=float, default=S)
    p.add_argument("--mu-max", dest="mu_max", type=float, default=S)

    p = sub.add_parser("diagnose", help="weak-dependence report for a model")
    common(p)
    model_args(p)
    p.add_argument("--m0", type=_positive_int("m0"), default=S)
    p.add_argument("--lags", default=S, help="comma-separated lags to print")
    p.add_argument("--format", choices=("text", "json"), default=S)
    return parser


def resolve(args: argparse.Namespace, environ=None) -> dict:
    """Defaults < config file < MTP_SEED < explicit flags."""
    environ = os.environ if environ is None else environ
    explicit = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = dict(DEFAULTS[args.command])
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"config: cannot read {config_path!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise CliError("config: top level must be a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise CliError(f"config: unknown option {key!r} for {args.command}")
            cfg[key] = value
    if "seed" in cfg and environ.get(SEED_ENV):
        try:
            cfg["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise CliError(f"{SEED_ENV} must be a decimal integer") from None
    cfg.update(explicit)
    return cfg


# ---------------------------------------------------------------------------
# helpers


def _load_json_arg(text, name):
    path = Path(text)
    try:
        if path.exists():
            return json.loads(path.read_text())
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{name}: invalid JSON ({exc})") from None


def _build_model(cfg):
    if cfg.get("model_json"):
        d = _load_json_arg(cfg["model_json"], "model-json")
        return depmodels.model_from_dict(d)
    kind = str(cfg["model"]).lower()
    n = cfg["n"]
    if kind == "product":
        return depmodels.build_schedule(float(cfg["lambda1"]), float(cfg["delta"]), int(n))
    if kind in ("equicorrelated", "equi"):
        if cfg.get("rho") is None:
            raise CliError("rho: required for the equicorrelated model")
        return depmodels.Equicorrelated(float(cfg["rho"]), int(n))
    if kind == "independent":
        return depmodels.Independent(int(n))
    if kind == "explicit":
        raise CliError("model-json: required for the explicit model")
    raise CliError(f"model: unknown kind {cfg['model']!r}")


def _families(value):
    if str(value).lower() == "all":
        return list(Family)
    return [Family.parse(value)]


def _sides(value):
    if str(value).lower() == "both":
        return list(Sided)
    return [Sided.parse(value)]


def _grid(text):
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise CliError(f"n-grid: cannot parse {text!r}") from None


def _emit(text, output=None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_cutoff(cfg) -> int:
    for key in ("n", "alpha"):
        if cfg[key] is None:
            raise CliError(f"{key}: required")
    rows = []
    for fam in _families(cfg["procedure"]):
        k = cfg["k"] if fam is Family.LEHMANN_ROMANO else 1
        for sided in _sides(cfg["sided"]):
            spec = ProcedureSpec(fam, sided, k, cfg["p0"])
            c = procedures.cutoff(spec, cfg["n"], cfg["alpha"])
            rows.append({"procedure": fam.value, "sided": sided.value, "k": k,
                         "n": c.n, "alpha": c.alpha, "cutoff": c.value})
    fmt = cfg["format"]
    if fmt == "json":
        out = "".join(json.dumps(r) + "\n" for r in rows)
    elif fmt == "csv":
        cols = ("procedure", "sided", "k", "n", "alpha", "cutoff")
        out = ",".join(cols) + "\n" + "".join(
            ",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n"
            for r in rows)
    else:
        out = "".join(f"{r['procedure']:<11}{r['sided']:<4} n={r['n']} alpha={r['alpha']!r}"
                      f" k={r['k']}  cutoff={r['cutoff']!r}\n" for r in rows)
    _emit(out)
    return EXIT_OK


def _means_for(cfg, n):
    if cfg.get("means"):
        mu = _load_json_arg(cfg["means"], "means")
        return mc.MeanConfig(mu)
    n1 = int(cfg.get("n1") or 0)
    if n1:
        if cfg.get("mu") is None:
            raise CliError("mu: required when n1 > 0")
        return mc.MeanConfig.shifted(n, n1, float(cfg["mu"]))
    return mc.MeanConfig.null(n)


def cmd_simulate(cfg) -> int:
    model = _build_model(cfg)
    means = _means_for(cfg, model.n)
    metric = mc.Metric(cfg["metric"])
    fam = Family.parse(cfg["procedure"])
    if metric is mc.Metric.KFWER and fam is not Family.LEHMANN_ROMANO:
        raise CliError("procedure: k-FWER estimation requires --procedure lr")
    k = int(cfg["k"]) if fam is Family.LEHMANN_ROMANO else 1
    spec = ProcedureSpec(fam, cfg["sided"], k, cfg["p0"])
    reps = cfg["reps"] or tables.PROFILES[cfg["profile"]]["replicates"]
    seed = mc.check_seed(cfg["seed"])
    alpha = float(cfg["alpha"])
    kw = dict(replicates=reps, seed=seed, workers=int(cfg["workers"]))

    def run(method, replicates):
        kw2 = dict(kw, replicates=replicates)
        if metric is mc.Metric.POWER:
            if method == "bruteforce":
                return mc.power_bruteforce(model, spec, alpha, means, **kw2)
            return mc.power_conditional(model, spec, alpha, means, **kw2)
        if method == "bruteforce":
            return mc.fwer_bruteforce(model, spec, alpha, means, **kw2)
        if metric is mc.Metric.KFWER:
            return mc.kfwer_conditional(model, k, spec, alpha, means, **kw2)
        return mc.fwer_conditional(model, spec, alpha, means, **kw2)

    estimates = [run(cfg["method"], reps)]
    status = EXIT_OK
    if cfg["cross_check"]:
        other = "bruteforce" if cfg["method"] == "conditional" else "conditional"
        other_reps = cfg["cross_check_reps"] if other == "bruteforce" else reps
        estimates.append(run(other, other_reps))
        a, b = estimates
        bound = 3.0 * math.hypot(a.std_error, b.std_error)
        ok = mc.agree(a, b)
        print(f"cross-check: |{a.value!r} - {b.value!r}| = {abs(a.value - b.value)!r}, "
              f"bound {bound!r}: {'agree' if ok else 'DISAGREE'}", file=sys.stderr)
        status = EXIT_OK if ok else EXIT_NUMERICAL
    recs = [e.record() for e in estimates]
    text = records.to_jsonl(recs) if cfg["format"] == "json" else records.to_csv(recs)
    _emit(text, cfg["output"])
    return status


def cmd_tables(cfg) -> int:
    profile = tables.PROFILES[cfg["profile"]]
    reps = cfg["reps"] or profile["replicates"]
    seed = mc.check_seed(cfg["seed"])
    results = tables.run_tables(master_seed=seed, replicates=reps,
                                lambda1=float(cfg["lambda1"]), workers=int(cfg["workers"]))
    tables.write_tables(results, cfg["output_dir"], profile["tolerance"], cfg["format"])
    summary = tables.summary_rows(results, profile["tolerance"])
    for row in summary:
        print(f"table {row['table']}: {row['procedure']} {row['sided']}-sided "
              f"alpha={row['alpha']} max|est-alpha|={row['max_abs_dev']:.5f} "
              f"({'ok' if row['pass'] else 'FAIL'} at {row['tolerance']})")
    print(f"wrote {cfg['output_dir']}")
    return EXIT_OK


def cmd_limits(cfg) -> int:
    sections = [s for s in ("fwer", "kfwer", "rate", "cramer", "power") if cfg[s]]
    if not sections:
        sections = ["fwer", "kfwer", "rate", "cramer", "power"]
    alpha = float(cfg["alpha"])
    lines = []
    if "fwer" in sections:
        for fam in _families(cfg["procedure"]):
            k = int(cfg["k"]) if fam is Family.LEHMANN_ROMANO else 1
            spec = ProcedureSpec(fam, cfg["sided"] if cfg["sided"] != "both" else "one", k)
            lines.append(f"limiting_fwer\tprocedure={fam.value} k={k} alpha={alpha!r}\t"
                         f"{asym.limiting_fwer(spec, alpha)!r}")
    if "kfwer" in sections:
        spec = ProcedureSpec(Family.LEHMANN_ROMANO, Sided.ONE, int(cfg["k"]))
        lines.append(f"limiting_kfwer\tk={spec.k} alpha={alpha!r}\t"
                     f"{asym.limiting_fwer(spec, alpha)!r}")
    if "rate" in sections:
        lines.extend(_rate_lines(cfg))
    if "cramer" in sections:
        beta = cfg["beta"] if cfg["beta"] is not None else -math.log1p(-alpha)
        grid = _grid(cfg["n_grid"]) if cfg["n_grid"] else [10**3, 10**4, 10**6, 10**8]
        lines.append("cramer\tn\texpansion\texact\tgap")
        for n in grid:
            approx = asym.cramer_quantile(beta, n)
            exact = gauss.isf(beta / n)
            lines.append(f"cramer\t{n}\t{approx!r}\t{exact!r}\t{exact - approx!r}")
    if "power" in sections:
        n, n1, mu = int(cfg["n"]), int(cfg["n1"]), float(cfg["mu"])
        mu_max = float(cfg["mu_max"]) if cfg["mu_max"] is not None else mu
        t41 = asym.power_condition_t41(n1, mu_max)
        t42 = asym.power_condition_t42(n, n1, mu)
        lines.append(f"power_max_ratio\tn1={n1} mu_max={mu_max!r}\t{t41.value!r}\t"
                     f"finite_n_proxy(ratio<1)={t41.satisfied_proxy}")
        lines.append(f"power_growth\tn={n} n1={n1} mu={mu!r}\t{t42.value!r}\t"
                     f"finite_n_proxy(growth(n)>growth(n/2))={t42.satisfied_proxy}")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


def _rate_lines(cfg):
    try:
        lam1, delta = (float(v) for v in str(cfg["model_schedule"]).split(","))
    except ValueError:
        raise CliError("model-schedule: expected LAMBDA1,DELTA") from None
    nu = float(cfg["nu"])
    grid = _grid(cfg["n_grid"]) if cfg["n_grid"] else [10**3, 10**4, 10**5, 10**6]
    lines = ["rate\tn\tR_n\tterm_power\tterm_gamma\tterm_n0\tterm_1/n\tgamma\tnu_admissible"]
    for n in grid:
        diag = depmodels.diagnose(depmodels.build_schedule(lam1, delta, n))
        params = asym.RateParams(nu, diag.gamma, diag.gamma_seq, float(cfg["n0_frac"]), n)
        terms = asym.rate_terms(params)
        lines.append("rate\t" + "\t".join([str(n), repr(max(terms))]
                                          + [repr(t) for t in terms]
                                          + [repr(diag.gamma), str(params.nu_admissible)]))
    return lines


def cmd_diagnose(cfg) -> int:
    model = _build_model(cfg)
    diag = depmodels.diagnose(model, m0=int(cfg["m0"]))
    lags = [m for m in _grid(cfg["lags"]) if 1 <= m <= diag.rho_m.size]
    report = {
        "model": model.to_dict() if not isinstance(model, depmodels.Explicit) else "explicit",
        "n": model.n,
        "gamma": diag.gamma,
        "m0": diag.m0,
        "tail_max_rho_log_m": diag.tail_max,
        "trend": diag.trend,
        "weakly_dependent_proxy": diag.weakly_dependent,
        "clamped_indices": [i + 1 for i in diag.clamped],
        "lags": {str(m): {"rho_m": diag.rho(m), "rho_m_log_m": float(diag.rho_log_m[m - 1]),
                          "gamma_m": diag.gamma_at(m)} for m in lags},
    }
    if cfg["format"] == "json":
        _emit(json.dumps(report) + "\n")
        return EXIT_OK
    lines = [f"{key}: {report[key]}" for key in
             ("n", "gamma", "m0", "tail_max_rho_log_m", "trend", "weakly_dependent_proxy",
              "clamped_indices")]
    lines.append("lag\trho_m\trho_m*log(m)\tgamma_m")
    for m, v in report["lags"].items():
        lines.append(f"{m}\t{v['rho_m']!r}\t{v['rho_m_log_m']!r}\t{v['gamma_m']!r}")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {"cutoff": cmd_cutoff, "simulate": cmd_simulate, "tables": cmd_tables,
            "limits": cmd_limits, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ModelError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
