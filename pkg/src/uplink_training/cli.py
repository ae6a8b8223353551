"""Command-line front end.

    uplink-training optimize -c config.json
    uplink-training sweep -c sweep.json -o rates.csv
    uplink-training validate -c validate.json
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import joint_solver, validation
from .sinr_model import ConfigError, Receiver, SystemConfig, energy_efficiency

log = logging.getLogger("uplink_training")

CONFIG_KEYS = {"M", "K", "T", "rho_db", "rho_max_ratio", "rho_max_db", "receiver", "seed", "trials"}
SWEEP_KEYS = {"base", "variable", "values", "schemes", "output_path", "seed"}
VALIDATE_KEYS = {"suites", "seed"}
CSV_COLUMNS = ["value", "scheme", "receiver", "alpha", "T_tau", "T_d", "rate_bits", "energy_efficiency"]
DEFAULT_RHO_MAX_RATIO = 1.2

SCHEMES = {
    "equal_power": joint_solver.equal_power,
    "optimized": joint_solver.optimize_unconstrained,
    "power_limited": joint_solver.optimize,
}

# used when a sweep file gives no "values"
DEFAULT_VALUES = {
    "M": list(range(20, 101, 10)),
    "rho_db": [float(v) for v in range(-20, 21)],
    "rate_vs_ee": [float(v) for v in range(-20, 21)],
}


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def _check_keys(data, allowed, where):
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def config_from_dict(data) -> SystemConfig:
    for key in ("M", "K", "T", "rho_db"):
        if key not in data:
            raise ConfigError(f"missing key {key!r}")
    if "rho_max_ratio" in data and "rho_max_db" in data:
        raise ConfigError("give either rho_max_ratio or rho_max_db, not both")
    return SystemConfig.from_db(
        data["M"], data["K"], data["T"], float(data["rho_db"]),
        rho_max_ratio=float(data.get("rho_max_ratio", DEFAULT_RHO_MAX_RATIO)),
        rho_max_db=None if data.get("rho_max_db") is None else float(data["rho_max_db"]),
    )


def load_config(path):
    data = _load_json(path)
    _check_keys(data, CONFIG_KEYS, path)
    if "receiver" not in data:
        raise ConfigError("missing key 'receiver'")
    return config_from_dict(data), Receiver.parse(data["receiver"]), data


def fmt(value) -> str:
    """Shortest round-trip decimal for floats; integers unchanged."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def cmd_optimize(args) -> int:
    cfg, rx, _ = load_config(args.config)
    record = joint_solver.optimize(cfg, rx).as_record()
    print(json.dumps(record))
    return 0


def _parse_scheme(item):
    try:
        scheme, rx = str(item).split(":")
    except ValueError:
        raise ConfigError(f"scheme {item!r} must look like 'optimized:MRC'") from None
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}")
    return scheme, Receiver.parse(rx)


def load_sweep(path):
    data = _load_json(path)
    _check_keys(data, SWEEP_KEYS, path)
    variable = data.get("variable")
    if variable not in DEFAULT_VALUES:
        raise ConfigError(f"variable must be one of {sorted(DEFAULT_VALUES)}")
    base = data.get("base")
    if not isinstance(base, dict):
        raise ConfigError("sweep needs a 'base' object with the fixed parameters")
    _check_keys(base, CONFIG_KEYS - {"receiver", "seed", "trials"}, "base")
    schemes = [_parse_scheme(s) for s in data.get("schemes", [])]
    if not schemes:
        raise ConfigError("schemes must be non-empty")
    defaulted = "values" not in data
    values = list(DEFAULT_VALUES[variable]) if defaulted else list(data["values"])
    if not values:
        raise ConfigError("values must be non-empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("values must be strictly increasing")
    if variable == "M" and any(int(v) != v for v in values):
        raise ConfigError("M values must be integers")
    return {"variable": variable, "values": values, "schemes": schemes, "base": base,
            "defaulted": defaulted, "output_path": data.get("output_path")}


def _sweep_point(job):
    variable, value, base, schemes = job
    params = dict(base)
    if variable == "M":
        params["M"] = int(value)
    else:
        params["rho_db"] = float(value)
    cfg = config_from_dict(params)
    rows = []
    for scheme, rx in schemes:
        res = SCHEMES[scheme](cfg, rx)
        rows.append([
            fmt(int(value) if variable == "M" else value), scheme, rx.value,
            fmt(res.alpha_star), fmt(res.T_tau_star), fmt(res.T_d_star), fmt(res.rate_star),
            fmt(energy_efficiency(res.rate_star, cfg.rho)),
        ])
    return rows


def run_sweep(sweep, jobs=1):
    """Rows in value-major, scheme-minor order."""
    work = [(sweep["variable"], v, sweep["base"], sweep["schemes"]) for v in sweep["values"]]
    # validate every point up front so errors surface before any work is dispatched
    for _, v, base, _ in work:
        params = dict(base)
        params["M" if sweep["variable"] == "M" else "rho_db"] = v
        config_from_dict(params)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_point, work))
    else:
        chunks = [_sweep_point(w) for w in work]
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    sweep = load_sweep(args.config)
    output = args.output or sweep["output_path"]
    if not output:
        raise ConfigError("no output path: pass -o or set output_path")
    text = rows_to_csv(run_sweep(sweep, jobs=args.jobs))
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    meta = {
        "variable": sweep["variable"],
        "values_source": "default" if sweep["defaulted"] else "config",
        "base": sweep["base"],
        "rho_max_ratio_default": DEFAULT_RHO_MAX_RATIO,
        "schemes": [f"{s}:{rx.value}" for s, rx in sweep["schemes"]],
    }
    with open(output + ".meta.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    log.info("wrote %s", output)
    return 0


def load_validate(path):
    data = _load_json(path)
    _check_keys(data, VALIDATE_KEYS, path)
    suites = data.get("suites")
    if isinstance(suites, list):
        suites = {name: {} for name in suites}
    if not isinstance(suites, dict) or not suites:
        raise ConfigError("suites must be a non-empty list or object")
    for name, params in suites.items():
        if name not in validation.SUITES:
            raise ConfigError(f"unknown suite {name!r}; expected one of {sorted(validation.SUITES)}")
        if not isinstance(params, dict):
            raise ConfigError(f"parameters for suite {name!r} must be an object")
    return suites, int(data.get("seed", 0))


def cmd_validate(args) -> int:
    suites, seed = load_validate(args.config)
    if args.seed is not None:
        seed = args.seed
    reports = []
    for name, params in suites.items():
        rng = np.random.default_rng(seed)
        kwargs = dict(params)
        if name == "monte_carlo":
            kwargs.setdefault("seed", seed)
        try:
            report = validation.SUITES[name](rng, **kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for suite {name!r}: {exc}") from None
        reports.append(report)
        print(f"{'PASS' if report.passed else 'FAIL'} {name}", file=sys.stderr)
    print(json.dumps({"seed": seed, "suites": [r.as_dict() for r in reports]}, indent=2))
    return 0 if all(r.passed for r in reports) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="uplink-training", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="jointly optimal training split for one scenario")
    p.add_argument("-c", "--config", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="rate / energy-efficiency sweep to CSV")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("-j", "--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run randomized consistency suites")
    p.add_argument("-c", "--config", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
