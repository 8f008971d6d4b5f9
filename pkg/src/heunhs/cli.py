"""Command-line front end: heunhs <verb> [flags].

Exit codes: 0 all criteria pass, 1 any failure, 2 usage or configuration
error, 3 inconclusive without failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import tomli

from .elliptic import DomainError
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run

log = logging.getLogger("heunhs")

EXIT_USAGE = 2

# flag dest -> config field
_FLAG_FIELDS = {
    "r": "r",
    "alpha": "alpha",
    "eps": "epsilon",
    "basis_size": "basis_size",
    "quad_size": "quad_size",
    "g": "g",
    "preset": "preset",
    "out": "out",
    "format": "format",
    "seed": "seed",
    "k": "k",
    "samples": "samples",
    "tol": "tol",
    "jobs": "jobs",
}
_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)} | {"eps"}


def parse_g(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--g expects four comma-separated numbers, got {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"--g expects four numbers, got {len(vals)}")
    return vals


def _shared_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--r", type=float, help="inverse length scale r (default 1)")
    p.add_argument("--alpha", type=float, help="imaginary half-period scale alpha (default 1)")
    p.add_argument("--g", type=parse_g, metavar="g0,g1,g2,g3", help="coupling vector")
    p.add_argument("--preset", help="named coupling vector, e.g. 1001, 1101-dual, generic")
    p.add_argument("--basis-size", dest="basis_size", type=int, metavar="M", help="Galerkin basis size (default 48)")
    p.add_argument("--quad-size", dest="quad_size", type=int, metavar="N", help="Nystrom rule size (default 48)")
    p.add_argument("--eps", type=float, help="series truncation target (default 1e-15)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    p.add_argument("--config", type=Path, help="flat TOML file of defaults; flags win")
    p.add_argument("--seed", type=int, help="seed for sampled coupling vectors (default 0)")
    p.add_argument("--k", type=int, help="number of eigenvalues/modes compared (default 6)")
    p.add_argument("--samples", type=int, help="number of random sample points")
    p.add_argument("--tol", type=float, help="relative tolerance of pass/fail criteria (default 1e-8)")
    p.add_argument("--jobs", type=int, help="worker threads for independent operators (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heunhs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="verb")
    shared = _shared_flags()
    helps = {
        "spectrum": "Heun operator eigenvalues for one coupling",
        "svd": "singular values of the integral operator for one coupling",
        "orbit": "spectra across the 24-element symmetry orbit",
        "special-cases": "all exactly solvable cases against their closed forms",
        "rank-one": "s_g = 0 checks (given g or seeded samples)",
        "tau-probe": "evidence on singular value ordering and pairing",
    }
    for verb in EXPERIMENTS:
        sub.add_parser(verb, parents=[shared], help=helps[verb])
    return parser


def load_config_file(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    out = {}
    for key, value in raw.items():
        name = key.replace("-", "_")
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; section [{key}] not allowed")
        if name not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if name == "eps":
            name = "epsilon"
        if name == "g" and isinstance(value, str):
            try:
                value = parse_g(value)
            except argparse.ArgumentTypeError as exc:
                raise ConfigError(str(exc)) from None
        out[name] = value
    return out


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = load_config_file(args.config) if args.config else {}
    values.pop("experiment", None)
    for dest, name in _FLAG_FIELDS.items():
        v = getattr(args, dest)
        if v is not None:
            values[name] = v
    # a flag-level --g overrides a config-file preset and vice versa
    if args.g is not None and args.preset is None:
        values.pop("preset", None)
    if args.preset is not None and args.g is None:
        values.pop("g", None)
    return ExperimentConfig(experiment=args.experiment, **values).validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
        report = run(config)
    except (ConfigError, DomainError) as exc:
        print(f"heunhs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if "warning" in report.extra:
        log.warning(report.extra["warning"])
    if config.out:
        path = report.write(config.out, config.format)
        print(report.summary())
        print(f"report written to {path}")
    else:
        sys.stdout.write(report.dumps() + "\n" if config.format == "json" else report.to_csv())
        print(report.summary(), file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
