"""
Command-line front end.

Conventions: hbar = 1, [Q, P] = i, qubit states rho = (I + r . sigma)/2 with
Bloch vector r, costs are quadratic forms C on the parameter errors.
"""

import argparse
import os
import sys
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field
from typing import Optional
import numpy as np
import yaml

from . import constants as const
from .bayes import (
    CovariantQubitSpec,
    bayes_holevo_asymptotic,
    bayes_lower_multi,
    bayes_optimal_single,
    covariant_mixed_qubit_cost,
    covariant_pure_qubit_cost,
    van_trees_bound,
)
from .bounds import hgm_bound, sld_set
from .common import BayesKind, Command, OutputFormat, RadialEstimator
from .hcr import hcr_bound
from .holevo_exceptions import ConfigError, HolevoException
from .model import CostMatrix, evaluate, get_builtin_model, qubit_r_theta
from .qlan import lam_bures, lam_frobenius, validate_spectrum
from .report import bound_report, figure1_rows, figure2_rows, gaussian_report, table1
from .serialization import (
    load_covariant_spec,
    load_gaussian_model,
    load_model,
    load_model_point,
    load_prior,
    parse_cost,
    parse_vector,
    write_csv,
    write_report,
    write_rows,
)
from .sim import collective_estimation_run
from .utils import get_logging, override_settings

_logger = get_logging().getLogger(__name__)

# keys a run-config file may set, beside the command itself
RUN_CONFIG_KEYS = {
    "command",
    "format",
    "out",
    "seed",
    "tol_gap",
    "model",
    "builtin",
    "point",
    "cost",
    "prior",
    "kind",
    "n",
    "r",
    "c",
    "theta",
    "cost_r",
    "trials",
    "estimator",
    "spectrum",
    "shortcut",
}

FIGURE2_RADII = np.linspace(0.0, 0.95, 20)
FIGURE1_RADII = np.append(np.linspace(0.1, 0.9, 9), 1.0)


@dataclass
class RunConfig:
    command: Command
    format: Optional[OutputFormat] = None
    out: Optional[str] = None
    seed: Optional[int] = None
    tol_gap: Optional[float] = None
    options: dict = field(default_factory=dict)

    def get(self, key: str, default=None):
        return default if (value := self.options.get(key)) is None else value


def load_run_config(path: str) -> dict:
    """Reads a run-config YAML file, rejecting keys it does not know."""
    try:
        with open(path, "r") as stream:
            data = yaml.safe_load(stream) or {}
    except (OSError, yaml.YAMLError) as exc:
        _logger.error(f"Cannot read run config {path}: {exc}")
        raise ConfigError(f"Cannot read run config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Run config {path} must hold a YAML mapping")
    if unknown := sorted(set(data) - RUN_CONFIG_KEYS):
        _logger.error(f"Unknown keys {unknown} in run config {path}.")
        raise ConfigError(f"Unknown keys in run config {path}: {', '.join(unknown)}")
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holevo-bounds",
        description="Multi-parameter quantum estimation bounds.",
        epilog=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="run-config YAML file")
    parser.add_argument("--format", choices=[f.name for f in OutputFormat], help="output format")
    parser.add_argument("--out", help="write output to this file instead of stdout")
    parser.add_argument("--seed", type=int, help="simulation seed")
    parser.add_argument("--tol-gap", dest="tol_gap", type=float, help="SDP relative duality gap")
    sub = parser.add_subparsers(dest="command")

    bounds = sub.add_parser(Command.bounds.name, help="SLD, RLD, HGM and Holevo bounds at a model point")
    bounds.add_argument("--model", help="model YAML file")
    bounds.add_argument("--builtin", help="builtin model name")
    bounds.add_argument("--point", help="parameter values a,b,...")
    bounds.add_argument("--cost", help="identity | diag:a,b | rank1:a,b | YAML file")
    bounds.add_argument("--shortcut", action="store_true", default=None, help="skip the SDP when HCR = SLD is known")

    gaussian = sub.add_parser(Command.gaussian.name, help="bounds of a Gaussian shift model")
    gaussian.add_argument("--model", help="Gaussian model YAML file")
    gaussian.add_argument("--cost", help="cost spec")

    qlan = sub.add_parser(Command.qlan.name, help="LAM costs of the Gaussian limit")
    qlan.add_argument("--spectrum", help="eigenvalues a,b,... of the state")
    qlan.add_argument("--r", type=float, help="qubit Bloch radius")

    bayes = sub.add_parser(Command.bayes.name, help="Bayesian costs")
    bayes.add_argument("--kind", choices=[k.name.replace("_", "-") for k in BayesKind])
    bayes.add_argument("--n", type=int, help="copies")
    bayes.add_argument("--prior", help="prior YAML file")
    bayes.add_argument("--model", help="model YAML file with a builtin family")
    bayes.add_argument("--builtin", help="builtin model name")
    bayes.add_argument("--cost", help="cost spec")

    simulate = sub.add_parser(Command.simulate.name, help="Monte-Carlo run of the collective qubit strategy")
    simulate.add_argument("--n", type=int, help="copies")
    simulate.add_argument("--r", type=float, help="Bloch radius")
    simulate.add_argument("--theta", type=float, help="polar angle")
    simulate.add_argument("--cost-r", dest="cost_r", type=float, help="weight c of the radial error")
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--estimator", choices=[e.name.replace("_", "-") for e in RadialEstimator])

    table = sub.add_parser(Command.table1.name, help="qubit and Gaussian example table")
    table.add_argument("--r", type=float)
    table.add_argument("--c", type=float)

    figures = sub.add_parser(Command.figures.name, help="curve data as CSV files")
    figures.add_argument("--out", dest="out_dir", help="output directory")
    figures.add_argument("--trials", type=int)
    return parser


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """Command-line values win over run-config values."""
    values = load_run_config(args.config) if args.config else {}
    cli = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if "out_dir" in cli:
        cli["out"] = cli.pop("out_dir")
    if "command" in cli and "command" in values and values["command"] != cli["command"]:
        raise ConfigError(f"Run config is for '{values['command']}', command line asks for '{cli['command']}'")
    merged = {**values, **cli}
    if (command := Command.get_enum_from_str(str(merged.get("command")))) is None:
        raise ConfigError(f"Unknown or missing command '{merged.get('command')}'")
    fmt = None
    if (name := merged.pop("format", None)) is not None:
        if (fmt := OutputFormat.get_enum_from_str(name)) is None:
            raise ConfigError(f"Unknown output format '{name}'")
    merged.pop("command")
    return RunConfig(
        command=command,
        format=fmt,
        out=merged.pop("out", None),
        seed=merged.pop("seed", None),
        tol_gap=merged.pop("tol_gap", None),
        options=merged,
    )


@contextmanager
def _output(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as stream:
            yield stream


def _require(cfg: RunConfig, key: str):
    if (value := cfg.get(key)) is None:
        raise ConfigError(f"Command '{cfg.command}' needs --{key.replace('_', '-')}")
    return value


def cmd_bounds(cfg: RunConfig) -> dict:
    if cfg.get("model"):
        pt, name = load_model_point(cfg.get("model"))
    else:
        name = _require(cfg, "builtin")
        pt = evaluate(get_builtin_model(name), parse_vector(_require(cfg, "point")))
    cost = parse_cost(cfg.get("cost", "identity"), pt.param_count)
    return bound_report(pt, cost, model_name=name, shortcut=bool(cfg.get("shortcut", False))).as_dict()


def cmd_gaussian(cfg: RunConfig) -> dict:
    g = load_gaussian_model(_require(cfg, "model"))
    return gaussian_report(g, parse_cost(cfg.get("cost", "identity"), g.param_count)).as_dict()


def cmd_qlan(cfg: RunConfig) -> dict:
    if cfg.get("spectrum") is not None:
        mu = parse_vector(cfg.get("spectrum"))
    else:
        r = float(_require(cfg, "r"))
        mu = np.array([(1 + r) / 2, (1 - r) / 2])
    mu = validate_spectrum(mu)
    return {"spectrum": mu.tolist(), "lam_bures": lam_bures(mu), "lam_frobenius": lam_frobenius(mu)}


def _bayes_model(cfg: RunConfig):
    if cfg.get("model"):
        return load_model(cfg.get("model"))
    return get_builtin_model(_require(cfg, "builtin"))


def cmd_bayes(cfg: RunConfig) -> dict:
    if (kind := BayesKind.get_enum_from_str(str(_require(cfg, "kind")))) is None:
        raise ConfigError(f"Unknown Bayesian kind '{cfg.get('kind')}'")
    if kind == BayesKind.covariant_pure:
        n = int(_require(cfg, "n"))
        return {"kind": str(kind), "n": n, "cost": covariant_pure_qubit_cost(n)}
    if kind == BayesKind.covariant_mixed:
        n = int(_require(cfg, "n"))
        spec = load_covariant_spec(path, n) if (path := cfg.get("prior")) else CovariantQubitSpec.uniform(n)
        exact, asymptotic = covariant_mixed_qubit_cost(spec)
        return {"kind": str(kind), "n": n, "cost": exact, "asymptotic": asymptotic, "n_cost": n * exact}
    model = _bayes_model(cfg)
    prior = load_prior(_require(cfg, "prior"))
    if kind == BayesKind.single:
        result = bayes_optimal_single(model, prior)
        return {"kind": str(kind), "cost": result.cost, "prior_variance": result.prior_variance}
    cost = parse_cost(cfg.get("cost", "identity"), model.param_count)
    match kind:
        case BayesKind.multi:
            value = bayes_lower_multi(model, prior, cost)
        case BayesKind.van_trees:
            value = van_trees_bound(model, prior, cost)
        case _:
            value = bayes_holevo_asymptotic(model, prior, cost)
    return {"kind": str(kind), "value": value}


def cmd_simulate(cfg: RunConfig) -> list:
    n, r = int(_require(cfg, "n")), float(_require(cfg, "r"))
    theta, c = float(cfg.get("theta", np.pi / 2)), float(cfg.get("cost_r", 1.0))
    estimator = RadialEstimator.get_enum_from_str(str(cfg.get("estimator", "one_step")))
    if estimator is None:
        raise ConfigError(f"Unknown estimator '{cfg.get('estimator')}'")
    run = collective_estimation_run(
        n, r, theta, c=c, trials=int(cfg.get("trials", 100000)), seed=cfg.seed, estimator=estimator
    )
    pt = evaluate(qubit_r_theta(), [r, theta])
    cost = CostMatrix.diag([c, r**2])
    return [
        {"n": n, "r": r, "bound_name": "collective", "value": run.mean_cost, "stderr": run.stderr},
        {"n": n, "r": r, "bound_name": "collective_expected", "value": run.expected, "stderr": 0.0},
        {"n": n, "r": r, "bound_name": "hcr", "value": hcr_bound(pt, cost).value, "stderr": 0.0},
        {"n": n, "r": r, "bound_name": "hgm", "value": hgm_bound(sld_set(pt), cost), "stderr": 0.0},
    ]


def cmd_table1(cfg: RunConfig) -> list:
    return table1(float(cfg.get("r", 0.5)), float(cfg.get("c", 1.0))).rows()


def cmd_figures(cfg: RunConfig) -> list:
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "figure1.csv"), os.path.join(out_dir, "figure2.csv")]
    write_csv(figure2_rows(FIGURE2_RADII), paths[1])
    write_csv(figure1_rows(FIGURE1_RADII, trials=int(cfg.get("trials", 100000)), seed=cfg.seed), paths[0])
    return [{"file": path} for path in paths]


_COMMANDS = {
    Command.bounds: cmd_bounds,
    Command.gaussian: cmd_gaussian,
    Command.qlan: cmd_qlan,
    Command.bayes: cmd_bayes,
    Command.simulate: cmd_simulate,
    Command.table1: cmd_table1,
    Command.figures: cmd_figures,
}
_CURVE_COMMANDS = {Command.simulate, Command.figures}


def run(cfg: RunConfig, stream=None):
    if cfg.tol_gap is not None:
        override_settings({const.sdp: {const.gap_tol: float(cfg.tol_gap)}})
    _logger.info(f"Running {cfg.command}.")
    result = _COMMANDS[cfg.command](cfg)
    fmt = cfg.format or (OutputFormat.csv if cfg.command in _CURVE_COMMANDS else OutputFormat.table)
    # figures writes its own files, --out is its directory
    out = None if cfg.command == Command.figures else cfg.out
    with _output(out) if stream is None else nullcontext(stream) as target:
        if isinstance(result, list):
            write_rows(result, fmt, target)
        else:
            write_report(result, fmt, target)
    return result


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run(resolve_run_config(args))
    except HolevoException as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
