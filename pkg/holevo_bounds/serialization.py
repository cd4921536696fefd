"""
Reading model, Gaussian, prior and cost files, and writing reports.

Input files are YAML. A matrix literal is a list of rows whose entries are
[re, im] pairs, plain numbers or complex strings such as "0.5-0.5j".
"""

from typing import TextIO
import numpy as np
import pandas as pd
import yaml

from .bayes import CovariantQubitSpec, Prior
from .common import OutputFormat
from .gaussian import GaussianShiftModel
from .holevo_exceptions import ConfigError, DomainError
from .model import CostMatrix, ParametricModel, evaluate, explicit_point, get_builtin_model
from .utils import get_logging

_logger = get_logging().getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _entry(v) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(float(re), float(im))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def parse_matrix(literal, dtype=complex) -> np.ndarray:
    """Matrix literal (list of rows of [re, im] pairs, numbers or "a+bj" strings) to an array."""
    try:
        rows = [[_entry(v) for v in row] for row in literal]
        out = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        _logger.error(f"Invalid matrix literal {literal}: {exc}")
        raise ConfigError(f"Invalid matrix literal: {exc}") from exc
    if out.ndim != 2:
        raise ConfigError(f"Matrix literal must be a list of rows, got {out.ndim} dimensions")
    if dtype is float:
        if np.max(np.abs(out.imag), initial=0.0) > 0:
            raise ConfigError("Real matrix literal has complex entries")
        return out.real.copy()
    return out


def parse_vector(text) -> np.ndarray:
    """'a,b,c' or a YAML list to a float vector."""
    if isinstance(text, str):
        try:
            return np.array([float(v) for v in text.split(",") if v.strip()])
        except ValueError as exc:
            raise ConfigError(f"Invalid number list '{text}'") from exc
    return np.atleast_1d(np.asarray(text, dtype=float))


def _load_yaml(path: str) -> dict:
    try:
        with open(path, "r") as stream:
            data = yaml.safe_load(stream)
    except (OSError, yaml.YAMLError) as exc:
        _logger.error(f"Cannot read {path}: {exc}")
        raise ConfigError(f"Cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a YAML mapping")
    return data


def _require(data: dict, key: str, path: str):
    if (value := data.get(key)) is None:
        raise ConfigError(f"{path} is missing '{key}'")
    return value


def load_model_point(path: str) -> tuple:
    """
    A model file names either a builtin family and a point

        builtin: qubit_r_theta
        options: {}
        point: [0.5, 1.5707963267948966]

    or an explicit state with its derivatives (rho, grads, optional theta).

    Returns:
        tuple: (ModelPoint, model name)
    """
    data = _load_yaml(path)
    if (name := data.get("builtin")) is not None:
        model = get_builtin_model(name, **(data.get("options") or {}))
        return evaluate(model, parse_vector(_require(data, "point", path))), name
    rho = parse_matrix(_require(data, "rho", path))
    grads = [parse_matrix(d) for d in _require(data, "grads", path)]
    theta = data.get("theta")
    return explicit_point(rho, grads, None if theta is None else parse_vector(theta)), data.get("name", "explicit")


def load_model(path: str) -> ParametricModel:
    """Parametric family of a model file; only builtin families qualify."""
    data = _load_yaml(path)
    if (name := data.get("builtin")) is None:
        raise ConfigError(f"{path} holds an explicit point, a builtin family is needed here")
    return get_builtin_model(name, **(data.get("options") or {}))


def load_gaussian_model(path: str) -> GaussianShiftModel:
    data = _load_yaml(path)
    return GaussianShiftModel(
        q_modes=int(data.get("q_modes", 0)),
        c_vars=int(data.get("c_vars", 0)),
        encoding=parse_matrix(_require(data, "encoding", path), float),
        covariance=parse_matrix(_require(data, "covariance", path), float),
    )


def _tabulated_radial(data: dict, path: str):
    """w(r) by linear interpolation of 'radii' and 'density' tables on [0, 1]."""
    radii = parse_vector(_require(data, "radii", path))
    values = parse_vector(_require(data, "density", path))
    if len(radii) != len(values) or len(radii) < 2 or np.any(np.diff(radii) <= 0):
        raise ConfigError(f"{path} needs increasing 'radii' and one 'density' value per radius")
    if radii[0] < 0 or radii[-1] > 1 or np.any(values < 0):
        raise ConfigError(f"{path} radial density must be non-negative on radii within [0, 1]")
    return lambda r: float(np.interp(r, radii, values, left=0.0, right=0.0))


def load_prior(path: str) -> Prior:
    """
    Prior files carry a kind and its keys:

        gaussian        mean, cov, optional nodes
        uniform         lower, upper, optional nodes
        discrete        points, probabilities
        grid            points, density, optional weights
        uniform_sphere  optional nodes; over (theta, phi)
        uniform_radial  optional nodes; over (r, theta, phi), uniform in r
        radial          radii, density, optional nodes; over (r, theta, phi)
    """
    data = _load_yaml(path)
    nodes = data.get("nodes")
    match kind := _require(data, "kind", path):
        case "gaussian":
            return Prior.gaussian(
                parse_vector(_require(data, "mean", path)),
                parse_matrix(_require(data, "cov", path), float),
                nodes,
            )
        case "uniform":
            return Prior.uniform(
                parse_vector(_require(data, "lower", path)), parse_vector(_require(data, "upper", path)), nodes
            )
        case "discrete":
            points = np.atleast_2d(np.asarray(_require(data, "points", path), dtype=float))
            return Prior.discrete(points, parse_vector(_require(data, "probabilities", path)))
        case "grid":
            points = np.asarray(_require(data, "points", path), dtype=float)
            density = parse_vector(_require(data, "density", path))
            weights = None if (w := data.get("weights")) is None else parse_vector(w)
            return Prior.from_grid(points, density, weights)
        case "uniform_sphere":
            return Prior.uniform_sphere(nodes)
        case "uniform_radial":
            return Prior.radial(None, nodes)
        case "radial":
            return Prior.radial(_tabulated_radial(data, path), nodes)
    raise ConfigError(f"Unknown prior kind '{kind}' in {path}")


def load_covariant_spec(path: str, n: int) -> CovariantQubitSpec:
    """Radial density w(r) for the covariant mixed-qubit cost, from a uniform_radial or radial prior file."""
    data = _load_yaml(path)
    nodes = data.get("nodes")
    match kind := _require(data, "kind", path):
        case "uniform_radial":
            return CovariantQubitSpec.uniform(n, nodes)
        case "radial":
            return CovariantQubitSpec.from_density(n, _tabulated_radial(data, path), nodes, normalize=True)
    _logger.error(f"Prior kind {kind} in {path} has no radial density.")
    raise ConfigError(f"Covariant mixed-qubit cost needs a uniform_radial or radial prior, got '{kind}'")


def parse_cost(spec: str, p: int) -> CostMatrix:
    """
    Cost specs: 'identity', 'diag:a,b,...', 'rank1:a,b,...' or the path of a
    YAML file with a 'cost' matrix literal.
    """
    if spec == "identity":
        cost = CostMatrix.identity(p)
    elif spec.startswith("diag:"):
        cost = CostMatrix.diag(parse_vector(spec[len("diag:") :]))
    elif spec.startswith("rank1:"):
        cost = CostMatrix.rank_one(parse_vector(spec[len("rank1:") :]))
    else:
        cost = CostMatrix(parse_matrix(_require(_load_yaml(spec), "cost", spec), float))
    if cost.size != p:
        _logger.error(f"Cost spec {spec} has size {cost.size}, model has {p} parameters.")
        raise DomainError(f"Cost '{spec}' has size {cost.size} for a {p}-parameter model")
    return cost


def _plain(value):
    """Numbers rounded to the output precision, arrays to lists."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(FLOAT_FORMAT % value)
    if isinstance(value, complex):
        return str(value)
    return value if value is None or isinstance(value, str) else str(value)


def write_rows(rows: list, fmt: OutputFormat, stream: TextIO):
    """Writes a list of flat dicts as CSV, an aligned table or YAML."""
    if fmt == OutputFormat.structured:
        yaml.safe_dump(_plain(rows), stream, sort_keys=False, default_flow_style=False)
        return
    frame = pd.DataFrame(rows)
    if fmt == OutputFormat.csv:
        frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT)
    else:
        stream.write(frame.to_string(index=False, float_format=lambda x: FLOAT_FORMAT % x) + "\n")


def write_report(report: dict, fmt: OutputFormat, stream: TextIO):
    """A single report: key/value table, one CSV row, or YAML."""
    if fmt == OutputFormat.structured:
        yaml.safe_dump(_plain(report), stream, sort_keys=False, default_flow_style=False)
        return
    flat = {k: v for k, v in _plain(report).items() if not isinstance(v, (dict, list))}
    if fmt == OutputFormat.csv:
        write_rows([flat], fmt, stream)
        return
    width = max(len(k) for k in flat)
    for key, value in flat.items():
        stream.write(f"{key.ljust(width)}  {'' if value is None else value}\n")


def write_csv(rows: list, path: str):
    pd.DataFrame(rows).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    _logger.info(f"Wrote {len(rows)} rows to {path}.")
