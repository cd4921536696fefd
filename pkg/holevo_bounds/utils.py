""" Utils for the holevo_bounds library """

import os
import logging.config
import logging
import yaml
from . import constants as const

_settings = {}
abspath = os.path.abspath(__file__)
# Absolute directory name containing this file
dname = os.path.dirname(abspath)
# read env var or set default
default_holevo_bounds_config = os.environ.get(
    "HOLEVO_BOUNDS_CONFIG_FILE", f"{dname}/holevo_bounds.yml"
)
default_logging_config = os.environ.get(
    "HOLEVO_BOUNDS_LOGGING_CONFIG_FILE", f"{dname}/holevo_bounds_logging.yml"
)

_logging_initialized: bool = False


def get_logging(logging_config_file: str = default_logging_config):
    """
    Initializes the logging configuration and returns the logging module.

    Parameters:
        logging_config_file (str): The path to the logging configuration file.
            Defaults to holevo_bounds_logging.yml next to this module.

    Returns:
        logging: The logging module.
    """
    global _logging_initialized
    if not _logging_initialized:
        with open(logging_config_file, "r") as stream:
            config = yaml.load(stream, Loader=yaml.FullLoader)
            if config:
                logging.config.dictConfig(config)
            else:
                logging.basicConfig(level=logging.WARNING)
        _logging_initialized = True
    return logging


_logger = get_logging().getLogger(__name__)


def load_config(config_file: str = default_holevo_bounds_config):
    """
    Read the holevo_bounds configuration file and return the parsed settings.

    Parameters:
        config_file (str, optional): The path to the configuration file.
            Defaults to holevo_bounds.yml next to this module.

    Returns:
        dict: The parsed settings.
    """
    global _settings
    if not _settings:
        with open(config_file, "r") as stream:
            try:
                _settings = yaml.safe_load(stream) or {}
                _logger.debug(f"Loaded holevo_bounds config from {config_file}")
            except yaml.YAMLError as exc:
                _logger.error(f"Invalid holevo_bounds config {config_file}: {exc}")
                _settings = {}
    return _settings


def override_settings(overrides: dict):
    """
    Merges section-wise overrides, e.g. {"sdp": {"gap_tol": 1e-7}}, into the
    loaded settings.
    """
    settings = load_config()
    for section, values in overrides.items():
        settings.setdefault(section, {}).update(values)
    return settings


def _get(section: str, key: str):
    return load_config().get(section, {}).get(key)


def get_tolerance(name: str) -> float:
    return float(_get(const.tolerances, name))


def get_numeric_step() -> float:
    return float(_get(const.model, const.numeric_step))


def get_multi_copy_cap() -> int:
    return int(_get(const.model, const.multi_copy_cap))


def get_hcr_dim_cap() -> int:
    return int(_get(const.hcr, const.sdp_dim_cap))


def get_s_clip() -> float:
    return float(_get(const.hcr, const.s_clip))


def get_cost_rank_threshold() -> float:
    return float(_get(const.hcr, const.cost_rank_threshold))


def get_sdp_options() -> dict:
    return {
        const.max_iters: int(_get(const.sdp, const.max_iters)),
        const.gap_tol: float(_get(const.sdp, const.gap_tol)),
        const.comp_tol: float(_get(const.sdp, const.comp_tol)),
        const.feas_tol: float(_get(const.sdp, const.feas_tol)),
        const.step: float(_get(const.sdp, const.step)),
        const.divergence: float(_get(const.sdp, const.divergence)),
        const.min_step: float(_get(const.sdp, const.min_step)),
    }


def get_quadrature_nodes(dims: int = 1) -> int:
    """Gauss-Legendre nodes per prior dimension; tensor grids with dims >= 3 use the smaller count."""
    key = const.quadrature_nodes if dims <= 2 else const.quadrature_nodes_high_dim
    return int(_get(const.bayes, key))


def get_covariant_nodes() -> int:
    return int(_get(const.bayes, const.covariant_nodes))


def get_covariant_limits() -> tuple:
    """(minimum radial nodes, maximum copies) of the covariant mixed-qubit cost."""
    return int(_get(const.bayes, const.covariant_min_nodes)), int(_get(const.bayes, const.covariant_max_copies))


def get_sim_chunk_size() -> int:
    return int(_get(const.sim, const.chunk_size))


def get_default_seed() -> int:
    return int(_get(const.sim, const.seed))


def get_min_trials() -> int:
    return int(_get(const.sim, const.min_trials))


def get_thread_cap() -> int:
    """
    Returns the number of worker threads, HOLEVO_THREADS winning over the
    config file. Never less than one.
    """
    if (env := os.environ.get(const.threads_env)) is not None:
        try:
            return max(1, int(env))
        except ValueError:
            _logger.warning(f"Ignoring non-integer {const.threads_env}={env}")
    return max(1, int(_get(const.sim, const.threads) or 1))
