import logging
import pathlib
import configparser
from dataclasses import dataclass

log = logging.getLogger(__name__)
CONFIG_NAME = str(pathlib.Path(__file__).parent.parent.absolute()) + "/config.ini"


@dataclass(frozen=True)
class Limits:
    """Resource caps shared by every enumeration and every dense table."""
    max_vertices: int = 12
    max_cells: int = 2 ** 20
    max_oracle_vertices: int = 8
    max_enumeration_vertices: int = 4


@dataclass(frozen=True)
class SampleSettings:
    """Generic distributions used to recognise constraints that hold for every distribution."""
    count: int = 2
    seed: int = 7919
    max_weight: int = 1000003


@dataclass(frozen=True)
class OracleSettings:
    min_weight: int = 1
    max_weight: int = 16
    latent_cardinality: int = 2


DEFAULT_LIMITS = Limits()
DEFAULT_SAMPLES = SampleSettings()
DEFAULT_ORACLE = OracleSettings()


def read_config(path=CONFIG_NAME):
    log.debug(f"Reading configuration from {path}...")
    cfg = configparser.ConfigParser()
    with open(path, "r") as f:
        cfg.read_file(f)
    populate_default_config(cfg)
    log.debug("Configuration read")
    return cfg


def load_config(path=None):
    """Reads the configuration file, falling back to the defaults when it does not exist.

    Args:
        path: Explicit configuration file. When given, it must exist.
    """
    if path is not None:
        return read_config(path)
    if pathlib.Path(CONFIG_NAME).is_file():
        return read_config(CONFIG_NAME)

    cfg = configparser.ConfigParser()
    populate_default_config(cfg)
    return cfg


def populate_default_config(cfg):
    if 'limits' not in cfg:
        cfg["limits"] = {
            "max_vertices": DEFAULT_LIMITS.max_vertices,
            "max_cells": DEFAULT_LIMITS.max_cells,
            "max_oracle_vertices": DEFAULT_LIMITS.max_oracle_vertices,
            "max_enumeration_vertices": DEFAULT_LIMITS.max_enumeration_vertices,
        }

    if 'oracle' not in cfg:
        cfg["oracle"] = {
            "min_weight": DEFAULT_ORACLE.min_weight,
            "max_weight": DEFAULT_ORACLE.max_weight,
            "latent_cardinality": DEFAULT_ORACLE.latent_cardinality,
        }

    if 'constraints' not in cfg:
        cfg["constraints"] = {
            "sample_count": DEFAULT_SAMPLES.count,
            "sample_seed": DEFAULT_SAMPLES.seed,
            "sample_max_weight": DEFAULT_SAMPLES.max_weight,
        }


def limits_from_config(cfg, max_vertices=None, max_cells=None):
    section = cfg["limits"]
    return Limits(
        max_vertices=max_vertices or section.getint("max_vertices", DEFAULT_LIMITS.max_vertices),
        max_cells=max_cells or section.getint("max_cells", DEFAULT_LIMITS.max_cells),
        max_oracle_vertices=section.getint("max_oracle_vertices",
                                           DEFAULT_LIMITS.max_oracle_vertices),
        max_enumeration_vertices=section.getint("max_enumeration_vertices",
                                                DEFAULT_LIMITS.max_enumeration_vertices),
    )


def samples_from_config(cfg):
    section = cfg["constraints"]
    return SampleSettings(
        count=section.getint("sample_count", DEFAULT_SAMPLES.count),
        seed=section.getint("sample_seed", DEFAULT_SAMPLES.seed),
        max_weight=section.getint("sample_max_weight", DEFAULT_SAMPLES.max_weight),
    )


def oracle_from_config(cfg):
    section = cfg["oracle"]
    return OracleSettings(
        min_weight=section.getint("min_weight", DEFAULT_ORACLE.min_weight),
        max_weight=section.getint("max_weight", DEFAULT_ORACLE.max_weight),
        latent_cardinality=section.getint("latent_cardinality", DEFAULT_ORACLE.latent_cardinality),
    )
