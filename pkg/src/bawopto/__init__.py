"""Modelling and analysis of a BAW resonator coupled to a microwave cavity."""

from .config import ConfigError, UnitError, ValidationError, dump_config, load_config, parse_config
from .model import (
    AcousticMode,
    BvdBranch,
    CavityMode,
    CrystalGeometry,
    MaterialProperties,
    ModeEntry,
    ModeFamily,
    PhysicalConstants,
    Spectrum,
    SystemConfig,
    validate,
)

__version__ = "0.1.0"
