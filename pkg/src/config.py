"""
src/config.py
Calibration defaults for the cost model, read from .env with literal fallbacks
RELEVANT FILES: .env.example, mapping.py, costmodel.py, explorer.py, cli.py
"""

import os
import logging
from typing import Any, Dict

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from errors import ConfigurationError

# Load environment variables
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
env_path = os.path.join(project_root, '.env')
load_dotenv(env_path, override=True)

logger = logging.getLogger(__name__)


class ModelDefaults(BaseModel):
    """Every free parameter of the model in one place"""

    clock_hz: float = Field(gt=0)
    word_bytes: int = Field(gt=0)
    dram_bytes_per_cycle: float = Field(gt=0)
    alu_pj: float = Field(ge=0)
    rf_accesses_per_mac: int = Field(ge=0)
    inter_pe_factor: float = Field(ge=0)
    rho_memory_scale: float = Field(gt=0)
    plateau_tolerance: float = Field(ge=0)
    alpha_tolerance: float = Field(ge=0)
    sweep_workers: int = Field(ge=1)

    model_config = {'frozen': True}


DESCRIPTIONS = {
    'clock_hz': 'Array clock frequency (Hz)',
    'word_bytes': 'Bytes per weight/activation word',
    'dram_bytes_per_cycle': 'DRAM bandwidth (bytes per clock cycle)',
    'alu_pj': 'Energy per MAC in the ALU (pJ)',
    'rf_accesses_per_mac': 'Register-file accesses charged per MAC',
    'inter_pe_factor': 'Inter-PE transfers charged per MAC',
    'rho_memory_scale': 'GBuf/RF scale applied to rho > 1 variants',
    'plateau_tolerance': 'Max relative latency spread for the plateau check',
    'alpha_tolerance': 'Max utilization gap between alpha variants',
    'sweep_workers': 'Threads used to evaluate sweep points',
}

# Nominal settings that the calibrated defaults above override
REFERENCE_VALUES = {
    'dram_bytes_per_cycle': (4.0, '2 words/cycle'),
}


def _env_defaults() -> Dict[str, Any]:
    return {
        'clock_hz': float(os.getenv('CLOCK_HZ', 200e6)),
        'word_bytes': int(os.getenv('WORD_BYTES', 2)),
        'dram_bytes_per_cycle': float(os.getenv('DRAM_BYTES_PER_CYCLE', 512)),
        'alu_pj': float(os.getenv('ALU_PJ', 1.0)),
        'rf_accesses_per_mac': int(os.getenv('RF_ACCESSES_PER_MAC', 3)),
        'inter_pe_factor': float(os.getenv('INTER_PE_FACTOR', 1)),
        'rho_memory_scale': float(os.getenv('DOUBLE_MEMORY_FOR_RHO', 2.0)),
        'plateau_tolerance': float(os.getenv('PLATEAU_TOLERANCE', 0.10)),
        'alpha_tolerance': float(os.getenv('ALPHA_TOLERANCE', 0.02)),
        'sweep_workers': int(os.getenv('SWEEP_WORKERS', 1)),
    }


def load_defaults(**overrides) -> ModelDefaults:
    """
    Resolve the defaults table; explicit overrides win over the environment.
    None-valued overrides are ignored so argparse namespaces can be passed through.
    """
    values = _env_defaults()
    for key, value in overrides.items():
        if key not in values:
            raise ConfigurationError(f"unknown setting '{key}'")
        if value is not None:
            values[key] = value

    try:
        defaults = ModelDefaults(**values)
    except ValueError as e:
        raise ConfigurationError(str(e)) from e

    logger.debug(f"Resolved model defaults: {defaults.model_dump()}")
    return defaults
