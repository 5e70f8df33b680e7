"""
src/errors.py
Exception hierarchy shared by the network generator, mapper, cost model and explorer
RELEVANT FILES: netgen.py, descriptor.py, mapping.py, costmodel.py, explorer.py, cli.py
"""

from datetime import datetime
from typing import Dict


class ModelError(Exception):
    """Base class for failures inside the performance model (CLI exit status 2)"""


class DivisibilityError(ModelError):
    """A group size does not divide the channel count of a grouped layer"""

    def __init__(self, layer_name: str, channels: int, channels_per_group: int):
        self.layer_name = layer_name
        self.channels = channels
        self.channels_per_group = channels_per_group
        super().__init__(
            f"layer '{layer_name}': channels_per_group={channels_per_group} "
            f"does not divide {channels} channels"
        )


class DescriptorError(ModelError):
    """Malformed or inconsistent network descriptor"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class MappingError(ModelError):
    """A layer with work cannot be placed on the array"""


class CoverageError(ModelError):
    """Sweep rows do not cover the variants an operation needs"""


class ConfigurationError(ValueError):
    """Bad knob value or unknown override (CLI exit status 1)"""


def error_payload(exc: Exception) -> Dict[str, str]:
    """Error dict recorded on sweep rows that failed to evaluate"""
    return {
        'error': type(exc).__name__,
        'message': str(exc),
        'timestamp': datetime.now().isoformat(),
    }
