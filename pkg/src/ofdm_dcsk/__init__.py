"""BER analysis, resource allocation and Monte Carlo simulation for multi-user OFDM-DCSK."""

from .model import Allocation, InvalidParameterError, SystemParams, validate

__all__ = ["Allocation", "InvalidParameterError", "SystemParams", "validate"]
__version__ = "0.1.0"
