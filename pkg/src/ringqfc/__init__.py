"""Microring quantum frequency conversion: converter, pair source, interference and EOM models."""

__version__ = "0.1.0"
