"""Oscillation-mode identification with DMD and multi-resolution DMD."""

from ._oscid import (
    Error,
    DmdResult,
    analyze,
    delay_embed,
    describe_modes,
    dmd,
    generate,
    load_csv,
    mrdmd,
    plan,
    profile,
    profile_names,
)

__all__ = [
    "Error",
    "DmdResult",
    "analyze",
    "delay_embed",
    "describe_modes",
    "dmd",
    "generate",
    "load_csv",
    "mrdmd",
    "plan",
    "profile",
    "profile_names",
]
__version__ = "0.1.0"
