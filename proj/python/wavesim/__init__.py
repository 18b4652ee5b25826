"""Bidirectional photonic circuit simulation on power waves."""

from ._core import (
    canonical,
    check,
    preset,
    reflection_coefficient,
    solve,
    sweep,
    sweep2d,
    transient,
    vi_to_waves,
    waves_to_vi,
)

__all__ = [
    "canonical",
    "check",
    "preset",
    "reflection_coefficient",
    "solve",
    "sweep",
    "sweep2d",
    "transient",
    "vi_to_waves",
    "waves_to_vi",
]
