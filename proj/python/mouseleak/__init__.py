"""Acoustic side-channel analysis of mouse movements and clicks."""

from ._core import (
    MouseleakError,
    RandomForest,
    amplitude_profile,
    angular_error,
    bin_angle,
    detect_activity,
    detect_clicks,
    difference_amplitude_line,
    displacement_to_angle,
    fit_trend,
    mfcc,
    read_wav,
    run_cli,
    simulate,
    write_wav,
)

__all__ = [
    "MouseleakError",
    "RandomForest",
    "amplitude_profile",
    "angular_error",
    "bin_angle",
    "detect_activity",
    "detect_clicks",
    "difference_amplitude_line",
    "displacement_to_angle",
    "fit_trend",
    "mfcc",
    "read_wav",
    "run_cli",
    "simulate",
    "write_wav",
]
__version__ = "0.1.0"
