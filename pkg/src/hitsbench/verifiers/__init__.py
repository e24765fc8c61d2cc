"""Authorship-verification baselines: char n-gram, PPM, topic-fit."""

from .base import Prediction
from .calibration import CalibrationParams, calibrate, grid_search_calibration

__all__ = ["Prediction", "CalibrationParams", "calibrate", "grid_search_calibration"]
