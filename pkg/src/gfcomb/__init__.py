"""Gradient frequency comb quantum memory simulator."""

from gfcomb.kernel import BACKEND
from gfcomb.medium import CombMedium, PhysicalScenario
from gfcomb.schedule import (BlockEnd, BlockStart, ControlSchedule, GradientFlip, PhaseRamp,
                             SpacingRescale, UniformOffset)
from gfcomb.signals import Envelope, Peak, gaussian, peak_train
from gfcomb.solver import FieldRecord, Grid, simulate

__all__ = [
    "BACKEND", "CombMedium", "PhysicalScenario", "ControlSchedule", "GradientFlip", "PhaseRamp",
    "SpacingRescale", "BlockStart", "BlockEnd", "UniformOffset", "Envelope", "Peak", "gaussian",
    "peak_train", "FieldRecord", "Grid", "simulate",
]
__version__ = "0.1.0"
