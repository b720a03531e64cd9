import logging
from abc import ABC, abstractmethod

import numpy as np

from ..exceptions import ValidationError
from ..fields import ZonalSpec
from ..surface import Grid


class BaseTemplate(ABC):
    """Zonal-flow profile F = amplitude * shape(r), zero outside the support band."""

    template_id = "base"

    def __init__(self, amplitude=-0.005, sharpness=12.0):
        self.amplitude = float(amplitude)
        self.sharpness = float(sharpness)
        if not np.isfinite(self.amplitude):
            raise ValidationError(f"Template amplitude must be finite, got {amplitude}")
        if not self.sharpness > 0.0:
            raise ValidationError(f"Template sharpness must be positive, got {sharpness}")

    @abstractmethod
    def shape(self, r: np.ndarray, half_width: float, d: float) -> np.ndarray:
        """Shape on the nodes ``r`` with peak value +1; only |r| < half_width is used."""

    def build(self, grid: Grid, delta: float, west_facing: bool = True) -> ZonalSpec:
        half_width = grid.d - delta
        if not half_width > 0.0:
            raise ValidationError(f"Support margin {delta} leaves no band on d={grid.d}")
        r = grid.profile.r_nodes
        F = self.amplitude * np.asarray(self.shape(r, half_width, grid.d), dtype=float)
        F[np.abs(r) >= half_width] = 0.0
        logging.debug(f"Built zonal template '{self.template_id}' on s={grid.s}, max|F|={np.max(np.abs(F)):.3e}")
        return ZonalSpec(grid=grid, F=F, delta=delta, west_facing=west_facing, label=self.template_id)
