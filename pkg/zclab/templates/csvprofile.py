import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from ..exceptions import ExportError, ValidationError
from .basetemplate import BaseTemplate


class CsvTemplate(BaseTemplate):
    """User profile read from a CSV with columns ``r,F``, spline-interpolated to the nodes.

    The samples are divided by their largest-magnitude value, so the shape peaks at +1
    whatever sign the file uses and ``amplitude`` alone sets the scale and direction.
    """

    template_id = "csv"

    def __init__(self, path, amplitude, sharpness=12.0):
        super().__init__(amplitude=amplitude, sharpness=sharpness)
        if not path:
            raise ValidationError("The csv template needs a profile path (flow.path)")
        self.path = Path(path)
        self._table = None

    def _load(self):
        if self._table is None:
            try:
                table = pd.read_csv(self.path)
            except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
                raise ExportError(f"Failed to read zonal profile {self.path}: {e}") from e
            if list(table.columns[:2]) != ["r", "F"]:
                raise ExportError(f"Zonal profile {self.path} must have header 'r,F'")
            table = table.sort_values("r")
            if table["r"].duplicated().any() or len(table) < 4:
                raise ExportError(f"Zonal profile {self.path} needs at least 4 distinct r samples")
            values = table["F"].to_numpy(float)
            if not np.all(np.isfinite(values)):
                raise ExportError(f"Zonal profile {self.path} has non-finite F samples")
            peak = values[np.argmax(np.abs(values))]
            if peak == 0.0:
                raise ExportError(f"Zonal profile {self.path} is identically zero")
            self._table = (table["r"].to_numpy(float), values / peak)
            logging.info(f"Loaded zonal profile with {len(table)} samples from {self.path}")
        return self._table

    def shape(self, r, half_width, d):
        r_samples, values = self._load()
        spline = CubicSpline(r_samples, values)
        out = spline(r)
        out[(r < r_samples[0]) | (r > r_samples[-1])] = 0.0
        return out
