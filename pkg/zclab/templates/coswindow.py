import numpy as np

from ..utils import smooth_window
from .basetemplate import BaseTemplate


class CosWindowTemplate(BaseTemplate):
    """cos(pi r / 2d) tapered by the smooth band window; broad, rotation-like."""

    template_id = "cos_window"

    def shape(self, r, half_width, d):
        return np.cos(0.5 * np.pi * r / d) * smooth_window(r / half_width, self.sharpness)
