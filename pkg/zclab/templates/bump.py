from ..utils import smooth_window
from .basetemplate import BaseTemplate


class BumpTemplate(BaseTemplate):
    """Single smooth bump filling the support band."""

    template_id = "bump"

    def shape(self, r, half_width, d):
        return smooth_window(r / half_width, self.sharpness)
