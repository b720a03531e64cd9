from ..exceptions import ValidationError
from .basetemplate import BaseTemplate
from .bump import BumpTemplate
from .coswindow import CosWindowTemplate
from .csvprofile import CsvTemplate


def get_available_templates():
    """Registry of zonal-flow templates and their default parameters"""
    return {
        "bump": {"class": BumpTemplate, "params": {"sharpness": 12.0}},
        "cos_window": {"class": CosWindowTemplate, "params": {"sharpness": 8.0}},
        "csv": {"class": CsvTemplate, "params": {}},
    }


def create_template(name, amplitude, sharpness=None, path=None) -> BaseTemplate:
    templates = get_available_templates()
    info = templates.get(name)
    if info is None:
        raise ValidationError(f"Unknown flow template '{name}'. Available: {list(templates)}")
    params = dict(info["params"])
    if sharpness is not None:
        params["sharpness"] = sharpness
    if info["class"] is CsvTemplate:
        params["path"] = path
    return info["class"](amplitude=amplitude, **params)


__all__ = [
    "BaseTemplate",
    "BumpTemplate",
    "CosWindowTemplate",
    "CsvTemplate",
    "create_template",
    "get_available_templates",
]
