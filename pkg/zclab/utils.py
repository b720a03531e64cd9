import asyncio
import logging
import os
from typing import Any, Callable, Iterable

import numpy as np

from .exceptions import ZclError

logger = logging.getLogger(__name__)


class AsyncEvaluator:
    """Runs blocking numeric jobs on worker threads with bounded concurrency."""

    def __init__(self, concurrency=None):
        if concurrency is None:
            concurrency = min(8, os.cpu_count() or 1)
        self.concurrency = max(1, int(concurrency))
        self.semaphore = asyncio.Semaphore(self.concurrency)

    async def evaluate(self, func: Callable, *args, label: str = "", **kwargs):
        async with self.semaphore:
            try:
                return await asyncio.to_thread(func, *args, **kwargs)
            except ZclError as e:
                logger.warning(f"Evaluation {label or func.__name__} failed: {e}")
                raise
            except Exception as e:
                logger.error(f"Unexpected error in evaluation {label or func.__name__}: {e}")
                raise

    async def run(self, tasks: Iterable):
        # results keep task order; failures come back as exception objects
        return await asyncio.gather(*tasks, return_exceptions=True)


def smooth_window(t, sharpness: float) -> np.ndarray:
    """
    C-infinity window exp(-a t^2 / (1 - t^2)) on |t| < 1, exactly zero elsewhere.

    Args:
        t: Points in window units
        sharpness (float): Steepness a > 0

    Returns:
        np.ndarray: Window values with the shape of ``t``
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-sharpness * ti**2 / (1.0 - ti**2))
    return out


def band_window(r, center: float, half_width: float, sharpness: float) -> np.ndarray:
    return smooth_window((np.asarray(r, dtype=float) - center) / half_width, sharpness)


def relative_residual(difference: float, scale: float) -> float:
    difference = abs(float(difference))
    if scale > 0.0:
        return difference / scale
    return difference


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays (possibly nested in dicts/lists) to plain Python."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value
