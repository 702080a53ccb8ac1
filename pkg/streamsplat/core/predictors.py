import re
from typing import Callable, Dict

import numpy as np

from streamsplat.core.errors import ConfigurationError, PredictorContractError
from streamsplat.core.gir import GaussianImage
from streamsplat.core.pixelmap import PixelGaussians
from streamsplat.core.redundancy import RedundancyReport

try:
    from typing import Protocol
except ImportError:  # pragma: no cover
    from typing_extensions import Protocol  # type: ignore


class MaskPredictor(Protocol):
    """
    Produces the soft keep-mask of a frame: 1 keeps the history Gaussian at a pixel, 0 discards it.
    Implementations must be deterministic and return values in [0, 1].
    """

    @property
    def name(self) -> str:
        ...

    def __call__(self, history: GaussianImage, current: PixelGaussians, report: RedundancyReport) -> np.ndarray:
        ...


class IouHeuristicPredictor:
    name = "iou_heuristic"

    def __call__(self, history: GaussianImage, current: PixelGaussians, report: RedundancyReport) -> np.ndarray:
        return 1.0 - report.iou


class GtOraclePredictor:
    name = "gt_oracle"

    def __call__(self, history: GaussianImage, current: PixelGaussians, report: RedundancyReport) -> np.ndarray:
        return 1.0 - report.gt_mask.astype(np.float64)


class ConstantPredictor:
    def __init__(self, value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ConfigurationError(f"constant predictor value must lie in [0, 1], got {value}")

        self.value = value

    @property
    def name(self) -> str:
        return f"constant({self.value:g})"

    def __call__(self, history: GaussianImage, current: PixelGaussians, report: RedundancyReport) -> np.ndarray:
        return np.full(report.iou.shape, self.value, dtype=np.float64)


_PREDICTORS: Dict[str, Callable[[], MaskPredictor]] = {
    IouHeuristicPredictor.name: IouHeuristicPredictor,
    GtOraclePredictor.name: GtOraclePredictor,
}

_CONSTANT = re.compile(r"^constant\(\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\)$")


def make_predictor(name: str) -> MaskPredictor:
    """
    Looks up a predictor by name: "iou_heuristic", "gt_oracle" or "constant(v)".
    """
    name = name.strip()
    factory = _PREDICTORS.get(name)
    if factory:
        return factory()

    match = _CONSTANT.match(name)
    if match:
        return ConstantPredictor(float(match.group(1)))

    choices = ", ".join(sorted(_PREDICTORS)) + ", constant(v)"
    raise ConfigurationError(f"unknown predictor '{name}', expected one of {choices}")


def checked_mask(predictor: MaskPredictor, soft: np.ndarray, shape: tuple) -> np.ndarray:
    soft = np.asarray(soft, dtype=np.float64)
    if soft.shape != shape:
        raise PredictorContractError(f"predictor {predictor.name} returned shape {soft.shape}, expected {shape}")

    if not np.all(np.isfinite(soft)):
        raise PredictorContractError(f"predictor {predictor.name} returned non-finite values")

    if soft.size and (soft.min() < 0.0 or soft.max() > 1.0):
        raise PredictorContractError(
            f"predictor {predictor.name} returned values in [{soft.min()}, {soft.max()}], outside [0, 1]"
        )

    return soft
