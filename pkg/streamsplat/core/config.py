import dataclasses
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Tuple

from streamsplat.core.errors import ConfigurationError
from streamsplat.core.gir import Strategy
from streamsplat.core.losses import REDUCTIONS
from streamsplat.core.predictors import make_predictor
from streamsplat.core.redundancy import NeighborSource, RedundancyConfig

Color = Tuple[float, float, float]
Resolution = Tuple[int, int]


@dataclass(frozen=True)
class PipelineConfig:
    """
    Every tunable of the streaming loop. Values are validated on construction.
    """

    tau_mask: float = 0.5
    k_sigma: float = 3.0
    window_radius: int = 2
    theta_red: float = 0.7
    predictor: str = "iou_heuristic"
    strategy: str = "most_contributive"
    gir_tau: float = 0.5
    background: Color = (0.0, 0.0, 0.0)
    neighbors: str = "current"
    frame_stride: int = 1
    tile_size: int = 16
    workers: int = 1
    resolution: Optional[Resolution] = None
    loss_reduction: str = "mean"

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_mask <= 1.0:
            raise ConfigurationError(f"tau_mask must lie in [0, 1], got {self.tau_mask}")

        if not 0.0 < self.gir_tau < 1.0:
            raise ConfigurationError(f"gir_tau must lie in (0, 1), got {self.gir_tau}")

        if len(self.background) != 3 or not all(0.0 <= c <= 1.0 for c in self.background):
            raise ConfigurationError(f"background must be three values in [0, 1], got {self.background}")

        for name in ("frame_stride", "tile_size", "workers"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1, got {getattr(self, name)}")

        if self.resolution is not None and (len(self.resolution) != 2 or min(self.resolution) < 1):
            raise ConfigurationError(f"resolution must be a positive (width, height) pair, got {self.resolution}")

        if self.loss_reduction not in REDUCTIONS:
            raise ConfigurationError(f"loss_reduction must be one of {', '.join(REDUCTIONS)}")

        Strategy.parse(self.strategy)
        make_predictor(self.predictor)
        self.redundancy_config()

    def redundancy_config(self) -> RedundancyConfig:
        return RedundancyConfig(
            k_sigma=self.k_sigma,
            window_radius=self.window_radius,
            theta_red=self.theta_red,
            neighbors=NeighborSource.parse(self.neighbors),
        )

    def replace(self, **changes: Any) -> "PipelineConfig":
        return from_mapping(changes, self)


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _convert(key: str, value: Any) -> Any:
    try:
        if key in ("tau_mask", "k_sigma", "theta_red", "gir_tau"):
            return float(value)

        if key in ("window_radius", "frame_stride", "tile_size", "workers"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)

        if key == "background":
            return tuple(float(c) for c in value)

        if key == "resolution":
            return None if value is None else tuple(int(c) for c in value)

        return str(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"invalid value {value!r} for config key '{key}'") from None


def from_mapping(values: Mapping[str, Any], base: Optional[PipelineConfig] = None) -> PipelineConfig:
    """
    Applies the entries of `values` on top of `base` (the defaults if omitted).

    Raises:
        ConfigurationError: An unknown key or an invalid value.
    """
    base = base or PipelineConfig()
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigurationError(f"unknown config key '{unknown[0]}'")

    changes = {key: _convert(key, value) for key, value in values.items() if value is not None or key == "resolution"}
    return dataclasses.replace(base, **changes)


def to_mapping(config: PipelineConfig) -> dict:
    result = dataclasses.asdict(config)
    result["background"] = list(config.background)
    result["resolution"] = None if config.resolution is None else list(config.resolution)
    return result
