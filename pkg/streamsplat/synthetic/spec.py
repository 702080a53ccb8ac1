import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Tuple

from streamsplat.core.errors import SpecError

Range = Tuple[float, float]

TRAJECTORIES = ("orbit", "linear")


@dataclass(frozen=True)
class SyntheticSceneSpec:
    """
    Description of a desk scale test scene: random base Gaussians inside a cube of side
    `extent`, a fraction of them duplicated with a small position jitter, and a camera
    trajectory around (orbit) or along (linear) the cube.
    """

    seed: int = 0
    gaussian_count: int = 200
    extent: float = 1.5
    duplicate_fraction: float = 0.0
    duplicate_jitter: float = 0.005
    min_separation: float = 0.01
    scale_range: Range = (0.01, 0.03)
    alpha_range: Range = (0.6, 1.0)
    trajectory: str = "orbit"
    frame_count: int = 10
    eval_count: int = 3
    width: int = 64
    height: int = 64
    focal: float = 80.0
    radius: float = 4.5
    elevation: float = 0.3

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise SpecError(f"trajectory needs at least one frame, got {self.frame_count}")

        if self.eval_count < 0:
            raise SpecError(f"eval_count must be non-negative, got {self.eval_count}")

        if self.gaussian_count < 0:
            raise SpecError(f"gaussian_count must be non-negative, got {self.gaussian_count}")

        if not 0.0 <= self.duplicate_fraction <= 1.0:
            raise SpecError(f"duplicate_fraction must lie in [0, 1], got {self.duplicate_fraction}")

        if not self.duplicate_jitter >= 0.0:
            raise SpecError(f"duplicate_jitter must be non-negative, got {self.duplicate_jitter}")

        if self.min_separation < self.duplicate_jitter:
            raise SpecError("min_separation must not be smaller than duplicate_jitter")

        if self.trajectory not in TRAJECTORIES:
            raise SpecError(f"unknown trajectory '{self.trajectory}', expected one of {', '.join(TRAJECTORIES)}")

        low, high = self.scale_range
        if not 0.0 < low <= high:
            raise SpecError(f"invalid scale_range {self.scale_range}")

        low, high = self.alpha_range
        if not 0.0 <= low <= high <= 1.0:
            raise SpecError(f"invalid alpha_range {self.alpha_range}")

        if self.width < 1 or self.height < 1 or not self.focal > 0 or not self.extent > 0:
            raise SpecError("image size, focal length and extent must be positive")

        if not self.radius > self.extent:
            raise SpecError(f"camera radius {self.radius} must exceed the scene extent {self.extent}")

    @property
    def duplicate_count(self) -> int:
        return int(math.ceil(self.duplicate_fraction * self.gaussian_count - 1e-9))


_FIELDS = {f.name for f in dataclasses.fields(SyntheticSceneSpec)}


def spec_from_mapping(values: Mapping[str, Any], base: Optional[SyntheticSceneSpec] = None) -> SyntheticSceneSpec:
    """
    Raises:
        SpecError: An unknown key or a value of the wrong type.
    """
    unknown = sorted(set(values) - _FIELDS)
    if unknown:
        raise SpecError(f"unknown scene spec key '{unknown[0]}'")

    base = base or SyntheticSceneSpec()
    changes = {}
    for key, value in values.items():
        if value is None:
            continue

        current = getattr(base, key)
        try:
            if isinstance(current, tuple):
                changes[key] = tuple(float(v) for v in value)
            elif isinstance(current, str):
                changes[key] = str(value)
            else:
                changes[key] = type(current)(value)
        except (TypeError, ValueError):
            raise SpecError(f"invalid value {value!r} for scene spec key '{key}'") from None

    return dataclasses.replace(base, **changes)


def spec_to_mapping(spec: SyntheticSceneSpec) -> dict:
    result = dataclasses.asdict(spec)
    result["scale_range"] = list(spec.scale_range)
    result["alpha_range"] = list(spec.alpha_range)
    return result
