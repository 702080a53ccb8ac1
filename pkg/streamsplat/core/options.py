from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Tuple, Union

from streamsplat.core.config import PipelineConfig, from_mapping
from streamsplat.synthetic.spec import SyntheticSceneSpec

Options = Union[
    "SynthOptions", "StreamOptions", "RenderOptions", "GirOptions", "EvalOptions", "SweepOptions"
]

DEFAULT_TAUS = [0.1, 0.3, 0.5]


@dataclass
class PipelineOverrides:
    """
    Config values from a --config file and from per-key flags, applied on top of the
    defaults and the manifest's own config block.
    """

    file: Dict[str, Any] = field(default_factory=lambda: {})
    flags: Dict[str, Any] = field(default_factory=lambda: {})

    def resolve(self, manifest_config: Mapping[str, Any]) -> PipelineConfig:
        config = from_mapping(manifest_config)
        config = from_mapping(self.file, config)
        return from_mapping(self.flags, config)


@dataclass
class SynthOptions:
    out: str
    spec: SyntheticSceneSpec = field(default_factory=SyntheticSceneSpec)


@dataclass
class StreamOptions:
    manifest: str
    out: str
    overrides: PipelineOverrides = field(default_factory=PipelineOverrides)
    save_girs: bool = False


@dataclass
class RenderOptions:
    scene: str
    camera: str
    out: str
    background: Tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass
class GirOptions:
    scene: str
    camera: str
    out: str
    strategy: str = "most_contributive"
    gir_tau: float = 0.5


@dataclass
class EvalOptions:
    manifest: str
    scenes: List[str]
    out: str
    overrides: PipelineOverrides = field(default_factory=PipelineOverrides)


@dataclass
class SweepOptions:
    manifest: str
    out: str
    taus: List[float] = field(default_factory=lambda: list(DEFAULT_TAUS))
    overrides: PipelineOverrides = field(default_factory=PipelineOverrides)
