import argparse
from typing import Any, Dict, List, Optional, Protocol, Tuple, Union, cast

from streamsplat.core.errors import StreamSplatError, get_error_message
from streamsplat.core.filesystem import Filesystem
from streamsplat.core.options import (
    EvalOptions,
    GirOptions,
    Options,
    PipelineOverrides,
    RenderOptions,
    StreamOptions,
    SweepOptions,
    SynthOptions,
)
from streamsplat.synthetic.spec import spec_from_mapping

from ._yaml import ParseError, expand_vars, parse_yaml

PIPELINE_FLAGS = (
    "tau_mask",
    "k_sigma",
    "window_radius",
    "theta_red",
    "predictor",
    "strategy",
    "background",
    "gir_tau",
    "neighbors",
    "frame_stride",
    "workers",
)

SYNTH_FLAGS = (
    "seed",
    "gaussian_count",
    "duplicate_fraction",
    "duplicate_jitter",
    "frame_count",
    "eval_count",
    "trajectory",
    "width",
    "height",
)


class OptionBuilder(Protocol):
    def __call__(self, config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
        ...


def create_options(config: argparse.Namespace, filesystem: Filesystem) -> Union[Options, ParseError]:
    yaml_config: Dict[str, Any] = {}
    configfile: Optional[str] = getattr(config, "configfile", None)
    if configfile:
        yaml_or_error = parse_yaml(configfile, filesystem)
        if isinstance(yaml_or_error, ParseError):
            return yaml_or_error
        yaml_config = yaml_or_error

    option_builders: Dict[str, OptionBuilder] = {
        "synth": build_synth_options,
        "stream": build_stream_options,
        "render": build_render_options,
        "gir": build_gir_options,
        "eval": build_eval_options,
        "sweep": build_sweep_options,
    }

    builder = option_builders[config.command]
    try:
        return builder(config, yaml_config)
    except ParseError as err:
        return err
    except StreamSplatError as err:
        return ParseError(get_error_message(err))


def _flags(config: argparse.Namespace, names: Tuple[str, ...]) -> Dict[str, Any]:
    """
    The flags that were given on the command line. Unset flags are None and are left out.
    """
    return {name: getattr(config, name) for name in names if getattr(config, name, None) is not None}


def _expanded(path: str) -> str:
    return cast(str, expand_vars(path))


def pipeline_overrides(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> PipelineOverrides:
    overrides = PipelineOverrides(file=dict(yaml_config), flags=_flags(config, PIPELINE_FLAGS))
    overrides.resolve({})
    return overrides


def build_synth_options(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
    spec = spec_from_mapping(yaml_config)
    spec = spec_from_mapping(_flags(config, SYNTH_FLAGS), spec)
    return SynthOptions(out=_expanded(config.out), spec=spec)


def build_stream_options(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
    return StreamOptions(
        manifest=_expanded(config.manifest),
        out=_expanded(config.out),
        overrides=pipeline_overrides(config, yaml_config),
        save_girs=cast(bool, config.save_girs),
    )


def build_render_options(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
    resolved = PipelineOverrides(file=dict(yaml_config), flags=_flags(config, ("background",))).resolve({})
    return RenderOptions(
        scene=_expanded(config.scene),
        camera=_expanded(config.camera),
        out=_expanded(config.out),
        background=resolved.background,
    )


def build_gir_options(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
    resolved = PipelineOverrides(file=dict(yaml_config), flags=_flags(config, ("strategy", "gir_tau"))).resolve({})
    return GirOptions(
        scene=_expanded(config.scene),
        camera=_expanded(config.camera),
        out=_expanded(config.out),
        strategy=resolved.strategy,
        gir_tau=resolved.gir_tau,
    )


def build_eval_options(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
    return EvalOptions(
        manifest=_expanded(config.manifest),
        scenes=[_expanded(scene) for scene in config.scenes],
        out=_expanded(config.out),
        overrides=pipeline_overrides(config, yaml_config),
    )


def build_sweep_options(config: argparse.Namespace, yaml_config: Dict[str, Any]) -> Options:
    taus = cast(List[float], config.taus)
    invalid = [tau for tau in taus if not 0.0 <= tau <= 1.0]
    if invalid:
        raise ParseError(f"masking thresholds must lie in [0, 1], got {invalid[0]}")

    return SweepOptions(
        manifest=_expanded(config.manifest),
        out=_expanded(config.out),
        taus=taus,
        overrides=pipeline_overrides(config, yaml_config),
    )
