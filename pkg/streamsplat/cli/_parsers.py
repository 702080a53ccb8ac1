import argparse
from importlib import metadata
from typing import NoReturn

from streamsplat.synthetic.spec import TRAJECTORIES

from ._yaml import ParseError

_SubParsers = "argparse._SubParsersAction[argparse.ArgumentParser]"


class _Parser(argparse.ArgumentParser):
    """
    Raises ParseError on usage errors instead of exiting the process.
    """

    def error(self, message: str) -> NoReturn:
        raise ParseError(f"{self.format_usage()}{self.prog}: error: {message}")


def get_parser() -> argparse.ArgumentParser:
    parser = _Parser("streamsplat")
    _add_version_flag(parser)

    subparsers = parser.add_subparsers(dest="command", required=True)
    _setup_synth_parser(subparsers)
    _setup_stream_parser(subparsers)
    _setup_render_parser(subparsers)
    _setup_gir_parser(subparsers)
    _setup_eval_parser(subparsers)
    _setup_sweep_parser(subparsers)

    return parser


def _add_version_flag(parser: argparse.ArgumentParser) -> None:
    meta = metadata.metadata("streamsplat")
    parser.add_argument(
        "--version",
        action="version",
        version=f"{meta['name']} {meta['version']}",
    )


def _setup_synth_parser(subparsers: _SubParsers) -> None:
    parser = subparsers.add_parser("synth", help="Generate a synthetic image sequence")
    _add_configfile_arg(parser, "A YAML scene description")
    _add_out_arg(parser)
    parser.add_argument("--seed", type=int, dest="seed")
    parser.add_argument("--gaussians", type=int, dest="gaussian_count")
    parser.add_argument("--duplicates", type=float, dest="duplicate_fraction", help="Fraction of duplicated Gaussians")
    parser.add_argument("--jitter", type=float, dest="duplicate_jitter")
    parser.add_argument("--frames", type=int, dest="frame_count")
    parser.add_argument("--eval-views", type=int, dest="eval_count")
    parser.add_argument("--trajectory", choices=TRAJECTORIES, dest="trajectory")
    parser.add_argument("--width", type=int, dest="width")
    parser.add_argument("--height", type=int, dest="height")


def _setup_stream_parser(subparsers: _SubParsers) -> None:
    parser = subparsers.add_parser("stream", help="Stream a sequence into a Gaussian store")
    _add_manifest_arg(parser)
    _add_out_arg(parser)
    _add_pipeline_args(parser)
    parser.add_argument("--save-girs", default=False, dest="save_girs", action="store_true")


def _setup_render_parser(subparsers: _SubParsers) -> None:
    parser = subparsers.add_parser("render", help="Render a scene from one camera")
    _add_scene_camera_args(parser)
    _add_configfile_arg(parser, "A YAML file with pipeline settings, of which the background is used")
    _add_out_arg(parser)
    parser.add_argument("--background", type=float, nargs=3, dest="background", metavar=("R", "G", "B"))


def _setup_gir_parser(subparsers: _SubParsers) -> None:
    parser = subparsers.add_parser("gir", help="Write the Gaussian image of a scene")
    _add_scene_camera_args(parser)
    _add_configfile_arg(parser, "A YAML file with pipeline settings, of which strategy and gir_tau are used")
    _add_out_arg(parser)
    parser.add_argument("--strategy", choices=("nearest", "most_contributive"), dest="strategy")
    parser.add_argument("--gir-tau", type=float, dest="gir_tau")


def _setup_eval_parser(subparsers: _SubParsers) -> None:
    parser = subparsers.add_parser("eval", help="Score scenes on the held out views of a sequence")
    _add_manifest_arg(parser)
    parser.add_argument("--scene", action="append", required=True, dest="scenes", help="May be given repeatedly")
    _add_out_arg(parser)
    _add_pipeline_args(parser)


def _setup_sweep_parser(subparsers: _SubParsers) -> None:
    parser = subparsers.add_parser("sweep", help="Stream a sequence for several masking thresholds")
    _add_manifest_arg(parser)
    _add_out_arg(parser)
    parser.add_argument("--taus", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    _add_pipeline_args(parser)


def _add_configfile_arg(parser: argparse.ArgumentParser, help: str) -> None:
    parser.add_argument("--config", type=str, dest="configfile", help=help)


def _add_out_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=str, required=True, help="The output directory")


def _add_manifest_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("manifest", type=str, help="A sequence manifest")


def _add_scene_camera_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scene", type=str, help="A Gaussian scene in PLY format")
    parser.add_argument("--camera", type=str, required=True, help="A YAML camera document")


def _add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    _add_configfile_arg(parser, "A YAML file with pipeline settings")
    group = parser.add_argument_group("pipeline settings")
    group.add_argument("--tau-mask", type=float, dest="tau_mask")
    group.add_argument("--k-sigma", type=float, dest="k_sigma")
    group.add_argument("--window-radius", type=int, dest="window_radius")
    group.add_argument("--theta-red", type=float, dest="theta_red")
    group.add_argument("--predictor", type=str, dest="predictor", help="iou_heuristic, gt_oracle or constant(v)")
    group.add_argument("--strategy", choices=("nearest", "most_contributive"), dest="strategy")
    group.add_argument("--background", type=float, nargs=3, dest="background", metavar=("R", "G", "B"))
    group.add_argument("--gir-tau", type=float, dest="gir_tau")
    group.add_argument("--neighbors", choices=("current", "history", "both"), dest="neighbors")
    group.add_argument("--frame-stride", type=int, dest="frame_stride")
    group.add_argument("--workers", type=int, dest="workers")
