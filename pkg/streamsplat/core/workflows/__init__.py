from typing import List

from streamsplat.core.filesystem import Filesystem
from streamsplat.core.options import (
    EvalOptions,
    GirOptions,
    RenderOptions,
    StreamOptions,
    SweepOptions,
    SynthOptions,
)
from streamsplat.core.workflows.stages import (
    EvalStage,
    GirStage,
    LoadSequenceStage,
    RenderStage,
    StreamStage,
    SweepStage,
    SynthStage,
    WriteStreamResultsStage,
)
from streamsplat.core.workflows.workflow import Stage, Workflow


def synthworkflow(filesystem: Filesystem, options: SynthOptions) -> Workflow:
    return Workflow([SynthStage(filesystem, options)])


def streamworkflow(filesystem: Filesystem, options: StreamOptions) -> Workflow:
    load_stage = LoadSequenceStage(filesystem, options.manifest, options.overrides)
    stream_stage = StreamStage(load_stage, keep_girs=options.save_girs)
    stages: List[Stage] = [
        load_stage,
        stream_stage,
        WriteStreamResultsStage(filesystem, stream_stage, options.out),
    ]

    return Workflow(stages)


def renderworkflow(filesystem: Filesystem, options: RenderOptions) -> Workflow:
    return Workflow([RenderStage(filesystem, options)])


def girworkflow(filesystem: Filesystem, options: GirOptions) -> Workflow:
    return Workflow([GirStage(filesystem, options)])


def evalworkflow(filesystem: Filesystem, options: EvalOptions) -> Workflow:
    load_stage = LoadSequenceStage(filesystem, options.manifest, options.overrides)
    return Workflow([load_stage, EvalStage(filesystem, load_stage, options.scenes, options.out)])


def sweepworkflow(filesystem: Filesystem, options: SweepOptions) -> Workflow:
    load_stage = LoadSequenceStage(filesystem, options.manifest, options.overrides)
    return Workflow([load_stage, SweepStage(filesystem, load_stage, options.taus, options.out)])
