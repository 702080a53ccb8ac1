from typing import Any, Callable, Dict, Type

import streamsplat.core.workflows as workflows
from streamsplat.core.filesystem import Filesystem
from streamsplat.core.options import (
    EvalOptions,
    GirOptions,
    Options,
    RenderOptions,
    StreamOptions,
    SweepOptions,
    SynthOptions,
)
from streamsplat.core.workflows.workflow import Workflow

_WorkflowBuilder = Callable[[Filesystem, Any], Workflow]
_WorkflowRegistry = Dict[Type[Any], _WorkflowBuilder]

_Workflows: _WorkflowRegistry = {
    SynthOptions: workflows.synthworkflow,
    StreamOptions: workflows.streamworkflow,
    RenderOptions: workflows.renderworkflow,
    GirOptions: workflows.girworkflow,
    EvalOptions: workflows.evalworkflow,
    SweepOptions: workflows.sweepworkflow,
}


def make_workflow(filesystem: Filesystem, options: Options) -> Workflow:
    workflow_builder = _Workflows[type(options)]
    return workflow_builder(filesystem, options)
