from streamsplat.core.errors import EXIT_CANCELED, EXIT_SUCCESS, EXIT_USAGE, exit_code_of, get_error_message
from streamsplat.core.filesystem import Filesystem
from streamsplat.core.options import Options
from streamsplat.core.workflowfactory import make_workflow
from streamsplat.core.workflows.workflow import Workflow, WorkflowNotStartedError
from streamsplat.ui import UI


class Application:
    def __init__(self, filesystem: Filesystem, ui: UI) -> None:
        self._filesystem = filesystem
        self._ui = ui
        self._workflow = Workflow([])
        self._canceled = False

    def run(self, options: Options) -> int:
        try:
            return self._run_workflow(options)
        except Exception as err:
            self._ui.error(get_error_message(err))
            return exit_code_of(err)

    def _run_workflow(self, options: Options) -> int:
        self._workflow = make_workflow(self._filesystem, options)
        success = self._workflow.run(self._ui)
        if self._canceled or self._workflow.canceled:
            return EXIT_CANCELED

        return EXIT_SUCCESS if success else EXIT_USAGE

    def cancel(self) -> int:
        self._canceled = True
        try:
            self._workflow.cancel(self._ui)
        except WorkflowNotStartedError:
            pass

        return EXIT_CANCELED
