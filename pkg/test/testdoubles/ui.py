from typing import List, Tuple

from streamsplat.core.pipeline import FrameStats
from streamsplat.core.tables import MetricsTable
from streamsplat.ui import UI


class RecordingUI(UI):
    """
    Keeps every message, frame update and table it receives.
    """

    def __init__(self) -> None:
        self.messages: List[Tuple[str, str]] = []
        self.updates: List[FrameStats] = []
        self.tables: List[MetricsTable] = []

    def update(self, stats: FrameStats) -> None:
        self.updates.append(stats)

    def table(self, table: MetricsTable) -> None:
        self.tables.append(table)

    def error(self, text: str) -> None:
        self.messages.append(("error", text))

    def info(self, text: str) -> None:
        self.messages.append(("info", text))

    def success(self, text: str) -> None:
        self.messages.append(("success", text))

    def launch(self, text: str) -> None:
        self.messages.append(("launch", text))

    def texts(self, kind: str) -> List[str]:
        return [text for k, text in self.messages if k == kind]
