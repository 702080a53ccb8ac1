from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from streamsplat.core.metrics import format_db, format_ratio

UNSUPPORTED = "n/a"

COMPARISON_COLUMNS = ("Views", "Method", "PSNR", "SSIM", "LPIPS", "c-ratio")
THRESHOLD_COLUMNS = ("τ", "Method", "PSNR", "SSIM", "LPIPS", "c-ratio")


@dataclass
class MetricsRow:
    method: str
    psnr: float
    ssim: float
    c_ratio: Optional[float] = None
    views: Optional[int] = None
    tau: Optional[float] = None


@dataclass
class MetricsTable:
    title: str
    columns: Sequence[str]
    rows: List[List[str]] = field(default_factory=lambda: [])

    def add_row(self, *cells: str) -> None:
        if len(cells) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} cells, got {len(cells)}")

        self.rows.append(list(cells))

    def to_text(self) -> str:
        """
        Plain text rendering with left aligned, space padded columns.
        """
        widths = [len(c) for c in self.columns]
        for row in self.rows:
            widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

        def line(cells: Sequence[str]) -> str:
            return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

        lines = [self.title, line(self.columns), line(["-" * w for w in widths])]
        lines.extend(line(row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _ratio(value: Optional[float]) -> str:
    return "-" if value is None else format_ratio(value)


def comparison_table(rows: Sequence[MetricsRow], title: str = "Novel view synthesis") -> MetricsTable:
    table = MetricsTable(title, COMPARISON_COLUMNS)
    for row in rows:
        table.add_row(
            "-" if row.views is None else str(row.views),
            row.method,
            format_db(row.psnr),
            f"{row.ssim:.3f}",
            UNSUPPORTED,
            _ratio(row.c_ratio),
        )
    return table


def threshold_table(rows: Sequence[MetricsRow], title: str = "Masking threshold") -> MetricsTable:
    table = MetricsTable(title, THRESHOLD_COLUMNS)
    for row in rows:
        table.add_row(
            "-" if row.tau is None else f"{row.tau:g}",
            row.method,
            format_db(row.psnr),
            f"{row.ssim:.3f}",
            UNSUPPORTED,
            _ratio(row.c_ratio),
        )
    return table
