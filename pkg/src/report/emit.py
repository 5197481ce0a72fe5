from __future__ import annotations

import csv
import enum
import io
import json
import logging
from functools import lru_cache
from itertools import groupby
from pathlib import Path
from typing import Dict, List, Sequence, Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from ..corpus.dataset import IoError
from ..settings import REPORT_TEMPLATE_DIR
from .metrics import MetricsSummary, RobustnessDelta, RowCheck
from .taxonomy import TaxonomyRow, load_taxonomy


LOGGER = logging.getLogger(__name__)

CSV_HEADER = ("dataset", "strategy", "backend", "repeat", "accuracy", "unknown", "exe_acc", "n")
PLOT_METRICS = ("accuracy", "unknown_rate", "exe_acc")


class ReportFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "md"


@lru_cache(maxsize=1)
def _environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(REPORT_TEMPLATE_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        autoescape=False,
    )


def render_csv(cells: Sequence[MetricsSummary]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in cells:
        row = cell.to_dict()
        writer.writerow([cell.dataset, cell.strategy, cell.backend, cell.repeat_label,
                         row["accuracy"], row["unknown_rate"], row["exe_acc"], cell.n])
    return buffer.getvalue()


def render_json(
    cells: Sequence[MetricsSummary],
    deltas: Sequence[RobustnessDelta] = (),
    taxonomy: Sequence[TaxonomyRow] = (),
    checks: Sequence[RowCheck] = (),
) -> str:
    payload: Dict[str, object] = {"cells": [c.to_dict() for c in cells]}
    if deltas:
        payload["robustness"] = [d.to_dict() for d in deltas]
    if taxonomy:
        payload["taxonomy"] = [row.to_dict() for row in taxonomy]
    if checks:
        payload["validation"] = [c.to_dict() for c in checks]
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render_markdown(
    cells: Sequence[MetricsSummary],
    deltas: Sequence[RobustnessDelta] = (),
    taxonomy: Sequence[TaxonomyRow] = (),
    checks: Sequence[RowCheck] = (),
) -> str:
    rows = [c.to_dict() | {"repeat": c.repeat_label} for c in cells]
    datasets = [(name, list(group)) for name, group in groupby(rows, key=lambda r: r["dataset"])]
    template = _environment().get_template("report.md.j2")
    return template.render(
        datasets=datasets,
        deltas=[d.to_dict() for d in deltas],
        taxonomy=[row.to_dict() for row in taxonomy],
        legend=load_taxonomy(),
        checks=[c.to_dict() for c in checks],
    ).rstrip("\n") + "\n"


def load_summaries(path: Union[str, Path]) -> List[MetricsSummary]:
    """Re-read the cells of a JSON report."""
    try:
        with Path(path).open("r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return [MetricsSummary.from_dict(c) for c in payload["cells"]]
    except OSError as exc:
        raise IoError(f"cannot read report {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise IoError(f"malformed report {path}: {exc}") from exc


def plot_data(
    cells: Sequence[MetricsSummary],
    deltas: Sequence[RobustnessDelta] = (),
    taxonomy: Sequence[TaxonomyRow] = (),
) -> Dict[str, object]:
    """Grouped-bar friendly data: one series per method, one group per metric."""
    data: Dict[str, object] = {
        "metrics": list(PLOT_METRICS),
        "series": [
            {
                "dataset": c.dataset,
                "label": f"{c.strategy} ({c.backend})",
                "repeat": c.repeat_label,
                "values": {m: c.to_dict()[m] for m in PLOT_METRICS},
            }
            for c in cells
        ],
    }
    if deltas:
        data["robustness"] = [
            {"label": f"{d.strategy} ({d.backend})", "mutated": d.mutated, "acc_drop": d.to_dict()["acc_drop"]}
            for d in deltas
        ]
    if taxonomy:
        legend = load_taxonomy()
        data["taxonomy"] = {
            "categories": [{"code": e.category.value, "name": e.name, "color": e.hex_color} for e in legend],
            "series": [row.to_dict() for row in taxonomy],
        }
    return data


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def emit_report(
    cells: Sequence[MetricsSummary],
    fmt: ReportFormat,
    out_dir: Union[str, Path],
    *,
    deltas: Sequence[RobustnessDelta] = (),
    taxonomy: Sequence[TaxonomyRow] = (),
    checks: Sequence[RowCheck] = (),
    stem: str = "report",
) -> Path:
    """Write ``report.<fmt>`` and ``plot_data.json`` into ``out_dir``; return the report path."""
    out = Path(out_dir)
    if fmt is ReportFormat.CSV:
        text = render_csv(cells)
    elif fmt is ReportFormat.JSON:
        text = render_json(cells, deltas, taxonomy, checks)
    else:
        text = render_markdown(cells, deltas, taxonomy, checks)
    path = _write(out / f"{stem}.{fmt.value}", text)
    _write(out / "plot_data.json", json.dumps(plot_data(cells, deltas, taxonomy), indent=2) + "\n")
    LOGGER.info("Wrote %s (%d cells)", path, len(cells))
    return path
